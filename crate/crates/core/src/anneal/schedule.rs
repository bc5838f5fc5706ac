//! Annealing schedules `A(s)`, `B(s)` on `s ∈ [0, 1]`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// `A = 1 − s`, `B = s`.
    Linear,
    /// Piecewise-linear interpolation through `(s, A, B)` samples.
    Tabulated { s: Vec<f64>, a: Vec<f64>, b: Vec<f64> },
}

/// Total time `T` (internal units ħ/E) split into `steps` equal steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub total_time: f64,
    pub steps: usize,
    pub shape: Shape,
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let t = (x - x0) / (x1 - x0);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

impl Shape {
    pub fn a(&self, s: f64) -> f64 {
        match self {
            Shape::Linear => 1.0 - s,
            Shape::Tabulated { s: xs, a, .. } => interp(xs, a, s),
        }
    }

    pub fn b(&self, s: f64) -> f64 {
        match self {
            Shape::Linear => s,
            Shape::Tabulated { s: xs, b, .. } => interp(xs, b, s),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let Shape::Tabulated { s, a, b } = self else { return Ok(()) };
        if s.len() < 2 || a.len() != s.len() || b.len() != s.len() {
            return Err(Error::InvalidSchedule("tabulated schedule needs at least two aligned samples".into()));
        }
        if s[0] != 0.0 || *s.last().unwrap() != 1.0 || s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSchedule("s samples must increase strictly from 0 to 1".into()));
        }
        if a[0] != 1.0 || b[0] != 0.0 || *a.last().unwrap() != 0.0 || *b.last().unwrap() != 1.0 {
            return Err(Error::InvalidSchedule("endpoints must be A(0)=1, B(0)=0, A(1)=0, B(1)=1".into()));
        }
        if a.iter().chain(b).any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidSchedule("A and B must lie in [0, 1]".into()));
        }
        if a.windows(2).any(|w| w[1] > w[0]) || b.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidSchedule("A must be non-increasing and B non-decreasing".into()));
        }
        Ok(())
    }
}

impl Schedule {
    pub fn linear(total_time: f64, steps: usize) -> Self {
        Schedule { total_time, steps, shape: Shape::Linear }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_time.is_finite() && self.total_time > 0.0) {
            return Err(Error::InvalidSchedule(format!("total time must be positive, got {}", self.total_time)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidSchedule("step count must be at least 1".into()));
        }
        self.shape.validate()
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.steps as f64
    }

    pub fn a(&self, s: f64) -> f64 {
        self.shape.a(s)
    }

    pub fn b(&self, s: f64) -> f64 {
        self.shape.b(s)
    }
}

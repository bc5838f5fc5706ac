use std::path::Path;

use fgqa::anneal::{evolve, spectral_gap, success_probability, Dephasing, EvolveOptions, GapResult, Schedule, Shape};
use fgqa::capnet::{extract, uh_sweep, CellGeometry, Extraction, LatticeSpec};
use fgqa::embed::{compile_physical, embed_complete_graph, verify_embedding, Embedding, LayoutMask, VerificationReport};
use fgqa::ising::{ground_states_bruteforce, EnergyUnit, IsingModel, QubitParams, Spin, BRUTE_FORCE_LIMIT};
use fgqa::tunneling::{fermi_energy, shifted_fermi, wkb_delta, BarrierParams};
use serde::Serialize;

use crate::args::{AnnealArgs, AnnealFlags, Command, EmbedArgs, ExtractArgs, SweepArgs, TunnelArgs};
use crate::output::{csv_bytes, read_json, to_json, Artifacts, CliError, CliResult};

pub fn run(command: &Command) -> CliResult<Artifacts> {
    match command {
        Command::Extract(a) => run_extract(a),
        Command::SweepUh(a) => run_sweep(a),
        Command::Tunnel(a) => run_tunnel(a),
        Command::Embed(a) => run_embed(a),
        Command::Anneal(a) => run_anneal(a),
        Command::Pipeline(a) => crate::pipeline::run_pipeline(a),
    }
}

pub fn load_lattice(path: &Path) -> CliResult<LatticeSpec> {
    let spec: LatticeSpec = read_json(path)?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_problem(path: &Path) -> CliResult<IsingModel> {
    read_json(path)
}

pub fn load_barrier(path: Option<&Path>) -> CliResult<BarrierParams> {
    let p = match path {
        Some(path) => read_json(path)?,
        None => BarrierParams::default(),
    };
    p.validate()?;
    Ok(p)
}

#[derive(Debug, Serialize)]
pub struct ExtractReport {
    pub rows: usize,
    pub cols: usize,
    pub model: IsingModel,
    #[serde(rename = "U_h_eV")]
    pub u_h_ev: Vec<f64>,
    #[serde(rename = "n_G")]
    pub n_g: Vec<f64>,
    pub q0: Vec<f64>,
}

impl ExtractReport {
    pub fn new(spec: &LatticeSpec, ex: Extraction) -> Self {
        ExtractReport { rows: spec.rows, cols: spec.cols, model: ex.model, u_h_ev: ex.u_h_ev, n_g: ex.n_g, q0: ex.q0 }
    }
}

fn run_extract(a: &ExtractArgs) -> CliResult<Artifacts> {
    let spec = load_lattice(&a.lattice)?;
    let report = ExtractReport::new(&spec, extract(&spec)?);
    let mut out = Artifacts::new();
    out.push("extract.json", to_json(&report)?);
    Ok(out)
}

/// `count` evenly spaced points over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect(),
    }
}

pub const SWEEP_HEADER: [&str; 6] = ["L_nm", "Z_nm", "d_ox_nm", "material", "U_h_eV", "air_oxide_ratio"];

fn run_sweep(a: &SweepArgs) -> CliResult<Artifacts> {
    if a.grid == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    let base = match &a.lattice {
        Some(p) => load_lattice(p)?.geometry,
        None => CellGeometry::default(),
    };
    let ls = linspace(5.0, 30.0, a.grid);
    let points = uh_sweep(&base, &ls, &[10.0, 100.0], &[2.0, 4.0, 8.0])?;
    let mut rows = Vec::with_capacity(points.len() * 2);
    for p in &points {
        for (material, u) in [("oxide", p.u_h_oxide_ev), ("air", p.u_h_air_ev)] {
            rows.push(vec![
                p.l_nm.to_string(),
                p.z_nm.to_string(),
                p.d_ox_nm.to_string(),
                material.to_string(),
                u.to_string(),
                p.ratio().to_string(),
            ]);
        }
    }
    let mut out = Artifacts::new();
    out.push("sweep_uh.csv", csv_bytes(&SWEEP_HEADER, &rows)?);
    Ok(out)
}

fn run_tunnel(a: &TunnelArgs) -> CliResult<Artifacts> {
    if a.grid == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    let p = load_barrier(a.barrier.as_deref())?;
    let e_f = fermi_energy(p.doping_cm3, p.m_si_ratio)?;
    let span = p.v_ox_ev - e_f;
    if span <= 0.0 {
        return Err(fgqa::Error::OverBarrier { fermi_ev: e_f, barrier_ev: p.v_ox_ev }.into());
    }
    // Half-open interval: the last point stays below the barrier top.
    let mut rows = Vec::with_capacity(a.grid);
    for k in 0..a.grid {
        let v = span * k as f64 / a.grid as f64;
        rows.push(vec![v.to_string(), shifted_fermi(&p, v)?.to_string(), wkb_delta(&p, v)?.to_string()]);
    }
    let mut out = Artifacts::new();
    out.push("tunnel.csv", csv_bytes(&["V_CG", "E_F_prime_eV", "delta_eV"], &rows)?);
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct EmbedReport {
    pub embedding: Embedding,
    pub layout_mask: LayoutMask,
    pub physical: IsingModel,
    pub verification: VerificationReport,
}

/// Array size from the lattice file, or `n × n`.
pub fn array_size(lattice: Option<&LatticeSpec>, n: usize) -> (usize, usize) {
    lattice.map(|s| (s.rows, s.cols)).unwrap_or((n, n))
}

pub fn embed_problem(logical: &IsingModel, rows: usize, cols: usize, margin: f64) -> CliResult<EmbedReport> {
    let embedding = embed_complete_graph(logical, rows, cols, margin)?;
    let (physical, layout_mask) = compile_physical(&embedding, logical)?;
    let verification = verify_embedding(&embedding, logical, &physical)?;
    if !verification.is_clean() {
        return Err(fgqa::Error::EmbeddingIncomplete(verification.violations.join("; ")).into());
    }
    Ok(EmbedReport { embedding, layout_mask, physical, verification })
}

fn run_embed(a: &EmbedArgs) -> CliResult<Artifacts> {
    let logical = load_problem(&a.problem)?;
    let lattice = a.lattice.as_deref().map(load_lattice).transpose()?;
    let (rows, cols) = array_size(lattice.as_ref(), logical.n());
    let report = embed_problem(&logical, rows, cols, a.margin)?;
    let mut out = Artifacts::new();
    out.push("embed.json", to_json(&report)?);
    out.push("layout_mask.json", to_json(&report.layout_mask)?);
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct AnnealReport {
    pub result: fgqa::anneal::AnnealResult,
    /// Probability of the brute-force ground-state set.
    pub success_probability: Option<f64>,
    pub ground_energy: Option<f64>,
    pub ground_states: Option<Vec<Vec<Spin>>>,
    pub gap: Option<GapResult>,
}

/// Evolves `model` under a linear schedule and scores it against brute force.
pub fn anneal_model(
    model: &IsingModel,
    qubits: &QubitParams,
    flags: &AnnealFlags,
    energy_unit_ev: f64,
) -> CliResult<AnnealReport> {
    let sched = Schedule::linear(flags.anneal_time, flags.steps());
    let dephasing = flags.t2_seconds.map(|t2_seconds| Dephasing {
        t2_seconds,
        energy_unit_ev,
        trajectories: flags.trajectories,
    });
    let opts = EvolveOptions { shots: flags.shots, seed: flags.seed, dephasing };
    let result = evolve(model, qubits, &sched, &opts)?;
    let (success, ground_energy, ground_states) = if model.n() <= BRUTE_FORCE_LIMIT {
        let gs = ground_states_bruteforce(model)?;
        (Some(success_probability(&result, &gs.states)?), Some(gs.energy), Some(gs.states))
    } else {
        (None, None, None)
    };
    let gap = flags.grid.map(|g| spectral_gap(model, qubits, &Shape::Linear, g)).transpose()?;
    Ok(AnnealReport { result, success_probability: success, ground_energy, ground_states, gap })
}

fn run_anneal(a: &AnnealArgs) -> CliResult<Artifacts> {
    let model = load_problem(&a.problem)?;
    let energy_unit_ev = match (a.energy_scale_ev, model.unit()) {
        (Some(e), _) => e,
        (None, EnergyUnit::ElectronVolt) => 1.0,
        (None, EnergyUnit::Algorithmic) if a.anneal.t2_seconds.is_some() => {
            return Err(CliError::Usage("--t2-seconds on an algorithmic-unit problem needs --energy-scale-ev".into()))
        }
        (None, EnergyUnit::Algorithmic) => 1.0,
    };
    let qubits = QubitParams::uniform(model.n(), a.delta);
    let report = anneal_model(&model, &qubits, &a.anneal, energy_unit_ev)?;
    let mut out = Artifacts::new();
    out.push("anneal.json", to_json(&report)?);
    if !a.t_sweep.is_empty() {
        out.push("t_sweep.csv", t_sweep_csv(&model, &qubits, &a.anneal, energy_unit_ev, &a.t_sweep)?);
    }
    Ok(out)
}

/// Success probability for each anneal time, with the (time-independent)
/// minimum gap on every row.
fn t_sweep_csv(
    model: &IsingModel,
    qubits: &QubitParams,
    flags: &AnnealFlags,
    energy_unit_ev: f64,
    times: &[f64],
) -> CliResult<Vec<u8>> {
    let grid = flags.grid.unwrap_or(fgqa::anneal::DEFAULT_GRID);
    let min_gap = spectral_gap(model, qubits, &Shape::Linear, grid)?.min_gap;
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let f = AnnealFlags { anneal_time: t, steps: None, grid: None, ..flags.clone() };
        let r = anneal_model(model, qubits, &f, energy_unit_ev)?;
        let p = r.success_probability.ok_or_else(|| {
            CliError::Domain(fgqa::Error::Scale { what: "spin count", got: model.n(), limit: BRUTE_FORCE_LIMIT })
        })?;
        rows.push(vec![t.to_string(), p.to_string(), min_gap.to_string()]);
    }
    csv_bytes(&["T", "P_success", "min_gap"], &rows)
}

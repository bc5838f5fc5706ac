//! End to end: logical problem → embedding → layout-driven hardware
//! extraction → anneal → decoded logical spins.

use fgqa::anneal::EVOLVE_MAX_QUBITS;
use fgqa::capnet::{extract, LatticeSpec};
use fgqa::embed::{decode, BondType, Decoded};
use fgqa::ising::{ground_states_bruteforce, spins_from_index, EnergyUnit, IsingModel, QubitParams, Spin, BRUTE_FORCE_LIMIT};
use fgqa::tunneling::{wkb_delta, BarrierParams};
use serde::Serialize;

use crate::args::PipelineArgs;
use crate::commands::{
    anneal_model, array_size, embed_problem, load_barrier, load_lattice, load_problem, AnnealReport, EmbedReport,
};
use crate::output::{to_json, Artifacts, CliError, CliResult};

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct CouplingStats {
    pub count: usize,
    pub min_abs_ev: f64,
    pub max_abs_ev: f64,
}

impl CouplingStats {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let abs = values.iter().map(|v| v.abs());
        Some(CouplingStats {
            count: values.len(),
            min_abs_ev: abs.clone().fold(f64::INFINITY, f64::min),
            max_abs_ev: abs.fold(0.0, f64::max),
        })
    }
}

/// Capacitive parameters of the array built from the layout mask.
#[derive(Debug, Serialize)]
pub struct HardwareReport {
    pub rows: usize,
    pub cols: usize,
    pub fixed: Option<CouplingStats>,
    pub tunable: Option<CouplingStats>,
    pub absent: Option<CouplingStats>,
    /// Largest coupling across air gaps over the weakest intended coupling.
    pub parasitic_ratio: Option<f64>,
    #[serde(rename = "U_h_min_eV")]
    pub u_h_min_ev: f64,
    #[serde(rename = "U_h_max_eV")]
    pub u_h_max_ev: f64,
    pub barrier: BarrierParams,
    /// WKB Δ at zero control-gate voltage.
    pub delta_ev: f64,
    /// `Δ / max |J|` over intended couplings.
    pub delta_over_j: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct LogicalComparison {
    pub ground_energy: f64,
    pub ground_states: Vec<Vec<Spin>>,
    pub decoded_energy: f64,
    pub matches_optimum: bool,
}

#[derive(Debug, Serialize)]
pub struct PipelineReport {
    pub logical: IsingModel,
    pub seed: u64,
    /// Factor (eV per algorithmic unit) applied before annealing.
    pub energy_scale: f64,
    pub decoded: Decoded,
    pub most_probable_physical: Vec<Spin>,
    pub physical_success_probability: Option<f64>,
    /// Probability of intact chains decoding to a logical ground state.
    pub logical_success_probability: Option<f64>,
    pub brute_force: Option<LogicalComparison>,
    pub hardware: HardwareReport,
    pub norm_drift: f64,
}

fn hardware_report(spec: &LatticeSpec, embed: &EmbedReport, barrier: BarrierParams) -> CliResult<HardwareReport> {
    let mut hw_spec = spec.clone();
    hw_spec.gap_map = embed.layout_mask.to_gap_map();
    let ex = extract(&hw_spec)?;
    let (mut fixed, mut tunable, mut absent) = (Vec::new(), Vec::new(), Vec::new());
    for b in &embed.embedding.bonds {
        let (p, q) = b.gap.endpoints();
        let j = ex.model.coupling(hw_spec.index(p.row, p.col), hw_spec.index(q.row, q.col));
        match b.bond {
            BondType::Fixed { .. } => fixed.push(j),
            BondType::Tunable { .. } => tunable.push(j),
            BondType::Absent => absent.push(j),
        }
    }
    let intended: Vec<f64> = fixed.iter().chain(&tunable).map(|v| v.abs()).collect();
    let weakest = intended.iter().copied().fold(f64::INFINITY, f64::min);
    let strongest = intended.iter().copied().fold(0.0, f64::max);
    let parasitic = absent.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let delta = wkb_delta(&barrier, 0.0)?;
    Ok(HardwareReport {
        rows: hw_spec.rows,
        cols: hw_spec.cols,
        fixed: CouplingStats::of(&fixed),
        tunable: CouplingStats::of(&tunable),
        absent: CouplingStats::of(&absent),
        parasitic_ratio: (weakest.is_finite() && weakest > 0.0 && !absent.is_empty()).then(|| parasitic / weakest),
        u_h_min_ev: ex.u_h_ev.iter().copied().fold(f64::INFINITY, f64::min),
        u_h_max_ev: ex.u_h_ev.iter().copied().fold(0.0, f64::max),
        barrier,
        delta_ev: delta,
        delta_over_j: (strongest > 0.0).then(|| delta / strongest),
    })
}

/// Largest absolute coefficient of the model.
fn max_coefficient(m: &IsingModel) -> f64 {
    m.couplings().values().chain(m.fields()).map(|v| v.abs()).fold(0.0, f64::max)
}

fn rescaled(m: &IsingModel, scale: f64) -> CliResult<IsingModel> {
    let mut out = IsingModel::new(m.n()).with_unit(EnergyUnit::Algorithmic);
    for (&(i, j), &v) in m.couplings() {
        out.set_coupling(i, j, v / scale)?;
    }
    for (i, &h) in m.fields().iter().enumerate() {
        out.set_field(i, h / scale)?;
    }
    Ok(out)
}

pub fn run_pipeline(a: &PipelineArgs) -> CliResult<Artifacts> {
    let logical = load_problem(&a.problem)?;
    let lattice = a.lattice.as_deref().map(load_lattice).transpose()?;
    let (rows, cols) = array_size(lattice.as_ref(), logical.n());
    let spec = lattice.unwrap_or_else(|| LatticeSpec::new(rows, cols, Default::default()));
    let barrier = match &a.barrier {
        Some(p) => load_barrier(Some(p))?,
        None => BarrierParams { length_nm: spec.geometry.length_nm, ..BarrierParams::default() },
    };
    barrier.validate()?;

    let embed = embed_problem(&logical, rows, cols, a.margin)?;
    let hardware = hardware_report(&spec, &embed, barrier)?;

    let physical = &embed.physical;
    if physical.n() > EVOLVE_MAX_QUBITS {
        return Err(fgqa::Error::Scale { what: "physical qubits", got: physical.n(), limit: EVOLVE_MAX_QUBITS }.into());
    }
    let scale = max_coefficient(physical);
    if scale <= 0.0 {
        return Err(CliError::Domain(fgqa::Error::InvalidParameter("problem has no nonzero coefficient".into())));
    }
    let algorithmic = rescaled(physical, scale)?;
    let qubits = QubitParams::uniform(algorithmic.n(), 1.0);
    let anneal: AnnealReport = anneal_model(&algorithmic, &qubits, &a.anneal, scale)?;

    let most_probable = anneal.result.most_probable.clone();
    let decoded = decode(&embed.embedding, &most_probable)?;
    let (brute_force, logical_success) = if logical.n() <= BRUTE_FORCE_LIMIT {
        let gs = ground_states_bruteforce(&logical)?;
        let mut p = 0.0;
        for (idx, &prob) in anneal.result.probabilities.iter().enumerate() {
            let d = decode(&embed.embedding, &spins_from_index(idx, physical.n()))?;
            if d.all_intact() && gs.states.contains(&d.spins) {
                p += prob;
            }
        }
        let cmp = LogicalComparison {
            ground_energy: gs.energy,
            decoded_energy: logical.energy(&decoded.spins)?,
            matches_optimum: decoded.all_intact() && gs.states.contains(&decoded.spins),
            ground_states: gs.states,
        };
        (Some(cmp), Some(p))
    } else {
        (None, None)
    };

    let report = PipelineReport {
        logical: logical.clone(),
        seed: a.anneal.seed,
        energy_scale: scale,
        decoded,
        most_probable_physical: most_probable,
        physical_success_probability: anneal.success_probability,
        logical_success_probability: logical_success,
        brute_force,
        hardware,
        norm_drift: anneal.result.norm_drift,
    };
    let mut out = Artifacts::new();
    out.push("pipeline.json", to_json(&report)?);
    out.push("embed.json", to_json(&embed)?);
    out.push("layout_mask.json", to_json(&embed.layout_mask)?);
    out.push("anneal.json", to_json(&anneal)?);
    Ok(out)
}

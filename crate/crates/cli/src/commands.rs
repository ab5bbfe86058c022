use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use sjj_core::limits::LimitQuery;
use sjj_core::optimize::EXACT_OBJECTIVE_CAP;
use sjj_core::{
    build_hamiltonian, ground_state, optimize_probe, LossChannel, Method, Objective, OptimizerConfig, SjjParams,
    TwoModeState,
};

use crate::config::{ProbeKind, SweepConfig};
use crate::error::{CliError, CliResult};
use crate::sweep::{self, SweepRow, CSV_HEADER};

#[derive(Debug, Clone, Serialize)]
pub struct GroundReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub energy: f64,
    pub cat_ness: f64,
    pub residual: f64,
    pub spectral_gap: f64,
    pub degenerate: bool,
    pub out: Option<PathBuf>,
}

pub fn ground(n: usize, lambda: f64, out: Option<&Path>) -> CliResult<GroundReport> {
    let gs = ground_state(&build_hamiltonian(SjjParams::new(n, lambda)?)?)?;
    if let Some(path) = out {
        sweep::write_atomic(path, gs.state.to_json().as_bytes())?;
    }
    Ok(GroundReport {
        n,
        lambda,
        energy: gs.energy,
        cat_ness: gs.state.cat_ness(),
        residual: gs.diagnostics.residual,
        spectral_gap: gs.diagnostics.spectral_gap,
        degenerate: gs.diagnostics.degenerate,
        out: out.map(Path::to_path_buf),
    })
}

/// Where the state for `qfi` comes from.
#[derive(Debug, Clone)]
pub enum StateSource {
    File(PathBuf),
    Probe { kind: ProbeKind, n: usize, lambda: Option<f64> },
}

#[derive(Debug, Clone)]
pub struct QfiRequest {
    pub source: StateSource,
    pub eta: f64,
    pub k: u32,
    pub method: Method,
    pub phi: f64,
    pub seed: u64,
}

pub fn load_state(path: &Path) -> CliResult<TwoModeState> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(TwoModeState::from_json(&text)?)
}

pub fn qfi(req: &QfiRequest) -> CliResult<SweepRow> {
    if req.k < 1 {
        return Err(CliError::Validation("k must be >= 1".into()));
    }
    if !req.phi.is_finite() {
        return Err(CliError::Validation("phi must be finite".into()));
    }
    let channel = LossChannel::symmetric(req.eta)?;
    let optimizer = OptimizerConfig {
        seed: req.seed,
        ..Default::default()
    };
    let (state, probe, lambda) = match &req.source {
        StateSource::File(p) => (load_state(p)?, None, None),
        StateSource::Probe { kind, n, lambda } => {
            if *kind == ProbeKind::Sjj && lambda.is_none() {
                return Err(CliError::Validation("sjj probe needs --lambda".into()));
            }
            let lam = if *kind == ProbeKind::Sjj { *lambda } else { None };
            (sweep::probe_state(*kind, *n, lam, req.k, &channel, &optimizer)?, Some(*kind), lam)
        }
    };
    if req.method == Method::Analytic && probe != Some(ProbeKind::Noon) {
        return Err(CliError::Validation("the analytic method applies to --probe noon only".into()));
    }
    let fisher = sweep::evaluate(req.method, probe, &state, &channel, req.k, req.phi)?;
    Ok(SweepRow {
        probe: probe.unwrap_or(ProbeKind::File),
        n: state.n(),
        lambda,
        eta: req.eta,
        k: req.k,
        method: req.method,
        fisher: Ok(fisher),
        wall_ms: 0.0,
    })
}

/// Appends a row to a CSV file, writing the header first if the file is new.
pub fn append_row(path: &Path, row: &SweepRow) -> CliResult<()> {
    let fresh = !path.exists() || std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let err = |e: csv::Error| CliError::Validation(format!("csv encoding: {e}"));
    if fresh {
        w.write_record(CSV_HEADER).map_err(err)?;
    }
    w.write_record(row.record()).map_err(err)?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn row_text(row: &SweepRow) -> String {
    format!("{}\n{}\n", CSV_HEADER.join(","), row.record().join(","))
}

pub fn limits(n: usize, k: u32, eta: f64, gamma: Option<f64>) -> CliResult<serde_json::Value> {
    let table = LimitQuery::new(n, k, eta, gamma)?.table();
    let mut v = serde_json::to_value(&table).expect("table serializes");
    v["n_min_round"] = json!(table.n_min.map(f64::round));
    v["n_min_floor"] = json!(table.n_min.map(f64::floor));
    Ok(v)
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: u32,
    pub eta: f64,
    pub objective: Objective,
    pub fisher: f64,
    pub delta_phi: f64,
    pub converged: bool,
    pub converged_starts: usize,
    pub best_start: usize,
    pub iterations: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub fn optimize(n: usize, k: u32, eta: f64, config: &OptimizerConfig, out: Option<&Path>) -> CliResult<OptimizeReport> {
    if config.objective == Objective::Exact && n > EXACT_OBJECTIVE_CAP {
        return Err(CliError::Validation(format!(
            "exact objective is limited to N <= {EXACT_OBJECTIVE_CAP}"
        )));
    }
    let r = optimize_probe(n, k, &LossChannel::symmetric(eta)?, config)?;
    if let Some(path) = out {
        sweep::write_atomic(path, r.state.to_json().as_bytes())?;
    }
    Ok(OptimizeReport {
        n,
        k,
        eta,
        objective: r.objective,
        fisher: r.estimate.value,
        delta_phi: r.estimate.delta_phi_min,
        converged: r.converged,
        converged_starts: r.converged_starts,
        best_start: r.best_start,
        iterations: r.iterations,
        seed: config.seed,
        out: out.map(Path::to_path_buf),
    })
}

pub fn load_config(path: &Path) -> CliResult<SweepConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    SweepConfig::from_json(&text)
}

pub fn print(mut w: impl Write, text: &str) -> CliResult<()> {
    w.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}

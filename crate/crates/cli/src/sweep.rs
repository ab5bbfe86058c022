use std::cmp::Ordering;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use sjj_core::limits::noon_limits;
use sjj_core::qfi::delta_phi;
use sjj_core::{
    binomial_state, build_hamiltonian, ground_state, noon_state, optimize_probe, qfi_exact, qfi_upper_bound,
    LossChannel, Method, OptimizerConfig, SjjParams, TwoModeState,
};

use crate::config::{ProbeKind, SweepConfig, SweepPlan};
use crate::error::{CliError, CliResult};

pub const CSV_HEADER: [&str; 9] = ["probe", "N", "Lambda", "eta", "k", "method", "fisher", "delta_phi", "wall_ms"];

/// Marker written to the numeric columns of a failed grid point.
pub const ERROR_MARKER: &str = "error";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub probe: ProbeKind,
    pub n: usize,
    pub lambda: Option<f64>,
    pub eta: f64,
    pub k: u32,
    pub method: Method,
    pub fisher: Result<f64, String>,
    pub wall_ms: f64,
}

impl SweepRow {
    pub fn delta_phi(&self) -> Option<f64> {
        self.fisher.as_ref().ok().map(|f| delta_phi(*f))
    }

    pub fn record(&self) -> [String; 9] {
        let (fisher, dphi) = match &self.fisher {
            Ok(f) => (f.to_string(), delta_phi(*f).to_string()),
            Err(_) => (ERROR_MARKER.to_string(), ERROR_MARKER.to_string()),
        };
        [
            self.probe.label().to_string(),
            self.n.to_string(),
            self.lambda.map(|l| l.to_string()).unwrap_or_default(),
            self.eta.to_string(),
            self.k.to_string(),
            self.method.as_str().to_string(),
            fisher,
            dphi,
            self.wall_ms.to_string(),
        ]
    }

    fn order(&self, other: &Self) -> Ordering {
        let lam = |r: &Self| r.lambda.unwrap_or(f64::NEG_INFINITY);
        self.probe
            .label()
            .cmp(other.probe.label())
            .then(self.n.cmp(&other.n))
            .then(self.lambda.is_some().cmp(&other.lambda.is_some()))
            .then(lam(self).total_cmp(&lam(other)))
            .then(self.eta.total_cmp(&other.eta))
            .then(self.k.cmp(&other.k))
            .then(self.method.as_str().cmp(other.method.as_str()))
    }
}

/// Builds the probe state for one grid point.
pub fn probe_state(
    probe: ProbeKind,
    n: usize,
    lambda: Option<f64>,
    k: u32,
    channel: &LossChannel,
    optimizer: &OptimizerConfig,
) -> CliResult<TwoModeState> {
    Ok(match probe {
        ProbeKind::Noon => noon_state(n)?,
        ProbeKind::Binomial => binomial_state(n)?,
        ProbeKind::Sjj => {
            let lambda = lambda.ok_or_else(|| CliError::Validation("sjj probe needs --lambda".into()))?;
            ground_state(&build_hamiltonian(SjjParams::new(n, lambda)?)?)?.state
        }
        ProbeKind::Os => optimize_probe(n, k, channel, optimizer)?.state,
        ProbeKind::File => return Err(CliError::Validation("file probes come from --state".into())),
    })
}

/// QFI of `state` by `method`. The analytic value exists for N00N only.
pub fn evaluate(
    method: Method,
    probe: Option<ProbeKind>,
    state: &TwoModeState,
    channel: &LossChannel,
    k: u32,
    phi: f64,
) -> CliResult<f64> {
    Ok(match method {
        Method::Bound => qfi_upper_bound(state, channel, k)?.value,
        Method::Exact => qfi_exact(state, channel, k, phi)?.value,
        Method::Pure => sjj_core::pure_qfi(state, k)?.value,
        Method::Analytic => {
            if probe != Some(ProbeKind::Noon) {
                return Err(CliError::Validation("the analytic method applies to the noon probe only".into()));
            }
            if channel.eta_a() != channel.eta_b() {
                return Err(CliError::Validation("the analytic method needs equal transmissivities".into()));
            }
            noon_limits(state.n(), k, channel.eta_a()).fisher
        }
    })
}

#[derive(Debug, Clone, Copy)]
struct Task {
    probe: ProbeKind,
    n: usize,
    lambda: Option<f64>,
    eta: f64,
    k: u32,
}

fn tasks(plan: &SweepPlan) -> Vec<Task> {
    let mut out = Vec::new();
    for &probe in &plan.probes {
        let lambdas: Vec<Option<f64>> = if probe == ProbeKind::Sjj {
            plan.lambda.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        for &n in &plan.n {
            for &lambda in &lambdas {
                for &eta in &plan.eta {
                    for &k in &plan.k {
                        out.push(Task { probe, n, lambda, eta, k });
                    }
                }
            }
        }
    }
    out
}

fn run_task(plan: &SweepPlan, t: &Task) -> Vec<SweepRow> {
    let methods: Vec<Method> = plan
        .methods
        .iter()
        .copied()
        .filter(|m| *m != Method::Analytic || t.probe == ProbeKind::Noon)
        .collect();
    let start = Instant::now();
    let channel = LossChannel::symmetric(t.eta).map_err(CliError::from);
    let state = channel
        .as_ref()
        .map_err(|e| e.to_string())
        .and_then(|ch| probe_state(t.probe, t.n, t.lambda, t.k, ch, &plan.optimizer).map_err(|e| e.to_string()));
    let prep_ms = start.elapsed().as_secs_f64() * 1e3;
    methods
        .into_iter()
        .map(|method| {
            let begin = Instant::now();
            let fisher = match (&state, &channel) {
                (Ok(s), Ok(ch)) => evaluate(method, Some(t.probe), s, ch, t.k, plan.phi).map_err(|e| e.to_string()),
                (Err(e), _) => Err(e.clone()),
                (_, Err(e)) => Err(e.to_string()),
            };
            let wall_ms = if plan.record_timing {
                prep_ms + begin.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            SweepRow {
                probe: t.probe,
                n: t.n,
                lambda: t.lambda,
                eta: t.eta,
                k: t.k,
                method,
                fisher,
                wall_ms,
            }
        })
        .collect()
}

/// Evaluates every grid point on `jobs` worker threads and returns the rows
/// in sorted order.
pub fn run_plan(plan: &SweepPlan, jobs: Option<usize>) -> CliResult<Vec<SweepRow>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start worker pool: {e}")))?;
    let work = tasks(plan);
    let mut rows: Vec<SweepRow> = pool.install(|| work.par_iter().flat_map_iter(|t| run_task(plan, t)).collect());
    rows.sort_by(|a, b| a.order(b));
    Ok(rows)
}

pub fn write_csv(rows: &[SweepRow]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Validation(format!("csv encoding: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.record()).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::Validation(format!("csv encoding: {e}")))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub probe: &'static str,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Lambda")]
    pub lambda: Option<f64>,
    pub eta: f64,
    pub k: u32,
    pub method: &'static str,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub rows: usize,
    pub optimizer: OptimizerConfig,
    pub phi: f64,
    pub wall_ms_recorded: bool,
    /// The scaled coherent limit for k >= 2 carries a unit prefactor and is
    /// a scaling law only.
    pub scaled_limit_is_scaling_law: bool,
    pub failures: Vec<Failure>,
}

pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub csv_path: PathBuf,
    pub metadata_path: PathBuf,
    pub gnuplot_path: Option<PathBuf>,
}

pub fn config_hash(config: &SweepConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&canonical))
}

pub fn metadata_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

/// Runs a sweep and writes CSV, metadata and optionally a gnuplot script.
/// Failed grid points still produce rows; the error is then `PartialSweep`
/// after everything has been written.
pub fn run_sweep(config: &SweepConfig, out: Option<&Path>, jobs: Option<usize>) -> CliResult<SweepOutput> {
    let plan = config.plan()?;
    let csv_path = out
        .map(Path::to_path_buf)
        .or_else(|| config.output.clone())
        .ok_or_else(|| CliError::Validation("no output path (use --out or \"output\")".into()))?;
    let jobs = jobs.or(config.jobs);
    if jobs == Some(0) {
        return Err(CliError::Validation("jobs must be >= 1".into()));
    }
    let target = SweepTarget {
        csv_path,
        config_sha256: config_hash(config),
        seed: config.seed,
        jobs,
        gnuplot: config.gnuplot,
    };
    execute(&plan, &target)
}

/// Where and how a checked plan is written.
#[derive(Debug, Clone)]
pub struct SweepTarget {
    pub csv_path: PathBuf,
    pub config_sha256: String,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub gnuplot: bool,
}

pub fn execute(plan: &SweepPlan, target: &SweepTarget) -> CliResult<SweepOutput> {
    let rows = run_plan(plan, target.jobs)?;
    let csv_path = target.csv_path.clone();
    write_atomic(&csv_path, &write_csv(&rows)?)?;

    let failures: Vec<Failure> = rows
        .iter()
        .filter_map(|r| {
            r.fisher.as_ref().err().map(|e| Failure {
                probe: r.probe.label(),
                n: r.n,
                lambda: r.lambda,
                eta: r.eta,
                k: r.k,
                method: r.method.as_str(),
                error: e.clone(),
            })
        })
        .collect();
    let meta = RunMetadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: target.config_sha256.clone(),
        seed: target.seed,
        jobs: target.jobs,
        rows: rows.len(),
        optimizer: plan.optimizer,
        phi: plan.phi,
        wall_ms_recorded: plan.record_timing,
        scaled_limit_is_scaling_law: plan.k.iter().any(|&k| k != 1),
        failures,
    };
    let metadata_path = metadata_path(&csv_path);
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    write_atomic(&metadata_path, text.as_bytes())?;

    let gnuplot_path = if target.gnuplot {
        let p = csv_path.with_extension("gp");
        write_atomic(&p, gnuplot_script(&csv_path, plan, &rows).as_bytes())?;
        Some(p)
    } else {
        None
    };

    let failed = meta.failures.len();
    if failed > 0 {
        return Err(CliError::PartialSweep { failed, total: rows.len() });
    }
    Ok(SweepOutput {
        rows,
        csv_path,
        metadata_path,
        gnuplot_path,
    })
}

/// A gnuplot script drawing delta_phi against N (or against eta when only
/// one N is swept), one curve per probe, Lambda, k and method.
pub fn gnuplot_script(csv: &Path, plan: &SweepPlan, rows: &[SweepRow]) -> String {
    let by_eta = plan.n.len() == 1 && plan.eta.len() > 1;
    let (xcol, xlabel) = if by_eta { (4, "eta") } else { (2, "N") };
    let mut series: Vec<(ProbeKind, Option<f64>, u32, Method, Option<f64>)> = Vec::new();
    for r in rows {
        let fixed = if by_eta { None } else { Some(r.eta) };
        let key = (r.probe, r.lambda, r.k, r.method, fixed);
        if !series.contains(&key) {
            series.push(key);
        }
    }
    let file = csv.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset key outside right\nset logscale y\n");
    if !by_eta {
        s.push_str("set logscale x\n");
    }
    s.push_str(&format!("set xlabel '{xlabel}'\nset ylabel 'delta phi_min'\n"));
    let plots: Vec<String> = series
        .iter()
        .map(|(p, l, k, m, e)| {
            let mut cond = format!("strcol(1) eq '{}' && $5 == {k} && strcol(6) eq '{}'", p.label(), m.as_str());
            let mut title = format!("{} k={k} {}", p.label(), m.as_str());
            if let Some(l) = l {
                cond.push_str(&format!(" && abs($3 - {l}) < 1e-12"));
                title.push_str(&format!(" L={l}"));
            }
            if let Some(e) = e {
                cond.push_str(&format!(" && abs($4 - {e}) < 1e-12"));
                title.push_str(&format!(" eta={e}"));
            }
            format!("'{file}' every ::1 using (({cond}) ? ${xcol} : 1/0):8 with linespoints title '{title}'")
        })
        .collect();
    s.push_str("plot ");
    s.push_str(&plots.join(", \\\n     "));
    s.push('\n');
    s
}

/// Reads a sweep CSV back into `(record fields)` for inspection.
pub fn read_csv(path: &Path) -> CliResult<Vec<csv::StringRecord>> {
    let text = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let mut r = csv::Reader::from_reader(text.as_slice());
    r.records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Validation(format!("reading {}: {e}", path.display())))
}

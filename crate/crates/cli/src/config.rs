use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sjj_core::fock::DEFAULT_MAX_N;
use sjj_core::qfi::DEFAULT_EXACT_CAP;
use sjj_core::{Method, OptimizerConfig};

use crate::error::{CliError, CliResult};

/// Grid axis: an explicit list or an inclusive `{start, stop, step}` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    /// Range points are rounded to 12 decimals so that e.g. `0.3 + 70 * 0.01`
    /// lands on `1.0` rather than just above it.
    pub fn values(&self) -> CliResult<Vec<f64>> {
        match self {
            Grid::List(v) => Ok(v.clone()),
            &Grid::Range { start, stop, step } => {
                if !(step > 0.0 && start.is_finite() && stop.is_finite()) {
                    return Err(CliError::Validation(format!(
                        "range needs finite bounds and step > 0 (got {start}..{stop} step {step})"
                    )));
                }
                if stop < start {
                    return Ok(Vec::new());
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                Ok((0..count)
                    .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Binomial,
    /// A state read from a document; only produced by `qfi --state`.
    File,
    Noon,
    Os,
    Sjj,
}

impl ProbeKind {
    pub fn label(&self) -> &'static str {
        match self {
            ProbeKind::Binomial => "binomial",
            ProbeKind::File => "file",
            ProbeKind::Noon => "noon",
            ProbeKind::Os => "os",
            ProbeKind::Sjj => "sjj",
        }
    }

    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "binomial" => Ok(ProbeKind::Binomial),
            "noon" => Ok(ProbeKind::Noon),
            "os" => Ok(ProbeKind::Os),
            "sjj" => Ok(ProbeKind::Sjj),
            other => Err(CliError::Validation(format!("unknown probe '{other}'"))),
        }
    }
}

/// A sweep as read from its JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub probes: Vec<ProbeKind>,
    #[serde(rename = "N")]
    pub n: Grid,
    /// Required when `sjj` is among the probes, ignored otherwise.
    #[serde(default, rename = "Lambda")]
    pub lambda: Option<Grid>,
    pub eta: Grid,
    pub k: Grid,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; defaults to the number of logical cores.
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Settings for the `os` probe. The seed above takes precedence.
    #[serde(default)]
    pub optimizer: Option<OptimizerConfig>,
    /// Record measured wall time per row. Off by default so that repeated
    /// runs give identical bytes; the column then holds 0.
    #[serde(default)]
    pub record_timing: bool,
    /// Also write a gnuplot script next to the CSV.
    #[serde(default)]
    pub gnuplot: bool,
}

/// Fully expanded and checked sweep.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub probes: Vec<ProbeKind>,
    pub n: Vec<usize>,
    pub lambda: Vec<f64>,
    pub eta: Vec<f64>,
    pub k: Vec<u32>,
    pub methods: Vec<Method>,
    pub phi: f64,
    pub optimizer: OptimizerConfig,
    pub record_timing: bool,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl SweepConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| invalid(format!("sweep config: {e}")))
    }

    pub fn plan(&self) -> CliResult<SweepPlan> {
        if self.probes.is_empty() {
            return Err(invalid("no probes given"));
        }
        if self.methods.is_empty() {
            return Err(invalid("no methods given"));
        }
        let mut probes = self.probes.clone();
        probes.sort();
        probes.dedup();
        let mut methods = self.methods.clone();
        methods.sort_by_key(|m| m.as_str());
        methods.dedup();
        if probes.contains(&ProbeKind::File) {
            return Err(invalid("sweeps take named probes: noon, binomial, os, sjj"));
        }
        if methods.contains(&Method::Pure) {
            return Err(invalid("sweep methods are bound, exact and analytic"));
        }
        if methods.contains(&Method::Analytic) && !probes.contains(&ProbeKind::Noon) {
            return Err(invalid("the analytic method applies to the noon probe only"));
        }

        let n = integers(&self.n, "N")?;
        if let Some(&bad) = n.iter().find(|&&v| v < 1 || v > DEFAULT_MAX_N) {
            return Err(invalid(format!("N = {bad} outside 1..={DEFAULT_MAX_N}")));
        }
        if probes.contains(&ProbeKind::Sjj) && n.iter().any(|&v| v < 2) {
            return Err(invalid("sjj probes need N >= 2"));
        }
        if methods.contains(&Method::Exact) {
            if let Some(&big) = n.iter().find(|&&v| v > DEFAULT_EXACT_CAP) {
                return Err(invalid(format!(
                    "exact method requested for N = {big} above the cap of {DEFAULT_EXACT_CAP}; use bound"
                )));
            }
        }

        let eta = nonempty(self.eta.values()?, "eta")?;
        if let Some(bad) = eta.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
            return Err(invalid(format!("eta = {bad} outside (0, 1]")));
        }
        let k: Vec<u32> = integers(&self.k, "k")?.into_iter().map(|v| v as u32).collect();
        if k.contains(&0) {
            return Err(invalid("k must be >= 1"));
        }

        let lambda = if probes.contains(&ProbeKind::Sjj) {
            let grid = self.lambda.as_ref().ok_or_else(|| invalid("sjj probes need a Lambda grid"))?;
            let v = nonempty(grid.values()?, "Lambda")?;
            if let Some(bad) = v.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
                return Err(invalid(format!("Lambda = {bad} must be finite and >= 0")));
            }
            sorted(v)
        } else {
            Vec::new()
        };
        if !self.phi.is_finite() {
            return Err(invalid("phi must be finite"));
        }

        let mut optimizer = self.optimizer.unwrap_or_default();
        optimizer.seed = self.seed;
        optimizer.validate().map_err(|e| invalid(e.to_string()))?;
        if let Some(0) = self.jobs {
            return Err(invalid("jobs must be >= 1"));
        }

        Ok(SweepPlan {
            probes,
            n,
            lambda,
            eta: sorted(eta),
            k,
            methods,
            phi: self.phi,
            optimizer,
            record_timing: self.record_timing,
        })
    }
}

fn nonempty(v: Vec<f64>, name: &str) -> CliResult<Vec<f64>> {
    if v.is_empty() {
        Err(invalid(format!("{name} grid is empty")))
    } else {
        Ok(v)
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn integers(grid: &Grid, name: &str) -> CliResult<Vec<usize>> {
    let values = nonempty(grid.values()?, name)?;
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        if !(v >= 0.0 && v.fract() == 0.0 && v < 1e9) {
            return Err(invalid(format!("{name} = {v} is not a non-negative integer")));
        }
        out.push(v as usize);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SweepConfig {
        SweepConfig::from_json(r#"{"probes":["noon"],"N":[4],"eta":[0.9],"k":[1],"methods":["bound"]}"#).unwrap()
    }

    #[test]
    fn ranges_land_on_endpoints() {
        let g = Grid::Range { start: 0.3, stop: 1.0, step: 0.01 };
        let v = g.values().unwrap();
        assert_eq!(v.len(), 71);
        assert_eq!(*v.last().unwrap(), 1.0);
        assert_eq!(Grid::Range { start: 10.0, stop: 100.0, step: 10.0 }.values().unwrap().len(), 10);
        assert!(Grid::Range { start: 0.0, stop: 1.0, step: 0.0 }.values().is_err());
    }

    #[test]
    fn parses_both_grid_forms() {
        let c = SweepConfig::from_json(
            r#"{"probes":["sjj","noon"],"N":{"start":10,"stop":30,"step":10},"Lambda":[2.1],
                "eta":{"start":0.5,"stop":1.0,"step":0.25},"k":[3,1],"methods":["bound","analytic"]}"#,
        )
        .unwrap();
        let p = c.plan().unwrap();
        assert_eq!(p.n, vec![10, 20, 30]);
        assert_eq!(p.eta, vec![0.5, 0.75, 1.0]);
        assert_eq!(p.k, vec![1, 3]);
        assert_eq!(p.probes, vec![ProbeKind::Noon, ProbeKind::Sjj]);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = base();
        c.n = Grid::List(vec![]);
        assert!(c.plan().is_err());
        let mut c = base();
        c.methods = vec![];
        assert!(c.plan().is_err());
        let mut c = base();
        c.probes = vec![ProbeKind::Sjj];
        assert!(c.plan().is_err());
        let mut c = base();
        c.methods = vec![Method::Exact];
        c.n = Grid::List(vec![151.0]);
        assert!(c.plan().is_err());
        let mut c = base();
        c.eta = Grid::List(vec![1.2]);
        assert!(c.plan().is_err());
        let mut c = base();
        c.n = Grid::List(vec![2.5]);
        assert!(c.plan().is_err());
        let mut c = base();
        c.probes = vec![ProbeKind::Os];
        c.methods = vec![Method::Analytic];
        assert!(c.plan().is_err());
        assert!(SweepConfig::from_json(r#"{"probes":["noon"],"N":[4],"eta":[0.9],"k":[1],"methods":["bound"],"typo":1}"#).is_err());
    }
}

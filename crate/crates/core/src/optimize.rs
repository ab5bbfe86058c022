//! Search for the probe state that maximises the QFI under loss.
//!
//! Amplitudes are restricted to real non-negative values on the unit sphere.
//! The bound objective depends on the state only through `|A_n|^2`, so this
//! loses nothing there; for the exact objective it is an assumption.
//!
//! Each start runs projected gradient ascent on the sphere with Armijo
//! backtracking. The bound uses its analytic gradient; the exact objective
//! uses central differences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::LossChannel;
use crate::qfi::{qfi_exact_with_cap, BoundEvaluator, QfiEstimate};
use crate::sjj::{binomial_state, build_hamiltonian, ground_state, noon_state, SjjParams, TwoModeState};

/// Largest `N` for which the exact objective is accepted.
pub const EXACT_OBJECTIVE_CAP: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Bound,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub max_iterations: usize,
    pub rel_tolerance: f64,
    pub seed: u64,
    pub objective: Objective,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 16,
            max_iterations: 2000,
            rel_tolerance: 1e-9,
            seed: 0,
            objective: Objective::Bound,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts < 1 {
            return Err(Error::domain("optimizer needs at least one start"));
        }
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::domain("optimizer tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub state: TwoModeState,
    pub estimate: QfiEstimate,
    pub objective: Objective,
    /// Index of the winning start (0 = N00N, 1 = binomial, 2 = uniform).
    pub best_start: usize,
    pub iterations: usize,
    /// At least one start met the tolerance within the iteration cap.
    pub converged: bool,
    pub converged_starts: usize,
}

/// Scaled objective on (unnormalised) non-negative amplitudes.
enum Target {
    Bound(BoundEvaluator),
    Exact { channel: LossChannel, k: u32, scale: f64 },
}

impl Target {
    fn value(&self, amps: &[f64]) -> Result<f64> {
        match self {
            Target::Bound(ev) => {
                let norm: f64 = amps.iter().map(|a| a * a).sum();
                let x: Vec<f64> = amps.iter().map(|a| a * a / norm).collect();
                Ok(ev.value(&x))
            }
            Target::Exact { channel, k, scale } => {
                let state = TwoModeState::from_real(amps)?;
                Ok(qfi_exact_with_cap(&state, channel, *k, 0.0, EXACT_OBJECTIVE_CAP)?.value / scale)
            }
        }
    }

    /// Value and gradient with respect to the amplitudes of a unit vector.
    fn value_and_gradient(&self, amps: &[f64]) -> Result<(f64, Vec<f64>)> {
        match self {
            Target::Bound(ev) => {
                let x: Vec<f64> = amps.iter().map(|a| a * a).collect();
                let (v, gx) = ev.value_and_gradient(&x);
                Ok((v, gx.iter().zip(amps).map(|(g, a)| 2.0 * a * g).collect()))
            }
            Target::Exact { .. } => {
                let v = self.value(amps)?;
                let mut grad = vec![0.0; amps.len()];
                let mut probe = amps.to_vec();
                for n in 0..amps.len() {
                    let h = 1e-6 * amps[n].abs().max(1e-3);
                    probe[n] = amps[n] + h;
                    let up = self.value(&probe)?;
                    probe[n] = amps[n] - h;
                    let down = self.value(&probe)?;
                    probe[n] = amps[n];
                    grad[n] = (up - down) / (2.0 * h);
                }
                Ok((v, grad))
            }
        }
    }
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a = a.abs() / norm);
    v
}

fn initial_point(total: usize, index: usize, seed: u64) -> Result<Vec<f64>> {
    let real = |s: TwoModeState| s.amplitudes().iter().map(|a| a.re).collect::<Vec<_>>();
    Ok(match index {
        0 => real(noon_state(total)?),
        1 => real(binomial_state(total)?),
        2 => unit(vec![1.0; total + 1]),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            unit((0..=total).map(|_| StandardNormal.sample(&mut rng)).collect())
        }
    })
}

struct StartOutcome {
    amps: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn ascend(target: &Target, mut a: Vec<f64>, config: &OptimizerConfig) -> Result<StartOutcome> {
    let (mut v, mut g) = target.value_and_gradient(&a)?;
    let mut step = 1.0;
    for it in 0..config.max_iterations {
        let radial: f64 = g.iter().zip(&a).map(|(x, y)| x * y).sum();
        let tangent: Vec<f64> = g.iter().zip(&a).map(|(x, y)| x - radial * y).collect();
        let slope: f64 = tangent.iter().map(|t| t * t).sum();
        if slope == 0.0 {
            return Ok(StartOutcome { amps: a, value: v, iterations: it, converged: true });
        }
        step *= 2.0;
        let accepted = loop {
            let candidate = unit(a.iter().zip(&tangent).map(|(x, t)| x + step * t).collect());
            let cv = target.value(&candidate)?;
            if cv >= v + 1e-4 * step * slope {
                break Some((candidate, cv));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((candidate, cv)) = accepted else {
            // no ascent direction left at working precision
            return Ok(StartOutcome { amps: a, value: v, iterations: it, converged: true });
        };
        let change = (cv - v).abs() / cv.abs().max(f64::MIN_POSITIVE);
        a = candidate;
        (v, g) = target.value_and_gradient(&a)?;
        if change <= config.rel_tolerance {
            return Ok(StartOutcome { amps: a, value: v, iterations: it + 1, converged: true });
        }
    }
    Ok(StartOutcome {
        amps: a,
        value: v,
        iterations: config.max_iterations,
        converged: false,
    })
}

/// Multi-start maximisation of the chosen objective over two-mode probes.
pub fn optimize_probe(n: usize, k: u32, channel: &LossChannel, config: &OptimizerConfig) -> Result<OptimizationResult> {
    config.validate()?;
    if n < 1 {
        return Err(Error::domain("N must be >= 1"));
    }
    let target = match config.objective {
        Objective::Bound => Target::Bound(BoundEvaluator::new(n, *channel, k)?),
        Objective::Exact => {
            if n > EXACT_OBJECTIVE_CAP {
                return Err(Error::Capacity { n, cap: EXACT_OBJECTIVE_CAP });
            }
            Target::Exact {
                channel: *channel,
                k,
                scale: (n as f64).powi(2 * k as i32),
            }
        }
    };

    let outcomes = (0..config.starts)
        .into_par_iter()
        .map(|i| ascend(&target, initial_point(n, i, config.seed)?, config))
        .collect::<Result<Vec<_>>>()?;

    let converged_starts = outcomes.iter().filter(|o| o.converged).count();
    let (best_start, best) = outcomes
        .iter()
        .enumerate()
        .fold(None::<(usize, &StartOutcome)>, |acc, (i, o)| match acc {
            Some((_, b)) if b.value >= o.value => acc,
            _ => Some((i, o)),
        })
        .expect("at least one start");

    let state = TwoModeState::from_real(&best.amps)?;
    let estimate = match &target {
        Target::Bound(ev) => ev.estimate(&state)?,
        Target::Exact { channel, k, .. } => qfi_exact_with_cap(&state, channel, *k, 0.0, EXACT_OBJECTIVE_CAP)?,
    };
    Ok(OptimizationResult {
        state,
        estimate,
        objective: config.objective,
        best_start,
        iterations: best.iterations,
        converged: converged_starts > 0,
        converged_starts,
    })
}

/// One probe in an ordering comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingRow {
    pub label: String,
    pub lambda: Option<f64>,
    pub fisher: f64,
    pub delta_phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub optimal: OrderingRow,
    pub candidates: Vec<OrderingRow>,
    /// Labels of candidates whose objective exceeds the optimum beyond tolerance.
    pub violations: Vec<String>,
}

impl OrderingReport {
    pub fn optimal_dominates(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Relative slack allowed when comparing a candidate against the optimum.
pub const DOMINANCE_TOLERANCE: f64 = 1e-9;

/// Compares the optimised probe against N00N, binomial and SJJ ground states.
pub fn figure_ordering_check(
    n: usize,
    k: u32,
    channel: &LossChannel,
    lambdas: &[f64],
    config: &OptimizerConfig,
) -> Result<OrderingReport> {
    let os = optimize_probe(n, k, channel, config)?;
    let evaluate = |state: &TwoModeState| -> Result<f64> {
        Ok(match config.objective {
            Objective::Bound => crate::qfi::qfi_upper_bound(state, channel, k)?.value,
            Objective::Exact => qfi_exact_with_cap(state, channel, k, 0.0, EXACT_OBJECTIVE_CAP)?.value,
        })
    };
    let row = |label: String, lambda: Option<f64>, fisher: f64| OrderingRow {
        label,
        lambda,
        fisher,
        delta_phi: crate::qfi::delta_phi(fisher),
    };
    let mut candidates = vec![
        row("noon".into(), None, evaluate(&noon_state(n)?)?),
        row("binomial".into(), None, evaluate(&binomial_state(n)?)?),
    ];
    if n >= 2 {
        for &lambda in lambdas {
            let gs = ground_state(&build_hamiltonian(SjjParams::new(n, lambda)?)?)?;
            candidates.push(row(format!("sjj({lambda})"), Some(lambda), evaluate(&gs.state)?));
        }
    }
    let optimal = row("os".into(), None, os.estimate.value);
    let violations = candidates
        .iter()
        .filter(|c| c.fisher > optimal.fisher * (1.0 + DOMINANCE_TOLERANCE))
        .map(|c| c.label.clone())
        .collect();
    Ok(OrderingReport {
        optimal,
        candidates,
        violations,
    })
}

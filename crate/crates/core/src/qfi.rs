//! Quantum Fisher information of the phase-encoded probe.
//!
//! Three routes are provided:
//!
//! - [`pure_qfi`]: `4 Var(n^k)` of a pure state.
//! - [`qfi_upper_bound`]: the convexity bound, i.e. the probability-weighted
//!   pure-state QFI of every loss branch.
//! - [`qfi_exact`]: the mixed-state QFI from the eigendecomposition of each
//!   density-matrix sector, in symmetric-logarithmic-derivative form
//!   `sum_{ij} 2 |<i|d rho|j>|^2 / (lambda_i + lambda_j)`.
//!
//! All sums run on the generator rescaled to `(n/N)^k`; the result is
//! multiplied by `N^(2k)` at the end.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{CompensatedSum, LossChannel, LossKernel};
use crate::loss::{branches_by_sector, decompose};
use crate::sjj::{build_hamiltonian, ground_state, SjjParams, TwoModeState};

/// Largest `N` accepted by [`qfi_exact`] unless overridden.
pub const DEFAULT_EXACT_CAP: usize = 150;

/// Relative floor on `lambda_i + lambda_j` in the SLD sum.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pure,
    Exact,
    Bound,
    Analytic,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Pure => "pure",
            Method::Exact => "exact",
            Method::Bound => "bound",
            Method::Analytic => "analytic",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure" => Ok(Method::Pure),
            "exact" => Ok(Method::Exact),
            "bound" => Ok(Method::Bound),
            "analytic" => Ok(Method::Analytic),
            other => Err(Error::domain(format!("unknown method '{other}'"))),
        }
    }
}

/// A QFI value with the precision it implies, `delta_phi_min = F^(-1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiEstimate {
    pub value: f64,
    pub method: Method,
    pub delta_phi_min: f64,
    pub k: u32,
    pub channel: LossChannel,
}

impl QfiEstimate {
    pub fn new(value: f64, method: Method, k: u32, channel: LossChannel) -> Self {
        let value = value.max(0.0);
        Self {
            value,
            method,
            delta_phi_min: delta_phi(value),
            k,
            channel,
        }
    }
}

/// `F^(-1/2)`, infinite for `F = 0`.
pub fn delta_phi(fisher: f64) -> f64 {
    if fisher > 0.0 {
        1.0 / fisher.sqrt()
    } else {
        f64::INFINITY
    }
}

fn check_k(k: u32) -> Result<()> {
    if k < 1 {
        Err(Error::domain("phase exponent k must be >= 1"))
    } else {
        Ok(())
    }
}

fn scaled_generator(total: usize, k: u32) -> Vec<f64> {
    let nf = total as f64;
    (0..=total).map(|n| (n as f64 / nf).powi(k as i32)).collect()
}

fn fisher_scale(total: usize, k: u32) -> f64 {
    (total as f64).powi(2 * k as i32)
}

/// `4 sum w (g - mean)^2 / sum w`, with the total weight.
fn weighted_variance(weights: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let mut s0 = CompensatedSum::new();
    let mut s1 = CompensatedSum::new();
    for (w, g) in weights.clone() {
        s0.add(w);
        s1.add(w * g);
    }
    let total = s0.total();
    if total <= 0.0 {
        return (0.0, 0.0);
    }
    let mean = s1.total() / total;
    let var: CompensatedSum = weights.map(|(w, g)| w * (g - mean) * (g - mean)).collect();
    (total, var.total() / total)
}

/// `F_Q = 4 [<n^2k> - <n^k>^2]` for a pure state.
pub fn pure_qfi(state: &TwoModeState, k: u32) -> Result<QfiEstimate> {
    check_k(k)?;
    let total = state.n();
    let g = scaled_generator(total, k);
    let p = state.probabilities();
    let (_, var) = weighted_variance(p.iter().copied().zip(g.iter().copied()));
    Ok(QfiEstimate::new(
        4.0 * var * fisher_scale(total, k),
        Method::Pure,
        k,
        LossChannel::lossless(),
    ))
}

/// Evaluates the QFI upper bound and its gradient with respect to the
/// occupation probabilities `x_n = |A_n|^2`.
///
/// In centred form the bound reads
/// `4 sum_{l_a,l_b} sum_n x_n B^n (g_n - gbar_{l_a,l_b})^2`,
/// which is the branch-averaged pure-state QFI without the cancellation of the
/// two-term expression. Both value and gradient are rescaled by `N^(-2k)`.
#[derive(Debug, Clone)]
pub struct BoundEvaluator {
    k: u32,
    kernel: LossKernel,
    generator: Vec<f64>,
}

const PARALLEL_MIN_N: usize = 48;

impl BoundEvaluator {
    pub fn new(total: usize, channel: LossChannel, k: u32) -> Result<Self> {
        check_k(k)?;
        if total < 1 {
            return Err(Error::domain("N must be >= 1"));
        }
        Ok(Self {
            k,
            kernel: LossKernel::new(total, channel)?,
            generator: scaled_generator(total, k),
        })
    }

    pub fn total(&self) -> usize {
        self.kernel.total()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn channel(&self) -> LossChannel {
        *self.kernel.channel()
    }

    /// Converts a scaled objective back to a Fisher information.
    pub fn scale(&self) -> f64 {
        fisher_scale(self.total(), self.k)
    }

    /// Contribution of all branches with a given `l_b`. Optionally adds the
    /// gradient contribution into `grad`.
    fn column(&self, probs: &[f64], l_b: usize, mut grad: Option<&mut [f64]>) -> f64 {
        let total = self.total();
        let g = &self.generator;
        let mut acc = CompensatedSum::new();
        let mut w = vec![0.0; total + 1];
        for l_a in 0..=total - l_b {
            let hi = total - l_a;
            let mut s0 = 0.0;
            let mut s1 = 0.0;
            for n in l_b..=hi {
                let b = self.kernel.weight(n, l_a, l_b);
                w[n] = b;
                let wn = probs[n] * b;
                s0 += wn;
                s1 += wn * g[n];
            }
            // empty branches contribute nothing, and the one-sided derivative
            // along any single occupation is zero as well
            if s0 <= 0.0 {
                continue;
            }
            let mean = s1 / s0;
            let mut var = 0.0;
            for n in l_b..=hi {
                let d = g[n] - mean;
                var += probs[n] * w[n] * d * d;
            }
            acc.add(var);
            if let Some(grad) = grad.as_deref_mut() {
                for n in l_b..=hi {
                    let d = g[n] - mean;
                    grad[n] += 4.0 * w[n] * d * d;
                }
            }
        }
        4.0 * acc.total()
    }

    /// Scaled bound `F~ / N^(2k)` for occupation probabilities `probs`.
    pub fn value(&self, probs: &[f64]) -> f64 {
        let total = self.total();
        assert_eq!(probs.len(), total + 1, "probability vector length");
        let parts: Vec<f64> = if total >= PARALLEL_MIN_N {
            (0..=total).into_par_iter().map(|l_b| self.column(probs, l_b, None)).collect()
        } else {
            (0..=total).map(|l_b| self.column(probs, l_b, None)).collect()
        };
        parts.into_iter().collect::<CompensatedSum>().total()
    }

    /// Scaled bound and its gradient in `probs`.
    pub fn value_and_gradient(&self, probs: &[f64]) -> (f64, Vec<f64>) {
        let total = self.total();
        assert_eq!(probs.len(), total + 1, "probability vector length");
        let run = |l_b: usize| {
            let mut grad = vec![0.0; total + 1];
            let v = self.column(probs, l_b, Some(&mut grad));
            (v, grad)
        };
        let parts: Vec<(f64, Vec<f64>)> = if total >= PARALLEL_MIN_N {
            (0..=total).into_par_iter().map(run).collect()
        } else {
            (0..=total).map(run).collect()
        };
        let mut value = CompensatedSum::new();
        let mut grad = vec![0.0; total + 1];
        for (v, g) in parts {
            value.add(v);
            grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        }
        (value.total(), grad)
    }

    pub fn estimate(&self, state: &TwoModeState) -> Result<QfiEstimate> {
        if state.n() != self.total() {
            return Err(Error::domain(format!(
                "state has N = {} but the evaluator was built for N = {}",
                state.n(),
                self.total()
            )));
        }
        let scaled = self.value(&state.probabilities());
        Ok(QfiEstimate::new(scaled * self.scale(), Method::Bound, self.k, self.channel()))
    }
}

/// Upper bound `F~_Q`, the loss-branch average of the pure-state QFI.
pub fn qfi_upper_bound(state: &TwoModeState, channel: &LossChannel, k: u32) -> Result<QfiEstimate> {
    BoundEvaluator::new(state.n(), *channel, k)?.estimate(state)
}

/// Exact mixed-state QFI at phase `phi` with the default size cap.
pub fn qfi_exact(state: &TwoModeState, channel: &LossChannel, k: u32, phi: f64) -> Result<QfiEstimate> {
    qfi_exact_with_cap(state, channel, k, phi, DEFAULT_EXACT_CAP)
}

pub fn qfi_exact_with_cap(
    state: &TwoModeState,
    channel: &LossChannel,
    k: u32,
    phi: f64,
    cap: usize,
) -> Result<QfiEstimate> {
    check_k(k)?;
    let total = state.n();
    if total > cap {
        return Err(Error::Capacity { n: total, cap });
    }
    let decomp = decompose(state, channel, k, phi)?;
    let generator = scaled_generator(total, k);
    let sectors = branches_by_sector(&decomp);

    let per_sector = sectors
        .into_par_iter()
        .enumerate()
        .map(|(remaining, members)| {
            let dim = remaining + 1;
            let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
            let mut drho = DMatrix::<Complex64>::zeros(dim, dim);
            for &i in &members {
                let branch = &decomp.branches[i];
                let c = &branch.amplitudes;
                for s in 0..dim {
                    let gs = generator[branch.original_occupation(s)];
                    let cs = c[s].conj();
                    for r in 0..dim {
                        let p = c[r] * cs;
                        rho[(r, s)] += p;
                        let gr = generator[branch.original_occupation(r)];
                        drho[(r, s)] += Complex64::new(0.0, gr - gs) * p;
                    }
                }
            }
            sld_sector(remaining, rho, &drho)
        })
        .collect::<Result<Vec<f64>>>()?;

    let scaled = per_sector.into_iter().collect::<CompensatedSum>().total();
    Ok(QfiEstimate::new(scaled * fisher_scale(total, k), Method::Exact, k, *channel))
}

/// `sum_{ij} 2 |<i|d rho|j>|^2 / (lambda_i + lambda_j)` for one sector.
fn sld_sector(remaining: usize, rho: DMatrix<Complex64>, drho: &DMatrix<Complex64>) -> Result<f64> {
    let dim = rho.nrows();
    let trace: f64 = (0..dim).map(|i| rho[(i, i)].re).sum();
    if dim == 1 || trace <= 0.0 {
        return Ok(0.0);
    }
    let eig = SymmetricEigen::try_new(rho, 1e-15 * trace, 10_000).ok_or_else(|| {
        Error::numeric(
            "sector eigendecomposition did not converge",
            format!("sector M = {remaining}, dimension {dim}, trace {trace:e}"),
        )
    })?;
    let vecs = &eig.eigenvectors;
    let rotated = vecs.adjoint() * drho * vecs;
    let lambda: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let floor = EIGENVALUE_FLOOR * trace;
    let mut acc = CompensatedSum::new();
    for i in 0..dim {
        for j in 0..dim {
            let denom = lambda[i] + lambda[j];
            if denom > floor {
                acc.add(2.0 * rotated[(i, j)].norm_sqr() / denom);
            }
        }
    }
    Ok(acc.total())
}

/// One row of the exact-versus-bound comparison over SJJ ground states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRow {
    pub lambda: f64,
    pub cat_ness: f64,
    pub exact: f64,
    pub bound: f64,
    /// `(bound - exact) / bound`.
    pub relative_gap: f64,
}

/// Exact QFI and bound for SJJ ground states over a grid of `Lambda`.
pub fn crossover_discrepancy(
    n: usize,
    lambda_grid: &[f64],
    channel: &LossChannel,
    k: u32,
) -> Result<Vec<DiscrepancyRow>> {
    if n > DEFAULT_EXACT_CAP {
        return Err(Error::Capacity { n, cap: DEFAULT_EXACT_CAP });
    }
    let evaluator = BoundEvaluator::new(n, *channel, k)?;
    lambda_grid
        .iter()
        .map(|&lambda| {
            let h = build_hamiltonian(SjjParams::new(n, lambda)?)?;
            let gs = ground_state(&h)?;
            let exact = qfi_exact(&gs.state, channel, k, 0.0)?.value;
            let bound = evaluator.estimate(&gs.state)?.value;
            let relative_gap = if bound > 0.0 { (bound - exact) / bound } else { 0.0 };
            Ok(DiscrepancyRow {
                lambda,
                cat_ness: gs.state.cat_ness(),
                exact,
                bound,
                relative_gap,
            })
        })
        .collect()
}

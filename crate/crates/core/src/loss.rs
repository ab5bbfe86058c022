//! Loss branches of a phase-encoded probe and the block-diagonal density
//! matrix they form.
//!
//! After the phase `exp(i n^k phi)` is imprinted on `|N-n>_a |n>_b`, losing
//! `l_a` and `l_b` particles leaves the unnormalised branch vector
//! `C^n = A_n sqrt(B^n_{l_a,l_b}) exp(i n^k phi)` on `|N-n-l_a>_a |n-l_b>_b`.
//! Branches with equal `M = N - l_a - l_b` share a sector; sectors are
//! mutually orthogonal.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{log_binomial, LossChannel, LossKernel};
use crate::sjj::TwoModeState;

/// The pure conditional state after losing exactly `(l_a, l_b)` particles,
/// stored unnormalised.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub l_a: usize,
    pub l_b: usize,
    /// `C^n` for `n = l_b ..= N - l_a`; entry `m` is the amplitude of
    /// `|M-m>_a |m>_b` with `m = n - l_b`.
    pub amplitudes: Vec<Complex64>,
    /// `p_{l_a,l_b} = sum_n |C^n|^2`.
    pub probability: f64,
}

impl Branch {
    /// Remaining particle number `M`.
    pub fn remaining(&self) -> usize {
        self.amplitudes.len() - 1
    }

    /// Original `b` occupation of sector index `m`.
    pub fn original_occupation(&self, m: usize) -> usize {
        m + self.l_b
    }

    /// `|xi> = branch / sqrt(p)`, or `None` for an empty branch.
    pub fn normalized(&self) -> Option<Vec<Complex64>> {
        if self.probability > 0.0 {
            let s = self.probability.sqrt();
            Some(self.amplitudes.iter().map(|c| c / s).collect())
        } else {
            None
        }
    }
}

/// All `(N+1)(N+2)/2` loss branches, ordered by `l_b` then `l_a`.
#[derive(Debug, Clone)]
pub struct BranchDecomposition {
    pub n: usize,
    pub k: u32,
    pub phi: f64,
    pub channel: LossChannel,
    pub branches: Vec<Branch>,
}

impl BranchDecomposition {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    pub fn branch(&self, l_a: usize, l_b: usize) -> Option<&Branch> {
        self.branches.iter().find(|b| b.l_a == l_a && b.l_b == l_b)
    }
}

pub(crate) fn phase_factor(n: usize, k: u32, phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, (n as f64).powi(k as i32) * phi)
}

pub fn decompose(state: &TwoModeState, channel: &LossChannel, k: u32, phi: f64) -> Result<BranchDecomposition> {
    if k < 1 {
        return Err(Error::domain("phase exponent k must be >= 1"));
    }
    if !phi.is_finite() {
        return Err(Error::domain("phase phi must be finite"));
    }
    let total = state.n();
    let kernel = LossKernel::new(total, *channel)?;
    let encoded: Vec<Complex64> = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, a)| a * phase_factor(n, k, phi))
        .collect();
    let branches = (0..=total)
        .into_par_iter()
        .flat_map_iter(|l_b| {
            let kernel = &kernel;
            let encoded = &encoded;
            (0..=total - l_b).map(move |l_a| {
                let amplitudes: Vec<Complex64> = (l_b..=total - l_a)
                    .map(|n| encoded[n] * kernel.weight(n, l_a, l_b).sqrt())
                    .collect();
                let probability = amplitudes.iter().map(|c| c.norm_sqr()).sum();
                Branch { l_a, l_b, amplitudes, probability }
            })
        })
        .collect();
    Ok(BranchDecomposition {
        n: total,
        k,
        phi,
        channel: *channel,
        branches,
    })
}

/// Density-matrix block of remaining particle number `M`, in the basis
/// `|M-m>_a |m>_b`, `m = 0..=M`.
#[derive(Debug, Clone)]
pub struct SectorDensityMatrix {
    pub remaining: usize,
    pub matrix: DMatrix<Complex64>,
    /// Trace of the block.
    pub weight: f64,
}

/// Groups branch indices by remaining particle number `M = 0..=N`.
pub(crate) fn branches_by_sector(decomp: &BranchDecomposition) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); decomp.n + 1];
    for (i, b) in decomp.branches.iter().enumerate() {
        groups[b.remaining()].push(i);
    }
    groups
}

/// `rho = sum_{l_a,l_b} p |xi><xi|`, split into sectors ordered by `M = 0..=N`.
pub fn assemble_sectors(decomp: &BranchDecomposition) -> Vec<SectorDensityMatrix> {
    branches_by_sector(decomp)
        .into_par_iter()
        .enumerate()
        .map(|(m_total, members)| {
            let dim = m_total + 1;
            let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
            for &i in &members {
                let c = &decomp.branches[i].amplitudes;
                for r in 0..dim {
                    for s in 0..dim {
                        matrix[(r, s)] += c[r] * c[s].conj();
                    }
                }
            }
            let weight = (0..dim).map(|i| matrix[(i, i)].re).sum();
            SectorDensityMatrix {
                remaining: m_total,
                matrix,
                weight,
            }
        })
        .collect()
}

/// Closed forms for the remaining-particle distribution of a lossy N00N arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossForm {
    Binomial,
    Poisson,
    Gauss,
}

/// `p_n` for `n = 0..=N` remaining particles.
///
/// Only the binomial form is normalised; the Poisson and Gaussian forms are
/// returned as evaluated.
pub fn noon_loss_distribution(n: usize, eta: f64, form: LossForm) -> Result<Vec<f64>> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::domain(format!("eta = {eta} is outside (0, 1]")));
    }
    let nf = n as f64;
    let lost_mean = nf * (1.0 - eta);
    match form {
        LossForm::Binomial => (0..=n)
            .map(|r| {
                if eta == 1.0 {
                    return Ok(if r == n { 1.0 } else { 0.0 });
                }
                let ln = log_binomial(n, r)? + r as f64 * eta.ln() + (n - r) as f64 * (-eta).ln_1p();
                Ok(ln.exp())
            })
            .collect(),
        LossForm::Poisson => (0..=n)
            .map(|r| {
                let lost = n - r;
                if lost_mean == 0.0 {
                    return Ok(if lost == 0 { 1.0 } else { 0.0 });
                }
                let ln_fact = crate::fock::LnFactorials::shared().ln_factorial(lost)?;
                Ok((lost as f64 * lost_mean.ln() - ln_fact - lost_mean).exp())
            })
            .collect(),
        LossForm::Gauss => {
            if lost_mean == 0.0 {
                return Err(Error::domain("Gaussian form has zero width when N(1 - eta) = 0"));
            }
            let norm = 1.0 / (2.0 * std::f64::consts::PI * lost_mean).sqrt();
            Ok((0..=n)
                .map(|r| norm * (-(r as f64 - nf * eta).powi(2) / (2.0 * lost_mean)).exp())
                .collect())
        }
    }
}

/// Mean `N eta` and width `2 sqrt(N (1 - eta))` of the Gaussian form.
pub fn gauss_parameters(n: usize, eta: f64) -> (f64, f64) {
    let nf = n as f64;
    (nf * eta, 2.0 * (nf * (1.0 - eta)).sqrt())
}

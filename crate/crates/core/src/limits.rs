//! Closed-form precision limits and loss thresholds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `1 / N^k`: lossless N00N precision (HL for `k = 1`, SHL for `k >= 2`).
pub fn ideal_limit(n: usize, k: u32) -> f64 {
    1.0 / (n as f64).powi(k as i32)
}

/// Bound QFI and precision of a N00N probe under symmetric loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoonLimits {
    /// `N^(2k) eta^N`.
    pub fisher: f64,
    /// `1 / (sqrt(eta^N) N^k)`.
    pub delta_phi: f64,
}

pub fn noon_limits(n: usize, k: u32, eta: f64) -> NoonLimits {
    let nf = n as f64;
    let survival = eta.powi(n as i32);
    if survival.is_normal() {
        return NoonLimits {
            fisher: nf.powi(2 * k as i32) * survival,
            delta_phi: 1.0 / (survival.sqrt() * nf.powi(k as i32)),
        };
    }
    // eta^N underflows; delta_phi may still be representable
    let ln_fisher = 2.0 * k as f64 * nf.ln() + nf * eta.ln();
    NoonLimits {
        fisher: ln_fisher.exp(),
        delta_phi: (-0.5 * ln_fisher).exp(),
    }
}

/// Particle number maximising the lossy N00N bound, `-2k / ln eta`.
pub fn n_min(k: u32, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::domain(format!(
            "n_min needs 0 < eta < 1 (eta = {eta}); at eta = 1 the optimum is unbounded"
        )));
    }
    Ok(-2.0 * k as f64 / eta.ln())
}

/// Transmissivity above which a N00N probe of size `N` is worthwhile, `exp(-2k/N)`.
pub fn eta_critical(n: f64, k: u32) -> f64 {
    (-2.0 * k as f64 / n).exp()
}

/// Coherent-probe limits under loss.
///
/// Both carry a unit prefactor. For `k = 1` the scaled limit equals the SIL;
/// for `k >= 2` it is a scaling law (`1/sqrt(eta N^5)` at `k = 3`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometricLimits {
    /// `1 / sqrt(eta N)`.
    pub sil: f64,
    /// `1 / (sqrt(eta) N^(k - 1/2))`.
    pub scaled: f64,
    pub scaled_is_scaling_law: bool,
}

pub fn interferometric_limits(n: usize, k: u32, eta: f64) -> InterferometricLimits {
    let nf = n as f64;
    InterferometricLimits {
        sil: 1.0 / (eta * nf).sqrt(),
        scaled: 1.0 / (eta.sqrt() * nf.powf(k as f64 - 0.5)),
        scaled_is_scaling_law: k != 1,
    }
}

/// Precision from particle-number-difference fluctuations,
/// `[N (1 + eta (N eta - 1))]^(-1/2)`.
pub fn variance_delta_phi(n: usize, eta: f64) -> f64 {
    let nf = n as f64;
    1.0 / (nf * (1.0 + eta * (nf * eta - 1.0))).sqrt()
}

/// Observation time before one-body loss at rate `gamma` (1/s) pushes the
/// transmissivity below `eta_critical`: `2k / (gamma N)` seconds.
pub fn critical_time(k: u32, gamma: f64, n: f64) -> Result<f64> {
    if !(gamma > 0.0 && n > 0.0) {
        return Err(Error::domain("critical_time needs gamma > 0 and N > 0"));
    }
    Ok(2.0 * k as f64 / (gamma * n))
}

/// Parameters for a table of limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitQuery {
    pub n: usize,
    pub k: u32,
    pub eta: f64,
    /// One-body loss rate in 1/s, only used for the critical time.
    pub gamma: Option<f64>,
}

/// Every closed-form limit for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTable {
    pub query: LimitQuery,
    pub ideal: f64,
    pub noon: NoonLimits,
    pub interferometric: InterferometricLimits,
    pub variance_delta_phi: f64,
    pub eta_critical: f64,
    pub n_min: Option<f64>,
    pub critical_time_s: Option<f64>,
}

impl LimitQuery {
    pub fn new(n: usize, k: u32, eta: f64, gamma: Option<f64>) -> Result<Self> {
        if n < 1 || k < 1 {
            return Err(Error::domain("limits need N >= 1 and k >= 1"));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::domain(format!("eta = {eta} is outside (0, 1]")));
        }
        if let Some(g) = gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::domain(format!("gamma = {g} must be positive")));
            }
        }
        Ok(Self { n, k, eta, gamma })
    }

    pub fn table(&self) -> LimitTable {
        LimitTable {
            query: *self,
            ideal: ideal_limit(self.n, self.k),
            noon: noon_limits(self.n, self.k, self.eta),
            interferometric: interferometric_limits(self.n, self.k, self.eta),
            variance_delta_phi: variance_delta_phi(self.n, self.eta),
            eta_critical: eta_critical(self.n as f64, self.k),
            n_min: n_min(self.k, self.eta).ok(),
            critical_time_s: self
                .gamma
                .map(|g| critical_time(self.k, g, self.n as f64).expect("validated")),
        }
    }
}

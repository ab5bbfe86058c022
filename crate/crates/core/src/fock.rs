//! Combinatorics in log space and the fictitious beam-splitter loss kernel.
//!
//! A two-mode Fock state `|N-n>_a |n>_b` that passes through beam splitters of
//! transmissivity `eta_a`, `eta_b` loses `l_a` particles from mode `a` and
//! `l_b` from mode `b` with weight
//!
//! ```text
//! B^n_{l_a,l_b} = C(N-n, l_a) C(n, l_b) eta_a^(N-n) (1/eta_a - 1)^l_a eta_b^n (1/eta_b - 1)^l_b
//! ```
//!
//! which factorises into two single-mode binomial kernels. Everything is
//! accumulated as logarithms and exponentiated once.

use std::ops::Mul;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` supported by the default factorial table.
pub const DEFAULT_MAX_N: usize = 10_000;

/// Below this `min(r, n - r)` the binomial is summed term by term, which keeps
/// the relative error small when `ln C(n, r)` is tiny next to `ln n!`.
const DIRECT_SUM_THRESHOLD: usize = 64;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        s.extend(iter);
        s
    }
}

/// Table of `ln k!` for `k <= max_n`.
#[derive(Debug, Clone)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new(max_n: usize) -> Self {
        let mut table = Vec::with_capacity(max_n + 1);
        let mut acc = CompensatedSum::new();
        table.push(0.0);
        for k in 1..=max_n {
            acc.add((k as f64).ln());
            table.push(acc.total());
        }
        Self { table }
    }

    /// The process-wide table sized for [`DEFAULT_MAX_N`].
    pub fn shared() -> &'static LnFactorials {
        static SHARED: OnceLock<LnFactorials> = OnceLock::new();
        SHARED.get_or_init(|| LnFactorials::new(DEFAULT_MAX_N))
    }

    pub fn max_n(&self) -> usize {
        self.table.len() - 1
    }

    pub fn ln_factorial(&self, n: usize) -> Result<f64> {
        self.table
            .get(n)
            .copied()
            .ok_or_else(|| Error::domain(format!("n = {n} exceeds the configured maximum {}", self.max_n())))
    }

    /// `ln C(n, r)`.
    pub fn log_binomial(&self, n: usize, r: usize) -> Result<f64> {
        if r > n {
            return Err(Error::domain(format!("log_binomial: r = {r} > n = {n}")));
        }
        if n > self.max_n() {
            return Err(Error::domain(format!(
                "log_binomial: n = {n} exceeds the configured maximum {}",
                self.max_n()
            )));
        }
        let small = r.min(n - r);
        if small <= DIRECT_SUM_THRESHOLD {
            // ln C(n, s) = sum_{i=1}^{s} ln(1 + (n - s) / i)
            let rest = (n - small) as f64;
            let sum: CompensatedSum = (1..=small).map(|i| (rest / i as f64).ln_1p()).collect();
            return Ok(sum.total());
        }
        Ok(self.table[n] - self.table[r] - self.table[n - r])
    }
}

/// `ln C(n, r)` using the shared table (`n <= 10 000`).
pub fn log_binomial(n: usize, r: usize) -> Result<f64> {
    LnFactorials::shared().log_binomial(n, r)
}

/// Natural logarithm of a non-negative weight; `-inf` encodes zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogWeight(f64);

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight(f64::NEG_INFINITY);
    pub const ONE: LogWeight = LogWeight(0.0);

    pub fn from_ln(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        LogWeight(value)
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn weight(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl Mul for LogWeight {
    type Output = LogWeight;

    fn mul(self, rhs: LogWeight) -> LogWeight {
        if self.is_zero() || rhs.is_zero() {
            LogWeight::ZERO
        } else {
            LogWeight(self.0 + rhs.0)
        }
    }
}

/// Transmissivities of the two fictitious beam splitters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel", into = "RawChannel")]
pub struct LossChannel {
    eta_a: f64,
    eta_b: f64,
}

#[derive(Serialize, Deserialize)]
struct RawChannel {
    eta_a: f64,
    eta_b: f64,
}

impl TryFrom<RawChannel> for LossChannel {
    type Error = Error;

    fn try_from(raw: RawChannel) -> Result<Self> {
        LossChannel::new(raw.eta_a, raw.eta_b)
    }
}

impl From<LossChannel> for RawChannel {
    fn from(c: LossChannel) -> Self {
        RawChannel { eta_a: c.eta_a, eta_b: c.eta_b }
    }
}

impl LossChannel {
    pub fn new(eta_a: f64, eta_b: f64) -> Result<Self> {
        for (name, eta) in [("eta_a", eta_a), ("eta_b", eta_b)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::domain(format!("{name} = {eta} is outside (0, 1]")));
            }
        }
        Ok(Self { eta_a, eta_b })
    }

    /// Physically equivalent arms, `eta_a = eta_b = eta`.
    pub fn symmetric(eta: f64) -> Result<Self> {
        Self::new(eta, eta)
    }

    pub fn lossless() -> Self {
        Self { eta_a: 1.0, eta_b: 1.0 }
    }

    pub fn eta_a(&self) -> f64 {
        self.eta_a
    }

    pub fn eta_b(&self) -> f64 {
        self.eta_b
    }

    pub fn is_lossless(&self) -> bool {
        self.eta_a == 1.0 && self.eta_b == 1.0
    }
}

/// `ln[C(m, l) eta^(m-l) (1-eta)^l]`: probability that `l` of `m` particles
/// are reflected out of one arm.
fn log_single_mode(factorials: &LnFactorials, m: usize, l: usize, eta: f64) -> Result<LogWeight> {
    if eta == 1.0 {
        return Ok(if l == 0 { LogWeight::ONE } else { LogWeight::ZERO });
    }
    let binom = factorials.log_binomial(m, l)?;
    let ln = binom + (m - l) as f64 * eta.ln() + l as f64 * (-eta).ln_1p();
    Ok(LogWeight::from_ln(ln))
}

/// `ln B^n_{l_a,l_b}`.
pub fn log_loss_weight(total: usize, n: usize, l_a: usize, l_b: usize, channel: &LossChannel) -> Result<LogWeight> {
    if n > total {
        return Err(Error::domain(format!("loss_weight: n = {n} > N = {total}")));
    }
    if l_a > total - n || l_b > n {
        return Err(Error::domain(format!(
            "loss_weight: (l_a, l_b) = ({l_a}, {l_b}) out of range for N = {total}, n = {n}"
        )));
    }
    let f = LnFactorials::shared();
    Ok(log_single_mode(f, total - n, l_a, channel.eta_a)? * log_single_mode(f, n, l_b, channel.eta_b)?)
}

/// `B^n_{l_a,l_b}` in `[0, 1]`.
pub fn loss_weight(total: usize, n: usize, l_a: usize, l_b: usize, channel: &LossChannel) -> Result<f64> {
    log_loss_weight(total, n, l_a, l_b, channel).map(LogWeight::weight)
}

/// Precomputed single-mode kernels for a fixed total particle number.
///
/// `weight(n, l_a, l_b)` returns the same value as [`loss_weight`] without the
/// per-call logarithms.
#[derive(Debug, Clone)]
pub struct LossKernel {
    total: usize,
    channel: LossChannel,
    mode_a: Vec<f64>,
    mode_b: Vec<f64>,
}

#[inline]
fn tri(m: usize, l: usize) -> usize {
    m * (m + 1) / 2 + l
}

impl LossKernel {
    pub fn new(total: usize, channel: LossChannel) -> Result<Self> {
        let f = LnFactorials::shared();
        if total > f.max_n() {
            return Err(Error::domain(format!("N = {total} exceeds the configured maximum {}", f.max_n())));
        }
        let table = |eta: f64| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(tri(total + 1, 0));
            for m in 0..=total {
                for l in 0..=m {
                    out.push(log_single_mode(f, m, l, eta)?.weight());
                }
            }
            Ok(out)
        };
        Ok(Self {
            total,
            channel,
            mode_a: table(channel.eta_a)?,
            mode_b: table(channel.eta_b)?,
        })
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn channel(&self) -> &LossChannel {
        &self.channel
    }

    /// Probability that `l` of the `m` particles in mode `a` are lost.
    #[inline]
    pub fn mode_a(&self, m: usize, l: usize) -> f64 {
        debug_assert!(l <= m && m <= self.total);
        self.mode_a[tri(m, l)]
    }

    #[inline]
    pub fn mode_b(&self, m: usize, l: usize) -> f64 {
        debug_assert!(l <= m && m <= self.total);
        self.mode_b[tri(m, l)]
    }

    /// `B^n_{l_a,l_b}`; requires `l_a <= N - n` and `l_b <= n`.
    #[inline]
    pub fn weight(&self, n: usize, l_a: usize, l_b: usize) -> f64 {
        self.mode_a(self.total - n, l_a) * self.mode_b(n, l_b)
    }
}

//! Soliton Josephson junction (SJJ) model: the tridiagonal Hamiltonian in the
//! two-mode Fock basis, its ground state, and the canonical probe states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::log_binomial;
use crate::tridiag::{SolverLimits, SymTridiagonal};

/// Tolerance on `sum |A_n|^2 = 1` accepted for a state.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Normalised amplitudes `A_0..A_N` over `|N-n>_a |n>_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    amplitudes: Vec<Complex64>,
}

impl TwoModeState {
    /// Wraps amplitudes that are already normalised.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::domain("a two-mode state needs N >= 1 (at least two amplitudes)"));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::domain("state amplitudes must be finite"));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::domain(format!("state norm {norm} differs from 1 by more than {NORM_TOLERANCE:e}")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::domain("cannot normalise a zero or non-finite amplitude vector"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(amplitudes)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Total particle number `N`.
    pub fn n(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `|A_n|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|A_0|^2 + |A_N|^2`; 1 for a N00N state.
    pub fn cat_ness(&self) -> f64 {
        self.amplitudes[0].norm_sqr() + self.amplitudes[self.n()].norm_sqr()
    }

    /// Multiplies every amplitude by `exp(i theta)`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let p = Complex64::from_polar(1.0, theta);
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * p).collect(),
        }
    }

    pub fn to_document(&self) -> StateDocument {
        StateDocument {
            n: self.n(),
            amplitudes_re: self.amplitudes.iter().map(|a| a.re).collect(),
            amplitudes_im: self.amplitudes.iter().map(|a| a.im).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("state document serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: StateDocument = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        Self::try_from(doc)
    }
}

/// On-disk form of a [`TwoModeState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDocument {
    #[serde(rename = "N")]
    pub n: usize,
    pub amplitudes_re: Vec<f64>,
    pub amplitudes_im: Vec<f64>,
}

impl TryFrom<StateDocument> for TwoModeState {
    type Error = Error;

    fn try_from(doc: StateDocument) -> Result<Self> {
        if doc.amplitudes_re.len() != doc.n + 1 || doc.amplitudes_im.len() != doc.n + 1 {
            return Err(Error::Document(format!(
                "expected {} amplitudes, found {} real and {} imaginary parts",
                doc.n + 1,
                doc.amplitudes_re.len(),
                doc.amplitudes_im.len()
            )));
        }
        let amps = doc
            .amplitudes_re
            .iter()
            .zip(&doc.amplitudes_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        TwoModeState::new(amps)
    }
}

/// Total particle number and the dimensionless coupling `Lambda = u^2 N^2 / 16 kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SjjParams {
    pub n: usize,
    pub lambda: f64,
}

impl SjjParams {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::domain(format!("Lambda = {lambda} must be finite and non-negative")));
        }
        Ok(Self { n, lambda })
    }
}

/// The SJJ Hamiltonian in units of `kappa N`, as a symmetric tridiagonal
/// matrix over `n = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalHamiltonian {
    params: SjjParams,
    matrix: SymTridiagonal,
}

/// Empirical correction to the tunnelling amplitude.
const TUNNELLING_CORRECTION: f64 = 0.21;

pub fn build_hamiltonian(params: SjjParams) -> Result<TridiagonalHamiltonian> {
    let SjjParams { n: total, lambda } = SjjParams::new(params.n, params.lambda)?;
    if total < 2 {
        return Err(Error::domain(format!("SJJ Hamiltonian needs N >= 2, got {total}")));
    }
    let nf = total as f64;
    let imbalance = |n: usize| 2.0 * n as f64 / nf - 1.0;
    let alpha: Vec<f64> = (0..=total).map(|n| -(lambda / 2.0) * imbalance(n).powi(2)).collect();
    let beta: Vec<f64> = (0..total)
        .map(|n| {
            let k = n as f64;
            let first = (1.0 - TUNNELLING_CORRECTION * imbalance(n).powi(2)) * (k + 1.0) * ((nf - k) * (nf - k - 1.0)).sqrt();
            let second = (1.0 - TUNNELLING_CORRECTION * imbalance(n + 1).powi(2)) * (nf - k) * (k * (k + 1.0)).sqrt();
            -(first + second) / (nf * nf)
        })
        .collect();
    Ok(TridiagonalHamiltonian {
        params: SjjParams { n: total, lambda },
        matrix: SymTridiagonal::new(alpha, beta)?,
    })
}

impl TridiagonalHamiltonian {
    pub fn params(&self) -> SjjParams {
        self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// Diagonal entries `alpha_n`.
    pub fn alpha(&self) -> &[f64] {
        self.matrix.diag()
    }

    /// Off-diagonal entries `beta_n`, coupling `n` and `n + 1`.
    pub fn beta(&self) -> &[f64] {
        self.matrix.off()
    }

    pub fn matrix(&self) -> &SymTridiagonal {
        &self.matrix
    }

    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Restriction to the mirror-even subspace spanned by
    /// `(e_j + e_{N-j})/sqrt 2` for `j < N/2` and `e_{N/2}` for even `N`.
    fn even_parity_block(&self) -> Result<SymTridiagonal> {
        let total = self.n();
        let a = self.alpha();
        let b = self.beta();
        let dim = total / 2 + 1;
        let paired = |j: usize| j != total - j;
        let diag = (0..dim)
            .map(|j| {
                if !paired(j) {
                    a[j]
                } else {
                    let direct = if total - j == j + 1 { b[j] } else { 0.0 };
                    0.5 * (a[j] + a[total - j]) + direct
                }
            })
            .collect();
        let off = (0..dim - 1)
            .map(|j| {
                if paired(j + 1) {
                    0.5 * (b[j] + b[total - j - 1])
                } else {
                    (b[j] + b[j + 1]) / std::f64::consts::SQRT_2
                }
            })
            .collect();
        SymTridiagonal::new(diag, off)
    }
}

/// Solver diagnostics attached to a ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateDiagnostics {
    /// `||H A - E A||_2`.
    pub residual: f64,
    pub hamiltonian_norm: f64,
    /// Gap between the two lowest eigenvalues of the full matrix.
    pub spectral_gap: f64,
    /// The two lowest eigenvalues agree within `1e-12 ||H||`. The returned
    /// vector is then the mirror-even member of the pair.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub state: TwoModeState,
    pub energy: f64,
    pub diagnostics: GroundStateDiagnostics,
}

/// Residual bound relative to `||H||`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Lowest eigenpair of the SJJ Hamiltonian.
///
/// All `beta_n` are strictly negative, so the ground state is non-degenerate,
/// positive and mirror-even (`A_n = A_{N-n}`). The solve runs on the
/// mirror-even block, which keeps it well separated from the odd partner that
/// becomes exponentially close in the cat regime.
pub fn ground_state(h: &TridiagonalHamiltonian) -> Result<GroundState> {
    ground_state_with(h, SolverLimits::default())
}

pub fn ground_state_with(h: &TridiagonalHamiltonian, limits: SolverLimits) -> Result<GroundState> {
    let total = h.n();
    let norm = h.norm();
    let even = h.even_parity_block()?;
    let lambda = even.eigenvalue(0, limits)?;
    let (folded, _) = even.eigenvector(lambda, limits)?;

    let mut amps = vec![0.0; total + 1];
    for (j, &x) in folded.iter().enumerate() {
        if j == total - j {
            amps[j] = x;
        } else {
            let v = x / std::f64::consts::SQRT_2;
            amps[j] = v;
            amps[total - j] = v;
        }
    }
    let (imax, _) = amps
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
    if amps[imax] < 0.0 {
        amps.iter_mut().for_each(|v| *v = -*v);
    }
    let len = amps.iter().map(|v| v * v).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|v| *v /= len);

    let energy = h.matrix().rayleigh_quotient(&amps);
    let residual = h.matrix().residual(&amps, energy);
    let lowest = h.matrix().eigenvalue(0, limits)?;
    let second = h.matrix().eigenvalue(1, limits)?;
    let spectral_gap = second - lowest;
    let diagnostics = GroundStateDiagnostics {
        residual,
        hamiltonian_norm: norm,
        spectral_gap,
        degenerate: spectral_gap <= 1e-12 * norm,
    };
    if residual > RESIDUAL_TOLERANCE * norm {
        return Err(Error::numeric(
            "ground-state residual exceeds tolerance",
            format!(
                "N = {total}, Lambda = {}, residual = {residual:e}, ||H|| = {norm:e}",
                h.params().lambda
            ),
        ));
    }
    if energy > lowest + 1e-10 * norm {
        return Err(Error::numeric(
            "mirror-even eigenvector is not the ground state",
            format!("even-block energy {energy:e} above spectrum minimum {lowest:e}"),
        ));
    }
    let state = TwoModeState::from_real(&amps)?;
    Ok(GroundState { state, energy, diagnostics })
}

/// `(|N,0> + |0,N>)/sqrt 2`.
pub fn noon_state(n: usize) -> Result<TwoModeState> {
    if n < 1 {
        return Err(Error::domain("N00N state needs N >= 1"));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); n + 1];
    amps[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[n] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    TwoModeState::new(amps)
}

/// `A_n = sqrt(C(N, n) / 2^N)`: the two-mode coherent-like probe.
pub fn binomial_state(n: usize) -> Result<TwoModeState> {
    if n < 1 {
        return Err(Error::domain("binomial state needs N >= 1"));
    }
    let ln2n = n as f64 * std::f64::consts::LN_2;
    let amps = (0..=n)
        .map(|k| log_binomial(n, k).map(|lb| ((lb - ln2n) / 2.0).exp()))
        .collect::<Result<Vec<f64>>>()?;
    TwoModeState::from_real(&amps)
}

/// Classical Hamilton function of a bright soliton, `-u^2 N^3 / 24`.
pub fn soliton_hamilton(u: f64, n: f64) -> f64 {
    soliton_phase(u) * n.powi(3)
}

/// The Kerr-like phase parameter `-u^2 / 24` multiplying `N^3`.
pub fn soliton_phase(u: f64) -> f64 {
    -u * u / 24.0
}

/// Location of the superfluid to cat-state crossover at fixed `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverScan {
    /// `(Lambda, cat-ness)` on the input grid.
    pub samples: Vec<(f64, f64)>,
    /// Grid interval with the largest cat-ness jump.
    pub bracket: (f64, f64),
    /// Refined `Lambda` where the cat-ness crosses the midpoint of its values
    /// at the bracket ends.
    pub lambda: f64,
}

/// Scans cat-ness over an ascending `Lambda` grid and refines the steepest step
/// by bisection.
pub fn crossover_scan(n: usize, grid: &[f64]) -> Result<CrossoverScan> {
    if grid.len() < 2 {
        return Err(Error::domain("crossover scan needs at least two Lambda values"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("crossover grid must be strictly ascending"));
    }
    let cat = |lambda: f64| -> Result<f64> {
        let h = build_hamiltonian(SjjParams::new(n, lambda)?)?;
        Ok(ground_state(&h)?.state.cat_ness())
    };
    let samples = grid
        .iter()
        .map(|&l| cat(l).map(|c| (l, c)))
        .collect::<Result<Vec<_>>>()?;
    let (idx, _) = samples
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i, (w[1].1 - w[0].1).abs()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let (mut lo, c_lo) = samples[idx];
    let (mut hi, c_hi) = samples[idx + 1];
    let bracket = (lo, hi);
    let target = 0.5 * (c_lo + c_hi);
    let rising = c_hi >= c_lo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = cat(mid)? < target;
        if below == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CrossoverScan {
        samples,
        bracket,
        lambda: 0.5 * (lo + hi),
    })
}

//! Real symmetric tridiagonal eigenproblems: Sturm-sequence bisection for
//! individual eigenvalues and inverse iteration for the matching vector.

use crate::error::{Error, Result};

/// Iteration caps for the eigensolver.
#[derive(Debug, Clone, Copy)]
pub struct SolverLimits {
    pub bisection_steps: usize,
    pub inverse_iterations: usize,
}

impl Default for SolverLimits {
    fn default() -> Self {
        Self {
            bisection_steps: 256,
            inverse_iterations: 32,
        }
    }
}

/// Symmetric tridiagonal matrix stored as its diagonal and one off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::domain("empty tridiagonal matrix"));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::domain(format!(
                "off-diagonal length {} does not match dimension {}",
                off.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(off.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("tridiagonal matrix has non-finite entries"));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let right = self.off.get(i).map_or(0.0, |v| v.abs());
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim() {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = self.off.get(i).map_or(0.0, |v| v.abs());
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    fn pivot_floor(&self) -> f64 {
        let max_off_sq = self.off.iter().map(|e| e * e).fold(0.0, f64::max);
        (f64::MIN_POSITIVE * max_off_sq.max(1.0)).max(f64::MIN_POSITIVE)
    }

    /// Sturm count of eigenvalues below `x`. An eigenvalue equal to `x` (to
    /// within the pivot floor) is counted.
    pub fn count_below(&self, x: f64) -> usize {
        let floor = self.pivot_floor();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0.. {
            if q.abs() < floor {
                q = -floor;
            }
            if q < 0.0 {
                count += 1;
            }
            if i + 1 == self.dim() {
                break;
            }
            q = self.diag[i + 1] - x - self.off[i] * self.off[i] / q;
        }
        count
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, index: usize, limits: SolverLimits) -> Result<f64> {
        if index >= self.dim() {
            return Err(Error::domain(format!("eigenvalue index {index} >= dimension {}", self.dim())));
        }
        let (g_lo, g_hi) = self.gershgorin();
        let pad = f64::EPSILON * self.norm().max(f64::MIN_POSITIVE) * self.dim() as f64;
        let mut lo = g_lo - pad - f64::MIN_POSITIVE;
        let mut hi = g_hi + pad + f64::MIN_POSITIVE;
        for _ in 0..limits.bisection_steps {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
            let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + f64::EPSILON * self.norm();
            if hi - lo <= tol {
                return Ok(0.5 * (lo + hi));
            }
        }
        Err(Error::numeric(
            "bisection did not converge",
            format!("index {index}, bracket [{lo:e}, {hi:e}] after {} steps", limits.bisection_steps),
        ))
    }

    /// Eigenvector for an (accurate) eigenvalue `lambda`, normalised to unit
    /// 2-norm, with the residual `||T x - lambda x||_2`.
    pub fn eigenvector(&self, lambda: f64, limits: SolverLimits) -> Result<(Vec<f64>, f64)> {
        let n = self.dim();
        if n == 1 {
            return Ok((vec![1.0], (self.diag[0] - lambda).abs()));
        }
        let scale = self.norm().max(f64::MIN_POSITIVE);
        let target = 1e-13 * scale;
        let lu = ShiftedLu::factor(self, lambda, f64::EPSILON * scale);
        let mut x = vec![1.0 / (n as f64).sqrt(); n];
        let mut best: Option<(Vec<f64>, f64)> = None;
        for _ in 0..limits.inverse_iterations {
            let mut y = lu.solve(&x);
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                break;
            }
            y.iter_mut().for_each(|v| *v /= norm);
            let residual = self.residual(&y, lambda);
            x = y;
            let improved = best.as_ref().is_none_or(|(_, r)| residual < *r);
            if improved {
                best = Some((x.clone(), residual));
            }
            if residual <= target {
                break;
            }
        }
        best.ok_or_else(|| {
            Error::numeric(
                "inverse iteration failed",
                format!("lambda = {lambda:e}, dimension {n}"),
            )
        })
    }

    pub fn residual(&self, x: &[f64], lambda: f64) -> f64 {
        self.apply(x)
            .iter()
            .zip(x)
            .map(|(tx, xi)| (tx - lambda * xi).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        let tx = self.apply(x);
        let num: f64 = tx.iter().zip(x).map(|(a, b)| a * b).sum();
        let den: f64 = x.iter().map(|v| v * v).sum();
        num / den
    }
}

/// LU factorisation of `T - shift I` with partial pivoting. The upper factor
/// has two superdiagonals.
struct ShiftedLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, shift: f64, tiny: f64) -> Self {
        let n = t.dim();
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        // Current row i holds (d, e, f) at columns (i, i+1, i+2).
        let mut d = t.diag[0] - shift;
        let mut e = if n > 1 { t.off[0] } else { 0.0 };
        for i in 0..n - 1 {
            let sub = t.off[i];
            let next_d = t.diag[i + 1] - shift;
            let next_e = if i + 2 < n { t.off[i + 1] } else { 0.0 };
            if sub.abs() > d.abs() {
                // swap rows i and i+1
                swapped[i] = true;
                let m = d / sub;
                mult[i] = m;
                u0[i] = sub;
                u1[i] = next_d;
                u2[i] = next_e;
                d = e - m * next_d;
                e = -m * next_e;
            } else {
                if d == 0.0 {
                    d = tiny;
                }
                let m = sub / d;
                mult[i] = m;
                u0[i] = d;
                u1[i] = e;
                u2[i] = 0.0;
                d = next_d - m * e;
                e = next_e;
            }
        }
        if d.abs() < tiny {
            d = if d < 0.0 { -tiny } else { tiny };
        }
        u0[n - 1] = d;
        Self { u0, u1, u2, mult, swapped }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.u0.len();
        let mut b = rhs.to_vec();
        for i in 0..n - 1 {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.mult[i] * b[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dense(t: &SymTridiagonal) -> DMatrix<f64> {
        let n = t.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = t.diag()[i];
            if i + 1 < n {
                m[(i, i + 1)] = t.off()[i];
                m[(i + 1, i)] = t.off()[i];
            }
        }
        m
    }

    fn sorted_eigs(t: &SymTridiagonal) -> Vec<f64> {
        let mut v: Vec<f64> = dense(t).symmetric_eigen().eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn all_eigenvalues_match_dense() {
        let diag: Vec<f64> = (0..12).map(|i| ((i * 7) % 5) as f64 - 1.3).collect();
        let off: Vec<f64> = (0..11).map(|i| 0.4 + 0.1 * (i % 3) as f64).collect();
        let t = SymTridiagonal::new(diag, off).unwrap();
        let reference = sorted_eigs(&t);
        for (i, ev) in reference.iter().enumerate() {
            let lam = t.eigenvalue(i, SolverLimits::default()).unwrap();
            assert!((lam - ev).abs() < 1e-13, "{i}: {lam} vs {ev}");
            let (x, r) = t.eigenvector(lam, SolverLimits::default()).unwrap();
            assert!(r < 1e-12, "residual {r}");
            assert!((x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_off_diagonals_and_ties() {
        let t = SymTridiagonal::new(vec![2.0, -1.0, -1.0, 3.0], vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(t.count_below(-1.0 - 1e-12), 0);
        assert_eq!(t.count_below(-1.0), 2);
        assert_eq!(t.count_below(-0.5), 2);
        let lam = t.eigenvalue(0, SolverLimits::default()).unwrap();
        assert!((lam + 1.0).abs() < 1e-15);
        let (_, r) = t.eigenvector(lam, SolverLimits::default()).unwrap();
        assert!(r < 1e-14);
    }

    #[test]
    fn one_by_one() {
        let t = SymTridiagonal::new(vec![4.5], vec![]).unwrap();
        assert_eq!(t.eigenvalue(0, SolverLimits::default()).unwrap(), 4.5);
        assert_eq!(t.eigenvector(4.5, SolverLimits::default()).unwrap().0, vec![1.0]);
    }

    #[test]
    fn shape_validation() {
        assert!(SymTridiagonal::new(vec![], vec![]).is_err());
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiagonal::new(vec![1.0, f64::NAN], vec![0.1]).is_err());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let t = SymTridiagonal::new(vec![0.0, 1.0, 2.0], vec![0.5, 0.5]).unwrap();
        let limits = SolverLimits { bisection_steps: 2, inverse_iterations: 4 };
        assert!(matches!(t.eigenvalue(0, limits), Err(Error::Numeric { .. })));
    }
}

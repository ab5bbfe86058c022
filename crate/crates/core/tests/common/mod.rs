//! Brute-force reference model: both loss channels are simulated as beam
//! splitters coupling each mode to its own vacuum environment mode. The
//! global state lives in the four-mode Fock space (a, b, e_a, e_b), each mode
//! truncated at N quanta, and the environment is traced out explicitly.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub struct Purification {
    pub n: usize,
    /// rho over (a, b) with basis index a * (N+1) + b.
    pub rho: DMatrix<Complex64>,
    pub drho: DMatrix<Complex64>,
    /// Probability of finding (l_a, l_b) quanta in the environments.
    pub env_probability: DMatrix<f64>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Beam splitter `exp(theta (a^dag e - e^dag a))` on two modes truncated at
/// `d - 1` quanta, with `cos(theta)^2 = eta`. Basis index `a * d + e`.
pub fn beam_splitter(d: usize, eta: f64) -> DMatrix<f64> {
    let theta = eta.sqrt().acos();
    let mut g = DMatrix::<f64>::zeros(d * d, d * d);
    for a in 0..d {
        for e in 0..d {
            // a^dag e |a, e> = sqrt((a+1) e) |a+1, e-1>
            if a + 1 < d && e >= 1 {
                let v = ((a + 1) as f64 * e as f64).sqrt() * theta;
                g[((a + 1) * d + (e - 1), a * d + e)] += v;
                g[(a * d + e, (a + 1) * d + (e - 1))] -= v;
            }
        }
    }
    g.exp()
}

/// Index of |a, b, e_a, e_b>.
fn idx(d: usize, a: usize, b: usize, ea: usize, eb: usize) -> usize {
    ((a * d + b) * d + ea) * d + eb
}

fn apply_channels(d: usize, psi: &DVector<Complex64>, ua: &DMatrix<f64>, ub: &DMatrix<f64>) -> DVector<Complex64> {
    let mut mid = DVector::<Complex64>::zeros(psi.len());
    for b in 0..d {
        for eb in 0..d {
            for a2 in 0..d {
                for ea2 in 0..d {
                    let mut acc = c(0.0);
                    for a in 0..d {
                        for ea in 0..d {
                            acc += psi[idx(d, a, b, ea, eb)] * ua[(a2 * d + ea2, a * d + ea)];
                        }
                    }
                    mid[idx(d, a2, b, ea2, eb)] = acc;
                }
            }
        }
    }
    let mut out = DVector::<Complex64>::zeros(psi.len());
    for a in 0..d {
        for ea in 0..d {
            for b2 in 0..d {
                for eb2 in 0..d {
                    let mut acc = c(0.0);
                    for b in 0..d {
                        for eb in 0..d {
                            acc += mid[idx(d, a, b, ea, eb)] * ub[(b2 * d + eb2, b * d + eb)];
                        }
                    }
                    out[idx(d, a, b2, ea, eb2)] = acc;
                }
            }
        }
    }
    out
}

/// `rho_{x,y} = sum_env u_x v_y^*` for two global vectors.
fn trace_env(d: usize, u: &DVector<Complex64>, v: &DVector<Complex64>) -> DMatrix<Complex64> {
    let s = d * d;
    let mut r = DMatrix::<Complex64>::zeros(s, s);
    for x in 0..s {
        for y in 0..s {
            let mut acc = c(0.0);
            for ea in 0..d {
                for eb in 0..d {
                    acc += u[x * s + ea * d + eb] * v[y * s + ea * d + eb].conj();
                }
            }
            r[(x, y)] = acc;
        }
    }
    r
}

/// Input `sum_n A_n |N-n>_a |n>_b`, phase `exp(i n^k phi)`, then loss.
pub fn purify(amplitudes: &[Complex64], eta_a: f64, eta_b: f64, k: u32, phi: f64) -> Purification {
    let n = amplitudes.len() - 1;
    let d = n + 1;
    let mut psi = DVector::<Complex64>::zeros(d.pow(4));
    let mut dpsi = DVector::<Complex64>::zeros(d.pow(4));
    for (nb, amp) in amplitudes.iter().enumerate() {
        let g = (nb as f64).powi(k as i32);
        let v = amp * Complex64::from_polar(1.0, g * phi);
        psi[idx(d, n - nb, nb, 0, 0)] = v;
        dpsi[idx(d, n - nb, nb, 0, 0)] = v * Complex64::new(0.0, g);
    }
    let ua = beam_splitter(d, eta_a);
    let ub = beam_splitter(d, eta_b);
    let out = apply_channels(d, &psi, &ua, &ub);
    let dout = apply_channels(d, &dpsi, &ua, &ub);
    let rho = trace_env(d, &out, &out);
    let drho = trace_env(d, &dout, &out) + trace_env(d, &out, &dout);
    let mut env_probability = DMatrix::<f64>::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            for ea in 0..d {
                for eb in 0..d {
                    env_probability[(ea, eb)] += out[idx(d, a, b, ea, eb)].norm_sqr();
                }
            }
        }
    }
    Purification { n, rho, drho, env_probability }
}

impl Purification {
    /// Entry of rho in the (a, b) occupation basis.
    pub fn rho_at(&self, a: usize, b: usize, a2: usize, b2: usize) -> Complex64 {
        let d = self.n + 1;
        self.rho[(a * d + b, a2 * d + b2)]
    }

    /// QFI summed literally as
    /// `sum_i [ (d lambda_i)^2 / lambda_i + 4 lambda_i <psi_i'|psi_i'>
    ///   - sum_j 8 lambda_i lambda_j / (lambda_i + lambda_j) |<psi_i|psi_j'>|^2 ]`
    /// over the support, with eigenvalue and eigenvector derivatives from
    /// first-order perturbation theory. Panics if the support is degenerate.
    pub fn literal_qfi(&self) -> f64 {
        let eig = self.rho.clone().symmetric_eigen();
        let dim = eig.eigenvalues.len();
        let lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let vecs = &eig.eigenvectors;
        let support: Vec<usize> = (0..dim).filter(|&i| lam[i] > 1e-12).collect();
        for (x, &i) in support.iter().enumerate() {
            for &j in &support[x + 1..] {
                assert!((lam[i] - lam[j]).abs() > 1e-7, "degenerate support {} {}", lam[i], lam[j]);
            }
        }
        // D_{ji} = <psi_j| rho' |psi_i>
        let dm = vecs.adjoint() * &self.drho * vecs;
        // psi_i' coefficients in the eigenbasis: w_{ji} = D_ji / (lambda_i - lambda_j)
        let deriv = |i: usize| -> Vec<Complex64> {
            (0..dim)
                .map(|j| if j == i { c(0.0) } else { dm[(j, i)] / (lam[i] - lam[j]) })
                .collect()
        };
        let mut total = 0.0;
        for &i in &support {
            let dl = dm[(i, i)].re;
            let wi = deriv(i);
            let norm_sq: f64 = wi.iter().map(|z| z.norm_sqr()).sum();
            total += dl * dl / lam[i] + 4.0 * lam[i] * norm_sq;
            for &j in &support {
                // <psi_i|psi_j'> is the i-th coefficient of psi_j'
                let overlap = deriv(j)[i];
                total -= 8.0 * lam[i] * lam[j] / (lam[i] + lam[j]) * overlap.norm_sqr();
            }
        }
        total
    }
}

mod common;

use common::purify;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sjj_core::{assemble_sectors, decompose, qfi_exact, qfi_upper_bound, LossChannel, TwoModeState};

fn random_state(n: usize, seed: u64) -> TwoModeState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..=n)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    TwoModeState::normalized(amps).unwrap()
}

#[test]
fn branch_probabilities_match_environment_populations() {
    for seed in 0..5 {
        let s = random_state(3, seed);
        let ch = LossChannel::symmetric(0.7).unwrap();
        let d = decompose(&s, &ch, 1, 0.4).unwrap();
        let oracle = purify(s.amplitudes(), 0.7, 0.7, 1, 0.4);
        for br in &d.branches {
            let want = oracle.env_probability[(br.l_a, br.l_b)];
            assert!((br.probability - want).abs() < 1e-12, "{} {} {} {}", br.l_a, br.l_b, br.probability, want);
        }
    }
}

#[test]
fn sectors_match_partial_trace() {
    for n in 1..=4 {
        for &eta in &[0.3, 0.7, 0.9] {
            for k in 1..=3 {
                for seed in 0..4 {
                    let s = random_state(n, 100 * n as u64 + seed);
                    let phi = 0.37;
                    let ch = LossChannel::new(eta, eta).unwrap();
                    let sectors = assemble_sectors(&decompose(&s, &ch, k, phi).unwrap());
                    let oracle = purify(s.amplitudes(), eta, eta, k, phi);
                    let mut covered = 0.0;
                    for sec in &sectors {
                        let m_tot = sec.remaining;
                        for i in 0..=m_tot {
                            for j in 0..=m_tot {
                                let want = oracle.rho_at(m_tot - i, i, m_tot - j, j);
                                let got = sec.matrix[(i, j)];
                                assert!((got - want).norm() < 1e-12, "N={n} eta={eta} k={k} M={m_tot}");
                                covered += got.norm_sqr();
                            }
                        }
                    }
                    // nothing outside the sector blocks
                    let all: f64 = oracle.rho.iter().map(|z| z.norm_sqr()).sum();
                    assert!((all - covered).abs() < 1e-13);
                }
            }
        }
    }
}

#[test]
fn unequal_channels_match_partial_trace() {
    let s = random_state(4, 7);
    let ch = LossChannel::new(0.55, 0.85).unwrap();
    let sectors = assemble_sectors(&decompose(&s, &ch, 2, 1.1).unwrap());
    let oracle = purify(s.amplitudes(), 0.55, 0.85, 2, 1.1);
    for sec in &sectors {
        let m = sec.remaining;
        for i in 0..=m {
            for j in 0..=m {
                assert!((sec.matrix[(i, j)] - oracle.rho_at(m - i, i, m - j, j)).norm() < 1e-12);
            }
        }
    }
    let e = qfi_exact(&s, &ch, 2, 1.1).unwrap().value;
    let lit = oracle.literal_qfi();
    assert!((e - lit).abs() <= 1e-8 * lit);
}

#[test]
fn exact_qfi_matches_literal_sum() {
    for n in 1..=4 {
        for &eta in &[0.3, 0.7, 0.9] {
            for k in 1..=3 {
                for seed in 0..3 {
                    let s = random_state(n, 1000 + 10 * n as u64 + seed);
                    let phi = 0.21;
                    let ch = LossChannel::symmetric(eta).unwrap();
                    let exact = qfi_exact(&s, &ch, k, phi).unwrap().value;
                    let lit = purify(s.amplitudes(), eta, eta, k, phi).literal_qfi();
                    assert!((exact - lit).abs() <= 1e-8 * lit.abs().max(1e-300), "N={n} eta={eta} k={k}: {exact} vs {lit}");
                }
            }
        }
    }
}

fn choose(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[test]
fn bound_matches_direct_summation() {
    let (n, eta, k) = (3usize, 0.7f64, 3i32);
    for seed in 0..5 {
        let s = random_state(n, 50 + seed);
        let p = s.probabilities();
        let first: f64 = (0..=n).map(|m| (m as f64).powi(2 * k) * p[m]).sum();
        let mut second = 0.0;
        for lb in 0..=n {
            for la in 0..=n - lb {
                let mut num = 0.0;
                let mut den = 0.0;
                for m in lb..=n - la {
                    let b = choose(n - m, la)
                        * choose(m, lb)
                        * eta.powi((n - m) as i32)
                        * (1.0 / eta - 1.0).powi(la as i32)
                        * eta.powi(m as i32)
                        * (1.0 / eta - 1.0).powi(lb as i32);
                    num += (m as f64).powi(k) * p[m] * b;
                    den += p[m] * b;
                }
                if den > 0.0 {
                    second += num * num / den;
                }
            }
        }
        let want = 4.0 * (first - second);
        let got = qfi_upper_bound(&s, &LossChannel::symmetric(eta).unwrap(), 3).unwrap().value;
        assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
    }
}

#[test]
fn branch_count_and_layout() {
    let s = random_state(6, 3);
    let d = decompose(&s, &LossChannel::symmetric(0.6).unwrap(), 1, 0.0).unwrap();
    assert_eq!(d.branches.len(), 7 * 8 / 2);
    for br in &d.branches {
        assert_eq!(br.amplitudes.len(), br.remaining() + 1);
        let p: f64 = br.amplitudes.iter().map(|c| c.norm_sqr()).sum();
        assert!((p - br.probability).abs() < 1e-15);
    }
}

#[test]
fn sector_eigenvalues_phase_free_for_linear_generator() {
    for n in [2usize, 7, 13, 20] {
        let s = random_state(n, n as u64);
        let ch = LossChannel::symmetric(0.8).unwrap();
        let a = assemble_sectors(&decompose(&s, &ch, 1, 0.0).unwrap());
        let b = assemble_sectors(&decompose(&s, &ch, 1, 0.9).unwrap());
        for (x, y) in a.iter().zip(&b) {
            let mut ex: Vec<f64> = x.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
            let mut ey: Vec<f64> = y.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
            ex.sort_by(f64::total_cmp);
            ey.sort_by(f64::total_cmp);
            for (u, v) in ex.iter().zip(&ey) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn probability_closure(n in 1usize..=200, eta_a in 0.05f64..=1.0, eta_b in 0.05f64..=1.0, seed in 0u64..1000) {
        let s = random_state(n, seed);
        let d = decompose(&s, &LossChannel::new(eta_a, eta_b).unwrap(), 1, 0.3).unwrap();
        prop_assert!((d.total_probability() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn probabilities_ignore_phase(n in 1usize..=40, eta in 0.05f64..1.0, k in 1u32..=3, phi in -4.0f64..4.0, seed in 0u64..1000) {
        let s = random_state(n, seed);
        let ch = LossChannel::symmetric(eta).unwrap();
        let a = decompose(&s, &ch, k, 0.0).unwrap();
        let b = decompose(&s, &ch, k, phi).unwrap();
        for (x, y) in a.branches.iter().zip(&b.branches) {
            prop_assert!((x.probability - y.probability).abs() <= 1e-15 * x.probability.max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn sectors_hermitian_psd_and_normalized(n in 1usize..=30, eta in 0.05f64..=1.0, k in 1u32..=3, seed in 0u64..1000) {
        let s = random_state(n, seed);
        let sectors = assemble_sectors(&decompose(&s, &LossChannel::symmetric(eta).unwrap(), k, 0.5).unwrap());
        let total: f64 = sectors.iter().map(|s| s.weight).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        for sec in &sectors {
            let m = &sec.matrix;
            prop_assert!((m - m.adjoint()).iter().all(|z| z.norm() < 1e-12));
            let low = m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!(low > -1e-10);
        }
    }
}

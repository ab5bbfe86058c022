use nalgebra::DMatrix;
use proptest::prelude::*;
use sjj_core::sjj::crossover_scan;
use sjj_core::{build_hamiltonian, ground_state, SjjParams};

fn dense(n: usize, lambda: f64) -> DMatrix<f64> {
    // matrix elements written out independently of the library
    let nf = n as f64;
    let t = |j: usize| 2.0 * j as f64 / nf - 1.0;
    let mut h = DMatrix::<f64>::zeros(n + 1, n + 1);
    for j in 0..=n {
        h[(j, j)] = -0.5 * lambda * t(j).powi(2);
    }
    for j in 0..n {
        let jf = j as f64;
        let up = (1.0 - 0.21 * t(j).powi(2)) * (jf + 1.0) * ((nf - jf) * (nf - jf - 1.0)).sqrt();
        let down = (1.0 - 0.21 * t(j + 1).powi(2)) * (nf - jf) * (jf * (jf + 1.0)).sqrt();
        let b = -(up + down) / (nf * nf);
        h[(j, j + 1)] = b;
        h[(j + 1, j)] = b;
    }
    h
}

#[test]
fn matches_dense_eigensolver() {
    for n in (2..=60).step_by(3) {
        for &lambda in &[0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 5.0] {
            let gs = ground_state(&build_hamiltonian(SjjParams::new(n, lambda).unwrap()).unwrap()).unwrap();
            let eig = dense(n, lambda).symmetric_eigen();
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let (e0, e1) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
            assert!((gs.energy - e0).abs() < 1e-9, "N={n} Lambda={lambda}");
            if e1 - e0 > 1e-6 {
                let v = eig.eigenvectors.column(order[0]);
                let dot: f64 = gs.state.amplitudes().iter().zip(v.iter()).map(|(a, b)| a.re * b).sum();
                let sign = dot.signum();
                for (a, b) in gs.state.amplitudes().iter().zip(v.iter()) {
                    assert!((a.re - sign * b).abs() < 1e-7, "N={n} Lambda={lambda}");
                }
            } else {
                // near-degenerate pair: the returned vector must lie in its span
                let u = eig.eigenvectors.column(order[0]);
                let w = eig.eigenvectors.column(order[1]);
                let pu: f64 = gs.state.amplitudes().iter().zip(u.iter()).map(|(a, b)| a.re * b).sum();
                let pw: f64 = gs.state.amplitudes().iter().zip(w.iter()).map(|(a, b)| a.re * b).sum();
                assert!((pu * pu + pw * pw - 1.0).abs() < 1e-7, "N={n} Lambda={lambda}");
            }
        }
    }
}

#[test]
fn forty_particle_profiles() {
    let cat = ground_state(&build_hamiltonian(SjjParams::new(40, 3.0).unwrap()).unwrap()).unwrap();
    assert!(cat.state.cat_ness() > 0.9);
    let flat = ground_state(&build_hamiltonian(SjjParams::new(40, 0.0).unwrap()).unwrap()).unwrap();
    let p = flat.state.probabilities();
    let peak = (0..=40).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
    assert_eq!(peak, 20);
}

#[test]
fn cat_ness_grows_with_lambda() {
    for n in [10usize, 40, 100, 150] {
        let grid: Vec<f64> = (0..=60).map(|i| i as f64 * 0.05).collect();
        let mut last = 0.0;
        for &l in &grid {
            let c = ground_state(&build_hamiltonian(SjjParams::new(n, l).unwrap()).unwrap()).unwrap().state.cat_ness();
            assert!(c >= last - 1e-12, "N={n} Lambda={l}: {c} < {last}");
            last = c;
        }
    }
}

#[test]
fn crossover_lies_in_expected_window() {
    let grid: Vec<f64> = (0..=60).map(|i| i as f64 * 0.05).collect();
    let scan = crossover_scan(100, &grid).unwrap();
    assert!(scan.lambda > 1.8 && scan.lambda < 2.3, "{}", scan.lambda);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mirror_symmetric_with_small_residual(n in 2usize..=200, lambda in 0.0f64..=5.0) {
        let h = build_hamiltonian(SjjParams::new(n, lambda).unwrap()).unwrap();
        let gs = ground_state(&h).unwrap();
        let a = gs.state.amplitudes();
        for j in 0..=n {
            prop_assert!((a[j].re - a[n - j].re).abs() < 1e-9);
        }
        prop_assert!(gs.diagnostics.residual <= 1e-10 * h.norm());
        let norm: f64 = gs.state.probabilities().iter().sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
    }
}

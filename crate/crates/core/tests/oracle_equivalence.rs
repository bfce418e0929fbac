use lre_core::oracle;
use lre_core::reconstruct::{project_spectrum, FrequencyTable};
use lre_core::simulator::{dense_to_theta, random_density};
use lre_core::{Kernel, QubitCount, Reconstructor, SettingFrequencies, SettingIndex};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q(n: u32) -> QubitCount {
    QubitCount::new(n).unwrap()
}

fn noisy_frequencies(n: u32, seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 1usize << n;
    let mut out = Vec::new();
    for _ in 0..3usize.pow(n) {
        let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        out.extend(raw.into_iter().map(|v| v / s));
    }
    out
}

#[test]
fn step_one_matches_dense_least_squares() {
    for n in 1..=2 {
        for seed in 0..5 {
            let p = noisy_frequencies(n, seed);
            let want = oracle::least_squares_theta(n, &p);
            let table = FrequencyTable::new(q(n), p).unwrap();
            for kernel in [Kernel::Fast, Kernel::PaperDirect] {
                let got = Reconstructor::new(2, kernel)
                    .unwrap()
                    .step_one(&table)
                    .unwrap();
                for (a, b) in got.values().iter().zip(&want) {
                    assert!((a - b).abs() < 1e-10, "n={n} {kernel}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn gram_matrix_is_diagonal_tensor_power() {
    for n in 1..=2u32 {
        let g = oracle::gram_matrix(n);
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let zeros = (0..n).filter(|k| (i >> (2 * k)) & 3 == 0).count() as i32;
                let want = if i == j { 3f64.powi(zeros) } else { 0.0 };
                assert!((g[(i, j)] - want).abs() < 1e-12, "({i},{j})");
            }
        }
    }
}

#[test]
fn assembly_inverts_coefficient_extraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=4 {
        let d = 1 << n;
        for _ in 0..5 {
            let h = oracle::random_hermitian_trace_one(d, &mut rng);
            let theta = dense_to_theta(&h).unwrap();
            for kernel in [Kernel::Fast, Kernel::PaperDirect] {
                let back = Reconstructor::new(1, kernel).unwrap().step_two(&theta);
                assert!(back.max_abs_diff(&h) < 1e-12);
            }
            let dense = oracle::theta_to_dense(n, theta.values());
            assert!(oracle::from_dense(&dense).max_abs_diff(&h) < 1e-12);
        }
    }
}

#[test]
fn exact_probabilities_match_dense_projectors() {
    for n in 1..=3 {
        let rho = random_density(q(n), 40 + n as u64).unwrap();
        let state = lre_core::TrueState::prepare(
            lre_core::StateDescriptor::parse(&format!("random:{}", 40 + n), q(n)).unwrap(),
        )
        .unwrap();
        let want = oracle::probabilities(n, &oracle::to_dense(&rho));
        let d = 1 << n;
        let mut row = vec![0.0; d];
        for w in 0..3usize.pow(n) {
            state
                .frequencies_into(SettingIndex(w as u64), &mut row)
                .unwrap();
            for s in 0..d {
                assert!((row[s] - want[w * d + s]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn projection_beats_random_physical_candidates() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for d in 2..=6 {
        for _ in 0..10 {
            let mu = oracle::random_hermitian_trace_one(d, &mut rng);
            let rho = lre_core::project_to_density(&mu).unwrap();
            let best = rho.frobenius_distance(&mu).unwrap();
            for _ in 0..200 {
                let cand = oracle::random_physical(d, &mut rng);
                assert!(best <= cand.frobenius_distance(&mu).unwrap() + 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn spectrum_projection_matches_bisection(v in prop::collection::vec(-2.0f64..2.0, 1..=64)) {
        let s: f64 = v.iter().sum();
        let shift = (s - 1.0) / v.len() as f64;
        let v: Vec<f64> = v.iter().map(|x| x - shift).collect();
        let got = project_spectrum(&v);
        let want = oracle::simplex_projection_bisection(&v);
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        prop_assert!(got.iter().all(|&x| x >= 0.0));
        prop_assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn projection_is_idempotent(seed in any::<u64>(), n in 1u32..=3) {
        let rho = random_density(q(n), seed).unwrap();
        let again = lre_core::project_to_density(&rho).unwrap();
        prop_assert!(again.max_abs_diff(&rho) < 1e-12);
    }
}

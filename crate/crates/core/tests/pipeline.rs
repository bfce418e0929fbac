use lre_core::record::MeasurementRecord;
use lre_core::simulator::exact_counts;
use lre_core::{
    hs_squared_distance, sample_counts, Kernel, QubitCount, Reconstructor, StateDescriptor,
    TrueState,
};
use proptest::prelude::*;

fn state(desc: &str, n: u32) -> TrueState {
    TrueState::prepare(StateDescriptor::parse(desc, QubitCount::new(n).unwrap()).unwrap()).unwrap()
}

#[test]
fn noiseless_reconstruction_recovers_state() {
    let recon = Reconstructor::new(2, Kernel::Fast).unwrap();
    for n in 1..=6 {
        let bits = format!(
            "productz:{}",
            "10".repeat(3).chars().take(n as usize).collect::<String>()
        );
        for desc in ["maxmixed", "ghz", bits.as_str()] {
            let st = state(desc, n);
            let out = recon.reconstruct(&st).unwrap();
            let truth = st.density_matrix().unwrap();
            assert!(
                out.rho.frobenius_distance(&truth).unwrap() < 1e-10,
                "{desc} n={n}"
            );
        }
    }
}

#[test]
fn file_and_memory_paths_agree() {
    let dir = tempfile::tempdir().unwrap();
    let recon = Reconstructor::new(3, Kernel::Fast).unwrap();
    for n in [2, 4, 6] {
        let st = state("random:5", n);
        let rec = sample_counts(&st, 300, 21).unwrap();
        let path = dir.path().join(format!("r{n}.txt"));
        rec.write(&path).unwrap();
        let back = MeasurementRecord::read(&path).unwrap();
        assert_eq!(back, rec);
        let a = recon.reconstruct(&rec).unwrap();
        let b = recon.reconstruct(&back).unwrap();
        assert_eq!(a.rho, b.rho);
    }
}

#[test]
fn exact_count_record_matches_probability_source() {
    let st = state("ghz", 3);
    let rec = exact_counts(&st, 8).unwrap();
    let recon = Reconstructor::new(1, Kernel::PaperDirect).unwrap();
    let a = recon.reconstruct(&rec).unwrap();
    let b = recon.reconstruct(&st).unwrap();
    assert!(a.rho.max_abs_diff(&b.rho) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimates_are_physical_and_closer_after_projection(
        n in 1u32..=4, seed in any::<u64>(), shots in 1u64..200,
    ) {
        let st = state(&format!("random:{}", seed % 1000), n);
        let rec = sample_counts(&st, shots, seed).unwrap();
        let out = Reconstructor::new(2, Kernel::Fast).unwrap().reconstruct(&rec).unwrap();
        prop_assert!((out.mu.trace() - 1.0).abs() < 1e-10);
        prop_assert!((out.rho.trace() - 1.0).abs() < 1e-9);
        prop_assert!(out.rho.eigenvalues().unwrap()[0] > -1e-10);
        let truth = st.density_matrix().unwrap();
        let dm = hs_squared_distance(&out.mu, &truth).unwrap();
        let dr = hs_squared_distance(&out.rho, &truth).unwrap();
        prop_assert!(dr <= dm + 1e-12);
    }

    #[test]
    fn thread_count_does_not_change_output(n in 1u32..=5, seed in any::<u64>(), threads in 2usize..6) {
        let st = state("random:1", n);
        let rec = sample_counts(&st, 50, seed).unwrap();
        for kernel in [Kernel::Fast, Kernel::PaperDirect] {
            let a = Reconstructor::new(1, kernel).unwrap().reconstruct(&rec).unwrap();
            let b = Reconstructor::new(threads, kernel).unwrap().reconstruct(&rec).unwrap();
            prop_assert!(a.theta.values().iter().zip(b.theta.values()).all(|(x, y)| (x - y).abs() < 1e-12));
            prop_assert!(a.rho.max_abs_diff(&b.rho) < 1e-12);
        }
    }
}

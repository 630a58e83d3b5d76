use alphacomp::alpha_fit::{self, AlphaBounds};
use alphacomp::asymptotics;
use alphacomp::io::{self, LoadOptions};
use alphacomp::sim::{self, SimConfig, SimMode};
use alphacomp::{Error, ErrorCategory};
use proptest::prelude::*;

fn labels(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("x{j}")).collect()
}

#[test]
fn simulate_write_load_fit() {
    let cfg = SimConfig::new(SimMode::Coalescing { b: 2.0, c: vec![0.5, -0.2, -0.3] }, vec![0.3], 1500, 11).unwrap();
    let rows: Vec<Vec<f64>> = sim::simulate_dataset(&cfg, 0.3)
        .unwrap()
        .into_iter()
        .map(|c| c.into_vec())
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.csv");
    io::write_compositions(std::fs::File::create(&path).unwrap(), &labels(3), &rows).unwrap();

    let ds = io::load_csv(&path, &LoadOptions::default()).unwrap();
    assert_eq!(ds.component_labels, labels(3));
    for (a, b) in ds.rows.iter().zip(&rows) {
        // Loading renormalizes, which may move the last bit.
        assert!(a.as_slice().iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-15));
    }
    let logs = ds.log_data().unwrap();
    let fit = alpha_fit::fit_direct(&logs, AlphaBounds::default(), 82).unwrap();
    assert!((fit.alpha_hat - 0.3).abs() < 0.1, "{}", fit.alpha_hat);
    let again = alpha_fit::transformed_loglik(&logs, fit.alpha_hat, &fit.gamma_hat).unwrap();
    assert!((again - fit.loglik).abs() < 1e-9);

    let table = sim::estimator_comparison(&logs, &ds.component_labels, None, AlphaBounds::default(), 82).unwrap();
    assert_eq!(table.alpha_used, fit.alpha_hat);
    let direct = table.rows[0].shapes.as_ref().unwrap();
    let a2 = table.rows[2].shapes.as_ref().unwrap();
    for (x, y) in direct.iter().zip(a2) {
        assert!((x / y - 1.0).abs() < 1e-4);
    }
}

#[test]
fn asymptotic_fits_track_direct_at_small_alpha() {
    let cfg = SimConfig::new(SimMode::Coalescing { b: 1.0, c: vec![0.1, 0.3, -0.4] }, vec![0.02], 3000, 5).unwrap();
    let data = sim::simulate_log_dataset(&cfg, 0.02).unwrap();
    let a1 = asymptotics::fit_asymptotic1(&data, 0.02).unwrap();
    let a2 = asymptotics::fit_asymptotic2(&data, 0.02).unwrap();
    for (x, y) in a1.implied_gamma.shapes().iter().zip(a2.implied_gamma.shapes()) {
        assert!((x / y - 1.0).abs() < 0.05, "{x} vs {y}");
    }
    assert!(a1.c_hat.iter().sum::<f64>().abs() < 1e-10);
}

#[test]
fn error_categories() {
    let dir = tempfile::tempdir().unwrap();
    let e = io::load_csv(&dir.path().join("missing.csv"), &LoadOptions::default()).unwrap_err();
    assert_eq!(e.category(), ErrorCategory::Io);
    assert!(matches!(AlphaBounds::new(1.0, -1.0, 1e-3), Err(ref e) if e.category() == ErrorCategory::Domain));
    let same = alphacomp::LogData::from_log_rows(&[[0.2f64.ln(), 0.8f64.ln()]; 5]).unwrap();
    let err = alpha_fit::profile_loglik(&same, 0.5).unwrap_err();
    assert!(matches!(err, Error::Convergence { .. }), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn profile_dominates_any_fixed_gamma(seed in 0u64..1000, alpha in 0.05f64..1.0) {
        let cfg = SimConfig::new(SimMode::General { b_vec: vec![0.4, 0.9, 0.6] }, vec![0.5], 200, seed).unwrap();
        let data = sim::simulate_log_dataset(&cfg, 0.5).unwrap();
        let (best, gamma) = alpha_fit::profile_loglik(&data, alpha).unwrap();
        let scaled = alphacomp::DirichletParams::new(gamma.shapes().iter().map(|g| g * 1.1).collect()).unwrap();
        prop_assert!(best >= alpha_fit::transformed_loglik(&data, alpha, &scaled).unwrap());
    }
}

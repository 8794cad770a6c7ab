use qarch_core::bench::{
    fit_gaussian, fit_linear_first4, gaussian, gaussian_sse, points, sweep, ExperimentKind, ExperimentSpec,
};
use qarch_core::config::Backend;

/// Exhaustive grid over the same parameter box the fit searches.
fn grid_optimum(pts: &[(f64, f64)]) -> f64 {
    let d_max = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    let mut best = f64::INFINITY;
    for i in 0..=2000 {
        let d0 = d_max * 10f64.powf(-2.0 + 4.0 * i as f64 / 2000.0);
        for j in 1..=500 {
            let a = 0.5 * j as f64 / 500.0;
            best = best.min(gaussian_sse(pts, d0, a));
        }
    }
    best
}

#[test]
fn gaussian_fit_reaches_grid_optimum() {
    let depths: Vec<f64> = (1..=30).map(|k| 2.0 * k as f64).collect();
    let cases = [(28.0, 0.5, 0.0), (12.0, 0.3, 0.01), (45.0, 0.45, 0.02), (28.0, 0.4, 0.015)];
    for (k, (d0, a, noise)) in cases.into_iter().enumerate() {
        let pts: Vec<(f64, f64)> = depths
            .iter()
            .enumerate()
            .map(|(i, &d)| (d, gaussian(d, d0, a) + noise * ((i * 7 + k) as f64).sin()))
            .collect();
        let fit = fit_gaussian(&pts).unwrap();
        let sse = gaussian_sse(&pts, fit.params.0, fit.params.1);
        let oracle = grid_optimum(&pts);
        assert!(sse <= oracle * 1.02 + 1e-15, "case {k}: fit {sse} grid {oracle}");
        if noise == 0.0 {
            assert!((fit.params.0 - d0).abs() < 0.01 * d0);
            assert!((fit.params.1 - a).abs() < 0.01 * a);
        }
    }
}

#[test]
fn exact_line_recovered() {
    let pts: Vec<(f64, f64)> = (1..=4).map(|d| (d as f64, 0.945 - 0.0422 * d as f64)).collect();
    let f = fit_linear_first4(&pts).unwrap();
    assert!((f.params.0 - 0.945).abs() < 1e-12 && (f.params.1 + 0.0422).abs() < 1e-12);
}

#[test]
fn noiseless_sweeps_always_succeed() {
    for name in ["ionq", "ibm-vigo", "rigetti-aspen8"] {
        let b = Backend::preset(name).unwrap().noiseless();
        for spec in [
            ExperimentSpec::new(ExperimentKind::Spam),
            ExperimentSpec::new(ExperimentKind::SwapChain),
            ExperimentSpec::bv(4),
        ] {
            for r in sweep(&spec, &spec.default_grid(), &b, 128, 3).unwrap() {
                assert_eq!(r.successes, r.shots, "{name} {:?} {}", r.experiment, r.parameter);
            }
        }
        let spec = ExperimentSpec::new(ExperimentKind::CnotChain);
        for r in sweep(&spec, &[2, 4, 30, 60], &b, 128, 3).unwrap() {
            assert_eq!(r.successes, r.shots);
        }
    }
}

#[test]
fn bv_sweep_has_one_record_per_weight() {
    let b = Backend::preset("ionq").unwrap();
    let spec = ExperimentSpec::bv(4);
    let recs = sweep(&spec, &spec.default_grid(), &b, 1024, 1).unwrap();
    assert_eq!(recs.len(), 5);
    assert!(sweep(&spec, &[], &b, 1024, 1).unwrap().is_empty());
}

#[test]
fn depolarizing_decay_is_monotone() {
    let mut b = Backend::preset("ibm-vigo").unwrap().noiseless();
    b.depolarizing.p2 = 0.03;
    let spec = ExperimentSpec::new(ExperimentKind::SwapChain);
    let recs = sweep(&spec, &spec.default_grid(), &b, 8192, 2).unwrap();
    for w in recs.windows(2) {
        assert!(w[1].success_rate() <= w[0].success_rate() + 2.0 * w[0].ci95 / 1.96);
    }
    let pts = points(&recs);
    assert!(pts[0].1 > pts[11].1 + 0.2);
}

#[test]
fn vigo_weight_four_drops_more_than_the_extra_cnot() {
    let b = Backend::preset("ibm-vigo").unwrap();
    let spec = ExperimentSpec::bv(4);
    let recs = sweep(&spec, &[2, 3, 4], &b, 8192, 11).unwrap();
    let (s2, s3, s4) = (recs[0].success_rate(), recs[1].success_rate(), recs[2].success_rate());
    assert!(s3 - s4 > s2 - s3, "{s2} {s3} {s4}");
}

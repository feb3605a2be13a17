use std::time::Instant;

use approx::assert_abs_diff_eq;
use pocketvine::calibration::{
    factor_report, fit_points, generate_trials, ingest_csv, reproduce_table, weight_n, write_csv, Disk,
    SyntheticSpec, REPRODUCE_INTERCEPT_TOL, REPRODUCE_SLOPE_TOL, STANDARD_MASSES_G, STANDARD_TRIALS,
};
use pocketvine::pocket_model::{ContactSpec, PocketConfig, SensitivityTable};
use proptest::prelude::*;

const SIGMA: f64 = 0.02;
const RUNS: u64 = 1000;

/// Standard error of an OLS slope for the bench's force levels.
fn slope_std_error(sigma: f64) -> f64 {
    let xs: Vec<f64> = (0..STANDARD_TRIALS)
        .flat_map(|_| STANDARD_MASSES_G.iter().map(|m| weight_n(m + Disk::Medium.mass_g())))
        .collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    sigma / sxx.sqrt()
}

fn normal_cdf(z: f64) -> f64 {
    // Abramowitz-Stegun 7.1.26 on erf
    let x = z.abs() / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erf = 1.0 - poly * (-x * x).exp();
    if z >= 0.0 {
        0.5 * (1.0 + erf)
    } else {
        0.5 * (1.0 - erf)
    }
}

#[test]
fn noisy_trials_recover_slope() {
    let started = Instant::now();
    let cfg = PocketConfig::control();
    let contact = ContactSpec::default();
    let truth = 0.31;
    let mut hits = 0;
    let mut slopes = Vec::with_capacity(RUNS as usize);
    for seed in 0..RUNS {
        let samples = generate_trials(
            &cfg,
            &contact,
            &STANDARD_MASSES_G,
            Disk::Medium.mass_g(),
            STANDARD_TRIALS,
            SIGMA,
            seed,
        )
        .unwrap();
        assert_eq!(samples.len(), 9);
        let fit = fit_points(samples.iter().map(|s| (s.applied_force_n, s.delta_pressure_kpa))).unwrap();
        if (fit.slope - truth).abs() <= 0.1 * truth {
            hits += 1;
        }
        slopes.push(fit.slope);
    }
    assert!(hits >= 950, "{hits} of {RUNS} within 10%");

    // the spread matches the closed-form standard error
    let se = slope_std_error(SIGMA);
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let sd = (slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (slopes.len() - 1) as f64).sqrt();
    assert!((sd / se - 1.0).abs() < 0.1, "empirical {sd} vs analytic {se}");
    assert!((mean - truth).abs() < 4.0 * se / (RUNS as f64).sqrt());

    let expected_rate = 2.0 * normal_cdf(0.1 * truth / se) - 1.0;
    assert!(expected_rate > 0.95);
    assert!(started.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn every_table_row_reproduces() {
    let started = Instant::now();
    let (report, rows) = reproduce_table(SensitivityTable::bundled()).unwrap();
    assert_eq!(rows.len(), 15);
    for (row, group) in rows.iter().zip(&report.groups) {
        let fit = group.fit.as_ref().unwrap();
        assert!((fit.slope - row.table_slope).abs() <= REPRODUCE_SLOPE_TOL, "{}", row.group);
        assert!(fit.intercept.abs() < REPRODUCE_INTERCEPT_TOL, "{}", row.group);
        assert!(row.pass);
    }
    assert!(started.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn synthetic_spec_is_deterministic() {
    let spec: SyntheticSpec = "control,top,medium,0.4,noise=0.02,seed=7".parse().unwrap();
    let a = spec.generate().unwrap();
    let b = spec.generate().unwrap();
    assert_eq!(a, b);
    let other: SyntheticSpec = "control,top,medium,0.4,noise=0.02,seed=8".parse().unwrap();
    assert_ne!(a, other.generate().unwrap());
}

#[test]
fn csv_round_trip_preserves_fit() {
    let spec: SyntheticSpec = "sealed,top,large,0.4,noise=0.01,seed=3,subpocket=1".parse().unwrap();
    let samples = spec.generate().unwrap();
    let mut buf = Vec::new();
    write_csv(&samples, &mut buf).unwrap();
    let back = ingest_csv(buf.as_slice()).unwrap();
    assert!(back.row_errors.is_empty());
    let a = factor_report(&[("g".into(), samples)]);
    let b = factor_report(&[("g".into(), back.samples)]);
    let (fa, fb) = (a.fit("g").unwrap(), b.fit("g").unwrap());
    assert_abs_diff_eq!(fa.slope, fb.slope, epsilon = 1e-12);
    assert_abs_diff_eq!(fa.intercept, fb.intercept, epsilon = 1e-12);
}

#[test]
fn empty_csv_is_refused() {
    let err = ingest_csv("".as_bytes()).unwrap_err();
    assert_eq!(err.code(), "MISSING_COLUMN");
}

proptest! {
    #[test]
    fn exact_lines_are_recovered(slope in 0.05f64..1.0, intercept in -0.5f64..0.5,
                                 xs in prop::collection::vec(0.0f64..10.0, 3..20)) {
        prop_assume!(xs.iter().any(|&x| (x - xs[0]).abs() > 1e-3));
        let fit = fit_points(xs.iter().map(|&x| (x, slope * x + intercept))).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!((fit.intercept - intercept).abs() < 1e-9);
        prop_assert!(fit.r_squared > 1.0 - 1e-9);
    }

    #[test]
    fn offset_moves_only_intercept(shift in -1.0f64..1.0,
                                   pts in prop::collection::vec((0.0f64..10.0, -1.0f64..3.0), 3..15)) {
        prop_assume!(pts.iter().any(|p| (p.0 - pts[0].0).abs() > 1e-3));
        let a = fit_points(pts.iter().copied()).unwrap();
        let b = fit_points(pts.iter().map(|&(x, y)| (x, y + shift))).unwrap();
        prop_assert!((a.slope - b.slope).abs() < 1e-9);
        prop_assert!((b.intercept - a.intercept - shift).abs() < 1e-9);
    }

    #[test]
    fn order_does_not_matter(pts in prop::collection::vec((0.0f64..10.0, -1.0f64..3.0), 3..15)) {
        prop_assume!(pts.iter().any(|p| (p.0 - pts[0].0).abs() > 1e-3));
        let a = fit_points(pts.iter().copied()).unwrap();
        let b = fit_points(pts.iter().rev().copied()).unwrap();
        prop_assert!((a.slope - b.slope).abs() < 1e-9);
    }
}

use std::f64::consts::PI;

use adiff_core::correlation::{rs_exact_eta_theta, tm_exact_eta};
use adiff_core::distribution::{
    dyadic_subintervals, fourier_distribution, riesz_partial_distribution, tm_functional_relation_residual,
    volterra_distribution, volterra_iterate, DistributionFunction, DistributionMeta, RieszProfile,
    DEFAULT_FOURIER_TRUNCATION, DEFAULT_GRID, DEFAULT_VOLTERRA_ITERATIONS, DEFAULT_VOLTERRA_TOLERANCE,
};
use adiff_core::periodic::{homometric_pair, PeriodicComb};
use adiff_core::spectral::{
    empirical_bragg_intensity, empirical_diffraction_intensity, pd_bragg_intensity, pd_bragg_spectrum,
    periodic_diffraction, periodic_intensity_direct, Frequency,
};
use adiff_core::substitution::{fixed_point_window, period_doubling};
use adiff_core::window::{make_comb, signed_weights, tm_window, weight_map, WeightedComb};
use num_complex::Complex64;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[test]
fn fourier_route_examples() {
    let tm = fourier_distribution(&tm_exact_eta(4096), 4096, 1024).unwrap();
    assert_eq!(tm.values()[0], 0.0);
    assert!((tm.value_at(0.5) - 0.5).abs() < 1e-12);
    assert!((tm.total_mass() - 1.0).abs() < 1e-12);
    let rs = fourier_distribution(&rs_exact_eta_theta(256), 256, 512).unwrap();
    for i in 0..=512 {
        assert!((rs.values()[i] - rs.x(i)).abs() < 1e-15, "i={i}");
    }
}

#[test]
fn volterra_starts_from_lebesgue() {
    let f0 = volterra_iterate(1024, 0).unwrap();
    for i in 0..=1024 {
        assert_eq!(f0.values()[i], f0.x(i));
    }
}

#[test]
fn riesz_single_factor_closed_form() {
    let profile = RieszProfile::new(1, 1).unwrap();
    for x in [0.0, 0.1, 0.25, 0.3, 0.77] {
        assert!((profile.theta(x) - (1.0 - (2.0 * PI * x).cos())).abs() < 1e-12);
    }
    let f = riesz_partial_distribution(&profile, 1, 256).unwrap();
    for i in 0..=256 {
        let x = f.x(i);
        let expected = x - (2.0 * PI * x).sin() / (2.0 * PI);
        assert!((f.values()[i] - expected).abs() < 1e-9, "x={x}");
    }
}

#[test]
fn theta_is_nonnegative() {
    for k in 1..=4 {
        for l in 1..=4 {
            let profile = RieszProfile::new(k, l).unwrap();
            assert!(profile.min_on_grid(100_000) >= -1e-12, "({k},{l})");
        }
    }
}

#[test]
fn riesz_products_have_unit_mass() {
    for (k, l) in [(1, 1), (1, 2), (2, 2), (3, 1)] {
        let profile = RieszProfile::new(k, l).unwrap();
        let f = riesz_partial_distribution(&profile, profile.default_factors(), 1024).unwrap();
        assert!((f.total_mass() - 1.0).abs() < 1e-9, "({k},{l}): {}", f.total_mass());
        assert!(f.is_monotone(0.0));
    }
}

#[test]
fn three_routes_agree_and_satisfy_the_functional_relations() {
    let fourier = fourier_distribution(&tm_exact_eta(DEFAULT_FOURIER_TRUNCATION), DEFAULT_FOURIER_TRUNCATION, DEFAULT_GRID)
        .unwrap();
    let outcome = volterra_distribution(DEFAULT_GRID, DEFAULT_VOLTERRA_ITERATIONS, DEFAULT_VOLTERRA_TOLERANCE).unwrap();
    let volterra = outcome.distribution;
    let riesz = riesz_partial_distribution(&RieszProfile::new(1, 1).unwrap(), 14, DEFAULT_GRID).unwrap();
    assert!(volterra.sup_distance(&fourier).unwrap() <= 1e-3);
    assert!(riesz.sup_distance(&fourier).unwrap() <= 5e-3);
    assert!(riesz.sup_distance(&volterra).unwrap() <= 1e-2);
    assert!((volterra.total_mass() - 1.0).abs() <= 1e-8);
    assert!(volterra.is_strictly_increasing());
    let report = tm_functional_relation_residual(&volterra, &dyadic_subintervals(6));
    assert!(report.max_plus <= 1e-3, "{}", report.max_plus);
    assert!(report.max_minus <= 5e-3, "{}", report.max_minus);
}

#[test]
fn lebesgue_satisfies_the_sum_relation() {
    let lebesgue = DistributionFunction::from_increments(vec![1.0 / 512.0; 512], DistributionMeta::new("lebesgue")).unwrap();
    let report = tm_functional_relation_residual(&lebesgue, &dyadic_subintervals(6));
    assert!(report.max_plus < 1e-15);
}

#[test]
fn pd_amplitude_examples() {
    for m in [-3, 0, 1, 5] {
        let peak = pd_bragg_intensity(ONE, ZERO, m, 0).unwrap();
        assert!((peak.intensity - 4.0 / 9.0).abs() < 1e-15);
    }
    let half = pd_bragg_intensity(ONE, ZERO, 1, 1).unwrap();
    assert!((half.intensity - 1.0 / 9.0).abs() < 1e-15);
    assert_eq!(half.frequency, Frequency::rational(1, 2));
    assert!(pd_bragg_intensity(ONE, ZERO, 2, 1).is_err());
    let constant = pd_bragg_spectrum(ONE, ONE, 6).unwrap();
    constant.check_invariants().unwrap();
    for peak in &constant.peaks {
        let expected = if peak.frequency == Frequency::rational(0, 1) { 1.0 } else { 0.0 };
        assert!((peak.intensity - expected).abs() < 1e-15, "{:?}", peak.frequency);
    }
}

#[test]
fn pd_indicator_comb_matches_the_amplitudes() {
    let pd = period_doubling();
    let seed = (pd.symbol("b").unwrap(), pd.symbol("a").unwrap());
    let window = fixed_point_window(&pd, seed, 2, 1 << 18).unwrap();
    let comb = make_comb(&window, &weight_map(&[("a", ONE), ("b", ZERO)])).unwrap();
    assert!((empirical_bragg_intensity(&comb, 0.0) - 4.0 / 9.0).abs() < 0.01);
    assert!((empirical_bragg_intensity(&comb, 0.5) - 1.0 / 9.0).abs() < 0.01);
    assert!((empirical_bragg_intensity(&comb, 0.25) - 1.0 / 36.0).abs() < 0.01);
}

#[test]
fn periodic_examples() {
    let lattice = periodic_diffraction(&PeriodicComb::from_integers(&[1]).unwrap());
    assert_eq!(lattice.peaks.len(), 1);
    assert_eq!(lattice.peaks[0].intensity, 1.0);
    let (a, b) = homometric_pair();
    let (sa, sb) = (periodic_diffraction(&a), periodic_diffraction(&b));
    for (x, y) in sa.peaks.iter().zip(&sb.peaks) {
        assert_eq!(x.frequency, y.frequency);
        assert_eq!(x.exact, y.exact);
        assert_eq!(x.intensity, y.intensity);
    }
    let mean = 168.0 / 6.0;
    assert!((sa.peaks[0].intensity - mean * mean).abs() < 1e-9);
    for (j, peak) in sa.peaks.iter().enumerate() {
        let direct = periodic_intensity_direct(&a, j as f64 / 6.0);
        assert!((peak.intensity - direct).abs() < 1e-9 * direct.max(1.0), "j={j}");
    }
}

#[test]
fn empirical_intensity_examples() {
    let n = 1000;
    let ones = WeightedComb::from_real(&vec![1.0; 2 * n + 1], "ones").unwrap();
    assert!((empirical_diffraction_intensity(&ones, 0.0) - (2 * n + 1) as f64).abs() < 1e-6);
    assert!(empirical_diffraction_intensity(&ones, 0.5) <= 1.0 / (2 * n + 1) as f64 + 1e-12);
    let trend: Vec<f64> = (10..=18)
        .map(|j| {
            let comb = make_comb(&tm_window(1 << j), &signed_weights()).unwrap();
            empirical_diffraction_intensity(&comb, 0.0)
        })
        .collect();
    assert!(trend.windows(2).all(|t| t[1] < t[0]), "{trend:?}");
}

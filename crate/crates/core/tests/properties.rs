use num_complex::Complex64;
use proptest::prelude::*;
use spdc_core::analysis::pearson;
use spdc_core::dispersion::{idler_wavelength, DispersionModel};
use spdc_core::instrument::{convolve_1d, gaussian_kernel};
use spdc_core::interference::{amplitude_fast, amplitude_naive, intensity, quadrature_oracle};
use spdc_core::superlattice::{audit_signs, build_sequence, DesignSpec};

fn spec_strategy(max_nl: u32, max_gap: u32, max_m: u32) -> impl Strategy<Value = DesignSpec> {
    (1..=max_nl, 0..=max_gap, 1..=max_m, 2.0..10.0f64).prop_map(|(n, g, m, l)| DesignSpec::new(n, g, m, l))
}

fn close(fast: Complex64, naive: Complex64, total: f64) -> bool {
    (fast - naive).norm() / naive.norm().max(total * 1e-12) <= 1e-9
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn energy_conservation_is_an_involution(lp in 0.4..0.8f64, frac in 1.05..1.95f64) {
        let ls = lp * frac;
        let li = idler_wavelength(lp, ls).unwrap();
        let back = idler_wavelength(lp, li).unwrap();
        prop_assert!((back - ls).abs() <= 1e-12 * ls);
    }

    #[test]
    fn snell_round_trip(theta in -10.0..10.0f64, lambda in 0.5..4.0f64, t in 0.0..200.0f64) {
        let m = DispersionModel::default();
        let inside = m.internal_angle(theta, lambda, t).unwrap();
        let out = m.external_angle(inside, lambda, t).unwrap();
        prop_assert!((out - theta).abs() <= 1e-10);
    }

    #[test]
    fn sign_rules_hold_for_every_design(spec in spec_strategy(64, 100, 32)) {
        let seq = build_sequence(&spec).unwrap();
        prop_assert!(audit_signs(&seq, &spec).is_ok());
        prop_assert_eq!(seq.len(), spec.element_count());
    }

    #[test]
    fn intensity_is_bounded(spec in spec_strategy(32, 20, 8), dk in -2.0..2.0f64) {
        let total = spec.l_stack() * (spec.n_gap as f64 * (spec.m_gap as f64 + 1.0) + 1.0);
        let i = intensity(amplitude_fast(&spec, dk).unwrap(), total);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&i));
    }

    #[test]
    fn global_flip_leaves_intensity_unchanged(spec in spec_strategy(16, 10, 4), dk in -2.0..2.0f64) {
        let seq = build_sequence(&spec).unwrap();
        let a = amplitude_naive(&seq, dk);
        let b = amplitude_naive(&seq.flipped(), dk);
        prop_assert!((a + b).norm() <= 1e-12 * seq.total_length());
    }

    #[test]
    fn convolution_is_linear(
        a in prop::collection::vec(0.0..1.0f64, 64),
        b in prop::collection::vec(0.0..1.0f64, 64),
        alpha in -3.0..3.0f64,
        fwhm in 0.5..8.0f64,
    ) {
        let k = gaussian_kernel(fwhm);
        let mixed: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + y).collect();
        let lhs = convolve_1d(&mixed, &k);
        let ca = convolve_1d(&a, &k);
        let cb = convolve_1d(&b, &k);
        for i in 0..lhs.len() {
            prop_assert!((lhs[i] - (alpha * ca[i] + cb[i])).abs() <= 1e-12);
        }
    }

    #[test]
    fn correlation_ignores_affine_rescaling(
        a in prop::collection::vec(0.0..1.0f64, 32),
        scale in 0.01..100.0f64,
        shift in -10.0..10.0f64,
    ) {
        let b: Vec<f64> = a.iter().map(|x| scale * x + shift).collect();
        if let Ok(r) = pearson(&a, &a) {
            prop_assert!((r - 1.0).abs() <= 1e-12);
            prop_assert!((pearson(&a, &b).unwrap() - 1.0).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fast_path_matches_naive(spec in spec_strategy(64, 100, 32), dk in -2.0..2.0f64) {
        let seq = build_sequence(&spec).unwrap();
        let fast = amplitude_fast(&spec, dk).unwrap();
        let naive = amplitude_naive(&seq, dk);
        prop_assert!(close(fast, naive, seq.total_length()), "{fast} vs {naive}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn quadrature_matches_naive(spec in spec_strategy(4, 3, 2), dk in -2.0..2.0f64) {
        let seq = build_sequence(&spec).unwrap();
        let naive = amplitude_naive(&seq, dk);
        let q = quadrature_oracle(&seq, dk, 10_000).unwrap();
        prop_assert!((q - naive).norm() <= 1e-6 * naive.norm().max(1e-6 * seq.total_length()));
    }
}

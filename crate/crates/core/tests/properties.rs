// Copyright 2026 The dfs Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use proptest::prelude::*;

use dfs_core::cli::{fmt_sig, parse_real};
use dfs_core::liouville::{build_lt, classify_df_states, spectrum, DensityVector, DfClass};
use dfs_core::propagate::{exact_map, StateBasis};
use dfs_core::rates::bm_rates;
use dfs_core::spectral::{kernel_g_tilde, SpectralModel};

fn lorentzian() -> impl Strategy<Value = SpectralModel> {
    (0.1..5.0f64, 0.1..50.0f64, -5.0..5.0f64, -20.0..20.0f64, 0.01..3.0f64)
        .prop_map(|(g, d, e, mu, t)| SpectralModel::lorentzian(g, d, e, mu, t).unwrap())
}

fn density() -> impl Strategy<Value = DensityVector> {
    (
        proptest::array::uniform4(0.0..1.0f64),
        0.0..1.0f64,
        0.0..std::f64::consts::TAU,
    )
        .prop_filter("non-degenerate weights", |(w, _, _)| w.iter().sum::<f64>() > 1e-3)
        .prop_map(|(w, r, phase)| {
            let s: f64 = w.iter().sum();
            let p: Vec<f64> = w.iter().map(|x| x / s).collect();
            let c = Complex64::from_polar(r * (p[1] * p[2]).sqrt(), phase);
            DensityVector([
                Complex64::new(p[0], 0.0),
                Complex64::new(p[1], 0.0),
                c,
                c.conj(),
                Complex64::new(p[2], 0.0),
                Complex64::new(p[3], 0.0),
            ])
        })
}

proptest! {
    #[test]
    fn spectral_density_is_nonnegative_and_peaks_at_level(m in lorentzian(), w in -100.0..100.0f64) {
        let j = m.spectral_density(w);
        prop_assert!(j >= 0.0);
        prop_assert!(j <= m.spectral_density(m.center) + 1e-12);
        prop_assert!((m.j_at_level() - m.gamma).abs() <= 1e-12 * m.gamma);
    }

    #[test]
    fn fermi_is_monotone_and_bounded(m in lorentzian(), a in -50.0..50.0f64, b in -50.0..50.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (fl, fh) = (m.fermi(lo), m.fermi(hi));
        prop_assert!((0.0..=1.0).contains(&fl) && (0.0..=1.0).contains(&fh));
        prop_assert!(fl >= fh);
        prop_assert!((m.fermi(m.mu) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bm_rates_split_the_level_width(m in lorentzian()) {
        let (k, kt) = bm_rates(&m);
        prop_assert!(k >= 0.0 && kt >= 0.0);
        prop_assert!((k + kt - 0.5 * m.j_at_level()).abs() <= 1e-12);
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity(k in -2.0..2.0f64, kt in -2.0..2.0f64, rho in density()) {
        let l = build_lt(k, kt);
        let d = l.apply(&rho);
        prop_assert!(d.trace().norm() <= 1e-12);
        prop_assert!(d.hermiticity_error() <= 1e-12);
    }

    #[test]
    fn positive_rates_have_two_physical_modes(k in 1e-6..2.0f64, kt in 1e-6..2.0f64) {
        let s = spectrum(&build_lt(k, kt));
        prop_assert_eq!(s.physical, [true, false, false, false, false, true]);
        prop_assert!(!s.defective);
        let is_mixed = matches!(classify_df_states(&s, k, kt), DfClass::Mixed(_));
        prop_assert!(is_mixed);
    }

    #[test]
    fn exact_map_is_physical(
        rho in density(),
        mag in 0.0..1.0f64,
        phase in 0.0..std::f64::consts::TAU,
        frac in 0.0..1.0f64,
        eps in -2.0..2.0f64,
        t in 0.0..20.0f64,
    ) {
        let u = Complex64::from_polar(mag, phase);
        let v = frac * (1.0 - mag * mag);
        let out = exact_map(&rho, u, v, eps, t);
        prop_assert!((out.trace() - 1.0).norm() <= 1e-12);
        prop_assert!(out.hermiticity_error() <= 1e-12);
        prop_assert!(out.min_eigenvalue() >= -1e-12);
        prop_assert!((out.pm().norm() - mag * rho.pm().norm()).abs() <= 1e-12);
    }

    #[test]
    fn basis_change_round_trips(phi in -10.0..10.0f64, a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64) {
        let basis = StateBasis::new(phi);
        let (x, y) = (Complex64::new(a, b), Complex64::new(c, -a));
        let (p, m) = basis.from_original(x, y);
        let (x2, y2) = basis.to_original(p, m);
        prop_assert!((x - x2).norm() <= 1e-12 && (y - y2).norm() <= 1e-12);
        prop_assert!((p.norm_sqr() + m.norm_sqr() - x.norm_sqr() - y.norm_sqr()).abs() <= 1e-12);
    }

    #[test]
    fn decimal_values_parse_exactly(x in proptest::num::f64::NORMAL) {
        prop_assert_eq!(parse_real(&format!("{x:e}")), Some(x));
        prop_assert_eq!(parse_real(&fmt_sig(x, 17)), Some(x));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn filtered_kernel_is_conjugate_symmetric(tau in 0.05..5.0f64, mu in -10.0..10.0f64) {
        let m = SpectralModel::lorentzian(1.0, 10.0, 0.2, mu, 0.3).unwrap();
        let a = kernel_g_tilde(&m, tau).unwrap();
        let b = kernel_g_tilde(&m, -tau).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12);
    }
}

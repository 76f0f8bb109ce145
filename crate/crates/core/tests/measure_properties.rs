use isocap::{MeasureKind, ModelMeasure1D};
use proptest::prelude::*;

fn builtins() -> Vec<ModelMeasure1D> {
    [
        MeasureKind::Gaussian,
        MeasureKind::PExponential { p: 1.0 },
        MeasureKind::PExponential { p: 1.5 },
        MeasureKind::PExponential { p: 2.0 },
        MeasureKind::PExponential { p: 4.0 },
        MeasureKind::UniformInterval { a: -1.0, b: 1.0 },
        MeasureKind::PowerAlpha { alpha: 0.5 },
        MeasureKind::DoubleWell,
    ]
    .into_iter()
    .map(|k| ModelMeasure1D::builtin(k).unwrap())
    .collect()
}

#[test]
fn mass_defect_is_small_at_default_grid() {
    for mu in builtins() {
        assert!(mu.mass_defect() <= 1e-10, "{}: defect {:e}", mu.label(), mu.mass_defect());
    }
}

#[test]
fn log_concave_builtins_report_zero_kappa() {
    for mu in builtins() {
        match mu.kind() {
            MeasureKind::Gaussian | MeasureKind::PExponential { .. } | MeasureKind::UniformInterval { .. } => {
                assert_eq!(mu.kappa(), 0.0, "{}", mu.label())
            }
            _ => assert!(mu.kappa() > 0.0),
        }
    }
}

#[test]
fn cdf_is_monotone_with_correct_endpoints() {
    for mu in builtins() {
        let (lo, hi) = mu.support();
        assert_eq!(mu.cdf(lo), 0.0);
        assert_eq!(mu.cdf(hi), 1.0);
        let mut prev = 0.0;
        for i in 0..=400 {
            let x = lo + (hi - lo) * i as f64 / 400.0;
            let c = mu.cdf(x);
            assert!(c >= prev - 1e-15, "{} at {x}", mu.label());
            prev = c;
        }
    }
}

#[test]
fn cdf_and_sf_are_complementary() {
    for mu in builtins() {
        for x in [-0.9, -0.3, 0.0, 0.2, 0.77] {
            let s = mu.cdf(x) + mu.sf(x);
            assert!((s - 1.0).abs() < 1e-12, "{} at {x}: {s}", mu.label());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn quantile_inverts_cdf(idx in 0usize..8, u in 0.001f64..0.999) {
        let mu = &builtins()[idx];
        let (lo, hi) = mu.support();
        let x = lo + (hi - lo) * u;
        let max_rho = mu.grid().nodes.iter().map(|&y| mu.density(y)).fold(0.0, f64::max);
        prop_assume!(mu.density(x) >= 1e-7 * max_rho);
        let c = mu.cdf(x);
        let back = mu.quantile(c).unwrap();
        prop_assert!((back - x).abs() <= 1e-8, "{}: x={x} back={back}", mu.label());
    }
}

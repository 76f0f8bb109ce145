use isocap::orlicz::{orlicz_norm, weak_orlicz_norm};
use isocap::{ModelMeasure1D, NFunction};
use proptest::prelude::*;
use std::sync::OnceLock;

fn gaussian() -> &'static ModelMeasure1D {
    static MU: OnceLock<ModelMeasure1D> = OnceLock::new();
    MU.get_or_init(ModelMeasure1D::gaussian)
}

fn nfunctions() -> Vec<NFunction> {
    vec![
        NFunction::power(1.0),
        NFunction::power(2.0),
        NFunction::power(3.5),
        NFunction::phi(1.0),
        NFunction::phi(1.5),
        NFunction::phi(2.0),
    ]
}

fn probe(c: [f64; 4]) -> impl Fn(f64) -> f64 {
    move |x: f64| c[0] + c[1] * x.tanh() + c[2] * (1.3 * x).sin() + c[3] * (-x * x).exp()
}

fn coeffs() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-2.0f64..2.0)
}

#[test]
fn inverse_and_adjoint_involution_on_probe_grid() {
    let all: Vec<NFunction> = nfunctions()
        .into_iter()
        .chain([NFunction::Table { points: vec![(1e-8, 1e-16), (0.5, 0.2), (1.0, 1.0), (1e8, 1e17)] }])
        .collect();
    for n in all {
        let twice = n.adjoint_function().adjoint_function();
        let wrapped = NFunction::Adjoint { of: Box::new(NFunction::Adjoint { of: Box::new(n.clone()) }) };
        for i in 0..512 {
            let t = (1e-6f64.ln() + (1e12f64.ln()) * i as f64 / 511.0).exp();
            let v = n.eval(t);
            assert!((n.inverse(v) - t).abs() <= 1e-9 * t, "{} inverse at {t}", n.label());
            assert!((twice.eval(t) - v).abs() <= 1e-9 * v, "{} involution at {t}", n.label());
            assert!((wrapped.eval(t) - v).abs() <= 1e-9 * v, "{} wrapped involution at {t}", n.label());
        }
    }
}

#[test]
fn qmono_of_powers_matches_exponent_order() {
    for r in [1.0, 1.5, 2.0, 2.5, 3.0] {
        for q in [1.0, 1.5, 2.0, 2.5, 3.0] {
            assert_eq!(NFunction::power(r).qmono(q), r >= q);
            let table = NFunction::Table { points: vec![(1e-7, 1e-7f64.powf(r)), (1.0, 1.0), (1e7, 1e7f64.powf(r))] };
            assert_eq!(table.qmono(q), r >= q, "table r={r} q={q}");
        }
    }
}

#[test]
fn weak_norm_is_below_strong_norm_on_a_random_function() {
    let mu = gaussian();
    let f = mu.sample(probe([0.3, -1.1, 0.7, 0.4]));
    for n in nfunctions() {
        let weak = weak_orlicz_norm(mu, &f, &n).unwrap();
        let strong = orlicz_norm(mu, &f, &n).unwrap();
        assert!(weak <= strong * (1.0 + 1e-12), "{}: {weak} > {strong}", n.label());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_is_positively_homogeneous(c in coeffs(), k in 0.01f64..50.0, idx in 0usize..6) {
        let mu = gaussian();
        let n = &nfunctions()[idx];
        let f = mu.sample(probe(c));
        let a = orlicz_norm(mu, &f.scaled(k), n).unwrap();
        let b = k * orlicz_norm(mu, &f, n).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * b.max(1e-300));
    }

    #[test]
    fn triangle_inequality_for_young_functions(c1 in coeffs(), c2 in coeffs(), idx in 0usize..6) {
        let mu = gaussian();
        let n = &nfunctions()[idx];
        let f = mu.sample(probe(c1));
        let g = mu.sample(probe(c2));
        let sum = f.zip_with(&g, |a, b| a + b).unwrap();
        let lhs = orlicz_norm(mu, &sum, n).unwrap();
        let rhs = orlicz_norm(mu, &f, n).unwrap() + orlicz_norm(mu, &g, n).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn weak_quasi_triangle(c1 in coeffs(), c2 in coeffs(), idx in 0usize..6) {
        let mu = gaussian();
        let n = &nfunctions()[idx];
        let f = mu.sample(probe(c1));
        let g = mu.sample(probe(c2));
        let sum = f.zip_with(&g, |a, b| a + b).unwrap();
        let lhs = weak_orlicz_norm(mu, &sum, n).unwrap();
        let rhs = 2.0 * (weak_orlicz_norm(mu, &f, n).unwrap() + weak_orlicz_norm(mu, &g, n).unwrap());
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }
}

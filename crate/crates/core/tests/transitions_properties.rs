use isocap::measure::{MeasureKind, ModelMeasure1D};
use isocap::orlicz::NFunction;
use isocap::profile::{self, linear_grid, log_grid};
use isocap::report::{LegStatus, Verdict};
use isocap::transitions::*;

fn builtins() -> Vec<ModelMeasure1D> {
    [
        MeasureKind::Gaussian,
        MeasureKind::PExponential { p: 1.0 },
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
fn forward_constant_matches_power_closed_form_by_quadrature() {
    for q in [1.25, 1.5, 2.0, 3.0, 4.0] {
        let p: f64 = q / (q - 1.0);
        let closed = 0.25 * (p / q).powf(1.0 / p);
        let numeric = forward_constant_b_numeric(&NFunction::power(q), q).unwrap();
        assert!((numeric - closed).abs() < 1e-6, "q={q}: {numeric} vs {closed}");
        assert_eq!(forward_constant_b(&NFunction::power(q), q).unwrap(), closed);
    }
    assert!(forward_constant_b(&NFunction::power(1.0), 1.0).is_err());
}

#[test]
fn forward_constant_phi_two_is_positive() {
    let b = forward_constant_b(&NFunction::phi(2.0), 2.0).unwrap();
    assert!(b > 0.0 && b < 0.25, "{b}");
}

#[test]
fn gamma_is_continuous_at_one() {
    for q in [2.0, 3.0] {
        for eps in [1e-3, 1e-6] {
            let g = gamma_const(1.0 + eps, q).unwrap();
            assert!((g - 1.0).abs() < 20.0 * eps.powf(0.5).max(eps * 10.0), "q={q} eps={eps}: {g}");
        }
    }
    let a = gamma_const(1.0 + 1e-3, 2.0).unwrap();
    let b = gamma_const(1.0 + 1e-6, 2.0).unwrap();
    assert!((b - 1.0).abs() < (a - 1.0).abs());
}

#[test]
fn lift_of_constant_capacity_matches_closed_form() {
    let c = 0.8;
    let cap = |_s: f64| c;
    // q0 = 1, q = 2: J = (1/2) / c^2, bound = c sqrt 2
    let v = lift_capacity(1.0, 2.0, &cap, 0.0, 0.5).unwrap().value;
    assert!((v - c * 2f64.sqrt()).abs() < 1e-8, "{v}");
    // q0 = 1.5, q = 2: J = 3 (1/2)^{1/3} / c^2
    let j = 3.0 * 0.5f64.powf(1.0 / 3.0) / (c * c);
    let expect = 1.0 / (gamma_const(1.5, 2.0).unwrap() * j.sqrt());
    let v = lift_capacity(1.5, 2.0, &cap, 0.0, 0.5).unwrap().value;
    assert!((v - expect).abs() < 1e-8, "{v} vs {expect}");
}

#[test]
fn lift_is_sound_on_builtins() {
    for mu in builtins() {
        // The interval search makes non-log-concave capacities expensive.
        let ts: &[f64] = if mu.is_log_concave() { &[0.02, 0.1, 0.25, 0.4] } else { &[0.25] };
        let table = profile::Cap1Table::build(&mu, 1024).unwrap();
        for q0 in [1.0, 1.5] {
            for q in [2.0, 3.0] {
                for &t in ts {
                    let lifted = if q0 == 1.0 {
                        let cap = |s: f64| table.cap1(s.min(0.5), 0.5).unwrap_or(0.0);
                        lift_capacity(q0, q, &cap, t, 0.5).unwrap().value
                    } else {
                        let cap = |s: f64| profile::capq(&mu, q0, s.min(0.5), 0.5).unwrap_or(0.0);
                        lift_capacity(q0, q, &cap, t, 0.5).unwrap().value
                    };
                    let exact = profile::capq_profile(&mu, q, t).unwrap();
                    assert!(
                        lifted <= exact * (1.0 + 1e-6),
                        "{} q0={q0} q={q} t={t}: {lifted} > {exact}",
                        mu.label()
                    );
                }
            }
        }
    }
}

#[test]
fn bracket_contains_probe_constant_for_exact_power_profile() {
    // Uniform on [-1,1], q = 1.5, N = t^q: D2 from the exact capacity
    // profile; the probe minimum must sit inside the bracket.
    let mu = ModelMeasure1D::uniform(-1.0, 1.0).unwrap();
    let n = NFunction::power(1.5);
    let d2 = capacity_constant(&mu, &n, 1.5, &log_grid(1e-4, 0.49, 64)).unwrap();
    let bracket = cap_to_orlicz_bracket(1.5, &n, d2, BracketVariant::Strong, false).unwrap();
    let probes = isocap::probes::probe_family(&mu, 0).unwrap();
    let measured = isocap::probes::measured_orlicz_constant(&probes, &n, 1.5).unwrap();
    assert!(bracket.lower <= measured * (1.0 + 1e-9), "{bracket:?} vs {measured}");
}

#[test]
fn forward_check_passes_on_gaussian_and_uniform() {
    let grid = default_t_grid();
    for (mu, n, q) in [
        (ModelMeasure1D::gaussian(), NFunction::power(2.0), 2.0),
        (ModelMeasure1D::uniform(-1.0, 1.0).unwrap(), NFunction::power(1.5), 1.5),
    ] {
        let d = iso_constant(&mu, &n, q, &grid).unwrap();
        let r = forward_theorem_check(&mu, &n, q, d, &grid, 0).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.render_table());
        let constant = r.legs.iter().find(|l| l.name == "probe constant").unwrap();
        assert_eq!((constant.lhs, constant.rhs), (0.0, 0.0));
    }
}

#[test]
fn forward_check_flags_bad_hypothesis() {
    let mu = ModelMeasure1D::gaussian();
    let grid = default_t_grid();
    let r = forward_theorem_check(&mu, &NFunction::power(2.0), 2.0, 10.0, &grid, 0).unwrap();
    assert_eq!(r.verdict, Verdict::HypothesisFail);
}

#[test]
fn converse_is_sound_on_gaussian_and_uniform() {
    let set = ConstantSet::default();
    let ts = linear_grid(0.01, 0.5, 50);
    let grid = log_grid(1e-4, 0.49, 48);
    for mu in [ModelMeasure1D::gaussian(), ModelMeasure1D::uniform(-1.0, 1.0).unwrap()] {
        for q in [1.5, 2.0, 3.0] {
            for n in [NFunction::power(q), NFunction::phi(q.min(2.0))] {
                if !n.qmono(q) {
                    assert!(converse_iso_bound(&n, q, 1.0, 0.0, 0.1, &set).is_err());
                    continue;
                }
                let d = capacity_constant(&mu, &n, q, &grid).unwrap();
                for &t in &ts {
                    let bound = converse_iso_bound(&n, q, d, mu.kappa(), t, &set).unwrap();
                    let it = profile::iso_tilde(&mu, t).unwrap();
                    assert!(bound <= it + 1e-6, "{} {} q={q} t={t}: {bound} > {it}", mu.label(), n.label());
                }
            }
        }
    }
}

#[test]
fn converse_phi_constants_have_a_floor() {
    let grid = log_grid(1e-8, 0.5, 200);
    let vals: Vec<f64> = (11..=20)
        .map(|k| {
            let q = k as f64 / 10.0;
            converse_constant_c(&NFunction::phi(q), q, 1.0, &grid).unwrap()
        })
        .collect();
    let floor = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(floor > 0.05, "{vals:?}");
}

#[test]
fn power_n2_is_refinement_stable() {
    let n = NFunction::power(2.0);
    let coarse = converse_constant_c(&n, 2.0, 1.0, &log_grid(1e-6, 0.5, 40)).unwrap();
    let fine = converse_constant_c(&n, 2.0, 1.0, &log_grid(1e-6, 0.5, 160)).unwrap();
    assert!((coarse - fine).abs() < 1e-4);
}

#[test]
fn equivalence_cycle_gaussian() {
    let mu = ModelMeasure1D::gaussian();
    let r = equivalence_report(&mu, &NFunction::power(2.0), 2.0, &EquivalenceOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", r.render_table());
    let loss = r.environment["cycle_loss_factor"].as_f64().unwrap();
    assert!(loss >= 1.0 && loss.is_finite());
}

#[test]
fn equivalence_cycle_uniform() {
    let mu = ModelMeasure1D::uniform(-1.0, 1.0).unwrap();
    let r = equivalence_report(&mu, &NFunction::power(1.5), 1.5, &EquivalenceOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", r.render_table());
}

#[test]
fn equivalence_cycle_power_alpha_skips_converse() {
    let mu = ModelMeasure1D::builtin(MeasureKind::PowerAlpha { alpha: 0.5 }).unwrap();
    let r = equivalence_report(&mu, &NFunction::power(2.0), 2.0, &EquivalenceOptions::default()).unwrap();
    let conv = r.legs.iter().find(|l| l.name == "converse").unwrap();
    assert_eq!(conv.status, LegStatus::Skipped);
    assert!(r.environment["d2"].as_f64().unwrap() > 0.0);
}

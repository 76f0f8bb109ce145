//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use isocap::measure::{MeasureKind, ModelMeasure1D};
use isocap::orlicz::NFunction;
use isocap::profile::{self, linear_grid, log_grid};
use isocap::report::Verdict;
use isocap::semigroup::{self, CenteredConstant, SemigroupSolver, SolverParams};
use isocap::transitions::{self, ConstantSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn golden() -> serde_json::Value {
    serde_json::from_str(include_str!("golden/acceptance.json")).expect("golden file parses")
}

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

fn coarea_sandwich() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for kind in [MeasureKind::Gaussian, MeasureKind::UniformInterval { a: -1.0, b: 1.0 }] {
        let mu = ModelMeasure1D::new(kind, 2048).unwrap();
        let r = transitions::sandwich_report(&mu, &transitions::sandwich_pairs(), 2048, 0.05).unwrap();
        pass &= r.legs.len() == 50 && r.verdict == Verdict::Pass;
        worst = r.legs.iter().map(|l| l.lhs).fold(worst, f64::max);
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    outcome(pass, format!("worst relative gap {worst:.3e} (limit 5e-2), {:.2} s (limit 10 s)", elapsed.as_secs_f64()))
}

fn lifting_soundness() -> Outcome {
    let mu = ModelMeasure1D::gaussian();
    let ts: Vec<f64> = (1..=49).map(|k| k as f64 / 100.0).collect();
    let r = transitions::lift_report(&mu, 2.0, &ts).unwrap();
    let ratio = r.environment["lift_worst_ratio"].as_f64().unwrap();
    let pass = r.verdict == Verdict::Pass && r.legs.len() == 49 && ratio.is_finite();
    outcome(pass, format!("{} legs, worst exact/lifted ratio {ratio:.4}", r.legs.len()))
}

fn closed_forms() -> Outcome {
    let g = transitions::gamma_const(2.0, 4.0).unwrap();
    let mut pass = (g - 1.6119).abs() <= 1e-3;
    let mut worst: f64 = 0.0;
    for q in [1.25, 1.5, 2.0, 3.0, 4.0] {
        let p: f64 = q / (q - 1.0);
        let closed = 0.25 * (p / q).powf(1.0 / p);
        let numeric = transitions::forward_constant_b_numeric(&NFunction::power(q), q).unwrap();
        worst = worst.max((numeric - closed).abs());
    }
    pass &= worst <= 1e-6;
    outcome(pass, format!("gamma(2,4) = {g:.7}, worst |B - closed form| = {worst:.2e}"))
}

fn gradient_estimate() -> Outcome {
    let start = Instant::now();
    let params = SolverParams { nodes: 4001, dt: 1e-4, theta: 0.5 };
    let times = [0.1, 0.5, 1.0];
    let mut pass = true;
    let mut worst_violation = f64::NEG_INFINITY;

    let ou = SemigroupSolver::new(&ModelMeasure1D::gaussian(), params).unwrap();
    let dw = SemigroupSolver::new(&ModelMeasure1D::builtin(MeasureKind::DoubleWell).unwrap(), params).unwrap();
    for s in [&ou, &dw] {
        for f in [s.sample(|x| x), s.sample(|x| x.sin()), s.sample(|x| (2.0 * x).cos() + 0.3 * x)] {
            let r = semigroup::verify_gradient_estimate(s, &f, &times).unwrap();
            pass &= r.verdict == Verdict::Pass;
            worst_violation = r.legs.iter().map(|l| l.lhs - l.rhs).fold(worst_violation, f64::max);
        }
    }

    // f(x) = x on the OU semigroup: K |grad P_t f|^2 = 2t e^{-2t}, variance 1 - e^{-2t}.
    let f = ou.sample(|x| x);
    let sq = ou.sample(|x| x * x);
    let pf = ou.evolve_many(&f, &times).unwrap();
    let pf2 = ou.evolve_many(&sq, &times).unwrap();
    let mut worst_analytic: f64 = 0.0;
    for ((&t, u), u2) in times.iter().zip(&pf).zip(&pf2) {
        let k = semigroup::k_const(0.0, t);
        let g = ou.gradient(&u.value);
        let nodes = &ou.grid().nodes;
        for i in 1..nodes.len() - 1 {
            if nodes[i].abs() > 4.0 {
                continue;
            }
            let lhs = k * g[i] * g[i];
            let rhs = u2.value.values()[i] - u.value.values()[i].powi(2);
            let e = (lhs - 2.0 * t * (-2.0 * t).exp()).abs().max((rhs - (1.0 - (-2.0 * t).exp())).abs());
            worst_analytic = worst_analytic.max(e);
        }
    }
    pass &= worst_analytic <= 1e-4;
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "worst lhs - rhs {worst_violation:.2e} (tol 1e-3), OU analytic error {worst_analytic:.2e} (tol 1e-4), {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn decay_bounds() -> Outcome {
    let mu = ModelMeasure1D::gaussian();
    let s = SemigroupSolver::new(&mu, SolverParams { nodes: 2001, dt: 1e-3, theta: 0.5 }).unwrap();
    let w = 3.0 * s.spacing();
    let raw = s.sample(|x| 0.5 * (1.0 + (x / w).tanh()));
    let f = raw.shifted(raw.expectation());
    let times = [0.0, 0.1, 0.5, 1.0, 2.0];
    let grid = transitions::default_t_grid();
    let mut pass = true;
    let mut worst = f64::INFINITY;
    for (q, n) in [
        (1.5, NFunction::phi(1.5)),
        (1.5, NFunction::power(1.5)),
        (2.0, NFunction::power(2.0)),
        (3.0, NFunction::power(3.0)),
    ] {
        let d = CenteredConstant::from_capacity(&mu, &n, q, &grid).unwrap();
        let r = if q >= 2.0 {
            semigroup::verify_decay_high_q(&s, &f, q, &n, &d, &times).unwrap()
        } else {
            semigroup::verify_decay_low_q(&s, &f, q, &n, &d, &times).unwrap()
        };
        pass &= r.verdict == Verdict::Pass;
        worst = worst.min(r.worst_margin());
    }
    // q = 2: both formulas on the same data.
    let mut agree: f64 = 0.0;
    let n = NFunction::power(2.0);
    let d = CenteredConstant::from_capacity(&mu, &n, 2.0, &grid).unwrap().value();
    let l2 = f.lp_norm(2.0).powi(2);
    let dual = isocap::orlicz::dual_norm_upper(s.grid(), f.values(), &n).unwrap();
    for &t in &times {
        let hi = semigroup::decay_bound_high(l2, f.sup_abs(), dual, d, 2.0, semigroup::decay_time_integral(0.0, 2.0, t));
        let lo = semigroup::decay_bound_low(l2, f.lp_norm(1.0), dual, d, 2.0, t);
        agree = agree.max((hi - lo).abs());
    }
    pass &= agree <= 1e-9;
    outcome(pass, format!("worst margin {worst:.3e} (floor -1e-6), q = 2 formula gap {agree:.1e}"))
}

fn converse_soundness() -> Outcome {
    let set = ConstantSet::default();
    let ts = linear_grid(0.01, 0.5, 50);
    let grid = transitions::default_t_grid();
    let mut pass = true;
    let mut worst = f64::INFINITY;
    let mut legs = 0;
    for mu in [ModelMeasure1D::gaussian(), ModelMeasure1D::uniform(-1.0, 1.0).unwrap()] {
        for q in [1.5, 2.0, 3.0] {
            let n = NFunction::power(q);
            let d = transitions::capacity_constant(&mu, &n, q, &grid).unwrap();
            let r = transitions::converse_report(&mu, &n, q, d, &ts, &set).unwrap();
            pass &= r.verdict == Verdict::Pass;
            legs += r.legs.len();
            worst = worst.min(r.legs.iter().map(|l| l.margin / l.rhs).fold(f64::INFINITY, f64::min));
        }
    }
    outcome(pass, format!("{legs} legs, smallest relative margin {worst:.3e}"))
}

fn spectral_truth() -> Outcome {
    let params = SolverParams { nodes: 4001, ..Default::default() };
    let g = semigroup::spectral_gap(&SemigroupSolver::new(&ModelMeasure1D::gaussian(), params).unwrap()).unwrap();
    let u = semigroup::spectral_gap(&SemigroupSolver::new(&ModelMeasure1D::uniform(-1.0, 1.0).unwrap(), params).unwrap())
        .unwrap();
    let eg = (g.lambda1_fine - 1.0).abs();
    let eu = (u.lambda1_fine - FRAC_PI_2 * FRAC_PI_2).abs();
    outcome(
        eg <= 1e-3 && eu <= 1e-3,
        format!(
            "gaussian {:.6} (err {eg:.1e}), uniform {:.6} (err {eu:.1e}), refinement {:.1e}/{:.1e}",
            g.lambda1_fine, u.lambda1_fine, g.refinement, u.refinement
        ),
    )
}

fn semigroup_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut fails = Vec::new();
    let jensen_n = [NFunction::power(1.5), NFunction::power(2.0), NFunction::power(3.0), NFunction::phi(1.5)];
    for mu in builtins() {
        let s = SemigroupSolver::new(&mu, SolverParams { nodes: 401, dt: 1e-2, theta: 0.5 }).unwrap();
        let implicit = SemigroupSolver::new(&mu, SolverParams { nodes: 401, dt: 1e-2, theta: 1.0 }).unwrap();
        let (lo, hi) = mu.support();
        let mut draw = |solver: &SemigroupSolver| {
            let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            solver.sample(move |x| c.iter().enumerate().map(|(j, a)| a * ((j + 1) as f64 * PI * (x - lo) / (hi - lo)).cos()).sum())
        };
        let inner = |s: &SemigroupSolver, a: &[f64], b: &[f64]| {
            let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
            s.grid().integrate(&p)
        };
        for _ in 0..4 {
            let f = draw(&s);
            let g = draw(&s);
            let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.1).collect();
            let pf = s.evolve_many(&f, &times).unwrap();
            let pg = s.evolve_many(&g, &times).unwrap();
            for ((u, v), &t) in pf.iter().zip(&pg).zip(&times) {
                if (u.value.expectation() - f.expectation()).abs() > 1e-10 {
                    fails.push(format!("{} conservation t={t}", mu.label()));
                }
                let sa = inner(&s, u.value.values(), g.values()) - inner(&s, f.values(), v.value.values());
                if sa.abs() > 1e-10 {
                    fails.push(format!("{} self-adjointness t={t}", mu.label()));
                }
            }
            let energy: Vec<f64> = pf.iter().map(|u| u.value.lp_norm(2.0).powi(2)).collect();
            if !energy.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-13) + 1e-15) {
                fails.push(format!("{} monotone energy", mu.label()));
            }
            let split = s.evolve(&s.evolve(&f, 0.7).unwrap(), 1.3).unwrap();
            let whole = s.evolve(&f, 2.0).unwrap();
            let gap = split.values().iter().zip(whole.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if gap > 1e-10 {
                fails.push(format!("{} composition gap {gap:.1e}", mu.label()));
            }
            let nonneg = f.map(|v| v * v);
            for t in [0.01, 0.5, 4.0] {
                let p = s.evolve(&nonneg, t).unwrap();
                if p.values().iter().cloned().fold(f64::INFINITY, f64::min) < -1e-12 {
                    fails.push(format!("{} positivity t={t}", mu.label()));
                }
            }
            let fi = draw(&implicit);
            for t in [0.1, 1.0, 4.0] {
                let pfi = implicit.evolve(&fi, t).unwrap();
                for n in &jensen_n {
                    let lhs = pfi.map(|v| n.eval(v.abs())).expectation();
                    let rhs = implicit.evolve(&fi.map(|v| n.eval(v.abs())), t).unwrap().expectation();
                    if lhs > rhs + 1e-10 {
                        fails.push(format!("{} Jensen {} t={t}", mu.label(), n.label()));
                    }
                }
            }
        }
    }
    let pass = fails.is_empty();
    outcome(pass, if pass { "6 measures x 4 probe pairs".to_string() } else { fails.join("; ") })
}

fn counterexample() -> Outcome {
    let mut lin = Vec::new();
    let mut floor = f64::INFINITY;
    for g in [512, 2048, 4096] {
        let mu = ModelMeasure1D::new(MeasureKind::PowerAlpha { alpha: 0.5 }, g).unwrap();
        lin.push(profile::d_lin_node_search(&mu).value);
        let d2 = transitions::capacity_constant(&mu, &NFunction::power(2.0), 2.0, &transitions::default_t_grid()).unwrap();
        floor = floor.min(d2 / 4.0);
    }
    let decreasing = lin.windows(2).all(|w| w[1] < w[0]);
    let pass = decreasing && *lin.last().unwrap() < 1e-3 && floor > 0.0;
    outcome(pass, format!("D_Lin estimates {:.2e} / {:.2e} / {:.2e}, Poincare lower edge >= {floor:.4}", lin[0], lin[1], lin[2]))
}

fn phi_floor() -> Outcome {
    let grid = log_grid(1e-8, 0.5, 200);
    let vals: Vec<f64> = (11..=20)
        .map(|k| {
            let q = k as f64 / 10.0;
            transitions::converse_constant_c(&NFunction::phi(q), q, 1.0, &grid).unwrap()
        })
        .collect();
    let floor = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let recorded = golden()["phi_converse_floor"].as_f64().unwrap();
    let pass = floor > 0.0 && vals.iter().all(|&v| v >= recorded * (1.0 - 1e-9));
    outcome(pass, format!("min over q = 1.1..2.0 is {floor:.10} (recorded floor {recorded})"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("co-area sandwich", coarea_sandwich),
        ("capacity lifting soundness", lifting_soundness),
        ("gamma and B closed forms", closed_forms),
        ("reverse Poincare gradient estimate", gradient_estimate),
        ("decay bounds", decay_bounds),
        ("converse soundness", converse_soundness),
        ("spectral ground truth", spectral_truth),
        ("semigroup axioms", semigroup_axioms),
        ("power_alpha counterexample", counterexample),
        ("uniform positivity of C for phi_q", phi_floor),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {:<38} {}  {}", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

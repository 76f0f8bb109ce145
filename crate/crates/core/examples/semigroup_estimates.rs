//! The diffusion semigroup and its gradient, L1 smoothing and decay bounds.

use isocap::measure::{MeasureKind, ModelMeasure1D};
use isocap::orlicz::NFunction;
use isocap::semigroup::{self, CenteredConstant, SemigroupSolver, SolverParams};
use isocap::transitions;

fn main() -> isocap::Result<()> {
    let params = SolverParams { nodes: 2001, dt: 1e-3, theta: 0.5 };
    let times = [0.1, 0.5, 1.0];

    let dw = ModelMeasure1D::builtin(MeasureKind::DoubleWell)?;
    let s = SemigroupSolver::new(&dw, params)?;
    let r = semigroup::verify_gradient_estimate(&s, &s.sample(|x| x.sin() + 0.5 * x), &times)?;
    print!("{}", r.render_table());

    let mu = ModelMeasure1D::gaussian();
    let s = SemigroupSolver::new(&mu, params)?;
    let w = 3.0 * s.spacing();
    let sign = s.sample(|x| (x / w).tanh());
    print!("{}", semigroup::verify_dual_l1(&s, &sign, &times)?.render_table());

    let n = NFunction::power(2.0);
    let d = CenteredConstant::from_capacity(&mu, &n, 2.0, &transitions::default_t_grid())?;
    let f = sign.shifted(sign.expectation());
    let r = semigroup::verify_decay_high_q(&s, &f, 2.0, &n, &d, &[0.0, 0.5, 2.0])?;
    print!("{}", r.render_table());
    print!("{}", r.sweep_csv());
    Ok(())
}

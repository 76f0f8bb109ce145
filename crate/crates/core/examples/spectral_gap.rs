//! Spectral gaps of the weighted Laplacian and the Poincare constants they
//! give, next to the capacity bracket.

use isocap::measure::{MeasureKind, ModelMeasure1D};
use isocap::orlicz::NFunction;
use isocap::semigroup::{self, SemigroupSolver, SolverParams};
use isocap::transitions;

fn main() -> isocap::Result<()> {
    let params = SolverParams { nodes: 4001, ..Default::default() };
    for kind in [
        MeasureKind::Gaussian,
        MeasureKind::UniformInterval { a: -1.0, b: 1.0 },
        MeasureKind::PExponential { p: 1.0 },
        MeasureKind::DoubleWell,
    ] {
        let mu = ModelMeasure1D::builtin(kind)?;
        let g = semigroup::spectral_gap(&SemigroupSolver::new(&mu, params)?)?;
        let d2 = transitions::capacity_constant(&mu, &NFunction::power(2.0), 2.0, &transitions::default_t_grid())?;
        println!(
            "{:<24} lambda1 = {:.6} (refinement {:.1e})  D_Poin = {:.6}  capacity bracket [{:.4}, {:.4}]",
            mu.label(),
            g.lambda1_fine,
            g.refinement,
            g.d_poin(),
            d2 / 4.0,
            d2
        );
    }
    Ok(())
}

//! A measure whose density vanishes at the median: the linear
//! isoperimetric constant collapses under refinement while the Poincare
//! constant from capacities stays away from zero.

use isocap::measure::{MeasureKind, ModelMeasure1D};
use isocap::orlicz::NFunction;
use isocap::profile;
use isocap::transitions;

fn main() -> isocap::Result<()> {
    for grid in [512, 2048, 4096] {
        let mu = ModelMeasure1D::new(MeasureKind::PowerAlpha { alpha: 0.5 }, grid)?;
        let lin = profile::d_lin_node_search(&mu);
        let d2 = transitions::capacity_constant(&mu, &NFunction::power(2.0), 2.0, &transitions::default_t_grid())?;
        println!(
            "grid {grid:>5}: D_Lin estimate {:.3e} ({:?}), Poincare bracket [{:.4}, {:.4}]",
            lin.value,
            lin.candidate,
            d2 / 4.0,
            d2
        );
    }
    Ok(())
}

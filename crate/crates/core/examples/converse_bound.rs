//! Orlicz-Sobolev implies isoperimetry: the converse lower bound against
//! the two-sided profile.

use isocap::measure::{MeasureKind, ModelMeasure1D};
use isocap::orlicz::NFunction;
use isocap::profile::{self, linear_grid};
use isocap::transitions::{self, ConstantSet};

fn main() -> isocap::Result<()> {
    let set = ConstantSet::default();
    for kind in [MeasureKind::Gaussian, MeasureKind::DoubleWell] {
        let mu = ModelMeasure1D::builtin(kind)?;
        let n = NFunction::power(2.0);
        let d = transitions::capacity_constant(&mu, &n, 2.0, &transitions::default_t_grid())?;
        println!("{} (kappa = {}), D = {d:.6}", mu.label(), mu.kappa());
        for t in linear_grid(0.1, 0.5, 5) {
            let bound = transitions::converse_iso_bound(&n, 2.0, d, mu.kappa(), t, &set)?;
            println!("  t = {t:.1}: bound {bound:.6} <= I~ {:.6}", profile::iso_tilde(&mu, t)?);
        }
    }
    let c = transitions::converse_constants(&NFunction::power(3.0), 3.0, &set)?;
    println!("q = 3 semigroup constants: short {:.4e}, long {:.4e}, r = {}", c.short_time, c.long_time, c.r);
    Ok(())
}

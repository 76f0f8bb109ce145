//! Isoperimetry implies Orlicz-Sobolev: checks B D ||f - Mf||_N <= ||f'||_q
//! on the probe family.

use isocap::measure::ModelMeasure1D;
use isocap::orlicz::NFunction;
use isocap::transitions;

fn main() -> isocap::Result<()> {
    let mu = ModelMeasure1D::gaussian();
    let grid = transitions::default_t_grid();
    for (n, q) in [(NFunction::power(2.0), 2.0), (NFunction::phi(1.5), 1.5)] {
        let b = transitions::forward_constant_b(&n, q)?;
        let d = transitions::iso_constant(&mu, &n, q, &grid)?;
        let r = transitions::forward_theorem_check(&mu, &n, q, d, &grid, 0)?;
        println!(
            "{} q = {q}: B = {b:.6}, D_iso = {d:.6}, {} legs, worst margin {:.3e}, verdict {:?}",
            n.label(),
            r.legs.len(),
            r.worst_margin(),
            r.verdict
        );
    }
    Ok(())
}

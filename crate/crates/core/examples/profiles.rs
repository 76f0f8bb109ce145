//! Isoperimetric and capacity profiles, with the grid oracle alongside.

use isocap::measure::{MeasureKind, ModelMeasure1D};
use isocap::profile::{self, linear_grid, ProfileKind};

fn main() -> isocap::Result<()> {
    let mu = ModelMeasure1D::gaussian();
    let ts = linear_grid(0.05, 0.45, 5);
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "t", "I", "Cap_1", "Cap_2", "Cap_3");
    for &t in &ts {
        println!(
            "{t:>6.2} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            profile::iso_profile(&mu, t)?,
            profile::cap1_profile(&mu, t, 0.5)?,
            profile::capq_profile(&mu, 2.0, t)?,
            profile::capq_profile(&mu, 3.0, t)?
        );
    }

    println!("\nCap_2 sweep on the double well against the grid oracle (4096 cells):");
    let dw = ModelMeasure1D::builtin(MeasureKind::DoubleWell)?;
    let rows = profile::sweep(&dw, ProfileKind::CapQ { q: 2.0 }, &ts, 4096)?;
    print!("{}", profile::sweep_csv(&rows));
    Ok(())
}

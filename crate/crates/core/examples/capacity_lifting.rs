//! Lifting the 1-capacity profile to order q and comparing with the exact
//! q-capacity.

use isocap::measure::{MeasureKind, ModelMeasure1D};
use isocap::profile::linear_grid;
use isocap::transitions;

fn main() -> isocap::Result<()> {
    println!("gamma(2, 4) = {:.10}", transitions::gamma_const(2.0, 4.0)?);
    let ts = linear_grid(0.05, 0.45, 9);
    for kind in [MeasureKind::Gaussian, MeasureKind::DoubleWell] {
        let mu = ModelMeasure1D::builtin(kind)?;
        for q in [2.0, 3.0] {
            let r = transitions::lift_report(&mu, q, &ts)?;
            println!(
                "{:<12} q = {q}: verdict {:?}, worst exact/lifted {:.4}",
                mu.label(),
                r.verdict,
                r.environment["lift_worst_ratio"].as_f64().unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}

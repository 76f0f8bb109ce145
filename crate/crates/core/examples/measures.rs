//! Built-in model measures: support, semi-convexity and a few quantiles.

use isocap::measure::{MeasureKind, ModelMeasure1D};

fn main() -> isocap::Result<()> {
    let kinds = [
        MeasureKind::Gaussian,
        MeasureKind::PExponential { p: 1.0 },
        MeasureKind::PExponential { p: 4.0 },
        MeasureKind::UniformInterval { a: -1.0, b: 1.0 },
        MeasureKind::PowerAlpha { alpha: 0.5 },
        MeasureKind::DoubleWell,
    ];
    println!("{:<24} {:>22} {:>7} {:>10} {:>10} {:>10}", "measure", "support", "kappa", "q(0.1)", "q(0.5)", "density(0)");
    for kind in kinds {
        let mu = ModelMeasure1D::builtin(kind)?;
        let (lo, hi) = mu.support();
        println!(
            "{:<24} [{:>9.4}, {:>9.4}] {:>7} {:>10.5} {:>10.5} {:>10.5}",
            mu.label(),
            lo,
            hi,
            if mu.kappa().is_finite() { format!("{}", mu.kappa()) } else { "inf".into() },
            mu.quantile(0.1)?,
            mu.quantile(0.5)?,
            mu.density(0.0)
        );
    }
    Ok(())
}

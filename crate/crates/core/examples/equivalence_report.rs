//! The full chain isoperimetry -> capacity -> Orlicz-Sobolev ->
//! isoperimetry as a JSON report.

use isocap::measure::ModelMeasure1D;
use isocap::orlicz::NFunction;
use isocap::transitions::{self, EquivalenceOptions};

fn main() -> isocap::Result<()> {
    let mu = ModelMeasure1D::uniform(-1.0, 1.0)?;
    let r = transitions::equivalence_report(&mu, &NFunction::power(1.5), 1.5, &EquivalenceOptions::default())?;
    eprint!("{}", r.render_table());
    println!("{}", r.to_json());
    std::process::exit(r.verdict.exit_code());
}

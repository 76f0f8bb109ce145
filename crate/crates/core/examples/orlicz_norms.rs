//! Luxemburg norms, weak norms and N-function adjoints.

use isocap::measure::ModelMeasure1D;
use isocap::orlicz::{self, NFunction};

fn main() -> isocap::Result<()> {
    let mu = ModelMeasure1D::gaussian();
    let f = mu.sample(|x| x);
    for n in [NFunction::power(1.5), NFunction::power(2.0), NFunction::phi(1.5), NFunction::phi(2.0)] {
        println!(
            "{:<8} ||x||_N = {:.6}  weak = {:.6}  N^(0.1) = {:.6}  young = {}",
            n.label(),
            orlicz::orlicz_norm(&mu, &f, &n)?,
            orlicz::weak_orlicz_norm(&mu, &f, &n)?,
            n.adjoint(0.1),
            n.is_young()
        );
    }
    // The norm of an indicator of mass t is N^(t).
    let n = NFunction::phi(2.0);
    let cut = mu.upper_quantile(0.1)?;
    let chi = mu.sample(|x| if x >= cut { 1.0 } else { 0.0 });
    println!("indicator of mass 0.1 under phi_2: {:.6} vs N^(0.1) = {:.6}", orlicz::orlicz_norm(&mu, &chi, &n)?, n.adjoint(0.1));
    Ok(())
}

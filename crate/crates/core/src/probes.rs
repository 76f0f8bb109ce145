//! Test functions with analytic derivatives, sampled on a measure's grid.
//!
//! Smoothed tail indicators come close to extremal in Sobolev-type
//! inequalities, so they dominate the family; ramps and random
//! trigonometric sums cover the rest.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::measure::{GridFunction, ModelMeasure1D};
use crate::orlicz::{luxemburg, NFunction};

pub const TAIL_LEVELS: usize = 32;
pub const RANDOM_PROBES: usize = 8;
const RANDOM_MODES: usize = 6;

/// A function and its derivative on the measure's quadrature nodes.
#[derive(Debug, Clone)]
pub struct Probe {
    pub name: String,
    pub f: GridFunction,
    pub df: GridFunction,
}

impl Probe {
    fn new(mu: &ModelMeasure1D, name: String, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Self {
        Probe { name, f: mu.sample(f), df: mu.sample(df) }
    }

    /// `||f'||_{L_q}` with normalised weights.
    pub fn gradient_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.df.sup_abs();
        }
        self.df.lp_norm(q)
    }

    /// `||f - M f||_N`.
    pub fn median_deviation(&self, n: &NFunction) -> Result<f64> {
        let m = self.f.median();
        luxemburg(self.f.grid(), &self.f.shifted(m).into_values(), n)
    }

    /// `||f - E f||_N`.
    pub fn mean_deviation(&self, n: &NFunction) -> Result<f64> {
        let e = self.f.expectation();
        luxemburg(self.f.grid(), &self.f.shifted(e).into_values(), n)
    }
}

/// Smoothing width used for tail indicators on `mu`.
pub fn smoothing_width(mu: &ModelMeasure1D) -> f64 {
    let (lo, hi) = mu.support();
    0.01 * (hi - lo)
}

/// `x -> (1 + tanh((x - c) / w)) / 2`, a smoothed indicator of `[c, inf)`.
pub fn smoothed_step(mu: &ModelMeasure1D, c: f64, w: f64) -> Probe {
    Probe::new(
        mu,
        format!("tail@{c:.4}"),
        move |x| 0.5 * (1.0 + ((x - c) / w).tanh()),
        move |x| {
            let s = 1.0 / ((x - c) / w).cosh();
            0.5 * s * s / w
        },
    )
}

/// The full family: smoothed tail indicators at `TAIL_LEVELS` quantiles,
/// ramps between quantile pairs, `RANDOM_PROBES` random trigonometric sums
/// drawn from `seed`, the identity and a constant.
pub fn probe_family(mu: &ModelMeasure1D, seed: u64) -> Result<Vec<Probe>> {
    let mut out = Vec::new();
    let w = smoothing_width(mu);
    for k in 0..TAIL_LEVELS {
        let level = (k as f64 + 0.5) / TAIL_LEVELS as f64;
        let c = if level <= 0.5 { mu.quantile(level)? } else { mu.upper_quantile(1.0 - level)? };
        out.push(smoothed_step(mu, c, w));
    }
    for &(la, lb) in &[(0.05, 0.95), (0.25, 0.75), (0.4, 0.6), (0.01, 0.5), (0.5, 0.99)] {
        let a = mu.quantile(la)?;
        let b = mu.upper_quantile(1.0 - lb)?;
        out.push(Probe::new(
            mu,
            format!("ramp[{la},{lb}]"),
            move |x| ((x - a) / (b - a)).clamp(0.0, 1.0),
            move |x| if x > a && x < b { 1.0 / (b - a) } else { 0.0 },
        ));
    }
    let (lo, hi) = mu.support();
    let len = hi - lo;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in 0..RANDOM_PROBES {
        let modes: Vec<(f64, f64, f64)> = (1..=RANDOM_MODES)
            .map(|j| {
                let amp = rng.gen_range(-1.0..1.0) / j as f64;
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                (j as f64 * std::f64::consts::PI / len, amp, phase)
            })
            .collect();
        let m2 = modes.clone();
        out.push(Probe::new(
            mu,
            format!("random#{r}"),
            move |x| modes.iter().map(|(k, a, p)| a * (k * (x - lo) + p).sin()).sum(),
            move |x| m2.iter().map(|(k, a, p)| a * k * (k * (x - lo) + p).cos()).sum(),
        ));
    }
    out.push(Probe::new(mu, "identity".into(), |x| x, |_| 1.0));
    out.push(Probe::new(mu, "constant".into(), |_| 1.0, |_| 0.0));
    Ok(out)
}

/// `min ||f'||_q / ||f - M f||_N` over the non-constant probes: an upper
/// estimate of the Orlicz-Sobolev constant.
pub fn measured_orlicz_constant(probes: &[Probe], n: &NFunction, q: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for p in probes {
        let dev = p.median_deviation(n)?;
        if dev > 1e-12 {
            best = best.min(p.gradient_norm(q) / dev);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_is_seeded() {
        let mu = ModelMeasure1D::gaussian();
        let a = probe_family(&mu, 0).unwrap();
        let b = probe_family(&mu, 0).unwrap();
        let c = probe_family(&mu, 1).unwrap();
        assert_eq!(a.len(), TAIL_LEVELS + 5 + RANDOM_PROBES + 2);
        let r = TAIL_LEVELS + 5;
        assert_eq!(a[r].f.values(), b[r].f.values());
        assert_ne!(a[r].f.values(), c[r].f.values());
    }

    #[test]
    fn derivatives_match_differences() {
        let mu = ModelMeasure1D::gaussian();
        for p in probe_family(&mu, 3).unwrap().iter().filter(|p| !p.name.starts_with("ramp")) {
            let x = &mu.grid().nodes;
            let (f, df) = (p.f.values(), p.df.values());
            for i in (1..x.len() - 1).step_by(97) {
                let fd = (f[i + 1] - f[i - 1]) / (x[i + 1] - x[i - 1]);
                let scale = df[i].abs().max(1.0);
                assert!((fd - df[i]).abs() < 2e-2 * scale, "{} at {}: {fd} vs {}", p.name, x[i], df[i]);
            }
        }
    }

    #[test]
    fn gaussian_identity_ratio_is_one() {
        // ||x||_{L2} = 1 for the standard normal; the grid median is the node
        // nearest 0, which shifts the norm by sqrt(1 + m^2) - 1 ~ 1e-6
        let mu = ModelMeasure1D::gaussian();
        let probes = probe_family(&mu, 0).unwrap();
        let id = probes.iter().find(|p| p.name == "identity").unwrap();
        let dev = id.median_deviation(&NFunction::power(2.0)).unwrap();
        assert!((dev - 1.0).abs() < 2e-6, "{dev}");
        assert!((id.gradient_norm(2.0) - 1.0).abs() < 1e-12);
    }
}

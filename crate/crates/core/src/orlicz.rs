//! Orlicz-generating functions, their adjoints `N^(t) = 1/N^{-1}(1/t)`,
//! Luxemburg norms, weak quasi-norms and dual-norm bounds.
//!
//! Norms are taken with respect to the normalised weights of a grid, so a
//! constant function has norm equal to its absolute value for every `N`
//! with `N(1) = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{GridFunction, ModelMeasure1D, WeightedGrid};

const PROBE_LO: f64 = 1e-6;
const PROBE_HI: f64 = 1e6;
const PROBE_COUNT: usize = 512;

/// An increasing continuous bijection of `[0, inf)` with `N(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NFunction {
    /// `t^q`.
    Power { q: f64 },
    /// `t^q log(1 + t^q)`.
    PhiQ { q: f64 },
    /// Log-log linear interpolation through `(t, N(t))`, extended by the
    /// end slopes.
    Table { points: Vec<(f64, f64)> },
    /// `N^` for the wrapped function.
    Adjoint { of: Box<NFunction> },
}

impl NFunction {
    pub fn power(q: f64) -> Self {
        NFunction::Power { q }
    }

    pub fn phi(q: f64) -> Self {
        NFunction::PhiQ { q }
    }

    /// The adjoint `N^` as an `NFunction` in its own right.
    pub fn adjoint_function(&self) -> NFunction {
        match self {
            NFunction::Adjoint { of } => (**of).clone(),
            NFunction::Power { q } => NFunction::Power { q: 1.0 / q },
            other => NFunction::Adjoint { of: Box::new(other.clone()) },
        }
    }

    pub fn label(&self) -> String {
        match self {
            NFunction::Power { q } => format!("t^{q}"),
            NFunction::PhiQ { q } => format!("phi_{q}"),
            NFunction::Table { points } => format!("table({} points)", points.len()),
            NFunction::Adjoint { of } => format!("adjoint({})", of.label()),
        }
    }

    /// Checks parameters; called by constructors that accept user input.
    pub fn validate(&self) -> Result<()> {
        match self {
            NFunction::Power { q } | NFunction::PhiQ { q } => {
                if !(q.is_finite() && *q > 0.0) {
                    return Err(Error::InvalidParameter(format!("exponent must be positive, got {q}")));
                }
            }
            NFunction::Table { points } => {
                if points.len() < 2 {
                    return Err(Error::InvalidParameter("table needs at least 2 points".into()));
                }
                for w in points.windows(2) {
                    if !(w[0].0 > 0.0 && w[1].0 > w[0].0 && w[0].1 > 0.0 && w[1].1 > w[0].1) {
                        return Err(Error::InvalidParameter("table must be positive and strictly increasing in both coordinates".into()));
                    }
                }
            }
            NFunction::Adjoint { of } => of.validate()?,
        }
        Ok(())
    }

    /// `N(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t.is_infinite() {
            return f64::INFINITY;
        }
        match self {
            NFunction::Power { q } => t.powf(*q),
            NFunction::PhiQ { q } => {
                let u = t.powf(*q);
                u * u.ln_1p()
            }
            NFunction::Table { points } => loglog_interp(points, t, false),
            NFunction::Adjoint { of } => {
                let inv = of.inverse(1.0 / t);
                1.0 / inv
            }
        }
    }

    /// `N^{-1}(y)`.
    pub fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y.is_infinite() {
            return f64::INFINITY;
        }
        match self {
            NFunction::Power { q } => y.powf(1.0 / q),
            NFunction::PhiQ { q } => inverse_u_log1p(y).powf(1.0 / q),
            NFunction::Table { points } => loglog_interp(points, y, true),
            NFunction::Adjoint { of } => 1.0 / of.eval(1.0 / y),
        }
    }

    /// `N^(t) = 1 / N^{-1}(1/t)`, with `N^(0) = 0`.
    pub fn adjoint(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            NFunction::Power { q } => t.powf(1.0 / q),
            _ => 1.0 / self.inverse(1.0 / t),
        }
    }

    /// `N'(t)`; analytic where available, otherwise a centred difference in
    /// log scale.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            NFunction::Power { q } => {
                if t <= 0.0 {
                    if *q == 1.0 {
                        1.0
                    } else if *q > 1.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    q * t.powf(q - 1.0)
                }
            }
            NFunction::PhiQ { q } => {
                if t <= 0.0 {
                    return 0.0;
                }
                let u = t.powf(*q);
                q * u / t * (u.ln_1p() + u / (1.0 + u))
            }
            _ => {
                if t <= 0.0 {
                    return 0.0;
                }
                let h = 1e-5;
                (self.eval(t * (1.0 + h)) - self.eval(t * (1.0 - h))) / (2.0 * h * t)
            }
        }
    }

    /// Whether `N` is a Young function (convex, increasing, `N(0) = 0`).
    pub fn is_young(&self) -> bool {
        match self {
            NFunction::Power { q } => *q >= 1.0,
            NFunction::PhiQ { q } => *q >= 1.0,
            _ => {
                // Convexity through nondecreasing secant slopes on the probe grid.
                let ts = probe_grid();
                let mut prev_slope = self.eval(ts[0]) / ts[0];
                for w in ts.windows(2) {
                    let slope = (self.eval(w[1]) - self.eval(w[0])) / (w[1] - w[0]);
                    if !slope.is_finite() || slope < prev_slope * (1.0 - 1e-9) {
                        return false;
                    }
                    prev_slope = slope;
                }
                true
            }
        }
    }

    /// Whether `N(t)^{1/q} / t` is nondecreasing.
    pub fn qmono(&self, q: f64) -> bool {
        match self {
            NFunction::Power { q: r } => *r >= q,
            // Near 0 the ratio behaves like t^{2r/q - 1}, at infinity like
            // t^{r/q - 1} log^{1/q} t.
            NFunction::PhiQ { q: r } => *r >= q,
            _ => {
                let ts = probe_grid();
                let g = |t: f64| self.eval(t).ln() / q - t.ln();
                let mut prev = g(ts[0]);
                for &t in &ts[1..] {
                    let v = g(t);
                    if !v.is_finite() || v < prev - 1e-12 * (1.0 + prev.abs()) {
                        return false;
                    }
                    prev = v;
                }
                true
            }
        }
    }

    /// Complementary function `sup_t (s t - N(t))` of a Young function.
    pub fn conjugate(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if let NFunction::Power { q } = self {
            if *q > 1.0 {
                let r = q / (q - 1.0);
                return (q - 1.0) * (s / q).powf(r);
            }
            return if s <= 1.0 { 0.0 } else { f64::INFINITY };
        }
        // Solve N'(t) = s in log scale; N' is nondecreasing for Young N.
        let (mut lo, mut hi) = (-60.0_f64, 0.0_f64);
        while self.derivative(hi.exp()) < s {
            hi += 4.0;
            if hi > 700.0 {
                return f64::INFINITY;
            }
        }
        if self.derivative(lo.exp()) >= s {
            return 0.0_f64.max(s * lo.exp() - self.eval(lo.exp()));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.derivative(mid.exp()) < s {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let t = (0.5 * (lo + hi)).exp();
        (s * t - self.eval(t)).max(0.0)
    }
}

fn probe_grid() -> Vec<f64> {
    let (a, b) = (PROBE_LO.ln(), PROBE_HI.ln());
    (0..PROBE_COUNT).map(|i| (a + (b - a) * i as f64 / (PROBE_COUNT - 1) as f64).exp()).collect()
}

fn loglog_interp(points: &[(f64, f64)], x: f64, inverse: bool) -> f64 {
    let key = |p: &(f64, f64)| if inverse { (p.1.ln(), p.0.ln()) } else { (p.0.ln(), p.1.ln()) };
    let lx = x.ln();
    let n = points.len();
    let idx = points.partition_point(|p| key(p).0 < lx);
    let i = idx.clamp(1, n - 1);
    let (x0, y0) = key(&points[i - 1]);
    let (x1, y1) = key(&points[i]);
    (y0 + (y1 - y0) * (lx - x0) / (x1 - x0)).exp()
}

/// Solves `u log(1+u) = y` for `u >= 0`.
fn inverse_u_log1p(y: f64) -> f64 {
    let g = |u: f64| u * u.ln_1p();
    let mut u = if y < 1.0 { y.sqrt() } else { y / y.ln_1p().max(1e-300) };
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..200 {
        let gu = g(u) - y;
        if gu == 0.0 {
            return u;
        }
        if gu < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let d = u.ln_1p() + u / (1.0 + u);
        let mut next = u - gu / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * u.max(1e-300) };
        }
        if (next - u).abs() <= 4.0 * f64::EPSILON * next {
            return next;
        }
        u = next;
    }
    u
}

/// `N^(t)`; zero at `t = 0`, range error for non-finite results.
pub fn adjoint(n: &NFunction, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("adjoint requires t >= 0, got {t}")));
    }
    let v = n.adjoint(t);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!("N^({t}) is not finite")))
    }
}

fn normalised(grid: &WeightedGrid) -> impl Iterator<Item = f64> + '_ {
    let w = grid.total_mass();
    grid.weights.iter().map(move |x| x / w)
}

/// Luxemburg norm of `values` against the grid weights.
pub fn luxemburg(grid: &WeightedGrid, values: &[f64], n: &NFunction) -> Result<f64> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let w: Vec<f64> = normalised(grid).collect();
    let m = values.iter().zip(&w).filter(|(_, w)| **w > 0.0).fold(0.0_f64, |a, (v, _)| a.max(v.abs()));
    if m == 0.0 {
        return Ok(0.0);
    }
    if let NFunction::Power { q } = n {
        let s: f64 = values.iter().zip(&w).map(|(v, w)| w * (v.abs() / m).powf(*q)).sum();
        return Ok(m * s.powf(1.0 / q));
    }
    let phi = |v: f64| -> f64 { values.iter().zip(&w).map(|(f, w)| w * n.eval(f.abs() / v)).sum() };
    // phi(v) <= N(m/v), so phi(v_hi) <= 1.
    let mut hi = m / n.inverse(1.0);
    let mut lo = hi;
    let mut guard = 0;
    while phi(lo) <= 1.0 {
        hi = lo;
        lo *= 0.5;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Range("Luxemburg bracket failed".into()));
        }
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if phi(mid.exp()) > 1.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// `||f||_{N(mu)}`: the Luxemburg norm `inf { v > 0 : int N(|f|/v) dmu <= 1 }`.
pub fn orlicz_norm(mu: &ModelMeasure1D, f: &GridFunction, n: &NFunction) -> Result<f64> {
    check_grid(mu, f)?;
    luxemburg(f.grid(), f.values(), n)
}

fn check_grid(mu: &ModelMeasure1D, f: &GridFunction) -> Result<()> {
    if std::sync::Arc::ptr_eq(mu.grid(), f.grid()) || **mu.grid() == **f.grid() {
        Ok(())
    } else {
        Err(Error::DomainMismatch)
    }
}

/// `sup_t N^(mu{|f| >= t}) t` over the distinct levels of `|f|` and the
/// midpoints between them.
pub fn weak_norm(grid: &WeightedGrid, values: &[f64], n: &NFunction) -> f64 {
    let w: Vec<f64> = normalised(grid).collect();
    let mut pairs: Vec<(f64, f64)> = values.iter().zip(&w).filter(|(_, w)| **w > 0.0).map(|(v, w)| (v.abs(), *w)).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0_f64;
    let mut mass = 0.0_f64;
    let mut higher: Option<f64> = None;
    let mut i = 0;
    while i < pairs.len() {
        let level = pairs[i].0;
        if level == 0.0 {
            break;
        }
        if let Some(h) = higher {
            // On (level, h] the superlevel mass is the mass accumulated so far.
            best = best.max(n.adjoint(mass.min(1.0)) * 0.5 * (level + h));
        }
        while i < pairs.len() && pairs[i].0 == level {
            mass += pairs[i].1;
            i += 1;
        }
        best = best.max(n.adjoint(mass.min(1.0)) * level);
        higher = Some(level);
    }
    best
}

/// Weak quasi-norm `||f||_{N(mu),inf}`.
pub fn weak_orlicz_norm(mu: &ModelMeasure1D, f: &GridFunction, n: &NFunction) -> Result<f64> {
    check_grid(mu, f)?;
    Ok(weak_norm(f.grid(), f.values(), n))
}

/// Dual norm of an indicator of mass `a`: `a N^{-1}(1/a) = a / N^(a)`.
pub fn dual_norm_indicator(a_mass: f64, n: &NFunction) -> Result<f64> {
    if !(a_mass > 0.0 && a_mass <= 1.0) {
        return Err(Error::InvalidParameter(format!("indicator mass must lie in (0, 1], got {a_mass}")));
    }
    if !n.is_young() {
        return Err(Error::Hypothesis(format!("{} is not a Young function", n.label())));
    }
    Ok(a_mass / n.adjoint(a_mass))
}

/// `||f - M f||_N / ||f - E f||_N`; lies in `[1/2, 3]` for Young `N`.
pub fn recentering_ratio(mu: &ModelMeasure1D, f: &GridFunction, n: &NFunction) -> Result<f64> {
    check_grid(mu, f)?;
    if !n.is_young() {
        return Err(Error::Hypothesis(format!("{} is not a Young function", n.label())));
    }
    let e = f.expectation();
    let m = f.median();
    let centred = luxemburg(f.grid(), &f.shifted(e).into_values(), n)?;
    if centred <= 1e-300 {
        return Err(Error::Degenerate("function is constant on the grid".into()));
    }
    let med = luxemburg(f.grid(), &f.shifted(m).into_values(), n)?;
    Ok(med / centred)
}

/// Upper bound for the dual norm `sup { int f g : ||g||_N <= 1 }`.
///
/// Exact for powers; otherwise the minimum of the Young-inequality bound
/// `inf_k (1 + int N*(k|f|)) / k` and, for two-valued centred functions,
/// the indicator bound `2m(1-m) / N^(min(m, 1-m))` scaled by the jump.
pub fn dual_norm_upper(grid: &WeightedGrid, values: &[f64], n: &NFunction) -> Result<f64> {
    if !n.is_young() {
        return Err(Error::Hypothesis(format!("{} is not a Young function", n.label())));
    }
    let w: Vec<f64> = normalised(grid).collect();
    if let NFunction::Power { q } = n {
        if *q == 1.0 {
            return Ok(values.iter().zip(&w).filter(|(_, w)| **w > 0.0).fold(0.0, |a, (v, _)| a.max(v.abs())));
        }
        let r = q / (q - 1.0);
        let s: f64 = values.iter().zip(&w).map(|(v, w)| w * v.abs().powf(r)).sum();
        return Ok(s.powf(1.0 / r));
    }
    let mut best = amemiya_bound(&w, values, n);
    if let Some(b) = two_level_bound(&w, values, n) {
        best = best.min(b);
    }
    Ok(best)
}

fn amemiya_bound(w: &[f64], values: &[f64], n: &NFunction) -> f64 {
    let m = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let cost = |lk: f64| -> f64 {
        let k = lk.exp();
        let s: f64 = values.iter().zip(w).map(|(v, w)| w * n.conjugate(k * v.abs())).sum();
        (1.0 + s) / k
    };
    // Scan then golden-section refine in log k; the objective is convex in k.
    let centre = -(m.ln());
    let mut best = (f64::INFINITY, centre);
    for i in -40..=40 {
        let lk = centre + 0.5 * i as f64;
        let c = cost(lk);
        if c < best.0 {
            best = (c, lk);
        }
    }
    let (mut a, mut b) = (best.1 - 0.5, best.1 + 0.5);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if cost(x1) < cost(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    best.0.min(cost(0.5 * (a + b)))
}

fn two_level_bound(w: &[f64], values: &[f64], n: &NFunction) -> Option<f64> {
    let mut levels: Vec<f64> = Vec::new();
    for (&v, &wi) in values.iter().zip(w) {
        if wi == 0.0 {
            continue;
        }
        if !levels.iter().any(|l| (l - v).abs() <= 1e-14 * (1.0 + v.abs())) {
            levels.push(v);
            if levels.len() > 2 {
                return None;
            }
        }
    }
    if levels.len() != 2 {
        return None;
    }
    let (lo, hi) = (levels[0].min(levels[1]), levels[0].max(levels[1]));
    let m: f64 = values.iter().zip(w).filter(|(v, _)| (**v - hi).abs() <= 1e-14 * (1.0 + hi.abs())).map(|(_, w)| w).sum();
    let mean = lo + (hi - lo) * m;
    if (mean).abs() > 1e-10 * (hi - lo) {
        return None;
    }
    let small = m.min(1.0 - m);
    Some((hi - lo) * 2.0 * m * (1.0 - m) / n.adjoint(small))
}

//! Transfers between isoperimetric, capacitary and Orlicz-Sobolev
//! inequalities, with explicit constants in both directions.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::ModelMeasure1D;
use crate::orlicz::NFunction;
use crate::probes::{self, Probe};
use crate::profile::{self, check_t_grid};
use crate::quadrature::{self, Tolerance};
use crate::report::{Leg, VerificationReport};

/// Names of the inequality constants tracked by the crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "constant", rename_all = "snake_case")]
pub enum ConstantName {
    DLin,
    DGau,
    DExpQ { q: f64 },
    DPoin,
    DLsQ { q: f64 },
    DOrlicz { n: String, q: f64 },
    BForward { n: String, q: f64 },
    CConverse { n: String, q: f64 },
}

impl fmt::Display for ConstantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstantName::DLin => f.write_str("D_Lin"),
            ConstantName::DGau => f.write_str("D_Gau"),
            ConstantName::DExpQ { q } => write!(f, "D_Exp_{q}"),
            ConstantName::DPoin => f.write_str("D_Poin"),
            ConstantName::DLsQ { q } => write!(f, "D_LS_{q}"),
            ConstantName::DOrlicz { n, q } => write!(f, "D({n}, q={q})"),
            ConstantName::BForward { n, q } => write!(f, "B({n}, q={q})"),
            ConstantName::CConverse { n, q } => write!(f, "C({n}, q={q})"),
        }
    }
}

/// A bracket `[lower, upper]` for an inequality constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityConstant {
    pub name: ConstantName,
    pub lower: f64,
    /// May be `+inf`.
    pub upper: f64,
    pub provenance: String,
}

impl InequalityConstant {
    pub fn new(name: ConstantName, lower: f64, upper: f64, provenance: impl Into<String>) -> Result<Self> {
        if !(lower >= 0.0 && lower <= upper) {
            return Err(Error::InvalidParameter(format!("bracket [{lower}, {upper}] is not ordered")));
        }
        Ok(InequalityConstant { name, lower, upper, provenance: provenance.into() })
    }

    pub fn contains(&self, x: f64, rel_tol: f64) -> bool {
        x >= self.lower * (1.0 - rel_tol) && x <= self.upper * (1.0 + rel_tol)
    }
}

/// Conjugate exponent `q / (q - 1)`; `+inf` at `q = 1`.
pub fn conjugate_exponent(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else {
        q / (q - 1.0)
    }
}

/// `gamma = (p0/p - 1)^{1/p0} / (1 - p/p0)^{1/p}` with `p, p0` conjugate
/// to `q, q0`; `1` when `q0 = 1`.
pub fn gamma_const(q0: f64, q: f64) -> Result<f64> {
    if !(q0 >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 1 <= q0 < q < inf, got q0={q0}, q={q}")));
    }
    if q0 >= q {
        return Err(Error::InvalidParameter(format!(
            "q0 = {q0} >= q = {q}: the lifting degenerates, use the identity transfer"
        )));
    }
    if q0 == 1.0 {
        return Ok(1.0);
    }
    let p = conjugate_exponent(q);
    let p0 = conjugate_exponent(q0);
    Ok((p0 / p - 1.0).powf(1.0 / p0) / (1.0 - p / p0).powf(1.0 / p))
}

/// Lower bound for `Cap_q(a, b)` produced by [`lift_capacity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftedCapacity {
    pub value: f64,
    /// Set when the input capacity vanished somewhere in `(a, b)` and the
    /// bound collapsed to zero.
    pub degenerate: bool,
}

/// Lifts a `q0`-capacity profile `s -> Cap_{q0}(s, b)` to a lower bound for
/// `Cap_q(a, b)`:
/// `1 / Cap_q(a, b) <= gamma (int_a^b ds / ((s - a)^{p/p0} Cap_{q0}(s, b)^p))^{1/p}`.
///
/// The endpoint singularity is removed by `s = a + u^k`, `k = p0 / (p0 - p)`,
/// which turns the integrand into `k / Cap_{q0}(a + u^k, b)^p`.
pub fn lift_capacity(q0: f64, q: f64, cap_q0: &(dyn Fn(f64) -> f64 + Sync), a: f64, b: f64) -> Result<LiftedCapacity> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::InvalidParameter(format!("lifting needs 0 <= a < b <= 1, got ({a}, {b})")));
    }
    if q0 == q {
        let value = cap_q0(a);
        return Ok(LiftedCapacity { value, degenerate: value == 0.0 });
    }
    let gamma = gamma_const(q0, q)?;
    let p = conjugate_exponent(q);
    let k = if q0 == 1.0 {
        1.0
    } else {
        let p0 = conjugate_exponent(q0);
        p0 / (p0 - p)
    };
    let upper = (b - a).powf(1.0 / k);
    let mut vanished = false;
    let integrand = |u: f64| {
        let c = cap_q0(a + u.powf(k));
        if c <= 0.0 {
            return f64::INFINITY;
        }
        k / c.powf(p)
    };
    // Probe for zeros first: the quadrature would otherwise return inf/NaN.
    for i in 0..=64 {
        let s = a + (b - a) * i as f64 / 64.0;
        if cap_q0(s) <= 0.0 && s < b {
            vanished = true;
            break;
        }
    }
    if vanished {
        return Ok(LiftedCapacity { value: 0.0, degenerate: true });
    }
    let j = quadrature::adaptive(integrand, 0.0, upper, Tolerance { rel: 1e-9, abs: 0.0, max_intervals: 4000 });
    if !j.value.is_finite() {
        return Ok(LiftedCapacity { value: 0.0, degenerate: true });
    }
    Ok(LiftedCapacity { value: 1.0 / (gamma * j.value.powf(1.0 / p)), degenerate: false })
}

/// Which capacity-to-Orlicz transfer is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketVariant {
    /// Strong Luxemburg norm; needs `N(t)^{1/q} / t` non-decreasing.
    Strong,
    /// Weak quasi-norm.
    Weak,
}

/// `D1 in [D2 / 4, D2]` for the Orlicz-Sobolev constant `D1` given the
/// capacitary constant `D2` in `Cap_q(t, 1/2) >= D2 N^(t)`.
///
/// With `improve_q1` and `q = 1` the lower edge is `D2` itself.
pub fn cap_to_orlicz_bracket(
    q: f64,
    n: &NFunction,
    d2: f64,
    variant: BracketVariant,
    improve_q1: bool,
) -> Result<InequalityConstant> {
    if !(d2 >= 0.0 && d2.is_finite()) {
        return Err(Error::InvalidParameter(format!("capacitary constant must be finite and >= 0, got {d2}")));
    }
    if variant == BracketVariant::Strong && !n.qmono(q) {
        return Err(Error::Hypothesis(format!("{}^(1/{q}) / t is not non-decreasing", n.label())));
    }
    let lower = if improve_q1 && q == 1.0 { d2 } else { d2 / 4.0 };
    let provenance = format!(
        "capacity-to-Orlicz transfer ({}), D2 = {d2:.6e}{}",
        match variant {
            BracketVariant::Strong => "strong norm",
            BracketVariant::Weak => "weak norm",
        },
        if improve_q1 && q == 1.0 { ", q = 1 sharpening" } else { "" }
    );
    InequalityConstant::new(ConstantName::DOrlicz { n: n.label(), q }, lower, d2, provenance)
}

/// `Cap_q(t, 1/2) >= D N^(t)` from an Orlicz-Sobolev constant `D`.
pub fn orlicz_to_cap(n: &NFunction, d: f64, t: f64) -> f64 {
    d * n.adjoint(t)
}

/// `Cap_q(t, 1/2) >= D2 N^(t)`: the best `D2` over `t_grid`.
pub fn capacity_constant(mu: &ModelMeasure1D, n: &NFunction, q: f64, t_grid: &[f64]) -> Result<f64> {
    check_t_grid(t_grid)?;
    let v: Vec<f64> = t_grid
        .par_iter()
        .filter(|&&t| t < 0.5)
        .map(|&t| profile::capq_profile(mu, q, t).map(|c| c / n.adjoint(t)))
        .collect::<Result<_>>()?;
    Ok(v.into_iter().fold(f64::INFINITY, f64::min))
}

/// `I~(t) >= D t^{1-1/q} N^(t)`: the best `D` over `t_grid`.
pub fn iso_constant(mu: &ModelMeasure1D, n: &NFunction, q: f64, t_grid: &[f64]) -> Result<f64> {
    check_t_grid(t_grid)?;
    let v: Vec<f64> = t_grid
        .par_iter()
        .map(|&t| profile::iso_tilde(mu, t).map(|i| i / iso_shape(n, q, t)))
        .collect::<Result<_>>()?;
    Ok(v.into_iter().fold(f64::INFINITY, f64::min))
}

/// `t^{1-1/q} N^(t)`.
pub fn iso_shape(n: &NFunction, q: f64, t: f64) -> f64 {
    t.powf(1.0 - 1.0 / q) * n.adjoint(t)
}

/// Default t-grid for constant extraction: log-spaced in `[1e-6, 1/2]`.
pub fn default_t_grid() -> Vec<f64> {
    profile::log_grid(1e-6, 0.5, 96)
}

const B_GRID: usize = 400;
const B_LOG_T_MIN: f64 = -690.0;

/// `sup_{0<t<1/2} int_t^{1/2} (N^(t) / N^(s))^p ds / s`, integrated in
/// `log s` on a log-spaced t-grid reaching `e^{-690}`.
fn forward_inner_sup(n: &NFunction, p: f64) -> Result<(f64, f64)> {
    let lmax = 0.5f64.ln();
    let log_adj = |v: f64| n.adjoint(v.exp()).ln();
    let inner = |lt: f64| -> f64 {
        let at = log_adj(lt);
        let g = |v: f64| (p * (at - log_adj(v))).exp();
        quadrature::adaptive(g, lt, lmax, Tolerance { rel: 1e-12, abs: 0.0, max_intervals: 4000 }).value
    };
    let grid: Vec<f64> = (0..B_GRID).map(|i| B_LOG_T_MIN + (lmax - B_LOG_T_MIN) * i as f64 / B_GRID as f64).collect();
    let vals: Vec<f64> = grid.par_iter().map(|&lt| inner(lt)).collect();
    let (imax, &vmax) = vals
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
    if !vmax.is_finite() {
        return Err(Error::Divergent("forward inner integral diverges".into()));
    }
    if imax == 0 {
        // The supremum is approached as t -> 0; report the value at the grid end.
        return Ok((vmax, grid[0].exp()));
    }
    // Golden-section refinement around an interior maximiser.
    let (mut lo, mut hi) = (grid[imax - 1], grid[(imax + 1).min(B_GRID - 1)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut best = (vmax, grid[imax]);
    for _ in 0..60 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        let (f1, f2) = (inner(x1), inner(x2));
        if f1 > best.0 {
            best = (f1, x1);
        }
        if f2 > best.0 {
            best = (f2, x2);
        }
        if f1 > f2 {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    Ok((best.0, best.1.exp()))
}

/// `B_{N,q} = (1/4) inf_{0<t<1/2} (int_t^{1/2} N^(t)^p ds / (s N^(s)^p))^{-1/p}`.
///
/// For `N(t) = t^q` this is `(1/4) (p/q)^{1/p}`. When the infimum is only
/// approached as `t -> 0` the value at `t = e^{-690}` is returned; for
/// logarithmic `N` the convergence in `t` is slow.
pub fn forward_constant_b(n: &NFunction, q: f64) -> Result<f64> {
    if q == 1.0 {
        return Err(Error::InvalidParameter("the forward constant needs q > 1".into()));
    }
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must lie in (1, inf), got {q}")));
    }
    if !n.qmono(q) {
        return Err(Error::Hypothesis(format!("{}^(1/{q}) / t is not non-decreasing", n.label())));
    }
    let p = conjugate_exponent(q);
    if let NFunction::Power { q: r } = n {
        if (r - q).abs() < 1e-15 {
            return Ok(0.25 * (p / q).powf(1.0 / p));
        }
    }
    let (sup, _) = forward_inner_sup(n, p)?;
    if sup <= 0.0 {
        return Err(Error::Divergent("forward inner integral vanished".into()));
    }
    Ok(0.25 / sup.powf(1.0 / p))
}

/// Same as [`forward_constant_b`] but always by quadrature; exposes the
/// numerical path for the closed-form cross-check.
pub fn forward_constant_b_numeric(n: &NFunction, q: f64) -> Result<f64> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must lie in (1, inf), got {q}")));
    }
    let p = conjugate_exponent(q);
    let (sup, _) = forward_inner_sup(n, p)?;
    Ok(0.25 / sup.powf(1.0 / p))
}

const FORWARD_REF: &str = "isoperimetry implies Orlicz-Sobolev: B D ||f - Mf||_N <= ||f'||_q";

/// Checks `B D_iso ||f - M f||_N <= ||f'||_q` on the probe family.
///
/// `d_iso` must satisfy `I~(t) >= d_iso t^{1-1/q} N^(t)` on `t_grid`; a
/// violation, or `N` failing the monotonicity hypothesis, marks the report
/// as a hypothesis failure.
pub fn forward_theorem_check(
    mu: &ModelMeasure1D,
    n: &NFunction,
    q: f64,
    d_iso: f64,
    t_grid: &[f64],
    seed: u64,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(format!("forward theorem on {} with {}, q = {q}", mu.label(), n.label()));
    report.env("measure", mu.label());
    report.env("nfunc", n.label());
    report.env("q", q);
    report.env("grid", mu.grid_size());
    report.env("seed", seed);
    if !n.qmono(q) {
        report.push(Leg::hypothesis_fail("qmono", FORWARD_REF, format!("{} fails the q-monotonicity hypothesis", n.label())));
        return Ok(report);
    }
    let measured = iso_constant(mu, n, q, t_grid)?;
    report.env("d_iso", d_iso);
    report.env("d_iso_measured", measured);
    if d_iso > measured * (1.0 + 1e-12) {
        report.push(Leg::hypothesis_fail(
            "d_iso",
            FORWARD_REF,
            format!("supplied D = {d_iso:.6e} exceeds the grid minimum {measured:.6e}"),
        ));
        return Ok(report);
    }
    let b = forward_constant_b(n, q)?;
    report.env("b", b);
    let probes = probes::probe_family(mu, seed)?;
    let legs: Vec<Leg> = probes
        .par_iter()
        .map(|p: &Probe| -> Result<Leg> {
            let lhs = b * d_iso * p.median_deviation(n)?;
            let rhs = p.gradient_norm(q);
            Ok(Leg::check(format!("probe {}", p.name), FORWARD_REF, lhs, rhs, 1e-9 * rhs.max(1e-12)))
        })
        .collect::<Result<_>>()?;
    for leg in legs {
        report.push(leg);
    }
    Ok(report)
}

/// `N0^` extends `N^` beyond `1/2` by `N^(1/2) (2t)^{1/q}`.
fn n0_adjoint(n: &NFunction, q: f64, t: f64) -> f64 {
    if t <= 0.5 {
        n.adjoint(t)
    } else {
        n.adjoint(0.5) * (2.0 * t).powf(1.0 / q)
    }
}

/// `N2^(t)` on an increasing grid inside `(0, 1/2]`, by cumulative
/// quadrature of `int_t^inf ds / (s^{2/q*} N0^(s)^2)` in `log s`.
pub fn n2_adjoint_on_grid(n: &NFunction, q: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    check_t_grid(t_grid)?;
    let qs = conjugate_exponent(q);
    let two_over_qs = if qs.is_infinite() { 0.0 } else { 2.0 / qs };
    let k = n0_adjoint(n, q, 0.5) / 0.5f64.powf(1.0 / q);
    // Tail beyond 1/2: int_{1/2}^inf s^{-2} ds / k^2 = 2 / k^2.
    let tail = 2.0 / (k * k);
    if !tail.is_finite() {
        return Err(Error::Divergent("N2 tail integral diverges".into()));
    }
    let g = |v: f64| {
        let s = v.exp();
        let a = n0_adjoint(n, q, s);
        s.powf(1.0 - two_over_qs) / (a * a)
    };
    let mut knots: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
    knots.push(0.5f64.ln());
    let pieces: Vec<f64> = knots
        .par_windows(2)
        .map(|w| if w[1] > w[0] { quadrature::adaptive(g, w[0], w[1], Tolerance::rel(1e-12)).value } else { 0.0 })
        .collect();
    let mut out = vec![0.0; t_grid.len()];
    let mut acc = tail;
    for i in (0..t_grid.len()).rev() {
        acc += pieces[i];
        out[i] = 1.0 / acc.sqrt();
    }
    Ok(out)
}

/// `C_{N,q} = min(c2, N2^(1/2)) inf_t t^{1/q - 1/2} N2^(t) / N^(t)` for
/// `q in (1, 2]`, the infimum taken over `t_grid` (at least two points).
pub fn converse_constant_c(n: &NFunction, q: f64, c2: f64, t_grid: &[f64]) -> Result<f64> {
    if !(q > 1.0 && q <= 2.0) {
        return Err(Error::InvalidParameter(format!("the capacity constant needs q in (1, 2], got {q}")));
    }
    if t_grid.len() < 2 {
        return Err(Error::Config("t-grid needs at least two points".into()));
    }
    if !n.is_young() {
        return Err(Error::Hypothesis(format!("{} is not a Young function", n.label())));
    }
    if !n.qmono(q) {
        return Err(Error::Hypothesis(format!("{}^(1/{q}) / t is not non-decreasing", n.label())));
    }
    let n2 = n2_adjoint_on_grid(n, q, t_grid)?;
    let n2_half = n2_adjoint_on_grid(n, q, &[0.5])?[0];
    let inf = t_grid
        .iter()
        .zip(&n2)
        .map(|(&t, &v)| t.powf(1.0 / q - 0.5) * v / n.adjoint(t))
        .fold(f64::INFINITY, f64::min);
    Ok(c2.min(n2_half) * inf)
}

/// How the converse constant is produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum ConverseRoute {
    /// Constants obtained by replaying the semigroup argument with every
    /// step made explicit. Valid for all `q > 1`.
    Semigroup,
    /// `C_{N,q}` with the unquantified constant `c2` supplied by the user
    /// (`q <= 2` only).
    Capacity { c2: f64 },
}

/// Numeric constants for the converse direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantSet {
    pub converse: ConverseRoute,
}

impl Default for ConstantSet {
    fn default() -> Self {
        ConstantSet { converse: ConverseRoute::Semigroup }
    }
}

impl ConstantSet {
    pub fn label(&self) -> String {
        match self.converse {
            ConverseRoute::Semigroup => "semigroup replay".into(),
            ConverseRoute::Capacity { c2 } => format!("capacity route, c2 = {c2}"),
        }
    }
}

/// The two constants of the converse bound
/// `I~(t) >= min(c_short D, c_long D^r / kappa^{(r-1)/2}) t^{1-1/q} N^(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConverseConstants {
    /// Constant of the branch where the optimal time fits below `1/(2 kappa)`.
    pub short_time: f64,
    /// Constant of the branch capped at `t = 1/(2 kappa)`.
    pub long_time: f64,
    pub r: f64,
}

impl ConverseConstants {
    /// The single constant `C` of the form `C min(D, D^r / kappa^{(r-1)/2})`.
    pub fn combined(&self) -> f64 {
        self.short_time.min(self.long_time)
    }
}

/// Semigroup-replay constants for `q >= 2` (`r = q`).
///
/// The Orlicz-Sobolev constant `D` is for median centring; passing to mean
/// centring costs a factor 2.
fn semigroup_constants_high(n: &NFunction, q: f64) -> ConverseConstants {
    let gmax = (1.0 + (q - 1.0) * 2f64.powf(q / 2.0)).powf(1.0 / (q - 1.0));
    let g1 = 1.0 - 1.0 / gmax;
    let a1 = g1 / (q.powf(1.0 / q) * 2f64.powf(3.0 - 3.0 / q));
    // Concavity of L -> 1 - (1 + (q-1) L)^{-1/(q-1)} on [0, 2^{q/2}].
    let slope = g1 / 2f64.powf(q / 2.0);
    let a2 = slope * 2f64.sqrt() * 2f64.powf(2.0 - 2.0 * q) * 2f64.powf(1.0 - 1.0 / q) / q;
    ConverseConstants {
        short_time: a1 / 2.0,
        long_time: a2 * n.adjoint(0.5).powf(q - 1.0) / 2f64.powf(q),
        r: q,
    }
}

/// Semigroup-replay constants for `q in (1, 2]` (`r = 2`).
fn semigroup_constants_low(n: &NFunction, q: f64) -> ConverseConstants {
    let beta = q * (q - 1.0) / 2.0;
    let g = 1.0 - 3f64.powf(-beta);
    let a1 = g / (q * 2f64.powf(1.0 / (q - 1.0)) * 2f64.powf(2.0 - 1.0 / q));
    let a2 = g * 2f64.powf(1.0 / q) / (2.0 * 2f64.sqrt() * q * 2f64.powf(2.0 / (q - 1.0)));
    ConverseConstants { short_time: a1 / 2.0, long_time: a2 * n.adjoint(0.5) / 4.0, r: 2.0 }
}

/// Constants for the converse bound under `set`.
pub fn converse_constants(n: &NFunction, q: f64, set: &ConstantSet) -> Result<ConverseConstants> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("the converse bound needs q in (1, inf), got {q}")));
    }
    if !n.is_young() {
        return Err(Error::Hypothesis(format!("{} is not a Young function", n.label())));
    }
    if !n.qmono(q) {
        return Err(Error::Hypothesis(format!("{}^(1/{q}) / t is not non-decreasing", n.label())));
    }
    match set.converse {
        ConverseRoute::Capacity { c2 } => {
            let c = converse_constant_c(n, q, c2, &default_t_grid())?;
            Ok(ConverseConstants { short_time: c, long_time: c, r: 2.0 })
        }
        ConverseRoute::Semigroup => Ok(if q > 2.0 {
            semigroup_constants_high(n, q)
        } else if q < 2.0 {
            semigroup_constants_low(n, q)
        } else {
            let (h, l) = (semigroup_constants_high(n, q), semigroup_constants_low(n, q));
            ConverseConstants {
                short_time: h.short_time.max(l.short_time),
                long_time: h.long_time.max(l.long_time),
                r: 2.0,
            }
        }),
    }
}

/// Right-hand side of the converse bound
/// `I~(t) >= min(c_short D, c_long D^r / kappa^{(r-1)/2}) t^{1-1/q} N^(t)`,
/// `r = max(q, 2)`. At `kappa = 0` only the first branch is present.
pub fn converse_iso_bound(n: &NFunction, q: f64, d: f64, kappa: f64, t: f64, set: &ConstantSet) -> Result<f64> {
    if !(t > 0.0 && t <= 0.5) {
        return Err(Error::InvalidParameter(format!("t must lie in (0, 1/2], got {t}")));
    }
    if !(kappa >= 0.0) || kappa.is_infinite() {
        return Err(Error::Hypothesis(format!("the converse bound needs a finite semi-convexity constant, got {kappa}")));
    }
    let c = converse_constants(n, q, set)?;
    let short = c.short_time * d;
    let scale = if kappa == 0.0 {
        short
    } else {
        short.min(c.long_time * d.powf(c.r) / kappa.powf((c.r - 1.0) / 2.0))
    };
    Ok(scale * iso_shape(n, q, t))
}

/// Options for [`equivalence_report`].
#[derive(Debug, Clone)]
pub struct EquivalenceOptions {
    pub t_grid: Vec<f64>,
    pub seed: u64,
    pub constants: ConstantSet,
}

impl Default for EquivalenceOptions {
    fn default() -> Self {
        EquivalenceOptions { t_grid: profile::linear_grid(0.01, 0.49, 25), seed: 0, constants: ConstantSet::default() }
    }
}

const CAP1_TABLE_POINTS: usize = 1024;

pub const REF_COAREA: &str = "co-area: Cap_1(t, 1/2) <= I(t)";
pub const REF_LIFT: &str = "capacity lifting: lifted bound <= Cap_q(t, 1/2)";
pub const REF_BRACKET: &str = "capacity to Orlicz-Sobolev: D2/4 <= D1";
pub const REF_FORWARD: &str = FORWARD_REF;
pub const REF_CONVERSE: &str = "Orlicz-Sobolev implies isoperimetry: converse bound <= I~(t)";

pub const REF_SANDWICH: &str = "co-area sandwich: grid Cap_1(a, b) = inf over [a, b] of I";

/// `(a, b)` pairs for the sandwich check: ten values of `a` in
/// `[0.02, 0.45]`, each with five `b` spread over `[a, 0.95]`.
pub fn sandwich_pairs() -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(50);
    for a in profile::linear_grid(0.02, 0.45, 10) {
        for k in 0..5 {
            out.push((a, a + k as f64 * (0.95 - a) / 4.0));
        }
    }
    out
}

/// Relative gap between the grid-variational `Cap_1(a, b)` on `cells`
/// cells and `inf_{[a, b]} I`, sampled at 257 points; each leg passes when
/// the gap is at most `rel_tol`.
pub fn sandwich_report(mu: &ModelMeasure1D, pairs: &[(f64, f64)], cells: usize, rel_tol: f64) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(format!("co-area sandwich on {}", mu.label()));
    report.env("measure", mu.label());
    report.env("cells", cells);
    let legs: Vec<Leg> = pairs
        .par_iter()
        .map(|&(a, b)| -> Result<Leg> {
            let oracle = profile::capq_grid_oracle(mu, 1.0, a, b, cells)?.value;
            let mut inf = f64::INFINITY;
            for k in 0..=256 {
                let s = a + (b - a) * k as f64 / 256.0;
                inf = inf.min(profile::iso_profile(mu, s)?);
            }
            let gap = (oracle - inf).abs() / inf;
            Ok(Leg::check(format!("sandwich a={a:.4} b={b:.4}"), REF_SANDWICH, gap, rel_tol, 0.0))
        })
        .collect::<Result<_>>()?;
    for l in legs {
        report.push(l);
    }
    Ok(report)
}

/// `Cap_1(t, 1/2) <= I(t)` on `ts`.
pub fn coarea_report(mu: &ModelMeasure1D, ts: &[f64]) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(format!("co-area inequality on {}", mu.label()));
    let legs: Vec<Leg> = ts
        .par_iter()
        .map(|&t| -> Result<Leg> {
            let c = profile::cap1_profile(mu, t, 0.5)?;
            let i = profile::iso_profile(mu, t)?;
            Ok(Leg::check(format!("cap1 <= I @t={t}"), REF_COAREA, c, i, 1e-12))
        })
        .collect::<Result<_>>()?;
    for l in legs {
        report.push(l);
    }
    Ok(report)
}

/// The 1-capacity profile lifted to order `q`, against the exact
/// `Cap_q(t, 1/2)` on `ts`. Records the worst ratio exact/lifted.
pub fn lift_report(mu: &ModelMeasure1D, q: f64, ts: &[f64]) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(format!("capacity lifting 1 -> {q} on {}", mu.label()));
    report.env("measure", mu.label());
    report.env("q", q);
    let cap_q: Vec<f64> = ts.par_iter().map(|&t| profile::capq_profile(mu, q, t)).collect::<Result<_>>()?;
    let table = profile::Cap1Table::build(mu, CAP1_TABLE_POINTS)?;
    let legs: Vec<Leg> = ts
        .par_iter()
        .zip(&cap_q)
        .map(|(&t, &exact)| -> Result<Leg> {
            let cap1 = |s: f64| table.cap1(s.min(0.5), 0.5).unwrap_or(0.0);
            let lifted = lift_capacity(1.0, q, &cap1, t, 0.5)?;
            let leg = Leg::check(format!("lift <= Cap_q @t={t}"), REF_LIFT, lifted.value, exact, 1e-6 * exact);
            Ok(if lifted.degenerate { leg.with_note("input capacity vanished") } else { leg })
        })
        .collect::<Result<_>>()?;
    let worst = report_ratio(&legs);
    for l in legs {
        report.push(l);
    }
    report.env("lift_worst_ratio", worst);
    Ok(report)
}

/// `D2 = min_t Cap_q(t, 1/2) / N^(t)` over `ts`, its Orlicz-Sobolev
/// bracket, and the check of the lower edge against the probe family.
/// Returns the bracket when the monotonicity hypothesis holds.
pub fn bracket_report(
    mu: &ModelMeasure1D,
    n: &NFunction,
    q: f64,
    ts: &[f64],
    seed: u64,
) -> Result<(VerificationReport, Option<InequalityConstant>)> {
    let mut report = VerificationReport::new(format!("capacity bracket on {} with {}, q = {q}", mu.label(), n.label()));
    let d2 = capacity_constant(mu, n, q, ts)?;
    report.env("d2", d2);
    let probes = probes::probe_family(mu, seed)?;
    let d_measured = probes::measured_orlicz_constant(&probes, n, q)?;
    report.env("d_probe", d_measured);
    let bracket = match cap_to_orlicz_bracket(q, n, d2, BracketVariant::Strong, false) {
        Ok(b) => {
            report.push(Leg::check("D2/4 <= probe constant", REF_BRACKET, b.lower, d_measured, 1e-9 * d_measured));
            Some(b)
        }
        Err(Error::Hypothesis(why)) => {
            report.push(Leg::hypothesis_fail("bracket", REF_BRACKET, why));
            None
        }
        Err(e) => return Err(e),
    };
    Ok((report, bracket))
}

/// `converse_iso_bound(d) <= I~(t)` on `ts`. A measure without finite
/// semi-convexity constant is a hypothesis error.
pub fn converse_report(
    mu: &ModelMeasure1D,
    n: &NFunction,
    q: f64,
    d: f64,
    ts: &[f64],
    set: &ConstantSet,
) -> Result<VerificationReport> {
    if !mu.kappa().is_finite() {
        return Err(Error::Hypothesis(format!("{} has no finite semi-convexity constant", mu.label())));
    }
    let mut report = VerificationReport::new(format!("converse bound on {} with {}, q = {q}", mu.label(), n.label()));
    report.env("d", d);
    report.env("constant_set", set.label());
    let mut loss = f64::INFINITY;
    for &t in ts {
        match converse_iso_bound(n, q, d, mu.kappa(), t, set) {
            Ok(bound) => {
                let it = profile::iso_tilde(mu, t)?;
                if bound > 0.0 {
                    loss = loss.min(it / bound);
                }
                report.push(Leg::check(format!("converse <= I~ @t={t}"), REF_CONVERSE, bound, it, 1e-6 * it));
            }
            Err(Error::Hypothesis(why)) => {
                report.push(Leg::hypothesis_fail("converse", REF_CONVERSE, why));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    report.env("cycle_loss_factor", loss);
    Ok(report)
}

/// Runs the chain isoperimetry -> 1-capacity -> q-capacity ->
/// Orlicz-Sobolev -> isoperimetry on `mu` and records every margin.
pub fn equivalence_report(mu: &ModelMeasure1D, n: &NFunction, q: f64, opts: &EquivalenceOptions) -> Result<VerificationReport> {
    check_t_grid(&opts.t_grid)?;
    let mut report = VerificationReport::new(format!("equivalence cycle on {} with {}, q = {q}", mu.label(), n.label()));
    report.env("measure", mu.label());
    report.env("nfunc", n.label());
    report.env("q", q);
    report.env("grid", mu.grid_size());
    report.env("kappa", if mu.kappa().is_finite() { Some(mu.kappa()) } else { None });
    report.env("constant_set", opts.constants.label());
    let ts: Vec<f64> = opts.t_grid.iter().copied().filter(|&t| t < 0.5).collect();

    report.extend(coarea_report(mu, &ts)?);
    report.extend(lift_report(mu, q, &ts)?);
    let (bracket_part, bracket) = bracket_report(mu, n, q, &ts, opts.seed)?;
    report.extend(bracket_part);

    if q > 1.0 {
        let grid = default_t_grid();
        let d_iso = iso_constant(mu, n, q, &grid)?;
        report.env("d_iso", d_iso);
        report.extend(forward_theorem_check(mu, n, q, d_iso, &grid, opts.seed)?);
    }

    match bracket {
        _ if !mu.kappa().is_finite() => {
            report.push(Leg::skipped("converse", REF_CONVERSE, "no finite semi-convexity constant"));
        }
        Some(b) => report.extend(converse_report(mu, n, q, b.upper, &ts, &opts.constants)?),
        None => {}
    }
    Ok(report)
}

fn report_ratio(legs: &[Leg]) -> f64 {
    legs.iter().filter(|l| l.lhs > 0.0).map(|l| l.rhs / l.lhs).fold(1.0, f64::max)
}

//! Isoperimetric profiles, the 1-capacity profile, exact one-dimensional
//! q-capacities of layers, and an independent grid-variational oracle.
//!
//! Half-lines are the candidate extremal sets. They are exact for
//! log-concave measures; for other measures interval candidates
//! are searched as well and the winner is recorded, so the returned values
//! are upper bounds over the searched family.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{MeasureKind, ModelMeasure1D};
use crate::quadrature::{self, Tolerance};

/// Coarse resolution of the interval candidate searches.
const SEARCH_POINTS: usize = 96;
const SPLIT_POINTS: usize = 16;

/// The set family that realised a profile value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Candidate {
    LeftHalfLine,
    RightHalfLine,
    Interval { lo: f64, hi: f64 },
    IntervalComplement { lo: f64, hi: f64 },
    Degenerate,
}

impl Candidate {
    pub fn side(&self) -> &'static str {
        match self {
            Candidate::LeftHalfLine => "left",
            Candidate::RightHalfLine => "right",
            Candidate::Interval { .. } => "interval",
            Candidate::IntervalComplement { .. } => "interval_complement",
            Candidate::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Candidate::Interval { lo, hi } => write!(f, "interval[{lo:.6},{hi:.6}]"),
            Candidate::IntervalComplement { lo, hi } => write!(f, "complement[{lo:.6},{hi:.6}]"),
            other => f.write_str(other.side()),
        }
    }
}

/// A profile value with the candidate set that attained it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileValue {
    pub value: f64,
    pub candidate: Candidate,
}

/// Half-lines are extremal for log-concave measures on the line; anything
/// else gets the interval search.
fn needs_search(mu: &ModelMeasure1D) -> bool {
    !mu.is_log_concave()
}

/// `I(t)` with the winning candidate.
pub fn iso_profile_detailed(mu: &ModelMeasure1D, t: f64) -> Result<ProfileValue> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::ProbabilityOutOfRange(t));
    }
    if t == 0.0 || t == 1.0 {
        return Ok(ProfileValue { value: 0.0, candidate: Candidate::Degenerate });
    }
    let left = mu.density(mu.quantile(t)?);
    let right = mu.density(mu.upper_quantile(t)?);
    let mut best = if left <= right {
        ProfileValue { value: left, candidate: Candidate::LeftHalfLine }
    } else {
        ProfileValue { value: right, candidate: Candidate::RightHalfLine }
    };
    if needs_search(mu) {
        // An interval of mass m and its complement share the same boundary.
        for (mass, complement) in [(t, false), (1.0 - t, true)] {
            for k in 1..SEARCH_POINTS {
                let c = (1.0 - mass) * k as f64 / SEARCH_POINTS as f64;
                let lo = mu.quantile(c)?;
                let hi = if c + mass <= 0.5 { mu.quantile(c + mass)? } else { mu.upper_quantile(1.0 - c - mass)? };
                let v = mu.density(lo) + mu.density(hi);
                if v < best.value {
                    let candidate = if complement {
                        Candidate::IntervalComplement { lo, hi }
                    } else {
                        Candidate::Interval { lo, hi }
                    };
                    best = ProfileValue { value: v, candidate };
                }
            }
        }
    }
    Ok(best)
}

/// Isoperimetric profile `I(t)`: the smallest boundary density over the
/// searched sets of mass `t`.
pub fn iso_profile(mu: &ModelMeasure1D, t: f64) -> Result<f64> {
    Ok(iso_profile_detailed(mu, t)?.value)
}

/// `min(I(t), I(1-t))` for `t` in `[0, 1/2]`.
pub fn iso_tilde(mu: &ModelMeasure1D, t: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&t) {
        return Err(Error::InvalidParameter(format!("iso_tilde needs t in [0, 1/2], got {t}")));
    }
    Ok(iso_profile(mu, t)?.min(iso_profile(mu, 1.0 - t)?))
}

/// Result of a `Cap_1(a, b)` evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cap1Value {
    pub value: f64,
    pub argmin: f64,
    /// Set when consecutive grid values jump by more than 10 %, which would
    /// make the closed and half-open infima differ.
    pub jump_detected: bool,
}

const CAP1_POINTS: usize = 512;

/// `Cap_1(a, b)` as the infimum of `I` over a dense grid of `[a, b]`.
pub fn cap1_profile_detailed(mu: &ModelMeasure1D, a: f64, b: f64) -> Result<Cap1Value> {
    check_pair(a, b)?;
    if mu.is_log_concave() {
        // I is concave, so its infimum over [a, b] sits at an end.
        let (ia, ib) = (iso_profile(mu, a)?, iso_profile(mu, b)?);
        let (value, argmin) = if ia <= ib { (ia, a) } else { (ib, b) };
        return Ok(Cap1Value { value, argmin, jump_detected: false });
    }
    let n = if a == b { 1 } else { CAP1_POINTS };
    let mut best = Cap1Value { value: f64::INFINITY, argmin: a, jump_detected: false };
    let mut prev: Option<f64> = None;
    for k in 0..=n {
        let t = if n == 1 { a } else { a + (b - a) * k as f64 / n as f64 };
        let v = iso_profile(mu, t)?;
        if let Some(p) = prev {
            if (v - p).abs() > 0.1 * v.max(p) && v.max(p) > 1e-12 && n > 1 {
                // Guard against steep but continuous profiles near singular points.
                let mid = iso_profile(mu, t - 0.5 * (b - a) / n as f64)?;
                if (mid - p).abs() > 0.1 * mid.max(p) && (v - mid).abs() > 0.1 * v.max(mid) {
                    best.jump_detected = true;
                }
            }
        }
        prev = Some(v);
        if v < best.value {
            best.value = v;
            best.argmin = t;
        }
    }
    Ok(best)
}

/// `Cap_1(a, b)`; equals `inf_{[a,b]} I` when `I` is continuous there.
pub fn cap1_profile(mu: &ModelMeasure1D, a: f64, b: f64) -> Result<f64> {
    Ok(cap1_profile_detailed(mu, a, b)?.value)
}

/// `I` tabulated once per measure so that many `Cap_1(a, b)` queries share
/// the interval search. Queries evaluate `I` exactly at both ends and take
/// the table minimum strictly inside.
#[derive(Debug, Clone)]
pub struct Cap1Table<'a> {
    mu: &'a ModelMeasure1D,
    ts: Vec<f64>,
    values: Vec<f64>,
}

impl<'a> Cap1Table<'a> {
    pub fn build(mu: &'a ModelMeasure1D, points: usize) -> Result<Self> {
        if mu.is_log_concave() {
            return Ok(Cap1Table { mu, ts: Vec::new(), values: Vec::new() });
        }
        let ts: Vec<f64> = (1..points).map(|k| k as f64 / points as f64).collect();
        let values = ts.par_iter().map(|&t| iso_profile(mu, t)).collect::<Result<_>>()?;
        Ok(Cap1Table { mu, ts, values })
    }

    pub fn cap1(&self, a: f64, b: f64) -> Result<f64> {
        check_pair(a, b)?;
        let mut best = iso_profile(self.mu, a)?.min(iso_profile(self.mu, b)?);
        let start = self.ts.partition_point(|&t| t <= a);
        for (t, v) in self.ts[start..].iter().zip(&self.values[start..]) {
            if *t >= b {
                break;
            }
            best = best.min(*v);
        }
        Ok(best)
    }
}

fn check_pair(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a <= b && b < 1.0) {
        return Err(Error::InvalidParameter(format!("capacity query needs 0 < a <= b < 1, got ({a}, {b})")));
    }
    Ok(())
}

/// A capacity query `Cap_q(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityQuery {
    pub a: f64,
    pub b: f64,
    pub q: f64,
}

impl CapacityQuery {
    pub fn new(q: f64, a: f64, b: f64) -> Result<Self> {
        check_pair(a, b)?;
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("q must be >= 1, got {q}")));
        }
        Ok(CapacityQuery { a, b, q })
    }

    pub fn evaluate(&self, mu: &ModelMeasure1D) -> Result<ProfileValue> {
        capq_detailed(mu, self.q, self.a, self.b)
    }
}

/// Exponent `beta` such that `rho^{-1/(q-1)}` behaves like `|x - s|^{-beta}`
/// at a singular point.
fn singular_exponent(mu: &ModelMeasure1D, q: f64) -> f64 {
    match mu.kind() {
        MeasureKind::PowerAlpha { alpha } => alpha / (q - 1.0),
        _ => 0.0,
    }
}

/// `ln int_{x1}^{x2} rho^{-1/(q-1)} dx`; `+inf` for divergent layers.
pub fn layer_log_integral(mu: &ModelMeasure1D, q: f64, x1: f64, x2: f64) -> f64 {
    if x2 <= x1 {
        return f64::NEG_INFINITY;
    }
    let e = 1.0 / (q - 1.0);
    let mut cuts = vec![x1];
    for &s in mu.singular_points() {
        if s > x1 && s < x2 {
            cuts.push(s);
        }
    }
    cuts.push(x2);
    let beta = singular_exponent(mu, q);
    let is_singular = |x: f64| mu.singular_points().contains(&x);
    if beta >= 1.0 && cuts.iter().any(|&c| is_singular(c)) {
        return f64::INFINITY;
    }
    // Scale by the largest sampled potential so the exponent stays in range.
    let shift = (0..=64)
        .map(|k| x1 + (x2 - x1) * k as f64 / 64.0)
        .map(|x| mu.psi(x))
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return f64::INFINITY;
    }
    let g = |x: f64| ((mu.psi(x) - shift) * e).exp();
    let tol = Tolerance { rel: 1e-13, abs: 0.0, max_intervals: 4000 };
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        let piece = if is_singular(l) || is_singular(r) {
            let m = 1.0 / (1.0 - beta);
            let len = (r - l).powf(1.0 / m);
            let (s, dir) = if is_singular(l) { (l, 1.0) } else { (r, -1.0) };
            let h = |u: f64| {
                if u == 0.0 {
                    // finite limit of the regularised integrand
                    return if beta == 0.0 { g(s) * m * 0f64.powf(m - 1.0) } else { 0.0 };
                }
                let x = s + dir * u.powf(m);
                let v = g(x) * m * u.powf(m - 1.0);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            };
            quadrature::adaptive(h, 0.0, len, tol).value
        } else {
            quadrature::adaptive(g, l, r, tol).value
        };
        total += piece;
    }
    if !(total > 0.0) || !total.is_finite() {
        return f64::INFINITY;
    }
    total.ln() + shift * e
}

/// Exact capacity of the layer between `x_b` and `x_a` (`x_b < x_a`):
/// `(int rho^{-1/(q-1)})^{-(q-1)/q}`; `min rho` on the layer when `q = 1`.
///
/// Returns `+inf` when `x_b >= x_a` and `0` for divergent layers.
pub fn capq_halfline(mu: &ModelMeasure1D, q: f64, x_b: f64, x_a: f64) -> f64 {
    if x_b >= x_a {
        return f64::INFINITY;
    }
    if q == 1.0 {
        return min_density(mu, x_b, x_a);
    }
    let li = layer_log_integral(mu, q, x_b, x_a);
    (-(q - 1.0) / q * li).exp()
}

fn min_density(mu: &ModelMeasure1D, x1: f64, x2: f64) -> f64 {
    let mut best = mu.density(x1).min(mu.density(x2));
    for &s in mu.singular_points() {
        if s > x1 && s < x2 {
            best = best.min(mu.density(s));
        }
    }
    for k in 1..256 {
        best = best.min(mu.density(x1 + (x2 - x1) * k as f64 / 256.0));
    }
    best
}

/// Layer energy `Cap^q` of `[x1, x2]`; zero when the layer reaches past the
/// support (no constraint on that side).
fn layer_energy(mu: &ModelMeasure1D, q: f64, x1: f64, x2: f64) -> f64 {
    let c = capq_halfline(mu, q, x1, x2);
    if c.is_infinite() {
        f64::INFINITY
    } else {
        c.powf(q)
    }
}

/// `Cap_q(a, b)` with the winning candidate.
pub fn capq_detailed(mu: &ModelMeasure1D, q: f64, a: f64, b: f64) -> Result<ProfileValue> {
    check_pair(a, b)?;
    if !(q >= 1.0) {
        return Err(Error::InvalidParameter(format!("q must be >= 1, got {q}")));
    }
    // Right: A = [Q^+(a), inf), B = [Q^+(b), inf). Left mirrors it.
    let right = capq_halfline(mu, q, mu.upper_quantile(b)?, mu.upper_quantile(a)?);
    let left = capq_halfline(mu, q, mu.quantile(a)?, mu.quantile(b)?);
    let mut best = if right <= left {
        ProfileValue { value: right, candidate: Candidate::RightHalfLine }
    } else {
        ProfileValue { value: left, candidate: Candidate::LeftHalfLine }
    };
    if needs_search(mu) && b > a {
        if let Some(v) = interval_capacity_search(mu, q, a, b)? {
            if v.value < best.value {
                best = v;
            }
        }
    }
    Ok(best)
}

/// `A = [u, v]` of mass `a` inside `B = [u', v']` of mass `b`; the extra
/// mass `b - a` is split between the two sides.
fn interval_capacity_search(mu: &ModelMeasure1D, q: f64, a: f64, b: f64) -> Result<Option<ProfileValue>> {
    let q_at = |m: f64| -> Result<f64> {
        if m <= 0.5 {
            mu.quantile(m.max(0.0))
        } else {
            mu.upper_quantile((1.0 - m).max(0.0))
        }
    };
    let extra = b - a;
    let mut best: Option<ProfileValue> = None;
    for k in 1..SEARCH_POINTS {
        let c = (1.0 - a) * k as f64 / SEARCH_POINTS as f64;
        let u = q_at(c)?;
        let v = q_at(c + a)?;
        for j in 0..=SPLIT_POINTS {
            let m_left = extra * j as f64 / SPLIT_POINTS as f64;
            let left = if c - m_left <= 0.0 { 0.0 } else { layer_energy(mu, q, q_at(c - m_left)?, u) };
            let right_mass = c + a + (extra - m_left);
            let right = if right_mass >= 1.0 { 0.0 } else { layer_energy(mu, q, v, q_at(right_mass)?) };
            let value = (left + right).powf(1.0 / q);
            if best.map_or(true, |b| value < b.value) {
                best = Some(ProfileValue { value, candidate: Candidate::Interval { lo: u, hi: v } });
            }
        }
    }
    Ok(best)
}

/// `Cap_q(a, b)` over the candidate family.
pub fn capq(mu: &ModelMeasure1D, q: f64, a: f64, b: f64) -> Result<f64> {
    Ok(capq_detailed(mu, q, a, b)?.value)
}

/// `Cap_q(t, 1/2)`.
pub fn capq_profile(mu: &ModelMeasure1D, q: f64, t: f64) -> Result<f64> {
    if t > 0.5 {
        return Err(Error::InvalidParameter(format!("capacity profile needs t <= 1/2, got {t}")));
    }
    capq(mu, q, t, 0.5)
}

/// Result of the grid-variational oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    pub side: Candidate,
    /// True when mass snapping forced the sets to touch.
    pub snapped: bool,
}

/// Independent estimate of `Cap_q(a, b)`: the discrete problem
/// `min sum_e |dPhi_e / h|^q rho_e h` on a uniform grid of `n` cells, with
/// the discrete Euler-Lagrange minimiser built explicitly and its energy
/// evaluated. Half-line sets only.
pub fn capq_grid_oracle(mu: &ModelMeasure1D, q: f64, a: f64, b: f64, n: usize) -> Result<OracleValue> {
    check_pair(a, b)?;
    if n < 8 {
        return Err(Error::InvalidParameter("oracle grid needs at least 8 cells".into()));
    }
    let (lo, hi) = mu.support();
    let h = (hi - lo) / n as f64;
    let nodes: Vec<f64> = (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect();
    let cell_mass: Vec<f64> = nodes.iter().map(|&x| mu.density(x) * h).collect();
    let total: f64 = cell_mass.iter().sum();
    let mass: Vec<f64> = cell_mass.iter().map(|m| m / total).collect();
    // Edge e sits between nodes e and e+1.
    let edge_log_rho: Vec<f64> = (0..n - 1).map(|e| -mu.psi(lo + (e as f64 + 1.0) * h)).collect();

    let right = oracle_side(&mass, &edge_log_rho, h, q, a, b, false)?;
    let left = oracle_side(&mass, &edge_log_rho, h, q, a, b, true)?;
    Ok(if right.0 <= left.0 {
        OracleValue { value: right.0, side: Candidate::RightHalfLine, snapped: right.1 }
    } else {
        OracleValue { value: left.0, side: Candidate::LeftHalfLine, snapped: left.1 }
    })
}

fn oracle_side(mass: &[f64], edge_log_rho: &[f64], h: f64, q: f64, a: f64, b: f64, mirror: bool) -> Result<(f64, bool)> {
    let n = mass.len();
    let idx = |i: usize| if mirror { n - 1 - i } else { i };
    // A: smallest set of top cells with mass >= a.
    let mut acc = 0.0;
    let mut first_one = n;
    while first_one > 0 && acc < a {
        first_one -= 1;
        acc += mass[idx(first_one)];
    }
    // Complement of B: smallest set of bottom cells with mass >= 1 - b.
    let mut acc = 0.0;
    let mut last_zero_excl = 0;
    while last_zero_excl < n && acc < 1.0 - b {
        acc += mass[idx(last_zero_excl)];
        last_zero_excl += 1;
    }
    let mut snapped = false;
    if last_zero_excl > first_one {
        last_zero_excl = first_one;
        snapped = true;
    }
    if last_zero_excl == 0 || first_one >= n {
        return Err(Error::InvalidParameter("infeasible oracle set specification".into()));
    }
    // Layer edges between node last_zero_excl - 1 and node first_one.
    let edges: Vec<f64> = (last_zero_excl - 1..first_one)
        .map(|i| {
            let e = if mirror { n - 2 - i } else { i };
            edge_log_rho[e]
        })
        .collect();
    if q == 1.0 {
        let v = edges.iter().cloned().fold(f64::INFINITY, f64::min).exp();
        return Ok((v, snapped));
    }
    // Minimiser: dPhi_e proportional to h rho_e^{-1/(q-1)}.
    let lw: Vec<f64> = edges.iter().map(|lr| h.ln() - lr / (q - 1.0)).collect();
    let lmax = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lsum = lmax + lw.iter().map(|l| (l - lmax).exp()).sum::<f64>().ln();
    let mut phi = 0.0;
    let mut energy = 0.0;
    for (l, lr) in lw.iter().zip(&edges) {
        let d = (l - lsum).exp();
        phi += d;
        energy += (q * (l - lsum - h.ln()) + lr + h.ln()).exp();
    }
    debug_assert!((phi - 1.0).abs() < 1e-9);
    Ok((energy.powf(1.0 / q), snapped))
}

/// What a [`ProfileTable`] tabulates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    Iso,
    IsoTilde,
    CapQ { q: f64 },
}

impl ProfileKind {
    pub fn label(&self) -> String {
        match self {
            ProfileKind::Iso => "iso".into(),
            ProfileKind::IsoTilde => "iso_tilde".into(),
            ProfileKind::CapQ { q } => format!("cap_q({q})"),
        }
    }
}

/// Validates a t-grid: nonempty, strictly increasing, inside `(0, 1/2]`.
pub fn check_t_grid(ts: &[f64]) -> Result<()> {
    if ts.is_empty() {
        return Err(Error::Config("empty t-grid".into()));
    }
    if ts.iter().any(|&t| !(t > 0.0 && t <= 0.5)) {
        return Err(Error::Config("t-grid must lie in (0, 1/2]".into()));
    }
    if ts.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("t-grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `n` points spaced linearly on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// `n` points spaced logarithmically on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut g: Vec<f64> = linear_grid(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect();
    // pin the ends against rounding in exp(ln x)
    if let Some(first) = g.first_mut() {
        *first = lo;
    }
    if let Some(last) = g.last_mut() {
        *last = hi;
    }
    g
}

/// A profile tabulated on a t-grid, interpolated log-linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub kind: ProfileKind,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub candidates: Vec<Candidate>,
}

impl ProfileTable {
    pub fn build(mu: &ModelMeasure1D, kind: ProfileKind, t_grid: &[f64]) -> Result<Self> {
        check_t_grid(t_grid)?;
        let rows: Vec<ProfileValue> = t_grid.par_iter().map(|&t| profile_value(mu, kind, t)).collect::<Result<_>>()?;
        let table = ProfileTable {
            kind,
            t_grid: t_grid.to_vec(),
            values: rows.iter().map(|r| r.value).collect(),
            candidates: rows.iter().map(|r| r.candidate).collect(),
        };
        if table.values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Range(format!("{} profile produced a non-finite value", kind.label())));
        }
        Ok(table)
    }

    /// Log-linear interpolation; clamps to the end values outside the grid.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.t_grid.len();
        if t <= self.t_grid[0] {
            return self.values[0];
        }
        if t >= self.t_grid[n - 1] {
            return self.values[n - 1];
        }
        let i = self.t_grid.partition_point(|&x| x < t).max(1);
        let (t0, t1) = (self.t_grid[i - 1], self.t_grid[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        if v0 <= 0.0 || v1 <= 0.0 {
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
        let s = (t.ln() - t0.ln()) / (t1.ln() - t0.ln());
        (v0.ln() + s * (v1.ln() - v0.ln())).exp()
    }

    pub fn is_nondecreasing(&self, rel_tol: f64) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0] * (1.0 - rel_tol))
    }
}

fn profile_value(mu: &ModelMeasure1D, kind: ProfileKind, t: f64) -> Result<ProfileValue> {
    match kind {
        ProfileKind::Iso => iso_profile_detailed(mu, t),
        ProfileKind::IsoTilde => {
            let a = iso_profile_detailed(mu, t)?;
            let b = iso_profile_detailed(mu, 1.0 - t)?;
            Ok(if a.value <= b.value { a } else { b })
        }
        ProfileKind::CapQ { q } => capq_detailed(mu, q, t, 0.5),
    }
}

/// One row of a profile sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub value: f64,
    pub candidate_side: Candidate,
    pub oracle_value: f64,
    pub rel_gap: f64,
}

/// Profile values alongside the grid oracle (`Cap_1` at `(t, t)` for the
/// isoperimetric kinds).
pub fn sweep(mu: &ModelMeasure1D, kind: ProfileKind, t_grid: &[f64], oracle_cells: usize) -> Result<Vec<SweepRow>> {
    check_t_grid(t_grid)?;
    t_grid
        .par_iter()
        .map(|&t| {
            let pv = profile_value(mu, kind, t)?;
            let oracle = match kind {
                ProfileKind::CapQ { q } => capq_grid_oracle(mu, q, t, 0.5, oracle_cells)?.value,
                ProfileKind::Iso | ProfileKind::IsoTilde => capq_grid_oracle(mu, 1.0, t, t, oracle_cells)?.value,
            };
            let rel_gap = if pv.value > 0.0 { (oracle - pv.value).abs() / pv.value } else { (oracle - pv.value).abs() };
            Ok(SweepRow { t, value: pv.value, candidate_side: pv.candidate, oracle_value: oracle, rel_gap })
        })
        .collect()
}

/// CSV rendering with 17 significant digits.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("t,value,candidate_side,oracle_value,rel_gap\n");
    for r in rows {
        out.push_str(&format!(
            "{:.16e},{:.16e},{},{:.16e},{:.16e}\n",
            r.t,
            r.value,
            r.candidate_side.side(),
            r.oracle_value,
            r.rel_gap
        ));
    }
    out
}

/// Estimate of `D_Lin = inf_A mu+(A) / min(mu(A), 1 - mu(A))` over sets
/// whose boundary points lie on the measure's quadrature nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinEstimate {
    pub value: f64,
    pub candidate: Candidate,
    pub nodes: usize,
}

/// Node-based search over half-lines and (for non-log-concave measures)
/// intervals and their complements.
pub fn d_lin_node_search(mu: &ModelMeasure1D) -> LinEstimate {
    let nodes = &mu.grid().nodes;
    let cdf: Vec<f64> = nodes.iter().map(|&x| mu.cdf(x)).collect();
    let rho: Vec<f64> = nodes.iter().map(|&x| mu.density(x)).collect();
    let n = nodes.len();
    let mut best = LinEstimate { value: f64::INFINITY, candidate: Candidate::Degenerate, nodes: n };
    for i in 0..n {
        let m = cdf[i].min(1.0 - cdf[i]);
        if m > 0.0 {
            let v = rho[i] / m;
            if v < best.value {
                let candidate = if cdf[i] <= 0.5 { Candidate::LeftHalfLine } else { Candidate::RightHalfLine };
                best = LinEstimate { value: v, candidate, nodes: n };
            }
        }
    }
    if needs_search(mu) {
        let (v, i, j) = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut local = (f64::INFINITY, i, i);
                for j in i + 1..n {
                    let m = cdf[j] - cdf[i];
                    let s = m.min(1.0 - m);
                    if s > 0.0 {
                        let v = (rho[i] + rho[j]) / s;
                        if v < local.0 {
                            local = (v, i, j);
                        }
                    }
                }
                local
            })
            .reduce(|| (f64::INFINITY, 0, 0), |a, b| if b.0 < a.0 { b } else { a });
        if v < best.value {
            let m = cdf[j] - cdf[i];
            let candidate = if m <= 0.5 {
                Candidate::Interval { lo: nodes[i], hi: nodes[j] }
            } else {
                Candidate::IntervalComplement { lo: nodes[i], hi: nodes[j] }
            };
            best = LinEstimate { value: v, candidate, nodes: n };
        }
    }
    best
}

/// `min_t I~(t) / t` over a t-grid.
pub fn d_lin_profile(mu: &ModelMeasure1D, t_grid: &[f64]) -> Result<f64> {
    check_t_grid(t_grid)?;
    let vals: Vec<f64> = t_grid.par_iter().map(|&t| iso_tilde(mu, t).map(|v| v / t)).collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> ModelMeasure1D {
        ModelMeasure1D::uniform(-1.0, 1.0).unwrap()
    }

    #[test]
    fn gaussian_iso_at_half_is_density_at_median() {
        let mu = ModelMeasure1D::gaussian();
        assert!((iso_profile(&mu, 0.5).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(iso_profile(&mu, 0.0).unwrap(), 0.0);
        assert_eq!(iso_profile(&mu, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_iso_tilde_at_tenth() {
        // standard normal density at its 0.1 quantile, 30-digit evaluation
        let mu = ModelMeasure1D::gaussian();
        assert!((iso_tilde(&mu, 0.1).unwrap() - 0.175_498_331_932_486_81).abs() < 1e-14);
        assert_eq!(iso_tilde(&mu, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn uniform_profile_is_half() {
        let mu = uniform();
        assert!((iso_profile(&mu, 0.3).unwrap() - 0.5).abs() < 1e-15);
        assert!((cap1_profile(&mu, 0.2, 0.7).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn power_alpha_median_boundary_vanishes() {
        let mu = ModelMeasure1D::builtin(MeasureKind::PowerAlpha { alpha: 0.5 }).unwrap();
        assert_eq!(iso_profile(&mu, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn uniform_layer_capacity_closed_form() {
        let mu = uniform();
        assert!((capq_halfline(&mu, 2.0, 0.0, 0.5) - 1.0).abs() < 1e-13);
        assert!((capq_profile(&mu, 2.0, 0.25).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_layer_capacity_matches_quadrature_oracle() {
        // (int_0^1 sqrt(2 pi) e^{x^2/2} dx)^{-1/2}, 30-digit quadrature
        let mu = ModelMeasure1D::gaussian();
        assert!((capq_halfline(&mu, 2.0, 0.0, 1.0) - 0.577_801_644_797_669_83).abs() < 1e-13);
        // quantile(0.75) = 0.674489750196081743
        assert!((capq_profile(&mu, 2.0, 0.25).unwrap() - 0.739_598_904_609_377_64).abs() < 1e-12);
    }

    #[test]
    fn vanishing_gap_gives_infinite_capacity() {
        let mu = ModelMeasure1D::gaussian();
        assert!(capq_halfline(&mu, 2.0, 0.3, 0.3).is_infinite());
        assert!(capq_halfline(&mu, 2.0, 0.3, 0.3 + 1e-12) > 1e5);
    }

    #[test]
    fn capacity_vanishes_with_inner_mass() {
        let mu = ModelMeasure1D::gaussian();
        assert!(capq_profile(&mu, 2.0, 1e-4).unwrap() < capq_profile(&mu, 2.0, 1e-2).unwrap());
        assert!(capq_profile(&mu, 2.0, 1e-4).unwrap() < 0.05);
        assert!(capq_profile(&mu, 2.0, 0.6).is_err());
    }

    #[test]
    fn oracle_on_uniform_is_first_order() {
        let mu = uniform();
        let e1 = (capq_grid_oracle(&mu, 2.0, 0.25, 0.5, 256).unwrap().value - 1.0).abs();
        let e2 = (capq_grid_oracle(&mu, 2.0, 0.25, 0.5, 1024).unwrap().value - 1.0).abs();
        assert!(e2 <= 2.0 / 1024.0 && e2 <= e1);
    }

    #[test]
    fn oracle_agrees_with_formula_on_gaussian() {
        let mu = ModelMeasure1D::gaussian();
        for q in [1.5, 2.0, 3.0] {
            let exact = capq_profile(&mu, q, 0.2).unwrap();
            let oracle = capq_grid_oracle(&mu, q, 0.2, 0.5, 4096).unwrap().value;
            assert!((oracle - exact).abs() / exact <= 0.02, "q={q}: {oracle} vs {exact}");
        }
    }

    #[test]
    fn cap1_of_gaussian_equals_iso_at_inner_mass() {
        let mu = ModelMeasure1D::gaussian();
        for t in [0.05, 0.2, 0.45] {
            let c = cap1_profile_detailed(&mu, t, 0.5).unwrap();
            assert!((c.value - iso_profile(&mu, t).unwrap()).abs() < 1e-15);
            assert!(!c.jump_detected);
        }
    }

    #[test]
    fn table_interpolates_log_linearly() {
        let mu = ModelMeasure1D::gaussian();
        let t = log_grid(1e-3, 0.49, 40);
        let table = ProfileTable::build(&mu, ProfileKind::CapQ { q: 2.0 }, &t).unwrap();
        assert!(table.is_nondecreasing(0.0));
        let mid = (t[10] * t[11]).sqrt();
        let v = table.eval(mid);
        assert!((v - (table.values[10] * table.values[11]).sqrt()).abs() < 1e-14);
        assert!(ProfileTable::build(&mu, ProfileKind::Iso, &[]).is_err());
        assert!(ProfileTable::build(&mu, ProfileKind::Iso, &[0.2, 0.1]).is_err());
    }

    #[test]
    fn lin_constant_of_gaussian() {
        let mu = ModelMeasure1D::gaussian();
        let v = d_lin_profile(&mu, &linear_grid(0.01, 0.5, 50)).unwrap();
        assert!((v - 2.0 * 0.398_942_280_401_432_7).abs() < 1e-12);
        let node = d_lin_node_search(&mu);
        assert!(node.value >= v - 1e-12 && node.value < v * 1.01);
    }
}

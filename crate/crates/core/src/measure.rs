//! One-dimensional model measures `exp(-psi(x)) dx` with exact analytic
//! structure, a graded quadrature grid, and grid functions sampled on it.
//!
//! Unbounded supports are truncated where the density drops below
//! `1e-16` times its maximum; the truncated interval is what every
//! downstream computation (profiles, semigroup grids) works on and is
//! exposed through [`ModelMeasure1D::support`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};

/// Relative density level below which unbounded tails are cut off.
pub const TRUNCATION_LEVEL: f64 = 1e-16;
/// Default number of quadrature nodes.
pub const DEFAULT_GRID_SIZE: usize = 2048;
/// Largest admissible relative quadrature mass defect at construction.
pub const MAX_MASS_DEFECT: f64 = 1e-8;

const GL_ORDER: usize = 8;

/// The family a measure belongs to, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureKind {
    /// Standard Gaussian.
    Gaussian,
    /// Density `exp(-|x|^p) / Z_p`.
    PExponential { p: f64 },
    /// Uniform probability on `[a, b]`.
    UniformInterval { a: f64, b: f64 },
    /// Density `(1+alpha)/2 |x|^alpha` on `[-1, 1]`; not semi-convex.
    PowerAlpha { alpha: f64 },
    /// Potential `x^4/4 - x^2/2`, semi-convex with `kappa = 1`.
    DoubleWell,
    /// Potential interpolated by a natural cubic spline through `(x, psi)`.
    Tabulated { points: Vec<(f64, f64)> },
}

impl MeasureKind {
    pub fn label(&self) -> String {
        match self {
            MeasureKind::Gaussian => "gaussian".into(),
            MeasureKind::PExponential { p } => format!("p_exponential({p})"),
            MeasureKind::UniformInterval { a, b } => format!("uniform_interval({a},{b})"),
            MeasureKind::PowerAlpha { alpha } => format!("power_alpha({alpha})"),
            MeasureKind::DoubleWell => "double_well".into(),
            MeasureKind::Tabulated { points } => format!("tabulated({} points)", points.len()),
        }
    }
}

/// Quadrature nodes with probability weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl WeightedGrid {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::InvalidParameter("nodes and weights must be non-empty and of equal length".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter("weights must be finite and nonnegative".into()));
        }
        Ok(WeightedGrid { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `sum_i w_i f_i`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Weighted mean, normalised by the total mass of the grid.
    pub fn expectation(&self, values: &[f64]) -> f64 {
        self.integrate(values) / self.total_mass()
    }

    /// A value `m` with `mu(f >= m) >= 1/2` and `mu(f <= m) >= 1/2` for the
    /// discrete measure. On exact half-splits the lower candidate is chosen.
    pub fn median(&self, values: &[f64]) -> f64 {
        let mut order: Vec<usize> = (0..values.len()).filter(|&i| self.weights[i] > 0.0).collect();
        if order.is_empty() {
            return 0.0;
        }
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let half = 0.5 * self.total_mass();
        let mut acc = 0.0;
        for &i in &order {
            acc += self.weights[i];
            if acc >= half * (1.0 - 1e-14) {
                return values[i];
            }
        }
        values[*order.last().expect("non-empty")]
    }

    /// Mass of the nodes where `pred` holds.
    pub fn mass_where(&self, values: &[f64], pred: impl Fn(f64) -> bool) -> f64 {
        self.weights.iter().zip(values).filter(|(_, v)| pred(**v)).map(|(w, _)| w).sum()
    }
}

/// A real function sampled on a [`WeightedGrid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<WeightedGrid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn sample(grid: &Arc<WeightedGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes.iter().map(|&x| f(x)).collect();
        GridFunction { grid: grid.clone(), values }
    }

    pub fn from_values(grid: &Arc<WeightedGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DomainMismatch);
        }
        Ok(GridFunction { grid: grid.clone(), values })
    }

    pub fn constant(grid: &Arc<WeightedGrid>, c: f64) -> Self {
        GridFunction { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    pub fn grid(&self) -> &Arc<WeightedGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if !self.same_grid(other) {
            return Err(Error::DomainMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(GridFunction { grid: self.grid.clone(), values })
    }

    pub fn shifted(&self, c: f64) -> GridFunction {
        self.map(|v| v - c)
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        self.map(|v| v * c)
    }

    pub fn expectation(&self) -> f64 {
        self.grid.expectation(&self.values)
    }

    pub fn median(&self) -> f64 {
        self.grid.median(&self.values)
    }

    /// Largest absolute value over nodes carrying positive weight.
    pub fn sup_abs(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.grid.weights)
            .filter(|(_, w)| **w > 0.0)
            .fold(0.0, |m, (v, _)| m.max(v.abs()))
    }

    /// `(int |f|^r)^{1/r}`.
    pub fn lp_norm(&self, r: f64) -> f64 {
        if r.is_infinite() {
            return self.sup_abs();
        }
        let s: f64 = self.values.iter().zip(&self.grid.weights).map(|(v, w)| w * v.abs().powf(r)).sum();
        s.powf(1.0 / r)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite(i)),
            None => Ok(()),
        }
    }
}

/// Natural cubic spline through strictly increasing knots.
#[derive(Debug, Clone)]
struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidParameter("tabulated potential needs at least 3 points".into()));
        }
        let x: Vec<f64> = points.iter().map(|p| p.0).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        if x.windows(2).any(|w| !(w[1] > w[0])) || y.iter().chain(&x).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("tabulated abscissae must be finite and strictly increasing".into()));
        }
        let n = x.len();
        let mut m = vec![0.0; n];
        // Thomas algorithm on the interior second derivatives.
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let c = h1 / 6.0;
            let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            let denom = b - a * c_prime[i - 1];
            c_prime[i] = c / denom;
            d_prime[i] = (d - a * d_prime[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d_prime[i] - c_prime[i] * m[i + 1];
        }
        Ok(CubicSpline { x, y, m })
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Value, first and second derivative at `t`.
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (self.y[i + 1] - self.y[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2 = a * m0 + b * m1;
        (v, d1, d2)
    }
}

/// A probability measure `exp(-psi(x)) dx` on an interval of the real line.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct ModelMeasure1D {
    kind: MeasureKind,
    spline: Option<CubicSpline>,
    support: (f64, f64),
    nominal_support: (f64, f64),
    log_norm: f64,
    kappa: f64,
    semi_convex: bool,
    singular_points: Vec<f64>,
    panels: Vec<(f64, f64)>,
    cum_left: Vec<f64>,
    cum_right: Vec<f64>,
    grid: Arc<WeightedGrid>,
    mass_defect: f64,
    grid_size: usize,
}

impl ModelMeasure1D {
    /// Builds a model measure with a quadrature grid of about `grid_size` nodes.
    pub fn new(kind: MeasureKind, grid_size: usize) -> Result<Self> {
        if grid_size < 64 {
            return Err(Error::InvalidParameter(format!("grid_size {grid_size} < 64")));
        }
        let spline = match &kind {
            MeasureKind::Gaussian | MeasureKind::DoubleWell => None,
            MeasureKind::PExponential { p } => {
                if !(p.is_finite() && *p >= 1.0) {
                    return Err(Error::InvalidParameter(format!("p_exponential requires p >= 1, got {p}")));
                }
                None
            }
            MeasureKind::UniformInterval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::InvalidParameter(format!("uniform_interval requires a < b, got ({a}, {b})")));
                }
                None
            }
            MeasureKind::PowerAlpha { alpha } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(Error::InvalidParameter(format!("power_alpha requires alpha > 0, got {alpha}")));
                }
                None
            }
            MeasureKind::Tabulated { points } => Some(CubicSpline::new(points)?),
        };

        let mut mu = ModelMeasure1D {
            kind,
            spline,
            support: (0.0, 0.0),
            nominal_support: (0.0, 0.0),
            log_norm: 0.0,
            kappa: 0.0,
            semi_convex: true,
            singular_points: Vec::new(),
            panels: Vec::new(),
            cum_left: Vec::new(),
            cum_right: Vec::new(),
            grid: Arc::new(WeightedGrid { nodes: vec![0.0], weights: vec![1.0] }),
            mass_defect: 0.0,
            grid_size,
        };
        mu.init_geometry();
        mu.init_panels(grid_size);
        mu.init_normalisation();
        mu.init_grid()?;
        Ok(mu)
    }

    /// Convenience constructor with the default grid size.
    pub fn builtin(kind: MeasureKind) -> Result<Self> {
        Self::new(kind, DEFAULT_GRID_SIZE)
    }

    pub fn gaussian() -> Self {
        Self::builtin(MeasureKind::Gaussian).expect("gaussian is always valid")
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::builtin(MeasureKind::UniformInterval { a, b })
    }

    fn init_geometry(&mut self) {
        let ln_cut = -TRUNCATION_LEVEL.ln();
        match &self.kind {
            MeasureKind::Gaussian => {
                let x = (2.0 * ln_cut).sqrt();
                self.support = (-x, x);
                self.nominal_support = (f64::NEG_INFINITY, f64::INFINITY);
            }
            MeasureKind::PExponential { p } => {
                let x = ln_cut.powf(1.0 / p);
                self.support = (-x, x);
                self.nominal_support = (f64::NEG_INFINITY, f64::INFINITY);
                let even_integer = p.fract() == 0.0 && (*p as i64) % 2 == 0;
                if !even_integer {
                    self.singular_points.push(0.0);
                }
            }
            MeasureKind::UniformInterval { a, b } => {
                self.support = (*a, *b);
                self.nominal_support = (*a, *b);
            }
            MeasureKind::PowerAlpha { .. } => {
                self.support = (-1.0, 1.0);
                self.nominal_support = (-1.0, 1.0);
                self.kappa = f64::INFINITY;
                self.semi_convex = false;
                self.singular_points.push(0.0);
            }
            MeasureKind::DoubleWell => {
                // psi_raw - min psi_raw = ln_cut; min psi_raw = -1/4 at |x| = 1.
                let target = ln_cut - 0.25;
                let (mut lo, mut hi) = (1.0_f64, 100.0_f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid.powi(4) / 4.0 - mid * mid / 2.0 < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                self.support = (-hi, hi);
                self.nominal_support = (f64::NEG_INFINITY, f64::INFINITY);
                self.kappa = 1.0;
            }
            MeasureKind::Tabulated { points } => {
                let lo = points[0].0;
                let hi = points[points.len() - 1].0;
                self.support = (lo, hi);
                self.nominal_support = (lo, hi);
                let spline = self.spline.as_ref().expect("tabulated has spline");
                // psi'' is piecewise linear, extreme values sit on the knots.
                let min_d2 = spline.m.iter().cloned().fold(f64::INFINITY, f64::min);
                self.kappa = (-min_d2).max(0.0);
            }
        }
    }

    fn init_panels(&mut self, grid_size: usize) {
        let n_panels = (grid_size / GL_ORDER).max(8);
        let (lo, hi) = self.support;
        let mut breaks = vec![lo];
        for &s in &self.singular_points {
            if s > lo && s < hi {
                breaks.push(s);
            }
        }
        breaks.push(hi);
        let levels = (grid_size as f64).log2().ceil() as i32;
        let width = hi - lo;
        let mut panels = Vec::new();
        for seg in breaks.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let count = (((b - a) / width) * n_panels as f64).round().max(1.0) as usize;
            let h = (b - a) / count as f64;
            let left_singular = self.singular_points.contains(&a);
            let right_singular = self.singular_points.contains(&b);
            for k in 0..count {
                let pa = a + k as f64 * h;
                let pb = if k + 1 == count { b } else { a + (k + 1) as f64 * h };
                if k == 0 && left_singular {
                    let mut edges: Vec<f64> = (0..=levels).map(|j| pa + (pb - pa) * 2f64.powi(-j)).collect();
                    edges.push(pa);
                    edges.reverse();
                    for e in edges.windows(2) {
                        panels.push((e[0], e[1]));
                    }
                } else if k + 1 == count && right_singular {
                    let mut edges: Vec<f64> = (0..=levels).map(|j| pb - (pb - pa) * 2f64.powi(-j)).collect();
                    edges.push(pb);
                    for e in edges.windows(2) {
                        panels.push((e[0], e[1]));
                    }
                } else {
                    panels.push((pa, pb));
                }
            }
        }
        self.panels = panels;
    }

    fn analytic_log_norm(&self) -> Option<f64> {
        match &self.kind {
            MeasureKind::Gaussian => Some(0.5 * (2.0 * std::f64::consts::PI).ln()),
            MeasureKind::PExponential { p } => Some((2.0 * libm::tgamma(1.0 + 1.0 / p)).ln()),
            MeasureKind::UniformInterval { a, b } => Some((b - a).ln()),
            MeasureKind::PowerAlpha { alpha } => Some((2.0 / (1.0 + alpha)).ln()),
            _ => None,
        }
    }

    fn init_normalisation(&mut self) {
        // Shift by the smallest sampled potential to keep exp() in range.
        let shift = self
            .panels
            .iter()
            .flat_map(|&(a, b)| [a, 0.5 * (a + b), b])
            .map(|x| self.raw_psi(x))
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min);
        let tol = Tolerance { rel: 1e-15, abs: 0.0, max_intervals: 200 };
        let masses: Vec<f64> = self
            .panels
            .iter()
            .map(|&(a, b)| quadrature::adaptive(|x| (-(self.raw_psi(x) - shift)).exp(), a, b, tol).value)
            .collect();
        let total: f64 = masses.iter().sum();
        self.log_norm = match self.analytic_log_norm() {
            Some(l) => l,
            None => total.ln() - shift,
        };
        let scale = (-shift - self.log_norm).exp();
        let mut left = vec![0.0; masses.len() + 1];
        for (i, m) in masses.iter().enumerate() {
            left[i + 1] = left[i] + m * scale;
        }
        let mut right = vec![0.0; masses.len() + 1];
        for i in (0..masses.len()).rev() {
            right[i] = right[i + 1] + masses[i] * scale;
        }
        self.cum_left = left;
        self.cum_right = right;
    }

    fn init_grid(&mut self) -> Result<()> {
        let rule = quadrature::gauss_legendre(GL_ORDER);
        let mut nodes = Vec::with_capacity(self.panels.len() * GL_ORDER);
        let mut weights = Vec::with_capacity(self.panels.len() * GL_ORDER);
        for &(a, b) in &self.panels {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, w) in rule.0.iter().zip(&rule.1) {
                let node = mid + half * x;
                nodes.push(node);
                weights.push(w * half * self.density(node));
            }
        }
        let total: f64 = weights.iter().sum();
        self.mass_defect = (total - 1.0).abs();
        if self.mass_defect > MAX_MASS_DEFECT {
            return Err(Error::GridTooCoarse { defect: self.mass_defect, limit: MAX_MASS_DEFECT });
        }
        self.grid = Arc::new(WeightedGrid::new(nodes, weights)?);
        Ok(())
    }

    fn raw_psi(&self, x: f64) -> f64 {
        match &self.kind {
            MeasureKind::Gaussian => 0.5 * x * x,
            MeasureKind::PExponential { p } => x.abs().powf(*p),
            MeasureKind::UniformInterval { .. } => 0.0,
            MeasureKind::PowerAlpha { alpha } => -alpha * x.abs().ln(),
            MeasureKind::DoubleWell => 0.25 * x.powi(4) - 0.5 * x * x,
            MeasureKind::Tabulated { .. } => self.spline.as_ref().expect("spline").eval(x).0,
        }
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn label(&self) -> String {
        self.kind.label()
    }

    /// Effective (possibly truncated) support.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Support before truncation; infinite ends for unbounded measures.
    pub fn nominal_support(&self) -> (f64, f64) {
        self.nominal_support
    }

    pub fn is_truncated(&self) -> bool {
        self.support != self.nominal_support
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// `sup max(-psi'', 0)`; infinite when the measure is not semi-convex.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn is_semi_convex(&self) -> bool {
        self.semi_convex && self.kappa.is_finite()
    }

    /// Log-concave: semi-convex with `kappa = 0`.
    pub fn is_log_concave(&self) -> bool {
        self.is_semi_convex() && self.kappa == 0.0
    }

    /// Whether the measure is symmetric about the origin.
    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            MeasureKind::UniformInterval { a, b } => a == &-b,
            MeasureKind::Tabulated { .. } => false,
            _ => true,
        }
    }

    /// Points where the potential is not smooth; quadrature is graded there.
    pub fn singular_points(&self) -> &[f64] {
        &self.singular_points
    }

    pub fn grid(&self) -> &Arc<WeightedGrid> {
        &self.grid
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn panels(&self) -> &[(f64, f64)] {
        &self.panels
    }

    /// `|sum of quadrature weights - 1|`.
    pub fn mass_defect(&self) -> f64 {
        self.mass_defect
    }

    fn inside(&self, x: f64) -> bool {
        x >= self.nominal_support.0 && x <= self.nominal_support.1
    }

    /// Normalised potential `psi = psi_raw + log Z`; `+inf` off the support.
    pub fn psi(&self, x: f64) -> f64 {
        if !self.inside(x) {
            return f64::INFINITY;
        }
        self.raw_psi(x) + self.log_norm
    }

    /// `psi'`; NaN on the exceptional set.
    pub fn psi1(&self, x: f64) -> f64 {
        match &self.kind {
            MeasureKind::Gaussian => x,
            MeasureKind::PExponential { p } => p * x.abs().powf(p - 1.0) * x.signum(),
            MeasureKind::UniformInterval { .. } => 0.0,
            MeasureKind::PowerAlpha { alpha } => -alpha / x,
            MeasureKind::DoubleWell => x * x * x - x,
            MeasureKind::Tabulated { .. } => self.spline.as_ref().expect("spline").eval(x).1,
        }
    }

    /// `psi''`; for `p_exponential` with `p < 2` the value away from 0.
    pub fn psi2(&self, x: f64) -> f64 {
        match &self.kind {
            MeasureKind::Gaussian => 1.0,
            MeasureKind::PExponential { p } => {
                if *p == 1.0 {
                    0.0
                } else {
                    p * (p - 1.0) * x.abs().powf(p - 2.0)
                }
            }
            MeasureKind::UniformInterval { .. } => 0.0,
            MeasureKind::PowerAlpha { alpha } => alpha / (x * x),
            MeasureKind::DoubleWell => 3.0 * x * x - 1.0,
            MeasureKind::Tabulated { .. } => self.spline.as_ref().expect("spline").eval(x).2,
        }
    }

    /// Density `exp(-psi)`; zero off the support.
    pub fn density(&self, x: f64) -> f64 {
        if !self.inside(x) {
            return 0.0;
        }
        match &self.kind {
            MeasureKind::PowerAlpha { alpha } => 0.5 * (1.0 + alpha) * x.abs().powf(*alpha),
            _ => (-self.psi(x)).exp(),
        }
    }

    fn panel_index(&self, x: f64) -> usize {
        let idx = self.panels.partition_point(|p| p.1 < x);
        idx.min(self.panels.len() - 1)
    }

    /// Numeric kinds integrate from whichever end carries less mass, so that
    /// `cdf(x) + sf(x) == 1` holds exactly and tails keep full precision.
    fn upper_side(&self, x: f64) -> bool {
        let k = self.panel_index(x);
        self.cum_left[k] >= 0.5 || (self.cum_left[k + 1] > 0.5 && x >= 0.5 * (self.panels[k].0 + self.panels[k].1))
    }

    fn panel_integral(&self, a: f64, b: f64) -> f64 {
        let tol = Tolerance { rel: 1e-15, abs: 0.0, max_intervals: 100 };
        quadrature::adaptive(|x| self.density(x), a, b, tol).value
    }

    /// Mass of `(-inf, x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support;
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match &self.kind {
            MeasureKind::Gaussian => 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2),
            MeasureKind::UniformInterval { a, b } => (x - a) / (b - a),
            MeasureKind::PowerAlpha { alpha } => 0.5 * (1.0 + x.signum() * x.abs().powf(1.0 + alpha)),
            _ => {
                if self.upper_side(x) {
                    return 1.0 - self.sf(x);
                }
                let k = self.panel_index(x);
                let (a, _) = self.panels[k];
                (self.cum_left[k] + self.panel_integral(a, x)).clamp(0.0, 1.0)
            }
        }
    }

    /// Mass of `[x, inf)`, accurate in the right tail.
    pub fn sf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support;
        if x <= lo {
            return 1.0;
        }
        if x >= hi {
            return 0.0;
        }
        match &self.kind {
            MeasureKind::Gaussian => 0.5 * libm::erfc(x / std::f64::consts::SQRT_2),
            MeasureKind::UniformInterval { a, b } => (b - x) / (b - a),
            MeasureKind::PowerAlpha { alpha } => 0.5 * (1.0 - x.signum() * x.abs().powf(1.0 + alpha)),
            _ => {
                if !self.upper_side(x) {
                    return 1.0 - self.cdf(x);
                }
                let k = self.panel_index(x);
                let (_, b) = self.panels[k];
                (self.cum_right[k + 1] + self.panel_integral(x, b)).clamp(0.0, 1.0)
            }
        }
    }

    /// Mass of `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        // Subtract on the side where both tails are small.
        if a >= 0.0 {
            (self.sf(a) - self.sf(b)).max(0.0)
        } else {
            (self.cdf(b) - self.cdf(a)).max(0.0)
        }
    }

    /// Generalised inverse of the CDF.
    pub fn quantile(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::ProbabilityOutOfRange(t));
        }
        if t <= 0.5 {
            Ok(self.invert(t, false))
        } else {
            Ok(self.invert(1.0 - t, true))
        }
    }

    /// Point `x` with `mu[x, inf) = s`; accurate for small `s`.
    pub fn upper_quantile(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::ProbabilityOutOfRange(s));
        }
        if s <= 0.5 {
            Ok(self.invert(s, true))
        } else {
            Ok(self.invert(1.0 - s, false))
        }
    }

    /// Solves `cdf(x) = m` (or `sf(x) = m` when `upper`) for `m <= 1/2`.
    fn invert(&self, m: f64, upper: bool) -> f64 {
        let (lo, hi) = self.support;
        if m <= 0.0 {
            return if upper { hi } else { lo };
        }
        match &self.kind {
            MeasureKind::UniformInterval { a, b } => {
                return if upper { b - m * (b - a) } else { a + m * (b - a) };
            }
            MeasureKind::PowerAlpha { alpha } => {
                let r = (1.0 - 2.0 * m).max(0.0).powf(1.0 / (1.0 + alpha));
                return if upper { r } else { -r };
            }
            _ => {}
        }
        // g(x) increasing in x, root of g(x) = 0.
        let g = |x: f64| if upper { m - self.sf(x) } else { self.cdf(x) - m };
        let (mut a, mut b) = (lo, hi);
        let mut x = match self.is_symmetric() {
            true => 0.0,
            false => 0.5 * (lo + hi),
        };
        // Narrow the bracket to the panel holding the target mass.
        if !self.panels.is_empty() {
            let np = self.panels.len();
            let k = if upper {
                self.cum_right.partition_point(|&c| c > m).saturating_sub(1).min(np - 1)
            } else {
                self.cum_left.partition_point(|&c| c <= m).saturating_sub(1).min(np - 1)
            };
            let (pa, pb) = self.panels[k];
            let pad = 1e-12 * (1.0 + pa.abs().max(pb.abs()));
            a = (pa - pad).max(lo);
            b = (pb + pad).min(hi);
            x = 0.5 * (a + b);
        }
        for _ in 0..300 {
            let gx = g(x);
            if gx == 0.0 {
                return x;
            }
            if gx < 0.0 {
                a = x;
            } else {
                b = x;
            }
            let rho = self.density(x);
            let mut next = if rho > 0.0 { x - gx / rho } else { f64::NAN };
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || b - a <= 1e-15 * (1.0 + x.abs()) {
                return next;
            }
            x = next;
        }
        x
    }

    /// `E_mu f` for a function sampled on this measure's grid.
    pub fn expectation_of(&self, f: &GridFunction) -> Result<f64> {
        self.check_domain(f)?;
        Ok(f.expectation())
    }

    /// A median `M_mu f` on the discrete measure.
    pub fn median_of(&self, f: &GridFunction) -> Result<f64> {
        self.check_domain(f)?;
        Ok(f.median())
    }

    fn check_domain(&self, f: &GridFunction) -> Result<()> {
        if Arc::ptr_eq(f.grid(), &self.grid) || **f.grid() == *self.grid {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    /// Samples `f` on this measure's quadrature grid.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::sample(&self.grid, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_density_at_origin() {
        let mu = ModelMeasure1D::gaussian();
        assert!((mu.density(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(mu.kappa(), 0.0);
        assert!(mu.is_truncated());
    }

    #[test]
    fn uniform_density_and_quantile() {
        let mu = ModelMeasure1D::uniform(-1.0, 1.0).unwrap();
        assert_eq!(mu.density(0.3), 0.5);
        assert_eq!(mu.kappa(), 0.0);
        assert!((mu.quantile(0.25).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn p_exponential_two_is_log_concave() {
        let mu = ModelMeasure1D::builtin(MeasureKind::PExponential { p: 2.0 }).unwrap();
        assert_eq!(mu.kappa(), 0.0);
        assert_eq!(mu.psi2(0.7), 2.0);
        // psi = x^2 + log Z_2 with Z_2 = 2 Gamma(3/2) = sqrt(pi)
        assert!((mu.psi(0.5) - (0.25 + std::f64::consts::PI.sqrt().ln())).abs() < 1e-14);
    }

    #[test]
    fn power_alpha_flags_non_semi_convexity() {
        let mu = ModelMeasure1D::builtin(MeasureKind::PowerAlpha { alpha: 0.5 }).unwrap();
        assert!(mu.kappa().is_infinite());
        assert!(!mu.is_semi_convex());
        assert_eq!(mu.support(), (-1.0, 1.0));
        assert_eq!(mu.density(0.0), 0.0);
    }

    #[test]
    fn double_well_kappa_is_one() {
        let mu = ModelMeasure1D::builtin(MeasureKind::DoubleWell).unwrap();
        assert_eq!(mu.kappa(), 1.0);
        assert!(mu.mass_defect() < 1e-10);
    }

    #[test]
    fn p_exponential_four_cdf_matches_high_precision_quadrature() {
        let mu = ModelMeasure1D::builtin(MeasureKind::PExponential { p: 4.0 }).unwrap();
        // 1/2 + int_0^0.7 exp(-x^4) dx / (2 Gamma(5/4)), 30-digit quadrature
        assert!((mu.cdf(0.7) - 0.868_770_581_842_466_6).abs() < 1e-13);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(ModelMeasure1D::builtin(MeasureKind::PExponential { p: 0.5 }).is_err());
        assert!(ModelMeasure1D::builtin(MeasureKind::PowerAlpha { alpha: 0.0 }).is_err());
        assert!(ModelMeasure1D::builtin(MeasureKind::UniformInterval { a: 1.0, b: 1.0 }).is_err());
        assert!(ModelMeasure1D::new(MeasureKind::Gaussian, 32).is_err());
        let mu = ModelMeasure1D::gaussian();
        assert!(matches!(mu.quantile(1.5), Err(Error::ProbabilityOutOfRange(_))));
    }

    #[test]
    fn median_and_expectation_on_constants_and_symmetric_functions() {
        let mu = ModelMeasure1D::gaussian();
        let c = GridFunction::constant(mu.grid(), 3.5);
        assert!((mu.expectation_of(&c).unwrap() - 3.5).abs() < 1e-12);
        assert_eq!(mu.median_of(&c).unwrap(), 3.5);
        let x = mu.sample(|x| x);
        assert!(mu.expectation_of(&x).unwrap().abs() < 1e-12);
        assert!(mu.median_of(&x).unwrap().abs() < 0.01);
        let uni = ModelMeasure1D::uniform(0.0, 1.0).unwrap();
        let sq = uni.sample(|x| x * x);
        assert!((uni.expectation_of(&sq).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn median_satisfies_half_mass_conditions() {
        let mu = ModelMeasure1D::gaussian();
        let f = mu.sample(|x| (x - 0.3).exp().min(5.0));
        let m = f.median();
        let g = mu.grid();
        assert!(g.mass_where(f.values(), |v| v >= m) >= 0.5 - 1e-12);
        assert!(g.mass_where(f.values(), |v| v <= m) >= 0.5 - 1e-12);
    }

    #[test]
    fn domain_mismatch_is_detected() {
        let a = ModelMeasure1D::gaussian();
        let b = ModelMeasure1D::uniform(-1.0, 1.0).unwrap();
        let f = b.sample(|x| x);
        assert_eq!(a.expectation_of(&f), Err(Error::DomainMismatch));
    }

    #[test]
    fn tabulated_quadratic_reproduces_gaussian_shape() {
        let pts: Vec<(f64, f64)> = (0..=80).map(|i| {
            let x = -8.0 + 0.2 * i as f64;
            (x, 0.5 * x * x)
        }).collect();
        let mu = ModelMeasure1D::builtin(MeasureKind::Tabulated { points: pts }).unwrap();
        assert!(mu.mass_defect() < 1e-10);
        assert!((mu.density(0.0) - 0.398_942_280_401_432_7).abs() < 1e-6);
        assert!(mu.kappa() < 1e-6);
        assert!((mu.cdf(0.0) - 0.5).abs() < 1e-6);
    }
}

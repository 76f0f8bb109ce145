//! The diffusion semigroup `P_t = exp(t L)`, `L f = f'' - psi' f'`, on a
//! uniform grid with reflecting ends, and numerical checks of the
//! inequalities it satisfies.
//!
//! The discrete generator is `L = W^{-1} A` with `W` the diagonal of cell
//! masses and `A` the symmetric stiffness matrix with conductances
//! `rho(x_{i+1/2}) / h`. It is self-adjoint in `l2(W)` and kills constants
//! exactly; the theta-scheme inherits both properties.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{GridFunction, ModelMeasure1D, WeightedGrid};
use crate::orlicz::{self, NFunction};
use crate::quadrature::{self, Tolerance};
use crate::report::{Leg, VerificationReport};
use crate::transitions::{self, BracketVariant, InequalityConstant};

/// Spatial and temporal resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub nodes: usize,
    pub dt: f64,
    /// Implicitness in `[1/2, 1]`; `1/2` is Crank-Nicolson.
    pub theta: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { nodes: 2001, dt: 1e-3, theta: 0.5 }
    }
}

/// Factorised `W - theta dt A` for repeated tridiagonal solves.
#[derive(Debug, Clone)]
struct Stepper {
    theta: f64,
    dt: f64,
    /// Thomas forward-sweep coefficients.
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SemigroupSolver {
    measure: ModelMeasure1D,
    grid: Arc<WeightedGrid>,
    h: f64,
    /// `c[e]` couples nodes `e` and `e + 1`.
    conductance: Vec<f64>,
    params: SolverParams,
    stepper: Stepper,
}

/// Output of [`SemigroupSolver::evolve_detailed`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub value: GridFunction,
    /// Implicitness actually used; `1` after a positivity fallback.
    pub theta: f64,
}

impl SemigroupSolver {
    pub fn new(measure: &ModelMeasure1D, params: SolverParams) -> Result<Self> {
        if params.nodes < 16 {
            return Err(Error::InvalidParameter(format!("solver needs at least 16 nodes, got {}", params.nodes)));
        }
        if !(params.dt > 0.0 && params.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {}", params.dt)));
        }
        if !(0.5..=1.0).contains(&params.theta) {
            return Err(Error::Unstable(format!("theta = {} is outside [1/2, 1]", params.theta)));
        }
        let (lo, hi) = measure.support();
        let n = params.nodes;
        let h = (hi - lo) / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| if i == n - 1 { hi } else { lo + i as f64 * h }).collect();
        let mut weights: Vec<f64> = (0..n)
            .map(|i| {
                let a = if i == 0 { lo } else { nodes[i] - 0.5 * h };
                let b = if i == n - 1 { hi } else { nodes[i] + 0.5 * h };
                measure.mass(a, b)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let conductance: Vec<f64> = (0..n - 1).map(|e| measure.density(nodes[e] + 0.5 * h) / (h * total)).collect();
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Degenerate("a solver cell carries no mass".into()));
        }
        let grid = Arc::new(WeightedGrid::new(nodes, weights)?);
        let stepper = Self::factor(&grid.weights, &conductance, params.theta, params.dt);
        Ok(SemigroupSolver { measure: measure.clone(), grid, h, conductance, params, stepper })
    }

    fn factor(w: &[f64], c: &[f64], theta: f64, dt: f64) -> Stepper {
        let n = w.len();
        let s = theta * dt;
        let diag = |i: usize| {
            let left = if i > 0 { c[i - 1] } else { 0.0 };
            let right = if i + 1 < n { c[i] } else { 0.0 };
            w[i] + s * (left + right)
        };
        let mut upper = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_upper = 0.0;
        for i in 0..n {
            let sub = if i > 0 { -s * c[i - 1] } else { 0.0 };
            let pivot = diag(i) - sub * prev_upper;
            inv_pivot[i] = 1.0 / pivot;
            let sup = if i + 1 < n { -s * c[i] } else { 0.0 };
            upper[i] = sup * inv_pivot[i];
            prev_upper = upper[i];
        }
        Stepper { theta, dt, upper, inv_pivot }
    }

    pub fn measure(&self) -> &ModelMeasure1D {
        &self.measure
    }

    pub fn params(&self) -> SolverParams {
        self.params
    }

    pub fn grid(&self) -> &Arc<WeightedGrid> {
        &self.grid
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::sample(&self.grid, f)
    }

    /// `(A u)_i = sum_j c_ij (u_j - u_i)`.
    fn apply_stiffness(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        for o in out.iter_mut() {
            *o = 0.0;
        }
        for e in 0..n - 1 {
            let flux = self.conductance[e] * (u[e + 1] - u[e]);
            out[e] += flux;
            out[e + 1] -= flux;
        }
    }

    /// `L u` at every node.
    pub fn generator(&self, f: &GridFunction) -> Result<GridFunction> {
        self.check(f)?;
        let mut out = vec![0.0; f.values().len()];
        self.apply_stiffness(f.values(), &mut out);
        for (o, w) in out.iter_mut().zip(&self.grid.weights) {
            *o /= w;
        }
        GridFunction::from_values(&self.grid, out)
    }

    fn step(&self, st: &Stepper, u: &mut [f64], scratch: &mut [f64]) {
        let n = u.len();
        self.apply_stiffness(u, scratch);
        let explicit = (1.0 - st.theta) * st.dt;
        for i in 0..n {
            scratch[i] = self.grid.weights[i] * u[i] + explicit * scratch[i];
        }
        // Thomas: forward sweep then back substitution.
        let s = st.theta * st.dt;
        let mut prev = 0.0;
        for i in 0..n {
            let sub = if i > 0 { -s * self.conductance[i - 1] } else { 0.0 };
            let v = (scratch[i] - sub * prev) * st.inv_pivot[i];
            scratch[i] = v;
            prev = v;
        }
        u[n - 1] = scratch[n - 1];
        for i in (0..n - 1).rev() {
            u[i] = scratch[i] - st.upper[i] * u[i + 1];
        }
    }

    fn check(&self, f: &GridFunction) -> Result<()> {
        if !Arc::ptr_eq(f.grid(), &self.grid) && **f.grid() != *self.grid {
            return Err(Error::DomainMismatch);
        }
        f.check_finite()
    }

    fn run(&self, theta: f64, u0: &[f64], times: &[f64]) -> Result<Vec<Vec<f64>>> {
        let main = if theta == self.stepper.theta {
            self.stepper.clone()
        } else {
            Self::factor(&self.grid.weights, &self.conductance, theta, self.params.dt)
        };
        let mut u = u0.to_vec();
        let mut scratch = vec![0.0; u.len()];
        let mut now = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            if !(t >= now) {
                return Err(Error::InvalidParameter("evolution times must be nondecreasing and >= 0".into()));
            }
            let steps = ((t - now) / main.dt * (1.0 + 1e-12)).floor() as usize;
            for _ in 0..steps {
                self.step(&main, &mut u, &mut scratch);
            }
            let rest = t - now - steps as f64 * main.dt;
            if rest > 1e-9 * main.dt {
                let partial = Self::factor(&self.grid.weights, &self.conductance, theta, rest);
                self.step(&partial, &mut u, &mut scratch);
            }
            if let Some(i) = u.iter().position(|v| !v.is_finite()) {
                return Err(Error::Unstable(format!("non-finite value at node {i}")));
            }
            now = t;
            out.push(u.clone());
        }
        Ok(out)
    }

    /// `P_t f0` at each of the nondecreasing `times`. When `f0 >= 0` and the
    /// trapezoidal scheme produces a negative value the whole run is
    /// repeated with `theta = 1`.
    pub fn evolve_many(&self, f0: &GridFunction, times: &[f64]) -> Result<Vec<Evolution>> {
        self.check(f0)?;
        let mut theta = self.params.theta;
        let mut runs = self.run(theta, f0.values(), times)?;
        let nonneg = f0.values().iter().all(|v| *v >= 0.0);
        if nonneg && theta < 1.0 && runs.iter().flatten().any(|v| *v < -1e-12) {
            theta = 1.0;
            runs = self.run(theta, f0.values(), times)?;
        }
        runs.into_iter()
            .map(|v| Ok(Evolution { value: GridFunction::from_values(&self.grid, v)?, theta }))
            .collect()
    }

    pub fn evolve_detailed(&self, f0: &GridFunction, t: f64) -> Result<Evolution> {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
        }
        Ok(self.evolve_many(f0, &[t])?.remove(0))
    }

    /// `P_t f0`.
    pub fn evolve(&self, f0: &GridFunction, t: f64) -> Result<GridFunction> {
        Ok(self.evolve_detailed(f0, t)?.value)
    }

    /// Central differences in the interior, one-sided at the ends.
    pub fn gradient(&self, f: &GridFunction) -> Vec<f64> {
        let v = f.values();
        let n = v.len();
        (0..n)
            .map(|i| {
                if i == 0 {
                    (v[1] - v[0]) / self.h
                } else if i == n - 1 {
                    (v[n - 1] - v[n - 2]) / self.h
                } else {
                    (v[i + 1] - v[i - 1]) / (2.0 * self.h)
                }
            })
            .collect()
    }

    /// `int |f'| dmu` with edge differences.
    pub fn gradient_l1(&self, f: &GridFunction) -> f64 {
        let v = f.values();
        self.conductance.iter().enumerate().map(|(e, c)| c * (v[e + 1] - v[e]).abs()).sum()
    }
}

/// `K(kappa, t) = (1 - e^{-2 kappa t}) / kappa`, `2t` at `kappa = 0`.
pub fn k_const(kappa: f64, t: f64) -> f64 {
    if kappa == 0.0 {
        2.0 * t
    } else {
        -(-2.0 * kappa * t).exp_m1() / kappa
    }
}

/// `int_0^t ds / sqrt(K(kappa, s))`.
pub fn dual_time_integral(kappa: f64, t: f64) -> f64 {
    if kappa == 0.0 {
        (2.0 * t).sqrt()
    } else {
        (-(-2.0 * kappa * t).exp_m1()).sqrt().atanh() / kappa.sqrt()
    }
}

/// `int_0^t K(kappa, s)^{(q-2)/2} ds`.
pub fn decay_time_integral(kappa: f64, q: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let e = (q - 2.0) / 2.0;
    if kappa == 0.0 {
        return 2f64.powf(e) * t.powf(e + 1.0) / (e + 1.0);
    }
    quadrature::adaptive(|s| k_const(kappa, s).powf(e), 0.0, t, Tolerance::rel(1e-13)).value
}

const TOL_GRADIENT: f64 = 1e-3;
pub const REF_GRADIENT: &str = "reverse Poincare: K |grad P_t f|^2 <= P_t(f^2) - (P_t f)^2";
pub const REF_DUAL: &str = "L1 smoothing: ||f - P_t f||_1 <= int_0^t ds/sqrt(K) ||f'||_1";
pub const REF_ROUGH: &str = "rough estimate: int_0^t ds/sqrt(K) <= 2 sqrt(t) for t <= 1/(2 kappa)";
pub const REF_DECAY_HIGH: &str = "L2 decay under an Orlicz-Sobolev inequality, q >= 2";
pub const REF_DECAY_LOW: &str = "L_q decay under an Orlicz-Sobolev inequality, q <= 2";

fn solver_env(report: &mut VerificationReport, s: &SemigroupSolver) {
    report.env("measure", s.measure.label());
    report.env("kappa", if s.measure.kappa().is_finite() { Some(s.measure.kappa()) } else { None });
    report.env("nodes", s.params.nodes);
    report.env("h", s.h);
    report.env("dt", s.params.dt);
    report.env("theta", s.params.theta);
}

fn finite_kappa(s: &SemigroupSolver) -> Result<f64> {
    let k = s.measure.kappa();
    if !k.is_finite() {
        return Err(Error::Hypothesis(format!("{} has no finite semi-convexity constant", s.measure.label())));
    }
    Ok(k)
}

/// Pointwise check of `K |grad P_t f|^2 <= P_t(f^2) - (P_t f)^2` at interior
/// nodes for each time; one leg per time at the worst node.
pub fn verify_gradient_estimate(s: &SemigroupSolver, f0: &GridFunction, times: &[f64]) -> Result<VerificationReport> {
    let kappa = finite_kappa(s)?;
    let mut report = VerificationReport::new(format!("gradient estimate on {}", s.measure.label()));
    solver_env(&mut report, s);
    let sq = f0.map(|v| v * v);
    let pf = s.evolve_many(f0, times)?;
    let pf2 = s.evolve_many(&sq, times)?;
    for ((&t, u), u2) in times.iter().zip(&pf).zip(&pf2) {
        let k = k_const(kappa, t);
        let g = s.gradient(&u.value);
        let (uv, u2v) = (u.value.values(), u2.value.values());
        let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in 1..uv.len() - 1 {
            let lhs = k * g[i] * g[i];
            let rhs = u2v[i] - uv[i] * uv[i];
            if lhs - rhs > worst.0 {
                worst = (lhs - rhs, lhs, rhs);
            }
        }
        report.push(Leg::check(format!("gradient @t={t}"), REF_GRADIENT, worst.1, worst.2, TOL_GRADIENT));
    }
    Ok(report)
}

/// `||f - P_t f||_1 <= int_0^t ds / sqrt(K) ||f'||_1`, plus the rough time
/// bound when `t <= 1 / (2 kappa)`.
pub fn verify_dual_l1(s: &SemigroupSolver, f0: &GridFunction, times: &[f64]) -> Result<VerificationReport> {
    let kappa = finite_kappa(s)?;
    let mut report = VerificationReport::new(format!("L1 smoothing on {}", s.measure.label()));
    solver_env(&mut report, s);
    let grad = s.gradient_l1(f0);
    let pf = s.evolve_many(f0, times)?;
    for (&t, u) in times.iter().zip(&pf) {
        let diff: Vec<f64> = f0.values().iter().zip(u.value.values()).map(|(a, b)| (a - b).abs()).collect();
        let lhs = s.grid.integrate(&diff);
        let coef = dual_time_integral(kappa, t);
        let rhs = coef * grad;
        report.push(Leg::check(format!("dual L1 @t={t}"), REF_DUAL, lhs, rhs, 1e-9 + 1e-6 * rhs));
        if kappa == 0.0 || t <= 0.5 / kappa {
            report.push(Leg::check(format!("rough @t={t}"), REF_ROUGH, coef, 2.0 * t.sqrt(), 1e-14));
        }
    }
    Ok(report)
}

/// A lower bound for the Orlicz-Sobolev constant with mean centring,
/// derived from a verified capacity bracket. It can only be built from such
/// a bracket, so the decay checks never run on an unverified constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteredConstant {
    value: f64,
    q: f64,
    nfunc: String,
    source: InequalityConstant,
}

impl CenteredConstant {
    /// Half the lower edge: recentring from median to mean costs at most 2.
    pub fn from_bracket(bracket: &InequalityConstant) -> Result<Self> {
        match &bracket.name {
            transitions::ConstantName::DOrlicz { n, q } => Ok(CenteredConstant {
                value: bracket.lower / 2.0,
                q: *q,
                nfunc: n.clone(),
                source: bracket.clone(),
            }),
            other => Err(Error::InvalidParameter(format!("{other} is not an Orlicz-Sobolev bracket"))),
        }
    }

    /// From the exact capacity profile of `mu` on `t_grid`.
    pub fn from_capacity(mu: &ModelMeasure1D, n: &NFunction, q: f64, t_grid: &[f64]) -> Result<Self> {
        let d2 = transitions::capacity_constant(mu, n, q, t_grid)?;
        let bracket = transitions::cap_to_orlicz_bracket(q, n, d2, BracketVariant::Strong, false)?;
        Self::from_bracket(&bracket)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn source(&self) -> &InequalityConstant {
        &self.source
    }

    fn check(&self, n: &NFunction, q: f64) -> Result<()> {
        if self.nfunc != n.label() || (self.q - q).abs() > 1e-15 {
            return Err(Error::Hypothesis(format!(
                "constant was verified for ({}, q = {}), not ({}, q = {q})",
                self.nfunc,
                self.q,
                n.label()
            )));
        }
        Ok(())
    }
}

fn centred(f0: &GridFunction) -> Result<()> {
    let e = f0.expectation();
    if e.abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("decay checks need a centred function, mean = {e:e}")));
    }
    Ok(())
}

/// Right-hand side of the `q >= 2` decay bound for given data.
pub fn decay_bound_high(l2sq: f64, sup: f64, dual: f64, d: f64, q: f64, time_integral: f64) -> f64 {
    if l2sq == 0.0 {
        return 0.0;
    }
    let m = 2.0 * d.powf(q) / (dual.powf(q) * sup.powf(q - 2.0));
    l2sq * (1.0 + (q - 1.0) * m * l2sq.powf(q - 1.0) * time_integral).powf(-1.0 / (q - 1.0))
}

/// Right-hand side of the `q <= 2` decay bound for given data.
pub fn decay_bound_low(lq: f64, l1: f64, dual: f64, d: f64, q: f64, t: f64) -> f64 {
    if lq == 0.0 {
        return 0.0;
    }
    let m = 2.0 * d * d / (l1.powf(2.0 * (2.0 - q) / (q - 1.0)) * dual * dual);
    lq * (1.0 + m * lq.powf(2.0 / (q * (q - 1.0))) * t).powf(-q * (q - 1.0) / 2.0)
}

/// `int (P_t f)^2 <= int f^2 (1 + (q-1) M int_0^t K^{(q-2)/2})^{-1/(q-1)}`
/// with `M = 2 D^q (int f^2)^{q-1} / (||f||_*^q ||f||_inf^{q-2})` and the
/// dual norm replaced by an upper bound.
pub fn verify_decay_high_q(
    s: &SemigroupSolver,
    f0: &GridFunction,
    q: f64,
    n: &NFunction,
    d: &CenteredConstant,
    times: &[f64],
) -> Result<VerificationReport> {
    if !(q >= 2.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("high-q decay needs q >= 2, got {q}")));
    }
    let kappa = finite_kappa(s)?;
    d.check(n, q)?;
    centred(f0)?;
    let mut report = VerificationReport::new(format!("decay (q = {q}) on {}", s.measure.label()));
    solver_env(&mut report, s);
    report.env("d_centred", d.value());
    report.env("d_source", &d.source().provenance);
    let l2sq = f0.lp_norm(2.0).powi(2);
    let sup = f0.sup_abs();
    let dual = orlicz::dual_norm_upper(&s.grid, f0.values(), n)?;
    report.env("dual_norm_upper", dual);
    let pf = s.evolve_many(f0, times)?;
    for (&t, u) in times.iter().zip(&pf) {
        let lhs = u.value.lp_norm(2.0).powi(2);
        let rhs = decay_bound_high(l2sq, sup, dual, d.value(), q, decay_time_integral(kappa, q, t));
        report.push(Leg::check(format!("decay q={q} @t={t}"), REF_DECAY_HIGH, lhs, rhs, 1e-6));
    }
    Ok(report)
}

/// `int |P_t f|^q <= int |f|^q (1 + M (int |f|^q)^{2/(q(q-1))} t)^{-q(q-1)/2}`
/// with `M = 2 D^2 / (||f||_1^{2(2-q)/(q-1)} ||f||_*^2)`.
pub fn verify_decay_low_q(
    s: &SemigroupSolver,
    f0: &GridFunction,
    q: f64,
    n: &NFunction,
    d: &CenteredConstant,
    times: &[f64],
) -> Result<VerificationReport> {
    if !(q > 1.0 && q <= 2.0) {
        return Err(Error::InvalidParameter(format!("low-q decay needs q in (1, 2], got {q}")));
    }
    finite_kappa(s)?;
    d.check(n, q)?;
    centred(f0)?;
    let mut report = VerificationReport::new(format!("decay (q = {q}) on {}", s.measure.label()));
    solver_env(&mut report, s);
    report.env("d_centred", d.value());
    report.env("d_source", &d.source().provenance);
    let lq = f0.lp_norm(q).powf(q);
    let l1 = f0.lp_norm(1.0);
    let dual = orlicz::dual_norm_upper(&s.grid, f0.values(), n)?;
    report.env("dual_norm_upper", dual);
    let pf = s.evolve_many(f0, times)?;
    for (&t, u) in times.iter().zip(&pf) {
        let lhs = u.value.lp_norm(q).powf(q);
        let rhs = decay_bound_low(lq, l1, dual, d.value(), q, t);
        report.push(Leg::check(format!("decay q={q} @t={t}"), REF_DECAY_LOW, lhs, rhs, 1e-6));
    }
    Ok(report)
}

/// A computed spectral gap with its refinement check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGap {
    /// Smallest nonzero eigenvalue of `-L`.
    pub lambda1: f64,
    /// The same on the grid with half the spacing.
    pub lambda1_fine: f64,
    /// `|lambda1 - lambda1_fine| / lambda1_fine`.
    pub refinement: f64,
}

impl SpectralGap {
    /// Poincare constant `sqrt(lambda1)`, from the finer grid.
    pub fn d_poin(&self) -> f64 {
        self.lambda1_fine.sqrt()
    }
}

const RICHARDSON_TOL: f64 = 4e-4;

/// Smallest nonzero eigenvalue of `-L` on the solver grid.
///
/// `-L` is similar to the symmetric tridiagonal `W^{-1/2} (-A) W^{-1/2}`;
/// its second eigenvalue is isolated by Sturm-sequence bisection.
pub fn lambda1(s: &SemigroupSolver) -> Result<f64> {
    let w = &s.grid.weights;
    let c = &s.conductance;
    let n = w.len();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let l = if i > 0 { c[i - 1] } else { 0.0 };
            let r = if i + 1 < n { c[i] } else { 0.0 };
            (l + r) / w[i]
        })
        .collect();
    let off2: Vec<f64> = (0..n - 1).map(|e| c[e] * c[e] / (w[e] * w[e + 1])).collect();
    // Number of eigenvalues below x.
    let count = |x: f64| -> usize {
        let mut k = 0;
        let mut d = diag[0] - x;
        if d < 0.0 {
            k += 1;
        }
        for i in 1..n {
            let prev = if d == 0.0 { f64::MIN_POSITIVE } else { d };
            d = diag[i] - x - off2[i - 1] / prev;
            if d < 0.0 {
                k += 1;
            }
        }
        k
    };
    let mut hi = 1.0;
    let mut guard = 0;
    while count(hi) < 2 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::EigenSolve("no second eigenvalue below 2^200".into()));
        }
    }
    // lambda_0 = 0 up to rounding, so counting from zero finds lambda_1.
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count(mid) >= 2 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `lambda1` at the solver resolution and at half the spacing; fails if the
/// two disagree by more than the refinement tolerance.
pub fn spectral_gap(s: &SemigroupSolver) -> Result<SpectralGap> {
    if !s.measure.kappa().is_finite() {
        return Err(Error::Hypothesis(format!("{} is not semi-convex", s.measure.label())));
    }
    let coarse = lambda1(s)?;
    let fine_params = SolverParams { nodes: 2 * s.params.nodes - 1, ..s.params };
    let fine = lambda1(&SemigroupSolver::new(&s.measure, fine_params)?)?;
    let refinement = (coarse - fine).abs() / fine;
    if refinement > RICHARDSON_TOL {
        return Err(Error::EigenSolve(format!("refinement change {refinement:.2e} exceeds {RICHARDSON_TOL:e}")));
    }
    Ok(SpectralGap { lambda1: coarse, lambda1_fine: fine, refinement })
}

/// Indicator of the right half-line of mass `a_mass`, as a grid function
/// on cells; returns it with its grid mass.
pub fn right_tail_indicator(s: &SemigroupSolver, a_mass: f64) -> Result<(GridFunction, f64)> {
    let cut = s.measure.upper_quantile(a_mass)?;
    let f = s.sample(|x| if x >= cut { 1.0 } else { 0.0 });
    let m = f.expectation();
    Ok((f, m))
}

/// `int |chi_A - P_t chi_A| dmu / (2 sqrt t)` for the right half-line `A`
/// of mass `a_mass`: a lower estimate of the boundary measure of `A` at
/// scale `t`. As `t -> 0` it tends to `rho(boundary) / sqrt(pi)`.
pub fn isoperimetric_via_semigroup(s: &SemigroupSolver, a_mass: f64, t: f64) -> Result<f64> {
    let kappa = finite_kappa(s)?;
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    if kappa > 0.0 && t > 0.5 / kappa {
        return Err(Error::InvalidParameter(format!("need t <= 1/(2 kappa) = {}", 0.5 / kappa)));
    }
    if !(0.0..=1.0).contains(&a_mass) {
        return Err(Error::ProbabilityOutOfRange(a_mass));
    }
    if a_mass == 0.0 || a_mass == 1.0 {
        return Ok(0.0);
    }
    let (chi, _) = right_tail_indicator(s, a_mass)?;
    let p = s.evolve(&chi, t)?;
    let diff: Vec<f64> = chi.values().iter().zip(p.values()).map(|(a, b)| (a - b).abs()).collect();
    Ok(s.grid.integrate(&diff) / (2.0 * t.sqrt()))
}

/// Both sides of `int |chi - P_t chi| = 2 (int (chi - m)^2 - int (P_{t/2}(chi - m))^2)`.
///
/// Runs the fully implicit scheme with `t/2` an exact multiple of the
/// step, where the identity holds for the discrete semigroup as well.
pub fn indicator_identity(s: &SemigroupSolver, a_mass: f64, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    let steps = (0.5 * t / s.params.dt).ceil().max(1.0);
    let implicit = SemigroupSolver::new(&s.measure, SolverParams { dt: 0.5 * t / steps, theta: 1.0, ..s.params })?;
    let (chi, m) = right_tail_indicator(&implicit, a_mass)?;
    let runs = implicit.evolve_many(&chi, &[0.5 * t, t])?;
    let full = &runs[1].value;
    let diff: Vec<f64> = chi.values().iter().zip(full.values()).map(|(a, b)| (a - b).abs()).collect();
    let lhs = implicit.grid.integrate(&diff);
    let c = chi.shifted(m);
    let half = runs[0].value.shifted(m);
    let rhs = 2.0 * (c.lp_norm(2.0).powi(2) - half.lp_norm(2.0).powi(2));
    Ok((lhs, rhs))
}

//! Run configuration shared by the command-line front end and the
//! examples. Measures and N-functions are given as short specs such as
//! `uniform:-1:1` or `phi:1.5`; t-grids as `lo:hi:n`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{MeasureKind, ModelMeasure1D, DEFAULT_GRID_SIZE};
use crate::orlicz::NFunction;
use crate::profile::{self, linear_grid};
use crate::semigroup::SolverParams;
use crate::transitions::ConstantSet;

/// Which function the semigroup checks start from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StartProbe {
    /// Seeded random cosine sum.
    #[default]
    Trig,
    /// `tanh` step at the median, three cells wide.
    Sign,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub measure: String,
    /// Defaults to `power:q`.
    pub nfunc: Option<String>,
    pub q: f64,
    pub tgrid: String,
    /// Quadrature nodes of the measure.
    pub grid: usize,
    /// Semigroup solver nodes.
    pub nodes: usize,
    pub dt: f64,
    pub theta: f64,
    /// Evolution times for the semigroup checks.
    pub times: Vec<f64>,
    pub probe: StartProbe,
    pub seed: u64,
    pub constants: ConstantSet,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverParams::default();
        RunConfig {
            measure: "gaussian".into(),
            nfunc: None,
            q: 2.0,
            tgrid: "0.01:0.5:50".into(),
            grid: DEFAULT_GRID_SIZE,
            nodes: solver.nodes,
            dt: solver.dt,
            theta: solver.theta,
            times: vec![0.1, 0.5, 1.0],
            probe: StartProbe::default(),
            seed: 0,
            constants: ConstantSet::default(),
            out: None,
        }
    }
}

impl RunConfig {
    /// Overlays the keys present in a JSON object onto `self`.
    pub fn overlay_json(&self, text: &str) -> Result<RunConfig> {
        let patch: serde_json::Value = serde_json::from_str(text)?;
        let serde_json::Value::Object(patch) = patch else {
            return Err(Error::Config("config file must hold a JSON object".into()));
        };
        let mut base = serde_json::to_value(self)?;
        let obj = base.as_object_mut().expect("config serialises to an object");
        for (k, v) in patch {
            obj.insert(k, v);
        }
        let merged: RunConfig = serde_json::from_value(base)?;
        merged.validate()?;
        Ok(merged)
    }

    pub fn overlay_file(&self, path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        self.overlay_json(&text)
    }

    /// Resolves every spec; errors are configuration errors.
    pub fn validate(&self) -> Result<()> {
        self.measure_kind()?;
        self.nfunction()?;
        self.t_grid()?;
        if !(self.q >= 1.0 && self.q.is_finite()) {
            return Err(Error::Config(format!("q must be finite and >= 1, got {}", self.q)));
        }
        if self.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::Config("times must be finite and >= 0".into()));
        }
        Ok(())
    }

    pub fn measure_kind(&self) -> Result<MeasureKind> {
        parse_measure(&self.measure)
    }

    pub fn build_measure(&self) -> Result<ModelMeasure1D> {
        ModelMeasure1D::new(self.measure_kind()?, self.grid)
    }

    pub fn nfunction(&self) -> Result<NFunction> {
        match &self.nfunc {
            Some(s) => parse_nfunction(s),
            None => Ok(NFunction::power(self.q)),
        }
    }

    pub fn t_grid(&self) -> Result<Vec<f64>> {
        parse_t_grid(&self.tgrid)
    }

    pub fn solver_params(&self) -> SolverParams {
        SolverParams { nodes: self.nodes, dt: self.dt, theta: self.theta }
    }
}

fn numbers(spec: &str, parts: &[&str], want: usize) -> Result<Vec<f64>> {
    if parts.len() != want {
        return Err(Error::Config(format!("`{spec}` needs {want} numeric parameter(s)")));
    }
    parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Config(format!("`{p}` in `{spec}` is not a number"))))
        .collect()
}

/// `gaussian`, `p_exponential:P`, `uniform:A:B`, `power_alpha:ALPHA`,
/// `double_well`.
pub fn parse_measure(spec: &str) -> Result<MeasureKind> {
    let mut it = spec.trim().split(':');
    let head = it.next().unwrap_or_default();
    let rest: Vec<&str> = it.collect();
    Ok(match head {
        "gaussian" => {
            numbers(spec, &rest, 0)?;
            MeasureKind::Gaussian
        }
        "double_well" => {
            numbers(spec, &rest, 0)?;
            MeasureKind::DoubleWell
        }
        "p_exponential" => MeasureKind::PExponential { p: numbers(spec, &rest, 1)?[0] },
        "uniform" | "uniform_interval" => {
            let v = numbers(spec, &rest, 2)?;
            MeasureKind::UniformInterval { a: v[0], b: v[1] }
        }
        "power_alpha" => MeasureKind::PowerAlpha { alpha: numbers(spec, &rest, 1)?[0] },
        other => return Err(Error::Config(format!("unknown measure `{other}`"))),
    })
}

/// `power:Q` or `phi:Q`.
pub fn parse_nfunction(spec: &str) -> Result<NFunction> {
    let mut it = spec.trim().split(':');
    let head = it.next().unwrap_or_default();
    let rest: Vec<&str> = it.collect();
    let n = match head {
        "power" => NFunction::power(numbers(spec, &rest, 1)?[0]),
        "phi" => NFunction::phi(numbers(spec, &rest, 1)?[0]),
        other => return Err(Error::Config(format!("unknown N-function `{other}`"))),
    };
    n.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(n)
}

/// `lo:hi:n`, linear, inside `(0, 1/2]`.
pub fn parse_t_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let v = numbers(spec, &parts, 3)?;
    let n = v[2];
    if !(n >= 1.0 && n.fract() == 0.0) {
        return Err(Error::Config(format!("t-grid `{spec}` is empty")));
    }
    let grid = if n == 1.0 { vec![v[0]] } else { linear_grid(v[0], v[1], n as usize) };
    profile::check_t_grid(&grid).map_err(|e| Error::Config(e.to_string()))?;
    Ok(grid)
}

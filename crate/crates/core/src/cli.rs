//! The `isocap` command line: profile tables, verification reports and
//! constant summaries.
//!
//! Exit codes: 0 all legs pass, 1 a numeric failure, 2 a hypothesis
//! failure, 64 a usage or configuration error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{StartProbe, RunConfig};
use crate::error::{Error, Result};
use crate::measure::{GridFunction, MeasureKind, ModelMeasure1D};
use crate::orlicz::NFunction;
use crate::profile::{self, log_grid};
use crate::report::{Leg, VerificationReport};
use crate::semigroup::{self, CenteredConstant, SemigroupSolver};
use crate::transitions::{self, ConverseRoute};

pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "isocap", version, about = "Isoperimetric, capacity and Orlicz-Sobolev checks on 1-D measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write I, I~, Cap_1 and Cap_q on the t-grid as CSV.
    Profile,
    /// Run a verification and emit a JSON report.
    Verify {
        #[arg(value_enum)]
        which: Which,
    },
    /// Print estimates and brackets of the inequality constants.
    Constants,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Which {
    Sandwich,
    Lift,
    Bracket,
    Forward,
    Converse,
    Gradient,
    DualL1,
    Decay,
    All,
}

#[derive(Debug, clap::Args)]
pub struct Flags {
    /// gaussian | p_exponential:P | uniform:A:B | power_alpha:ALPHA | double_well
    #[arg(long, global = true)]
    pub measure: Option<String>,
    /// power:Q | phi:Q (default power:q)
    #[arg(long, global = true)]
    pub nfunc: Option<String>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// lo:hi:n, inside (0, 1/2]
    #[arg(long, global = true)]
    pub tgrid: Option<String>,
    /// Quadrature nodes of the measure.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Semigroup solver nodes.
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Comma-separated evolution times.
    #[arg(long, global = true, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write `t,lhs,rhs,margin,tol,pass` rows for timed legs.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// JSON constant set, e.g. {"converse": {"route": "capacity", "c2": 1.0}}.
    #[arg(long, global = true)]
    pub constants_file: Option<PathBuf>,
    /// JSON run configuration; its keys override the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl Flags {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        if let Some(v) = &self.measure {
            c.measure = v.clone();
        }
        if self.nfunc.is_some() {
            c.nfunc = self.nfunc.clone();
        }
        if let Some(v) = self.q {
            c.q = v;
        }
        if let Some(v) = &self.tgrid {
            c.tgrid = v.clone();
        }
        if let Some(v) = self.grid {
            c.grid = v;
        }
        if let Some(v) = self.nodes {
            c.nodes = v;
        }
        if let Some(v) = self.dt {
            c.dt = v;
        }
        if let Some(v) = self.theta {
            c.theta = v;
        }
        if let Some(v) = &self.times {
            c.times = v.clone();
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if let Some(path) = &self.constants_file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            c.constants = serde_json::from_str(&text)?;
        }
        if let Some(path) = &self.config {
            c = c.overlay_file(path)?;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "isocap: {e}");
            error_code(&e)
        }
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_USAGE,
        Error::Hypothesis(_) => 2,
        _ => 1,
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let cfg = cli.flags.resolve()?;
    match cli.command {
        Command::Profile => {
            let csv = profile_csv(&cfg)?;
            emit(&cfg, &csv, stdout)?;
            Ok(0)
        }
        Command::Verify { which } => {
            let report = verify(&cfg, which)?;
            write!(stderr, "{}", report.render_table())?;
            emit(&cfg, &report.to_json(), stdout)?;
            if let Some(path) = &cli.flags.csv {
                std::fs::write(path, report.sweep_csv())?;
            }
            Ok(report.verdict.exit_code())
        }
        Command::Constants => {
            let rows = constants(&cfg)?;
            write!(stderr, "{}", constants_table(&rows))?;
            emit(&cfg, &serde_json::to_string_pretty(&rows).expect("rows serialise"), stdout)?;
            Ok(0)
        }
    }
}

fn emit(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                writeln!(stdout)?;
            }
        }
    }
    Ok(())
}

/// `t,I,I_tilde,Cap_1,Cap_q` with 17 significant digits.
pub fn profile_csv(cfg: &RunConfig) -> Result<String> {
    let mu = cfg.build_measure()?;
    let ts = cfg.t_grid()?;
    let q = cfg.q;
    let rows: Vec<[f64; 5]> = ts
        .par_iter()
        .map(|&t| -> Result<[f64; 5]> {
            Ok([
                t,
                profile::iso_profile(&mu, t)?,
                profile::iso_tilde(&mu, t)?,
                profile::cap1_profile(&mu, t, 0.5)?,
                profile::capq_profile(&mu, q, t)?,
            ])
        })
        .collect::<Result<_>>()?;
    let mut out = format!("t,I,I_tilde,Cap_1,Cap_{q}\n");
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Starting function for the semigroup checks on the solver grid.
pub fn semigroup_probe(s: &SemigroupSolver, spec: StartProbe, seed: u64) -> Result<GridFunction> {
    Ok(match spec {
        StartProbe::Identity => s.sample(|x| x),
        StartProbe::Sign => {
            let m = s.measure().quantile(0.5)?;
            let w = 3.0 * s.spacing();
            s.sample(move |x| ((x - m) / w).tanh())
        }
        StartProbe::Trig => {
            let (lo, hi) = s.measure().support();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let modes: Vec<(f64, f64)> = (1..=4)
                .map(|j| (j as f64 * std::f64::consts::PI / (hi - lo), rng.gen_range(-1.0..1.0) / j as f64))
                .collect();
            s.sample(move |x| modes.iter().map(|(k, a)| a * (k * (x - lo)).cos()).sum())
        }
    })
}

/// Turns a hypothesis error into a leg; other errors propagate.
fn guarded(report: &mut VerificationReport, name: &str, reference: &str, r: Result<VerificationReport>) -> Result<()> {
    match r {
        Ok(part) => report.extend(part),
        Err(Error::Hypothesis(why)) => report.push(Leg::hypothesis_fail(name, reference, why)),
        Err(e) => return Err(e),
    }
    Ok(())
}

pub fn verify(cfg: &RunConfig, which: Which) -> Result<VerificationReport> {
    let mu = cfg.build_measure()?;
    let n = cfg.nfunction()?;
    let q = cfg.q;
    let ts: Vec<f64> = cfg.t_grid()?.into_iter().filter(|&t| t < 0.5).collect();
    let mut report = VerificationReport::new(format!("verify {which:?} on {} with {}, q = {q}", mu.label(), n.label()));
    report.env("measure", mu.label());
    report.env("nfunc", n.label());
    report.env("q", q);
    report.env("grid", mu.grid_size());
    report.env("seed", cfg.seed);
    let all = which == Which::All;

    if all || which == Which::Sandwich {
        let r = transitions::sandwich_report(&mu, &transitions::sandwich_pairs(), cfg.grid, 0.05);
        guarded(&mut report, "sandwich", transitions::REF_SANDWICH, r)?;
    }
    if all || which == Which::Lift {
        guarded(&mut report, "lift", transitions::REF_LIFT, transitions::lift_report(&mu, q, &ts))?;
    }
    if all || which == Which::Bracket {
        let r = transitions::bracket_report(&mu, &n, q, &ts, cfg.seed).map(|(r, _)| r);
        guarded(&mut report, "bracket", transitions::REF_BRACKET, r)?;
    }
    if all || which == Which::Forward {
        let grid = transitions::default_t_grid();
        let r = transitions::iso_constant(&mu, &n, q, &grid)
            .and_then(|d| transitions::forward_theorem_check(&mu, &n, q, d, &grid, cfg.seed));
        guarded(&mut report, "forward", transitions::REF_FORWARD, r)?;
    }
    if all || which == Which::Converse {
        let r = transitions::capacity_constant(&mu, &n, q, &transitions::default_t_grid())
            .and_then(|d| transitions::converse_report(&mu, &n, q, d, &ts, &cfg.constants));
        guarded(&mut report, "converse", transitions::REF_CONVERSE, r)?;
    }
    let semigroup_checks = [Which::Gradient, Which::DualL1, Which::Decay];
    if all || semigroup_checks.contains(&which) {
        let solver = SemigroupSolver::new(&mu, cfg.solver_params())?;
        report.env("nodes", cfg.nodes);
        report.env("dt", cfg.dt);
        report.env("theta", cfg.theta);
        let f0 = semigroup_probe(&solver, cfg.probe, cfg.seed)?;
        if all || which == Which::Gradient {
            let r = semigroup::verify_gradient_estimate(&solver, &f0, &cfg.times);
            guarded(&mut report, "gradient", semigroup::REF_GRADIENT, r)?;
        }
        if all || which == Which::DualL1 {
            let r = semigroup::verify_dual_l1(&solver, &f0, &cfg.times);
            guarded(&mut report, "dual_l1", semigroup::REF_DUAL, r)?;
        }
        if all || which == Which::Decay {
            let centred = f0.shifted(f0.expectation());
            let reference = if q >= 2.0 { semigroup::REF_DECAY_HIGH } else { semigroup::REF_DECAY_LOW };
            let r = decay(&mu, &solver, &centred, &n, q, &cfg.times);
            guarded(&mut report, "decay", reference, r)?;
        }
    }
    Ok(report)
}

fn decay(
    mu: &ModelMeasure1D,
    s: &SemigroupSolver,
    f0: &GridFunction,
    n: &NFunction,
    q: f64,
    times: &[f64],
) -> Result<VerificationReport> {
    if !mu.kappa().is_finite() {
        return Err(Error::Hypothesis(format!("{} has no finite semi-convexity constant", mu.label())));
    }
    let d = CenteredConstant::from_capacity(mu, n, q, &transitions::default_t_grid())?;
    if q >= 2.0 {
        semigroup::verify_decay_high_q(s, f0, q, n, &d, times)
    } else {
        semigroup::verify_decay_low_q(s, f0, q, n, &d, times)
    }
}

/// One line of the constants summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantRow {
    pub name: String,
    /// Missing when the hypotheses of the estimate fail.
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<(f64, f64)>,
    pub provenance: String,
}

impl ConstantRow {
    fn new(name: impl Into<String>, value: f64, provenance: impl Into<String>) -> Self {
        ConstantRow { name: name.into(), value: Some(value), bracket: None, provenance: provenance.into() }
    }

    fn missing(name: impl Into<String>, why: impl Into<String>) -> Self {
        ConstantRow { name: name.into(), value: None, bracket: None, provenance: why.into() }
    }
}

fn row(name: &str, r: Result<ConstantRow>) -> Result<ConstantRow> {
    match r {
        Err(Error::Hypothesis(why)) => Ok(ConstantRow::missing(name, why)),
        Err(Error::InvalidParameter(why)) => Ok(ConstantRow::missing(name, why)),
        other => other,
    }
}

/// `min_t I~(t) / (t log^{1/r}(1/t))` on `ts`.
fn exp_fit(mu: &ModelMeasure1D, r: f64, ts: &[f64]) -> Result<f64> {
    let vals: Vec<f64> = ts
        .par_iter()
        .map(|&t| profile::iso_tilde(mu, t).map(|i| i / (t * (1.0 / t).ln().powf(1.0 / r))))
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

fn d_poin(mu: &ModelMeasure1D, cfg: &RunConfig) -> Result<f64> {
    let s = SemigroupSolver::new(mu, cfg.solver_params())?;
    Ok(semigroup::spectral_gap(&s)?.d_poin())
}

pub fn constants(cfg: &RunConfig) -> Result<Vec<ConstantRow>> {
    let mu = cfg.build_measure()?;
    let n = cfg.nfunction()?;
    let q = cfg.q;
    let grid = transitions::default_t_grid();
    let fit_grid = log_grid(1e-6, 0.49, 96);
    let mut rows = Vec::new();

    let lin = profile::d_lin_node_search(&mu);
    rows.push(ConstantRow::new("D_Lin", lin.value, format!("node search over {} nodes ({:?})", lin.nodes, lin.candidate)));
    rows.push(ConstantRow::new("D_Gau", exp_fit(&mu, 2.0, &fit_grid)?, "min of I~(t) / (t sqrt(log 1/t)) on a log grid"));
    if q != 2.0 {
        rows.push(ConstantRow::new(
            format!("D_Exp_{q}"),
            exp_fit(&mu, q, &fit_grid)?,
            format!("min of I~(t) / (t log^(1/{q})(1/t)) on a log grid"),
        ));
    }
    rows.push(row("D_Poin", d_poin(&mu, cfg).map(|v| ConstantRow::new("D_Poin", v, "sqrt of the spectral gap, refined grid")))?);
    let d2 = transitions::capacity_constant(&mu, &NFunction::power(2.0), 2.0, &grid)?;
    rows.push(ConstantRow {
        bracket: Some((d2 / 4.0, d2)),
        ..ConstantRow::new("D_Poin (capacity bracket)", d2, "min Cap_2(t, 1/2) / sqrt(t), bracket [D2/4, D2]")
    });
    if let MeasureKind::PExponential { p } = mu.kind() {
        if *p == 2.0 {
            // exp(-x^2) is the Gaussian scaled by 1/sqrt 2: constants scale by sqrt 2.
            let g = d_poin(&ModelMeasure1D::new(MeasureKind::Gaussian, cfg.grid)?, cfg)?;
            let own = d_poin(&mu, cfg)?;
            rows.push(ConstantRow::new("D_Poin ratio to gaussian", own / g, "scaling covariance, expected sqrt 2"));
        }
    }
    if q > 1.0 {
        rows.push(row(
            &format!("B_{{{},{q}}}", n.label()),
            transitions::forward_constant_b(&n, q).map(|b| ConstantRow::new(format!("B_{{{},{q}}}", n.label()), b, "forward constant")),
        )?);
    }
    let c_name = format!("C_{{{},{q}}}", n.label());
    let c2 = match cfg.constants.converse {
        ConverseRoute::Capacity { c2 } => c2,
        ConverseRoute::Semigroup => 1.0,
    };
    if q > 1.0 && q <= 2.0 {
        rows.push(row(
            &c_name,
            transitions::converse_constant_c(&n, q, c2, &grid)
                .map(|c| ConstantRow::new(&c_name, c, format!("capacity route with c2 = {c2}"))),
        )?);
    }
    let combined_name = format!("{c_name} (semigroup)");
    rows.push(row(
        &combined_name,
        transitions::converse_constants(&n, q, &transitions::ConstantSet::default())
            .map(|c| ConstantRow::new(&combined_name, c.combined(), "replayed semigroup constants, smaller of the two branches")),
    )?);
    Ok(rows)
}

pub fn constants_table(rows: &[ConstantRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let v = r.value.map_or("-".to_string(), |v| format!("{v:.6e}"));
        let b = r.bracket.map_or(String::new(), |(lo, hi)| format!(" [{lo:.4e}, {hi:.4e}]"));
        out.push_str(&format!("{:<32} {:>14}{}  {}\n", r.name, v, b, r.provenance));
    }
    out
}

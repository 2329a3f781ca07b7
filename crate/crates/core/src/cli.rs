//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage, input and reference-count errors,
//! 2 when a fit or analysis fails.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::datagen::{self, functions, NoiseSpec};
use crate::diagnostics::DerivativeGrid;
use crate::error::{Error, Result};
use crate::fitting::{
    build_reference_points, fit_regularized, interpolate_reference, Dataset, FitConfig,
};
use crate::io::{read_points, write_points, RunReport};
use crate::rational::{Coef, RationalModel};
use crate::selection::{choose_lambda, grid_search, lambda_sweep, SearchSpace, PLATEAU_TOLERANCE};
use crate::weibull::{median_ranks, RankConfig, WeibullParams};

#[derive(Debug, Parser)]
#[command(
    name = "padefit",
    version,
    about = "Rational (Padé) regression, regularization and model selection",
    after_help = "Exit codes: 0 success, 1 usage or input error, 2 fit error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model and print a JSON report
    Fit(FitArgs),
    /// Interpolate through reference points and print a JSON report
    Interpolate(InterpolateArgs),
    /// Grid search over orders, tail powers and q
    Search(SearchArgs),
    /// Sweep λ and pick the plateau onset
    Sweep(SweepArgs),
    /// Evaluate a model and its derivative as CSV (x,r,dr)
    Eval(EvalArgs),
    /// Write a synthetic point file
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    /// Plain P(x)/Q(x), with an optional tail term
    Rational,
    /// CDF form: α₀ = 0 and a tail term with limit 1 (needs --l)
    Cdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactFn {
    Sin,
    Resonance,
    Sqrtexp,
}

impl ExactFn {
    fn function(self) -> fn(f64) -> f64 {
        match self {
            ExactFn::Sin => functions::sinusoid,
            ExactFn::Resonance => functions::resonance,
            ExactFn::Sqrtexp => functions::sqrt_exp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenFn {
    Sin,
    Resonance,
    Sqrtexp,
    Weibull,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "rational")]
    pub form: Form,
    /// Tail power l (numerator and denominator share α_l·x^l)
    #[arg(long)]
    pub l: Option<usize>,
    /// Value of R at infinity enforced by the tail
    #[arg(long, default_value_t = 1.0)]
    pub tail_limit: f64,
    /// Substitution power, x -> x^q
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda1: f64,
    /// Coefficients pinned to zero: numbers or aN are α indices, bN are β
    /// indices, `tail` is the tail coefficient (e.g. "0,8" or "a0,b2")
    #[arg(long, value_parser = parse_mask)]
    pub zero_mask: Option<std::vec::Vec<Coef>>,
    /// Attach a known function to report D0 and D1
    #[arg(long, value_enum)]
    pub exact_fn: Option<ExactFn>,
    /// Interval of the D_der grid, "a,b" (default: data range)
    #[arg(long, value_parser = parse_pair)]
    pub der_interval: Option<(f64, f64)>,
    #[arg(long, default_value_t = crate::fitting::DEFAULT_DER_POINTS)]
    pub der_points: usize,
    /// Interval of the pole scan, "a,b" (default: data range)
    #[arg(long, value_parser = parse_pair)]
    pub pole_interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    pub data: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InterpolateArgs {
    pub data: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// Point file of reference points
    #[arg(long, conflicts_with = "group_size")]
    pub refs: Option<PathBuf>,
    /// Build reference points by averaging consecutive groups of this size
    #[arg(long, required_unless_present = "refs")]
    pub group_size: Option<usize>,
    /// Fixed reference points, "x,y;x,y"
    #[arg(long, value_parser = parse_anchors, requires = "group_size")]
    pub anchors: Option<std::vec::Vec<(f64, f64)>>,
    #[arg(long, value_parser = parse_mask)]
    pub zero_mask: Option<std::vec::Vec<Coef>>,
    #[arg(long, value_enum)]
    pub exact_fn: Option<ExactFn>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    pub data: PathBuf,
    /// Inclusive range "lo:hi" (or a single value)
    #[arg(long, value_parser = parse_range)]
    pub n_range: (usize, usize),
    #[arg(long, value_parser = parse_range)]
    pub m_range: (usize, usize),
    /// Tail powers, "8,10,12"
    #[arg(long, value_parser = parse_usize_list)]
    pub l_list: Option<std::vec::Vec<usize>>,
    /// Substitution powers, "0.5,0.75,1"
    #[arg(long, value_parser = parse_f64_list)]
    pub q_grid: Option<std::vec::Vec<f64>>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    pub data: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// Ascending λ values, "0,0.001,0.0025"
    #[arg(long, value_parser = parse_f64_list)]
    pub lambda_grid: std::vec::Vec<f64>,
    #[arg(long, default_value_t = PLATEAU_TOLERANCE)]
    pub rel_tol: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// JSON report from fit/interpolate/search/sweep, or a bare model record
    #[arg(long)]
    pub model: PathBuf,
    /// Uniform grid "a,b,count"
    #[arg(long, value_parser = parse_grid, required_unless_present = "points")]
    pub grid: Option<(f64, f64, usize)>,
    /// Evaluate at the abscissae of this point file
    #[arg(long, conflicts_with = "grid")]
    pub points: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long = "fn", value_enum)]
    pub function: GenFn,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// "a,b,subintervals" (defaults: sin 0,1,20; resonance -1,1,20; sqrtexp 0,2,10)
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(f64, f64, usize)>,
    /// Number of failure times (weibull)
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    /// Weibull shape
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    /// Median-rank offset a in (k - a)/(M + 1 - 2a)
    #[arg(long, default_value_t = 0.3)]
    pub rank_a: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error raised by a command.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Io(_)
        | Error::Parse(_)
        | Error::InvalidConfig(_)
        | Error::NegativeWeight { .. }
        | Error::CountMismatch { .. }
        | Error::DuplicateAbscissa { .. }
        | Error::EmptyInput => 1,
        _ => 2,
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Fit(a) => {
            let data = load(&a.data, a.model.exact_fn)?;
            let config = build_config(a.n, a.m, &a.model)?;
            let mut report = RunReport::new("fit");
            report.fit = Some(fit_regularized(&data, &config)?);
            emit(out, a.out.as_deref(), report.to_json()? + "\n")
        }
        Command::Interpolate(a) => {
            let data = load(&a.data, a.exact_fn)?;
            let refs = match (&a.refs, a.group_size) {
                (Some(path), _) => read_points(path)?,
                (None, Some(k)) => {
                    build_reference_points(&data, k, a.anchors.as_deref().unwrap_or(&[]))?
                }
                (None, None) => {
                    return Err(Error::InvalidConfig("need --refs or --group-size".into()))
                }
            };
            let mask = a.zero_mask.unwrap_or_default().into_iter().collect();
            let mut report = RunReport::new("interpolate");
            report.fit = Some(interpolate_reference(&refs, a.n, a.m, &mask, Some(&data))?);
            report.reference_points = Some(refs.points().to_vec());
            emit(out, a.out.as_deref(), report.to_json()? + "\n")
        }
        Command::Search(a) => {
            let data = load(&a.data, a.model.exact_fn)?;
            let mut model = a.model.clone();
            if model.l.is_none() {
                model.l = a.l_list.as_ref().and_then(|ls| ls.first().copied());
            }
            let base = build_config(a.n_range.0, a.m_range.0, &model)?;
            let tails = match (a.l_list, a.model.l) {
                (Some(ls), _) => Some(ls),
                (None, Some(l)) => Some(vec![l]),
                (None, None) => None,
            };
            let space = SearchSpace {
                n_range: a.n_range,
                m_range: a.m_range,
                l_candidates: tails,
                q_grid: a.q_grid.unwrap_or_else(|| vec![a.model.q]),
            };
            let result = grid_search(&data, &space, &base)?;
            let mut report = RunReport::new("search");
            report.candidates = Some(result.rows());
            report.fit = Some(result.best);
            emit(out, a.out.as_deref(), report.to_json()? + "\n")
        }
        Command::Sweep(a) => {
            let data = load(&a.data, a.model.exact_fn)?;
            let config = build_config(a.n, a.m, &a.model)?;
            let grid = match config.der_grid {
                Some(g) => g,
                None => {
                    let (lo, hi) = data.x_range();
                    DerivativeGrid::new(lo, hi, a.model.der_points)?
                }
            };
            let sweep = lambda_sweep(&data, &config, &a.lambda_grid, grid)?;
            let chosen = choose_lambda(&sweep, a.rel_tol)?;
            let (lo, hi) = grid.interval;
            let fit_config = config
                .clone()
                .with_lambda(chosen)
                .with_der_grid(grid)
                .with_pole_interval(lo, hi);
            let mut report = RunReport::new("sweep");
            report.fit = fit_regularized(&data, &fit_config).ok();
            report.sweep = Some(sweep);
            report.chosen_lambda = Some(chosen);
            report.sweep_config = Some(config);
            emit(out, a.out.as_deref(), report.to_json()? + "\n")
        }
        Command::Eval(a) => {
            let model = load_model(&a.model)?;
            let xs: Vec<f64> = match (a.grid, &a.points) {
                (_, Some(path)) => read_points(path)?.xs().collect(),
                (Some((lo, hi, count)), None) => linspace(lo, hi, count)?,
                (None, None) => return Err(Error::InvalidConfig("need --grid or --points".into())),
            };
            let mut text = String::from("x,r,dr\n");
            for x in xs {
                let r = model.eval(x)?;
                let dr = model.derivative(x)?;
                text.push_str(&format!("{x},{r},{dr}\n"));
            }
            emit(out, a.out.as_deref(), text)
        }
        Command::Generate(a) => {
            let points = generate(&a)?;
            let mut buf = Vec::new();
            write_points(&mut buf, &points)?;
            emit(
                out,
                a.out.as_deref(),
                String::from_utf8(buf).expect("ascii output"),
            )
        }
    }
}

fn generate(a: &GenerateArgs) -> Result<Vec<(f64, f64)>> {
    if a.function == GenFn::Weibull {
        let count = a
            .count
            .ok_or_else(|| Error::InvalidConfig("weibull needs --count".into()))?;
        let params = WeibullParams::new(a.theta, a.beta)?;
        let times = datagen::simulate_weibull_failures(params, count, a.seed)?;
        let ranks = median_ranks(count, RankConfig::new(a.rank_a)?);
        return Ok(times.into_iter().zip(ranks).collect());
    }
    let (f, default_grid): (fn(f64) -> f64, _) = match a.function {
        GenFn::Sin => (functions::sinusoid, (0.0, 1.0, 20)),
        GenFn::Resonance => (functions::resonance, (-1.0, 1.0, 20)),
        GenFn::Sqrtexp => (functions::sqrt_exp, (0.0, 2.0, 10)),
        GenFn::Weibull => unreachable!(),
    };
    let (lo, hi, sub) = a.grid.unwrap_or(default_grid);
    let xs = datagen::uniform_grid(lo, hi, sub)?;
    let noise = NoiseSpec::new(a.sigma, a.seed).with_mu(a.mu);
    Ok(datagen::sample_noisy(f, &xs, noise)?.points().to_vec())
}

fn build_config(n: usize, m: usize, a: &ModelArgs) -> Result<FitConfig> {
    let mut config = match (a.form, a.l) {
        (Form::Cdf, Some(l)) => FitConfig::cdf(n, m, l),
        (Form::Cdf, None) => return Err(Error::InvalidConfig("--form cdf needs --l".into())),
        (Form::Rational, Some(l)) => FitConfig::new(n, m).with_tail(l),
        (Form::Rational, None) => FitConfig::new(n, m),
    };
    config.tail_limit = a.tail_limit;
    config = config
        .with_q(a.q)
        .with_lambda(a.lambda)
        .with_lambda1(a.lambda1)
        .with_zero_mask(a.zero_mask.clone().unwrap_or_default());
    if let Some((lo, hi)) = a.der_interval {
        config = config.with_der_grid(DerivativeGrid::new(lo, hi, a.der_points)?);
    } else if a.der_points != crate::fitting::DEFAULT_DER_POINTS {
        return Err(Error::InvalidConfig(
            "--der-points needs --der-interval".into(),
        ));
    }
    if let Some((lo, hi)) = a.pole_interval {
        config = config.with_pole_interval(lo, hi);
    }
    Ok(config)
}

fn load(path: &Path, exact: Option<ExactFn>) -> Result<Dataset> {
    let data = read_points(path)?;
    Ok(match exact {
        Some(f) => data.with_underlying(f.function()),
        None => data,
    })
}

fn load_model(path: &Path) -> Result<RationalModel> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if let Ok(report) = RunReport::from_json(&text) {
        if let Some(fit) = report.fit {
            return Ok(fit.model);
        }
    }
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn linspace(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    match count {
        0 => Err(Error::InvalidConfig("grid needs at least one point".into())),
        1 => Ok(vec![lo]),
        _ => datagen::uniform_grid(lo, hi, count - 1),
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: String) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn parse_mask(s: &str) -> std::result::Result<Vec<Coef>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let index = |digits: &str| {
                digits
                    .parse::<usize>()
                    .map_err(|_| format!("bad mask entry `{t}`"))
            };
            if t == "tail" || t == "alpha_l" {
                Ok(Coef::Tail)
            } else if let Some(rest) = t.strip_prefix('b') {
                index(rest).map(Coef::Beta)
            } else {
                index(t.strip_prefix('a').unwrap_or(t)).map(Coef::Alpha)
            }
        })
        .collect()
}

fn parse_f64_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number `{t}`"))
        })
        .collect()
}

fn parse_usize_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad integer `{t}`"))
        })
        .collect()
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    match parse_f64_list(s)?.as_slice() {
        &[a, b] => Ok((a, b)),
        _ => Err(format!("expected \"a,b\", got `{s}`")),
    }
}

fn parse_grid(s: &str) -> std::result::Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b, n] => Ok((
            a.parse().map_err(|_| format!("bad number `{a}`"))?,
            b.parse().map_err(|_| format!("bad number `{b}`"))?,
            n.parse().map_err(|_| format!("bad count `{n}`"))?,
        )),
        _ => Err(format!("expected \"a,b,count\", got `{s}`")),
    }
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let bound = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad range `{s}`"))
    };
    match s.split_once(':') {
        Some((lo, hi)) => Ok((bound(lo)?, bound(hi)?)),
        None => bound(s).map(|v| (v, v)),
    }
}

fn parse_anchors(s: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(parse_pair)
        .collect()
}

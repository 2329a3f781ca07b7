//! Fit procedures: linearized least squares, its Tikhonov-regularized form,
//! exact interpolation through reference points and construction of
//! averaged reference points.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{model_oscillation, rmse, DerivativeGrid};
use crate::error::{Error, Result};
use crate::linsys::{
    apply_regularization, assemble_interpolation_rows, assemble_normal_system, solve_consistent,
    solve_dense, LinearSystem, SolveDiagnostics,
};
use crate::rational::{Coef, PoleReport, RationalModel, TailTerm};

/// Default number of samples in the pole scan attached to every report.
pub const DEFAULT_POLE_POINTS: usize = 2000;

/// Default number of derivative samples when no grid is configured.
pub const DEFAULT_DER_POINTS: usize = 40;

type Underlying = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Ordered sample points, optionally paired with the exact function that
/// generated them.
#[derive(Clone)]
pub struct Dataset {
    points: Vec<(f64, f64)>,
    underlying: Option<Underlying>,
}

impl fmt::Debug for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dataset")
            .field("points", &self.points)
            .field("underlying", &self.underlying.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
    }
}

impl Dataset {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(&(x, y)) = points
            .iter()
            .find(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::InvalidConfig(format!("non-finite point ({x}, {y})")));
        }
        Ok(Dataset {
            points,
            underlying: None,
        })
    }

    pub fn from_xy(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: ys.len(),
            });
        }
        Self::new(xs.iter().copied().zip(ys.iter().copied()).collect())
    }

    /// Attaches the exact function, enabling `D₀` and `D₁` in reports.
    pub fn with_underlying<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.underlying = Some(Arc::new(f));
        self
    }

    pub(crate) fn with_shared_underlying(mut self, f: Option<Underlying>) -> Self {
        self.underlying = f;
        self
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    pub fn underlying(&self) -> Option<&(dyn Fn(f64) -> f64 + Send + Sync)> {
        self.underlying.as_deref()
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.xs()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            })
    }
}

/// Orders, constraints and penalties of a single fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub n: usize,
    pub m: usize,
    /// Power `l` of a tail term shared by numerator and denominator.
    #[serde(default)]
    pub tail_l: Option<usize>,
    /// Value of `R` at infinity enforced by the tail term.
    #[serde(default = "one")]
    pub tail_limit: f64,
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub lambda1: f64,
    #[serde(default)]
    pub zero_mask: BTreeSet<Coef>,
    /// Grid for `D_der`; defaults to 40 points over the data range.
    #[serde(default)]
    pub der_grid: Option<DerivativeGrid>,
    /// Interval scanned for poles; defaults to the data range.
    #[serde(default)]
    pub pole_interval: Option<(f64, f64)>,
    #[serde(default = "default_pole_points")]
    pub pole_points: usize,
}

fn one() -> f64 {
    1.0
}

fn default_pole_points() -> usize {
    DEFAULT_POLE_POINTS
}

impl FitConfig {
    pub fn new(n: usize, m: usize) -> Self {
        FitConfig {
            n,
            m,
            tail_l: None,
            tail_limit: 1.0,
            q: 1.0,
            lambda: 0.0,
            lambda1: 0.0,
            zero_mask: BTreeSet::new(),
            der_grid: None,
            pole_interval: None,
            pole_points: DEFAULT_POLE_POINTS,
        }
    }

    /// CDF form: `α₀` pinned to zero and a tail of power `l` with limit 1,
    /// so that `R(0) = 0` and `R → 1` at infinity.
    pub fn cdf(n: usize, m: usize, l: usize) -> Self {
        let mut cfg = FitConfig::new(n, m);
        cfg.tail_l = Some(l);
        cfg.zero_mask.insert(Coef::Alpha(0));
        cfg
    }

    pub fn with_tail(mut self, l: usize) -> Self {
        self.tail_l = Some(l);
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_lambda1(mut self, lambda1: f64) -> Self {
        self.lambda1 = lambda1;
        self
    }

    pub fn with_zero_mask(mut self, mask: impl IntoIterator<Item = Coef>) -> Self {
        self.zero_mask.extend(mask);
        self
    }

    pub fn with_der_grid(mut self, grid: DerivativeGrid) -> Self {
        self.der_grid = Some(grid);
        self
    }

    pub fn with_pole_interval(mut self, a: f64, b: f64) -> Self {
        self.pole_interval = Some((a, b));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.tail_l {
            if l <= self.n || l <= self.m {
                return Err(Error::InvalidConfig(format!(
                    "tail power l = {l} must exceed n = {} and m = {}",
                    self.n, self.m
                )));
            }
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "q must be positive, got {}",
                self.q
            )));
        }
        if !self.tail_limit.is_finite() {
            return Err(Error::InvalidConfig("tail limit must be finite".into()));
        }
        for value in [self.lambda, self.lambda1] {
            if !(value >= 0.0) {
                return Err(Error::NegativeWeight { value });
            }
        }
        for coef in &self.zero_mask {
            let exists = match *coef {
                Coef::Alpha(i) => i <= self.n,
                Coef::Beta(j) => (1..=self.m).contains(&j),
                Coef::Tail => self.tail_l.is_some(),
            };
            if !exists {
                return Err(Error::InvalidConfig(format!(
                    "masked {coef} is not part of the model"
                )));
            }
        }
        if self.pole_points < 2 {
            return Err(Error::InvalidConfig(
                "pole scan needs at least 2 points".into(),
            ));
        }
        Ok(())
    }

    /// Number of free coefficients.
    pub fn unknowns(&self) -> usize {
        crate::linsys::free_columns(self).len()
    }
}

/// A fitted model together with its goodness-of-fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub config: FitConfig,
    pub model: RationalModel,
    /// Sum of squared residuals of the rational function itself.
    #[serde(with = "crate::io::sentinel")]
    pub s: f64,
    /// Sum of squared linearized residuals.
    pub s0: f64,
    /// `sqrt(S / M)`.
    #[serde(with = "crate::io::sentinel")]
    pub d: f64,
    #[serde(default, with = "crate::io::sentinel_opt")]
    pub d0: Option<f64>,
    #[serde(default, with = "crate::io::sentinel_opt")]
    pub d1: Option<f64>,
    #[serde(default, with = "crate::io::sentinel_opt")]
    pub d_der: Option<f64>,
    pub poles: PoleReport,
    pub diagnostics: SolveDiagnostics,
    /// Set when the fitted denominator vanishes at a data abscissa; `s` and
    /// `d` then hold `+∞`.
    pub denominator_zero_at_data: bool,
    pub points: usize,
}

impl FitReport {
    pub fn has_poles(&self) -> bool {
        !self.poles.is_empty()
    }
}

/// Minimizes the (optionally penalized) linearized residual sum `S₀` and
/// evaluates the resulting model on the data.
pub fn fit_linearized(data: &Dataset, config: &FitConfig) -> Result<FitReport> {
    let system = assemble_normal_system(data, config)?;
    let system = if config.lambda != 0.0 || config.lambda1 != 0.0 {
        apply_regularization(&system, config.lambda, config.lambda1)?
    } else {
        system
    };
    let (theta, diagnostics) = solve_dense(&system)?;
    let model = build_model(config, &system, &theta)?;
    evaluate(data, config.clone(), model, diagnostics)
}

/// Tikhonov-regularized fit, `S₀ + λ Σα² + λ₁ Σβ²`.
///
/// Shares the pipeline of [`fit_linearized`]; with both weights zero the two
/// produce identical reports.
pub fn fit_regularized(data: &Dataset, config: &FitConfig) -> Result<FitReport> {
    fit_linearized(data, config)
}

/// Rational function passing exactly through `refpoints`.
///
/// When more reference points than free coefficients are given, the surplus
/// equations must be satisfied by the solution (see
/// [`solve_consistent`]). `S`, `S₀` and `D` are measured on `full` when
/// provided, otherwise on the reference points.
pub fn interpolate_reference(
    refpoints: &Dataset,
    n: usize,
    m: usize,
    zero_mask: &BTreeSet<Coef>,
    full: Option<&Dataset>,
) -> Result<FitReport> {
    let config = FitConfig::new(n, m).with_zero_mask(zero_mask.iter().copied());
    let rect = assemble_interpolation_rows(refpoints, n, m, zero_mask)?;
    let (rows, unknowns) = (rect.rows.len(), rect.column_map.len());
    let (theta, diagnostics) = if rows < unknowns {
        return Err(Error::CountMismatch {
            points: rows,
            unknowns,
        });
    } else if rows == unknowns {
        let square = LinearSystem {
            a: rect.rows,
            b: rect.rhs,
            column_map: rect.column_map.clone(),
        };
        solve_dense(&square)?
    } else {
        solve_consistent(&rect)?
    };
    let system = LinearSystem {
        a: Vec::new(),
        b: Vec::new(),
        column_map: rect.column_map,
    };
    let model = build_model(&config, &system, &theta)?;
    evaluate(full.unwrap_or(refpoints), config, model, diagnostics)
}

/// Averages consecutive x-sorted groups of `group_size` points and adds the
/// anchors. Data points sharing an abscissa with an anchor are replaced by
/// it; a trailing partial group is averaged as-is.
pub fn build_reference_points(
    data: &Dataset,
    group_size: usize,
    anchors: &[(f64, f64)],
) -> Result<Dataset> {
    if group_size == 0 {
        return Err(Error::InvalidConfig("group size must be at least 1".into()));
    }
    let mut rest: Vec<(f64, f64)> = data
        .points()
        .iter()
        .copied()
        .filter(|(x, _)| !anchors.iter().any(|(ax, _)| ax == x))
        .collect();
    rest.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = rest
        .chunks(group_size)
        .map(|g| {
            let k = g.len() as f64;
            let sx: f64 = g.iter().map(|p| p.0).sum();
            let sy: f64 = g.iter().map(|p| p.1).sum();
            (sx / k, sy / k)
        })
        .collect();
    out.extend_from_slice(anchors);
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Dataset::new(out).map(|d| d.with_shared_underlying(data.underlying.clone()))
}

fn build_model(config: &FitConfig, system: &LinearSystem, theta: &[f64]) -> Result<RationalModel> {
    let mut alpha = vec![0.0; config.n + 1];
    let mut beta = vec![0.0; config.m];
    let mut tail = 0.0;
    for (&coef, &value) in system.column_map.iter().zip(theta) {
        match coef {
            Coef::Alpha(i) => alpha[i] = value,
            Coef::Beta(j) => beta[j - 1] = value,
            Coef::Tail => tail = value,
        }
    }
    let mut model = RationalModel::new(alpha, beta)?.with_q(config.q)?;
    if let Some(l) = config.tail_l {
        model = model.with_tail_term(TailTerm {
            power: l,
            coefficient: tail,
            limit: config.tail_limit,
        })?;
    }
    model.with_zero_mask(config.zero_mask.clone())
}

fn evaluate(
    data: &Dataset,
    config: FitConfig,
    model: RationalModel,
    diagnostics: SolveDiagnostics,
) -> Result<FitReport> {
    let m = data.len() as f64;
    let mut fitted = Vec::with_capacity(data.len());
    let mut denominator_zero_at_data = false;
    let mut s = 0.0;
    let mut s0 = 0.0;
    for &(x, f) in data.points() {
        let lin = model.numerator_at(x) - f * model.denominator_at(x);
        s0 += lin * lin;
        match model.eval(x) {
            Ok(r) => {
                s += (r - f) * (r - f);
                fitted.push(r);
            }
            Err(_) => {
                denominator_zero_at_data = true;
                fitted.push(f64::NAN);
            }
        }
    }
    if denominator_zero_at_data || !s.is_finite() {
        s = f64::INFINITY;
    }
    let d = (s / m).sqrt();

    let (d0, d1) = match data.underlying() {
        Some(f) => {
            let truth: Vec<f64> = data.xs().map(f).collect();
            let ys: Vec<f64> = data.ys().collect();
            let d0 = rmse(&truth, &ys)?;
            let d1 = if denominator_zero_at_data {
                f64::INFINITY
            } else {
                rmse(&truth, &fitted)?
            };
            (Some(d0), Some(d1))
        }
        None => (None, None),
    };

    let (lo, hi) = data.x_range();
    let pole_interval = config.pole_interval.unwrap_or((lo, hi));
    let poles = if pole_interval.1 > pole_interval.0 {
        model.pole_scan(pole_interval, config.pole_points)?
    } else {
        PoleReport {
            sign_changes: Vec::new(),
            min_abs_denominator: model.denominator_at(lo).abs(),
            interval: pole_interval,
            points: 1,
        }
    };

    let grid = match config.der_grid {
        Some(g) => Some(g),
        None if hi > lo => Some(DerivativeGrid::new(lo, hi, DEFAULT_DER_POINTS)?),
        None => None,
    };
    let d_der = grid.map(|g| model_oscillation(&model, &g).unwrap_or(f64::INFINITY));

    Ok(FitReport {
        config,
        model,
        s,
        s0,
        d,
        d0,
        d1,
        d_der,
        poles,
        diagnostics,
        denominator_zero_at_data,
        points: data.len(),
    })
}

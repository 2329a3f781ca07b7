//! Model selection: order grid search, substitution-power search, λ sweeps
//! with plateau detection and λ₁ tuning against a derivative baseline.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::diagnostics::DerivativeGrid;
use crate::error::{Error, Result};
use crate::fitting::{
    fit_linearized, fit_regularized, interpolate_reference, Dataset, FitConfig, FitReport,
};
use crate::rational::Coef;

/// Default relative tolerance of the λ plateau rule.
pub const PLATEAU_TOLERANCE: f64 = 0.05;

/// Candidate orders, tail powers and substitution powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    /// Inclusive numerator degree range.
    pub n_range: (usize, usize),
    /// Inclusive denominator degree range.
    pub m_range: (usize, usize),
    /// Tail powers to try; `None` searches without a tail term.
    #[serde(default)]
    pub l_candidates: Option<Vec<usize>>,
    #[serde(default = "unit_grid")]
    pub q_grid: Vec<f64>,
}

fn unit_grid() -> Vec<f64> {
    vec![1.0]
}

impl SearchSpace {
    pub fn new(n_range: (usize, usize), m_range: (usize, usize)) -> Self {
        SearchSpace {
            n_range,
            m_range,
            l_candidates: None,
            q_grid: unit_grid(),
        }
    }

    pub fn with_tails(mut self, ls: impl IntoIterator<Item = usize>) -> Self {
        self.l_candidates = Some(ls.into_iter().collect());
        self
    }

    pub fn with_q_grid(mut self, q_grid: Vec<f64>) -> Self {
        self.q_grid = q_grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_range.0 > self.n_range.1 || self.m_range.0 > self.m_range.1 {
            return Err(Error::InvalidConfig("empty order range".into()));
        }
        if self.l_candidates.as_ref().is_some_and(|ls| ls.is_empty()) {
            return Err(Error::InvalidConfig("empty tail list".into()));
        }
        if self.q_grid.is_empty() || self.q_grid.iter().any(|q| !(*q > 0.0)) {
            return Err(Error::InvalidConfig(
                "q grid must be nonempty and positive".into(),
            ));
        }
        Ok(())
    }

    /// Every `(n, m, l, q)` cell, in enumeration order.
    pub fn cells(&self) -> Vec<(usize, usize, Option<usize>, f64)> {
        let ls: Vec<Option<usize>> = match &self.l_candidates {
            Some(ls) => ls.iter().copied().map(Some).collect(),
            None => vec![None],
        };
        let mut out = Vec::new();
        for n in self.n_range.0..=self.n_range.1 {
            for m in self.m_range.0..=self.m_range.1 {
                for &l in &ls {
                    for &q in &self.q_grid {
                        out.push((n, m, l, q));
                    }
                }
            }
        }
        out
    }
}

/// One evaluated cell of a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub n: usize,
    pub m: usize,
    pub l: Option<usize>,
    pub q: f64,
    pub result: Result<FitReport>,
}

impl Candidate {
    pub fn row(&self) -> CandidateRow {
        let (s, d, pole_count, error) = match &self.result {
            Ok(r) => (Some(r.s), Some(r.d), Some(r.poles.count()), None),
            Err(e) => (None, None, None, Some(e.to_string())),
        };
        CandidateRow {
            n: self.n,
            m: self.m,
            l: self.l,
            q: self.q,
            s,
            d,
            pole_count,
            error,
        }
    }
}

/// Serializable summary of a [`Candidate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub n: usize,
    pub m: usize,
    pub l: Option<usize>,
    pub q: f64,
    #[serde(default, with = "crate::io::sentinel_opt")]
    pub s: Option<f64>,
    #[serde(default, with = "crate::io::sentinel_opt")]
    pub d: Option<f64>,
    pub pole_count: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: FitReport,
    pub candidates: Vec<Candidate>,
}

impl SearchResult {
    pub fn rows(&self) -> Vec<CandidateRow> {
        self.candidates.iter().map(Candidate::row).collect()
    }
}

/// Ranking key: pole-free first, then smaller `S`, then smaller `n + m`,
/// smaller `m`, smaller `l` and smaller `q`.
pub fn rank(a: &FitReport, b: &FitReport) -> Ordering {
    let key = |r: &FitReport| {
        (
            r.has_poles(),
            r.config.n + r.config.m,
            r.config.m,
            r.config.tail_l.unwrap_or(0),
        )
    };
    let (ka, kb) = (key(a), key(b));
    ka.0.cmp(&kb.0)
        .then(a.s.total_cmp(&b.s))
        .then((ka.1, ka.2, ka.3).cmp(&(kb.1, kb.2, kb.3)))
        .then(a.config.q.total_cmp(&b.config.q))
}

/// Fits every cell of `space` using `base` for weights, masks and
/// diagnostics settings.
///
/// Masked coefficients that do not exist in a cell (for instance `α₈` when
/// `n = 6`) are dropped for that cell.
pub fn grid_search(data: &Dataset, space: &SearchSpace, base: &FitConfig) -> Result<SearchResult> {
    space.validate()?;
    let candidates: Vec<Candidate> = space
        .cells()
        .into_iter()
        .map(|(n, m, l, q)| {
            let config = cell_config(base, n, m, l, q);
            Candidate {
                n,
                m,
                l,
                q,
                result: fit_linearized(data, &config),
            }
        })
        .collect();
    let best = candidates
        .iter()
        .filter_map(|c| c.result.as_ref().ok())
        .min_by(|a, b| rank(a, b))
        .cloned()
        .ok_or(Error::NoFeasibleModel)?;
    Ok(SearchResult { best, candidates })
}

fn cell_config(base: &FitConfig, n: usize, m: usize, l: Option<usize>, q: f64) -> FitConfig {
    let mut config = base.clone();
    config.n = n;
    config.m = m;
    config.tail_l = l;
    config.q = q;
    config.zero_mask.retain(|c| match *c {
        Coef::Alpha(i) => i <= n,
        Coef::Beta(j) => j <= m,
        Coef::Tail => l.is_some(),
    });
    config
}

/// Tries every split `n + m + 1 = L` of the free coefficients of an
/// interpolant through `refpoints` and ranks the results on `full` with
/// [`rank`].
pub fn interpolation_search(
    refpoints: &Dataset,
    full: &Dataset,
    zero_mask: &BTreeSet<Coef>,
) -> Result<SearchResult> {
    let count = refpoints.len();
    let candidates: Vec<Candidate> = (0..count)
        .map(|n| {
            let m = count - 1 - n;
            let mask: BTreeSet<Coef> = cell_config(
                &FitConfig::new(n, m).with_zero_mask(zero_mask.iter().copied()),
                n,
                m,
                None,
                1.0,
            )
            .zero_mask;
            let result = interpolate_reference(refpoints, n, m, &mask, Some(full));
            Candidate {
                n,
                m,
                l: None,
                q: 1.0,
                result,
            }
        })
        .collect();
    let best = candidates
        .iter()
        .filter_map(|c| c.result.as_ref().ok())
        .min_by(|a, b| rank(a, b))
        .cloned()
        .ok_or(Error::NoFeasibleModel)?;
    Ok(SearchResult { best, candidates })
}

/// One row of a λ sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    #[serde(default, with = "crate::io::sentinel_opt")]
    pub d: Option<f64>,
    #[serde(default, with = "crate::io::sentinel_opt")]
    pub d_der: Option<f64>,
    pub pole_count: Option<usize>,
    pub error: Option<String>,
}

impl SweepRow {
    fn usable(&self) -> Option<f64> {
        match (self.error.as_ref(), self.pole_count, self.d_der) {
            (None, Some(0), Some(d)) if d.is_finite() => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSweep {
    pub rows: Vec<SweepRow>,
    /// Index of the row picked by [`choose_lambda`] with the default tolerance.
    pub chosen: usize,
}

/// One regularized fit per λ in `grid`, with `D_der` and the pole scan both
/// taken over `der_grid`'s interval. Failed fits are recorded per row.
pub fn lambda_sweep(
    data: &Dataset,
    config: &FitConfig,
    grid: &[f64],
    der_grid: DerivativeGrid,
) -> Result<LambdaSweep> {
    if grid.is_empty() {
        return Err(Error::EmptySweep);
    }
    if grid.iter().any(|l| !(*l >= 0.0)) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "lambda grid must be ascending and non-negative".into(),
        ));
    }
    let (a, b) = der_grid.interval;
    let rows = grid
        .iter()
        .map(|&lambda| {
            let cfg = config
                .clone()
                .with_lambda(lambda)
                .with_der_grid(der_grid)
                .with_pole_interval(a, b);
            match fit_regularized(data, &cfg) {
                Ok(r) => SweepRow {
                    lambda,
                    d: Some(r.d),
                    d_der: r.d_der,
                    pole_count: Some(r.poles.count()),
                    error: None,
                },
                Err(e) => SweepRow {
                    lambda,
                    d: None,
                    d_der: None,
                    pole_count: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let mut sweep = LambdaSweep { rows, chosen: 0 };
    let chosen = choose_lambda(&sweep, PLATEAU_TOLERANCE)?;
    sweep.chosen = sweep
        .rows
        .iter()
        .position(|r| r.lambda == chosen)
        .unwrap_or(0);
    Ok(sweep)
}

/// Smallest pole-free λ whose `D_der` differs from the next λ's by less than
/// `rel_tol` relative; the largest λ when no such plateau exists.
pub fn choose_lambda(sweep: &LambdaSweep, rel_tol: f64) -> Result<f64> {
    let last = sweep.rows.last().ok_or(Error::EmptySweep)?;
    for pair in sweep.rows.windows(2) {
        if let (Some(here), Some(next)) = (pair[0].usable(), pair[1].usable()) {
            let scale = here.abs().max(next.abs());
            if scale == 0.0 || (here - next).abs() < rel_tol * scale {
                return Ok(pair[0].lambda);
            }
        }
    }
    Ok(last.lambda)
}

/// Fits once per substitution power and returns the smallest-`S` result.
pub fn q_search(data: &Dataset, config: &FitConfig, q_grid: &[f64]) -> Result<(f64, FitReport)> {
    if q_grid.is_empty() {
        return Err(Error::InvalidConfig("empty q grid".into()));
    }
    if q_grid.iter().any(|q| q.fract() != 0.0) {
        if let Some(x) = data.xs().find(|x| *x < 0.0) {
            return Err(Error::NegativeAbscissa { x });
        }
    }
    let mut best: Option<(f64, FitReport)> = None;
    for &q in q_grid {
        let Ok(report) = fit_linearized(data, &config.clone().with_q(q)) else {
            continue;
        };
        if best.as_ref().is_none_or(|(_, b)| report.s < b.s) {
            best = Some((q, report));
        }
    }
    best.ok_or(Error::NoFeasibleModel)
}

/// `λ₁` values from `start` down to `stop` in steps of `step`, inclusive.
pub fn descending_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((start - stop) / step + 1e-9).floor() as usize;
    (0..=count).map(|k| start - step * k as f64).collect()
}

/// Outcome of [`tune_lambda1`].
#[derive(Debug, Clone, PartialEq)]
pub struct Lambda1Tuning {
    pub q: f64,
    pub lambda1: f64,
    pub baseline_d_der: f64,
    pub report: FitReport,
}

/// Searches `q_grid × lambda1_grid` for the smallest-`D` model that is
/// pole-free on the configured pole interval and whose `D_der` lies within
/// `rel_tol` of `baseline_d_der`.
pub fn tune_lambda1(
    data: &Dataset,
    config: &FitConfig,
    q_grid: &[f64],
    lambda1_grid: &[f64],
    baseline_d_der: f64,
    rel_tol: f64,
) -> Result<Lambda1Tuning> {
    let mut best: Option<Lambda1Tuning> = None;
    for &q in q_grid {
        for &lambda1 in lambda1_grid {
            let cfg = config.clone().with_q(q).with_lambda1(lambda1);
            let Ok(report) = fit_regularized(data, &cfg) else {
                continue;
            };
            let admissible = !report.has_poles()
                && report
                    .d_der
                    .is_some_and(|d| (d - baseline_d_der).abs() <= rel_tol * baseline_d_der);
            if admissible && best.as_ref().is_none_or(|b| report.d < b.report.d) {
                best = Some(Lambda1Tuning {
                    q,
                    lambda1,
                    baseline_d_der,
                    report,
                });
            }
        }
    }
    best.ok_or(Error::NoFeasibleModel)
}

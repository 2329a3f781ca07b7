//! Weibull reliability tools: median ranks, log-log transform fit, maximum
//! likelihood estimation and mean time to failure for Weibull or rational
//! CDFs.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::rational::RationalModel;

/// Shape bracket of the likelihood equation.
pub const SHAPE_BRACKET: (f64, f64) = (0.01, 100.0);
/// Threshold on `1 - R(x)` that ends the quadrature range.
pub const TAIL_THRESHOLD: f64 = 1e-6;
/// Integration cap as a multiple of the largest data abscissa.
pub const TAIL_CAP_FACTOR: f64 = 50.0;
/// Absolute tolerance of the adaptive Simpson rule.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;

/// Scale `theta` and shape of a two-parameter Weibull distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    pub theta: f64,
    pub shape: f64,
}

impl WeibullParams {
    pub fn new(theta: f64, shape: f64) -> Result<Self> {
        if !(theta > 0.0 && shape > 0.0 && theta.is_finite() && shape.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "Weibull parameters must be positive, got theta = {theta}, shape = {shape}"
            )));
        }
        Ok(WeibullParams { theta, shape })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-(x / self.theta).powf(self.shape)).exp_m1()
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let z = x / self.theta;
        self.shape / self.theta * z.powf(self.shape - 1.0) * (-z.powf(self.shape)).exp()
    }

    /// `θ·Γ(1 + 1/shape)`.
    pub fn mttf(&self) -> f64 {
        self.theta * gamma(1.0 + 1.0 / self.shape)
    }
}

/// Plotting-position offset `a` of `(k - a)/(M + 1 - 2a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankConfig {
    pub a: f64,
}

impl RankConfig {
    pub const MEAN: RankConfig = RankConfig { a: 0.0 };
    pub const BENARD: RankConfig = RankConfig { a: 0.3 };
    pub const HAZEN: RankConfig = RankConfig { a: 0.5 };

    pub fn new(a: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&a) {
            return Err(Error::InvalidConfig(format!(
                "rank offset must lie in [0, 0.5], got {a}"
            )));
        }
        Ok(RankConfig { a })
    }
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig::BENARD
    }
}

/// `F_k = (k - a)/(M + 1 - 2a)` for `k = 1..M`.
pub fn median_ranks(count: usize, cfg: RankConfig) -> Vec<f64> {
    let denom = count as f64 + 1.0 - 2.0 * cfg.a;
    (1..=count).map(|k| (k as f64 - cfg.a) / denom).collect()
}

/// Least squares on `ln ln(1/(1 - F))` against `ln x`.
pub fn transform_fit(times: &[f64], ranks: &[f64]) -> Result<WeibullParams> {
    if times.len() != ranks.len() {
        return Err(Error::LengthMismatch {
            left: times.len(),
            right: ranks.len(),
        });
    }
    if times.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(x) = times.iter().find(|x| !(**x > 0.0)) {
        return Err(Error::InvalidConfig(format!(
            "failure times must be positive, got {x}"
        )));
    }
    if let Some(f) = ranks.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
        return Err(Error::InvalidConfig(format!(
            "ranks must lie in (0, 1), got {f}"
        )));
    }
    let u: Vec<f64> = times.iter().map(|x| x.ln()).collect();
    let v: Vec<f64> = ranks.iter().map(|f| (-(-f).ln_1p()).ln()).collect();
    let k = u.len() as f64;
    let mu = u.iter().sum::<f64>() / k;
    let mv = v.iter().sum::<f64>() / k;
    let suu: f64 = u.iter().map(|a| (a - mu) * (a - mu)).sum();
    if suu == 0.0 {
        return Err(Error::DegenerateAbscissae);
    }
    let suv: f64 = u.iter().zip(&v).map(|(a, b)| (a - mu) * (b - mv)).sum();
    let shape = suv / suu;
    let intercept = mv - shape * mu;
    WeibullParams::new((-intercept / shape).exp(), shape)
}

/// Maximum likelihood estimate for complete (uncensored) samples.
///
/// Times are divided by their maximum before solving the profile equation
/// so that `x^shape` stays bounded over the whole bracket.
pub fn mle_fit(times: &[f64]) -> Result<WeibullParams> {
    if times.len() < 2 {
        return Err(Error::NoBracket);
    }
    if let Some(x) = times.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidConfig(format!(
            "failure times must be positive, got {x}"
        )));
    }
    let xmax = times.iter().copied().fold(0.0, f64::max);
    let logs: Vec<f64> = times.iter().map(|x| (x / xmax).ln()).collect();
    let mean_log = logs.iter().sum::<f64>() / logs.len() as f64;
    let profile = |shape: f64| {
        let (mut sw, mut swl) = (0.0, 0.0);
        for &l in &logs {
            let w = (shape * l).exp();
            sw += w;
            swl += w * l;
        }
        swl / sw - 1.0 / shape - mean_log
    };

    let (mut lo, mut hi) = SHAPE_BRACKET;
    let (flo, fhi) = (profile(lo), profile(hi));
    if !(flo.is_finite() && fhi.is_finite()) || flo * fhi > 0.0 {
        return Err(Error::NoBracket);
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let fm = profile(mid);
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let shape = 0.5 * (lo + hi);
    let mean_w = logs.iter().map(|l| (shape * l).exp()).sum::<f64>() / logs.len() as f64;
    WeibullParams::new(xmax * mean_w.powf(1.0 / shape), shape)
}

/// `∫₀^∞ (1 - R(x)) dx` for a rational CDF.
///
/// Quadrature runs up to the first point of a scan grid where
/// `|1 - R| < 1e-6`; the remainder is the integral of the leading-order
/// power decay matched to `1 - R` at that point. The scan stops at
/// `50·max_x`.
pub fn rational_mttf(model: &RationalModel, max_x: f64) -> Result<f64> {
    if !(max_x > 0.0 && max_x.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "max_x must be positive, got {max_x}"
        )));
    }
    let cap = TAIL_CAP_FACTOR * max_x;
    let steps = 1000;
    let poles = model.pole_scan((0.0, cap), 10 * steps + 1)?;
    if let Some(p) = poles.sign_changes.first() {
        return Err(Error::PoleOnRange { x: p.root });
    }
    let survival = |x: f64| -> Result<f64> {
        model
            .eval(x)
            .map(|r| 1.0 - r)
            .map_err(|_| Error::PoleOnRange { x })
    };

    let step = cap / steps as f64;
    let mut x_cut = None;
    for i in 1..=steps {
        let x = step * i as f64;
        if survival(x)?.abs() < TAIL_THRESHOLD {
            x_cut = Some(x);
            break;
        }
    }
    let x_cut = x_cut.ok_or(Error::NonconvergentTail { cap })?;

    let decay = decay_exponent(model).ok_or(Error::NonconvergentTail { cap })?;
    if decay >= -1.0 {
        return Err(Error::NonconvergentTail { cap });
    }
    let tail = survival(x_cut)? * x_cut / (-decay - 1.0);
    let body = adaptive_simpson(&survival, 0.0, x_cut, QUADRATURE_TOLERANCE)?;
    Ok(body + tail)
}

/// Exponent `k` with `1 - R(x) ~ C·x^k` as `x → ∞`.
fn decay_exponent(model: &RationalModel) -> Option<f64> {
    let num = model.numerator_coefficients();
    let den = model.denominator_coefficients();
    let len = num.len().max(den.len());
    let diff: Vec<f64> = (0..len)
        .map(|i| den.get(i).copied().unwrap_or(0.0) - num.get(i).copied().unwrap_or(0.0))
        .collect();
    let p = diff.iter().rposition(|c| *c != 0.0)?;
    let r = den.iter().rposition(|c| *c != 0.0)?;
    Some(model.q() * (p as f64 - r as f64))
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (fa, fb) = (f(a)?, f(b)?);
    let c = 0.5 * (a + b);
    let fc = f(c)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    simpson_step(f, a, b, fa, fc, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fc: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let c = 0.5 * (a + b);
    let (d, e) = (0.5 * (a + c), 0.5 * (c + b));
    let (fd, fe) = (f(d)?, f(e)?);
    let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(
        simpson_step(f, a, c, fa, fd, fc, left, 0.5 * tol, depth - 1)?
            + simpson_step(f, c, b, fc, fe, fb, right, 0.5 * tol, depth - 1)?,
    )
}

//! Rational functions `R(x) = P(t) / Q(t)` with `t = x^q` and `Q(0) = 1`.
//!
//! A [`RationalModel`] stores the numerator coefficients `α₀..αₙ`, the
//! denominator coefficients `β₁..βₘ` (the constant term of the denominator is
//! always 1 and never stored), an optional shared tail term `α_l·t^l` that is
//! added to both polynomials, and the power substitution `q`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest denominator magnitude accepted by [`RationalModel::eval`].
pub const EVAL_TOLERANCE: f64 = 1e-300;

/// Absolute bracket width at which pole bisection stops.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Identity of a single model coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Coef {
    /// Numerator coefficient of `t^i`.
    Alpha(usize),
    /// Denominator coefficient of `t^j`, `j >= 1`.
    Beta(usize),
    /// Shared tail coefficient `α_l`.
    Tail,
}

impl std::fmt::Display for Coef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coef::Alpha(i) => write!(f, "alpha{i}"),
            Coef::Beta(j) => write!(f, "beta{j}"),
            Coef::Tail => write!(f, "alpha_l"),
        }
    }
}

impl std::str::FromStr for Coef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let index = |digits: &str| {
            digits
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("unknown coefficient `{s}`")))
        };
        if s == "alpha_l" {
            Ok(Coef::Tail)
        } else if let Some(rest) = s.strip_prefix("alpha") {
            index(rest).map(Coef::Alpha)
        } else if let Some(rest) = s.strip_prefix("beta") {
            index(rest).map(Coef::Beta)
        } else {
            Err(Error::Parse(format!("unknown coefficient `{s}`")))
        }
    }
}

impl From<Coef> for String {
    fn from(c: Coef) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for Coef {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Tail term `α_l·t^l` shared by numerator and denominator.
///
/// The numerator carries `limit·α_l·t^l`, so `R → limit` as `t → ∞` whenever
/// `l` exceeds both polynomial degrees. A CDF uses `limit = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailTerm {
    pub power: usize,
    pub coefficient: f64,
    #[serde(default = "default_limit")]
    pub limit: f64,
}

fn default_limit() -> f64 {
    1.0
}

/// A Padé-type rational function with structural constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct RationalModel {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    tail: Option<TailTerm>,
    q: f64,
    zero_mask: BTreeSet<Coef>,
    // dense polynomials in t, tail folded in
    num: Vec<f64>,
    den: Vec<f64>,
}

impl RationalModel {
    /// Builds `Σ αᵢ tⁱ / (1 + Σ βⱼ tʲ)` with `q = 1` and no tail.
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidConfig(
                "numerator needs at least one coefficient".into(),
            ));
        }
        if alpha.iter().chain(beta.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig("coefficients must be finite".into()));
        }
        let mut model = RationalModel {
            alpha,
            beta,
            tail: None,
            q: 1.0,
            zero_mask: BTreeSet::new(),
            num: Vec::new(),
            den: Vec::new(),
        };
        model.rebuild();
        Ok(model)
    }

    pub fn polynomial(alpha: Vec<f64>) -> Result<Self> {
        Self::new(alpha, Vec::new())
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![value], Vec::new())
    }

    /// Normalizes an arbitrary quotient of polynomials (ascending coefficients)
    /// so that the denominator constant term becomes 1. Trailing exact zeros
    /// are dropped from both polynomials.
    pub fn from_polynomials(numerator: &[f64], denominator: &[f64]) -> Result<Self> {
        let c0 = denominator.first().copied().unwrap_or(0.0);
        if c0 == 0.0 || !c0.is_finite() {
            return Err(Error::NormalizationImpossible);
        }
        let mut alpha: Vec<f64> = numerator.iter().map(|c| c / c0).collect();
        let mut beta: Vec<f64> = denominator[1..].iter().map(|c| c / c0).collect();
        while alpha.len() > 1 && alpha.last() == Some(&0.0) {
            alpha.pop();
        }
        if alpha.is_empty() {
            alpha.push(0.0);
        }
        while beta.last() == Some(&0.0) {
            beta.pop();
        }
        Self::new(alpha, beta)
    }

    /// Applies the substitution `x → x^q`.
    pub fn with_q(mut self, q: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidConfig(format!("q must be positive, got {q}")));
        }
        self.q = q;
        Ok(self)
    }

    /// Adds the shared tail term `α_l·t^l` with limit 1.
    pub fn with_tail(self, power: usize, coefficient: f64) -> Result<Self> {
        self.with_tail_term(TailTerm {
            power,
            coefficient,
            limit: 1.0,
        })
    }

    pub fn with_tail_term(mut self, tail: TailTerm) -> Result<Self> {
        if tail.power <= self.n() || tail.power <= self.m() {
            return Err(Error::InvalidConfig(format!(
                "tail power {} must exceed n = {} and m = {}",
                tail.power,
                self.n(),
                self.m()
            )));
        }
        if !tail.coefficient.is_finite() || !tail.limit.is_finite() {
            return Err(Error::InvalidConfig(
                "tail coefficient must be finite".into(),
            ));
        }
        self.tail = Some(tail);
        self.rebuild();
        Ok(self)
    }

    /// Records coefficients that are structurally pinned to zero. Every
    /// listed coefficient must exist and already be exactly zero.
    pub fn with_zero_mask(mut self, mask: BTreeSet<Coef>) -> Result<Self> {
        for coef in &mask {
            let value = match *coef {
                Coef::Alpha(i) => self.alpha.get(i).copied(),
                Coef::Beta(j) if j >= 1 => self.beta.get(j - 1).copied(),
                Coef::Beta(_) => None,
                Coef::Tail => self.tail.map(|t| t.coefficient),
            };
            match value {
                Some(0.0) => {}
                Some(v) => {
                    return Err(Error::InvalidConfig(format!(
                        "masked {coef} is {v}, expected 0"
                    )))
                }
                None => {
                    return Err(Error::InvalidConfig(format!(
                        "masked {coef} does not exist"
                    )))
                }
            }
        }
        self.zero_mask = mask;
        Ok(self)
    }

    fn rebuild(&mut self) {
        let mut num = self.alpha.clone();
        let mut den = Vec::with_capacity(self.beta.len() + 1);
        den.push(1.0);
        den.extend_from_slice(&self.beta);
        if let Some(tail) = self.tail {
            let len = tail.power + 1;
            num.resize(num.len().max(len), 0.0);
            den.resize(den.len().max(len), 0.0);
            num[tail.power] += tail.limit * tail.coefficient;
            den[tail.power] += tail.coefficient;
        }
        self.num = num;
        self.den = den;
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Denominator coefficients `β₁..βₘ`.
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn tail(&self) -> Option<TailTerm> {
        self.tail
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn zero_mask(&self) -> &BTreeSet<Coef> {
        &self.zero_mask
    }

    /// Numerator order.
    pub fn n(&self) -> usize {
        self.alpha.len() - 1
    }

    /// Denominator order.
    pub fn m(&self) -> usize {
        self.beta.len()
    }

    /// Dense numerator coefficients in `t`, tail included.
    pub fn numerator_coefficients(&self) -> &[f64] {
        &self.num
    }

    /// Dense denominator coefficients in `t`, leading 1 and tail included.
    pub fn denominator_coefficients(&self) -> &[f64] {
        &self.den
    }

    /// Value of a stored coefficient, or `None` if it does not exist.
    pub fn coefficient(&self, coef: Coef) -> Option<f64> {
        match coef {
            Coef::Alpha(i) => self.alpha.get(i).copied(),
            Coef::Beta(j) if j >= 1 => self.beta.get(j - 1).copied(),
            Coef::Beta(_) => None,
            Coef::Tail => self.tail.map(|t| t.coefficient),
        }
    }

    /// `t = x^q`. Integer powers use `powi`, so negative abscissae are only
    /// meaningful for integer `q`.
    pub fn substitute(&self, x: f64) -> f64 {
        substitute(x, self.q)
    }

    /// Denominator evaluated in the substituted coordinate.
    pub fn denominator_at(&self, x: f64) -> f64 {
        horner(&self.den, self.substitute(x))
    }

    pub fn numerator_at(&self, x: f64) -> f64 {
        horner(&self.num, self.substitute(x))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let t = self.substitute(x);
        let q = horner(&self.den, t);
        if !(q.abs() > EVAL_TOLERANCE) {
            return Err(Error::DenominatorZero { x });
        }
        Ok(horner(&self.num, t) / q)
    }

    /// `dR/dx` by the quotient rule, with the chain rule through `x^q`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let t = self.substitute(x);
        let (p, dp) = horner_with_derivative(&self.num, t);
        let (q, dq) = horner_with_derivative(&self.den, t);
        if !(q.abs() > EVAL_TOLERANCE) {
            return Err(Error::DenominatorZero { x });
        }
        let dr_dt = (dp * q - p * dq) / (q * q);
        if self.q == 1.0 {
            Ok(dr_dt)
        } else {
            Ok(dr_dt * self.q * x.powf(self.q - 1.0))
        }
    }

    /// First `k + 1` Maclaurin coefficients of `R`, by power-series division.
    pub fn taylor_coefficients(&self, k: usize) -> Result<Vec<f64>> {
        if self.q != 1.0 {
            return Err(Error::UnsupportedSubstitution { q: self.q });
        }
        let mut c = Vec::with_capacity(k + 1);
        for i in 0..=k {
            let mut ci = self.num.get(i).copied().unwrap_or(0.0);
            for j in 1..=i.min(self.den.len() - 1) {
                ci -= self.den[j] * c[i - j];
            }
            c.push(ci);
        }
        Ok(c)
    }

    /// Sum of two rational functions in canonical (normalized) form.
    pub fn add(&self, other: &RationalModel) -> Result<RationalModel> {
        for model in [self, other] {
            if model.q != 1.0 {
                return Err(Error::UnsupportedSubstitution { q: model.q });
            }
            if model.tail.is_some() {
                return Err(Error::InvalidConfig(
                    "cannot add models with a tail term".into(),
                ));
            }
        }
        let num = poly_add(
            &poly_mul(&self.num, &other.den),
            &poly_mul(&other.num, &self.den),
        );
        let den = poly_mul(&self.den, &other.den);
        RationalModel::from_polynomials(&num, &den)
    }

    /// Scans the denominator for real sign changes on `interval`.
    pub fn pole_scan(&self, interval: (f64, f64), points: usize) -> Result<PoleReport> {
        let (a, b) = interval;
        if points < 2 || !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "pole scan needs points >= 2 and a < b, got {points} on [{a}, {b}]"
            )));
        }
        let step = (b - a) / (points - 1) as f64;
        let grid: Vec<f64> = (0..points)
            .map(|i| {
                if i + 1 == points {
                    b
                } else {
                    a + step * i as f64
                }
            })
            .collect();
        let values: Vec<f64> = grid.iter().map(|&x| self.denominator_at(x)).collect();
        let min_abs_denominator = values
            .iter()
            .filter(|v| !v.is_nan())
            .fold(f64::INFINITY, |acc, v| acc.min(v.abs()));

        let mut sign_changes = Vec::new();
        for i in 0..points - 1 {
            let (lo, hi) = (grid[i], grid[i + 1]);
            let (vlo, vhi) = (values[i], values[i + 1]);
            if vlo == 0.0 {
                sign_changes.push(SignChange {
                    lo,
                    hi: lo,
                    root: lo,
                });
            } else if vlo * vhi < 0.0 {
                let root = bisect(|x| self.denominator_at(x), lo, hi, vlo);
                sign_changes.push(SignChange { lo, hi, root });
            }
        }
        if values[points - 1] == 0.0 {
            sign_changes.push(SignChange {
                lo: b,
                hi: b,
                root: b,
            });
        }
        Ok(PoleReport {
            sign_changes,
            min_abs_denominator,
            interval,
            points,
        })
    }
}

/// A bracketed sign change of the denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignChange {
    pub lo: f64,
    pub hi: f64,
    pub root: f64,
}

/// Result of [`RationalModel::pole_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleReport {
    pub sign_changes: Vec<SignChange>,
    pub min_abs_denominator: f64,
    pub interval: (f64, f64),
    pub points: usize,
}

impl PoleReport {
    pub fn count(&self) -> usize {
        self.sign_changes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sign_changes.is_empty()
    }
}

pub(crate) fn substitute(x: f64, q: f64) -> f64 {
    if q == 1.0 {
        x
    } else if q.fract() == 0.0 && q <= i32::MAX as f64 {
        x.powi(q as i32)
    } else {
        x.powf(q)
    }
}

pub(crate) fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn horner_with_derivative(coeffs: &[f64], t: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * t + p;
        p = p * t + c;
    }
    (p, dp)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, &c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, &c) in b.iter().enumerate() {
        out[i] += c;
    }
    out
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    while hi - lo > POLE_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Serialized form of a model.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelRecord {
    q: f64,
    n: usize,
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<TailRecord>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    zero_mask: BTreeSet<Coef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TailRecord {
    l: usize,
    alpha_l: f64,
    #[serde(default = "default_limit")]
    limit: f64,
}

impl From<RationalModel> for ModelRecord {
    fn from(model: RationalModel) -> Self {
        ModelRecord {
            q: model.q,
            n: model.n(),
            m: model.m(),
            tail: model.tail.map(|t| TailRecord {
                l: t.power,
                alpha_l: t.coefficient,
                limit: t.limit,
            }),
            alpha: model.alpha,
            beta: model.beta,
            zero_mask: model.zero_mask,
        }
    }
}

impl TryFrom<ModelRecord> for RationalModel {
    type Error = Error;

    fn try_from(rec: ModelRecord) -> Result<Self> {
        if rec.alpha.len() != rec.n + 1 || rec.beta.len() != rec.m {
            return Err(Error::Parse(format!(
                "model record declares n = {}, m = {} but lists {} alpha and {} beta values",
                rec.n,
                rec.m,
                rec.alpha.len(),
                rec.beta.len()
            )));
        }
        let mut model = RationalModel::new(rec.alpha, rec.beta)?.with_q(rec.q)?;
        if let Some(t) = rec.tail {
            model = model.with_tail_term(TailTerm {
                power: t.l,
                coefficient: t.alpha_l,
                limit: t.limit,
            })?;
        }
        model.with_zero_mask(rec.zero_mask)
    }
}

//! Seeded synthetic data.
//!
//! All randomness comes from [`NormalStream`]: a ChaCha8 generator seeded
//! with `seed_from_u64(seed)`, uniforms built from the top 53 bits of each
//! `next_u64`, and normal deviates from the Box–Muller transform. Both
//! members of each Box–Muller pair are used, cosine first.

use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::Dataset;
use crate::weibull::WeibullParams;

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

/// Multiplicative noise `F = f(x)·(1 + z)`, `z ~ N(mu, sigma²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(default)]
    pub mu: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Self {
        NoiseSpec {
            mu: 0.0,
            sigma,
            seed,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite() && self.mu.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise needs finite mu and sigma >= 0, got mu = {}, sigma = {}",
                self.mu, self.sigma
            )));
        }
        Ok(())
    }
}

/// Deterministic uniform and normal deviates.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        NormalStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * TWO_POW_M53
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn open_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_M53
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn normal(&mut self, mu: f64, sigma: f64) -> f64 {
        mu + sigma * self.standard_normal()
    }
}

/// `subintervals + 1` equally spaced points from `a` to `b` inclusive.
pub fn uniform_grid(a: f64, b: f64, subintervals: usize) -> Result<Vec<f64>> {
    if subintervals == 0 {
        return Err(Error::InvalidConfig(
            "grid needs at least one subinterval".into(),
        ));
    }
    let n = subintervals as f64;
    Ok((0..=subintervals)
        .map(|k| {
            if k == subintervals {
                b
            } else {
                a + (b - a) * k as f64 / n
            }
        })
        .collect())
}

/// Samples `f` at `xs` with multiplicative noise; the dataset keeps `f` as
/// its underlying function.
pub fn sample_noisy<F>(f: F, xs: &[f64], noise: NoiseSpec) -> Result<Dataset>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    noise.validate()?;
    let mut stream = NormalStream::new(noise.seed);
    let points = xs
        .iter()
        .map(|&x| (x, f(x) * (1.0 + stream.normal(noise.mu, noise.sigma))))
        .collect();
    Ok(Dataset::new(points)?.with_underlying(f))
}

/// Inverse-CDF failure times `θ(-ln(1 - P))^(1/shape)` from the given
/// uniforms, sorted ascending.
pub fn weibull_failures_from_uniforms(
    params: WeibullParams,
    uniforms: impl IntoIterator<Item = f64>,
) -> Vec<f64> {
    let mut times: Vec<f64> = uniforms
        .into_iter()
        .map(|p| params.theta * (-(-p).ln_1p()).powf(1.0 / params.shape))
        .collect();
    times.sort_by(f64::total_cmp);
    times
}

/// `count` simulated failure times, sorted ascending.
pub fn simulate_weibull_failures(
    params: WeibullParams,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::EmptyInput);
    }
    let mut stream = NormalStream::new(seed);
    Ok(weibull_failures_from_uniforms(
        params,
        (0..count).map(|_| stream.open_uniform()),
    ))
}

/// Test functions of the worked examples.
pub mod functions {
    use crate::rational::RationalModel;

    pub fn sinusoid(x: f64) -> f64 {
        (2.0 * std::f64::consts::PI * x).sin()
    }

    /// Sum of two Lorentzian-like peaks.
    pub fn resonance(x: f64) -> f64 {
        1.0 / ((x + 0.5).powi(2) + 0.25) + (1.0 + 0.2 * x) / ((x - 0.5).powi(2) + 0.09)
    }

    /// The two peaks of [`resonance`] as normalized rational models.
    pub fn resonance_terms() -> (RationalModel, RationalModel) {
        // 1/(x² + x + 0.5) and (1 + 0.2x)/(x² - x + 0.34)
        let first = RationalModel::from_polynomials(&[1.0], &[0.5, 1.0, 1.0]);
        let second = RationalModel::from_polynomials(&[1.0, 0.2], &[0.34, -1.0, 1.0]);
        (first.expect("valid peak"), second.expect("valid peak"))
    }

    pub fn sqrt_exp(x: f64) -> f64 {
        x.sqrt() * (-x).exp()
    }

    pub fn sqrt_exp_derivative(x: f64) -> f64 {
        (-x).exp() * (0.5 / x.sqrt() - x.sqrt())
    }
}

/// The ten simulated failure times with Benard median ranks used as the
/// reliability example dataset.
pub fn failure_table() -> Dataset {
    crate::io::parse_points(include_str!("../data/failures.csv")).expect("bundled table parses")
}

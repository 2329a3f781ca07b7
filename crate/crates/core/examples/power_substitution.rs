//! Fitting √x·e^(-x) with the substitution x -> x^q.
//!
//! A cubic in x^q fits the data but grows outside it. A rational with a
//! higher-degree denominator and a tuned λ₁ penalty can decay instead,
//! though for some noise realizations it also leaves the data range badly
//! (try other seeds with `run_with_seed`).

use padefit::datagen::{functions, sample_noisy, uniform_grid, NoiseSpec};
use padefit::selection::{descending_grid, q_search, tune_lambda1, Lambda1Tuning};
use padefit::{fit_linearized, Coef, DerivativeGrid, FitConfig, FitReport};

pub fn q_grid() -> Vec<f64> {
    (0..=10).map(|k| 0.5 + 0.05 * k as f64).collect()
}

pub struct Outcome {
    pub q: f64,
    pub polynomial: FitReport,
    pub rational: Lambda1Tuning,
}

pub fn run_with_seed(seed: u64) -> padefit::Result<Outcome> {
    let xs = uniform_grid(0.0, 2.0, 10)?;
    let data = sample_noisy(functions::sqrt_exp, &xs, NoiseSpec::new(0.1, seed))?;
    let grid = DerivativeGrid::new(0.0, 2.0, 100)?;

    let (q, _) = q_search(&data, &FitConfig::new(3, 0), &q_grid())?;
    let polynomial = fit_linearized(&data, &FitConfig::new(3, 0).with_q(q).with_der_grid(grid))?;
    let baseline = polynomial.d_der.expect("grid configured");

    let config = FitConfig::new(3, 6)
        .with_zero_mask([Coef::Alpha(0)])
        .with_der_grid(grid)
        .with_pole_interval(0.0, 2.0);
    let lambda1 = descending_grid(1.0, 0.05, 0.05);
    let rational = tune_lambda1(&data, &config, &q_grid(), &lambda1, baseline, 0.1)?;
    Ok(Outcome {
        q,
        polynomial,
        rational,
    })
}

pub fn run() -> padefit::Result<Outcome> {
    run_with_seed(2)
}

fn main() -> padefit::Result<()> {
    let out = run()?;
    let p = &out.polynomial;
    println!(
        "cubic in x^{:.2}: D = {:.4}, D0 = {:.4}, D1 = {:.4}, D_der = {:.4}",
        out.q,
        p.d,
        p.d0.unwrap_or(f64::NAN),
        p.d1.unwrap_or(f64::NAN),
        p.d_der.unwrap_or(f64::NAN)
    );
    let r = &out.rational;
    println!(
        "rational n=3, m=6: q = {:.2}, lambda1 = {:.2}, D = {:.4}, D_der = {:.4}",
        r.q,
        r.lambda1,
        r.report.d,
        r.report.d_der.unwrap_or(f64::NAN)
    );
    println!(
        "{:>4} {:>10} {:>10} {:>10}",
        "x", "exact", "cubic", "rational"
    );
    for x in [1.0, 2.0, 3.0, 4.0, 5.0] {
        println!(
            "{x:>4} {:>10.4} {:>10.4} {:>10.4}",
            functions::sqrt_exp(x),
            p.model.eval(x)?,
            r.report.model.eval(x)?
        );
    }
    Ok(())
}

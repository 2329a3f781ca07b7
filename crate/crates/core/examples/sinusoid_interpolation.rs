//! Rational interpolation of sin(2πx) through 11 of its 21 grid values.
//!
//! Run with `cargo run --example sinusoid_interpolation`.

use std::collections::BTreeSet;

use padefit::datagen::{functions, sample_noisy, uniform_grid, NoiseSpec};
use padefit::{interpolate_reference, Coef, Dataset, FitReport};

pub struct Outcome {
    pub rational: FitReport,
    pub polynomial: FitReport,
    pub taylor: Vec<f64>,
}

pub fn run() -> padefit::Result<Outcome> {
    let xs = uniform_grid(0.0, 1.0, 20)?;
    let full = sample_noisy(functions::sinusoid, &xs, NoiseSpec::new(0.0, 0))?;
    // every second grid point: x = 0, 0.1, ..., 1.0
    let refs = Dataset::new(full.points().iter().step_by(2).copied().collect())?;

    let mask: BTreeSet<Coef> = [Coef::Alpha(0), Coef::Alpha(8)].into();
    let rational = interpolate_reference(&refs, 8, 2, &mask, Some(&full))?;
    let mask: BTreeSet<Coef> = [Coef::Alpha(0), Coef::Alpha(10)].into();
    let polynomial = interpolate_reference(&refs, 10, 0, &mask, Some(&full))?;
    let taylor = rational.model.taylor_coefficients(3)?;
    Ok(Outcome {
        rational,
        polynomial,
        taylor,
    })
}

fn main() -> padefit::Result<()> {
    let out = run()?;
    println!("n=8, m=2:  D = {:.4e}", out.rational.d);
    println!("  alpha = {:?}", out.rational.model.alpha());
    println!("  beta  = {:?}", out.rational.model.beta());
    println!("n=10, m=0: D = {:.4e}", out.polynomial.d);
    println!(
        "Maclaurin series: {:.4}x {:+.5}x^2 {:+.2}x^3",
        out.taylor[1], out.taylor[2], out.taylor[3]
    );
    Ok(())
}

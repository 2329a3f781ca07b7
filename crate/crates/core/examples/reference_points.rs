//! Interpolation through averaged reference points of noisy data.
//!
//! 47 noisy samples of sin(2πx) are reduced to 9 group means plus the two
//! known zeros, and every split n + m + 1 = 11 is ranked by S on all points.

use padefit::datagen::{functions, sample_noisy, uniform_grid, NoiseSpec};
use padefit::selection::interpolation_search;
use padefit::{build_reference_points, interpolate_reference, Dataset, FitReport};

pub struct Outcome {
    pub refs: Dataset,
    pub best: FitReport,
    pub polynomial: FitReport,
}

pub fn run_with_seed(seed: u64) -> padefit::Result<Outcome> {
    let xs = uniform_grid(0.0, 1.0, 46)?;
    let data = sample_noisy(functions::sinusoid, &xs, NoiseSpec::new(0.1, seed))?;
    let refs = build_reference_points(&data, 5, &[(0.0, 0.0), (1.0, 0.0)])?;
    let best = interpolation_search(&refs, &data, &Default::default())?.best;
    let polynomial = interpolate_reference(&refs, 10, 0, &Default::default(), Some(&data))?;
    Ok(Outcome {
        refs,
        best,
        polynomial,
    })
}

pub fn run() -> padefit::Result<Outcome> {
    run_with_seed(1)
}

fn main() -> padefit::Result<()> {
    let out = run()?;
    println!("{} reference points:", out.refs.len());
    for (x, y) in out.refs.points() {
        println!("  {x:.4}  {y:+.4}");
    }
    let b = &out.best;
    println!(
        "best n={}, m={}: D = {:.4}, D0 = {:.4}, D1 = {:.4}",
        b.config.n,
        b.config.m,
        b.d,
        b.d0.unwrap_or(f64::NAN),
        b.d1.unwrap_or(f64::NAN)
    );
    let p = &out.polynomial;
    println!(
        "polynomial n=10: D = {:.4}, D1 = {:.4}",
        p.d,
        p.d1.unwrap_or(f64::NAN)
    );
    Ok(())
}

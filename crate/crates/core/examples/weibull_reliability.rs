//! Weibull estimates and mean time to failure from ten failure times.

use padefit::datagen::failure_table;
use padefit::weibull::{median_ranks, mle_fit, rational_mttf, transform_fit, RankConfig};
use padefit::{fit_regularized, FitConfig, WeibullParams};

pub struct Outcome {
    pub ranks: Vec<f64>,
    pub transform: WeibullParams,
    pub mle: WeibullParams,
    pub exact_mttf: f64,
    pub mle_mttf: f64,
    pub rational_mttf: f64,
}

pub fn run() -> padefit::Result<Outcome> {
    let data = failure_table();
    let times: Vec<f64> = data.xs().collect();
    let ranks = median_ranks(times.len(), RankConfig::BENARD);
    let transform = transform_fit(&times, &ranks)?;
    let mle = mle_fit(&times)?;

    let cdf = fit_regularized(&data, &FitConfig::cdf(6, 0, 12).with_lambda(0.0025))?;
    let max_x = times.iter().copied().fold(0.0, f64::max);
    Ok(Outcome {
        ranks,
        transform,
        mle,
        exact_mttf: WeibullParams::new(1.0, 2.0)?.mttf(),
        mle_mttf: mle.mttf(),
        rational_mttf: rational_mttf(&cdf.model, max_x)?,
    })
}

fn main() -> padefit::Result<()> {
    let out = run()?;
    let ranks: Vec<String> = out.ranks.iter().map(|r| format!("{r:.4}")).collect();
    println!("median ranks: {}", ranks.join(" "));
    println!(
        "log-log fit:  theta = {:.4}, shape = {:.4}",
        out.transform.theta, out.transform.shape
    );
    println!(
        "likelihood:   theta = {:.4}, shape = {:.4}",
        out.mle.theta, out.mle.shape
    );
    println!("MTTF generating Weibull(1, 2): {:.4}", out.exact_mttf);
    println!("MTTF likelihood estimate:      {:.4}", out.mle_mttf);
    println!("MTTF regularized rational CDF: {:.4}", out.rational_mttf);
    Ok(())
}

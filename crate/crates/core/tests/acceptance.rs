use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use padefit::datagen::{
    failure_table, functions, sample_noisy, uniform_grid, NoiseSpec, NormalStream,
};
use padefit::linsys::{assemble_normal_system, solve_dense};
use padefit::selection::{choose_lambda, PLATEAU_TOLERANCE};
use padefit::*;

#[allow(dead_code)]
#[path = "../examples/power_substitution.rs"]
mod power_substitution;
#[allow(dead_code)]
#[path = "../examples/reference_points.rs"]
mod reference_points;
#[allow(dead_code)]
#[path = "../examples/resonance_regression.rs"]
mod resonance_regression;

const SEEDS: std::ops::Range<u64> = 0..20;
const RESONANCE_ALPHA: [f64; 4] = [4.941, 0.5882, 12.94, 4.176];
const RESONANCE_BETA: [f64; 4] = [-1.0, -1.0, 0.0, 5.882];
const FAILURE_LAMBDAS: [f64; 7] = [0.0, 0.0005, 0.001, 0.002, 0.0025, 0.005, 0.01];

type Check = fn() -> padefit::Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel_ok(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * want.abs()
}

fn within(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol
}

fn matches_printed(model: &RationalModel, tol: f64) -> (bool, String) {
    let mut ok = true;
    let mut misses = Vec::new();
    for (i, (&g, &w)) in model.alpha().iter().zip(&RESONANCE_ALPHA).enumerate() {
        if !rel_ok(g, w, tol) {
            ok = false;
            misses.push(format!("alpha{i} = {g:.5} (target {w})"));
        }
    }
    for (j, (&g, &w)) in model.beta().iter().zip(&RESONANCE_BETA).enumerate() {
        if !rel_ok(g, w, tol) {
            ok = false;
            misses.push(format!("beta{} = {g:.5} (target {w})", j + 1));
        }
    }
    ok &= model.alpha().len() == 4 && model.beta().len() == 4;
    (ok, misses.join(", "))
}

fn cdf_config() -> FitConfig {
    FitConfig::cdf(6, 0, 12)
        .with_der_grid(DerivativeGrid::new(0.0, 2.0, 40).unwrap())
        .with_pole_interval(0.0, 2.0)
}

fn weibull_times() -> Vec<f64> {
    failure_table().xs().collect()
}

fn criterion_1() -> padefit::Result<Outcome> {
    let (a, b) = functions::resonance_terms();
    let _ = a.add(&b)?;
    let start = Instant::now();
    let sum = a.add(&b)?;
    let elapsed = start.elapsed();
    let (ok, misses) = matches_printed(&sum, 1e-3);
    let fast = elapsed < Duration::from_millis(1);
    Ok(outcome(
        ok && fast,
        format!(
            "alpha = {:.5?}, beta = {:.5?}, {elapsed:?}; misses: [{misses}]",
            sum.alpha(),
            sum.beta()
        ),
    ))
}

fn criterion_2() -> padefit::Result<Outcome> {
    let xs = uniform_grid(-1.0, 1.0, 20)?;
    let data = sample_noisy(functions::resonance, &xs, NoiseSpec::new(0.0, 0))?;
    let r = fit_linearized(&data, &FitConfig::new(3, 4))?;
    let sum_sq: f64 = data.ys().map(|f| f * f).sum();
    let (ok, misses) = matches_printed(&r.model, 5e-3);
    let exact = r.s0 <= 1e-16 * sum_sq;
    Ok(outcome(
        ok && exact,
        format!(
            "S0 = {:.3e} (bound {:.3e}); misses: [{misses}]",
            r.s0,
            1e-16 * sum_sq
        ),
    ))
}

fn criterion_3() -> padefit::Result<Outcome> {
    let r = fit_regularized(&failure_table(), &cdf_config())?;
    let d_ok = within(r.d, 0.03195, 0.001);
    Ok(outcome(
        d_ok && r.has_poles(),
        format!(
            "D = {:.5} (target 0.03195 ± 0.001), sign changes on [0, 2]: {}",
            r.d,
            r.poles.count()
        ),
    ))
}

fn criterion_4() -> padefit::Result<Outcome> {
    let r = fit_regularized(&failure_table(), &cdf_config().with_lambda(0.0025))?;
    let d_der = r.d_der.unwrap_or(f64::NAN);
    let values: Vec<f64> = uniform_grid(0.0, 2.0, 199)?
        .into_iter()
        .map(|x| r.model.eval(x))
        .collect::<padefit::Result<_>>()?;
    let monotone = values.windows(2).all(|w| w[1] >= w[0]);
    Ok(outcome(
        within(r.d, 0.03213, 0.001) && within(d_der, 0.5804, 0.02) && !r.has_poles() && monotone,
        format!(
            "D = {:.5}, D_der = {d_der:.5}, poles = {}, non-decreasing = {monotone}",
            r.d,
            r.poles.count()
        ),
    ))
}

fn criterion_5() -> padefit::Result<Outcome> {
    let start = Instant::now();
    let grid = DerivativeGrid::new(0.0, 2.0, 40)?;
    let sweep = lambda_sweep(&failure_table(), &cdf_config(), &FAILURE_LAMBDAS, grid)?;
    let chosen = choose_lambda(&sweep, PLATEAU_TOLERANCE)?;
    let elapsed = start.elapsed();
    let at = |lambda: f64| {
        sweep
            .rows
            .iter()
            .find(|r| r.lambda == lambda)
            .expect("grid value")
    };
    let ratio = at(0.0).d_der.unwrap_or(f64::NAN) / at(0.0025).d_der.unwrap_or(f64::NAN);
    let ds: Vec<f64> = sweep
        .rows
        .iter()
        .filter(|r| r.lambda >= 0.0025)
        .map(|r| r.d.unwrap_or(f64::NAN))
        .collect();
    let increasing = ds.windows(2).all(|w| w[1] >= w[0]);
    Ok(outcome(
        ratio >= 5.0
            && increasing
            && (0.002..=0.005).contains(&chosen)
            && elapsed < Duration::from_secs(1),
        format!(
            "ratio = {ratio:.2}, D for λ ≥ 0.0025 = {ds:.5?}, chosen λ = {chosen}, {elapsed:?}"
        ),
    ))
}

fn criterion_6() -> padefit::Result<Outcome> {
    let p = mle_fit(&weibull_times())?;
    Ok(outcome(
        within(p.theta, 0.9488, 0.001) && within(p.shape, 2.252, 0.002),
        format!("theta = {:.5}, shape = {:.5}", p.theta, p.shape),
    ))
}

fn criterion_7() -> padefit::Result<Outcome> {
    let exact = WeibullParams::new(1.0, 2.0)?.mttf();
    let mle = mle_fit(&weibull_times())?.mttf();
    let fitted = fit_regularized(&failure_table(), &cdf_config().with_lambda(0.0025))?;
    let max_x = weibull_times().into_iter().fold(0.0, f64::max);
    let rational = rational_mttf(&fitted.model, max_x)?;
    Ok(outcome(
        within(exact, 0.8862, 1e-4)
            && within(mle, 0.8404, 0.001)
            && within(rational, 0.8327, 0.005),
        format!("exact = {exact:.5}, MLE = {mle:.5}, rational = {rational:.5}"),
    ))
}

fn brute_force_oscillation(f: impl Fn(f64) -> f64, grid: &DerivativeGrid) -> f64 {
    let pts = grid.points();
    let sum: f64 = pts
        .iter()
        .map(|&x| {
            let h = 1e-6 * x.abs().max(1e-3);
            let d = (f(x + h) - f(x - h)) / (2.0 * h);
            d * d
        })
        .sum();
    (sum / pts.len() as f64).sqrt()
}

fn criterion_8() -> padefit::Result<Outcome> {
    let weibull = WeibullParams::new(1.0, 2.0)?;
    let placements = [
        GridPlacement::RightEndpoint,
        GridPlacement::Midpoint,
        GridPlacement::OpenUniform,
    ];
    let mut readings = Vec::new();
    for placement in placements {
        let g40 = DerivativeGrid::new(0.0, 2.0, 40)?.with_placement(placement);
        let g100 = DerivativeGrid::new(0.0, 2.0, 100)?.with_placement(placement);
        let w = oscillation_measure(|x| Ok(weibull.pdf(x)), &g40)?;
        let s = oscillation_measure(|x| Ok(functions::sqrt_exp_derivative(x)), &g100)?;
        let w_bf = brute_force_oscillation(|x| weibull.cdf(x), &g40);
        let s_bf = brute_force_oscillation(functions::sqrt_exp, &g100);
        let agree = rel_ok(w, w_bf, 1e-5) && rel_ok(s, s_bf, 1e-5);
        readings.push((placement, w, s, agree));
    }
    let pinned = DerivativeGrid::new(0.0, 2.0, 40)?.placement;
    let &(_, w, s, agree) = readings
        .iter()
        .find(|r| r.0 == pinned)
        .expect("pinned placement");
    let all_agree = readings.iter().all(|r| r.3);
    let text: Vec<String> = readings
        .iter()
        .map(|(p, w, s, _)| format!("{p:?}: {w:.5}/{s:.5}"))
        .collect();
    Ok(outcome(
        within(w, 0.5595, 0.01) && within(s, 0.5268, 0.01) && agree && all_agree,
        format!(
            "pinned {pinned:?}; Weibull/sqrt-exp readings {}",
            text.join(", ")
        ),
    ))
}

fn criterion_9() -> padefit::Result<Outcome> {
    let xs = uniform_grid(0.0, 1.0, 20)?;
    let full = sample_noisy(functions::sinusoid, &xs, NoiseSpec::new(0.0, 0))?;
    let refs = Dataset::new(full.points().iter().step_by(2).copied().collect())?;
    let mask: BTreeSet<Coef> = [Coef::Alpha(0), Coef::Alpha(8)].into();
    let rational = interpolate_reference(&refs, 8, 2, &mask, Some(&full))?;
    let mask: BTreeSet<Coef> = [Coef::Alpha(0), Coef::Alpha(10)].into();
    let polynomial = interpolate_reference(&refs, 10, 0, &mask, Some(&full))?;
    let a1 = rational.model.taylor_coefficients(1)?[1];
    Ok(outcome(
        rational.d <= 1e-4 && rel_ok(a1, 6.285, 5e-3) && polynomial.d <= 1e-4,
        format!(
            "rational D = {:.4e}, taylor alpha1 = {a1:.4}, polynomial D = {:.4e}",
            rational.d, polynomial.d
        ),
    ))
}

fn criterion_10() -> padefit::Result<Outcome> {
    let ranks = median_ranks(10, RankConfig::new(0.3)?);
    let table: Vec<f64> = failure_table().ys().collect();
    let ok = ranks
        .iter()
        .zip(&table)
        .all(|(r, t)| ((r * 1e4).round() - (t * 1e4).round()).abs() < 0.5);
    Ok(outcome(ok, format!("ranks = {ranks:.4?}")))
}

fn random_dataset(stream: &mut NormalStream, count: usize) -> padefit::Result<Dataset> {
    let mut xs: Vec<f64> = (0..count).map(|_| 2.0 * stream.uniform()).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| (1.0 + x).ln() + 0.1 * stream.standard_normal())
        .collect();
    Dataset::from_xy(&xs, &ys)
}

fn s0_gradient_ok(data: &Dataset, config: &FitConfig) -> padefit::Result<bool> {
    let system = assemble_normal_system(data, config)?;
    let (theta, _) = solve_dense(&system)?;
    let s0 = |t: &[f64]| -> f64 {
        let mut total = 0.0;
        for &(x, f) in data.points() {
            let mut r = -f;
            for (c, v) in system.column_map.iter().zip(t) {
                r += v * match *c {
                    Coef::Alpha(i) => x.powi(i as i32),
                    Coef::Beta(j) => -f * x.powi(j as i32),
                    Coef::Tail => unreachable!("no tail configured"),
                };
            }
            total += r * r;
        }
        total
    };
    let base = s0(&theta);
    for k in 0..theta.len() {
        let h = 1e-6 * theta[k].abs().max(1.0);
        let mut up = theta.clone();
        let mut down = theta.clone();
        up[k] += h;
        down[k] -= h;
        if ((s0(&up) - s0(&down)) / (2.0 * h)).abs() > 1e-6 * (1.0 + base) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn criterion_11() -> padefit::Result<Outcome> {
    let mut failures = Vec::new();
    let mut stream = NormalStream::new(11);
    for trial in 0..20 {
        let data = random_dataset(&mut stream, 15)?;
        for n in 0..4 {
            let r = fit_linearized(&data, &FitConfig::new(n, 0))?;
            if (r.s - r.s0).abs() > 1e-12 * r.s.max(1e-300) {
                failures.push(format!("S0 != S (trial {trial}, n {n})"));
            }
        }
        for (n, m) in [(1, 1), (2, 1), (2, 2)] {
            if !s0_gradient_ok(&data, &FitConfig::new(n, m))? {
                failures.push(format!("gradient (trial {trial}, n {n}, m {m})"));
            }
        }
        let refs = Dataset::new(data.points().iter().step_by(3).copied().collect())?;
        if refs.len() >= 3 {
            let m = 1;
            let n = refs.len() - 1 - m;
            if let Ok(r) = interpolate_reference(&refs, n, m, &BTreeSet::new(), None) {
                for &(x, f) in refs.points() {
                    if (r.model.eval(x)? - f).abs() > 1e-9 * (1.0 + f.abs()) {
                        failures.push(format!("interpolation (trial {trial}, x {x})"));
                    }
                }
            }
        }
        let result = grid_search(
            &data,
            &SearchSpace::new((0, 3), (0, 2)),
            &FitConfig::new(0, 0),
        )?;
        if result.candidates.len() != 12 {
            failures.push(format!(
                "grid search visited {} cells",
                result.candidates.len()
            ));
        }
    }
    let bits = |d: &Dataset| d.ys().map(f64::to_bits).collect::<Vec<_>>();
    let xs = uniform_grid(-1.0, 1.0, 20)?;
    for seed in [0, 7, 19] {
        let a = sample_noisy(functions::resonance, &xs, NoiseSpec::new(0.05, seed))?;
        let b = sample_noisy(functions::resonance, &xs, NoiseSpec::new(0.05, seed))?;
        let t1 =
            padefit::datagen::simulate_weibull_failures(WeibullParams::new(1.0, 2.0)?, 10, seed)?;
        let t2 =
            padefit::datagen::simulate_weibull_failures(WeibullParams::new(1.0, 2.0)?, 10, seed)?;
        let r1 = format!("{:?}", reference_points::run_with_seed(seed)?.best);
        let r2 = format!("{:?}", reference_points::run_with_seed(seed)?.best);
        if bits(&a) != bits(&b) || t1 != t2 || r1 != r2 {
            failures.push(format!("determinism (seed {seed})"));
        }
    }
    Ok(outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "all invariants hold".into()
        } else {
            failures.join("; ")
        },
    ))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn criterion_12a() -> padefit::Result<Outcome> {
    let mut better = 0;
    let mut ns = Vec::new();
    let mut ms = Vec::new();
    for seed in SEEDS {
        let b = resonance_regression::run_with_seed(seed)?.noisy_best;
        if b.d1.unwrap_or(f64::NAN) < b.d0.unwrap_or(f64::NAN) {
            better += 1;
        }
        ns.push(b.config.n as f64);
        ms.push(b.config.m as f64);
    }
    let runs = SEEDS.count();
    let (n, m) = (median(ns.clone()), median(ms));
    Ok(outcome(
        better * 5 >= runs * 4 && n == 3.0 && m == 4.0,
        format!("D1 < D0 in {better}/{runs}; median order ({n}, {m}); selected n = {ns:?}"),
    ))
}

fn criterion_12b() -> padefit::Result<Outcome> {
    let mut better = 0;
    for seed in SEEDS {
        let b = reference_points::run_with_seed(seed)?.best;
        if b.d1.unwrap_or(f64::NAN) < b.d0.unwrap_or(f64::NAN) {
            better += 1;
        }
    }
    let runs = SEEDS.count();
    Ok(outcome(
        better * 5 >= runs * 4,
        format!("D1 < D0 in {better}/{runs}"),
    ))
}

fn criterion_12c() -> padefit::Result<Outcome> {
    let mut q_in = 0;
    let mut flat = 0;
    let mut tails = Vec::new();
    for seed in SEEDS {
        let out = power_substitution::run_with_seed(seed)?;
        if (0.5..=0.8).contains(&out.q) {
            q_in += 1;
        }
        let r4 = out.rational.report.model.eval(4.0)?;
        if r4.abs() < 0.05 {
            flat += 1;
        }
        tails.push(r4);
    }
    let runs = SEEDS.count();
    Ok(outcome(
        q_in == runs && flat * 5 >= runs * 4,
        format!(
            "q in [0.5, 0.8] in {q_in}/{runs}; |R(4)| < 0.05 in {flat}/{runs}; R(4) = {tails:.3?}"
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 14] = [
        ("1 resonance canonicalization", criterion_1),
        ("2 noiseless rational recovery", criterion_2),
        ("3 unregularized CDF fit", criterion_3),
        ("4 regularized CDF fit", criterion_4),
        ("5 lambda sweep", criterion_5),
        ("6 Weibull MLE", criterion_6),
        ("7 MTTF triple", criterion_7),
        ("8 oscillation baselines", criterion_8),
        ("9 sinusoid interpolation", criterion_9),
        ("10 median ranks", criterion_10),
        ("11 property suite", criterion_11),
        ("12a resonance over seeds", criterion_12a),
        ("12b averaged reference points over seeds", criterion_12b),
        ("12c power substitution over seeds", criterion_12c),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, check) in criteria {
        let result = check().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {name}: {}", result.detail);
        failed += usize::from(!result.pass);
    }
    let total = start.elapsed();
    let fast = total < Duration::from_secs(60);
    println!(
        "{} criterion 12 total runtime: {total:?} (limit 60 s)",
        if fast { "PASS" } else { "FAIL" }
    );
    failed += usize::from(!fast);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

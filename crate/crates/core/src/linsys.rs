//! Linear systems behind the linearized least-squares fit.
//!
//! Each data point contributes the linearized residual
//! `Σ αᵢ tᵢ - F Σ βⱼ tʲ + (c - F) α_l t^l - F`, which is linear in every free
//! coefficient. Its sum of squares `S₀` is minimized by the normal equations
//! `GᵀG θ = Gᵀ F`, assembled here directly from the design rows so the matrix
//! is symmetric by construction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{Dataset, FitConfig};
use crate::rational::{substitute, Coef};

/// Relative pivot size below which elimination declares the system singular.
pub const SINGULAR_PIVOT: f64 = 1e-14;

/// Pivot ratio below which the solve is flagged as ill conditioned.
pub const CONDITION_RATIO: f64 = 1e-12;

/// Square system `A θ = B` with the coefficient carried by each column.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub column_map: Vec<Coef>,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.b.len()
    }
}

/// Rows of an interpolation problem, possibly with more equations than unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct RectangularSystem {
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub column_map: Vec<Coef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub pivot_min: f64,
    pub pivot_max: f64,
    /// Set when `pivot_min / pivot_max < 1e-12` or the multiply-back residual
    /// exceeds `1e-8·(1 + ‖B‖∞)`.
    pub condition_flag: bool,
    /// `‖Aθ - B‖∞` of the returned solution.
    pub residual: f64,
}

/// Free coefficients of a configuration, in column order: α, β, tail.
pub fn free_columns(config: &FitConfig) -> Vec<Coef> {
    let alphas = (0..=config.n).map(Coef::Alpha);
    let betas = (1..=config.m).map(Coef::Beta);
    let tail = config.tail_l.map(|_| Coef::Tail);
    alphas
        .chain(betas)
        .chain(tail)
        .filter(|c| !config.zero_mask.contains(c))
        .collect()
}

/// Substituted abscissae `t = x^q`, rejecting negative `x` for non-integer `q`.
pub(crate) fn substituted_abscissae(xs: impl Iterator<Item = f64>, q: f64) -> Result<Vec<f64>> {
    let integer_q = q.fract() == 0.0;
    xs.map(|x| {
        if !integer_q && x < 0.0 {
            Err(Error::NegativeAbscissa { x })
        } else {
            Ok(substitute(x, q))
        }
    })
    .collect()
}

fn design_value(coef: Coef, t: f64, f: f64, tail_l: Option<usize>, tail_limit: f64) -> f64 {
    match coef {
        Coef::Alpha(i) => t.powi(i as i32),
        Coef::Beta(j) => -f * t.powi(j as i32),
        Coef::Tail => {
            let l = tail_l.expect("tail column without tail power");
            (tail_limit - f) * t.powi(l as i32)
        }
    }
}

/// Assembles the normal equations of `S₀` for `config` (substitution applied).
pub fn assemble_normal_system(data: &Dataset, config: &FitConfig) -> Result<LinearSystem> {
    config.validate()?;
    let column_map = free_columns(config);
    let p = column_map.len();
    if data.len() < p {
        return Err(Error::InsufficientData {
            points: data.len(),
            unknowns: p,
        });
    }
    let ts = substituted_abscissae(data.xs(), config.q)?;

    let mut a = vec![vec![0.0; p]; p];
    let mut b = vec![0.0; p];
    let mut row = vec![0.0; p];
    for (&t, &(_, f)) in ts.iter().zip(data.points()) {
        for (slot, &coef) in row.iter_mut().zip(&column_map) {
            *slot = design_value(coef, t, f, config.tail_l, config.tail_limit);
        }
        for i in 0..p {
            for j in i..p {
                a[i][j] += row[i] * row[j];
            }
            b[i] += row[i] * f;
        }
    }
    for i in 0..p {
        for j in 0..i {
            a[i][j] = a[j][i];
        }
    }
    Ok(LinearSystem { a, b, column_map })
}

/// Adds `lambda` to the diagonal of every α (and tail) column and `lambda1`
/// to every β column.
pub fn apply_regularization(
    system: &LinearSystem,
    lambda: f64,
    lambda1: f64,
) -> Result<LinearSystem> {
    for value in [lambda, lambda1] {
        if !(value >= 0.0) {
            return Err(Error::NegativeWeight { value });
        }
    }
    let mut out = system.clone();
    for (i, coef) in system.column_map.iter().enumerate() {
        let weight = match coef {
            Coef::Alpha(_) | Coef::Tail => lambda,
            Coef::Beta(_) => lambda1,
        };
        if weight != 0.0 {
            out.a[i][i] += weight;
        }
    }
    Ok(out)
}

/// Gaussian elimination with partial (row) pivoting.
pub fn solve_dense(system: &LinearSystem) -> Result<(Vec<f64>, SolveDiagnostics)> {
    let p = system.dim();
    if system.a.len() != p || system.a.iter().any(|r| r.len() != p) {
        return Err(Error::InvalidConfig("system matrix is not square".into()));
    }
    let scale = system
        .a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let threshold = SINGULAR_PIVOT * scale;

    let mut a = system.a.clone();
    let mut b = system.b.clone();
    let mut pivot_min = f64::INFINITY;
    let mut pivot_max = 0.0f64;

    for col in 0..p {
        let pivot_row = (col..p)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty pivot range");
        let pivot = a[pivot_row][col];
        if !(pivot.abs() >= threshold) || pivot == 0.0 {
            return Err(Error::SingularSystem {
                column: col,
                pivot: pivot.abs(),
            });
        }
        pivot_min = pivot_min.min(pivot.abs());
        pivot_max = pivot_max.max(pivot.abs());
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);

        for row in col + 1..p {
            let factor = a[row][col] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[row][col] = 0.0;
            for k in col + 1..p {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }

    let mut theta = vec![0.0; p];
    for row in (0..p).rev() {
        let tail: f64 = (row + 1..p).map(|k| a[row][k] * theta[k]).sum();
        theta[row] = (b[row] - tail) / a[row][row];
    }

    let residual = system
        .a
        .iter()
        .zip(&system.b)
        .map(|(r, bi)| (r.iter().zip(&theta).map(|(x, y)| x * y).sum::<f64>() - bi).abs())
        .fold(0.0f64, f64::max);
    let b_norm = system.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let (pivot_min, pivot_max) = if p == 0 {
        (0.0, 0.0)
    } else {
        (pivot_min, pivot_max)
    };
    let condition_flag =
        (p > 0 && pivot_min / pivot_max < CONDITION_RATIO) || residual > 1e-8 * (1.0 + b_norm);

    Ok((
        theta,
        SolveDiagnostics {
            pivot_min,
            pivot_max,
            condition_flag,
            residual,
        },
    ))
}

/// Interpolation rows `Σ αᵢ xᵏⁱ - F Σ βⱼ xᵏʲ = F`, one per reference point.
pub fn assemble_interpolation_rows(
    refpoints: &Dataset,
    n: usize,
    m: usize,
    zero_mask: &BTreeSet<Coef>,
) -> Result<RectangularSystem> {
    let config = FitConfig::new(n, m).with_zero_mask(zero_mask.iter().copied());
    config.validate()?;
    let column_map = free_columns(&config);

    let mut xs: Vec<f64> = refpoints.xs().collect();
    xs.sort_by(f64::total_cmp);
    if let Some(w) = xs.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateAbscissa { x: w[0] });
    }

    let rows = refpoints
        .points()
        .iter()
        .map(|&(x, f)| {
            column_map
                .iter()
                .map(|&c| design_value(c, x, f, None, 1.0))
                .collect()
        })
        .collect();
    Ok(RectangularSystem {
        rows,
        rhs: refpoints.ys().collect(),
        column_map,
    })
}

/// Square interpolation system; the reference count must equal the number
/// of free coefficients.
pub fn assemble_interpolation_system(
    refpoints: &Dataset,
    n: usize,
    m: usize,
    zero_mask: &BTreeSet<Coef>,
) -> Result<LinearSystem> {
    let rect = assemble_interpolation_rows(refpoints, n, m, zero_mask)?;
    if rect.rows.len() != rect.column_map.len() {
        return Err(Error::CountMismatch {
            points: rect.rows.len(),
            unknowns: rect.column_map.len(),
        });
    }
    Ok(LinearSystem {
        a: rect.rows,
        b: rect.rhs,
        column_map: rect.column_map,
    })
}

/// Solves a system with at least as many rows as unknowns exactly.
///
/// Row-pivoted elimination picks the pivot equations; every surplus equation
/// must then hold to `1e-9·(1 + |rhs|)`, otherwise the reference set is
/// inconsistent with the requested model and `CountMismatch` is returned.
pub fn solve_consistent(system: &RectangularSystem) -> Result<(Vec<f64>, SolveDiagnostics)> {
    let rows = system.rows.len();
    let p = system.column_map.len();
    if rows < p {
        return Err(Error::CountMismatch {
            points: rows,
            unknowns: p,
        });
    }
    let scale = system
        .rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let threshold = SINGULAR_PIVOT * scale;

    let mut a = system.rows.clone();
    let mut b = system.rhs.clone();
    let mut pivot_min = f64::INFINITY;
    let mut pivot_max = 0.0f64;
    for col in 0..p {
        let pivot_row = (col..rows)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty pivot range");
        let pivot = a[pivot_row][col];
        if !(pivot.abs() >= threshold) || pivot == 0.0 {
            return Err(Error::SingularSystem {
                column: col,
                pivot: pivot.abs(),
            });
        }
        pivot_min = pivot_min.min(pivot.abs());
        pivot_max = pivot_max.max(pivot.abs());
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..rows {
            let factor = a[row][col] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[row][col] = 0.0;
            for k in col + 1..p {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut theta = vec![0.0; p];
    for row in (0..p).rev() {
        let tail: f64 = (row + 1..p).map(|k| a[row][k] * theta[k]).sum();
        theta[row] = (b[row] - tail) / a[row][row];
    }

    let mut residual = 0.0f64;
    for (r, &rhs) in system.rows.iter().zip(&system.rhs) {
        let lhs: f64 = r.iter().zip(&theta).map(|(x, y)| x * y).sum();
        let err = (lhs - rhs).abs();
        if err > 1e-9 * (1.0 + rhs.abs()) {
            return Err(Error::CountMismatch {
                points: rows,
                unknowns: p,
            });
        }
        residual = residual.max(err);
    }
    let (pivot_min, pivot_max) = if p == 0 {
        (0.0, 0.0)
    } else {
        (pivot_min, pivot_max)
    };
    let condition_flag = p > 0 && pivot_min / pivot_max < CONDITION_RATIO;
    Ok((
        theta,
        SolveDiagnostics {
            pivot_min,
            pivot_max,
            condition_flag,
            residual,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(a: Vec<Vec<f64>>, b: Vec<f64>) -> LinearSystem {
        let column_map = (0..b.len()).map(Coef::Alpha).collect();
        LinearSystem { a, b, column_map }
    }

    #[test]
    fn single_point_mean() {
        let data = Dataset::new(vec![(2.0, 3.0)]).unwrap();
        let sys = assemble_normal_system(&data, &FitConfig::new(0, 0)).unwrap();
        assert_eq!(sys.a, vec![vec![1.0]]);
        assert_eq!(sys.b, vec![3.0]);
        let (theta, _) = solve_dense(&sys).unwrap();
        assert_eq!(theta, vec![3.0]);
    }

    #[test]
    fn polynomial_case_is_classical_normal_equations() {
        let pts: Vec<(f64, f64)> = (0..7)
            .map(|k| (0.3 * k as f64 - 0.8, (k * k) as f64))
            .collect();
        let data = Dataset::new(pts.clone()).unwrap();
        let sys = assemble_normal_system(&data, &FitConfig::new(3, 0)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want: f64 = pts.iter().map(|(x, _)| x.powi((i + j) as i32)).sum();
                assert!((sys.a[i][j] - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
            let want: f64 = pts.iter().map(|(x, f)| f * x.powi(i as i32)).sum();
            assert!((sys.b[i] - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn three_point_rational_matches_enumeration() {
        // columns (α₀, α₁, β₁): rows (1, x, -F x), rhs F
        let pts = [(0.0, 1.0), (1.0, 2.0), (2.0, 5.0)];
        let data = Dataset::new(pts.to_vec()).unwrap();
        let sys = assemble_normal_system(&data, &FitConfig::new(1, 1)).unwrap();
        let expected_a = [[3.0, 3.0, -12.0], [3.0, 5.0, -22.0], [-12.0, -22.0, 104.0]];
        let expected_b = [8.0, 12.0, -54.0];
        assert_eq!(
            sys.column_map,
            vec![Coef::Alpha(0), Coef::Alpha(1), Coef::Beta(1)]
        );
        for i in 0..3 {
            assert_eq!(sys.b[i], expected_b[i]);
            for j in 0..3 {
                assert_eq!(sys.a[i][j], expected_a[i][j]);
            }
        }
    }

    #[test]
    fn too_few_points() {
        let data = Dataset::new(vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(
            assemble_normal_system(&data, &FitConfig::new(2, 1)),
            Err(Error::InsufficientData {
                points: 2,
                unknowns: 4
            })
        );
    }

    #[test]
    fn zero_penalty_is_bit_identical() {
        let data = Dataset::new(vec![(0.1, 1.0), (0.5, 2.0), (0.9, 0.5), (1.3, 0.1)]).unwrap();
        let sys = assemble_normal_system(&data, &FitConfig::new(1, 1)).unwrap();
        assert_eq!(apply_regularization(&sys, 0.0, 0.0).unwrap(), sys);
    }

    #[test]
    fn penalty_hits_the_right_diagonals() {
        let sys = LinearSystem {
            a: vec![vec![1.0, 2.0], vec![2.0, 5.0]],
            b: vec![1.0, 1.0],
            column_map: vec![Coef::Alpha(0), Coef::Beta(1)],
        };
        let reg = apply_regularization(&sys, 0.1, 0.4).unwrap();
        assert_eq!(reg.a, vec![vec![1.0 + 0.1, 2.0], vec![2.0, 5.0 + 0.4]]);
        assert_eq!(reg.b, sys.b);
        assert_eq!(
            apply_regularization(&sys, -1.0, 0.0),
            Err(Error::NegativeWeight { value: -1.0 })
        );
    }

    #[test]
    fn identity_and_diagonal_solves() {
        let id = system(
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            vec![1.0, 2.0, 3.0],
        );
        assert_eq!(solve_dense(&id).unwrap().0, vec![1.0, 2.0, 3.0]);
        let diag = system(vec![vec![2.0, 0.0], vec![0.0, 4.0]], vec![2.0, 8.0]);
        let (theta, d) = solve_dense(&diag).unwrap();
        assert_eq!(theta, vec![1.0, 2.0]);
        assert_eq!((d.pivot_min, d.pivot_max), (2.0, 4.0));
        assert!(!d.condition_flag);
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let s = system(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![3.0, 4.0]);
        assert_eq!(solve_dense(&s).unwrap().0, vec![4.0, 3.0]);
    }

    #[test]
    fn singular_is_reported() {
        let s = system(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]);
        assert!(matches!(
            solve_dense(&s),
            Err(Error::SingularSystem { column: 1, .. })
        ));
    }

    #[test]
    fn spd_multiply_back() {
        // deterministic SPD matrix M Mᵀ + I
        let p = 8;
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let m: Vec<Vec<f64>> = (0..p).map(|_| (0..p).map(|_| next()).collect()).collect();
        let mut a = vec![vec![0.0; p]; p];
        for i in 0..p {
            for j in 0..p {
                a[i][j] =
                    (0..p).map(|k| m[i][k] * m[j][k]).sum::<f64>() + if i == j { 1.0 } else { 0.0 };
            }
        }
        let b: Vec<f64> = (0..p).map(|_| next()).collect();
        let s = system(a.clone(), b.clone());
        let (theta, _) = solve_dense(&s).unwrap();
        let bn = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for i in 0..p {
            let lhs: f64 = (0..p).map(|k| a[i][k] * theta[k]).sum();
            assert!((lhs - b[i]).abs() / bn <= 1e-10);
        }
    }

    #[test]
    fn interpolation_through_two_points() {
        let refs = Dataset::new(vec![(1.0, 3.0), (3.0, 7.0)]).unwrap();
        let sys = assemble_interpolation_system(&refs, 1, 0, &BTreeSet::new()).unwrap();
        let (theta, _) = solve_dense(&sys).unwrap();
        assert!((theta[0] - 1.0).abs() < 1e-14 && (theta[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn interpolation_count_and_duplicates() {
        let refs = Dataset::new(vec![(1.0, 3.0), (3.0, 7.0), (4.0, 1.0)]).unwrap();
        assert_eq!(
            assemble_interpolation_system(&refs, 1, 0, &BTreeSet::new()),
            Err(Error::CountMismatch {
                points: 3,
                unknowns: 2
            })
        );
        let dup = Dataset::new(vec![(1.0, 3.0), (1.0, 7.0)]).unwrap();
        assert_eq!(
            assemble_interpolation_system(&dup, 1, 0, &BTreeSet::new()),
            Err(Error::DuplicateAbscissa { x: 1.0 })
        );
    }

    #[test]
    fn consistent_overdetermined_rows() {
        let refs = Dataset::new(vec![(0.0, 1.0), (1.0, 3.0), (2.0, 5.0), (5.0, 11.0)]).unwrap();
        let rect = assemble_interpolation_rows(&refs, 1, 0, &BTreeSet::new()).unwrap();
        let (theta, _) = solve_consistent(&rect).unwrap();
        assert!((theta[0] - 1.0).abs() < 1e-12 && (theta[1] - 2.0).abs() < 1e-12);

        let bad = Dataset::new(vec![(0.0, 1.0), (1.0, 3.0), (2.0, 6.0)]).unwrap();
        let rect = assemble_interpolation_rows(&bad, 1, 0, &BTreeSet::new()).unwrap();
        assert!(matches!(
            solve_consistent(&rect),
            Err(Error::CountMismatch { .. })
        ));
    }
}

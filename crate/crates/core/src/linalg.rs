//! Dense linear solves over any [`Scalar`] field.

use crate::scalar::Scalar;

/// Result of a successful square solve.
#[derive(Clone, Debug)]
pub struct Solved<F> {
    pub x: Vec<F>,
    /// 1-norm condition estimate; `None` in exact arithmetic.
    pub condition: Option<f64>,
}

/// The matrix was found rank deficient.
#[derive(Clone, Debug, PartialEq)]
pub struct Singular {
    pub rank: usize,
    /// Whether the right-hand side lies in the column space anyway.
    pub consistent: bool,
}

/// Relative pivot threshold below which a float matrix counts as singular.
fn pivot_threshold<F: Scalar>(n: usize) -> f64 {
    if F::EXACT {
        0.0
    } else {
        8.0 * n.max(1) as f64 * F::EPSILON
    }
}

/// Solve `a x = b` by Gaussian elimination with full pivoting.
///
/// Rows are equilibrated by powers of two (exact in every field) before
/// elimination. In float fields the inverse is formed alongside the solve to
/// report a 1-norm condition number.
pub fn solve<F: Scalar>(a: &[Vec<F>], b: &[F]) -> Result<Solved<F>, Singular> {
    let n = a.len();
    assert_eq!(b.len(), n, "right-hand side length");
    if n == 0 {
        return Ok(Solved {
            x: Vec::new(),
            condition: (!F::EXACT).then_some(1.0),
        });
    }
    let extra = if F::EXACT { 1 } else { 1 + n };
    let width = n + extra;
    let mut m: Vec<Vec<F>> = Vec::with_capacity(n);
    for (i, row) in a.iter().enumerate() {
        assert_eq!(row.len(), n, "matrix must be square");
        let mut r = Vec::with_capacity(width);
        r.extend(row.iter().cloned());
        r.push(b[i].clone());
        if !F::EXACT {
            for j in 0..n {
                r.push(if i == j { F::one() } else { F::zero() });
            }
        }
        if !F::EXACT {
            let big = row.iter().map(|v| v.magnitude()).fold(0.0, f64::max);
            if big > 0.0 && big.is_finite() {
                let s = F::from_f64(2f64.powi(-(big.log2().round() as i32)));
                for v in r.iter_mut() {
                    *v = v.clone() * s.clone();
                }
            }
        }
        m.push(r);
    }

    let scale = m
        .iter()
        .flat_map(|r| r[..n].iter())
        .map(|v| v.magnitude())
        .fold(0.0, f64::max);
    let threshold = pivot_threshold::<F>(n) * scale;
    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut rank = n;

    for k in 0..n {
        let mut best = (k, k);
        let mut best_mag = -1.0;
        for (i, row) in m.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().take(n).skip(k) {
                if v.is_zero() {
                    continue;
                }
                let mag = v.magnitude();
                if mag > best_mag {
                    best_mag = mag;
                    best = (i, j);
                }
            }
        }
        if best_mag < 0.0 || (!F::EXACT && best_mag <= threshold) {
            rank = k;
            break;
        }
        let (pi, pj) = best;
        m.swap(k, pi);
        if pj != k {
            for row in m.iter_mut() {
                row.swap(k, pj);
            }
            col_perm.swap(k, pj);
        }
        let pivot = m[k][k].clone();
        let (upper, lower) = m.split_at_mut(k + 1);
        let prow = &upper[k];
        for row in lower.iter_mut() {
            if row[k].is_zero() {
                continue;
            }
            let factor = row[k].clone() / pivot.clone();
            row[k] = F::zero();
            for j in (k + 1)..width {
                if !prow[j].is_zero() {
                    row[j] = row[j].clone() - factor.clone() * prow[j].clone();
                }
            }
        }
    }

    if rank < n {
        let rhs_scale = m.iter().map(|r| r[n].magnitude()).fold(0.0, f64::max);
        let tol = pivot_threshold::<F>(n) * rhs_scale.max(scale);
        let consistent = m[rank..].iter().all(|r| {
            if F::EXACT {
                r[n].is_zero()
            } else {
                r[n].magnitude() <= tol
            }
        });
        return Err(Singular { rank, consistent });
    }

    // back substitution for every augmented column
    let mut sol = vec![vec![F::zero(); extra]; n];
    for k in (0..n).rev() {
        for c in 0..extra {
            let mut acc = m[k][n + c].clone();
            for j in (k + 1)..n {
                if !m[k][j].is_zero() {
                    acc = acc - m[k][j].clone() * sol[j][c].clone();
                }
            }
            sol[k][c] = acc / m[k][k].clone();
        }
    }
    let mut x = vec![F::zero(); n];
    for (k, &orig) in col_perm.iter().enumerate() {
        x[orig] = sol[k][0].clone();
    }

    let condition = if F::EXACT {
        None
    } else {
        // inverse rows are permuted like x; column norms of A^{-1}
        let mut inv_norm: f64 = 0.0;
        for c in 0..n {
            let col: f64 = (0..n).map(|k| sol[k][1 + c].magnitude()).sum();
            inv_norm = inv_norm.max(col);
        }
        let a_norm = (0..n)
            .map(|j| a.iter().map(|row| row[j].magnitude()).sum::<f64>())
            .fold(0.0, f64::max);
        Some(a_norm * inv_norm)
    };
    Ok(Solved { x, condition })
}

/// Determinant of a small real matrix.
pub fn determinant(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    if n == 0 {
        return 1.0;
    }
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    m.determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Dd, Rational};
    use proptest::prelude::*;

    fn q(p: i64) -> Rational {
        Rational::from_integer(p.into())
    }

    #[test]
    fn exact_two_by_two() {
        // 3c + 3b = -5, 7c + 10b = -18  =>  b = -19/9, c = 4/9
        let a = vec![vec![q(3), q(3)], vec![q(7), q(10)]];
        let s = solve(&a, &[q(-5), q(-18)]).unwrap();
        assert_eq!(s.x[0], Rational::new(4.into(), 9.into()));
        assert_eq!(s.x[1], Rational::new((-19).into(), 9.into()));
        assert!(s.condition.is_none());
    }

    #[test]
    fn detects_rank_deficiency() {
        let a = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert_eq!(
            solve(&a, &[q(1), q(2)]).unwrap_err(),
            Singular {
                rank: 1,
                consistent: true
            }
        );
        assert_eq!(
            solve(&a, &[q(1), q(3)]).unwrap_err(),
            Singular {
                rank: 1,
                consistent: false
            }
        );
        let af = vec![vec![1.0, 2.0], vec![2.0, 4.0 + 1e-17]];
        assert!(solve(&af, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn hilbert_condition_is_reported() {
        let n = 6;
        let h: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| 1.0 / (i + j + 1) as f64).collect())
            .collect();
        let s = solve(&h, &vec![1.0; n]).unwrap();
        let cond = s.condition.unwrap();
        // kappa_1(H_6) = 2.907e7
        assert!(cond > 1e7 && cond < 1e8, "{cond}");
    }

    #[test]
    fn double_double_beats_binary64_on_hilbert() {
        let n = 10;
        let exact: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Rational::new(1.into(), ((i + j + 1) as i64).into()))
                    .collect()
            })
            .collect();
        let rhs: Vec<Rational> = (0..n).map(|i| q(i as i64 + 1)).collect();
        let truth = solve(&exact, &rhs).unwrap().x;
        let dd: Vec<Vec<Dd>> = exact
            .iter()
            .map(|r| r.iter().map(Dd::from_rational).collect())
            .collect();
        let x = solve(&dd, &rhs.iter().map(Dd::from_rational).collect::<Vec<_>>())
            .unwrap()
            .x;
        for (a, b) in x.iter().zip(&truth) {
            let t = b.to_f64();
            assert!(((a.to_f64() - t) / t).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn float_solution_has_small_residual(
            entries in prop::collection::vec(-10.0f64..10.0, 16),
            rhs in prop::collection::vec(-10.0f64..10.0, 4),
        ) {
            let a: Vec<Vec<f64>> = entries.chunks(4).map(|c| c.to_vec()).collect();
            if let Ok(s) = solve(&a, &rhs) {
                let cond = s.condition.unwrap();
                for i in 0..4 {
                    let r: f64 = (0..4).map(|j| a[i][j] * s.x[j]).sum::<f64>() - rhs[i];
                    prop_assert!(r.abs() <= 1e-12 * cond.max(1.0) * 100.0);
                }
            }
        }
    }
}

//! Small dense linear algebra over a [`Scalar`] field.
//!
//! The symmetric decomposition here doubles as a positive-semidefiniteness
//! certificate: it either returns the pivots of a full elimination (PSD, with
//! rank) or a vector `v` with `vᵀGv < 0` expressed in the original
//! coordinates.

use crate::error::{bail, Result};
use crate::scalar::Scalar;

pub type Matrix<S> = Vec<Vec<S>>;

pub fn is_square<S>(m: &Matrix<S>) -> bool {
    m.iter().all(|row| row.len() == m.len())
}

pub fn max_asymmetry<S: Scalar>(m: &Matrix<S>) -> S {
    let mut worst = S::zero();
    for i in 0..m.len() {
        for j in 0..i {
            let d = (m[i][j].clone() - m[j][i].clone()).abs_val();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// `vᵀ G v`.
pub fn quadratic_form<S: Scalar>(g: &Matrix<S>, v: &[S]) -> S {
    let mut acc = S::zero();
    for (i, row) in g.iter().enumerate() {
        if v[i].is_zero() {
            continue;
        }
        let mut inner = S::zero();
        for (j, gij) in row.iter().enumerate() {
            if !v[j].is_zero() {
                inner = inner + gij.clone() * v[j].clone();
            }
        }
        acc = acc + v[i].clone() * inner;
    }
    acc
}

pub fn mat_vec<S: Scalar>(m: &Matrix<S>, v: &[S]) -> Vec<S> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
        .collect()
}

pub fn mat_mul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().enumerate().fold(S::zero(), |acc, (k, x)| acc + x.clone() * b[k][j].clone()))
                .collect()
        })
        .collect()
}

pub fn transpose<S: Clone>(m: &Matrix<S>) -> Matrix<S> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn identity<S: Scalar>(n: usize) -> Matrix<S> {
    (0..n).map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect()).collect()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve<S: Scalar>(a: &Matrix<S>, b: &[S]) -> Result<Vec<S>> {
    let n = a.len();
    if !is_square(a) || b.len() != n {
        bail!(Structural, "solve needs a square system");
    }
    let mut m: Matrix<S> = a.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(bi.clone());
        r
    }).collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs_val().partial_cmp(&m[j][col].abs_val()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        if m[pivot][col].is_zero() {
            bail!(Domain, "singular system");
        }
        m.swap(col, pivot);
        for row in col + 1..n {
            if m[row][col].is_zero() {
                continue;
            }
            let factor = m[row][col].clone() / m[col][col].clone();
            for c in col..=n {
                let delta = factor.clone() * m[col][c].clone();
                m[row][c] = m[row][c].clone() - delta;
            }
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = m[row][n].clone();
        for c in row + 1..n {
            acc = acc - m[row][c].clone() * x[c].clone();
        }
        x[row] = acc / m[row][row].clone();
    }
    Ok(x)
}

/// Outcome of the pivoted symmetric decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum Definiteness<S> {
    /// Every remaining Schur complement entry is within tolerance of zero.
    Psd { rank: usize },
    /// `witness` is a vector with `witnessᵀ G witness = value < -tolerance`.
    Negative { witness: Vec<S>, value: S },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<S> {
    /// (index, pivot value) in elimination order.
    pub pivots: Vec<(usize, S)>,
    pub outcome: Definiteness<S>,
}

/// Symmetric elimination with diagonal pivoting.
///
/// At each step the remaining Schur complement is inspected: a diagonal entry
/// below `-tolerance` or, once all diagonals are negligible, an off-diagonal
/// entry above `2·tolerance` proves indefiniteness. Otherwise the largest
/// diagonal entry is eliminated.
pub fn pivoted_ldl<S: Scalar>(g: &Matrix<S>, tolerance: &S) -> Result<Decomposition<S>> {
    graded_ldl(g, tolerance, &vec![0; g.len()])
}

/// [`pivoted_ldl`] restricted to the lowest `grade` that still has a diagonal
/// entry above tolerance; the largest diagonal wins within a grade.
pub fn graded_ldl<S: Scalar>(g: &Matrix<S>, tolerance: &S, grade: &[usize]) -> Result<Decomposition<S>> {
    let n = g.len();
    if grade.len() != n {
        bail!(Structural, "{} grades for a {}x{} matrix", grade.len(), n, n);
    }
    if !is_square(g) {
        bail!(Structural, "matrix is not square");
    }
    let mut s = g.clone();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut pivots: Vec<(usize, S)> = Vec::new();
    let neg_tol = -tolerance.clone();
    let two_tol = tolerance.clone() + tolerance.clone();

    loop {
        if remaining.is_empty() {
            return Ok(Decomposition { pivots, outcome: Definiteness::Psd { rank: n } });
        }
        if let Some(&i) = remaining.iter().find(|&&i| s[i][i] < neg_tol) {
            let mut u = vec![S::zero(); n];
            u[i] = S::one();
            return finish_negative(g, pivots, &remaining, u);
        }
        let live = remaining.iter().filter(|&&i| s[i][i] > *tolerance);
        let best = live.min_by(|&&a, &&b| {
            grade[a].cmp(&grade[b]).then_with(|| {
                s[b][b].partial_cmp(&s[a][a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
            })
        });
        if let Some(&p) = best {
            let d = s[p][p].clone();
            remaining.retain(|&i| i != p);
            for &i in &remaining {
                if s[i][p].is_zero() {
                    continue;
                }
                let f = s[i][p].clone() / d.clone();
                for &j in &remaining {
                    let delta = f.clone() * s[p][j].clone();
                    s[i][j] = s[i][j].clone() - delta;
                }
            }
            pivots.push((p, d));
            continue;
        }
        // All remaining diagonals are negligible.
        for (a, &i) in remaining.iter().enumerate() {
            for &j in &remaining[a + 1..] {
                if s[i][j].abs_val() > two_tol {
                    let mut u = vec![S::zero(); n];
                    u[i] = S::one();
                    u[j] = if s[i][j] > S::zero() { -S::one() } else { S::one() };
                    return finish_negative(g, pivots, &remaining, u);
                }
            }
        }
        let rank = pivots.len();
        return Ok(Decomposition { pivots, outcome: Definiteness::Psd { rank } });
    }
}

/// Lifts a negative direction of the Schur complement to the full space.
fn finish_negative<S: Scalar>(
    g: &Matrix<S>,
    pivots: Vec<(usize, S)>,
    remaining: &[usize],
    mut u: Vec<S>,
) -> Result<Decomposition<S>> {
    let piv: Vec<usize> = pivots.iter().map(|(i, _)| *i).collect();
    if !piv.is_empty() {
        let gpp: Matrix<S> = piv.iter().map(|&i| piv.iter().map(|&j| g[i][j].clone()).collect()).collect();
        let rhs: Vec<S> = piv
            .iter()
            .map(|&i| -remaining.iter().fold(S::zero(), |acc, &j| acc + g[i][j].clone() * u[j].clone()))
            .collect();
        let x = solve(&gpp, &rhs)?;
        for (&i, xi) in piv.iter().zip(x) {
            u[i] = xi;
        }
    }
    let value = quadratic_form(g, &u);
    Ok(Decomposition { pivots, outcome: Definiteness::Negative { witness: u, value } })
}

/// Lower-triangular Cholesky factor of a positive definite matrix.
pub fn cholesky(a: &Matrix<f64>) -> Result<Matrix<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let sum: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - sum;
                if d <= 0.0 {
                    bail!(Domain, "matrix is not positive definite");
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - sum) / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &Matrix<f64>) -> Matrix<f64> {
    let n = l.len();
    let mut inv = vec![vec![0.0; n]; n];
    for i in 0..n {
        inv[i][i] = 1.0 / l[i][i];
        for j in 0..i {
            let sum: f64 = (j..i).map(|k| l[i][k] * inv[k][j]).sum();
            inv[i][j] = -sum / l[i][i];
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn m(rows: &[&[i64]]) -> Matrix<Rational> {
        rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()
    }

    #[test]
    fn graded_pivots_prefer_low_grades() {
        let g = m(&[&[1, 0, 0], &[0, 5, 5], &[0, 5, 9]]);
        let d = graded_ldl(&g, &rat(0), &[1, 1, 2]).unwrap();
        assert_eq!(d.pivots.iter().map(|(i, _)| *i).collect::<Vec<_>>(), vec![1, 0, 2]);
        let d = pivoted_ldl(&g, &rat(0)).unwrap();
        assert_eq!(d.pivots[0].0, 2);
    }

    #[test]
    fn psd_diagonal() {
        let d = pivoted_ldl(&m(&[&[1, 0], &[0, 0]]), &rat(0)).unwrap();
        assert_eq!(d.outcome, Definiteness::Psd { rank: 1 });
    }

    #[test]
    fn indefinite_diagonal_witness() {
        let d = pivoted_ldl(&m(&[&[1, 0], &[0, -1]]), &rat(0)).unwrap();
        assert_eq!(d.outcome, Definiteness::Negative { witness: vec![rat(0), rat(1)], value: rat(-1) });
    }

    #[test]
    fn zero_diagonal_with_coupling() {
        let g = m(&[&[1, 1, 0], &[1, 1, 2], &[0, 2, 0]]);
        match pivoted_ldl(&g, &rat(0)).unwrap().outcome {
            Definiteness::Negative { witness, value } => {
                assert!(value < rat(0));
                assert_eq!(quadratic_form(&g, &witness), value);
            }
            other => panic!("expected a witness, got {:?}", other),
        }
    }

    #[test]
    fn rank_one() {
        let g = m(&[&[2, 4, 6], &[4, 8, 12], &[6, 12, 18]]);
        let d = pivoted_ldl(&g, &rat(0)).unwrap();
        assert_eq!(d.outcome, Definiteness::Psd { rank: 1 });
        assert_eq!(d.pivots, vec![(2, rat(18))]);
    }

    #[test]
    fn solve_and_cholesky() {
        let a = m(&[&[2, 1], &[1, 3]]);
        let x = solve(&a, &[rat(3), rat(5)]).unwrap();
        assert_eq!(mat_vec(&a, &x), vec![rat(3), rat(5)]);
        let af = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let l = cholesky(&af).unwrap();
        let back = mat_mul(&l, &transpose(&l));
        assert!((back[1][1] - 3.0f64).abs() < 1e-14);
        let li = lower_inverse(&l);
        let id = mat_mul(&li, &l);
        assert!((id[0][0] - 1.0f64).abs() < 1e-14 && id[1][0].abs() < 1e-14);
    }
}

//! Dense elimination routines shared by both numeric modes.

use num::{BigInt, Integer, One, Zero};

use crate::scalar::{Rational, Scalar};

/// Row index of the pivot for column `col`, searching rows `col..`.
/// Exact zero entries are never selected; among the rest the largest
/// magnitude wins (partial pivoting in float mode, harmless in exact mode).
fn pivot_row<S: Scalar>(a: &[Vec<S>], col: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, row) in a.iter().enumerate().skip(col) {
        if row[col].is_zero() {
            continue;
        }
        let mag = row[col].to_f64().abs();
        if best.map_or(true, |(_, m)| mag > m) {
            best = Some((i, mag));
        }
    }
    best.map(|(i, _)| i)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn gaussian_det<S: Scalar>(mut a: Vec<Vec<S>>) -> S {
    let n = a.len();
    let mut det = S::one();
    for col in 0..n {
        let Some(p) = pivot_row(&a, col) else {
            return S::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det = det * pivot.clone();
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() / pivot.clone();
            for k in col..n {
                let delta = factor.clone() * a[col][k].clone();
                a[row][k] = a[row][k].clone() - delta;
            }
        }
    }
    det
}

/// Exact determinant by fraction-free (Bareiss) elimination: rows are first
/// scaled to integers by their denominators' lcm, the integer determinant is
/// computed with exact divisions only, then the scaling is undone.
pub fn bareiss_det(a: Vec<Vec<Rational>>) -> Rational {
    let n = a.len();
    if n == 0 {
        return Rational::one();
    }
    let mut scale = BigInt::one();
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for row in a {
        let lcm = row
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        m.push(
            row.iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect(),
        );
        scale *= lcm;
    }

    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return Rational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    Rational::new(sign * &m[n - 1][n - 1], scale)
}

/// Solves `a x = b` for square nonsingular `a`. Returns `None` when `a` is
/// singular.
pub fn solve<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let n = a.len();
    for col in 0..n {
        let p = pivot_row(&a, col)?;
        a.swap(p, col);
        b.swap(p, col);
        let pivot = a[col][col].clone();
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() / pivot.clone();
            for k in col..n {
                let delta = factor.clone() * a[col][k].clone();
                a[row][k] = a[row][k].clone() - delta;
            }
            let delta = factor * b[col].clone();
            b[row] = b[row].clone() - delta;
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Some(x)
}

/// Inverse of a square nonsingular matrix by Gauss-Jordan elimination.
pub fn inverse<S: Scalar>(mut a: Vec<Vec<S>>) -> Option<Vec<Vec<S>>> {
    let n = a.len();
    let mut inv: Vec<Vec<S>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect();
    for col in 0..n {
        let p = pivot_row(&a, col)?;
        a.swap(p, col);
        inv.swap(p, col);
        let pivot = a[col][col].clone();
        for k in 0..n {
            a[col][k] = a[col][k].clone() / pivot.clone();
            inv[col][k] = inv[col][k].clone() / pivot.clone();
        }
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone();
            for k in 0..n {
                let d = factor.clone() * a[col][k].clone();
                a[row][k] = a[row][k].clone() - d;
                let d = factor.clone() * inv[col][k].clone();
                inv[row][k] = inv[row][k].clone() - d;
            }
        }
    }
    Some(inv)
}

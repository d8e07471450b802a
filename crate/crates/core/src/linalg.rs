//! Dense linear algebra used across the crate: exact/tolerant Gaussian
//! elimination over any [`Scalar`], and SVD-based rank and subspace
//! comparisons over `C64`.

use nalgebra::DMatrix;

use crate::scalar::{Scalar, C64};

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref<S: Scalar>(rows: &mut [Vec<S>], ncols: usize, tol: f64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        // largest magnitude for floats, any nonzero for exact
        let best = (r..rows.len())
            .filter(|&i| !rows[i][c].is_negligible(tol))
            .max_by(|&a, &b| {
                if S::EXACT {
                    std::cmp::Ordering::Equal
                } else {
                    rows[a][c].magnitude().total_cmp(&rows[b][c].magnitude())
                }
            });
        let Some(p) = best else { continue };
        rows.swap(r, p);
        let inv = S::one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows.len() {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let f = rows[i][c].clone();
            for j in 0..ncols {
                let sub = f.clone() * rows[r][j].clone();
                rows[i][j] = rows[i][j].clone() - sub;
            }
            if !S::EXACT {
                rows[i][c] = S::zero();
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<S: Scalar>(rows: &[Vec<S>], ncols: usize, tol: f64) -> usize {
    let mut work = rows.to_vec();
    rref(&mut work, ncols, tol).len()
}

/// Basis of `{x : A x = 0}`, one vector per free column.
pub fn null_space<S: Scalar>(rows: &[Vec<S>], ncols: usize, tol: f64) -> Vec<Vec<S>> {
    let mut work = rows.to_vec();
    let pivots = rref(&mut work, ncols, tol);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![S::zero(); ncols];
            v[f] = S::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -work[r][f].clone();
            }
            v
        })
        .collect()
}

pub fn to_dmatrix(rows: &[Vec<C64>], ncols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank: singular values above `tol * max(1, sigma_max)`.
pub fn numeric_rank(m: &DMatrix<C64>, tol: f64) -> usize {
    let s = singular_values(m);
    let scale = s.first().copied().unwrap_or(0.0).max(1.0);
    s.iter().filter(|&&x| x > tol * scale).count()
}

/// Orthonormal basis (as columns) of the column span of `m`.
pub fn orthonormal_basis(m: &DMatrix<C64>, tol: f64) -> DMatrix<C64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let scale = svd.singular_values.iter().copied().fold(0.0, f64::max).max(1.0);
    let keep: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > tol * scale).collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

/// Spectral norm of the difference of the orthogonal projections onto the
/// column spans; 0 iff the spans coincide.
pub fn subspace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) -> f64 {
    let qa = orthonormal_basis(a, tol);
    let qb = orthonormal_basis(b, tol);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    let pa = &qa * qa.adjoint();
    let pb = &qb * qb.adjoint();
    singular_values(&(pa - pb)).first().copied().unwrap_or(0.0)
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

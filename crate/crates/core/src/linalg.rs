//! Complex linear algebra used by every scheme: least-norm solves, null
//! spaces and tolerance-based rank, all through the singular value
//! decomposition.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Default relative threshold for rank decisions and solver conditioning.
pub const DEFAULT_REL_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RankResult {
    pub rank: usize,
    /// Nonincreasing.
    pub singular_values: Vec<f64>,
    /// Absolute cutoff; only singular values strictly above it count.
    pub threshold_used: f64,
}

impl RankResult {
    /// Smallest retained over largest discarded singular value.
    pub fn margin(&self) -> Option<f64> {
        let kept = *self.singular_values.get(self.rank.checked_sub(1)?)?;
        let dropped = *self.singular_values.get(self.rank)?;
        Some(if dropped > 0.0 { kept / dropped } else { f64::INFINITY })
    }
}

/// Singular values in nonincreasing order.
pub fn singular_values(h: &ComplexMatrix) -> Vec<f64> {
    if h.is_empty() {
        return Vec::new();
    }
    SVD::new(h.clone(), false, false).singular_values.iter().copied().collect()
}

pub fn rank_eps(h: &ComplexMatrix, rel_threshold: f64) -> RankResult {
    let singular_values = singular_values(h);
    let largest = singular_values.first().copied().unwrap_or(0.0);
    let threshold_used = rel_threshold * largest;
    let rank = if largest > 0.0 {
        singular_values.iter().filter(|&&s| s > threshold_used).count()
    } else {
        0
    };
    RankResult { rank, singular_values, threshold_used }
}

/// Minimum-norm `u` with `h u = b`.
///
/// `h` must have full row rank: the smallest of its `rows` singular values
/// has to exceed `1e-8` times the largest, otherwise
/// [`Error::IllConditioned`] is returned so the caller can redraw the
/// channel. Square systems go through the same path and yield the exact
/// solution.
pub fn least_norm_solve(h: &ComplexMatrix, b: &ComplexVector) -> Result<ComplexVector> {
    if b.len() != h.nrows() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: b.len() });
    }
    if h.nrows() == 0 {
        return Ok(ComplexVector::zeros(h.ncols()));
    }
    if h.nrows() > h.ncols() {
        return Err(Error::IllConditioned { smallest: 0.0, largest: 0.0 });
    }
    let svd = SVD::new(h.clone(), true, true);
    let s = &svd.singular_values;
    let largest = s[0];
    let smallest = s[s.len() - 1];
    if largest <= 0.0 || largest.is_nan() || smallest <= DEFAULT_REL_THRESHOLD * largest {
        return Err(Error::IllConditioned { smallest, largest });
    }
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => unreachable!("SVD computed with u and v"),
    };
    // u = V diag(1/s) U^H b
    let mut coeffs = u.ad_mul(b);
    for (c, &sv) in coeffs.iter_mut().zip(s.iter()) {
        *c /= sv;
    }
    Ok(v_t.ad_mul(&coeffs))
}

/// Orthonormal basis of `{x : h x = 0}` at the default relative threshold.
pub fn null_space_basis(h: &ComplexMatrix) -> Vec<ComplexVector> {
    null_space_basis_with(h, DEFAULT_REL_THRESHOLD)
}

pub fn null_space_basis_with(h: &ComplexMatrix, rel_threshold: f64) -> Vec<ComplexVector> {
    let n = h.ncols();
    if n == 0 {
        return Vec::new();
    }
    // Pad wide matrices with zero rows so the SVD returns all of V.
    let padded = if h.nrows() < n {
        let mut p = ComplexMatrix::zeros(n, n);
        p.rows_mut(0, h.nrows()).copy_from(h);
        p
    } else {
        h.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("SVD computed with v");
    let s = &svd.singular_values;
    let cutoff = rel_threshold * s[0];
    (0..n)
        .filter(|&i| s[0] == 0.0 || s[i] <= cutoff)
        .map(|i| v_t.row(i).adjoint())
        .collect()
}

/// Rotates `v` so its largest-magnitude entry is real and positive.
pub fn canonical_phase(mut v: ComplexVector) -> ComplexVector {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or_default();
    if pivot.norm() > 0.0 {
        let rot = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|x| *x *= rot);
    }
    v
}

/// Bilinear (non-conjugating) product `a^T b`.
#[inline]
pub fn dot_t(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

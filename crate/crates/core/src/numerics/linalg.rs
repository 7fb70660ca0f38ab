use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Dense complex matrix. Channels are stored column-per-user (`N_t × K`).
pub type ComplexMatrix = DMatrix<Complex64>;
/// Dense complex column vector (a precoder or a single user's channel).
pub type ComplexVector = DVector<Complex64>;

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Orthonormal basis of `null(Aᴴ)`, the orthogonal complement of the column
/// space of `a` (`n × m`). Returns an `n × d` matrix, `d = n − rank(a)`.
///
/// The rank threshold is `max(n, m) · ε · σ_max`. When `m < n` the input is
/// padded with zero columns so the SVD yields a full `n × n` left factor.
pub fn null_space_basis(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n, m) = a.shape();
    if n == 0 {
        return Err(invalid("null_space_basis: matrix has no rows"));
    }
    if !is_finite(a) {
        return Err(invalid("null_space_basis: non-finite entry"));
    }
    if m == 0 {
        return Ok(ComplexMatrix::identity(n, n));
    }
    let padded = if m < n {
        let mut p = ComplexMatrix::zeros(n, n);
        p.columns_mut(0, m).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().cloned().fold(0.0_f64, f64::max);
    let threshold = (n.max(m) as f64) * f64::EPSILON * sigma_max;

    // `sigma` has min(n, cols) = n entries, one per column of `u`.
    let keep: Vec<usize> = (0..n).filter(|&i| sigma[i] <= threshold).collect();
    let mut basis = ComplexMatrix::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        basis.set_column(j, &u.column(i));
    }
    Ok(basis)
}

/// Left singular vector belonging to the largest singular value of `a`.
pub fn dominant_left_singular_vector(a: &ComplexMatrix) -> Result<ComplexVector> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(invalid("dominant_left_singular_vector: empty matrix"));
    }
    if !is_finite(a) {
        return Err(invalid("dominant_left_singular_vector: non-finite entry"));
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let (best, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
    Ok(u.column(best).into_owned())
}

/// `|aᴴ b|²`.
#[inline]
pub fn inner_sq(a: &ComplexVector, b: &ComplexVector) -> f64 {
    a.dotc(b).norm_sqr()
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Columns `idx` of `a` gathered into a new matrix.
pub fn select_columns(a: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.nrows(), idx.len());
    for (j, &i) in idx.iter().enumerate() {
        out.set_column(j, &a.column(i));
    }
    out
}

/// Unit-norm copy of `v`, or `None` when `‖v‖` is below `floor`.
pub fn normalized(v: &ComplexVector, floor: f64) -> Option<ComplexVector> {
    let n = v.norm();
    if n <= floor || !n.is_finite() {
        None
    } else {
        Some(v.unscale(n))
    }
}

pub fn real_diag(d: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(d))
}

//! Dense complex matrices and the trace-form inner product.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

/// Dense complex matrix with 64-bit real and imaginary parts.
pub type CMatrix = DMatrix<Complex<f64>>;

/// Scale of the Ad-invariant inner product relative to `tr(X†Y)`.
///
/// The trace form and the Killing form on su(n) are proportional (the
/// Killing form is `2n·tr`); all convexity statements are invariant under
/// this scale. Set to 1 for the plain trace form.
pub const INNER_SCALE: f64 = 1.0;

/// Ad-invariant Hermitian pairing `⟨X, Y⟩ = INNER_SCALE · tr(X†Y)`.
///
/// Real-valued on skew-Hermitian pairs; conjugate-symmetric in general.
pub fn inner(x: &CMatrix, y: &CMatrix) -> Result<Complex<f64>> {
    if x.nrows() != x.ncols() || x.shape() != y.shape() {
        return Err(Error::Dimension(format!(
            "inner expects equal square shapes, got {:?} and {:?}",
            x.shape(),
            y.shape()
        )));
    }
    let mut acc = Complex::new(0.0, 0.0);
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            acc += x[(i, j)].conj() * y[(i, j)];
        }
    }
    Ok(acc * Complex::new(INNER_SCALE, 0.0))
}

/// `‖X‖` in the trace form (Frobenius norm scaled by `INNER_SCALE`).
pub fn fnorm(x: &CMatrix) -> f64 {
    (INNER_SCALE * x.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

pub(crate) fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub(crate) fn unitary_error(u: &CMatrix) -> f64 {
    (u.adjoint() * u - identity(u.ncols())).norm()
}

pub(crate) fn skew_error(x: &CMatrix) -> f64 {
    (x + x.adjoint()).norm()
}

pub(crate) fn det(u: &CMatrix) -> Complex<f64> {
    u.clone().lu().determinant()
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
///
/// Columns whose residual drops below `tol` are discarded, so the result
/// has full column rank. Column order of the input is preserved, which
/// keeps downstream basis choices deterministic.
pub(crate) fn orthonormal_columns(cols: &[nalgebra::DVector<Complex<f64>>], tol: f64) -> CMatrix {
    let rows = cols.first().map_or(0, |c| c.len());
    let mut basis: Vec<nalgebra::DVector<Complex<f64>>> = Vec::new();
    for c in cols {
        let mut v = c.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > tol {
            basis.push(v / Complex::new(norm, 0.0));
        }
    }
    let mut out = CMatrix::zeros(rows, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

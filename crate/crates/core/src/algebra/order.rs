use super::{hermitian_eigen, hermitian_spectrum, MatrixElement};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &MatrixElement, tol: &Tolerances) -> Result<f64> {
    let spec = hermitian_spectrum(a, tol)?;
    Ok(spec[0])
}

/// `0 ⪯ a`: Hermitian within `eq_tol` and spectrum in `[-eig_tol, ∞)`.
///
/// Non-Hermitian input is simply not positive.
pub fn is_positive(a: &MatrixElement, tol: &Tolerances) -> bool {
    match min_eigenvalue(a, tol) {
        Ok(lambda) => lambda >= -tol.eig_tol,
        Err(_) => false,
    }
}

/// Löwner order `a ⪯ b`, i.e. `b - a` positive.
pub fn loewner_leq(a: &MatrixElement, b: &MatrixElement, tol: &Tolerances) -> Result<bool> {
    Ok(is_positive(&b.sub(a)?, tol))
}

/// How far `a ⪯ b` is from holding, net of tolerances. Non-positive means
/// the order holds; otherwise this is the negative-eigenvalue deficit of
/// `b - a` beyond `eig_tol` (or its Hermitian defect beyond `eq_tol`).
pub fn order_deficit(a: &MatrixElement, b: &MatrixElement, tol: &Tolerances) -> Result<f64> {
    let diff = b.sub(a)?;
    let defect = diff.hermitian_defect();
    if !(defect <= tol.eq_tol) {
        return Ok(if defect.is_nan() {
            f64::INFINITY
        } else {
            defect - tol.eq_tol
        });
    }
    match min_eigenvalue(&diff, tol) {
        Ok(lambda) => Ok(-lambda - tol.eig_tol),
        Err(Error::NoConvergence { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// `‖a‖ = sqrt(λ_max(a* a))`.
pub fn operator_norm(a: &MatrixElement, tol: &Tolerances) -> f64 {
    if !a.is_finite() {
        return f64::NAN;
    }
    if a.is_diagonal() {
        return a
            .entries()
            .iter()
            .step_by(a.dim() + 1)
            .fold(0.0, |m, z| m.max(z.norm()));
    }
    if a.hermitian_defect() == 0.0 {
        if let Ok(spec) = hermitian_spectrum(a, tol) {
            return spec.iter().fold(0.0, |m, l| m.max(l.abs()));
        }
    }
    let gram = a.adjoint().mul_unchecked(a);
    match hermitian_spectrum(&gram, tol) {
        Ok(spec) => spec.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        // Jacobi on a finite Hermitian matrix does not fail in practice; the
        // Frobenius norm is still a valid upper bound if it ever does.
        Err(_) => a.frobenius(),
    }
}

/// The positive square root of a positive element. Eigenvalues in
/// `[-eig_tol, 0)` are clamped to zero.
pub fn positive_sqrt(a: &MatrixElement, tol: &Tolerances) -> Result<MatrixElement> {
    let lambda = match min_eigenvalue(a, tol) {
        Ok(l) => l,
        Err(Error::NotHermitian { .. }) => {
            return Err(Error::NotPositive {
                min_eigenvalue: f64::NAN,
            })
        }
        Err(e) => return Err(e),
    };
    if lambda < -tol.eig_tol {
        return Err(Error::NotPositive {
            min_eigenvalue: lambda,
        });
    }
    if a.is_diagonal() {
        let d: Vec<f64> = a.diagonal_re().iter().map(|&x| x.max(0.0).sqrt()).collect();
        return Ok(MatrixElement::diag(&d));
    }
    let eig = hermitian_eigen(a, tol)?;
    let root = eig.map_spectrum(|l| l.max(0.0).sqrt());
    // Symmetrize away rounding in the reconstruction.
    Ok(root.add(&root.adjoint())?.scale(0.5))
}

/// The matrix units `E_ij`, which span the algebra.
pub fn matrix_units(dim: usize) -> Vec<MatrixElement> {
    let mut units = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            units.push(MatrixElement::unit(dim, i, j));
        }
    }
    units
}

/// True iff `‖ab - ba‖ ≤ eq_tol · (1 + ‖a‖‖b‖)` for every probe `b`.
pub fn commutes_with_all(
    a: &MatrixElement,
    probes: &[MatrixElement],
    tol: &Tolerances,
) -> Result<bool> {
    let norm_a = operator_norm(a, tol);
    for b in probes {
        let commutator = a.mul(b)?.sub(&b.mul(a)?)?;
        let bound = tol.eq_tol * (1.0 + norm_a * operator_norm(b, tol));
        if !(operator_norm(&commutator, tol) <= bound) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Membership in the commutant `A'`, decided against the matrix units.
/// For a full matrix algebra this is exactly the scalar multiples of 1.
pub fn in_commutant(a: &MatrixElement, tol: &Tolerances) -> bool {
    commutes_with_all(a, &matrix_units(a.dim()), tol).unwrap_or(false)
}

/// Partial sum `Σ_{n=0}^{N} aⁿ` of the Neumann series for `(1 - a)⁻¹`,
/// with `N` the first index where the tail bound `‖a‖^{N+1} / (1 - ‖a‖)`
/// drops to `conv_tol`.
pub fn neumann_inverse_one_minus(
    a: &MatrixElement,
    tol: &Tolerances,
    max_terms: usize,
) -> Result<MatrixElement> {
    let norm = operator_norm(a, tol);
    if !(norm < 1.0) {
        return Err(Error::NormNotLessThanOne { norm });
    }
    let mut terms = 0usize;
    if norm > 0.0 {
        let tail = |n: usize| norm.powi((n + 1) as i32) / (1.0 - norm);
        while tail(terms) > tol.conv_tol {
            terms += 1;
            if terms > max_terms {
                return Err(Error::MaxTermsExceeded {
                    needed: terms,
                    max_terms,
                });
            }
        }
    }
    let n = a.dim();
    let mut sum = MatrixElement::identity(n);
    let mut power = MatrixElement::identity(n);
    for _ in 0..terms {
        power = power.mul_unchecked(a);
        sum = sum.add(&power)?;
    }
    Ok(sum)
}

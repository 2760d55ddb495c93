use num_complex::Complex64;

use super::MatrixElement;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix: `a = V · diag(values) · V*`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose `k`-th column is the eigenvector of `values[k]`.
    pub vectors: MatrixElement,
}

impl HermitianEigen {
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors.get(i, k)).collect()
    }

    /// `V · diag(f(λ)) · V*`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> MatrixElement {
        let n = self.vectors.dim();
        let mut out = MatrixElement::zeros(n);
        let weights: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, &w) in weights.iter().enumerate() {
                    acc += self.vectors.get(i, k) * self.vectors.get(j, k).conj() * w;
                }
                out.set(i, j, acc);
            }
        }
        out
    }
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_spectrum(a: &MatrixElement, tol: &Tolerances) -> Result<Vec<f64>> {
    check_hermitian(a, tol)?;
    if a.is_diagonal() {
        let mut values = a.diagonal_re();
        values.sort_by(f64::total_cmp);
        return Ok(values);
    }
    Ok(jacobi(a, false)?.values)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix, by
/// cyclic complex Jacobi rotations.
pub fn hermitian_eigen(a: &MatrixElement, tol: &Tolerances) -> Result<HermitianEigen> {
    check_hermitian(a, tol)?;
    jacobi(a, true)
}

fn check_hermitian(a: &MatrixElement, tol: &Tolerances) -> Result<()> {
    let defect = a.hermitian_defect();
    if defect <= tol.eq_tol {
        Ok(())
    } else {
        Err(Error::NotHermitian { defect })
    }
}

fn jacobi(a: &MatrixElement, want_vectors: bool) -> Result<HermitianEigen> {
    let n = a.dim();
    // Work on the exact Hermitian part so small asymmetries within eq_tol don't leak in.
    let mut m: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = (a.get(i, j) + a.get(j, i).conj()) * 0.5;
        }
        m[i * n + i].im = 0.0;
    }
    let mut v = MatrixElement::identity(n);

    let frob = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = n as f64 * f64::EPSILON * frob;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal(&m, n) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, n, p, q, want_vectors);
            }
        }
    }
    if !converged {
        let off = off_diagonal(&m, n);
        if off > threshold {
            return Err(Error::NoConvergence {
                sweeps: MAX_SWEEPS,
                off_diagonal: off,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].re.total_cmp(&m[j * n + j].re));
    let values = order.iter().map(|&i| m[i * n + i].re).collect();
    let mut vectors = MatrixElement::zeros(n);
    if want_vectors {
        for (col, &src) in order.iter().enumerate() {
            for row in 0..n {
                vectors.set(row, col, v.get(row, src));
            }
        }
    }
    Ok(HermitianEigen { values, vectors })
}

fn off_diagonal(m: &[Complex64], n: usize) -> f64 {
    let mut sum = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                sum += m[p * n + q].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Annihilates `m[p][q]` with the unitary plane rotation
/// `U = [[c, s·e^{iφ}], [-s·e^{-iφ}, c]]` acting on coordinates `p, q`.
fn rotate(m: &mut [Complex64], v: &mut MatrixElement, n: usize, p: usize, q: usize, vecs: bool) {
    let apq = m[p * n + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = m[p * n + p].re;
    let aqq = m[q * n + q].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.is_infinite() {
        0.0
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let phase = apq / r;
    let u_pp = Complex64::new(c, 0.0);
    let u_qq = u_pp;
    let u_pq = phase * s;
    let u_qp = -phase.conj() * s;

    // m <- m · U
    for k in 0..n {
        let mkp = m[k * n + p];
        let mkq = m[k * n + q];
        m[k * n + p] = mkp * u_pp + mkq * u_qp;
        m[k * n + q] = mkp * u_pq + mkq * u_qq;
    }
    // m <- U* · m
    for k in 0..n {
        let mpk = m[p * n + k];
        let mqk = m[q * n + k];
        m[p * n + k] = u_pp.conj() * mpk + u_qp.conj() * mqk;
        m[q * n + k] = u_pq.conj() * mpk + u_qq.conj() * mqk;
    }
    m[p * n + q] = Complex64::new(0.0, 0.0);
    m[q * n + p] = Complex64::new(0.0, 0.0);
    m[p * n + p].im = 0.0;
    m[q * n + q].im = 0.0;

    if vecs {
        for k in 0..n {
            let vkp = v.get(k, p);
            let vkq = v.get(k, q);
            v.set(k, p, vkp * u_pp + vkq * u_qp);
            v.set(k, q, vkp * u_pq + vkq * u_qq);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// Roots of the characteristic polynomial of a real symmetric 2×2 matrix,
    /// by the quadratic formula.
    fn quadratic_roots(a: f64, b: f64, d: f64) -> (f64, f64) {
        let tr = a + d;
        let det = a * d - b * b;
        let disc = (tr * tr - 4.0 * det).sqrt();
        ((tr - disc) / 2.0, (tr + disc) / 2.0)
    }

    #[test]
    fn two_by_two_matches_characteristic_roots() {
        let a = MatrixElement::from_real_rows(&[[1.0, -2.0], [-2.0, 5.0]]).unwrap();
        let spec = hermitian_spectrum(&a, &tol()).unwrap();
        let (lo, hi) = quadratic_roots(1.0, -2.0, 5.0);
        assert!((spec[0] - lo).abs() < 1e-12);
        assert!((spec[1] - hi).abs() < 1e-12);
        assert!((spec[0] - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn diagonal_and_zero() {
        let d = MatrixElement::diag(&[2.0, 1.0]);
        assert_eq!(hermitian_spectrum(&d, &tol()).unwrap(), vec![1.0, 2.0]);
        assert_eq!(
            hermitian_spectrum(&MatrixElement::zeros(2), &tol()).unwrap(),
            vec![0.0, 0.0]
        );
        let e = hermitian_eigen(&MatrixElement::zeros(3), &tol()).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
    }

    #[test]
    fn complex_hermitian_residuals() {
        // [[2, 1-i, 0], [1+i, 3, i], [0, -i, 1]]
        let c = Complex64::new;
        let a = MatrixElement::from_complex(
            3,
            vec![
                c(2., 0.),
                c(1., -1.),
                c(0., 0.),
                c(1., 1.),
                c(3., 0.),
                c(0., 1.),
                c(0., 0.),
                c(0., -1.),
                c(1., 0.),
            ],
        )
        .unwrap();
        let e = hermitian_eigen(&a, &tol()).unwrap();
        let trace: f64 = e.values.iter().sum();
        assert!((trace - 6.0).abs() < 1e-12);
        for k in 0..3 {
            let vk = e.eigenvector(k);
            for i in 0..3 {
                let av: Complex64 = (0..3).map(|j| a.get(i, j) * vk[j]).sum();
                assert!((av - vk[i] * e.values[k]).norm() < 1e-12);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = MatrixElement::from_real_rows(&[[-1.0, 3.0], [-1.0, 3.0]]).unwrap();
        assert!(matches!(
            hermitian_spectrum(&a, &tol()),
            Err(Error::NotHermitian { .. })
        ));
        let nan = MatrixElement::diag(&[f64::NAN, 1.0]);
        assert!(hermitian_spectrum(&nan, &tol()).is_err());
    }

    #[test]
    fn degenerate_eigenvalues() {
        let a = MatrixElement::from_real_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let spec = hermitian_spectrum(&a, &tol()).unwrap();
        assert!(spec[0].abs() < 1e-15 && (spec[1] - 2.0).abs() < 1e-15);
        let i4 = MatrixElement::identity(4).scale(3.0);
        assert_eq!(hermitian_spectrum(&i4, &tol()).unwrap(), vec![3.0; 4]);
    }
}

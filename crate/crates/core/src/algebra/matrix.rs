use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An element of the matrix algebra `M_n(ℂ)`, stored row-major.
#[derive(Clone, PartialEq)]
pub struct MatrixElement {
    dim: usize,
    data: Vec<Complex64>,
}

impl MatrixElement {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, 1.0)
    }

    /// `λ · 1` in dimension `dim`.
    pub fn scalar(dim: usize, lambda: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(lambda, 0.0);
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = Complex64::new(v, 0.0);
        }
        m
    }

    /// The matrix unit `E_ij` (a single 1 at row `i`, column `j`).
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.data[i * dim + j] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn from_complex(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::MalformedMatrix("dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::MalformedMatrix(format!(
                "expected {} entries, found {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    /// Builds a real matrix from rows; every row must have as many entries as there are rows.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::from_parts(rows, None)
    }

    pub fn from_parts<R: AsRef<[f64]>>(re: &[R], im: Option<&[R]>) -> Result<Self> {
        let dim = re.len();
        if dim == 0 {
            return Err(Error::MalformedMatrix("no rows".into()));
        }
        if let Some(im) = im {
            if im.len() != dim {
                return Err(Error::MalformedMatrix(format!(
                    "re has {dim} rows but im has {}",
                    im.len()
                )));
            }
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (r, row) in re.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::MalformedMatrix(format!(
                    "row {r} of re has {} entries, expected {dim}",
                    row.len()
                )));
            }
            let im_row = im.map(|im| im[r].as_ref());
            if let Some(im_row) = im_row {
                if im_row.len() != dim {
                    return Err(Error::MalformedMatrix(format!(
                        "row {r} of im has {} entries, expected {dim}",
                        im_row.len()
                    )));
                }
            }
            for c in 0..dim {
                let imag = im_row.map_or(0.0, |x| x[c]);
                data.push(Complex64::new(row[c], imag));
            }
        }
        Ok(Self { dim, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.dim + j] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn re_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.dim)
            .map(|r| r.iter().map(|z| z.re).collect())
            .collect()
    }

    pub fn im_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.dim)
            .map(|r| r.iter().map(|z| z.im).collect())
            .collect()
    }

    /// Diagonal entries (real parts).
    pub fn diagonal_re(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let n = self.dim;
        self.data
            .iter()
            .enumerate()
            .all(|(k, z)| k / n == k % n || (z.re == 0.0 && z.im == 0.0))
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// `max |a_ij - conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_finite() {
            return f64::INFINITY;
        }
        let n = self.dim;
        let mut defect: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                defect = defect.max(d);
            }
        }
        defect
    }

    /// Largest entry modulus; NaN if any entry is NaN.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m: f64, z| {
            let v = z.norm();
            if v.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(v)
            }
        })
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn scale(&self, lambda: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * lambda).collect(),
        }
    }

    pub fn scale_complex(&self, lambda: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * lambda).collect(),
        }
    }

    /// `a* · self · a`.
    pub fn conjugate_by(&self, a: &Self) -> Result<Self> {
        self.check_dim(a)?;
        Ok(a.adjoint().mul_unchecked(&self.mul_unchecked(a)))
    }

    pub fn powi(&self, exp: u32) -> Self {
        let mut result = Self::identity(self.dim);
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        result
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        if self.is_diagonal() && other.is_diagonal() {
            for i in 0..n {
                out.data[i * n + i] = self.data[i * n + i] * other.data[i * n + i];
            }
            return out;
        }
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl fmt::Debug for MatrixElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatrixElement(dim={}, [", self.dim)?;
        for (i, row) in self.data.chunks(self.dim).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, z) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                if z.im == 0.0 {
                    write!(f, "{}", z.re)?;
                } else {
                    write!(f, "{}{:+}i", z.re, z.im)?;
                }
            }
            write!(f, "]")?;
        }
        write!(f, "])")
    }
}

/// Wire form: `{ "dim": n, "re": [[...]], "im": [[...]] }`, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

impl Serialize for MatrixElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            dim: self.dim,
            re: self.re_rows(),
            im: Some(self.im_rows()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MatrixElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        if raw.re.len() != raw.dim {
            return Err(serde::de::Error::custom(format!(
                "dim is {} but re has {} rows",
                raw.dim,
                raw.re.len()
            )));
        }
        MatrixElement::from_parts(&raw.re, raw.im.as_deref()).map_err(serde::de::Error::custom)
    }
}

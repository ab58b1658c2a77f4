//! Small dense complex linear algebra.
//!
//! Everything here is sized for matrices of dimension 2, 4 or 16: dense
//! row-major storage, O(n^3) direct algorithms, no attempt at sparsity or
//! blocking. Equality is always up to an explicit tolerance.

mod eig;
mod gns;

pub use eig::{eig_decompose, riesz_projection, EigenSystem};
pub use gns::{
    contraction_norm, gibbs_qubit, gns_to_observable, observable_to_gns, thermal_partial_trace,
    tracial_vector,
};

use num_complex::Complex64;
use std::fmt;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex vector.
#[derive(Clone, PartialEq)]
pub struct CVector(pub Vec<Complex64>);

impl CVector {
    pub fn zeros(n: usize) -> Self {
        CVector(vec![ZERO; n])
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// ⟨self, other⟩ with conjugation on the left argument.
    pub fn inner(&self, other: &CVector) -> Complex64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> CVector {
        CVector(self.0.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, other: &CVector) -> CVector {
        assert_eq!(self.dim(), other.dim());
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        assert_eq!(self.dim(), other.dim());
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn conj(&self) -> CVector {
        CVector(self.0.iter().map(|c| c.conj()).collect())
    }

    pub fn distance(&self, other: &CVector) -> f64 {
        self.sub(other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl fmt::Debug for CVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CVector{:?}", self.0)
    }
}

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "rows must form a square matrix");
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim);
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(x, 0.0);
            }
        }
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector((0..self.dim).map(|i| self[(i, j)]).collect())
    }

    pub fn set_column(&mut self, j: usize, v: &CVector) {
        assert_eq!(v.dim(), self.dim);
        for i in 0..self.dim {
            self[(i, j)] = v.0[i];
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> ComplexMatrix {
        ComplexMatrix { dim: self.dim, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn scale_re(&self, c: f64) -> ComplexMatrix {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &CVector) -> CVector {
        assert_eq!(self.dim, v.dim());
        let n = self.dim;
        let mut out = CVector::zeros(n);
        for i in 0..n {
            let mut acc = ZERO;
            for j in 0..n {
                acc += self[(i, j)] * v.0[j];
            }
            out.0[i] = acc;
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self[(j, i)];
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (n, m) = (self.dim, other.dim);
        let mut out = ComplexMatrix::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// |a⟩⟨b|, with conjugation on `b`.
    pub fn outer(a: &CVector, b: &CVector) -> ComplexMatrix {
        assert_eq!(a.dim(), b.dim());
        let n = a.dim();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = a.0[i] * b.0[j].conj();
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Operator norm (largest singular value), by power iteration on A*A.
    ///
    /// Deterministic: fixed starting vector, fixed iteration budget. For the
    /// dimensions used here the result is accurate to ~1e-13 relative.
    pub fn op_norm(&self) -> f64 {
        let n = self.dim;
        let fro = self.frobenius_norm();
        if fro == 0.0 {
            return 0.0;
        }
        let ata = self.adjoint().mul(self);
        let mut v = CVector(
            (0..n)
                .map(|i| Complex64::new(1.0 + 0.1 * (i as f64 + 1.0), 0.03 * (i as f64)))
                .collect(),
        );
        let nv = v.norm();
        v = v.scale(Complex64::new(1.0 / nv, 0.0));
        let mut lam = 0.0_f64;
        for _ in 0..200 {
            let w = ata.mul_vec(&v);
            let nw = w.norm();
            if nw == 0.0 {
                return 0.0;
            }
            let next = v.inner(&w).re;
            v = w.scale(Complex64::new(1.0 / nw, 0.0));
            if (next - lam).abs() <= 1e-15 * next.abs().max(1.0) {
                lam = next;
                break;
            }
            lam = next;
        }
        lam.max(0.0).sqrt()
    }

    pub fn approx_eq(&self, other: &ComplexMatrix, tol: f64) -> bool {
        self.dim == other.dim && self.sub(other).max_abs() <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.adjoint()).max_abs() <= tol
    }

    /// Eigenvalues of a 2x2 Hermitian matrix, ascending.
    pub fn hermitian_2x2_eigenvalues(&self) -> (f64, f64) {
        assert_eq!(self.dim, 2);
        let a = self[(0, 0)].re;
        let d = self[(1, 1)].re;
        let b = self[(0, 1)];
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        (mid - rad, mid + rad)
    }

    /// Inverse by Gaussian elimination with partial pivoting.
    pub fn inverse(&self) -> crate::Result<ComplexMatrix> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = ComplexMatrix::identity(n);
        for col in 0..n {
            let (mut piv, mut best) = (col, a[(col, col)].norm());
            for r in col + 1..n {
                let v = a[(r, col)].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-14 * self.frobenius_norm().max(1e-300) {
                return Err(crate::Error::DimensionMismatch(
                    "matrix numerically singular in inverse()".into(),
                ));
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(col * n + j, piv * n + j);
                    inv.data.swap(col * n + j, piv * n + j);
                }
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let sub_a = f * a[(col, j)];
                    let sub_i = f * inv[(col, j)];
                    a[(r, j)] -= sub_a;
                    inv[(r, j)] -= sub_i;
                }
            }
        }
        Ok(inv)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        let n = self.dim;
        &mut self.data[i * n + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let c = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", c.re, c.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mul_and_adjoint() {
        let a = ComplexMatrix::from_rows(&[&[c(1.0, 1.0), c(0.0, 2.0)], &[c(3.0, 0.0), c(0.0, -1.0)]]);
        let id = ComplexMatrix::identity(2);
        assert!(a.mul(&id).approx_eq(&a, 0.0));
        let aa = a.adjoint();
        assert_eq!(aa[(0, 1)], c(3.0, 0.0));
        assert_eq!(aa[(1, 0)], c(0.0, -2.0));
    }

    #[test]
    fn kron_matches_block_structure() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = ComplexMatrix::identity(2);
        let k = a.kron(&b);
        assert_eq!(k.dim(), 4);
        assert_eq!(k[(0, 0)], c(1.0, 0.0));
        assert_eq!(k[(0, 2)], c(2.0, 0.0));
        assert_eq!(k[(1, 3)], c(2.0, 0.0));
        assert_eq!(k[(2, 0)], c(3.0, 0.0));
    }

    #[test]
    fn op_norm_of_scaled_unitary() {
        // diag(2i, 2) has operator norm 2
        let m = ComplexMatrix::diag(&[c(0.0, 2.0), c(2.0, 0.0)]);
        assert!((m.op_norm() - 2.0).abs() < 1e-12);
        assert_eq!(ComplexMatrix::zeros(3).op_norm(), 0.0);
    }

    #[test]
    fn inverse_round_trip() {
        let a = ComplexMatrix::from_rows(&[
            &[c(1.0, 0.5), c(2.0, 0.0), c(0.0, 0.0)],
            &[c(0.0, 1.0), c(1.0, 0.0), c(3.0, -1.0)],
            &[c(2.0, 0.0), c(0.0, 0.0), c(1.0, 1.0)],
        ]);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).approx_eq(&ComplexMatrix::identity(3), 1e-12));
    }
}

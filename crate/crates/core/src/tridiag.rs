use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tridiagonal matrix, row i holds (lower[i-1], diag[i], upper[i]).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiag<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> Tridiag<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![T::zero(); n.saturating_sub(1)],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul_vec(&self, x: &[T], out: &mut [T]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            out[i] = acc;
        }
    }

    /// a*self + b*other, entrywise.
    pub fn combine(&self, a: T, other: &Tridiag<f64>, b: T) -> Tridiag<T> {
        let f = |x: &[T], y: &[f64]| x.iter().zip(y).map(|(&p, &q)| a * p + b * q).collect();
        Tridiag {
            lower: f(&self.lower, &other.lower),
            diag: f(&self.diag, &other.diag),
            upper: f(&self.upper, &other.upper),
        }
    }
}

impl Tridiag<f64> {
    pub fn cast<T: Scalar>(&self) -> Tridiag<T> {
        let f = |x: &[f64]| x.iter().map(|&v| T::from(v)).collect();
        Tridiag { lower: f(&self.lower), diag: f(&self.diag), upper: f(&self.upper) }
    }
}

/// LU factorization with partial pivoting (gttrf layout).
#[derive(Debug, Clone)]
pub struct TridiagLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    ipiv: Vec<bool>,
}

impl<T: Scalar> TridiagLu<T> {
    pub fn factor(m: &Tridiag<T>) -> Result<Self> {
        let n = m.dim();
        let mut dl = m.lower.clone();
        let mut d = m.diag.clone();
        let mut du = m.upper.clone();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut ipiv = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            if d[i].modulus() >= dl[i].modulus() {
                if d[i].modulus() == 0.0 {
                    return Err(Error::Singular(format!("zero pivot at row {i}")));
                }
                let f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] = d[i + 1] - f * du[i];
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du[i + 1];
                }
                ipiv[i] = true;
            }
        }
        if n > 0 && (d[n - 1].modulus() == 0.0 || !d[n - 1].modulus().is_finite()) {
            return Err(Error::Singular(format!("zero pivot at row {}", n - 1)));
        }
        Ok(Self { dl, d, du, du2, ipiv })
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.ipiv[i] {
                b.swap(i, i + 1);
            }
            let t = b[i];
            b[i + 1] -= self.dl[i] * t;
        }
        if n == 0 {
            return;
        }
        b[n - 1] = b[n - 1] / self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

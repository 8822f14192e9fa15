//! Symmetric eigenvalue kernels: tridiagonal QL, Sturm bisection and the dense
//! reduction through nalgebra.

use nalgebra::{DMatrix, RealField};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Real symmetric tridiagonal matrix stored as its diagonal and off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Dimensions(format!(
                "tridiagonal needs n diagonal and n-1 off-diagonal entries, got {} and {}",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    /// Zero-diagonal tridiagonal of size `2n` whose eigenvalues are `±s_k`, where
    /// `s_k` are the singular values of the upper bidiagonal matrix with diagonal
    /// `d` and superdiagonal `e`.
    pub fn golub_kahan(d: &[T], e: &[T]) -> Result<Self> {
        let n = d.len();
        if n == 0 || e.len() + 1 != n {
            return Err(Error::Dimensions(format!("bidiagonal with {} and {} entries", n, e.len())));
        }
        let mut off = Vec::with_capacity(2 * n - 1);
        for i in 0..n {
            off.push(d[i]);
            if i + 1 < n {
                off.push(e[i]);
            }
        }
        Ok(Self { diag: vec![T::zero(); 2 * n], off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// All eigenvalues in increasing order (implicit QL with Wilkinson shifts).
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        let n = self.len();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(T::zero());
        let eps = T::epsilon();
        let two = T::lit(2.0);
        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= eps * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 60 {
                    return Err(Error::NoConvergence { iterations: iter, residual: e[l].to_f64_lossy() });
                }
                let mut g = (d[l + 1] - d[l]) / (two * e[l]);
                let mut r = g.hypot(T::one());
                g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
                let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
                let mut underflow = false;
                let mut i = m;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == T::zero() {
                        d[i + 1] = d[i + 1] - p;
                        e[m] = T::zero();
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + two * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if underflow {
                    continue;
                }
                d[l] = d[l] - p;
                e[l] = g;
                e[m] = T::zero();
            }
        }
        if d.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("tridiagonal eigenvalues".into()));
        }
        d.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        Ok(d)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: T) -> usize {
        let tiny = T::min_positive_value().sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < T::zero() {
            count += 1;
        }
        for i in 1..self.len() {
            let qq = if q == T::zero() { tiny } else { q };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / qq;
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r = r + self.off[i - 1].abs();
            }
            if i + 1 < n {
                r = r + self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by Sturm bisection.
    pub fn kth_eigenvalue(&self, k: usize) -> T {
        assert!(k < self.len());
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(T::min_positive_value());
        let two = T::lit(2.0);
        while hi - lo > T::epsilon() * scale * two {
            let mid = (lo + hi) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo + hi) / two
    }

    pub fn largest_eigenvalue(&self) -> T {
        self.kth_eigenvalue(self.len() - 1)
    }
}

/// Householder reduction of a dense symmetric matrix to tridiagonal form.
pub fn tridiagonalize<T: Real + RealField>(m: DMatrix<T>) -> Result<SymTridiagonal<T>> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::Dimensions(format!("{}x{} is not a nonempty square matrix", m.nrows(), m.ncols())));
    }
    if m.iter().any(|x| !Float::is_finite(*x)) {
        return Err(Error::NonFinite("matrix entries".into()));
    }
    if m.nrows() == 1 {
        return SymTridiagonal::new(vec![m[(0, 0)]], vec![]);
    }
    let (diag, off) = m.symmetric_tridiagonalize().unpack_tridiagonal();
    SymTridiagonal::new(diag.iter().copied().collect(), off.iter().copied().collect())
}

/// All eigenvalues of a dense symmetric matrix, increasing.
pub fn symmetric_eigenvalues<T: Real + RealField>(m: DMatrix<T>) -> Result<Vec<T>> {
    tridiagonalize(m)?.eigenvalues()
}

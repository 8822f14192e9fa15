//! Marchenko–Pastur law, its symmetrized singular-value counterpart, their
//! Stieltjes transforms and typical locations.

use crate::error::{Error, Result};
use crate::quadrature::{bisect, GaussKronrod};
use crate::scalar::{cplx, principal_sqrt, Cplx, Real};

/// `ξ = N/M`, kept as the exact pair `(N, M)` whenever it was built from dimensions.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AspectRatio {
    dims: Option<(usize, usize)>,
    xi: f64,
}

impl AspectRatio {
    pub fn from_dims(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Dimensions(format!("N = {n} and M = {m} must be positive")));
        }
        if n > m {
            return Err(Error::AspectRatio(n as f64 / m as f64));
        }
        Ok(Self { dims: Some((n, m)), xi: n as f64 / m as f64 })
    }

    pub fn from_xi(xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi <= 1.0) {
            return Err(Error::AspectRatio(xi));
        }
        Ok(Self { dims: None, xi })
    }

    /// `ξ` in the requested precision, formed from the exact ratio when known.
    pub fn value<T: Real>(&self) -> T {
        match self.dims {
            Some((n, m)) => T::from_usize_lossy(n) / T::from_usize_lossy(m),
            None => T::lit(self.xi),
        }
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        self.dims
    }

    pub fn is_square(&self) -> bool {
        self.xi == 1.0
    }
}

/// Distances of a point to the singular-value support `[√λ₋, √λ₊]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeDistances<T> {
    /// Distance to the nearest soft edge.
    pub kappa: T,
    /// Distance to the support segment.
    pub a: T,
    /// Distance to the real complement of the support segment.
    pub b: T,
}

/// Positive-half typical locations `γ_1 < … < γ_N`; `γ_{-k} = -γ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypicalLocations<T> {
    pub gamma: Vec<T>,
}

impl<T: Real> TypicalLocations<T> {
    /// `γ_k` for `k = 1..=N`.
    pub fn get(&self, k: usize) -> T {
        self.gamma[k - 1]
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }
}

/// Null-case spectral law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLaw<T> {
    pub xi: T,
    pub lambda_minus: T,
    pub lambda_plus: T,
    /// `(√λ₋, √λ₊)`.
    pub sqrt_edges: (T, T),
    square: bool,
}

impl<T: Real> SpectralLaw<T> {
    pub fn new(ratio: AspectRatio) -> Self {
        let xi: T = ratio.value();
        let r = xi.sqrt();
        let square = ratio.is_square();
        let lm = if square { T::zero() } else { (T::one() - r) * (T::one() - r) };
        let lp = (T::one() + r) * (T::one() + r);
        let sm = if square { T::zero() } else { T::one() - r };
        Self { xi, lambda_minus: lm, lambda_plus: lp, sqrt_edges: (sm, T::one() + r), square }
    }

    pub fn from_xi(xi: f64) -> Result<Self> {
        Ok(Self::new(AspectRatio::from_xi(xi)?))
    }

    pub fn is_square(&self) -> bool {
        self.square
    }

    /// Marchenko–Pastur density. Returns `+∞` at the origin when `ξ = 1`.
    pub fn mp_density(&self, x: T) -> T {
        if x < self.lambda_minus || x > self.lambda_plus {
            return T::zero();
        }
        if x == T::zero() {
            return if self.square { T::infinity() } else { T::zero() };
        }
        let w = ((x - self.lambda_minus) * (self.lambda_plus - x)).max(T::zero());
        w.sqrt() / (T::lit(2.0) * T::PI() * self.xi * x)
    }

    /// Symmetrized singular-value density `ρ(x) = |x|·ρ_MP(x²)`.
    pub fn sv_density(&self, x: T) -> T {
        let x = x.abs();
        let x2 = x * x;
        if x2 < self.lambda_minus || x2 > self.lambda_plus {
            return T::zero();
        }
        let w = ((x2 - self.lambda_minus) * (self.lambda_plus - x2)).max(T::zero());
        if self.square {
            // (1/2π)·√(x²(4−x²))/x, written without the removable 0/0.
            return (self.lambda_plus - x2).max(T::zero()).sqrt() / (T::lit(2.0) * T::PI());
        }
        w.sqrt() / (T::lit(2.0) * T::PI() * self.xi * x)
    }

    fn on_support(&self, z: Cplx<T>) -> bool {
        z.im == T::zero() && z.re >= self.lambda_minus && z.re <= self.lambda_plus
    }

    /// Stieltjes transform of the Marchenko–Pastur law.
    pub fn mp_stieltjes(&self, z: Cplx<T>) -> Result<Cplx<T>> {
        if self.on_support(z) {
            return Err(Error::OnSupport { re: z.re.to_f64_lossy(), im: z.im.to_f64_lossy() });
        }
        if z.im < T::zero() {
            return Ok(self.mp_stieltjes(z.conj())?.conj());
        }
        let xi = self.xi;
        let one = T::one();
        let two = T::lit(2.0);
        let root = |s: Cplx<T>| -> Cplx<T> {
            // Two algebraically equal forms; choose the one without cancellation.
            let base = cplx(one - xi, T::zero()) - z;
            let plus = base + s;
            let minus = base - s;
            if minus.norm() >= plus.norm() {
                cplx(two, T::zero()) / minus
            } else {
                plus / (z * (two * xi))
            }
        };
        let s = principal_sqrt(z - self.lambda_minus) * principal_sqrt(z - self.lambda_plus);
        let mut m = root(s);
        if z.im > T::zero() && m.im <= T::zero() {
            m = root(-s);
        }
        if z.im == T::zero() {
            m.im = T::zero();
        }
        Ok(m)
    }

    /// Stieltjes transform of the symmetrized density, `m(z) = z·m_MP(z²)`.
    pub fn sv_stieltjes(&self, z: Cplx<T>) -> Result<Cplx<T>> {
        let (lo, hi) = self.sqrt_edges;
        if z.im == T::zero() && z.re.abs() >= lo && z.re.abs() <= hi {
            return Err(Error::OnSupport { re: z.re.to_f64_lossy(), im: z.im.to_f64_lossy() });
        }
        if z.im < T::zero() {
            return Ok(self.sv_stieltjes(z.conj())?.conj());
        }
        let z2 = z * z;
        // z² lands on the real axis only for purely imaginary z, which is off the support.
        let z2 = if z.re == T::zero() { cplx(z2.re, T::zero()) } else { z2 };
        Ok(z * self.mp_stieltjes(z2)?)
    }

    /// Cumulative distribution function of the Marchenko–Pastur law.
    pub fn mp_cdf(&self, x: T) -> Result<T> {
        if x <= self.lambda_minus {
            return Ok(T::zero());
        }
        if x >= self.lambda_plus {
            return Ok(T::one());
        }
        let theta = self.theta_of(x);
        self.cdf_theta(theta)
    }

    /// `x = λ₋ + (λ₊−λ₋)sin²θ`, inverted.
    fn theta_of(&self, x: T) -> T {
        let w = self.lambda_plus - self.lambda_minus;
        ((x - self.lambda_minus) / w).max(T::zero()).min(T::one()).sqrt().asin()
    }

    fn x_of(&self, theta: T) -> T {
        let s = theta.sin();
        self.lambda_minus + (self.lambda_plus - self.lambda_minus) * s * s
    }

    /// Integrand of the CDF after the sine-squared substitution; bounded on `[0, π/2]`.
    fn theta_integrand(&self, theta: T) -> T {
        let w = self.lambda_plus - self.lambda_minus;
        let (s, c) = theta.sin_cos();
        let s2 = s * s;
        let s2_over_x = if self.lambda_minus == T::zero() {
            T::one() / w
        } else {
            s2 / (self.lambda_minus + w * s2)
        };
        w * w * s2_over_x * c * c / (T::PI() * self.xi)
    }

    fn cdf_theta(&self, theta: T) -> Result<T> {
        if theta <= T::zero() {
            return Ok(T::zero());
        }
        let gk = GaussKronrod::new(T::tol(1e-15), T::tol(1e-14));
        let r = gk.integrate(T::zero(), theta, |t| self.theta_integrand(t))?;
        Ok(r.value.min(T::one()))
    }

    /// Cumulative distribution function of the symmetrized density.
    pub fn sv_cdf(&self, x: T) -> Result<T> {
        let half = T::lit(0.5);
        let f = self.mp_cdf(x * x)? * half;
        Ok(if x >= T::zero() { half + f } else { half - f })
    }

    /// `γ_k` for `k = 1..=n`: the `(n+k)/(2n)` quantiles of the symmetrized law,
    /// equivalently `F_MP(γ_k²) = k/n`.
    pub fn typical_locations(&self, n: usize) -> Result<TypicalLocations<T>> {
        if n == 0 {
            return Err(Error::Parameter { name: "n", reason: "must be at least 1".into() });
        }
        let nf = T::from_usize_lossy(n);
        let half_pi = T::FRAC_PI_2();
        let mut gamma = Vec::with_capacity(n);
        let mut lo = T::zero();
        for k in 1..=n {
            if k == n {
                gamma.push(self.sqrt_edges.1);
                break;
            }
            let target = T::from_usize_lossy(k) / nf;
            let theta = bisect(
                |th| self.cdf_theta(th).map(|v| v - target).unwrap_or(T::nan()),
                lo,
                half_pi,
                T::tol(1e-13),
            )?;
            lo = theta;
            // One Newton polish in x.
            let mut x = self.x_of(theta);
            let dens = self.mp_density(x);
            if dens > T::zero() && dens.is_finite() {
                let step = (self.mp_cdf(x)? - target) / dens;
                let xn = x - step;
                if xn > self.lambda_minus && xn < self.lambda_plus {
                    x = xn;
                }
            }
            gamma.push(x.sqrt());
        }
        Ok(TypicalLocations { gamma })
    }

    /// Distances of `z` to the soft edges and to the support segment. When
    /// `ξ = 1` the origin is not an edge of the symmetrized law and `κ = |z − 2|`.
    pub fn edge_distances(&self, z: Cplx<T>) -> EdgeDistances<T> {
        let (lo, hi) = self.sqrt_edges;
        let d_hi = (z - hi).norm();
        let kappa = if self.square { d_hi } else { (z - lo).norm().min(d_hi) };
        let inside = z.re >= lo && z.re <= hi;
        let a = if inside {
            z.im.abs()
        } else if z.re < lo {
            (z - lo).norm()
        } else {
            d_hi
        };
        let b = if inside { (z - lo).norm().min(d_hi) } else { z.im.abs() };
        EdgeDistances { kappa, a, b }
    }
}

/// `m_N(z) = (1/N) Σ z/(s_k² − z²)` for positive singular values `s_k`.
pub fn empirical_stieltjes<T: Real>(svals: &[T], z: Cplx<T>) -> Result<Cplx<T>> {
    if svals.is_empty() {
        return Err(Error::Dimensions("empty singular value list".into()));
    }
    let z2 = z * z;
    let mut acc = cplx(T::zero(), T::zero());
    for (k, &s) in svals.iter().enumerate() {
        if z.im == T::zero() && (z.re == s || z.re == -s) {
            return Err(Error::Coincident(k));
        }
        acc = acc + z / (cplx(s * s, T::zero()) - z2);
    }
    Ok(acc / T::from_usize_lossy(svals.len()))
}

/// `S_N(w) = (1/N) Σ 1/(λ_k − w)`.
pub fn empirical_mp_stieltjes<T: Real>(evals: &[T], w: Cplx<T>) -> Result<Cplx<T>> {
    if evals.is_empty() {
        return Err(Error::Dimensions("empty eigenvalue list".into()));
    }
    let mut acc = cplx(T::zero(), T::zero());
    for (k, &l) in evals.iter().enumerate() {
        if w.im == T::zero() && w.re == l {
            return Err(Error::Coincident(k));
        }
        acc = acc + (cplx(l, T::zero()) - w).inv();
    }
    Ok(acc / T::from_usize_lossy(evals.len()))
}

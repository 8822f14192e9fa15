//! Gauss–Legendre rules and adaptive Gauss–Kronrod integration.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Computes the `n`-point rule by Newton iteration on `P_n`, seeded with the
    /// Tricomi approximation of the roots. Nodes are returned in increasing order.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Newton in f64 first, then finish in T when T is wider.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_f64(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_f64(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = T::lit(-x);
            nodes[n - 1 - i] = T::lit(x);
            weights[i] = T::lit(w);
            weights[n - 1 - i] = T::lit(w);
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights affinely mapped to `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> (Vec<T>, Vec<T>) {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        let x = self.nodes.iter().map(|&t| mid + half * t).collect();
        let w = self.weights.iter().map(|&w| w * half).collect();
        (x, w)
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        let mut acc = T::zero();
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + w * f(mid + half * t);
        }
        acc * half
    }
}

fn legendre_f64(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

/// Adaptive G7K15 integrator with global error control.
#[derive(Debug, Clone, Copy)]
pub struct GaussKronrod<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for GaussKronrod<T> {
    fn default() -> Self {
        Self { abs_tol: T::tol(1e-14), rel_tol: T::tol(1e-12), max_intervals: 2000 }
    }
}

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

impl<T: Real> GaussKronrod<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }

    /// Single 15-point panel; returns (Kronrod value, |Kronrod − Gauss|).
    pub fn panel<F: FnMut(T) -> T>(a: T, b: T, f: &mut F) -> (T, T) {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        let fc = f(mid);
        let mut k = fc * T::lit(WGK[7]);
        let mut g = fc * T::lit(WG[3]);
        for j in 0..7 {
            let dx = half * T::lit(XGK[j]);
            let s = f(mid - dx) + f(mid + dx);
            k = k + T::lit(WGK[j]) * s;
            if j % 2 == 1 {
                g = g + T::lit(WG[j / 2]) * s;
            }
        }
        (k * half, ((k - g) * half).abs())
    }

    /// Integrates `f` over `[a, b]`, bisecting the panel with the largest error
    /// estimate until the total estimate meets `max(abs_tol, rel_tol·|I|)`.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> Result<Integral<T>> {
        self.integrate_with_breaks(&[a, b], &mut f)
    }

    /// As [`integrate`](Self::integrate), with the initial partition given by
    /// `breaks` (sorted, at least two points). Useful when the integrand has
    /// known kinks or peaks.
    pub fn integrate_with_breaks<F: FnMut(T) -> T>(&self, breaks: &[T], f: &mut F) -> Result<Integral<T>> {
        assert!(breaks.len() >= 2);
        let mut heap = BinaryHeap::new();
        let mut total = T::zero();
        let mut total_err = T::zero();
        for w in breaks.windows(2) {
            if w[1] == w[0] {
                continue;
            }
            let (v, e) = Self::panel(w[0], w[1], f);
            total = total + v;
            total_err = total_err + e;
            heap.push(Panel { a: w[0], b: w[1], value: v, error: e });
        }
        let mut intervals = heap.len();
        loop {
            if !total.is_finite() {
                return Err(Error::NonFinite("integrand".into()));
            }
            if total_err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                return Ok(Integral { value: total, error: total_err, intervals });
            }
            if intervals >= self.max_intervals {
                return Err(Error::Quadrature { error: total_err.to_f64_lossy(), intervals });
            }
            let Some(worst) = heap.pop() else {
                return Ok(Integral { value: total, error: total_err, intervals });
            };
            let mid = (worst.a + worst.b) / T::lit(2.0);
            if mid <= worst.a || mid >= worst.b {
                // Panel cannot be split further at this precision.
                return Ok(Integral { value: total, error: total_err, intervals });
            }
            let (v1, e1) = Self::panel(worst.a, mid, f);
            let (v2, e2) = Self::panel(mid, worst.b, f);
            total = total - worst.value + v1 + v2;
            total_err = total_err - worst.error + e1 + e2;
            heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
            heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
            intervals += 1;
        }
    }
}

/// Bisection on a bracketing interval until its width is below `width_tol`.
/// Returns the midpoint of the final bracket.
pub fn bisect<T: Real, F: FnMut(T) -> T>(mut f: F, mut lo: T, mut hi: T, width_tol: T) -> Result<T> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(Error::NoRoot(format!(
            "f({}) = {} and f({}) = {} have the same sign",
            lo, flo, hi, fhi
        )));
    }
    for _ in 0..400 {
        if (hi - lo).abs() <= width_tol {
            break;
        }
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::<f64>::new(10);
        // degree 19 is integrated exactly
        let v = rule.integrate(-1.0, 1.0, |x| x.powi(18) + 3.0 * x.powi(7));
        assert_abs_diff_eq!(v, 2.0 / 19.0, epsilon = 1e-15);
        let wsum: f64 = rule.weights.iter().sum();
        assert_abs_diff_eq!(wsum, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn legendre_nodes_sorted_and_symmetric() {
        for n in [1, 2, 7, 64] {
            let r = GaussLegendre::<f64>::new(n);
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            for i in 0..n {
                assert_abs_diff_eq!(r.nodes[i], -r.nodes[n - 1 - i], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn kronrod_handles_sqrt_endpoint() {
        let gk = GaussKronrod::<f64>::default();
        let r = gk.integrate(0.0, 1.0, |x| x.sqrt()).unwrap();
        assert_abs_diff_eq!(r.value, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn kronrod_reports_failure_when_capped() {
        let gk = GaussKronrod::<f64> { abs_tol: 1e-300, rel_tol: 0.0, max_intervals: 3 };
        let r = gk.integrate(0.0, 1.0, |x| 1.0 / x.sqrt());
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn bisection_finds_root() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert_abs_diff_eq!(r, 2f64.sqrt(), epsilon = 1e-13);
        assert!(bisect(|x: f64| x * x + 1.0, 0.0, 2.0, 1e-14).is_err());
    }
}

//! Adaptive Dormand–Prince 5(4) integrator over fixed-size real state vectors.
//!
//! Complex systems are handled by packing real and imaginary parts into the
//! state array.

use crate::error::{Error, Result};
use crate::scalar::Real;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th order weights are the last row of A; E = b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Step-size controller settings.
#[derive(Debug, Clone, Copy)]
pub struct DormandPrince<T> {
    pub rtol: T,
    pub atol: T,
    pub h_init: T,
    pub h_min: T,
    pub max_steps: usize,
}

impl<T: Real> Default for DormandPrince<T> {
    fn default() -> Self {
        Self {
            rtol: T::tol(1e-10),
            atol: T::tol(1e-12),
            h_init: T::lit(1e-3),
            h_min: T::lit(1e-14),
            max_steps: 1_000_000,
        }
    }
}

/// Counters from one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

impl<T: Real> DormandPrince<T> {
    pub fn with_tol(rtol: T, atol: T) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    /// Integrates `y' = f(t, y)` from `t0`, returning the state at each entry of
    /// `targets` (monotone in the direction of integration; backward is allowed).
    /// Steps are clipped so every target is hit exactly.
    pub fn solve_at<const D: usize, F>(
        &self,
        mut f: F,
        t0: T,
        y0: [T; D],
        targets: &[T],
    ) -> Result<(Vec<[T; D]>, OdeStats)>
    where
        F: FnMut(T, &[T; D]) -> [T; D],
    {
        let mut out = Vec::with_capacity(targets.len());
        let mut stats = OdeStats::default();
        let mut t = t0;
        let mut y = y0;
        let mut h = self.h_init;
        let mut k1 = f(t, &y);
        for &target in targets {
            let dir = if target >= t { T::one() } else { -T::one() };
            while (target - t) * dir > T::zero() {
                if stats.accepted + stats.rejected >= self.max_steps {
                    return Err(Error::Ode(format!("step budget exhausted at t = {t}")));
                }
                let remaining = (target - t).abs();
                let last = h >= remaining;
                let step = if last { remaining } else { h };
                let (y_new, k_last, err) = self.trial(&mut f, t, &y, &k1, step * dir);
                if !err.is_finite() {
                    if step <= self.h_min {
                        return Err(Error::Ode(format!("non-finite state near t = {t}")));
                    }
                    h = step / T::lit(4.0);
                    stats.rejected += 1;
                    continue;
                }
                let factor = if err == T::zero() {
                    T::lit(5.0)
                } else {
                    (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
                };
                if err <= T::one() {
                    t = if last { target } else { t + step * dir };
                    y = y_new;
                    k1 = k_last;
                    stats.accepted += 1;
                    // Do not let a short clipped final step shrink the next one.
                    h = if last { h.max(step * factor) } else { step * factor };
                } else {
                    stats.rejected += 1;
                    h = step * factor;
                    if h < self.h_min {
                        return Err(Error::Ode(format!("step size underflow at t = {t}")));
                    }
                }
            }
            out.push(y);
        }
        Ok((out, stats))
    }

    /// Convenience wrapper returning only the final state.
    pub fn solve<const D: usize, F>(&self, f: F, t0: T, y0: [T; D], t1: T) -> Result<[T; D]>
    where
        F: FnMut(T, &[T; D]) -> [T; D],
    {
        let (ys, _) = self.solve_at(f, t0, y0, &[t1])?;
        Ok(ys[0])
    }

    fn trial<const D: usize, F>(&self, f: &mut F, t: T, y: &[T; D], k1: &[T; D], h: T) -> ([T; D], [T; D], T)
    where
        F: FnMut(T, &[T; D]) -> [T; D],
    {
        let mut k = [[T::zero(); D]; 7];
        k[0] = *k1;
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = T::lit(A[s][j]);
                if a != T::zero() {
                    for d in 0..D {
                        ys[d] = ys[d] + h * a * kj[d];
                    }
                }
            }
            k[s] = f(t + h * T::lit(C[s]), &ys);
        }
        // FSAL: stage 7 was evaluated at the 5th order solution.
        let mut y_new = *y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let b = T::lit(A[6][j]);
            for d in 0..D {
                y_new[d] = y_new[d] + h * b * kj[d];
            }
        }
        let mut acc = T::zero();
        for d in 0..D {
            let mut e = T::zero();
            for (j, kj) in k.iter().enumerate() {
                e = e + T::lit(E[j]) * kj[d];
            }
            let sc = self.atol + self.rtol * y[d].abs().max(y_new[d].abs());
            let r = h * e / sc;
            acc = acc + r * r;
        }
        let err = (acc / T::from_usize_lossy(D.max(1))).sqrt();
        (y_new, k[6], err)
    }
}

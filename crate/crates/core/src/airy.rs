//! Airy function Ai and its derivative on the real line.
//!
//! Maclaurin series on a window around the origin, Poincaré asymptotics
//! outside it. The series loses about `e^{2ζ}` relative digits to cancellation
//! for positive arguments and the asymptotic series is limited to about
//! `e^{-2ζ}`, so the right switch point sits where these balance in absolute
//! terms.

use crate::scalar::Real;

const AI0: f64 = 0.355_028_053_887_817_239_26;
const DAI0: f64 = -0.258_819_403_792_806_798_41;

/// Switch from the power series to the decaying asymptotic expansion.
pub const SWITCH_POSITIVE: f64 = 5.0;
/// Switch from the power series to the oscillatory asymptotic expansion.
pub const SWITCH_NEGATIVE: f64 = -7.0;

/// `(Ai(x), Ai'(x))`.
pub fn airy_ai<T: Real>(x: T) -> (T, T) {
    let xf = x.to_f64_lossy();
    if xf > SWITCH_POSITIVE {
        asymptotic_positive(x)
    } else if xf < SWITCH_NEGATIVE {
        asymptotic_negative(x)
    } else {
        maclaurin(x)
    }
}

pub fn ai<T: Real>(x: T) -> T {
    airy_ai(x).0
}

/// Power series evaluation, valid for any `x` but accurate only near the origin.
pub fn maclaurin<T: Real>(x: T) -> (T, T) {
    let x3 = x * x * x;
    let mut f = T::one();
    let mut g = x;
    let mut df = T::zero();
    let mut dg = T::one();
    let mut tf = T::one();
    let mut tg = x;
    let mut tdf = x * x / T::lit(2.0);
    let mut tdg = x3 / T::lit(3.0);
    df = df + tdf;
    dg = dg + tdg;
    for k in 1..200 {
        let kf = T::from_usize_lossy(k);
        let three_k = T::lit(3.0) * kf;
        tf = tf * x3 / ((three_k - T::one()) * three_k);
        tg = tg * x3 / (three_k * (three_k + T::one()));
        f = f + tf;
        g = g + tg;
        if k >= 2 {
            tdf = tdf * x3 / (T::lit(3.0) * (kf - T::one()) * (three_k - T::one()));
            tdg = tdg * x3 / (three_k * (three_k - T::lit(2.0)));
            df = df + tdf;
            dg = dg + tdg;
        }
        let small = T::epsilon() * T::lit(1e-3);
        if tf.abs() <= small * f.abs().max(T::one())
            && tg.abs() <= small * g.abs().max(T::one())
            && tdf.abs() <= small * df.abs().max(T::one())
            && tdg.abs() <= small * dg.abs().max(T::one())
        {
            break;
        }
    }
    let c1 = T::lit(AI0);
    let c2 = T::lit(-DAI0);
    (c1 * f - c2 * g, c1 * df - c2 * dg)
}

/// Coefficients `u_k` and `v_k` of the Airy asymptotic series.
fn uv<T: Real>(terms: usize) -> (Vec<T>, Vec<T>) {
    let mut u = vec![T::one()];
    let mut v = vec![T::one()];
    for k in 1..terms {
        let kf = k as f64;
        let prev = u[k - 1].to_f64_lossy();
        let uk = prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(T::lit(uk));
        v.push(T::lit(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk));
    }
    (u, v)
}

/// Sums `Σ sign^k c_k / ζ^k` up to the smallest term.
fn optimal_sum<T: Real>(c: &[T], zeta: T, alternate: bool) -> T {
    let mut acc = T::zero();
    let mut last = T::infinity();
    let mut p = T::one();
    for (k, &ck) in c.iter().enumerate() {
        let term = ck * p;
        if term.abs() > last {
            break;
        }
        last = term.abs();
        acc = if alternate && k % 2 == 1 { acc - term } else { acc + term };
        if last <= T::epsilon() * acc.abs() * T::lit(1e-2) {
            break;
        }
        p = p / zeta;
    }
    acc
}

fn asymptotic_positive<T: Real>(x: T) -> (T, T) {
    let zeta = T::lit(2.0) / T::lit(3.0) * x * x.sqrt();
    let (u, v) = uv::<T>(40);
    let su = optimal_sum(&u, zeta, true);
    let sv = optimal_sum(&v, zeta, true);
    let pre = (-zeta).exp() / (T::lit(2.0) * T::PI().sqrt());
    let q = x.sqrt().sqrt();
    (pre / q * su, -pre * q * sv)
}

fn asymptotic_negative<T: Real>(x: T) -> (T, T) {
    let y = -x;
    let zeta = T::lit(2.0) / T::lit(3.0) * y * y.sqrt();
    let (u, v) = uv::<T>(40);
    // Split into even and odd coefficient subsequences with alternating signs.
    let series = |c: &[T]| -> (T, T) {
        let mut even = T::zero();
        let mut odd = T::zero();
        let mut p = T::one();
        let mut last = T::infinity();
        for (k, &ck) in c.iter().enumerate() {
            let term = ck * p;
            if term.abs() > last {
                break;
            }
            last = term.abs();
            let sign = if (k / 2) % 2 == 0 { T::one() } else { -T::one() };
            if k % 2 == 0 {
                even = even + sign * term;
            } else {
                odd = odd + sign * term;
            }
            if last <= T::epsilon() * T::lit(1e-2) {
                break;
            }
            p = p / zeta;
        }
        (even, odd)
    };
    let (ue, uo) = series(&u);
    let (ve, vo) = series(&v);
    let phase = zeta - T::FRAC_PI_4();
    let (s, c) = phase.sin_cos();
    let q = y.sqrt().sqrt();
    let rpi = T::PI().sqrt();
    let ai = (c * ue + s * uo) / (rpi * q);
    let dai = q / rpi * (s * ve - c * vo);
    (ai, dai)
}

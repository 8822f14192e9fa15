//! Tracy–Widom β = 1 distribution, built two independent ways.
//!
//! Painlevé route: the Hastings–McLeod solution `q″ = sq + 2q³`, `q ~ Ai` at
//! `+∞`, with `F₂ = exp(−∫(x−s)q²)` and `F₁ = √F₂ · exp(−½∫q)`.
//! Fredholm route: `F₁(s) = det(I − K_s)` on `L²(0, ∞)` with
//! `K_s(x, y) = ½ Ai(s + (x+y)/2)`, discretized by Gauss–Legendre Nyström.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::airy::airy_ai;
use crate::error::{Error, Result};
use crate::ode::DormandPrince;
use crate::quadrature::{GaussKronrod, GaussLegendre};

pub const S_MIN: f64 = -12.0;
pub const S_MAX: f64 = 8.0;
pub const GRID_STEP: f64 = 0.01;
/// Below this point `q` is taken from its `s → −∞` expansion.
pub const PAINLEVE_SWITCH: f64 = -7.5;
pub const NYSTROM_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwMethod {
    Painleve,
    Fredholm,
}

/// Tabulated `F₁` on `[S_MIN, S_MAX]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TWReference {
    pub beta: u8,
    pub method: TwMethod,
    pub s: Vec<f64>,
    pub cdf: Vec<f64>,
    /// `F₁′`; exact from the ODE state on the Painlevé route, finite differences otherwise.
    pub pdf: Vec<f64>,
    /// Cross-method discrepancy, when computed.
    pub est_error: f64,
}

fn grid() -> Vec<f64> {
    let n = ((S_MAX - S_MIN) / GRID_STEP).round() as usize;
    (0..=n).map(|i| S_MIN + i as f64 * GRID_STEP).collect()
}

/// `q(s)` for `s → −∞`.
pub fn hastings_mcleod_asymptotic(s: f64) -> f64 {
    let t = s.powi(-3);
    (-s / 2.0).sqrt() * (1.0 + t / 8.0 - 73.0 / 128.0 * t * t + 10657.0 / 1024.0 * t * t * t)
}

/// Solution of Painlevé II on the reference grid.
#[derive(Debug, Clone)]
pub struct PainleveSolution {
    pub s: Vec<f64>,
    pub q: Vec<f64>,
    /// `∫_s^∞ q²`.
    pub u: Vec<f64>,
    /// `∫_s^∞ (x−s) q²`.
    pub w: Vec<f64>,
    /// `∫_s^∞ q`.
    pub v: Vec<f64>,
}

/// Integrates the Hastings–McLeod solution from `S_MAX` down to `S_MIN`, seeded
/// with `scale·Ai`. `scale = 1` is the Hastings–McLeod connection; other values
/// are only useful for demonstrating that the wrong constant is detected.
pub fn solve_painleve(scale: f64) -> Result<PainleveSolution> {
    let s_grid = grid();
    let (ai, dai) = airy_ai(S_MAX);
    let gk = GaussKronrod::new(1e-30, 1e-14);
    let tail_u = gk.integrate(S_MAX, 30.0, |x| airy_ai(x).0.powi(2))?.value;
    let tail_w = gk.integrate(S_MAX, 30.0, |x| (x - S_MAX) * airy_ai(x).0.powi(2))?.value;
    let tail_v = gk.integrate(S_MAX, 30.0, |x| airy_ai(x).0)?.value;
    let y0 = [scale * ai, scale * dai, scale * scale * tail_u, scale * scale * tail_w, scale * tail_v];

    let upper: Vec<f64> = s_grid.iter().rev().copied().filter(|&s| s >= PAINLEVE_SWITCH).collect();
    let dp = DormandPrince { rtol: 1e-13, atol: 1e-300, h_init: 1e-3, ..DormandPrince::default() };
    let rhs = |s: f64, y: &[f64; 5]| {
        let q = y[0];
        [y[1], s * q + 2.0 * q * q * q, -q * q, -y[2], -q]
    };
    let (states, _) = dp.solve_at(rhs, S_MAX, y0, &upper).map_err(|e| Error::Ode(format!("Painlevé integration: {e}")))?;
    for (&s, y) in upper.iter().zip(&states) {
        let plausible = y[0] >= -1e-8 && y[0] <= 2.0 * (s.abs() / 2.0).sqrt() + 1.0;
        if !plausible || !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Ode(format!("solution left the Hastings–McLeod regime near s = {s:.2} (q = {:.3e})", y[0])));
        }
    }
    let last = *states.last().expect("grid reaches the switch");
    let s_sw = *upper.last().expect("nonempty");
    let lower: Vec<f64> = s_grid.iter().rev().copied().filter(|&s| s < s_sw).collect();
    let mut lower_states = Vec::new();
    if !lower.is_empty() {
        let rhs_tail = |s: f64, y: &[f64; 3]| {
            let q = hastings_mcleod_asymptotic(s);
            [-q * q, -y[0], -q]
        };
        let dp = DormandPrince { rtol: 1e-13, atol: 1e-14, ..DormandPrince::default() };
        let (st, _) = dp.solve_at(rhs_tail, s_sw, [last[2], last[3], last[4]], &lower)?;
        lower_states = st;
    }
    let n = s_grid.len();
    let mut sol = PainleveSolution { s: s_grid, q: vec![0.0; n], u: vec![0.0; n], w: vec![0.0; n], v: vec![0.0; n] };
    for (i, y) in states.iter().enumerate() {
        let k = n - 1 - i;
        sol.q[k] = y[0];
        sol.u[k] = y[2];
        sol.w[k] = y[3];
        sol.v[k] = y[4];
    }
    for (i, y) in lower_states.iter().enumerate() {
        let k = n - 1 - upper.len() - i;
        sol.q[k] = hastings_mcleod_asymptotic(sol.s[k]);
        sol.u[k] = y[0];
        sol.w[k] = y[1];
        sol.v[k] = y[2];
    }
    Ok(sol)
}

/// `det(I − K_s)` by `nodes`-point Nyström on `(0, L)`, with `L` chosen so the
/// kernel is below double precision beyond it.
pub fn fredholm_f1(s: f64, rule: &GaussLegendre<f64>) -> Result<f64> {
    let len = (14.0 - s).max(8.0) * 2.0;
    let (x, w) = rule.mapped(0.0, len);
    let n = x.len();
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let k = 0.5 * airy_ai(s + 0.5 * (x[i] + x[j])).0;
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - sw[i] * k * sw[j]
    });
    let det = m.lu().determinant();
    if !det.is_finite() {
        return Err(Error::NonFinite(format!("Fredholm determinant at s = {s}")));
    }
    Ok(det.clamp(0.0, 1.0))
}

impl TWReference {
    pub fn build(method: TwMethod) -> Result<Self> {
        match method {
            TwMethod::Painleve => {
                let sol = solve_painleve(1.0)?;
                let cdf: Vec<f64> = sol.w.iter().zip(&sol.v).map(|(w, v)| (-(w + v) / 2.0).exp()).collect();
                let pdf = cdf.iter().zip(sol.q.iter().zip(&sol.u)).map(|(f, (q, u))| f * (q + u) / 2.0).collect();
                Ok(Self { beta: 1, method, s: sol.s, cdf, pdf, est_error: f64::NAN })
            }
            TwMethod::Fredholm => {
                let rule = GaussLegendre::new(NYSTROM_NODES);
                let s = grid();
                let cdf = s.iter().map(|&x| fredholm_f1(x, &rule)).collect::<Result<Vec<_>>>()?;
                let pdf = finite_difference(&cdf, GRID_STEP);
                Ok(Self { beta: 1, method, s, cdf, pdf, est_error: f64::NAN })
            }
        }
    }

    /// Painlevé table with `est_error` set to the sup distance to the Fredholm table.
    pub fn cross_checked() -> Result<Self> {
        let mut p = Self::build(TwMethod::Painleve)?;
        let f = Self::build(TwMethod::Fredholm)?;
        p.est_error = p.max_difference(&f);
        Ok(p)
    }

    pub fn max_difference(&self, other: &Self) -> f64 {
        self.cdf.iter().zip(&other.cdf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `F₁(s)`, cubic Hermite between grid points, exact 0/1 outside the grid.
    pub fn cdf_at(&self, s: f64) -> f64 {
        if s <= S_MIN {
            return 0.0;
        }
        if s >= S_MAX {
            return 1.0;
        }
        let pos = (s - S_MIN) / GRID_STEP;
        let i = (pos.floor() as usize).min(self.s.len() - 2);
        let t = pos - i as f64;
        let h = GRID_STEP;
        let (y0, y1) = (self.cdf[i], self.cdf[i + 1]);
        let (d0, d1) = (self.pdf[i] * h, self.pdf[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1;
        v.clamp(0.0, 1.0)
    }

    /// Mean and variance from the tabulated CDF (Simpson's rule).
    pub fn mean_variance(&self) -> (f64, f64) {
        let zero = self.s.iter().position(|&x| x.abs() < 1e-9).expect("grid contains 0");
        let neg: Vec<f64> = (0..=zero).map(|i| self.cdf[i]).collect();
        let neg_s: Vec<f64> = (0..=zero).map(|i| self.s[i] * self.cdf[i]).collect();
        let pos: Vec<f64> = (zero..self.s.len()).map(|i| 1.0 - self.cdf[i]).collect();
        let pos_s: Vec<f64> = (zero..self.s.len()).map(|i| self.s[i] * (1.0 - self.cdf[i])).collect();
        let mean = simpson(&pos, GRID_STEP) - simpson(&neg, GRID_STEP);
        let second = 2.0 * simpson(&pos_s, GRID_STEP) - 2.0 * simpson(&neg_s, GRID_STEP);
        (mean, second - mean * mean)
    }
}

fn finite_difference(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (y[1] - y[0]) / h
            } else if i == n - 1 {
                (y[n - 1] - y[n - 2]) / h
            } else {
                (y[i + 1] - y[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Composite Simpson on an equally spaced grid; a trailing odd panel uses the
/// trapezoid rule.
fn simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    if n < 2 {
        return 0.0;
    }
    let panels = n - 1;
    let even = panels - panels % 2;
    let mut acc = 0.0;
    for i in (0..even).step_by(2) {
        acc += h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
    }
    if even < panels {
        acc += h / 2.0 * (y[n - 2] + y[n - 1]);
    }
    acc
}

static REFERENCE: OnceLock<TWReference> = OnceLock::new();

/// Shared Painlevé table, built on first use.
pub fn reference() -> &'static TWReference {
    REFERENCE.get_or_init(|| TWReference::build(TwMethod::Painleve).expect("Tracy–Widom reference builds"))
}

/// `F₁(s)`, clamped to exact 0 and 1 outside `[S_MIN, S_MAX]`.
pub fn tw1_cdf(s: f64) -> f64 {
    reference().cdf_at(s)
}

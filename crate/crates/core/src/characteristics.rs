//! Characteristics `dz/dt = g(z)` of the advection equation near the soft edge,
//! the curve `S`, and numeric checks of the geometric estimates along them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::DormandPrince;
use crate::quadrature::GaussKronrod;
use crate::spectral_laws::SpectralLaw;

/// `φ(N) = e^{C₀ (ln ln N)²}` with `C₀` fixed by `φ(100) = 8`.
pub fn phi(n: f64) -> f64 {
    let c0 = 8f64.ln() / 100f64.ln().ln().powi(2);
    (c0 * n.ln().ln().powi(2)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    /// `g(z) = ((1−ξ) + √((z²−λ₋)(z²−λ₊)))/(2ξz)`.
    General,
    /// `g_sc(z) = √((z−1)² − ξ)/ξ`.
    SemicircleComparison,
}

impl FieldKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "general" => Ok(Self::General),
            "sc" | "semicircle" => Ok(Self::SemicircleComparison),
            _ => Err(Error::Parameter { name: "field", reason: format!("unknown field `{name}` (general, sc)") }),
        }
    }
}

fn csqrt(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re < 0.0 { Complex64::new(0.0, (-z.re).sqrt()) } else { z.sqrt() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub xi: f64,
    pub law: SpectralLaw<f64>,
    pub kind: FieldKind,
}

impl VelocityField {
    pub fn new(law: SpectralLaw<f64>, kind: FieldKind) -> Self {
        Self { xi: law.xi, law, kind }
    }

    /// `√((z²−λ₋)(z²−λ₊))` as a product of four roots anchored at `±√λ₋`, `±√λ₊`,
    /// so the cuts are exactly the two support segments.
    pub fn edge_root(&self, z: Complex64) -> Complex64 {
        let (lo, hi) = self.law.sqrt_edges;
        csqrt(z - lo) * csqrt(z + lo) * csqrt(z - hi) * csqrt(z + hi)
    }

    pub fn velocity(&self, z: Complex64) -> Result<Complex64> {
        let xi = self.xi;
        match self.kind {
            FieldKind::General => {
                let (lo, hi) = self.law.sqrt_edges;
                if z.im == 0.0 && ((z.re.abs() >= lo && z.re.abs() <= hi) || z.re == 0.0) {
                    return Err(Error::OnSupport { re: z.re, im: z.im });
                }
                Ok(((1.0 - xi) + self.edge_root(z)) / (2.0 * xi * z))
            }
            FieldKind::SemicircleComparison => {
                let w = z - 1.0;
                let r = xi.sqrt();
                if z.im == 0.0 && w.re.abs() <= r {
                    return Err(Error::OnSupport { re: z.re, im: z.im });
                }
                Ok(csqrt(w - r) * csqrt(w + r) / xi)
            }
        }
    }

    /// Closed-form flow of the comparison field: with `w = z − 1` and
    /// `u = w + √(w² − ξ)`, `u_t = u₀ e^{t/ξ}` and `w = (u + ξ/u)/2`.
    pub fn semicircle_closed_form(xi: f64, z0: Complex64, t: f64) -> Complex64 {
        let w0 = z0 - 1.0;
        let r = xi.sqrt();
        let u0 = w0 + csqrt(w0 - r) * csqrt(w0 + r);
        let u = u0 * (t / xi).exp();
        1.0 + 0.5 * (u + xi / u)
    }
}

/// Integrated characteristic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharPath {
    pub z0: Complex64,
    pub times: Vec<f64>,
    pub points: Vec<Complex64>,
    pub tol: f64,
}

impl CharPath {
    pub fn last(&self) -> Complex64 {
        *self.points.last().expect("nonempty path")
    }
}

pub const FLOW_RTOL: f64 = 1e-12;

/// Integrates `dz/dt = g(z)` from `z0`, returning the path at `times` (sorted,
/// nonnegative; `0` may be included).
pub fn flow(field: &VelocityField, z0: Complex64, times: &[f64]) -> Result<CharPath> {
    flow_with_tol(field, z0, times, FLOW_RTOL)
}

pub fn flow_with_tol(field: &VelocityField, z0: Complex64, times: &[f64], rtol: f64) -> Result<CharPath> {
    if !(z0.im > 0.0) {
        return Err(Error::Parameter { name: "z0", reason: "must lie in the upper half plane".into() });
    }
    if times.iter().any(|&t| t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Parameter { name: "times", reason: "must be sorted and nonnegative".into() });
    }
    let dp = DormandPrince { rtol, atol: rtol * 1e-2, h_init: 1e-4, ..DormandPrince::default() };
    let rhs = |_t: f64, y: &[f64; 2]| {
        let z = Complex64::new(y[0], y[1]);
        if !(y[1] > 0.0) {
            return [f64::NAN, f64::NAN];
        }
        match field.velocity(z) {
            Ok(v) => [v.re, v.im],
            Err(_) => [f64::NAN, f64::NAN],
        }
    };
    let (states, _) = dp.solve_at(rhs, 0.0, [z0.re, z0.im], times).map_err(|e| {
        Error::Ode(format!("characteristic from {z0} left the upper half plane or failed: {e}"))
    })?;
    let points: Vec<Complex64> = states.iter().map(|y| Complex64::new(y[0], y[1])).collect();
    if let Some(p) = points.iter().find(|p| !(p.im > 0.0)) {
        return Err(Error::Ode(format!("characteristic from {z0} reached the real axis at {p}")));
    }
    Ok(CharPath { z0, times: times.to_vec(), points, tol: rtol })
}

/// `S = {E + iφ²/(N κ(E)^{1/2})}` for `E` strictly inside the soft-edge window.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCurveS {
    pub n: f64,
    pub phi: f64,
    pub law: SpectralLaw<f64>,
}

impl EdgeCurveS {
    pub fn new(law: SpectralLaw<f64>, n: f64, phi: f64) -> Self {
        Self { n, phi, law }
    }

    /// Open range of `E`.
    pub fn range(&self) -> (f64, f64) {
        let (lo, hi) = self.law.sqrt_edges;
        let margin = self.phi * self.phi * self.n.powf(-2.0 / 3.0);
        if self.law.is_square() { (0.0, hi - margin) } else { (lo + margin, hi - margin) }
    }

    /// `κ(E)` for real `E`.
    pub fn kappa(&self, e: f64) -> f64 {
        let (lo, hi) = self.law.sqrt_edges;
        if self.law.is_square() { (hi - e).abs() } else { (e - lo).abs().min((hi - e).abs()) }
    }

    pub fn point(&self, e: f64) -> Result<Complex64> {
        let (a, b) = self.range();
        if !(e > a && e < b) {
            return Err(Error::Parameter { name: "E", reason: format!("{e} outside ({a}, {b})") });
        }
        Ok(Complex64::new(e, self.phi * self.phi / (self.n * self.kappa(e).sqrt())))
    }

    /// Point below the upper edge with `κ(E) = kappa`.
    pub fn point_at_kappa(&self, kappa: f64) -> Result<Complex64> {
        self.point(self.law.sqrt_edges.1 - kappa)
    }

    /// `count` points evenly spaced in `E`.
    pub fn sample(&self, count: usize) -> Vec<Complex64> {
        let (a, b) = self.range();
        (1..=count).map(|i| {
            let e = a + (b - a) * i as f64 / (count + 1) as f64;
            Complex64::new(e, self.phi * self.phi / (self.n * self.kappa(e).sqrt()))
        }).collect()
    }
}

/// Band for two-sided `∼` comparisons.
pub const RATIO_BAND: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Regime {
    /// `|z − √λ₊| < √ξ/10`: `Re ∼ t a/κ^{1/2} + t²`, `Im ∼ t b/κ^{1/2}`.
    Edge,
    /// Bulk rectangle: `Im ∼ t`.
    Bulk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub z0: Complex64,
    pub t: f64,
    pub regime: Regime,
    pub re_measured: f64,
    /// `NaN` in the bulk regime, which only constrains the imaginary part.
    pub re_model: f64,
    pub im_measured: f64,
    pub im_model: f64,
    pub re_ratio: f64,
    pub im_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub xi: f64,
    pub band: f64,
    pub rows: Vec<AsymptoticRow>,
    pub passed: bool,
}

fn in_band(r: f64, band: f64) -> bool {
    r.is_finite() && r >= 1.0 / band && r <= band
}

/// Measures `z_t − z_0` and compares with the model increments. Points within
/// `√ξ/10` of `√λ₊` use the edge model, all others the bulk model.
pub fn verify_characteristics_asymptotics(field: &VelocityField, z0s: &[Complex64], times: &[f64]) -> Result<AsymptoticReport> {
    let law = &field.law;
    let hi = law.sqrt_edges.1;
    let mut rows = Vec::new();
    for &z0 in z0s {
        let path = flow(field, z0, times)?;
        let d = law.edge_distances(z0);
        let regime = if (z0 - hi).norm() < field.xi.sqrt() / 10.0 { Regime::Edge } else { Regime::Bulk };
        for (&t, &zt) in times.iter().zip(&path.points) {
            let inc = zt - z0;
            let (re_model, im_model) = match regime {
                Regime::Edge => (t * d.a / d.kappa.sqrt() + t * t, t * d.b / d.kappa.sqrt()),
                Regime::Bulk => (f64::NAN, t),
            };
            let re_ratio = inc.re / re_model;
            let im_ratio = inc.im / im_model;
            let pass = in_band(im_ratio, RATIO_BAND) && (regime == Regime::Bulk || in_band(re_ratio, RATIO_BAND));
            rows.push(AsymptoticRow { z0, t, regime, re_measured: inc.re, re_model, im_measured: inc.im, im_model, re_ratio, im_ratio, pass });
        }
    }
    let passed = rows.iter().all(|r| r.pass);
    Ok(AsymptoticReport { xi: field.xi, band: RATIO_BAND, rows, passed })
}

/// `κ(x)` for real `x` on the symmetrized support.
fn kappa_real(law: &SpectralLaw<f64>, x: f64) -> f64 {
    let (lo, hi) = law.sqrt_edges;
    let y = x.abs();
    if law.is_square() { (hi - y).abs() } else { (y - lo).abs().min((hi - y).abs()) }
}

/// Outcome of the integral estimate at one `(z, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

pub const INTEGRAL_RATIO_LIMIT: f64 = 64.0;

/// `(φ⁴/N²) ∫₀ᵗ ds ∫ ρ(x) dx / (|z_{t−s} − x|⁴ max(κ(x), s²))` against
/// `κ(E)/max(κ(E), t²)`, with `ρ` the symmetrized density and `z_u` the general
/// characteristic from `z ∈ S`.
pub fn integral_bound_check(field: &VelocityField, curve: &EdgeCurveS, z: Complex64, t: f64) -> Result<IntegralBound> {
    let law = &field.law;
    let (lo, hi) = law.sqrt_edges;
    let kappa_e = curve.kappa(z.re);
    let prefactor = curve.phi.powi(4) / (curve.n * curve.n);
    let inner_gk = GaussKronrod { abs_tol: 0.0, rel_tol: 1e-8, max_intervals: 2000 };
    let outer_gk = GaussKronrod { abs_tol: 0.0, rel_tol: 1e-6, max_intervals: 400 };
    let mut failure: Option<Error> = None;
    let mut outer = |s: f64| -> f64 {
        let u = t - s;
        let zu = if u > 0.0 {
            match flow(field, z, &[u]) {
                Ok(p) => p.last(),
                Err(e) => {
                    failure.get_or_insert(e);
                    return f64::NAN;
                }
            }
        } else {
            z
        };
        let s2 = s * s;
        let mut integrand = |x: f64| {
            let rho = law.sv_density(x);
            if rho == 0.0 {
                return 0.0;
            }
            let d2 = (zu - x).norm_sqr();
            rho / (d2 * d2 * kappa_real(law, x).max(s2))
        };
        let mut breaks = vec![-hi, -lo, lo, hi];
        for c in [zu.re, -zu.re] {
            if c.abs() > lo && c.abs() < hi {
                breaks.push(c);
            }
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        breaks.dedup();
        let mut total = 0.0;
        // Skip the gap (−√λ₋, √λ₋) where the density vanishes.
        for w in breaks.windows(2) {
            if w[0] >= -lo && w[1] <= lo {
                continue;
            }
            match inner_gk.integrate(w[0], w[1], &mut integrand) {
                Ok(r) => total += r.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    return f64::NAN;
                }
            }
        }
        total
    };
    let value = outer_gk.integrate(0.0, t, &mut outer);
    if let Some(e) = failure {
        return Err(e);
    }
    let lhs = prefactor * value?.value;
    let rhs = kappa_e / kappa_e.max(t * t);
    Ok(IntegralBound { lhs, rhs, ratio: lhs / rhs })
}

/// `|z_t − z₀|` for the general field over that of the comparison field.
pub fn increment_ratios(law: &SpectralLaw<f64>, z0: Complex64, times: &[f64]) -> Result<Vec<f64>> {
    let g = flow(&VelocityField::new(law.clone(), FieldKind::General), z0, times)?;
    let sc = flow(&VelocityField::new(law.clone(), FieldKind::SemicircleComparison), z0, times)?;
    Ok(g.points.iter().zip(&sc.points).map(|(a, b)| (a - z0).norm() / (b - z0).norm()).collect())
}

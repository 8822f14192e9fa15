//! Edge statistics: rescaled extremes, Kolmogorov distances to TW₁, rigidity
//! and log-log rate fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characteristics::phi;
use crate::deformed_mp::{DeformedLaw, Normalization, Population};
use crate::ensembles::{
    EntryDistribution, EntryKind, covariance_largest, gaussian_null_largest_sv, gaussian_null_spectrum, sample_replica,
    separable_largest,
};
use crate::error::{Error, Result};
use crate::spectral_laws::{AspectRatio, SpectralLaw};
use crate::stats::{DKW_ALPHA, KolmogorovDistance, kolmogorov_distance};
use crate::tracy_widom::tw1_cdf;

/// `σ_ξ = √ξ (1+√ξ)^{4/3}`; `σ₁ = 2^{4/3}`.
pub fn sigma_xi(xi: f64) -> f64 {
    let r = xi.sqrt();
    r * (1.0 + r).powf(4.0 / 3.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSampleSet {
    pub xi: f64,
    pub n: usize,
    pub dist: String,
    /// Population entries for the separable model, empty for the null model.
    pub population: Vec<f64>,
    pub samples: Vec<f64>,
    pub rescale_constant: f64,
}

impl EdgeSampleSet {
    pub fn distance_to_tw(&self) -> Result<KolmogorovDistance> {
        kolmogorov_distance(&self.samples, tw1_cdf, DKW_ALPHA)
    }
}

/// `(λ_N − λ₊) N^{2/3} / σ_ξ` for each raw largest eigenvalue.
pub fn rescale_extremes(raw: &[f64], law: &SpectralLaw<f64>, n: usize) -> EdgeSampleSet {
    let sigma = sigma_xi(law.xi);
    let scale = (n as f64).powf(2.0 / 3.0) / sigma;
    EdgeSampleSet {
        xi: law.xi,
        n,
        dist: String::new(),
        population: Vec::new(),
        samples: raw.iter().map(|l| (l - law.lambda_plus) * scale).collect(),
        rescale_constant: sigma,
    }
}

/// Largest eigenvalue of `XᵀX` for one replica. Gaussian data uses the
/// bidiagonal model, everything else a dense reduction.
pub fn null_largest(m: usize, n: usize, dist: EntryDistribution, seed: u64, replica: u64) -> Result<f64> {
    match dist.kind {
        EntryKind::Gaussian => Ok(gaussian_null_largest_sv(m, n, seed, replica)?.powi(2)),
        _ => covariance_largest(&sample_replica(m, n, dist, seed, replica)?.entries),
    }
}

/// Rescaled largest eigenvalues of `reps` null-model replicas with `N = n`, `M = m`.
pub fn null_edge_experiment(m: usize, n: usize, dist: EntryDistribution, reps: usize, seed: u64) -> Result<EdgeSampleSet> {
    let ratio = AspectRatio::from_dims(n, m)?;
    let law = SpectralLaw::new(ratio);
    let raw = (0..reps as u64).into_par_iter().map(|r| null_largest(m, n, dist, seed, r)).collect::<Result<Vec<_>>>()?;
    let mut set = rescale_extremes(&raw, &law, n);
    set.dist = dist.kind.name().to_string();
    Ok(set)
}

/// `M = N/ξ` rounded to the nearest integer.
pub fn m_for(n: usize, xi: f64) -> usize {
    (n as f64 / xi).round() as usize
}

/// Per-replica rigidity statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub n: usize,
    pub xi: f64,
    pub phi: f64,
    pub epsilon: f64,
    pub omega: f64,
    /// `max_k N^{2/3} k̂^{1/3} |s_k − γ_k|`; for `ξ = 1` only over `k ≥ (1−ω)N` with `k̂ = N−k+1`.
    pub soft: Vec<f64>,
    /// `ξ = 1` only: `max_{k ≤ (1−ω)N} N |s_k − γ_k|`.
    pub hard: Vec<f64>,
    /// `φ^{1/2}`.
    pub soft_threshold: f64,
    /// `N^ε`.
    pub hard_threshold: f64,
}

impl RigidityReport {
    pub fn soft_pass_rate(&self) -> f64 {
        pass_rate(&self.soft, self.soft_threshold)
    }

    pub fn hard_pass_rate(&self) -> f64 {
        pass_rate(&self.hard, self.hard_threshold)
    }

    /// Mean over replicas of `max_{k ≤ (1−ω)N} |s_k − γ_k|` (unscaled).
    pub fn mean_hard_deviation(&self) -> f64 {
        self.hard.iter().sum::<f64>() / self.hard.len() as f64 / self.n as f64
    }
}

fn pass_rate(v: &[f64], threshold: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().filter(|&&x| x <= threshold).count() as f64 / v.len() as f64
}

pub const DEFAULT_OMEGA: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Soft and hard statistics of one sorted singular-value vector against `γ`.
pub fn rigidity_statistics(svals: &[f64], gamma: &[f64], square: bool, omega: f64) -> Result<(f64, Option<f64>)> {
    let n = svals.len();
    if gamma.len() != n || n == 0 {
        return Err(Error::Dimensions(format!("{} singular values vs {} typical locations", n, gamma.len())));
    }
    let nf = n as f64;
    let n23 = nf.powf(2.0 / 3.0);
    let cut = ((1.0 - omega) * nf).floor() as usize;
    let mut soft: f64 = 0.0;
    let mut hard: f64 = 0.0;
    for k in 1..=n {
        let dev = (svals[k - 1] - gamma[k - 1]).abs();
        if square {
            if k >= cut.max(1) {
                soft = soft.max(n23 * ((n - k + 1) as f64).cbrt() * dev);
            }
            if k <= cut {
                hard = hard.max(nf * dev);
            }
        } else {
            let khat = k.min(n + 1 - k) as f64;
            soft = soft.max(n23 * khat.cbrt() * dev);
        }
    }
    Ok((soft, square.then_some(hard)))
}

/// Rigidity of `reps` Gaussian replicas at `N = n`, `ξ = n/m`.
pub fn rigidity_check(m: usize, n: usize, reps: usize, seed: u64, phi_value: f64, epsilon: f64, omega: f64) -> Result<RigidityReport> {
    let ratio = AspectRatio::from_dims(n, m)?;
    let law: SpectralLaw<f64> = SpectralLaw::new(ratio);
    let gamma = law.typical_locations(n)?.gamma;
    let square = law.is_square();
    let stats = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let s = gaussian_null_spectrum(m, n, seed, r)?;
            rigidity_statistics(s.singular_values.as_deref().expect("null model"), &gamma, square, omega)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RigidityReport {
        n,
        xi: law.xi,
        phi: phi_value,
        epsilon,
        omega,
        soft: stats.iter().map(|s| s.0).collect(),
        hard: stats.iter().filter_map(|s| s.1).collect(),
        soft_threshold: phi_value.sqrt(),
        hard_threshold: (n as f64).powf(epsilon),
    })
}

/// Rigidity at the default `φ(N)`, `ε` and `ω`.
pub fn rigidity_default(m: usize, n: usize, reps: usize, seed: u64) -> Result<RigidityReport> {
    rigidity_check(m, n, reps, seed, phi(n as f64), DEFAULT_EPSILON, DEFAULT_OMEGA)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub delta: f64,
    pub dkw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub points: Vec<RatePoint>,
    pub slope: f64,
    pub intercept: f64,
    /// `max_N δ̂ N^{exponent}`.
    pub bound_respect: f64,
    pub bound_exponent: f64,
}

impl RateFit {
    pub fn decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].delta < w[0].delta)
    }
}

/// Weighted least squares of `ln δ` on `ln N`. The weight of a point is
/// `(δ/h)²`, the inverse of the approximate variance of `ln δ` when `h` is its
/// DKW half-width.
pub fn rate_fit(points: &[RatePoint], bound_exponent: f64) -> Result<RateFit> {
    let mut ns: Vec<usize> = points.iter().map(|p| p.n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 4 {
        return Err(Error::Parameter { name: "ns", reason: format!("rate fit needs at least 4 distinct N values, got {}", ns.len()) });
    }
    if let Some(p) = points.iter().find(|p| !(p.delta > 0.0)) {
        return Err(Error::Parameter { name: "delta", reason: format!("δ̂ must be positive, got {} at N = {}", p.delta, p.n) });
    }
    let mut sorted = points.to_vec();
    sorted.sort_by_key(|p| p.n);
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in &sorted {
        let w = if p.dkw > 0.0 { (p.delta / p.dkw).powi(2) } else { 1.0 };
        let x = (p.n as f64).ln();
        let y = p.delta.ln();
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let slope = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
    let intercept = (sy - slope * sx) / sw;
    let bound_respect = sorted.iter().map(|p| p.delta * (p.n as f64).powf(bound_exponent)).fold(0.0, f64::max);
    Ok(RateFit { points: sorted, slope, intercept, bound_respect, bound_exponent })
}

/// δ̂ to TW₁ for the null model at each `N` in `ns`.
pub fn null_rate_points(xi: f64, ns: &[usize], dist: EntryDistribution, reps: usize, seed: u64) -> Result<Vec<RatePoint>> {
    ns.iter()
        .map(|&n| {
            let set = null_edge_experiment(m_for(n, xi), n, dist, reps, seed ^ n as u64)?;
            let k = set.distance_to_tw()?;
            Ok(RatePoint { n, delta: k.delta, dkw: k.dkw_halfwidth })
        })
        .collect()
}

/// Rescaled largest eigenvalues `γ₀ N^{2/3}(μ_N/ξ − E₊)` of `XᵀΣX` with
/// `Σ = diag(sigmas)`, `M = sigmas.len()`.
pub fn separable_edge_samples(sigmas: &[f64], n: usize, dist: EntryDistribution, reps: usize, seed: u64) -> Result<EdgeSampleSet> {
    let m = sigmas.len();
    let ratio = AspectRatio::from_dims(n, m)?;
    let law = DeformedLaw::new(Population::new(sigmas.to_vec())?, ratio.xi())?;
    let raw = (0..reps as u64)
        .into_par_iter()
        .map(|r| separable_largest(&sample_replica(m, n, dist, seed, r)?.entries, sigmas))
        .collect::<Result<Vec<_>>>()?;
    Ok(EdgeSampleSet {
        xi: ratio.xi(),
        n,
        dist: dist.kind.name().to_string(),
        population: sigmas.to_vec(),
        samples: raw.iter().map(|&mu| law.rescale(mu, n, Normalization::VariancePerM)).collect(),
        rescale_constant: law.gamma0,
    })
}

/// `M = N/ξ` entries split evenly between the atoms, in order.
pub fn atom_population(atoms: &[f64], m: usize) -> Vec<f64> {
    (0..m).map(|i| atoms[i * atoms.len() / m]).collect()
}

/// δ̂ at each `N` for the separable model with a discrete population.
pub fn separable_rate_points(atoms: &[f64], xi: f64, ns: &[usize], dist: EntryDistribution, reps: usize, seed: u64) -> Result<Vec<RatePoint>> {
    ns.iter()
        .map(|&n| {
            let sigmas = atom_population(atoms, m_for(n, xi));
            let set = separable_edge_samples(&sigmas, n, dist, reps, seed ^ n as u64)?;
            let k = set.distance_to_tw()?;
            Ok(RatePoint { n, delta: k.delta, dkw: k.dkw_halfwidth })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn square_scale() {
        assert_abs_diff_eq!(sigma_xi(1.0), 2f64.powf(4.0 / 3.0), epsilon = 1e-15);
        assert_abs_diff_eq!(sigma_xi(1.0), 2.519_842_099_789_746, epsilon = 1e-14);
    }

    #[test]
    fn shift_moves_mean() {
        let law = SpectralLaw::from_xi(1.0).unwrap();
        let raw = [3.9, 4.0, 4.1];
        let a = rescale_extremes(&raw, &law, 100);
        let shifted: Vec<f64> = raw.iter().map(|x| x + 0.01).collect();
        let b = rescale_extremes(&shifted, &law, 100);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let expect = 0.01 * 100f64.powf(2.0 / 3.0) / sigma_xi(1.0);
        assert_abs_diff_eq!(mean(&b.samples) - mean(&a.samples), expect, epsilon = 1e-12);
    }

    #[test]
    fn single_sample_distance() {
        let k = kolmogorov_distance(&[0.0], tw1_cdf, DKW_ALPHA).unwrap();
        let f = tw1_cdf(0.0);
        assert_abs_diff_eq!(k.delta, f.max(1.0 - f), epsilon = 1e-15);
    }

    #[test]
    fn exact_power_law() {
        let points: Vec<RatePoint> =
            [50, 100, 200, 400, 800].iter().map(|&n| RatePoint { n, delta: 3.0 * (n as f64).powf(-1.0 / 3.0), dkw: 0.01 }).collect();
        let fit = rate_fit(&points, 2.0 / 9.0).unwrap();
        assert_abs_diff_eq!(fit.slope, -1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 3f64.ln(), epsilon = 1e-12);
        assert!(fit.bound_respect.is_finite());
        assert!(fit.decreasing());
    }

    #[test]
    fn rate_fit_preconditions() {
        let p = |n| RatePoint { n, delta: 0.1, dkw: 0.01 };
        assert!(rate_fit(&[p(10), p(20)], 2.0 / 9.0).is_err());
        let mut v = vec![p(10), p(20), p(40), p(80)];
        v[2].delta = 0.0;
        assert!(rate_fit(&v, 2.0 / 9.0).is_err());
    }

    #[test]
    fn perfect_rigidity() {
        for xi in [0.25, 1.0] {
            let law: SpectralLaw<f64> = SpectralLaw::from_xi(xi).unwrap();
            let g = law.typical_locations(50).unwrap().gamma;
            let (soft, hard) = rigidity_statistics(&g, &g, law.is_square(), DEFAULT_OMEGA).unwrap();
            assert_eq!(soft, 0.0);
            assert!(hard.unwrap_or(0.0) == 0.0);
        }
        assert!(rigidity_statistics(&[1.0], &[1.0, 2.0], false, 0.1).is_err());
    }

    #[test]
    fn atoms_split_evenly() {
        assert_eq!(atom_population(&[1.0, 2.0], 4), vec![1.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn identity_population_reduces_to_null() {
        // Σ = Id: the separable rescaling coincides with the null one.
        let (n, m) = (40, 80);
        let sep = separable_edge_samples(&vec![1.0; m], n, EntryDistribution::gaussian(), 20, 5).unwrap();
        let law = SpectralLaw::new(AspectRatio::from_dims(n, m).unwrap());
        let raw: Vec<f64> = (0..20).map(|r| separable_largest(&sample_replica(m, n, EntryDistribution::gaussian(), 5, r).unwrap().entries, &vec![1.0; m]).unwrap()).collect();
        let null = rescale_extremes(&raw, &law, n);
        for (a, b) in sep.samples.iter().zip(&null.samples) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }
}

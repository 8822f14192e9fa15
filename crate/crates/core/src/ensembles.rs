//! Data matrices, covariance models and their spectra.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, tridiagonalize, SymTridiagonal};
use crate::rng::{auxiliary_rng, replica_rng};
use crate::stats::{two_sample_ks, TwoSampleKs};

/// Law of the standardized entries `q_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EntryKind {
    Gaussian,
    Rademacher,
    /// Uniform on `[−√3, √3]`.
    Uniform,
    /// Symmetric three-point law on `{−a, 0, a}` with fourth moment `mu4 ≥ 1`.
    TwoPointMatched { mu4: f64 },
}

impl EntryKind {
    pub fn parse(name: &str, mu4: Option<f64>) -> Result<Self> {
        match name {
            "gaussian" => Ok(Self::Gaussian),
            "rademacher" => Ok(Self::Rademacher),
            "uniform" => Ok(Self::Uniform),
            "two-point-matched" => Ok(Self::TwoPointMatched { mu4: mu4.unwrap_or(2.0) }),
            other => Err(Error::Parameter { name: "dist", reason: format!("unknown distribution `{other}`") }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Rademacher => "rademacher",
            Self::Uniform => "uniform",
            Self::TwoPointMatched { .. } => "two-point-matched",
        }
    }
}

/// First four raw moments of a standardized entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments(pub [f64; 4]);

/// Entry law with its moments and a sub-exponential constant `θ` such that
/// `P(|q| > u) ≤ θ⁻¹ exp(−u^θ)` for all `u ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryDistribution {
    pub kind: EntryKind,
    pub theta: f64,
    pub moments: Moments,
}

impl EntryDistribution {
    pub fn new(kind: EntryKind) -> Result<Self> {
        let mu4 = match kind {
            EntryKind::Gaussian => 3.0,
            EntryKind::Rademacher => 1.0,
            EntryKind::Uniform => 1.8,
            EntryKind::TwoPointMatched { mu4 } => {
                if !(mu4 >= 1.0 && mu4.is_finite()) {
                    return Err(Error::Parameter { name: "mu4", reason: format!("fourth moment must be ≥ 1, got {mu4}") });
                }
                mu4
            }
        };
        let mut d = Self { kind, theta: 1.0, moments: Moments([0.0, 1.0, 0.0, mu4]) };
        while !d.tail_bound_holds(d.theta) {
            d.theta *= 0.5;
        }
        Ok(d)
    }

    pub fn gaussian() -> Self {
        Self::new(EntryKind::Gaussian).expect("valid")
    }

    pub fn rademacher() -> Self {
        Self::new(EntryKind::Rademacher).expect("valid")
    }

    /// `P(|q| > u)`.
    pub fn tail(&self, u: f64) -> f64 {
        match self.kind {
            EntryKind::Gaussian => libm::erfc(u / std::f64::consts::SQRT_2),
            EntryKind::Rademacher => {
                if u < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            EntryKind::Uniform => (1.0 - u / 3f64.sqrt()).max(0.0),
            EntryKind::TwoPointMatched { mu4 } => {
                if u < mu4.sqrt() {
                    1.0 / mu4
                } else {
                    0.0
                }
            }
        }
    }

    /// Grid check of the tail bound on `[0, 60]`, including left limits at the
    /// jumps of bounded laws.
    pub fn tail_bound_holds(&self, theta: f64) -> bool {
        let bound = |u: f64| (-(u.powf(theta))).exp() / theta;
        let grid = (0..=60_000).map(|i| i as f64 * 1e-3);
        let jumps = [1.0, 3f64.sqrt(), self.moments.0[3].sqrt()].into_iter().map(|j| j * (1.0 - 1e-12));
        grid.chain(jumps).all(|u| self.tail(u) <= bound(u) * (1.0 + 1e-12))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            EntryKind::Gaussian => rng.sample(StandardNormal),
            EntryKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryKind::Uniform => (2.0 * rng.random::<f64>() - 1.0) * 3f64.sqrt(),
            EntryKind::TwoPointMatched { mu4 } => {
                let u: f64 = rng.random();
                let p = 1.0 / (2.0 * mu4);
                let a = mu4.sqrt();
                if u < p {
                    -a
                } else if u < 2.0 * p {
                    a
                } else {
                    0.0
                }
            }
        }
    }
}

/// Moments of `e^{-t/2} q + (1 − e^{-t})^{1/2} g` for independent standard
/// Gaussian `g`, given symmetric standardized `q`.
pub fn divisible_moments(m: &Moments, t: f64) -> Moments {
    let a2 = (-t).exp();
    let b2 = 1.0 - a2;
    let [m1, m2, m3, m4] = m.0;
    let a = a2.sqrt();
    Moments([
        a * m1,
        a2 * m2 + b2,
        a2 * a * m3 + 3.0 * a * b2 * m1,
        a2 * a2 * m4 + 6.0 * a2 * b2 * m2 + 3.0 * b2 * b2,
    ])
}

/// Highest order up to which the moments agree (to `1e-12`), and the absolute
/// gap in fourth moments.
pub fn moment_gap(a: &Moments, b: &Moments) -> (usize, f64) {
    let matched = a.0.iter().zip(&b.0).take_while(|(x, y)| (*x - *y).abs() <= 1e-12).count();
    (matched, (a.0[3] - b.0[3]).abs())
}

/// `M × N` data matrix with entries `q_ij/√M`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    pub m: usize,
    pub n: usize,
    pub entries: DMatrix<f64>,
    pub seed: u64,
    pub dist: EntryDistribution,
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if n == 0 || m < n {
        return Err(Error::Dimensions(format!("need M ≥ N ≥ 1, got M = {m}, N = {n}")));
    }
    Ok(())
}

/// Fills an `M × N` matrix from `rng`, column by column.
pub fn fill_matrix<R: Rng + ?Sized>(m: usize, n: usize, dist: &EntryDistribution, rng: &mut R) -> DMatrix<f64> {
    let scale = 1.0 / (m as f64).sqrt();
    DMatrix::from_fn(m, n, |_, _| dist.sample(rng) * scale)
}

pub fn sample_data(m: usize, n: usize, dist: EntryDistribution, seed: u64) -> Result<DataMatrix> {
    sample_replica(m, n, dist, seed, 0)
}

/// Replica `replica` of the experiment keyed by `seed`.
pub fn sample_replica(m: usize, n: usize, dist: EntryDistribution, seed: u64, replica: u64) -> Result<DataMatrix> {
    check_dims(m, n)?;
    let mut rng = replica_rng(seed, replica);
    Ok(DataMatrix { m, n, entries: fill_matrix(m, n, &dist, &mut rng), seed, dist })
}

/// Which covariance model a spectrum came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceModel {
    /// `H = XᵀX`.
    Null,
    /// `Q = XᵀΣX`.
    Separable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSample {
    pub model: CovarianceModel,
    /// Increasing.
    pub eigenvalues: Vec<f64>,
    /// Increasing; only for the null model.
    pub singular_values: Option<Vec<f64>>,
}

impl CovarianceSample {
    pub fn largest(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty")
    }
}

fn finite(x: &DMatrix<f64>) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("data matrix entries".into()));
    }
    Ok(())
}

/// Spectrum of `XᵀX` by dense tridiagonal reduction.
pub fn covariance(x: &DMatrix<f64>) -> Result<CovarianceSample> {
    finite(x)?;
    let h = x.transpose() * x;
    let eigenvalues = symmetric_eigenvalues(h)?;
    let singular_values = eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    Ok(CovarianceSample { model: CovarianceModel::Null, eigenvalues, singular_values: Some(singular_values) })
}

/// Spectrum of `XᵀΣX` for diagonal `Σ = diag(sigmas)`.
pub fn separable(x: &DMatrix<f64>, sigmas: &[f64]) -> Result<CovarianceSample> {
    finite(x)?;
    let y = scaled_rows(x, sigmas)?;
    let eigenvalues = symmetric_eigenvalues(y.transpose() * &y)?;
    Ok(CovarianceSample { model: CovarianceModel::Separable, eigenvalues, singular_values: None })
}

fn scaled_rows(x: &DMatrix<f64>, sigmas: &[f64]) -> Result<DMatrix<f64>> {
    if sigmas.len() != x.nrows() {
        return Err(Error::Dimensions(format!("population has {} entries, X has {} rows", sigmas.len(), x.nrows())));
    }
    if sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::Parameter { name: "population", reason: "entries must be positive".into() });
    }
    let mut y = x.clone();
    for (i, s) in sigmas.iter().enumerate() {
        let r = s.sqrt();
        y.row_mut(i).scale_mut(r);
    }
    Ok(y)
}

/// Largest eigenvalue of `XᵀΣX` (dense reduction, Sturm bisection for the top).
pub fn separable_largest(x: &DMatrix<f64>, sigmas: &[f64]) -> Result<f64> {
    finite(x)?;
    let y = scaled_rows(x, sigmas)?;
    Ok(tridiagonalize(y.transpose() * &y)?.largest_eigenvalue())
}

/// Largest eigenvalue of `XᵀX` (dense reduction, Sturm bisection for the top).
pub fn covariance_largest(x: &DMatrix<f64>) -> Result<f64> {
    finite(x)?;
    Ok(tridiagonalize(x.transpose() * x)?.largest_eigenvalue())
}

/// `[[0, Xᵀ], [X, 0]]` for square `X`.
pub fn symmetrized_block(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.ncols();
    if x.nrows() != n {
        return Err(Error::Dimensions(format!("symmetrized block needs a square matrix, got {}x{}", x.nrows(), n)));
    }
    let mut b = DMatrix::zeros(2 * n, 2 * n);
    b.view_mut((0, n), (n, n)).copy_from(&x.transpose());
    b.view_mut((n, 0), (n, n)).copy_from(x);
    Ok(b)
}

/// `e^{-t/2} X₀ + (1 − e^{-t})^{1/2} X_G` with fresh Gaussian `X_G` of variance `1/M`.
pub fn gaussian_divisible(x0: &DataMatrix, t: f64, seed: u64) -> Result<DataMatrix> {
    if !(t >= 0.0) {
        return Err(Error::Parameter { name: "t", reason: "must be nonnegative".into() });
    }
    if t == 0.0 {
        return Ok(x0.clone());
    }
    let mut rng = auxiliary_rng(seed, 0, 0x6469_7669);
    let g = fill_matrix(x0.m, x0.n, &EntryDistribution::gaussian(), &mut rng);
    let a = (-t / 2.0).exp();
    let b = (1.0 - (-t).exp()).sqrt();
    Ok(DataMatrix { entries: &x0.entries * a + g * b, seed, ..x0.clone() })
}

/// Bidiagonal model of a Gaussian `M × N` matrix with variance `1/M`: the
/// singular values of the upper bidiagonal with diagonal `χ_{M}, …, χ_{M−N+1}`
/// and superdiagonal `χ_{N−1}, …, χ_1`, scaled by `1/√M`, have the same joint
/// law as those of the dense matrix.
pub fn gaussian_bidiagonal<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dims(m, n)?;
    let scale = 1.0 / (m as f64).sqrt();
    let chi = |k: usize, rng: &mut R| -> f64 {
        ChiSquared::new(k as f64).expect("positive degrees of freedom").sample(rng).sqrt() * scale
    };
    let mut d = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n {
        d.push(chi(m - i, rng));
        if i + 1 < n {
            e.push(chi(n - 1 - i, rng));
        }
    }
    Ok((d, e))
}

/// Null-model spectrum of replica `replica` for Gaussian data via the bidiagonal model.
pub fn gaussian_null_spectrum(m: usize, n: usize, seed: u64, replica: u64) -> Result<CovarianceSample> {
    let mut rng = replica_rng(seed, replica);
    let (d, e) = gaussian_bidiagonal(m, n, &mut rng)?;
    let ev = SymTridiagonal::golub_kahan(&d, &e)?.eigenvalues()?;
    let singular_values: Vec<f64> = ev[n..].iter().map(|s| s.max(0.0)).collect();
    let eigenvalues = singular_values.iter().map(|s| s * s).collect();
    Ok(CovarianceSample { model: CovarianceModel::Null, eigenvalues, singular_values: Some(singular_values) })
}

/// Largest singular value of a Gaussian replica via the bidiagonal model.
pub fn gaussian_null_largest_sv(m: usize, n: usize, seed: u64, replica: u64) -> Result<f64> {
    let mut rng = replica_rng(seed, replica);
    let (d, e) = gaussian_bidiagonal(m, n, &mut rng)?;
    Ok(SymTridiagonal::golub_kahan(&d, &e)?.largest_eigenvalue())
}

/// Outcome of comparing `XᵀΣX` with `XᵀDX`, `D` the eigenvalues of `Σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationReport {
    pub replicas: usize,
    pub ks: TwoSampleKs,
    pub level: f64,
    pub passed: bool,
}

/// Largest-eigenvalue samples of `XᵀΣX` and `XᵀDX` for Gaussian `X` (`M × N`,
/// `M` = size of `Σ`), drawn from disjoint streams, compared by two-sample KS
/// at level `0.01`.
pub fn rotate_population_test(
    sigma_full: &DMatrix<f64>,
    n: usize,
    dist: EntryDistribution,
    replicas: usize,
    seed: u64,
) -> Result<RotationReport> {
    if dist.kind != EntryKind::Gaussian {
        return Err(Error::Parameter { name: "dist", reason: "rotation invariance needs Gaussian data".into() });
    }
    let m = sigma_full.nrows();
    check_dims(m, n)?;
    if !sigma_full.is_square() || (sigma_full - sigma_full.transpose()).amax() > 1e-12 {
        return Err(Error::Parameter { name: "sigma", reason: "population matrix must be symmetric".into() });
    }
    let mut d: Vec<f64> = sigma_full.clone().symmetric_eigenvalues().iter().copied().collect();
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    if d[0] <= 0.0 {
        return Err(Error::Parameter { name: "sigma", reason: "population matrix must be positive definite".into() });
    }
    let mut full = Vec::with_capacity(replicas);
    let mut diag = Vec::with_capacity(replicas);
    for r in 0..replicas as u64 {
        let x = fill_matrix(m, n, &dist, &mut auxiliary_rng(seed, r, 1));
        let q = x.transpose() * sigma_full * &x;
        full.push(tridiagonalize(q)?.largest_eigenvalue());
        let x = fill_matrix(m, n, &dist, &mut auxiliary_rng(seed, r, 2));
        diag.push(separable_largest(&x, &d)?);
    }
    let ks = two_sample_ks(&full, &diag)?;
    Ok(RotationReport { replicas, ks, level: 0.01, passed: ks.p_value > 0.01 })
}

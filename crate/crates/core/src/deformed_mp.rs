//! Deformed Marchenko–Pastur law for a diagonal population `Σ`.
//!
//! All objects here follow the variance-`1/N` convention of the general
//! population literature: the self-consistent transform at `Σ = Id` is that of
//! `H/ξ` where `H = XᵀX` has entries of variance `1/M`. [`Normalization`]
//! converts locations between the two conventions.

use crate::error::{Error, Result};
use crate::quadrature::bisect;
use crate::scalar::{cplx, Cplx, Real};

/// Entry-variance convention of the data matrix a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Normalization {
    /// Entries of variance `1/M` (the convention used for sampling).
    VariancePerM,
    /// Entries of variance `1/N` (the convention of the self-consistent equation).
    VariancePerN,
}

impl Normalization {
    /// Factor mapping a spectral location in the native `1/N` convention to this one.
    pub fn scale<T: Real>(self, xi: T) -> T {
        match self {
            Normalization::VariancePerM => xi,
            Normalization::VariancePerN => T::one(),
        }
    }
}

/// Which form of the edge scaling constant to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum Gamma0Form {
    /// `∫(t/(1−tξ₊))³ dρ̂`, reproducing `γ₀ = √ξ(1+√ξ)^{-4/3}` at `Σ = Id`.
    #[default]
    Cubed,
    /// Integrand to the first power, kept for comparison only.
    FirstPower,
}

/// Population spectrum `σ_1 ≤ … ≤ σ_M` with its empirical measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Population<T> {
    sigmas: Vec<T>,
    /// Distinct values with their masses under `ρ̂`.
    atoms: Vec<(T, T)>,
}

impl<T: Real> Population<T> {
    pub fn new(mut sigmas: Vec<T>) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::Dimensions("population must be nonempty".into()));
        }
        if let Some(bad) = sigmas.iter().find(|s| !s.is_finite() || **s <= T::zero()) {
            return Err(Error::Parameter { name: "population", reason: format!("entries must be positive and finite, got {bad}") });
        }
        sigmas.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let w = T::one() / T::from_usize_lossy(sigmas.len());
        let mut atoms: Vec<(T, T)> = Vec::new();
        for &s in &sigmas {
            match atoms.last_mut() {
                Some((v, m)) if *v == s => *m = *m + w,
                _ => atoms.push((s, w)),
            }
        }
        Ok(Self { sigmas, atoms })
    }

    pub fn identity(m: usize) -> Self {
        Self::new(vec![T::one(); m.max(1)]).expect("identity population is admissible")
    }

    pub fn sigmas(&self) -> &[T] {
        &self.sigmas
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    pub fn max(&self) -> T {
        *self.sigmas.last().expect("nonempty")
    }

    /// `∫ f dρ̂`.
    pub fn integrate<F: Fn(T) -> T>(&self, f: F) -> T {
        self.atoms.iter().fold(T::zero(), |acc, &(s, w)| acc + w * f(s))
    }

    fn integrate_c<F: Fn(T) -> Cplx<T>>(&self, f: F) -> Cplx<T> {
        self.atoms.iter().fold(cplx(T::zero(), T::zero()), |acc, &(s, w)| acc + f(s) * w)
    }
}

/// Population interpolated harmonically toward the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationFlowState<T> {
    pub t: T,
    pub sigmas_t: Vec<T>,
}

/// `1/σ_j(t) = e^{-t}/σ_j(0) + (1 − e^{-t})`.
pub fn population_flow<T: Real>(pop: &Population<T>, t: T) -> Result<PopulationFlowState<T>> {
    if !(t >= T::zero()) {
        return Err(Error::Parameter { name: "t", reason: "flow time must be nonnegative".into() });
    }
    if t == T::zero() {
        return Ok(PopulationFlowState { t, sigmas_t: pop.sigmas.clone() });
    }
    let e = (-t).exp();
    let sigmas_t = pop.sigmas.iter().map(|&s| T::one() / (e / s + (T::one() - e))).collect();
    Ok(PopulationFlowState { t, sigmas_t })
}

/// Settings of the self-consistent solver.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<T> {
    pub tol: T,
    pub damping: T,
    pub max_iter: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self { tol: T::tol(1e-13), damping: T::lit(0.5), max_iter: 20_000 }
    }
}

/// Right-hand side of the fixed point equation and its derivative in `m`.
fn rhs<T: Real>(pop: &Population<T>, xi: T, z: Cplx<T>, m: Cplx<T>) -> (Cplx<T>, Cplx<T>) {
    let one = cplx(T::one(), T::zero());
    let s0 = pop.integrate_c(|t| cplx(t, T::zero()) / (m * t + one));
    let s1 = pop.integrate_c(|t| {
        let d = m * t + one;
        cplx(t * t, T::zero()) / (d * d)
    });
    let d = -z + s0 / xi;
    let dd = -s1 / xi;
    let r = d.inv();
    (r, -dd * r * r)
}

/// Solves `m = 1/(−z + ξ⁻¹∫ t dρ̂(t)/(t m + 1))` with `Im m ≥ 0` for `Im z > 0`.
///
/// The factor `t` in the numerator makes `E₊` and `ξ₊` below the critical value
/// and critical point of the inverse map `z(m)`. Without it the two disagree
/// for any non-identity population; at `Σ = Id` both forms coincide.
///
/// The starting value comes from continuation in `Im z` down from a height
/// where plain iteration contracts strongly. At each level a few damped
/// iterations are followed by Newton steps, which keep converging close to the
/// edge where the damped map stalls.
pub fn solve_mfc<T: Real>(pop: &Population<T>, xi: T, z: Cplx<T>, opts: &SolverOptions<T>) -> Result<Cplx<T>> {
    if !(z.im > T::zero()) {
        return Err(Error::Parameter { name: "z", reason: "imaginary part must be positive".into() });
    }
    if !(xi > T::zero() && xi <= T::one()) {
        return Err(Error::AspectRatio(xi.to_f64_lossy()));
    }
    let scale = (pop.max() / xi).max(T::one()) * T::lit(4.0);
    let mut eta = z.im.max(scale);
    let mut m = -cplx(z.re, eta).inv();
    let mut iterations = 0usize;
    loop {
        let zz = cplx(z.re, eta);
        m = solve_level(pop, xi, zz, m, opts, &mut iterations)?;
        if eta <= z.im {
            return Ok(m);
        }
        eta = (eta * T::lit(0.5)).max(z.im);
    }
}

fn solve_level<T: Real>(
    pop: &Population<T>,
    xi: T,
    z: Cplx<T>,
    mut m: Cplx<T>,
    opts: &SolverOptions<T>,
    iterations: &mut usize,
) -> Result<Cplx<T>> {
    let w = opts.damping;
    let mut residual = T::infinity();
    for _ in 0..20 {
        let (r, _) = rhs(pop, xi, z, m);
        residual = (r - m).norm();
        if residual < opts.tol {
            return Ok(m);
        }
        m = m * (T::one() - w) + r * w;
        *iterations += 1;
    }
    let mut local = 0usize;
    while local < opts.max_iter {
        let (r, dr) = rhs(pop, xi, z, m);
        residual = (r - m).norm();
        if residual < opts.tol && m.im >= T::zero() {
            return Ok(m);
        }
        let denom = cplx(T::one(), T::zero()) - dr;
        let newton = m - (m - r) / denom;
        let (rn, _) = rhs(pop, xi, z, newton);
        if newton.im >= T::zero() && newton.re.is_finite() && newton.im.is_finite() && (rn - newton).norm() < residual {
            m = newton;
        } else {
            m = m * (T::one() - w) + r * w;
        }
        local += 1;
        *iterations += 1;
    }
    Err(Error::NoConvergence { iterations: *iterations, residual: residual.to_f64_lossy() })
}

/// Solved edge data of the deformed law.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedLaw<T> {
    pub xi: T,
    pub population: Population<T>,
    pub xi_plus: T,
    /// Right edge `E₊` in the `1/N` convention.
    pub e_plus: T,
    pub gamma0: T,
    pub solver_tol: T,
    pub gamma0_form: Gamma0Form,
}

/// Largest root of `∫(tx/(1−tx))² dρ̂(t) = ξ` on `(0, 1/σ_M)`.
pub fn solve_xi_plus<T: Real>(pop: &Population<T>, xi: T) -> Result<T> {
    if !(xi > T::zero() && xi <= T::one()) {
        return Err(Error::AspectRatio(xi.to_f64_lossy()));
    }
    let upper = T::one() / pop.max();
    let f = |x: T| {
        pop.integrate(|t| {
            let u = t * x / (T::one() - t * x);
            u * u
        }) - xi
    };
    let points = 10_000;
    let step = upper / T::from_usize_lossy(points);
    let mut bracket = None;
    let mut prev_x = step * T::lit(1e-3);
    let mut prev_f = f(prev_x);
    for i in 1..points {
        let x = step * T::from_usize_lossy(i);
        let fx = f(x);
        if (prev_f < T::zero()) != (fx < T::zero()) {
            bracket = Some((prev_x, x));
        }
        prev_x = x;
        prev_f = fx;
    }
    let (lo, hi) = bracket.ok_or_else(|| {
        Error::NoRoot(format!("no sign change of the edge equation on (0, 1/σ_M) for ξ = {xi}"))
    })?;
    bisect(f, lo, hi, upper * T::tol(1e-15))
}

/// `E₊ = (1/ξ₊)(1 + ξ⁻¹∫ tξ₊/(1−tξ₊) dρ̂)`.
pub fn right_endpoint<T: Real>(pop: &Population<T>, xi: T, xi_plus: T) -> T {
    let i = pop.integrate(|t| t * xi_plus / (T::one() - t * xi_plus));
    (T::one() + i / xi) / xi_plus
}

/// `γ₀` from `1/γ₀³ = ξ⁻¹∫(t/(1−tξ₊))^p dρ̂ + 1/ξ₊³`.
pub fn scaling_gamma0<T: Real>(pop: &Population<T>, xi: T, xi_plus: T, form: Gamma0Form) -> T {
    let i = pop.integrate(|t| {
        let u = t / (T::one() - t * xi_plus);
        match form {
            Gamma0Form::Cubed => u * u * u,
            Gamma0Form::FirstPower => u,
        }
    });
    let inv = i / xi + T::one() / (xi_plus * xi_plus * xi_plus);
    inv.powf(-T::one() / T::lit(3.0))
}

impl<T: Real> DeformedLaw<T> {
    pub fn new(population: Population<T>, xi: T) -> Result<Self> {
        Self::with_form(population, xi, Gamma0Form::Cubed)
    }

    pub fn with_form(population: Population<T>, xi: T, form: Gamma0Form) -> Result<Self> {
        let xi_plus = solve_xi_plus(&population, xi)?;
        if xi_plus * population.max() >= T::one() {
            return Err(Error::Parameter { name: "population", reason: "σ_M·ξ₊ must stay below 1".into() });
        }
        let e_plus = right_endpoint(&population, xi, xi_plus);
        let gamma0 = scaling_gamma0(&population, xi, xi_plus, form);
        Ok(Self { xi, population, xi_plus, e_plus, gamma0, solver_tol: SolverOptions::<T>::default().tol, gamma0_form: form })
    }

    pub fn stieltjes(&self, z: Cplx<T>) -> Result<Cplx<T>> {
        let opts = SolverOptions { tol: self.solver_tol, ..SolverOptions::default() };
        solve_mfc(&self.population, self.xi, z, &opts)
    }

    /// `(1/π) Im m̂(e + iη)`, Richardson-extrapolated from `η = eta_limit` and
    /// `2·eta_limit`.
    pub fn density(&self, e: T, eta_limit: T) -> Result<T> {
        if !(eta_limit > T::zero()) {
            return Err(Error::Parameter { name: "eta_limit", reason: "must be positive".into() });
        }
        let r1 = self.stieltjes(cplx(e, eta_limit))?.im / T::PI();
        let r2 = self.stieltjes(cplx(e, eta_limit * T::lit(2.0)))?.im / T::PI();
        Ok((T::lit(2.0) * r1 - r2).max(T::zero()))
    }

    /// Right edge expressed in the given convention.
    pub fn edge(&self, norm: Normalization) -> T {
        self.e_plus * norm.scale(self.xi)
    }

    /// `γ₀ N^{2/3} (μ − E₊)` for a largest eigenvalue `mu` measured in `norm`.
    pub fn rescale(&self, mu: T, n: usize, norm: Normalization) -> T {
        let mu_native = mu / norm.scale(self.xi);
        self.gamma0 * T::from_usize_lossy(n).powf(T::lit(2.0 / 3.0)) * (mu_native - self.e_plus)
    }
}

/// Default `eta_limit` for density inversion.
pub const DEFAULT_ETA_LIMIT: f64 = 5e-6;

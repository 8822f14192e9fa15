//! Symmetrized singular-value Dyson Brownian motion, coupled runs, the linear
//! `v`-flow and the observable `f_t`.
//!
//! A configuration stores only `s_1 < … < s_N`; the mirrored half `s_{−k} = −s_k`
//! is implied, so the symmetry holds exactly. Full 2N-vectors are laid out in
//! index order `−N, …, −1, 1, …, N`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::replica_rng;

/// Position of index `k ∈ {−N..−1, 1..N}` in a full 2N-vector.
pub fn slot(k: isize, n: usize) -> usize {
    debug_assert!(k != 0 && k.unsigned_abs() <= n);
    if k < 0 {
        (n as isize + k) as usize
    } else {
        n + k as usize - 1
    }
}

/// Index `k` stored at position `p` of a full 2N-vector.
pub fn index_of(p: usize, n: usize) -> isize {
    if p < n {
        p as isize - n as isize
    } else {
        (p - n + 1) as isize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizedConfig {
    positive: Vec<f64>,
    pub time: f64,
}

impl SymmetrizedConfig {
    /// From `s_1, …, s_N`, which must be nonnegative and strictly increasing.
    pub fn new(positive: Vec<f64>, time: f64) -> Result<Self> {
        if positive.is_empty() {
            return Err(Error::Dimensions("empty configuration".into()));
        }
        if positive.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("particle position".into()));
        }
        if positive[0] < 0.0 {
            return Err(Error::Ordering(0));
        }
        if let Some(i) = positive.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Ordering(i + 1));
        }
        Ok(Self { positive, time })
    }

    /// From a full vector in index order; it must be exactly antisymmetric.
    pub fn from_full(full: &[f64], time: f64) -> Result<Self> {
        let n = full.len() / 2;
        if full.len() != 2 * n || n == 0 {
            return Err(Error::Dimensions(format!("need an even, nonzero length, got {}", full.len())));
        }
        for k in 1..=n {
            if full[slot(k as isize, n)] != -full[slot(-(k as isize), n)] {
                return Err(Error::Ordering(k));
            }
        }
        Self::new(full[n..].to_vec(), time)
    }

    pub fn n(&self) -> usize {
        self.positive.len()
    }

    pub fn positive(&self) -> &[f64] {
        &self.positive
    }

    pub fn get(&self, k: isize) -> f64 {
        let s = self.positive[k.unsigned_abs() - 1];
        if k < 0 { -s } else { s }
    }

    pub fn full(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.positive.iter().rev().map(|s| -s).collect();
        out.extend_from_slice(&self.positive);
        out
    }

    /// `s_N`.
    pub fn edge(&self) -> f64 {
        *self.positive.last().expect("nonempty")
    }
}

/// `x^{(ν)}(0) = ν a + (1−ν) b`.
pub fn interpolate_init(a: &SymmetrizedConfig, b: &SymmetrizedConfig, nu: f64) -> Result<SymmetrizedConfig> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::Parameter { name: "nu", reason: format!("must lie in [0, 1], got {nu}") });
    }
    if a.n() != b.n() {
        return Err(Error::Dimensions(format!("N = {} vs N = {}", a.n(), b.n())));
    }
    let positive = a.positive.iter().zip(&b.positive).map(|(x, y)| nu * x + (1.0 - nu) * y).collect();
    SymmetrizedConfig::new(positive, a.time)
}

/// Step control knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbmOptions {
    pub dt: f64,
    pub dt_min: f64,
    /// Collision guard is `guard_factor / N`.
    pub guard_factor: f64,
    /// `false` drops the Brownian term (deterministic test mode).
    pub noise: bool,
}

impl Default for DbmOptions {
    fn default() -> Self {
        Self { dt: 1e-4, dt_min: 1e-9, guard_factor: 1e-3, noise: true }
    }
}

impl DbmOptions {
    pub fn guard(&self, n: usize) -> f64 {
        self.guard_factor / n as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.dt_min > 0.0) || self.dt_min > self.dt {
            return Err(Error::Parameter { name: "dt", reason: format!("need 0 < dt_min ≤ dt, got dt = {}, dt_min = {}", self.dt, self.dt_min) });
        }
        Ok(())
    }
}

fn check_xi(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::AspectRatio(xi));
    }
    Ok(())
}

/// First interacting pair closer than `guard`, if any. Interaction runs over
/// `l ≠ ±k`; the pair `(k, −k)` only matters through the `1/s` term when `ξ < 1`.
fn find_collision(p: &[f64], xi: f64, guard: f64) -> Option<(isize, isize)> {
    if xi < 1.0 && 2.0 * p[0] < guard {
        return Some((-1, 1));
    }
    if p.len() >= 2 && p[0] + p[1] < guard {
        return Some((-1, 2));
    }
    p.windows(2).position(|w| w[1] - w[0] < guard).map(|i| (i as isize + 1, i as isize + 2))
}

/// Whether a step from `old` to `new` left an interacting gap under the guard
/// after shrinking it by more than half. Gaps under the guard are legitimate
/// (the realized Brownian path can bring particles that close) but must be
/// approached in resolved steps.
fn unresolved_approach(old: &[f64], new: &[f64], xi: f64, guard: f64) -> bool {
    let tight = |g_old: f64, g_new: f64| g_new < guard && g_new < 0.5 * g_old;
    if xi < 1.0 && tight(2.0 * old[0], 2.0 * new[0]) {
        return true;
    }
    if old.len() >= 2 && tight(old[0] + old[1], new[0] + new[1]) {
        return true;
    }
    old.windows(2).zip(new.windows(2)).any(|(a, b)| tight(a[1] - a[0], b[1] - b[0]))
}

/// Finest-level fallback: redoes the singular nearest-neighbour term of every
/// gap that closed below the guard drift-implicitly. With everything else
/// explicit, the gap `g = s_{k+1} − s_k` solves `g = y + h/(N g)`, whose
/// positive root keeps the pair ordered; the pair midpoint is left as is. The
/// `1/s` term of the smallest particle is treated the same way when `ξ < 1`.
fn implicit_pair_fix(old: &[f64], trial: &mut [f64], xi: f64, h: f64, guard: f64) {
    let nf = old.len() as f64;
    let c = 0.5 * (1.0 / xi - 1.0);
    if c != 0.0 && trial[0] < guard {
        let y = trial[0] - h * c / old[0];
        trial[0] = 0.5 * (y + (y * y + 4.0 * h * c).sqrt());
    }
    for k in 0..old.len() - 1 {
        let g_trial = trial[k + 1] - trial[k];
        if g_trial < guard {
            let g_old = old[k + 1] - old[k];
            let y = g_trial - h / (nf * g_old);
            let g = 0.5 * (y + (y * y + 4.0 * h / nf).sqrt());
            let mid = 0.5 * (trial[k + 1] + trial[k]);
            trial[k] = mid - 0.5 * g;
            trial[k + 1] = mid + 0.5 * g;
        }
    }
}

/// Drift at positive indices. `Σ_{l≠±k} 1/(s_k − s_l)` is summed as
/// `Σ_{l>0, l≠k} [1/(s_k − s_l) + 1/(s_k + s_l)]`.
fn drift_positive(p: &[f64], xi: f64, out: &mut [f64]) {
    let n = p.len();
    let inv2n = 0.5 / n as f64;
    let c = 0.5 * (1.0 / xi - 1.0);
    for k in 0..n {
        let s = p[k];
        let mut pair = 0.0;
        for (l, &q) in p.iter().enumerate() {
            if l != k {
                pair += 1.0 / (s - q) + 1.0 / (s + q);
            }
        }
        let hard = if c != 0.0 { c / s } else { 0.0 };
        out[k] = -s / (2.0 * xi) + hard + inv2n * pair;
    }
}

/// Deterministic drift of every particle, in full index order.
pub fn drift(config: &SymmetrizedConfig, xi: f64) -> Result<Vec<f64>> {
    check_xi(xi)?;
    let n = config.n();
    if let Some((k, l)) = find_collision(&config.positive, xi, DbmOptions::default().guard(n)) {
        return Err(Error::Collision(k, l));
    }
    let mut pos = vec![0.0; n];
    drift_positive(&config.positive, xi, &mut pos);
    let mut out: Vec<f64> = pos.iter().rev().map(|d| -d).collect();
    out.extend_from_slice(&pos);
    Ok(out)
}

/// Drift of the eigenvalue flow `λ = s²` with the same confinement,
/// `M/N + (1/N)Σ_{l≠k}(λ_k+λ_l)/(λ_k−λ_l) − λ_k/ξ`.
pub fn eigenvalue_drift(lambda: &[f64], xi: f64) -> Vec<f64> {
    let n = lambda.len() as f64;
    lambda
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let pair: f64 = lambda.iter().enumerate().filter(|&(l, _)| l != k).map(|(_, &b)| (a + b) / (a - b)).sum();
            1.0 / xi + pair / n - a / xi
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Positive-index configurations at every accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub configs: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn config(&self, i: usize) -> SymmetrizedConfig {
        SymmetrizedConfig { positive: self.configs[i].clone(), time: self.times[i] }
    }

    pub fn last(&self) -> SymmetrizedConfig {
        self.config(self.times.len() - 1)
    }
}

/// Steps every state in `states` with common Brownian increments. A rejected
/// step (ordering violation or unresolved approach in any state) is split in two by a
/// Brownian bridge, so the realized path is the same whatever the refinement.
/// `observe(t, states, is_checkpoint)` runs after every accepted step.
fn advance<R: Rng, F: FnMut(f64, &[Vec<f64>], bool)>(
    states: &mut [Vec<f64>],
    xi: f64,
    opts: &DbmOptions,
    t0: f64,
    checkpoints: &[f64],
    rng: &mut R,
    mut observe: F,
) -> Result<StepStats> {
    check_xi(xi)?;
    opts.validate()?;
    let n = states[0].len();
    if states.iter().any(|s| s.len() != n) {
        return Err(Error::Dimensions("coupled states must share N".into()));
    }
    let guard = opts.guard(n);
    for s in states.iter() {
        SymmetrizedConfig::new(s.clone(), t0)?;
        if xi < 1.0 && s[0] == 0.0 {
            return Err(Error::Collision(-1, 1));
        }
    }
    let sqrt_n = (n as f64).sqrt();
    let mut stats = StepStats::default();
    let mut t = t0;
    let mut drift_buf = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let draw = |h: f64, rng: &mut R| -> Vec<f64> {
        if opts.noise {
            (0..n).map(|_| h.sqrt() * rng.sample::<f64, _>(StandardNormal)).collect()
        } else {
            vec![0.0; n]
        }
    };
    for &target in checkpoints {
        if target < t - 1e-15 {
            return Err(Error::Parameter { name: "checkpoints", reason: "must be increasing and not before the start".into() });
        }
        while t < target - 1e-15 {
            let h0 = opts.dt.min(target - t);
            // Pending sub-intervals, front last.
            let mut pending = vec![(h0, draw(h0, rng))];
            while let Some((h, db)) = pending.pop() {
                let mut ok = true;
                let mut next: Vec<Vec<f64>> = Vec::with_capacity(states.len());
                for s in states.iter() {
                    drift_positive(s, xi, &mut drift_buf);
                    for k in 0..n {
                        trial[k] = s[k] + h * drift_buf[k] + db[k] / sqrt_n;
                    }
                    let refinable = h / 2.0 >= opts.dt_min;
                    if !refinable {
                        implicit_pair_fix(s, &mut trial, xi, h, guard);
                    }
                    if xi >= 1.0 {
                        // Square case: the smallest singular value reflects at 0.
                        trial[0] = trial[0].abs();
                    }
                    let ordered = trial.iter().all(|x| x.is_finite())
                        && (trial[0] > 0.0 || (xi >= 1.0 && trial[0] >= 0.0))
                        && trial.windows(2).all(|w| w[1] > w[0]);
                    if !ordered || (refinable && unresolved_approach(s, &trial, xi, guard)) {
                        ok = false;
                        break;
                    }
                    next.push(trial.clone());
                }
                if ok {
                    for (s, nx) in states.iter_mut().zip(next) {
                        *s = nx;
                    }
                    t += h;
                    stats.accepted += 1;
                    let at_checkpoint = pending.is_empty() && (t - target).abs() < 1e-12;
                    if at_checkpoint {
                        t = target;
                    }
                    observe(t, states, at_checkpoint);
                } else {
                    stats.rejected += 1;
                    let half = h / 2.0;
                    if half < opts.dt_min {
                        return Err(Error::StepUnderflow { t, dt_min: opts.dt_min });
                    }
                    let sd = (h / 4.0).sqrt();
                    let first: Vec<f64> = db
                        .iter()
                        .map(|d| {
                            let z: f64 = if opts.noise { rng.sample(StandardNormal) } else { 0.0 };
                            0.5 * d + sd * z
                        })
                        .collect();
                    let second: Vec<f64> = db.iter().zip(&first).map(|(d, a)| d - a).collect();
                    pending.push((half, second));
                    pending.push((half, first));
                }
            }
        }
    }
    Ok(stats)
}

/// Runs one trajectory to `t_end`.
pub fn evolve<R: Rng>(
    config: &SymmetrizedConfig,
    xi: f64,
    opts: &DbmOptions,
    t_end: f64,
    rng: &mut R,
) -> Result<(SymmetrizedConfig, StepStats)> {
    let mut states = vec![config.positive.clone()];
    let stats = advance(&mut states, xi, opts, config.time, &[t_end], rng, |_, _, _| {})?;
    let positive = states.pop().expect("one state");
    Ok((SymmetrizedConfig { positive, time: t_end }, stats))
}

/// Runs one trajectory to `t_end`, keeping every accepted step.
pub fn evolve_recorded<R: Rng>(
    config: &SymmetrizedConfig,
    xi: f64,
    opts: &DbmOptions,
    t_end: f64,
    rng: &mut R,
) -> Result<(Trajectory, StepStats)> {
    let mut traj = Trajectory { times: vec![config.time], configs: vec![config.positive.clone()] };
    let mut states = vec![config.positive.clone()];
    let stats = advance(&mut states, xi, opts, config.time, &[t_end], rng, |t, s, _| {
        traj.times.push(t);
        traj.configs.push(s[0].clone());
    })?;
    Ok((traj, stats))
}

/// Gaps between two coupled trajectories on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingRecord {
    pub times: Vec<f64>,
    /// `max_k |s_k − r_k|`.
    pub max_gap: Vec<f64>,
    /// `|s_N − r_N|`.
    pub edge_gap: Vec<f64>,
    pub final_a: SymmetrizedConfig,
    pub final_b: SymmetrizedConfig,
    pub stats: StepStats,
}

fn gaps(a: &[f64], b: &[f64]) -> (f64, f64) {
    let max = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    (max, (a[a.len() - 1] - b[b.len() - 1]).abs())
}

/// Advances `a` and `b` with identical per-index increments drawn from `seed`,
/// recording the gaps at `t = 0` and at each of `record_times`.
pub fn couple(
    a: &SymmetrizedConfig,
    b: &SymmetrizedConfig,
    xi: f64,
    opts: &DbmOptions,
    record_times: &[f64],
    seed: u64,
) -> Result<CouplingRecord> {
    if a.n() != b.n() {
        return Err(Error::Dimensions(format!("N = {} vs N = {}", a.n(), b.n())));
    }
    let (m0, e0) = gaps(&a.positive, &b.positive);
    let mut rec = CouplingRecord {
        times: vec![a.time],
        max_gap: vec![m0],
        edge_gap: vec![e0],
        final_a: a.clone(),
        final_b: b.clone(),
        stats: StepStats::default(),
    };
    let mut states = vec![a.positive.clone(), b.positive.clone()];
    let mut rng = replica_rng(seed, 0);
    let stats = advance(&mut states, xi, opts, a.time, record_times, &mut rng, |t, s, at_checkpoint| {
        if at_checkpoint {
            let (m, e) = gaps(&s[0], &s[1]);
            rec.times.push(t);
            rec.max_gap.push(m);
            rec.edge_gap.push(e);
        }
    })?;
    let t_end = record_times.last().copied().unwrap_or(a.time);
    rec.final_b = SymmetrizedConfig { positive: states.pop().expect("two states"), time: t_end };
    rec.final_a = SymmetrizedConfig { positive: states.pop().expect("two states"), time: t_end };
    rec.stats = stats;
    Ok(rec)
}

/// `v` at one time, full index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VProfile {
    pub v: Vec<f64>,
    pub time: f64,
}

impl VProfile {
    pub fn min(&self) -> f64 {
        self.v.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_k |v_k − v_{−k}|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.v.len() / 2;
        (1..=n as isize).map(|k| (self.v[slot(k, n)] - self.v[slot(-k, n)]).abs()).fold(0.0, f64::max)
    }
}

/// Right side of the `v` equation at fixed positions `x` (full order):
/// `½(1−1/ξ) v_k/x_k² + (1/2N) Σ_{l≠±k} (v_l − v_k)/(x_l − x_k)²`.
pub fn v_rate(x: &[f64], v: &[f64], xi: f64) -> Vec<f64> {
    let two_n = x.len();
    let n = two_n / 2;
    let c = 0.5 * (1.0 - 1.0 / xi);
    let inv2n = 0.5 / n as f64;
    (0..two_n)
        .map(|p| {
            let mirror = two_n - 1 - p;
            let local = if c != 0.0 { c * v[p] / (x[p] * x[p]) } else { 0.0 };
            let pair: f64 = (0..two_n)
                .filter(|&q| q != p && q != mirror)
                .map(|q| {
                    let d = x[q] - x[p];
                    (v[q] - v[p]) / (d * d)
                })
                .sum();
            local + inv2n * pair
        })
        .collect()
}

/// Integrates the `v` equation along `traj`, freezing the positions within each
/// recorded step. Each step is split into explicit substeps short enough that
/// the update is a sub-convex combination of the previous values, which keeps
/// `v` nonnegative and its maximum nonincreasing.
pub fn evolve_v(v0: &[f64], traj: &Trajectory, xi: f64) -> Result<Vec<VProfile>> {
    check_xi(xi)?;
    let n = traj.configs.first().map(Vec::len).ok_or_else(|| Error::Dimensions("empty trajectory".into()))?;
    if v0.len() != 2 * n {
        return Err(Error::Dimensions(format!("v has length {}, expected {}", v0.len(), 2 * n)));
    }
    if let Some(p) = v0.iter().position(|&x| !(x >= 0.0)) {
        return Err(Error::Negative { index: p, value: v0[p] });
    }
    let scale = v0.iter().copied().fold(0.0, f64::max);
    for k in 1..=n as isize {
        if (v0[slot(k, n)] - v0[slot(-k, n)]).abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Parameter { name: "v0", reason: format!("not symmetric at index {k}") });
        }
    }
    let c = 0.5 * (1.0 - 1.0 / xi);
    let inv2n = 0.5 / n as f64;
    let mut v = v0.to_vec();
    let mut out = vec![VProfile { v: v.clone(), time: traj.times[0] }];
    for i in 0..traj.times.len() - 1 {
        let h = traj.times[i + 1] - traj.times[i];
        let x = traj.config(i).full();
        let two_n = x.len();
        let total_rate = (0..two_n)
            .map(|p| {
                let mirror = two_n - 1 - p;
                let local = if c != 0.0 { -c / (x[p] * x[p]) } else { 0.0 };
                let pair: f64 = (0..two_n).filter(|&q| q != p && q != mirror).map(|q| 1.0 / (x[q] - x[p]).powi(2)).sum();
                local + inv2n * pair
            })
            .fold(0.0, f64::max);
        let substeps = (h * total_rate).ceil().max(1.0) as usize;
        let hs = h / substeps as f64;
        for _ in 0..substeps {
            let rate = v_rate(&x, &v, xi);
            for (vk, r) in v.iter_mut().zip(rate) {
                *vk += hs * r;
            }
        }
        if let Some(p) = v.iter().position(|&x| x < -1e-6 * scale) {
            return Err(Error::Negative { index: p, value: v[p] });
        }
        out.push(VProfile { v: v.clone(), time: traj.times[i + 1] });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSample {
    pub z: Complex64,
    pub f: Complex64,
    /// `(1/2N) Σ 1/(x_k − z)`.
    pub s_of_z: Complex64,
    pub time: f64,
}

/// `f_t(z) = e^{−t/(2ξ)} Σ v_k/(x_k − z)` together with the empirical transform.
pub fn observable(config: &SymmetrizedConfig, v: &VProfile, z: Complex64, xi: f64) -> Result<ObservableSample> {
    if z.im == 0.0 {
        return Err(Error::Parameter { name: "z", reason: "must be off the real axis".into() });
    }
    let x = config.full();
    if x.len() != v.v.len() {
        return Err(Error::Dimensions("configuration and v profile differ in length".into()));
    }
    let weight = (-v.time / (2.0 * xi)).exp();
    let mut f = Complex64::new(0.0, 0.0);
    let mut s = Complex64::new(0.0, 0.0);
    for (&xk, &vk) in x.iter().zip(&v.v) {
        let r = 1.0 / (xk - z);
        f += vk * r;
        s += r;
    }
    Ok(ObservableSample { z, f: weight * f, s_of_z: s / x.len() as f64, time: v.time })
}

/// The deterministic part of `df_t` assembled two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftIdentity {
    /// `A₁ + A₂ + I₂ + I₃ + I₄ + I₅`, with `A₂` taken straight from the `v` equation.
    pub termwise: Complex64,
    /// `(s + z/2ξ)∂f + (1/4N)∂²f` plus the two explicit remainder sums.
    pub closed: Complex64,
    pub residual: f64,
    /// Sum of the moduli of all assembled terms.
    pub scale: f64,
}

impl DriftIdentity {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 { 0.0 } else { self.residual / self.scale }
    }
}

/// Checks the Itô drift algebra of `f_t` at time `t` for symmetric `(x, v)`.
pub fn drift_identity_check(config: &SymmetrizedConfig, v: &[f64], z: Complex64, xi: f64, t: f64) -> Result<DriftIdentity> {
    check_xi(xi)?;
    if z.im == 0.0 {
        return Err(Error::Parameter { name: "z", reason: "must be off the real axis".into() });
    }
    let x = config.full();
    let two_n = x.len();
    let n = two_n / 2;
    if v.len() != two_n {
        return Err(Error::Dimensions(format!("v has length {}, expected {two_n}", v.len())));
    }
    let nf = n as f64;
    let e = (-t / (2.0 * xi)).exp();
    let c = 1.0 - 1.0 / xi;
    let r: Vec<Complex64> = x.iter().map(|&xk| 1.0 / (xk - z)).collect();
    let mut scale = 0.0;
    let mut add = |acc: &mut Complex64, term: Complex64| {
        scale += term.norm();
        *acc += term;
    };

    // Termwise.
    let f: Complex64 = e * v.iter().zip(&r).map(|(vk, rk)| vk * rk).sum::<Complex64>();
    let dv = v_rate(&x, v, xi);
    let mut termwise = Complex64::new(0.0, 0.0);
    add(&mut termwise, -f / (2.0 * xi));
    add(&mut termwise, e * dv.iter().zip(&r).map(|(d, rk)| d * rk).sum::<Complex64>());
    let i2: Complex64 = e / (2.0 * xi) * (0..two_n).map(|k| v[k] * x[k] * r[k] * r[k]).sum::<Complex64>();
    add(&mut termwise, i2);
    let i3: Complex64 = 0.5 * c * e * (0..two_n).map(|k| v[k] / x[k] * r[k] * r[k]).sum::<Complex64>();
    add(&mut termwise, i3);
    let mut i4 = Complex64::new(0.0, 0.0);
    for k in 0..two_n {
        let mirror = two_n - 1 - k;
        let inner: f64 = (0..two_n).filter(|&l| l != k && l != mirror).map(|l| 1.0 / (x[k] - x[l])).sum();
        i4 += -v[k] * r[k] * r[k] * inner;
    }
    add(&mut termwise, e / (2.0 * nf) * i4);
    let i5: Complex64 = e / nf * (0..two_n).map(|k| v[k] * r[k] * r[k] * r[k]).sum::<Complex64>();
    add(&mut termwise, i5);

    // Closed form.
    let s: Complex64 = r.iter().sum::<Complex64>() / (2.0 * nf);
    let df: Complex64 = e * (0..two_n).map(|k| v[k] * r[k] * r[k]).sum::<Complex64>();
    let ddf: Complex64 = 2.0 * e * (0..two_n).map(|k| v[k] * r[k] * r[k] * r[k]).sum::<Complex64>();
    let mut closed = Complex64::new(0.0, 0.0);
    add(&mut closed, (s + z / (2.0 * xi)) * df);
    add(&mut closed, ddf / (4.0 * nf));
    let mirror_sum: Complex64 = (0..two_n).map(|k| v[k] * r[k] * r[k] / (x[k] + z)).sum();
    add(&mut closed, e / (2.0 * nf) * mirror_sum);
    if c != 0.0 {
        let mut hard = Complex64::new(0.0, 0.0);
        for k in 0..two_n {
            let x2 = x[k] * x[k];
            let p = x[k] + z;
            hard += 3.0 * z * v[k] / (2.0 * x2) * r[k] / p + z * z * z * v[k] / x2 * r[k] * r[k] / (p * p);
        }
        add(&mut closed, c * e * hard);
    }
    Ok(DriftIdentity { termwise, closed, residual: (termwise - closed).norm(), scale })
}

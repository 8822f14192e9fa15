use edgelab::dbm::{DbmOptions, SymmetrizedConfig, drift_identity_check, evolve, evolve_recorded, evolve_v, slot};
use edgelab::ensembles::gaussian_null_spectrum;
use edgelab::rng::replica_rng;
use edgelab::spectral_laws::{AspectRatio, SpectralLaw};
use edgelab::stats::{DKW_ALPHA, kolmogorov_distance};
use num_complex::Complex64;
use rand::Rng;

fn wishart_config(n: usize, m: usize, seed: u64, replica: u64) -> SymmetrizedConfig {
    let s = gaussian_null_spectrum(m, n, seed, replica).unwrap();
    SymmetrizedConfig::new(s.singular_values.unwrap(), 0.0).unwrap()
}

#[test]
fn wishart_spectrum_is_stationary() {
    let (n, m) = (100, 200);
    let law: SpectralLaw<f64> = SpectralLaw::new(AspectRatio::from_dims(n, m).unwrap());
    let start = wishart_config(n, m, 21, 0);
    let (end, stats) = evolve(&start, 0.5, &DbmOptions::default(), 0.5, &mut replica_rng(21, 1)).unwrap();
    assert!(stats.accepted >= 5000);
    let k = kolmogorov_distance(end.positive(), |x| law.mp_cdf(x * x).unwrap(), DKW_ALPHA).unwrap();
    assert!(k.delta <= 0.05, "Kolmogorov distance {}", k.delta);
}

#[test]
fn maximum_principle_on_random_runs() {
    let (n, xi) = (50, 0.5);
    let opts = DbmOptions { dt: 1e-4, ..DbmOptions::default() };
    for r in 0..100u64 {
        let start = wishart_config(n, 100, 22, r);
        let mut rng = replica_rng(23, r);
        let (traj, _) = evolve_recorded(&start, xi, &opts, 0.02, &mut rng).unwrap();
        let half: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mut v0: Vec<f64> = half.iter().rev().copied().collect();
        v0.extend_from_slice(&half);
        let max0 = v0.iter().copied().fold(0.0, f64::max);
        let profiles = evolve_v(&v0, &traj, xi).unwrap();
        let mut prev_max = max0;
        for p in &profiles {
            assert!(p.min() >= -1e-6 * max0);
            assert!(p.max() <= prev_max * (1.0 + 1e-6));
            assert!(p.asymmetry() <= 1e-12);
            prev_max = p.max();
        }
        assert!(profiles.last().unwrap().max() <= max0 * (1.0 + 1e-6));
    }
}

#[test]
fn drift_identity_on_random_instances() {
    let mut worst: f64 = 0.0;
    for r in 0..1000u64 {
        let mut rng = replica_rng(24, r);
        let n = rng.random_range(1..=30);
        let mut p: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..2.5)).collect();
        p.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Admissible: no interacting pair inside the collision guard.
        let guard = DbmOptions::default().guard(n);
        for i in 1..n {
            if p[i] - p[i - 1] < guard {
                p[i] = p[i - 1] + guard;
            }
        }
        let config = SymmetrizedConfig::new(p, 0.0).unwrap();
        let n = config.n();
        let mut v = vec![0.0; 2 * n];
        for k in 1..=n as isize {
            let x: f64 = rng.random();
            v[slot(k, n)] = x;
            v[slot(-k, n)] = x;
        }
        let xi = rng.random_range(0.1..=1.0);
        let z = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(0.01..2.0) * if r % 2 == 0 { 1.0 } else { -1.0 });
        let t = rng.random_range(0.0..1.0);
        let d = drift_identity_check(&config, &v, z, xi, t).unwrap();
        worst = worst.max(d.relative());
    }
    assert!(worst < 1e-11, "worst relative residual {worst:e}");
}

use edgelab::deformed_mp::{DeformedLaw, Population};
use edgelab::edge_stats::{null_edge_experiment, rescale_extremes};
use edgelab::ensembles::{EntryDistribution, covariance_largest, rotate_population_test, sample_replica, separable};
use edgelab::quadrature::bisect;
use edgelab::rng::replica_rng;
use edgelab::spectral_laws::{AspectRatio, SpectralLaw, empirical_stieltjes};
use edgelab::stats::{mean, two_sample_ks};
use edgelab::tracy_widom::reference;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

#[test]
fn sv_transform_matches_law_samples() {
    let law: SpectralLaw<f64> = SpectralLaw::from_xi(0.36).unwrap();
    let (lo, hi) = law.sqrt_edges;
    let mut rng = replica_rng(41, 0);
    let samples: Vec<f64> = (0..200_000)
        .map(|_| {
            // Positive half of the symmetric law.
            let u = 0.5 + 0.5 * rng.random::<f64>();
            bisect(|x| law.sv_cdf(x).unwrap() - u, lo, hi, 1e-10).unwrap()
        })
        .collect();
    let z = Complex64::new(1.0, 0.5);
    let m = law.sv_stieltjes(z).unwrap();
    let emp = empirical_stieltjes(&samples, z).unwrap();
    assert!((m - emp).norm() < 1e-2, "{m} vs {emp}");
}

#[test]
fn deformed_transform_matches_simulation() {
    let n = 400;
    let mut rng = replica_rng(42, 0);
    let sigmas: Vec<f64> = (0..n).map(|_| 1.0 + rng.random::<f64>()).collect();
    let law = DeformedLaw::new(Population::new(sigmas.clone()).unwrap(), 1.0).unwrap();
    let z = Complex64::new(law.e_plus / 2.0, 0.1);
    let predicted = law.stieltjes(z).unwrap();
    // A single replica scatters by about 0.017 at this height; average a few.
    let reps = 8;
    let emp: Complex64 = (0..reps)
        .map(|r| {
            let x = sample_replica(n, n, EntryDistribution::gaussian(), 43, r).unwrap();
            let q = separable(&x.entries, &sigmas).unwrap();
            q.eigenvalues.iter().map(|&l| 1.0 / (l - z)).sum::<Complex64>() / n as f64
        })
        .sum::<Complex64>()
        / reps as f64;
    assert!((predicted - emp).norm() < 2e-2, "{predicted} vs {emp}");
}

#[test]
fn rotated_population_has_the_same_edge() {
    let (c, s) = (0.6f64, 0.8f64);
    let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0]));
    let block = &rot * d * rot.transpose();
    // Rotate pairs of coordinates of diag(1, 2, 1, 2, …).
    let m = 50;
    let mut sigma = DMatrix::zeros(m, m);
    for b in 0..m / 2 {
        sigma.view_mut((2 * b, 2 * b), (2, 2)).copy_from(&block);
    }
    let report = rotate_population_test(&sigma, 50, EntryDistribution::gaussian(), 2000, 44).unwrap();
    assert!(report.ks.p_value > 0.01, "p = {}", report.ks.p_value);
}

#[test]
fn dense_and_bidiagonal_gaussian_extremes_agree() {
    let (n, m) = (60, 120);
    let bidiagonal = null_edge_experiment(m, n, EntryDistribution::gaussian(), 1500, 45).unwrap();
    let law = SpectralLaw::new(AspectRatio::from_dims(n, m).unwrap());
    let raw: Vec<f64> = (0..1500u64)
        .map(|r| covariance_largest(&sample_replica(m, n, EntryDistribution::gaussian(), 46, r).unwrap().entries).unwrap())
        .collect();
    let dense = rescale_extremes(&raw, &law, n);
    let ks = two_sample_ks(&bidiagonal.samples, &dense.samples).unwrap();
    assert!(ks.p_value > 0.001, "p = {}", ks.p_value);
}

#[test]
fn square_gaussian_edge_mean() {
    let s = null_edge_experiment(400, 400, EntryDistribution::gaussian(), 4000, 47).unwrap();
    let (tw_mean, _) = reference().mean_variance();
    assert!((mean(&s.samples) - tw_mean).abs() < 0.1, "mean {}", mean(&s.samples));
}

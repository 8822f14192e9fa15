//! Subcommand bodies. Each returns the files to write; nothing touches the
//! filesystem here apart from reading inputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use edgelab::characteristics::{FieldKind, VelocityField, flow, verify_characteristics_asymptotics};
use edgelab::dbm::{DbmOptions, SymmetrizedConfig, couple, evolve_recorded, evolve_v, observable, slot};
use edgelab::deformed_mp::{DEFAULT_ETA_LIMIT, DeformedLaw, Normalization, Population};
use edgelab::edge_stats::{
    RatePoint, atom_population, m_for, null_largest, null_rate_points, rate_fit, rigidity_check, separable_rate_points, sigma_xi,
};
use edgelab::ensembles::{EntryDistribution, EntryKind, covariance, gaussian_null_spectrum, sample_replica, separable_largest};
use edgelab::spectral_laws::SpectralLaw;
use edgelab::tracy_widom::{TWReference, TwMethod, tw1_cdf};

use crate::cells;
use crate::config::*;
use crate::error::{CliError, CliResult};
use crate::output::{Csv, json_bytes};

pub struct Output {
    pub name: PathBuf,
    pub bytes: Vec<u8>,
}

fn file(name: impl Into<PathBuf>, bytes: Vec<u8>) -> Output {
    Output { name: name.into(), bytes }
}

pub struct Produced {
    pub outputs: Vec<Output>,
    /// Printed to stdout after the files are written.
    pub stdout: Option<String>,
}

fn produced(outputs: Vec<Output>) -> Produced {
    Produced { outputs, stdout: None }
}

fn versions() -> serde_json::Value {
    json!({ "edgelab": edgelab::VERSION, "edgelab-cli": env!("CARGO_PKG_VERSION") })
}

/// One σ per line; blank lines and `#` comments are skipped.
pub fn read_population(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read population file {}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(i, l)| {
            l.parse::<f64>().map_err(|_| CliError::Usage(format!("population file {} entry {}: `{l}` is not a number", path.display(), i + 1)))
        })
        .collect()
}

fn distribution(name: &str, mu4: Option<f64>) -> CliResult<EntryDistribution> {
    Ok(EntryDistribution::new(EntryKind::parse(name, mu4)?)?)
}

fn law(xi: f64) -> CliResult<SpectralLaw<f64>> {
    Ok(SpectralLaw::from_xi(xi)?)
}

/// Edge scale printed in the manifest of commands that rescale extremes.
pub fn manifest_sigma(cmd: &Command) -> Option<f64> {
    match cmd {
        Command::SampleEdge(a) => Some(sigma_xi(a.xi)),
        Command::Rate(a) => Some(sigma_xi(a.xi)),
        Command::Plotdata(a) if a.kind == PlotKind::Histogram => a.xi.map(sigma_xi),
        _ => None,
    }
}

pub fn execute(cmd: &Command, manifest_sha: &str) -> CliResult<Produced> {
    match cmd {
        Command::Law(a) => law_cmd(a),
        Command::Locations(a) => locations_cmd(a),
        Command::Deformed(a) => deformed_cmd(a, manifest_sha),
        Command::SampleEdge(a) => sample_edge_cmd(a),
        Command::Dbm(a) => dbm_cmd(a, manifest_sha),
        Command::Characteristics(a) => characteristics_cmd(a, manifest_sha),
        Command::Tw(a) => tw_cmd(a, manifest_sha),
        Command::Rate(a) => rate_cmd(a, manifest_sha),
        Command::Rigidity(a) => rigidity_cmd(a, manifest_sha),
        Command::Plotdata(a) => plotdata_cmd(a),
        Command::Run(_) => unreachable!("resolved before execution"),
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let d = (hi - lo) / (points.max(2) - 1) as f64;
    (0..points.max(2)).map(|i| lo + d * i as f64).collect()
}

fn law_cmd(a: &LawArgs) -> CliResult<Produced> {
    let l = law(a.xi)?;
    if !(a.eta > 0.0) {
        return Err(CliError::Usage("`eta` must be positive".into()));
    }
    let hi = 1.1 * l.sqrt_edges.1;
    let xs = grid(-hi, hi, a.points);
    let mut density = Csv::new(&["x", "rho"]);
    let mut stieltjes = Csv::new(&["z_re", "z_im", "m_re", "m_im"]);
    for &x in &xs {
        density.row(cells![x, l.sv_density(x)]);
        let m = l.sv_stieltjes(Complex64::new(x, a.eta))?;
        stieltjes.row(cells![x, a.eta, m.re, m.im]);
    }
    Ok(produced(vec![file("law.csv", density.into_bytes()), file("stieltjes.csv", stieltjes.into_bytes())]))
}

fn locations_cmd(a: &LocationsArgs) -> CliResult<Produced> {
    let l = law(a.xi)?;
    let g = l.typical_locations(a.n)?;
    let mut csv = Csv::new(&["k", "gamma_k"]);
    for k in 1..=a.n {
        csv.row(cells![k, g.get(k)]);
    }
    Ok(produced(vec![file("locations.csv", csv.into_bytes())]))
}

fn deformed_cmd(a: &DeformedArgs, sha: &str) -> CliResult<Produced> {
    let sigmas = read_population(&a.population)?;
    let d = DeformedLaw::new(Population::new(sigmas)?, a.xi)?;
    let summary = json!({ "xi_plus": d.xi_plus, "e_plus": d.e_plus, "gamma0": d.gamma0 });
    let mut record = summary.clone();
    record["manifest_sha256"] = json!(sha);
    let mut outputs = vec![file("deformed.json", json_bytes(&record))];
    if let Some(points) = a.density_points {
        let es = grid(0.0, 1.1 * d.e_plus, points + 1);
        let rho = es[1..].par_iter().map(|&e| d.density(e, DEFAULT_ETA_LIMIT)).collect::<edgelab::Result<Vec<_>>>()?;
        let mut csv = Csv::new(&["e", "rho_fc"]);
        for (e, r) in es[1..].iter().zip(rho) {
            csv.row(cells![*e, r]);
        }
        outputs.push(file("density.csv", csv.into_bytes()));
    }
    Ok(Produced { outputs, stdout: Some(serde_json::to_string(&summary).expect("json")) })
}

fn sample_edge_cmd(a: &SampleEdgeArgs) -> CliResult<Produced> {
    law(a.xi)?;
    let dist = distribution(&a.dist, a.mu4)?;
    let m = m_for(a.n, a.xi);
    let sigmas = a.population.as_deref().map(read_population).transpose()?.map(|p| atom_population(&p, m));
    let raw = (0..a.reps as u64)
        .into_par_iter()
        .map(|r| match &sigmas {
            None => null_largest(m, a.n, dist, a.seed, r),
            Some(s) => separable_largest(&sample_replica(m, a.n, dist, a.seed, r)?.entries, s),
        })
        .collect::<edgelab::Result<Vec<_>>>()?;
    let mut csv = Csv::new(&["replica", "lambda_max", "s_max"]);
    for (r, l) in raw.iter().enumerate() {
        csv.row(cells![r, *l, l.max(0.0).sqrt()]);
    }
    Ok(produced(vec![file(&a.out, csv.into_bytes())]))
}

fn dbm_cmd(a: &DbmArgs, sha: &str) -> CliResult<Produced> {
    if !(a.t_end > 0.0) || a.samples == 0 {
        return Err(CliError::Usage("`t-end` must be positive and `samples` at least 1".into()));
    }
    law(a.xi)?;
    let n = a.n;
    let m = m_for(n, a.xi);
    let opts = DbmOptions { dt: a.dt, dt_min: a.dt_min, ..DbmOptions::default() };
    let times: Vec<f64> = (1..=a.samples).map(|i| a.t_end * i as f64 / a.samples as f64).collect();
    let start = SymmetrizedConfig::new(gaussian_null_spectrum(m, n, a.seed, 0)?.singular_values.expect("null model"), 0.0)?;
    let mut csv = Csv::new(&["t", "k", "value"]);
    let stats = match a.couple {
        CoupleMode::Wishart => {
            let x = sample_replica(m, n, EntryDistribution::rademacher(), a.seed, 1)?;
            let other = SymmetrizedConfig::new(covariance(&x.entries)?.singular_values.expect("null model"), 0.0)?;
            let rec = couple(&start, &other, a.xi, &opts, &times, a.seed)?;
            for i in 0..rec.times.len() {
                match a.record {
                    RecordKind::Edge => csv.row(cells![rec.times[i], n, rec.edge_gap[i]]),
                    RecordKind::Gaps => {
                        csv.row(cells![rec.times[i], 0usize, rec.max_gap[i]]);
                        csv.row(cells![rec.times[i], n, rec.edge_gap[i]]);
                    }
                    RecordKind::Observable => {
                        return Err(CliError::Usage("`record observable` needs `couple none`".into()));
                    }
                }
            }
            rec.stats
        }
        CoupleMode::None => {
            let mut rng = edgelab::rng::replica_rng(a.seed, 1);
            let (traj, stats) = evolve_recorded(&start, a.xi, &opts, a.t_end, &mut rng)?;
            // Accepted step closest to each record time.
            let pick = |t: f64| {
                traj.times.iter().enumerate().min_by(|x, y| (x.1 - t).abs().total_cmp(&(y.1 - t).abs())).map(|(i, _)| i).expect("nonempty")
            };
            let picks: Vec<usize> = std::iter::once(0).chain(times.iter().map(|&t| pick(t))).collect();
            match a.record {
                RecordKind::Edge => {
                    for &i in &picks {
                        csv.row(cells![traj.times[i], n, traj.config(i).edge()]);
                    }
                }
                RecordKind::Gaps => {
                    for &i in &picks {
                        let s = traj.config(i);
                        for (k, w) in s.positive().windows(2).enumerate() {
                            csv.row(cells![traj.times[i], k + 1, w[1] - w[0]]);
                        }
                    }
                }
                RecordKind::Observable => {
                    let mut v0 = vec![0.0; 2 * n];
                    v0[slot(n as isize, n)] = 1.0;
                    v0[slot(-(n as isize), n)] = 1.0;
                    let profiles = evolve_v(&v0, &traj, a.xi)?;
                    let l = law(a.xi)?;
                    let z = Complex64::new(l.sqrt_edges.1, (n as f64).powf(-2.0 / 3.0));
                    for &i in picks.iter().filter(|&&i| i > 0) {
                        let o = observable(&traj.config(i), &profiles[i - 1], z, a.xi)?;
                        csv.row(cells![traj.times[i], 0usize, o.f.re]);
                        csv.row(cells![traj.times[i], 1usize, o.f.im]);
                    }
                }
            }
            stats
        }
    };
    let summary = json!({
        "manifest_sha256": sha,
        "n": n,
        "m": m,
        "accepted_steps": stats.accepted,
        "rejected_steps": stats.rejected,
    });
    Ok(produced(vec![file(&a.out, csv.into_bytes()), file("dbm.json", json_bytes(&summary))]))
}

fn parse_z0(text: &str) -> CliResult<Complex64> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || CliError::Usage(format!("`z0` must be `re,im`, got `{text}`"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let re = parts[0].parse().map_err(|_| bad())?;
    let im = parts[1].parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

fn characteristics_cmd(a: &CharacteristicsArgs, sha: &str) -> CliResult<Produced> {
    let z0 = parse_z0(&a.z0)?;
    if !(z0.im > 0.0) || !(a.t_end > 0.0) || a.steps == 0 {
        return Err(CliError::Usage("`z0` needs a positive imaginary part, `t-end` and `steps` must be positive".into()));
    }
    let field = VelocityField::new(law(a.xi)?, FieldKind::parse(&a.field)?);
    let times: Vec<f64> = (1..=a.steps).map(|i| a.t_end * i as f64 / a.steps as f64).collect();
    let path = flow(&field, z0, &times)?;
    let mut csv = Csv::new(&["t", "re", "im"]);
    csv.row(cells![0.0, z0.re, z0.im]);
    for (t, z) in times.iter().zip(&path.points) {
        csv.row(cells![*t, z.re, z.im]);
    }
    let mut outputs = vec![file(&a.out, csv.into_bytes())];
    if a.verify {
        let report = verify_characteristics_asymptotics(&field, &[z0], &[a.t_end / 100.0, a.t_end / 10.0, a.t_end])?;
        let mut value = serde_json::to_value(&report).expect("json");
        value["manifest_sha256"] = json!(sha);
        outputs.push(file("verify.json", json_bytes(&value)));
    }
    Ok(produced(outputs))
}

fn tw_cmd(a: &TwArgs, sha: &str) -> CliResult<Produced> {
    let table = match a.method {
        TwRoute::Painleve => TWReference::build(TwMethod::Painleve)?,
        TwRoute::Fredholm => TWReference::build(TwMethod::Fredholm)?,
        TwRoute::Cross => TWReference::cross_checked()?,
    };
    let mut csv = Csv::new(&["s", "F1"]);
    for (s, f) in table.s.iter().zip(&table.cdf) {
        csv.row(cells![*s, *f]);
    }
    let (mean, variance) = table.mean_variance();
    let summary = json!({ "manifest_sha256": sha, "est_error": table.est_error, "mean": mean, "variance": variance });
    Ok(produced(vec![file(&a.out, csv.into_bytes()), file("tw.json", json_bytes(&summary))]))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PerN {
    pub delta: f64,
    pub dkw: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RateReport {
    pub manifest_sha256: String,
    pub per_n: BTreeMap<usize, PerN>,
    pub slope: f64,
    pub intercept: f64,
    pub bound_respect: f64,
    pub bound_exponent: f64,
    pub sigma_xi: f64,
    pub seed: u64,
    pub versions: serde_json::Value,
}

fn rate_cmd(a: &RateArgs, sha: &str) -> CliResult<Produced> {
    let mut distinct = a.ns.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(CliError::Usage(format!("`ns` needs at least 4 distinct N values, got {}", distinct.len())));
    }
    law(a.xi)?;
    let dist = distribution(&a.dist, a.mu4)?;
    let points: Vec<RatePoint> = match &a.population {
        None => null_rate_points(a.xi, &distinct, dist, a.reps, a.seed)?,
        Some(p) => separable_rate_points(&read_population(p)?, a.xi, &distinct, dist, a.reps, a.seed)?,
    };
    let fit = rate_fit(&points, 2.0 / 9.0)?;
    let report = RateReport {
        manifest_sha256: sha.to_string(),
        per_n: fit.points.iter().map(|p| (p.n, PerN { delta: p.delta, dkw: p.dkw })).collect(),
        slope: fit.slope,
        intercept: fit.intercept,
        bound_respect: fit.bound_respect,
        bound_exponent: fit.bound_exponent,
        sigma_xi: sigma_xi(a.xi),
        seed: a.seed,
        versions: versions(),
    };
    Ok(produced(vec![file(&a.out, json_bytes(&report))]))
}

fn rigidity_cmd(a: &RigidityArgs, sha: &str) -> CliResult<Produced> {
    law(a.xi)?;
    let phi = a.phi.unwrap_or_else(|| edgelab::characteristics::phi(a.n as f64));
    let r = rigidity_check(m_for(a.n, a.xi), a.n, a.reps, a.seed, phi, a.epsilon, a.omega)?;
    let square = !r.hard.is_empty();
    let summary = json!({
        "manifest_sha256": sha,
        "n": r.n,
        "xi": r.xi,
        "reps": a.reps,
        "phi": r.phi,
        "soft_threshold": r.soft_threshold,
        "soft_pass_rate": r.soft_pass_rate(),
        "hard_threshold": if square { json!(r.hard_threshold) } else { json!(null) },
        "hard_pass_rate": if square { json!(r.hard_pass_rate()) } else { json!(null) },
        "mean_hard_deviation": if square { json!(r.mean_hard_deviation()) } else { json!(null) },
    });
    Ok(produced(vec![file(&a.out, json_bytes(&summary))]))
}

pub const FIGURE1_XI: [f64; 3] = [1.0, 0.36, 0.09];
pub const HISTOGRAM_RANGE: (f64, f64) = (-6.0, 4.0);

fn plotdata_cmd(a: &PlotdataArgs) -> CliResult<Produced> {
    match a.kind {
        PlotKind::Figure1 => {
            let laws = FIGURE1_XI.iter().map(|&xi| law(xi)).collect::<CliResult<Vec<_>>>()?;
            let mut csv = Csv::new(&["x", "rho_xi_1", "rho_xi_0.36", "rho_xi_0.09"]);
            // Odd point count keeps x = 0 on the grid.
            let points = a.points | 1;
            for x in grid(-2.2, 2.2, points) {
                let x = if x.abs() < 1e-12 { 0.0 } else { x };
                csv.row(cells![x, laws[0].sv_density(x), laws[1].sv_density(x), laws[2].sv_density(x)]);
            }
            Ok(produced(vec![file("figure1.csv", csv.into_bytes())]))
        }
        PlotKind::Histogram => {
            let input = a.input.as_deref().ok_or_else(|| CliError::Usage("`input` (a sample-edge CSV) is required".into()))?;
            let (xi, n) = match (a.xi, a.n) {
                (Some(xi), Some(n)) => (xi, n),
                _ => return Err(CliError::Usage("`xi` and `n` are required for a histogram".into())),
            };
            if a.bins == 0 {
                return Err(CliError::Usage("`bins` must be positive".into()));
            }
            let raw = read_edge_csv(input)?;
            let rescaled: Vec<f64> = match &a.population {
                None => {
                    let l = law(xi)?;
                    let scale = (n as f64).powf(2.0 / 3.0) / sigma_xi(xi);
                    raw.iter().map(|x| (x - l.lambda_plus) * scale).collect()
                }
                Some(p) => {
                    let d = DeformedLaw::new(Population::new(atom_population(&read_population(p)?, m_for(n, xi)))?, xi)?;
                    raw.iter().map(|&mu| d.rescale(mu, n, Normalization::VariancePerM)).collect()
                }
            };
            let (lo, hi) = HISTOGRAM_RANGE;
            let width = (hi - lo) / a.bins as f64;
            let mut counts = vec![0usize; a.bins];
            for x in &rescaled {
                let b = ((x - lo) / width).floor().clamp(0.0, (a.bins - 1) as f64) as usize;
                counts[b] += 1;
            }
            let total = rescaled.len() as f64;
            let mut csv = Csv::new(&["bin_lo", "bin_hi", "count", "density", "tw_density"]);
            for (b, &c) in counts.iter().enumerate() {
                let (l, h) = (lo + width * b as f64, lo + width * (b + 1) as f64);
                csv.row(cells![l, h, c, c as f64 / (total * width), (tw1_cdf(h) - tw1_cdf(l)) / width]);
            }
            Ok(produced(vec![file("histogram.csv", csv.into_bytes())]))
        }
        PlotKind::Loglog => {
            let input = a.input.as_deref().ok_or_else(|| CliError::Usage("`input` (a rate JSON) is required".into()))?;
            let text = fs::read_to_string(input).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", input.display())))?;
            let report: RateReport =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", input.display())).map_err(CliError::Numeric)?;
            let mut csv = Csv::new(&["n", "log_n", "delta", "log_delta", "dkw", "log_fit"]);
            for (n, p) in &report.per_n {
                let ln = (*n as f64).ln();
                csv.row(cells![*n, ln, p.delta, p.delta.ln(), p.dkw, report.intercept + report.slope * ln]);
            }
            Ok(produced(vec![file("loglog.csv", csv.into_bytes())]))
        }
    }
}

/// `lambda_max` column of a `sample-edge` CSV.
fn read_edge_csv(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let col = header
        .iter()
        .position(|h| *h == "lambda_max")
        .ok_or_else(|| CliError::Usage(format!("{} has no `lambda_max` column", path.display())))?;
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .nth(col)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| CliError::Usage(format!("{}: malformed row `{l}`", path.display())))
        })
        .collect()
}

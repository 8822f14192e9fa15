use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn edgelab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgelab")).arg("--out-dir").arg(dir).args(args).output().expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let col = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

const EDGE_ARGS: [&str; 11] = ["sample-edge", "--xi", "0.5", "--n", "20", "--reps", "40", "--dist", "rademacher", "--seed", "3"];

#[test]
fn same_config_and_seed_give_identical_payloads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&edgelab(a.path(), &EDGE_ARGS));
    ok(&edgelab(b.path(), &EDGE_ARGS));
    for name in ["edge.csv", "sample-edge.manifest.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let csv = fs::read_to_string(a.path().join("edge.csv")).unwrap();
    assert!(csv.starts_with("replica,lambda_max,s_max\n"));
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn manifest_replays_through_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&edgelab(a.path(), &EDGE_ARGS));
    let manifest = a.path().join("sample-edge.manifest.json");
    ok(&edgelab(b.path(), &["run", "--config", manifest.to_str().unwrap()]));
    assert_eq!(fs::read(a.path().join("edge.csv")).unwrap(), fs::read(b.path().join("edge.csv")).unwrap());
    assert_eq!(fs::read(&manifest).unwrap(), fs::read(b.path().join("sample-edge.manifest.json")).unwrap());
    let record: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.path().join("sample-edge.record.json")).unwrap()).unwrap();
    assert_eq!(record["manifest_sha256"].as_str().unwrap().len(), 64);
    assert!(record["outputs"]["edge.csv"].is_string());
}

#[test]
fn missing_population_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no-such-population.csv");
    let out = edgelab(dir.path(), &["deformed", "--population", missing.to_str().unwrap(), "--xi", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-such-population.csv"));
}

#[test]
fn rate_needs_four_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = edgelab(dir.path(), &["rate", "--xi", "1", "--ns", "50,100", "--reps", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("rate.json").exists());
}

#[test]
fn outputs_stay_inside_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = edgelab(dir.path(), &["sample-edge", "--xi", "1", "--n", "5", "--reps", "2", "--out", "../escape.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_plot_kind_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(edgelab(dir.path(), &["plotdata", "--kind", "pie"]).status.code(), Some(2));
}

#[test]
fn figure_one_density_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    ok(&edgelab(dir.path(), &["plotdata", "--kind", "figure1"]));
    let text = fs::read_to_string(dir.path().join("figure1.csv")).unwrap();
    let x = column(&text, "x");
    let rho = column(&text, "rho_xi_1");
    let i = x.iter().position(|&v| v == 0.0).expect("x = 0 on the grid");
    assert!((rho[i] - std::f64::consts::FRAC_1_PI).abs() < 1e-15);
    assert_eq!(column(&text, "rho_xi_0.09")[i], 0.0);
}

#[test]
fn histogram_counts_sum_to_reps() {
    let dir = tempfile::tempdir().unwrap();
    ok(&edgelab(dir.path(), &["sample-edge", "--xi", "1", "--n", "30", "--reps", "75", "--seed", "1"]));
    let input = dir.path().join("edge.csv");
    ok(&edgelab(dir.path(), &["plotdata", "--kind", "histogram", "--input", input.to_str().unwrap(), "--xi", "1", "--n", "30"]));
    let text = fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    let counts: Vec<f64> = column(&text, "count");
    assert_eq!(counts.iter().sum::<f64>(), 75.0);
    let tw: f64 = column(&text, "tw_density").iter().sum::<f64>() * 0.2;
    assert!(tw > 0.99);
}

#[test]
fn rate_report_and_loglog_series() {
    let dir = tempfile::tempdir().unwrap();
    ok(&edgelab(dir.path(), &["rate", "--xi", "1", "--ns", "10,20,30,40", "--reps", "60", "--seed", "2"]));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("rate.json")).unwrap()).unwrap();
    for key in ["per_n", "slope", "bound_respect", "sigma_xi", "seed", "versions", "manifest_sha256"] {
        assert!(!report[key].is_null(), "{key}");
    }
    assert!((report["sigma_xi"].as_f64().unwrap() - 2f64.powf(4.0 / 3.0)).abs() < 1e-15);
    let input = dir.path().join("rate.json");
    ok(&edgelab(dir.path(), &["plotdata", "--kind", "loglog", "--input", input.to_str().unwrap()]));
    let text = fs::read_to_string(dir.path().join("loglog.csv")).unwrap();
    assert_eq!(text.lines().count() - 1, 4);
}

#[test]
fn deformed_identity_population() {
    let dir = tempfile::tempdir().unwrap();
    let pop = dir.path().join("pop.csv");
    fs::write(&pop, "1\n1\n1\n1\n").unwrap();
    let out = edgelab(dir.path(), &["deformed", "--population", pop.to_str().unwrap(), "--xi", "0.25"]);
    ok(&out);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["xi_plus"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-10);
    assert!((v["gamma0"].as_f64().unwrap() - 0.5 * 1.5f64.powf(-4.0 / 3.0)).abs() < 1e-10);
}

#[test]
fn law_and_locations_files() {
    let dir = tempfile::tempdir().unwrap();
    ok(&edgelab(dir.path(), &["law", "--xi", "0.25", "--points", "11"]));
    ok(&edgelab(dir.path(), &["locations", "--xi", "0.25", "--n", "8"]));
    let law = fs::read_to_string(dir.path().join("law.csv")).unwrap();
    assert!(law.starts_with("x,rho\n"));
    assert!(fs::read_to_string(dir.path().join("stieltjes.csv")).unwrap().starts_with("z_re,z_im,m_re,m_im\n"));
    let gamma = column(&fs::read_to_string(dir.path().join("locations.csv")).unwrap(), "gamma_k");
    assert_eq!(gamma.len(), 8);
    assert!((gamma[7] - 1.5).abs() < 1e-12);
}

#[test]
fn dbm_and_characteristics_runs() {
    let dir = tempfile::tempdir().unwrap();
    ok(&edgelab(dir.path(), &["dbm", "--n", "10", "--xi", "0.5", "--t-end", "0.01", "--couple", "wishart", "--record", "gaps", "--samples", "4"]));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("dbm.json")).unwrap()).unwrap();
    assert!(summary["accepted_steps"].as_u64().unwrap() >= 100);
    ok(&edgelab(dir.path(), &["dbm", "--n", "10", "--xi", "0.5", "--t-end", "0.01", "--record", "observable", "--samples", "4"]));
    assert_eq!(fs::read_to_string(dir.path().join("dbm.csv")).unwrap().lines().count(), 1 + 2 * 4);
    ok(&edgelab(dir.path(), &["characteristics", "--xi", "1", "--z0", "1.9,0.01", "--t-end", "0.5", "--field", "sc", "--verify"]));
    let traj = fs::read_to_string(dir.path().join("characteristics.csv")).unwrap();
    assert_eq!(traj.lines().count(), 1 + 101);
    assert!(dir.path().join("verify.json").exists());
}

#[test]
fn rigidity_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(&edgelab(dir.path(), &["rigidity", "--xi", "1", "--n", "50", "--reps", "10"]));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("rigidity.json")).unwrap()).unwrap();
    assert!(v["soft_pass_rate"].as_f64().is_some());
    assert!(v["hard_pass_rate"].as_f64().is_some());
}

#[test]
fn tw_table() {
    let dir = tempfile::tempdir().unwrap();
    ok(&edgelab(dir.path(), &["tw", "--method", "painleve"]));
    let text = fs::read_to_string(dir.path().join("tw1.csv")).unwrap();
    assert!(text.starts_with("s,F1\n"));
    let f = column(&text, "F1");
    assert_eq!(f.len(), 2001);
    assert!(f.windows(2).all(|w| w[1] >= w[0]));
}

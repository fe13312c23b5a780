use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use skewdiff::cli::Config;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skewdiff"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(config: &Path, threads: Option<usize>) -> Output {
    let mut c = bin();
    c.arg(config);
    if let Some(t) = threads {
        c.arg("--threads").arg(t.to_string());
    }
    c.output().unwrap()
}

fn simulate_config(out: &Path) -> String {
    format!(
        r#"
command = "simulate"
[model]
name = "holder-bump"
[grid]
T = 1.0
N = 6
[run]
seed = 42
n_paths = 1000
output = "{}"
"#,
        out.display()
    )
}

#[test]
fn validate_skew_bm_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "v.toml",
        &format!("command = \"validate\"\n[model]\nname = \"skew-bm\"\n[grid]\nT = 1.0\nN = 1\n[run]\noutput = \"{}\"\n", out.display()),
    );
    let o = run(&cfg, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("validate.csv")).unwrap();
    assert!(csv.starts_with("check,passed,observed,limit\n"));
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,")), "{csv}");
}

#[test]
fn simulate_is_byte_identical_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let cfg = write_config(dir.path(), "s.toml", &simulate_config(&out));
    assert_eq!(run(&cfg, Some(1)).status.code(), Some(0));
    let first = fs::read(out.join("simulate.csv")).unwrap();
    assert_eq!(run(&cfg, Some(3)).status.code(), Some(0));
    let second = fs::read(out.join("simulate.csv")).unwrap();
    assert_eq!(first, second);
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("path,step,t,x\n") && !text.contains('\r'));
    assert_eq!(text.lines().count(), 1 + 1000 * 7);
    // only the configured output directory was touched
    let mut entries: Vec<String> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    entries.sort();
    assert_eq!(entries, vec!["s.toml", "sim"]);
    let mut files: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    files.sort();
    assert_eq!(files, vec!["simulate.csv", "simulate.json"]);
}

#[test]
fn sidecar_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let cfg_path = write_config(dir.path(), "s.toml", &simulate_config(&out));
    assert_eq!(run(&cfg_path, None).status.code(), Some(0));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("simulate.json")).unwrap()).unwrap();
    let echoed: Config = serde_json::from_value(meta["config"].clone()).unwrap();
    assert_eq!(echoed, Config::load(&cfg_path).unwrap());
    assert_eq!(meta["seed"], 42);
    assert!(meta["version"].as_str().unwrap().starts_with('v'));
    assert!(meta["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert!(!meta["oracles"].as_array().unwrap().is_empty());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "command = \"simulate\"\n[model]\nname = \"skew-bm\"\n[grid]\nT = 1.0\nN = 4\nbogus = 1\n");
    let o = run(&cfg, None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bogus") && err.contains("line"), "{err}");
    let cfg = write_config(dir.path(), "alpha.toml", "command = \"validate\"\n[model]\nalpha = 1.2\neta = 1.0\nL = 1.0\nlambda = 2.0\ndrift = { kind = \"zero\" }\nsigma = { kind = \"constant\", value = 1.0 }\n[grid]\nT = 1.0\nN = 1\n");
    assert_eq!(run(&cfg, None).status.code(), Some(2));
    assert_eq!(run(&dir.path().join("missing.toml"), None).status.code(), Some(3));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn numeric_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let body = format!(
        "command = \"rate-functional\"\n[model]\nname = \"holder-bump\"\n[grid]\nT = 1.0\nN_list = [2, 4, 8]\n[run]\nreference = {{ kind = \"richardson\", n = 7 }}\noutput = \"{}\"\n",
        out.display()
    );
    let o = run(&write_config(dir.path(), "r.toml", &body), None);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rate-functional"));
}

#[test]
fn rate_density_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rd");
    let body = format!(
        r#"
command = "rate-density"
threads = 1
[model]
name = "holder-bump"
[grid]
T = 1.0
N_list = [2, 4, 8]
[run]
lattice = [-1.0, 0.25, 1.0, 2.0]
output = "{}"
[run.series]
order = 3
"#,
        out.display()
    );
    let o = run(&write_config(dir.path(), "rd.toml", &body), None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("rate-density.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "N,h,sup_norm_error,normalized_error,slope_running,hybrid_continuous,hybrid_discrete,resolution"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][4], "");
    for r in &rows {
        let e: f64 = r[3].parse().unwrap();
        assert!(e > 0.0 && r[3].contains('e'));
    }
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("rate-density.json")).unwrap()).unwrap();
    assert!(meta["result"]["density_bound"]["fitted_C"].as_f64().unwrap() > 0.0);
    assert!(meta["result"]["density_bound"]["fitted_c"].as_f64().unwrap() > 1.0);
}

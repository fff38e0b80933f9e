use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn heatlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatlab"))
        .args(args)
        .arg("--quiet")
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn sha(path: &Path) -> String {
    Sha256::digest(fs::read(path).unwrap()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Every file in `dir` except the manifest is listed exactly once, with its hash.
fn check_manifest(dir: &Path) -> Value {
    let manifest = json(&dir.join("manifest.json"));
    let files = manifest["files"].as_array().unwrap();
    let listed: Vec<&str> = files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    let unique: BTreeSet<&str> = listed.iter().copied().collect();
    assert_eq!(unique.len(), listed.len(), "duplicate manifest entries");
    let on_disk: BTreeSet<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    assert_eq!(on_disk, unique.iter().map(|s| s.to_string()).collect());
    for f in files {
        assert_eq!(f["sha256"].as_str().unwrap(), sha(&dir.join(f["path"].as_str().unwrap())));
    }
    manifest
}

const GASKET: &str = r#"kind = "gasket-heatkernel"
seed = 5

[model]
nu = 2
level = 4

[time]
steps = 100

[fit]
lo = 10.0
hi = 100.0
"#;

#[test]
fn gasket_smoke_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "gasket.toml", GASKET);
    let out = heatlab(&["run", &cfg, "--out", "run"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("run");
    let manifest = check_manifest(&dir);
    let paths: Vec<&str> = manifest["files"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert!(paths.contains(&"kernel.csv"));
    assert_eq!(paths.iter().filter(|p| p.ends_with(".svg")).count(), 1);
    let slope = json(&dir.join("summary.json"))["fit"]["slope"].as_f64().unwrap();
    let target = 3f64.ln() / 5f64.ln();
    assert!((slope - target).abs() < 0.03, "slope {slope}");
    // The saved config reproduces the run.
    let copy = fs::read_to_string(dir.join("config.toml")).unwrap();
    let again = write_config(tmp.path(), "copy.toml", &copy);
    assert!(heatlab(&["run", &again, "--out", "rerun"], tmp.path()).status.success());
    assert_eq!(
        fs::read(dir.join("kernel.csv")).unwrap(),
        fs::read(tmp.path().join("rerun/kernel.csv")).unwrap()
    );
}

#[test]
fn ensemble_outputs_do_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "btm.toml",
        "kind = \"btm-annealed\"\nseed = 9\n[model]\nalpha = 0.5\nwindow = 4096\n\
         [time]\nt_max = 1000.0\n[ensemble]\nmembers = 20\n[fit]\nlo = 10.0\nhi = 1000.0\n",
    );
    for (dir, jobs) in [("one", "1"), ("two", "2")] {
        let out = heatlab(&["run", &cfg, "--out", dir, "--jobs", jobs], tmp.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b) = (check_manifest(&tmp.path().join("one")), check_manifest(&tmp.path().join("two")));
    assert_eq!(a, b);
    assert_eq!(a["seeds"].as_array().unwrap().len(), 20);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "q.toml",
        "kind = \"btm-quenched\"\nseed = 1\n[model]\nalpha = 2.0\nwindow = 1024\n[time]\nt_max = 100.0\n",
    );
    assert!(heatlab(&["run", &cfg, "--out", "a"], tmp.path()).status.success());
    assert!(heatlab(&["run", &cfg, "--out", "b", "--seed", "2"], tmp.path()).status.success());
    let (a, b) = (json(&tmp.path().join("a/manifest.json")), json(&tmp.path().join("b/manifest.json")));
    assert_eq!(b["master_seed"], 2);
    assert_ne!(a["seeds"], b["seeds"]);
}

#[test]
fn invalid_alpha_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "kind = \"btm-quenched\"\n[model]\nalpha = 0.0\n");
    for verb in ["run", "describe"] {
        let out = heatlab(&[verb, &cfg, "--out", "never"], tmp.path());
        assert_eq!(out.status.code(), Some(1));
        assert!(String::from_utf8_lossy(&out.stderr).contains("model.alpha"));
    }
    assert!(!tmp.path().join("never").exists());
}

#[test]
fn undersized_window_is_a_resource_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "small.toml",
        "kind = \"btm-quenched\"\n[model]\nalpha = 2.0\nwindow = 8\n[time]\nt_max = 1e4\n",
    );
    assert_eq!(heatlab(&["run", &cfg, "--out", "o"], tmp.path()).status.code(), Some(2));
}

#[test]
fn describe_reports_sizes_without_writing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "spec.toml", "kind = \"gasket-spectrum\"\n[model]\nlevel = 7\n");
    let out = heatlab(&["describe", &cfg, "--out", "o"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("vertices: 3282"), "{text}");
    assert!(text.contains("3282 x 3282"), "{text}");
    assert!(!tmp.path().join("o").exists());

    let cfg = write_config(
        tmp.path(),
        "btm.toml",
        "kind = \"btm-quenched\"\n[model]\nalpha = 1.0\n[time]\nt_max = 1e5\n",
    );
    let text = String::from_utf8(heatlab(&["describe", &cfg], tmp.path()).stdout).unwrap();
    assert!(text.contains("window K: "), "{text}");
    assert!(text.contains("uniformization cost"), "{text}");
}

#[test]
fn small_pipelines_complete() {
    let tmp = tempfile::tempdir().unwrap();
    let configs = [
        ("spectrum", "kind = \"gasket-spectrum\"\n[model]\nlevel = 3\n[spectrum]\nper_decade = 50\n"),
        ("iic", "kind = \"iic-annealed\"\n[model]\nn0 = 2\n[time]\nsteps = 200\n[ensemble]\nmembers = 20\n"),
        ("ust", "kind = \"ust-exponent\"\n[model]\nn = 6\n[time]\nsteps = 200\n[ensemble]\nmembers = 3\n"),
        (
            "clt",
            "kind = \"btm-clt\"\n[model]\nalpha = 2.0\nwindow = 1024\n[clt]\nlambdas = [4.0, 8.0]\n\
             grid_points = 3\n[ensemble]\nmembers = 2\n",
        ),
    ];
    for (name, text) in configs {
        let cfg = write_config(tmp.path(), &format!("{name}.toml"), text);
        let out = heatlab(&["run", &cfg, "--out", name], tmp.path());
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        check_manifest(&tmp.path().join(name));
    }
    let ust = json(&tmp.path().join("ust/summary.json"));
    assert_eq!(ust["slopes"].as_array().unwrap().len(), 3);
    assert_eq!(json(&tmp.path().join("clt/summary.json"))["median_sup_error"].as_array().unwrap().len(), 2);
}

#[test]
fn plot_verb_renders_a_series() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "gasket.toml", GASKET);
    assert!(heatlab(&["run", &cfg, "--out", "run"], tmp.path()).status.success());
    let out = heatlab(&["plot", "run/kernel.csv", "--reference", "0.68", "--out", "plots"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = fs::read_to_string(tmp.path().join("plots/kernel.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("stroke-dasharray"));
    assert_eq!(heatlab(&["plot", "missing.csv"], tmp.path()).status.code(), Some(3));
}

#[test]
fn oracle_suite_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heatlab(&["oracle-suite", "--out", "oracles"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 15, "{text}");
    assert!(!text.contains("FAIL"));
    check_manifest(&tmp.path().join("oracles"));
}

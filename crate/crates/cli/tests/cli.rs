use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cvkan(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvkan"))
        .args(args)
        .env("CVKAN_OUT_DIR", out_dir)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn params_of_shipped_configs() {
    let dir = tempfile::tempdir().unwrap();
    for (file, want) in [
        ("z2_cvkan_1x1.json", 132),
        ("holography_cvkan_3x10x1.json", 5330),
        ("circuit_cvkan_6x10x3x1.json", 12341),
        ("z2_cvkan_1x2x1.json", 538),
        ("z1z2_cvkan_2x4x2x1.json", 2406),
        ("knots_cvkan_15x1x14.json", 2921),
    ] {
        let path = configs().join(file);
        let out = cvkan(&["params", "--config", path.to_str().unwrap()], dir.path());
        assert!(out.status.success(), "{file}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(stdout(&out).trim(), want.to_string(), "{file}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let out = cvkan(&["params", "--config", missing.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let typo = dir.path().join("typo.json");
    fs::write(
        &typo,
        r#"{"dataset": {"kind": "symbolic", "function": "f1"}, "model": {"widths": [1, 1]}, "epoch": 3}"#,
    )
    .unwrap();
    let out = cvkan(&["train", "--config", typo.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epoch"));

    let out = cvkan(&["suite", "tables"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = cvkan(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_dataset_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("knots.json");
    fs::write(
        &config,
        r#"{"dataset": {"kind": "knots", "path": "nowhere.csv"},
            "model": {"widths": [15, 1, 14], "norm": "bn_v", "output_domain": "real"}}"#,
    )
    .unwrap();
    let out = cvkan(&["train", "--config", config.to_str().unwrap(), "--epochs", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let config = configs().join("z2_cvkan_1x1.json");
    let args = ["train", "--config", config.to_str().unwrap(), "--epochs", "1", "--folds", "2"];
    let out = cvkan(&args, &blocker);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn train_is_reproducible_and_exports_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.json");
    fs::write(
        &config,
        r#"{"name": "small", "dataset": {"kind": "symbolic", "function": "f1", "samples": 300},
            "model": {"widths": [1, 2, 1], "norm": "bn_c"}, "folds": 3}"#,
    )
    .unwrap();
    let config = config.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out_dir in [&a, &b] {
        let out = cvkan(&["train", "--config", config, "--seed", "7", "--epochs", "4"], out_dir);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let run_a = a.join("small");
    for artifact in ["summary.json", "folds.csv", "model_fold0.json", "manifest.json"] {
        let left = fs::read(run_a.join(artifact)).unwrap();
        assert_eq!(left, fs::read(b.join("small").join(artifact)).unwrap(), "{artifact}");
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(run_a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config"]["epochs"], 4);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(fs::read_to_string(run_a.join("folds.csv")).unwrap().lines().count(), 4);

    let model = run_a.join("model_fold0.json");
    let out = cvkan(
        &["eval", "--model", model.to_str().unwrap(), "--config", config],
        dir.path(),
    );
    assert!(out.status.success());
    let metrics: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(metrics["mse"].as_f64().unwrap().is_finite());

    let viz = |name: &str| {
        let path = dir.path().join(name);
        let out = cvkan(
            &[
                "export-viz",
                "--model",
                model.to_str().unwrap(),
                "--config",
                config,
                "--resolution",
                "2",
                "--max-samples",
                "100",
                "--out",
                path.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        path
    };
    let (v1, v2) = (viz("v1.json"), viz("v2.json"));
    let bytes = fs::read(&v1).unwrap();
    assert_eq!(bytes, fs::read(&v2).unwrap());
    let doc = cvkan::explain::VizDocument::load(&v1).unwrap();
    assert_eq!(doc.surfaces.len(), 4);
    assert!(doc.surfaces.iter().all(|s| s.resolution == 2 && s.magnitude.len() == 4));
    assert!(dir.path().join("v1.manifest.json").exists());

    let out = cvkan(&["eval", "--model", config, "--config", config], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

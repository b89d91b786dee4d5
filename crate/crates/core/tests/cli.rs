use std::fs;
use std::process::{Command, Output};

fn locop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locop")).args(args).output().expect("spawn locop")
}

#[test]
fn empty_r_list_exits_2_with_field_path() {
    let out = locop(&["run", "limits", "--r-list", ""]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("limits.r_list") && err.contains("r_list must be nonempty increasing"), "{err}");
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[szego]\nrho = \"half\"\n").unwrap();
    let out = locop(&["run", "szego", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho"));
}

#[test]
fn constant_quadruple_passes_and_embeds_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = locop(&["run", "orthogonality", "--space", "bergman", "--alpha", "0", "--degree", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("PASS bergman_orthogonality")));
    let csv = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|x| x == "csv"))
        .unwrap();
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("# locop run orthogonality\n# [orthogonality]\n"));
    let row = text.lines().find(|l| l.starts_with("bergman_orthogonality")).unwrap();
    let fields: Vec<&str> = row.rsplit(',').take(3).collect();
    // error, target, computed
    assert_eq!(fields[1], "1.0000000000000000e0");
    assert!(fields[2].parse::<f64>().unwrap() - 1.0 < 1e-9);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[toeplitz_spectrum]\nspace = \"fock\"\nweight = 1.0\nsymbol = \"indicator:1\"\nn = 10\n").unwrap();
    let out = locop(&[
        "run",
        "toeplitz-spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "12",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let spectrum = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with(".spectrum.csv"))
        .unwrap();
    let text = fs::read_to_string(spectrum).unwrap();
    assert!(text.contains("# n = 12"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 13);
}

#[test]
fn failing_suite_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    // a tolerance no finite r can meet
    let out = locop(&["run", "limits", "--tolerance", "1e-12", "--window-cap", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).lines().any(|l| l.starts_with("FAIL limits")));
}

#[test]
fn worker_variable_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_locop"))
        .args(["run", "limits"])
        .env("LOCOP_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

//! Exit-code and output contracts of the command-line interface.

use std::process::Command;

fn warplab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_warplab"))
}

#[test]
fn examples_list_names_five_scenarios() {
    let out = warplab().args(["examples", "list"]).output().unwrap();
    assert!(out.status.success());
    let names: Vec<&str> = std::str::from_utf8(&out.stdout)
        .unwrap()
        .lines()
        .collect();
    assert_eq!(names.len(), 5);
    assert!(names.contains(&"catenoid"));
}

#[test]
fn examples_emit_matches_bundled_and_rejects_unknown() {
    let out = warplab()
        .args(["examples", "emit", "catenoid"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        std::str::from_utf8(&out.stdout).unwrap(),
        warplab::config::bundled("catenoid").unwrap()
    );

    let out = warplab()
        .args(["examples", "emit", "unknown"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_dimensions_exit_2_naming_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(
        &cfg,
        "[scenario]\nname = bad\n[immersion]\nbuiltin = euclidean_plane(2,3)\n\
         [model]\ndim = 3\n[mesh]\nresolution = 5, 5\n[radii]\nlo = 1\nhi = 2\ncount = 2\n",
    )
    .unwrap();
    let out = warplab().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("n > model dim"), "stderr: {err}");
}

#[test]
fn run_writes_artifacts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sphere.cfg");
    std::fs::write(&cfg, warplab::config::bundled("sphere").unwrap()).unwrap();
    let out = warplab()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["curves.csv", "verdicts.json", "mesh.txt", "manifest.json"] {
        assert!(dir.path().join("sphere").join(name).exists(), "{name}");
    }
}

#[test]
fn model_tables_euclidean_balance_column() {
    let out = warplab()
        .args(["model-tables", "space_form:0", "-m", "3", "--grid", "1:5:5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::str::from_utf8(&out.stdout).unwrap();
    assert!(text.starts_with("r,w,w1,w2,eta,Kw,Kfiber,volS,volB,q,q_eta\n"));
    for line in text.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let q_eta: f64 = line.split(',').nth(10).unwrap().parse().unwrap();
        assert!((q_eta - 1.0 / 3.0).abs() < 1e-12);
    }
}

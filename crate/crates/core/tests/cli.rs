use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use surface_invariants::io::{read_invariant_grid, read_obj};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name)
}

fn surfinv(out_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfinv"))
        .arg("--out-dir")
        .arg(out_dir)
        .args(args)
        .env_remove("SURFINV_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn analyze_torus_reports_identities() {
    let dir = tempfile::tempdir().unwrap();
    let out = surfinv(
        dir.path(),
        &[
            "analyze",
            "--surface",
            "torus",
            "--param",
            "R=2",
            "--param",
            "r=1",
            "--u",
            "0:6.2832:129",
            "--v",
            "0:6.2832:129",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("torus_analyze.json")).unwrap();
    assert_eq!(text.as_bytes(), out.stdout.as_slice());
    let nu = read_invariant_grid(&dir.path().join("torus_nu.json")).unwrap();
    assert_eq!((nu.spec().nu, nu.spec().nv), (129, 129));
    let report = json(&out);
    assert!(report["max_gauss_identity"].as_f64().unwrap() < 1e-12);
    assert!(report["max_mean_identity"].as_f64().unwrap() < 1e-12);
}

#[test]
fn analyze_catenoid_is_minimal() {
    let dir = tempfile::tempdir().unwrap();
    let out = surfinv(dir.path(), &["analyze", "--surface", "catenoid", "--u", "-1:1:65", "--v", "0:3.1416:65"]);
    assert_eq!(out.status.code(), Some(0));
    let h = json(&out)["max_abs_h"].as_f64().unwrap();
    assert!(h < 1e-12, "{h}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let code = |args: &[&str]| surfinv(p, args).status.code();
    assert_eq!(code(&["analyze", "--surface", "sphere", "--u", "-1:1:17", "--v", "0:3:17"]), Some(2));
    assert_eq!(code(&["analyze", "--surface", "klein"]), Some(64));
    assert_eq!(code(&["analyze", "--surface", "torus", "--param", "q=1"]), Some(64));
    assert_eq!(code(&["analyze", "--surface", "torus", "--u", "0:1"]), Some(64));
    assert_eq!(code(&["bogus"]), Some(64));
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["check", "--input", "missing.json"]), Some(3));
    assert_eq!(code(&["analyze", "--surface", "torus", "--param", "r=-1"]), Some(64));
}

#[test]
fn check_flat_cylinder_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("flat_cylinder.json");
    let out = surfinv(dir.path(), &["check", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    for r in report["residuals"].as_array().unwrap() {
        assert!(r["max_abs"].as_f64().unwrap() < 1e-10, "{r}");
    }
    assert!(report["path_consistency"].as_f64().unwrap() < 1e-10);
    assert_eq!(report["compatible"], Value::Bool(true));
}

#[test]
fn reconstruct_writes_a_rereadable_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("catenoid_nu.json");
    let out =
        surfinv(dir.path(), &["reconstruct", "--input", input.to_str().unwrap(), "--output", "mesh.obj", "--normals"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let obj = read_obj(&dir.path().join("mesh.obj")).unwrap();
    assert_eq!(obj.vertices.len(), 65 * 65);
    assert_eq!(obj.normals.len(), 65 * 65);
    assert_eq!(obj.faces.len(), 2 * 64 * 64);
    let mesh = obj.to_mesh().unwrap();
    assert_eq!(mesh.spec().nu, 65);
    assert!(dir.path().join("reconstruct.json").exists());
}

#[test]
fn incompatible_input_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let inv = read_invariant_grid(&data("catenoid_nu.json")).unwrap();
    let spec = inv.spec();
    let nu1 = surface_invariants::numerics::ScalarGrid::from_fn(spec, |i, j| {
        inv.field1().at(i, j) + 0.05 * (2.0 * spec.u(i) + spec.v(j)).sin()
    });
    let bad = inv.with_fields(nu1, inv.field2().clone()).unwrap();
    let path = dir.path().join("bad.json");
    surface_invariants::io::write_invariant_grid(&path, &bad).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(surfinv(dir.path(), &["check", "--input", p]).status.code(), Some(4));
    assert_eq!(surfinv(dir.path(), &["reconstruct", "--input", p, "--strict"]).status.code(), Some(4));
    let lenient = surfinv(dir.path(), &["reconstruct", "--input", p]);
    assert_eq!(lenient.status.code(), Some(0));
}

#[test]
fn canonicalize_output_round_trips_through_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = surfinv(
        dir.path(),
        &[
            "canonicalize",
            "--surface",
            "catenoid",
            "--u",
            "-1:1:33",
            "--v",
            "0:3:33",
            "--mode",
            "kh",
            "--output",
            "cat.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let written = dir.path().join("cat.json");
    let inv = read_invariant_grid(&written).unwrap();
    let again = surface_invariants::io::invariant_grid_to_json(&inv).unwrap();
    assert_eq!(again, std::fs::read_to_string(&written).unwrap());
    let check = surfinv(dir.path(), &["check", "--input", written.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0));
}

#[test]
fn reports_are_deterministic() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let out = surfinv(
            dir.path(),
            &["roundtrip", "--surface", "catenoid", "--u", "-1:1:33", "--v", "0:3:33", "--refine", "1"],
        );
        assert_eq!(out.status.code(), Some(0));
        let report = std::fs::read(dir.path().join("catenoid_roundtrip.json")).unwrap();
        let canon = surfinv(dir.path(), &["canonicalize", "--surface", "torus", "--u", "0.5:2.5:33", "--v", "0:2:33"]);
        assert_eq!(canon.status.code(), Some(0));
        (report, canon.stdout, std::fs::read(dir.path().join("torus_canonical.json")).unwrap())
    };
    assert_eq!(run(), run());
}

#[test]
fn roundtrip_prints_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = surfinv(
        dir.path(),
        &["roundtrip", "--surface", "catenoid", "--u", "-1:1:65", "--v", "0:3.1416:65", "--refine", "2"],
    );
    assert_eq!(out.status.code(), Some(0));
    let report: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("catenoid_roundtrip.json")).unwrap()).unwrap();
    for key in ["gauss_orders", "alignment_orders"] {
        let orders = report[key].as_array().unwrap();
        assert_eq!(orders.len(), 2);
        for o in orders {
            assert!(o.as_f64().unwrap() >= 1.9, "{key}: {o}");
        }
    }
}

#[test]
fn special_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cyl = data("flat_cylinder.json");
    let cat = data("catenoid_nu.json");
    let run = |kind: &str, input: &Path, extra: &[&str]| {
        let mut args = vec!["special", "--kind", kind, "--input", input.to_str().unwrap()];
        args.extend_from_slice(extra);
        surfinv(dir.path(), &args)
    };
    for kind in ["cmc", "flat"] {
        let out = run(kind, &cyl, &[]);
        assert_eq!(out.status.code(), Some(0), "{kind}");
        assert!(json(&out)["residual"]["max_abs"].as_f64().unwrap() < 1e-10);
    }
    let minimal = run("minimal", &cat, &[]);
    assert_eq!(minimal.status.code(), Some(0));
    assert!(json(&minimal)["residual"]["max_abs"].as_f64().unwrap() < 1e-2);
    let w = run("weingarten", &cat, &["--relation", "minimal"]);
    assert_eq!(w.status.code(), Some(0), "{}", String::from_utf8_lossy(&w.stderr));
    assert!(dir.path().join("special_weingarten.json").exists());
}

#[test]
fn out_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_surfinv"))
        .args(["analyze", "--surface", "cylinder", "--u", "0:3:9", "--v", "0:2:9"])
        .env("SURFINV_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("cylinder_analyze.json").exists());
}

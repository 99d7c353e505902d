use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use monotomo::inversion::read_pgm;

const BIN: &str = env!("CARGO_BIN_EXE_monotomo");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).arg("--quiet").args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const LINEAR: &str = r#"
[scenario]
physics = "electrostatic"
rings = 24
radius = 1.0
background = 2.0
transducer = 1.0
field_max = 10.0
law = { kind = "linear", value = 4.0 }
"#;

const SMALL_STEADY: &str = r#"
[scenario]
physics = "steady-currents"
rings = 12
anomaly = { shape = "cells", cells = [[0, 1]] }

[grid]
cells = 4

[noise]
preset = "noiseless"
seed = 5
"#;

fn energy(o: &Output) -> f64 {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    stdout(o).trim().strip_prefix("energy ").unwrap().parse().unwrap()
}

#[test]
fn forward_linear_disk_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", LINEAR);
    let e = energy(&run(dir.path(), &["--config", "run.toml", "--out", "o", "forward", "--trace", "cos:2"]));
    // ½·γ·nπ for a homogeneous disk
    assert!((e - 2.0 * PI).abs() < 0.01 * 2.0 * PI, "{e}");
    assert!(dir.path().join("o/field.csv").exists());
    let zero = energy(&run(dir.path(), &["--config", "run.toml", "--out", "o", "forward", "--trace", "zero"]));
    assert_eq!(zero, 0.0);
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.toml", "[scenario]\nphysics = \"steady-currents\"\nbogus = 1\n");
    assert_eq!(run(dir.path(), &["--config", "bad.toml", "forward"]).status.code(), Some(2));
    write(dir.path(), "run.toml", LINEAR);
    assert_eq!(run(dir.path(), &["--config", "run.toml", "forward", "--trace", "wave:3"]).status.code(), Some(2));
    let o = run(dir.path(), &["--config", "run.toml", "--out", "o", "reconstruct", "--potentials", "nowhere"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn precompute_and_reconstruct_single_cell() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", SMALL_STEADY);
    let o = run(dir.path(), &["--config", "run.toml", "--out", "a", "precompute"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = std::fs::read_to_string(dir.path().join("a/potentials/manifest.csv")).unwrap();
    let mut lines = manifest.lines();
    assert_eq!(lines.next(), Some("i,j,k,delta,lambda,file"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let delta: f64 = cols[3].parse().unwrap();
        let lambda: f64 = cols[4].parse().unwrap();
        assert!(delta < 0.0 && lambda > 0.0, "{line}");
        rows += 1;
    }
    assert!(rows > 0);

    // a second run writes the same bytes
    let o = run(dir.path(), &["--config", "run.toml", "--out", "b", "precompute"]);
    assert!(o.status.success());
    for f in ["manifest.csv", "responses.csv"] {
        let a = std::fs::read(dir.path().join("a/potentials").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b/potentials").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }

    let o = run(dir.path(), &["--config", "run.toml", "--out", "a", "reconstruct"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let raster = read_pgm(dir.path().join("a/union.pgm")).unwrap();
    assert_eq!(raster.len(), 4);
    assert!(raster[0][1], "{raster:?}");
    // the far corner is discarded
    assert!(!raster[3][3], "{raster:?}");
    for f in ["results.txt", "anomaly_outline.csv", "histogram.csv"] {
        assert!(dir.path().join("a").join(f).exists(), "{f}");
    }
}

#[test]
fn reconstruct_rejects_foreign_potentials() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", SMALL_STEADY);
    assert!(run(dir.path(), &["--config", "run.toml", "--out", "a", "precompute"]).status.success());
    write(dir.path(), "other.toml", &SMALL_STEADY.replace("rings = 12", "rings = 10"));
    let o = run(dir.path(), &["--config", "other.toml", "--out", "b", "reconstruct", "--potentials", "a/potentials"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reconstruction_is_seed_stable() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", &SMALL_STEADY.replace("\"noiseless\"", "\"keithley-2002\""));
    assert!(run(dir.path(), &["--config", "run.toml", "--out", "a", "precompute"]).status.success());
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let o = run(dir.path(), &["--config", "run.toml", "--out", "a", "--seed", "11", "reconstruct"]);
        assert!(o.status.success());
        outputs.push(std::fs::read(dir.path().join("a/results.txt")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

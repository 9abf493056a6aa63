use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fiberframe::io;
use fiberframe_core::sampling::{gaussian_matrix, seeded};
use fiberframe_core::{C64, CMat, FrameMatrix};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fiberframe"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out: Output = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_frame(dir: &Path, name: &str, f: &FrameMatrix) -> PathBuf {
    let path = dir.join(name);
    io::write_frame(&path, f).unwrap();
    path
}

/// First `k` rows of the `n`-point DFT matrix, scaled to unit-norm columns.
fn harmonic(k: usize, n: usize) -> FrameMatrix {
    let s = 1.0 / (k as f64).sqrt();
    FrameMatrix::new(CMat::from_fn(k, n, |i, j| {
        C64::from_polar(s, std::f64::consts::TAU * (i * j) as f64 / n as f64)
    }))
    .unwrap()
}

#[test]
fn check_reports_funtf_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let h = write_frame(dir.path(), "h.json", &harmonic(3, 5));
    let (code, out, _) = run(&["check", p(&h), "--expect-funtf"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("FUNTF: true"));
    assert!(out.lines().next().unwrap().starts_with("# fiberframe "));
    assert!(out.contains("seed=0") && out.contains("tol="));

    let deficient = FrameMatrix::from_real_rows(&[&[1.0, 1.0, 0.0], &[2.0, 2.0, 0.0]]).unwrap();
    let d = write_frame(dir.path(), "d.csv", &deficient);
    let (code, out, _) = run(&["check", p(&d)]);
    assert_eq!(code, 1);
    assert!(out.contains("not a frame"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"k\": 2, \"N\": ").unwrap();
    let (code, _, err) = run(&["check", p(&bad)]);
    assert_eq!(code, 2);
    assert!(err.contains("bad.json"));

    let nan = dir.path().join("nan.csv");
    std::fs::write(&nan, "1,0\n0,NaN\n0,0\n0,0\n").unwrap();
    assert_eq!(run(&["check", p(&nan)]).0, 2);
}

#[test]
fn check_against_target_and_shape_errors() {
    let dir = tempfile::tempdir().unwrap();
    let h = write_frame(dir.path(), "h.json", &harmonic(2, 4));
    let t = dir.path().join("t.json");
    std::fs::write(&t, r#"{"lambda": [2, 2], "r": [1, 1, 1, 1]}"#).unwrap();
    let (code, out, _) = run(&["check", p(&h), "--target", p(&t)]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("on fiber: true"));
    let wrong = dir.path().join("w.json");
    std::fs::write(&wrong, r#"{"lambda": [2, 1], "r": [1, 1, 1]}"#).unwrap();
    assert_eq!(run(&["check", p(&h), "--target", p(&wrong)]).0, 2);
}

#[test]
fn construct_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.json");
    let (code, stdout, _) = run(&["construct", "--lambda", "1.5", "1.5", "--r", "1", "1", "1", "--out", p(&out)]);
    assert_eq!(code, 0, "{stdout}");
    let f = io::read_frame(&out).unwrap();
    assert!(fiberframe_core::is_funtf(&f, 1e-8));

    let (code, _, err) = run(&["construct", "--lambda", "2", "1", "--r", "2.5", "0.5"]);
    assert_eq!(code, 1);
    assert!(err.contains("partial sum ℓ=1"), "{err}");

    let s = dir.path().join("s.json");
    std::fs::write(&s, r#"{"re": [[2, 0.5], [0.5, 1]], "im": [[0, 0.25], [-0.25, 0]]}"#).unwrap();
    let (code, stdout, _) = run(&["construct", "--S", p(&s), "--r", "1", "1", "1", "--json"]);
    assert_eq!(code, 0, "{stdout}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["report"]["verified"], true);
    assert_eq!(v["header"]["seed"], 0);
}

#[test]
fn construct_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<PathBuf> = ["a", "b", "c"].iter().map(|n| dir.path().join(format!("{n}.json"))).collect();
    for (file, seed) in files.iter().zip(["7", "7", "8"]) {
        let args = ["construct", "--lambda", "3", "1", "--r", "1.5", "1", "1", "0.5", "--seed", seed, "--out", p(file), "-q"];
        assert_eq!(run(&args).0, 0);
    }
    let bytes: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
    assert_eq!(bytes[0], bytes[1]);
    assert_ne!(bytes[0], bytes[2]);
}

#[test]
fn tighten_examples() {
    let dir = tempfile::tempdir().unwrap();
    let h = harmonic(2, 4);
    let e = gaussian_matrix(&mut seeded(3), 2, 4);
    let noisy = FrameMatrix::new(h.as_mat() + &e.scale(1e-2 * h.norm() / e.norm())).unwrap();
    let input = write_frame(dir.path(), "noisy.csv", &noisy);
    for method in ["gradient", "alternating"] {
        let out = dir.path().join(format!("{method}.json"));
        let report = dir.path().join(format!("{method}-report.json"));
        let (code, stdout, _) = run(&["tighten", p(&input), "--method", method, "--out", p(&out), "--report", p(&report)]);
        assert_eq!(code, 0, "{stdout}");
        let flow: io::FlowReportJson = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert_eq!(flow.status, "converged");
        assert!(flow.final_residual <= 1e-10);
        assert!(flow.residual_trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(fiberframe_core::is_funtf(&io::read_frame(&out).unwrap(), 1e-4));
    }

    let on = write_frame(dir.path(), "on.json", &h);
    let (code, stdout, _) = run(&["tighten", p(&on)]);
    assert_eq!(code, 0);
    assert!(stdout.contains("iterations: 0"));

    let deficient = FrameMatrix::from_real_rows(&[&[1.0, 1.0, 1.0, 1.0], &[0.0, 0.0, 0.0, 0.0]]).unwrap();
    let d = write_frame(dir.path(), "d.json", &deficient);
    let (code, stdout, _) = run(&["tighten", p(&d)]);
    assert_eq!(code, 1);
    assert!(stdout.contains("lost_rank"));
}

#[test]
fn connect_examples() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    std::fs::write(&t, r#"{"lambda": [2, 2], "r": [1, 1, 1, 1]}"#).unwrap();
    let ends: Vec<PathBuf> = ["1", "2"]
        .iter()
        .map(|seed| {
            let f = dir.path().join(format!("f{seed}.json"));
            let args = ["construct", "--lambda", "2", "2", "--r", "1", "1", "1", "1", "--seed", seed, "--out", p(&f), "-q"];
            assert_eq!(run(&args).0, 0);
            f
        })
        .collect();
    let out = dir.path().join("p.jsonl");
    let again = dir.path().join("q.jsonl");
    for file in [&out, &again] {
        let (code, stdout, stderr) = run(&["connect", p(&ends[0]), p(&ends[1]), "--target", p(&t), "--out", p(file)]);
        assert_eq!(code, 0, "{stdout}{stderr}");
        assert!(stdout.contains("valid: true"));
    }
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());

    let (header, path) = io::read_path(&out).unwrap();
    assert_eq!(header.samples, path.len());
    let f0 = io::read_frame(&ends[0]).unwrap();
    let f1 = io::read_frame(&ends[1]).unwrap();
    let check = fiberframe_core::validate_path_between(&path, &f0, &f1, header.options.path_tol, header.options.delta_abs);
    assert!(check.passed(), "{check:?}");

    let other = dir.path().join("o.json");
    let args = ["construct", "--lambda", "3", "1", "--r", "1", "1", "1", "1", "--out", p(&other), "-q"];
    assert_eq!(run(&args).0, 0);
    let (code, stdout, stderr) = run(&["connect", p(&ends[0]), p(&other), "--target", p(&t)]);
    assert_eq!(code, 1);
    assert!(stderr.contains("end endpoint is off the fiber"), "{stderr}");
    assert!(!stdout.contains("samples"));
}

#[test]
fn equiv_examples() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = seeded(11);
    let f = FrameMatrix::new(gaussian_matrix(&mut rng, 3, 5)).unwrap();
    let u = fiberframe_core::sampling::haar_unitary(&mut rng, 3);
    let a = write_frame(dir.path(), "a.json", &f);
    let b = write_frame(dir.path(), "b.json", &f.left_mul(&u).unwrap());
    let c = write_frame(dir.path(), "c.json", &FrameMatrix::new(gaussian_matrix(&mut rng, 3, 5)).unwrap());

    let (code, stdout, _) = run(&["equiv", p(&a), p(&b), "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["report"]["verdict"], "equivalent");
    assert!(v["report"]["residual"].as_f64().unwrap() <= 1e-8);

    let (code, stdout, _) = run(&["equiv", p(&a), p(&c)]);
    assert_eq!(code, 1);
    assert!(stdout.contains("not equivalent"));

    let (_, stdout, _) = run(&["equiv", p(&a), p(&a), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let back: io::ComplexJson = serde_json::from_value(v["report"]["U"].clone()).unwrap();
    assert!((&back.to_mat().unwrap() - &CMat::identity(3)).norm() < 1e-12);

    let short = write_frame(dir.path(), "s.json", &FrameMatrix::new(gaussian_matrix(&mut rng, 3, 4)).unwrap());
    assert_eq!(run(&["equiv", p(&a), p(&short)]).0, 2);
}

#[test]
fn argument_errors_are_input_errors() {
    assert_eq!(run(&["construct", "--r", "1"]).0, 2);
    assert_eq!(run(&["check", "x.json", "--tol", "-1"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    let (code, _, err) = run(&["construct", "--lambda", "1", "--r", "1", "--out", "/nonexistent/dir/f.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("does not exist"));
}

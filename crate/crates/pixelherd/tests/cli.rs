//! End-to-end tests of the run orchestrator and its artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use pixelherd::pgm::{read_pgm, write_pgm};
use pixelherd::runner::{run, RunConfig, RunError, SolverKind};
use pixelherd::ImageGrid;

fn write_uniform_pgm(dir: &Path, value: u8) -> PathBuf {
    let img = ImageGrid::constant(8, 8, value as f64 / 255.0).unwrap();
    let path = dir.join("uniform.pgm");
    fs::write(&path, write_pgm(&img)).unwrap();
    path
}

fn write_plateau_pgm(dir: &Path, w: usize, h: usize) -> PathBuf {
    let mut values = Vec::with_capacity(w * h);
    for j in 0..h {
        for i in 0..w {
            let base: f64 = if i < w / 2 { 0.25 } else { 0.75 };
            let wobble = 0.03 * (((i * 31 + j * 17) % 7) as f64 / 6.0 - 0.5);
            values.push((base + wobble).clamp(0.0, 1.0));
        }
    }
    let img = ImageGrid::new(w, h, values).unwrap();
    let path = dir.join("plateau.pgm");
    fs::write(&path, write_pgm(&img)).unwrap();
    path
}

fn artifact_names() -> [&'static str; 5] {
    [
        "final.pgm",
        "controls.csv",
        "cost_history.csv",
        "pixels.csv",
        "clusters.txt",
    ]
}

#[test]
fn uniform_image_passes_through_both_solvers() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_uniform_pgm(tmp.path(), 97);
    for (solver, name) in [(SolverKind::Dal, "dal"), (SolverKind::Admm, "admm")] {
        let out_dir = tmp.path().join(name);
        let mut cfg = RunConfig::new(input.clone(), out_dir.clone(), solver, 1000.0);
        cfg.horizon = 2.5; // 10 steps; a uniform image converges instantly
        let summary = run(&cfg).unwrap();
        assert_eq!(summary.clusters, 1);

        let final_bytes = fs::read(out_dir.join("final.pgm")).unwrap();
        let input_bytes = fs::read(&input).unwrap();
        assert_eq!(final_bytes, input_bytes, "{name}: output differs from input");

        let clusters = fs::read_to_string(out_dir.join("clusters.txt")).unwrap();
        assert!(clusters.starts_with("count: 1\n"), "{clusters}");
        for artifact in artifact_names() {
            assert!(out_dir.join(artifact).exists(), "{name}: missing {artifact}");
        }
    }
}

#[test]
fn dt_must_divide_the_horizon() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_uniform_pgm(tmp.path(), 10);
    let mut cfg = RunConfig::new(input, tmp.path().join("out"), SolverKind::Dal, 100.0);
    cfg.horizon = 1.0;
    cfg.dt = 0.3;
    match run(&cfg) {
        Err(RunError::Config(msg)) => assert!(msg.contains("divide"), "{msg}"),
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn missing_input_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig::new(
        tmp.path().join("nope.pgm"),
        tmp.path().join("out"),
        SolverKind::Dal,
        100.0,
    );
    match run(&cfg) {
        Err(err @ RunError::Io(_)) => assert_eq!(err.exit_code(), 3),
        other => panic!("expected an i/o error, got {other:?}"),
    }
}

#[test]
fn corrupt_input_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.pgm");
    fs::write(&path, b"P7\n2 2\n255\n....").unwrap();
    let cfg = RunConfig::new(path, tmp.path().join("out"), SolverKind::Dal, 100.0);
    assert!(matches!(run(&cfg), Err(RunError::Io(_))));
}

#[test]
fn controls_csv_has_one_row_per_step_inside_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_plateau_pgm(tmp.path(), 12, 12);
    let out_dir = tmp.path().join("out");
    let mut cfg = RunConfig::new(input, out_dir.clone(), SolverKind::Dal, 2000.0);
    cfg.horizon = 5.0; // 20 steps
    cfg.max_iters = 8;
    run(&cfg).unwrap();

    let controls = fs::read_to_string(out_dir.join("controls.csv")).unwrap();
    let rows: Vec<&str> = controls.lines().collect();
    assert_eq!(rows[0], "t,eps_x,eps_c");
    assert_eq!(rows.len(), 1 + 20);
    for row in &rows[1..] {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 3);
        assert!(cols[1] >= cfg.eps_min && cols[1] <= cfg.eps_max);
        assert!(cols[2] >= cfg.eps_min && cols[2] <= cfg.eps_max);
    }

    let pixels = fs::read_to_string(out_dir.join("pixels.csv")).unwrap();
    assert_eq!(pixels.lines().count(), 1 + 12 * 12);
    assert_eq!(pixels.lines().next().unwrap(), "x,y,c_initial,c_final");
}

#[test]
fn identical_configs_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_plateau_pgm(tmp.path(), 12, 12);

    let mut outputs: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for (label, threads) in [("a1", 1), ("b1", 1), ("a8", 8), ("b8", 8)] {
        let out_dir = tmp.path().join(label);
        let mut cfg = RunConfig::new(input.clone(), out_dir.clone(), SolverKind::Admm, 1500.0);
        cfg.horizon = 5.0;
        cfg.max_iters = 5;
        cfg.max_outer = 3;
        cfg.threads = threads;
        run(&cfg).unwrap();
        let mut files = Vec::new();
        for name in artifact_names() {
            files.push((name.to_string(), fs::read(out_dir.join(name)).unwrap()));
        }
        outputs.push(files);
    }
    for other in &outputs[1..] {
        assert_eq!(&outputs[0], other, "artifacts differ between runs");
    }
}

#[test]
fn final_image_round_trips_through_the_decoder() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_plateau_pgm(tmp.path(), 10, 8);
    let out_dir = tmp.path().join("out");
    let mut cfg = RunConfig::new(input, out_dir.clone(), SolverKind::Dal, 500.0);
    cfg.horizon = 2.5;
    cfg.max_iters = 4;
    run(&cfg).unwrap();
    let decoded = read_pgm(&fs::read(out_dir.join("final.pgm")).unwrap()).unwrap();
    assert_eq!(decoded.width(), 10);
    assert_eq!(decoded.height(), 8);
}

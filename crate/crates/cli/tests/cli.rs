use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use quaddec::io::read_obj;
use tempfile::TempDir;

fn quaddec(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quaddec"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = quaddec(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).expect("stdout is valid JSON")
}

fn cube(dir: &TempDir) -> PathBuf {
    ok(&["synth", "subdivided-cube", "6", "-o", "cube.obj"], dir.path());
    dir.path().join("cube.obj")
}

#[test]
fn synth_dense_cube_has_1014_quads() {
    let dir = TempDir::new().unwrap();
    ok(&["synth", "subdivided-cube", "13", "-o", "c.obj"], dir.path());
    let m = read_obj(dir.path().join("c.obj")).unwrap();
    assert_eq!((m.quad_count(), m.tri_count()), (1014, 0));
}

#[test]
fn synth_grid_to_stdout() {
    let dir = TempDir::new().unwrap();
    let text = ok(&["synth", "grid", "2", "1"], dir.path());
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 2);
}

#[test]
fn decimate_half_hits_target_within_one_collapse() {
    let dir = TempDir::new().unwrap();
    cube(&dir);
    let report = json(&ok(&["decimate", "cube.obj", "-o", "out.obj", "--ratio", "0.5"], dir.path()));
    let target = report["target_total_triangles"].as_u64().unwrap();
    let total = report["total_triangles"].as_u64().unwrap();
    assert_eq!(target, 216);
    assert!(total <= target && total + 4 >= target, "total {total}");
    assert_eq!(report["reached_target"], true);
    let m = read_obj(dir.path().join("out.obj")).unwrap();
    assert_eq!(m.total_triangle_count() as u64, total);
}

#[test]
fn ratio_one_is_identity() {
    let dir = TempDir::new().unwrap();
    cube(&dir);
    ok(&["decimate", "cube.obj", "-o", "same.obj", "--ratio", "1.0"], dir.path());
    let a = std::fs::read_to_string(dir.path().join("cube.obj")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("same.obj")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn decreasing_ratios_give_decreasing_totals() {
    let dir = TempDir::new().unwrap();
    cube(&dir);
    let totals: Vec<u64> = ["0.5", "0.25", "0.1"]
        .iter()
        .map(|r| {
            let rep = json(&ok(&["decimate", "cube.obj", "-o", "o.obj", "--ratio", r], dir.path()));
            rep["total_triangles"].as_u64().unwrap()
        })
        .collect();
    assert!(totals[0] > totals[1] && totals[1] > totals[2], "{totals:?}");
}

#[test]
fn pipeline_is_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    cube(&dir);
    let run = |name: &str| {
        let report = ok(&["decimate", "cube.obj", "-o", name, "--ratio", "0.3"], dir.path());
        (report.replace(name, ""), std::fs::read(dir.path().join(name)).unwrap())
    };
    assert_eq!(run("a.obj"), run("b.obj"));
    let m1 = ok(&["metrics", "cube.obj", "a.obj", "--samples", "2000"], dir.path());
    let m2 = ok(&["metrics", "cube.obj", "a.obj", "--samples", "2000"], dir.path());
    assert_eq!(m1, m2);
}

#[test]
fn metrics_same_file_is_zero() {
    let dir = TempDir::new().unwrap();
    cube(&dir);
    let rep = json(&ok(&["metrics", "cube.obj", "cube.obj", "--samples", "1000"], dir.path()));
    assert_eq!(rep["chamfer"], 0.0);
    assert_eq!(rep["hausdorff"], 0.0);
}

#[test]
fn animated_metrics_one_row_per_frame() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["synth", "skinned-cylinder", "12", "12", "2", "--skin-out", "c.json", "-o", "c.obj"], d);
    ok(
        &["decimate", "c.obj", "-o", "o.obj", "--ratio", "0.5", "--skin", "c.json", "--skin-out", "o.json"],
        d,
    );
    let rows = json(&ok(
        &["metrics", "c.obj", "o.obj", "--skin", "c.json", "--skin-b", "o.json", "--frames", "50", "--samples", "500"],
        d,
    ));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 50);
    assert_eq!(rows[0]["frame"], "bend_000");
    let csv = ok(
        &["metrics", "c.obj", "o.obj", "--skin", "c.json", "--skin-b", "o.json", "--frames", "3", "--samples", "500", "--csv"],
        d,
    );
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn metrics_rejects_mismatched_skeletons() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["synth", "skinned-cylinder", "8", "4", "2", "--skin-out", "a.json", "-o", "a.obj"], d);
    ok(&["synth", "skinned-cylinder", "8", "4", "3", "--skin-out", "b.json", "-o", "b.obj"], d);
    let out = quaddec(&["metrics", "a.obj", "b.obj", "--skin", "a.json", "--skin-b", "b.json", "--samples", "100"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatched skeletons"));
}

#[test]
fn symmetry_has_one_row_per_edge() {
    let dir = TempDir::new().unwrap();
    let path = cube(&dir);
    let csv = ok(&["symmetry", "cube.obj", "--delta", "0.001"], dir.path());
    let m = read_obj(path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("lo,hi,weight"));
    assert_eq!(lines.count(), m.edge_count());
}

#[test]
fn unreachable_target_exits_2_with_partial_output() {
    let dir = TempDir::new().unwrap();
    cube(&dir);
    let out = quaddec(&["decimate", "cube.obj", "-o", "p.obj", "--target-tris", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let rep = json(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rep["reached_target"], false);
    assert!(read_obj(dir.path().join("p.obj")).unwrap().face_count() > 0);
}

#[test]
fn errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let missing = quaddec(&["decimate", "missing.obj", "-o", "x.obj", "--ratio", "0.5"], d);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("missing.obj"));
    cube(&dir);
    let unknown = quaddec(&["decimate", "cube.obj", "-o", "x.obj", "--ratio", "0.5", "--bogus"], d);
    assert_eq!(unknown.status.code(), Some(1));
    let bad_ratio = quaddec(&["decimate", "cube.obj", "-o", "x.obj", "--ratio", "1.5"], d);
    assert_eq!(bad_ratio.status.code(), Some(1));
}

#[test]
fn help_lists_every_subcommand() {
    let dir = TempDir::new().unwrap();
    let text = ok(&["--help"], dir.path());
    for cmd in ["decimate", "metrics", "symmetry", "synth"] {
        assert!(text.contains(cmd));
    }
    let dec = ok(&["decimate", "--help"], dir.path());
    for flag in [
        "--ratio",
        "--target-tris",
        "--eps-abs",
        "--lambda-sym",
        "--lambda-joint",
        "--sym-delta",
        "--no-recency",
        "--original-qem",
        "--edge-weight-mode",
        "--skin",
        "--report",
        "2·quads + triangles",
    ] {
        assert!(dec.contains(flag), "missing {flag}");
    }
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use isograph::fixtures::{two_spheres, unit_sphere};
use isograph::mesh_io::{write_field, FieldEncoding};

fn isograph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isograph"))
        .args(args)
        .env_remove("ISOGRAPH_THREADS")
        .output()
        .expect("run isograph")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn sphere_file(dir: &Path, n: usize) -> PathBuf {
    let (part, field) = unit_sphere(n).unwrap();
    let path = dir.join("sphere.isog");
    write_field(&path, &field, &part, FieldEncoding::Binary).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn extract_with_volume_solve_attains_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let field = sphere_file(dir.path(), 24);
    let out = dir.path().join("out.ply");
    let o = isograph(&["extract", s(&field), "-o", s(&out), "--solve-volume", "--eps", "1e-9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let residual: f64 = text
        .split_whitespace()
        .find_map(|t| t.strip_prefix("residual="))
        .expect("residual in summary")
        .parse()
        .unwrap();
    assert!(residual.abs() < 1e-9, "{text}");
    assert!(text.contains("attained=true"));
    assert!(text.contains("components=1"));
    assert!(std::fs::read(&out).unwrap().starts_with(b"ply\n"));
}

#[test]
fn iso_outside_unit_interval_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let field = sphere_file(dir.path(), 8);
    let out = dir.path().join("out.obj");
    for iso in ["1.5", "0", "-0.2"] {
        let o = isograph(&["extract", s(&field), "-o", s(&out), "--iso", iso]);
        assert_eq!(o.status.code(), Some(2), "iso {iso}");
    }
}

#[test]
fn curvature_requires_ply() {
    let dir = tempfile::tempdir().unwrap();
    let field = sphere_file(dir.path(), 8);
    let out = dir.path().join("out.obj");
    let o = isograph(&["extract", s(&field), "-o", s(&out), "--curvature"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.obj");
    let o = isograph(&["extract", s(&dir.path().join("nope.isog")), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let field = sphere_file(dir.path(), 20);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}.ply"));
        let o = isograph(&["--threads", threads, "extract", s(&field), "-o", s(&out), "--curvature"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(&out).unwrap());
    }
    let env_out = dir.path().join("env.ply");
    let o = Command::new(env!("CARGO_BIN_EXE_isograph"))
        .args(["extract", s(&field), "-o", s(&env_out), "--curvature"])
        .env("ISOGRAPH_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    outputs.push(std::fs::read(&env_out).unwrap());
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let field = sphere_file(dir.path(), 12);
    let cfg = dir.path().join("isograph.conf");
    std::fs::write(&cfg, "# defaults\niso = 0.4\nformat = obj\n").unwrap();
    let out = dir.path().join("mesh.out");
    let o = isograph(&["--config", s(&cfg), "extract", s(&field), "-o", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("iso=0.4"));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# isograph ") && text.contains("iso=0.4"));
}

#[test]
fn stats_reports_components() {
    let dir = tempfile::tempdir().unwrap();
    let (part, field) = two_spheres(16).unwrap();
    let path = dir.path().join("two.txt");
    write_field(&path, &field, &part, FieldEncoding::Text).unwrap();
    let o = isograph(&["stats", s(&path)]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "components 2"), "{}", stdout(&o));
}

#[test]
fn verify_passes_on_a_small_budget() {
    let o = isograph(&["verify", "--ring-trials", "2000", "--random-fields", "4"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(text.lines().any(|l| l.starts_with("PASS")));
    assert!(!text.lines().any(|l| l.starts_with("FAIL")));
}

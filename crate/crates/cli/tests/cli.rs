use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mlag(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlag"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const NONREAL: &str = "[surface]\na1 = 2.0\npsi = { abs = 1.0, arg = 0.7853981633974483 }\n";

fn grid(nx: usize, ny: usize) -> String {
    format!("[grid]\nx_min = -1.0\nx_max = 1.5\ny_min = -0.5\ny_max = 1.25\nnx = {nx}\nny = {ny}\n")
}

#[test]
fn derive_benchmark_table() {
    let d = TempDir::new().unwrap();
    let o = mlag(&["derive", "--a1", "2", "--psi", "1,0", "--json"], d.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["beta"].as_f64(), Some(4.25));
    assert!((v["k2"].as_f64().unwrap() - 0.5872098433096986).abs() < 1e-15);
    assert_eq!(v["class"], "Generic");
    assert_eq!(v["d"].as_array().unwrap().len(), 3);
}

#[test]
fn sample_two_by_two_and_determinism() {
    let d = TempDir::new().unwrap();
    let cfg = write(d.path(), "job.toml", &format!("{NONREAL}{}", grid(2, 2)));
    let a = mlag(&["sample", "--config", &cfg], d.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("x,y,re_f1,"));
    let b = mlag(&["sample", "--config", &cfg], d.path());
    assert_eq!(a.stdout, b.stdout);

    let cfg = write(d.path(), "job8.toml", &format!("{NONREAL}{}", grid(8, 5)));
    for fmt in [&["--json"][..], &[][..]] {
        let mut args = vec!["sample", "--config", &cfg, "--out", "one"];
        args.extend_from_slice(fmt);
        assert!(mlag(&args, d.path()).status.success());
        let one = std::fs::read(d.path().join("one")).unwrap();
        assert!(mlag(&args, d.path()).status.success());
        let two = std::fs::read(d.path().join("one")).unwrap();
        assert_eq!(one, two);
        assert!(!one.is_empty());
    }
    let json: serde_json::Value =
        serde_json::from_slice(&mlag(&["sample", "--config", &cfg, "--json"], d.path()).stdout).unwrap();
    assert_eq!(json["samples"].as_array().unwrap().len(), 40);
    assert_eq!(json["config"]["grid"]["nx"], 8);
}

#[test]
fn config_round_trip_through_echo() {
    let d = TempDir::new().unwrap();
    let cfg = write(
        d.path(),
        "job.toml",
        &format!("{NONREAL}{}[tolerances]\nphase = 1e-7\n[lambda]\nvalue = {{ re = 1.0, im = 0.0 }}\n", grid(3, 3)),
    );
    let a = mlag(&["derive", "--config", &cfg, "--echo-config", "--max-den", "17"], d.path());
    assert!(a.status.success());
    let echo1 = String::from_utf8(a.stderr).unwrap();
    assert!(echo1.contains("max_den = 17"));
    let cfg2 = write(d.path(), "echo.toml", &echo1);
    let b = mlag(&["derive", "--config", &cfg2, "--echo-config"], d.path());
    assert!(b.status.success());
    assert_eq!(echo1, String::from_utf8(b.stderr).unwrap());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_code_contract() {
    let d = TempDir::new().unwrap();
    let code = |args: &[&str]| mlag(args, d.path()).status.code().unwrap();
    // Degenerate classes.
    assert_eq!(code(&["derive", "--a1", "2", "--psi", "0,0"]), 3);
    assert_eq!(code(&["derive", "--a1", "1", "--psi", "1,0"]), 3);
    assert_eq!(code(&["classify", "--a1", "2", "--psi", "0,1", "--lambda", "1,0"]), 3);
    assert_eq!(code(&["sample", "--a1", "2", "--psi", "1,0", "--lambda", "0.8660254037844387,0.5"]), 3);
    // Config errors.
    let empty_grid = write(d.path(), "g.toml", &format!("{NONREAL}{}", grid(1, 4)));
    assert_eq!(code(&["sample", "--config", &empty_grid]), 2);
    let empty_sweep = write(d.path(), "s.toml", &format!("{NONREAL}[lambda]\ncount = 0\n"));
    assert_eq!(code(&["sweep", "--config", &empty_sweep]), 2);
    assert_eq!(code(&["sweep", "--a1", "2", "--psi", "1,0"]), 2);
    assert_eq!(code(&["derive", "--config", "missing.toml"]), 2);
    let bad = write(d.path(), "b.toml", "[surface\n");
    assert_eq!(code(&["derive", "--config", &bad]), 2);
    assert_eq!(code(&["derive"]), 2);
    assert_eq!(code(&["derive", "--a1", "0.5", "--psi", "1,0"]), 2);
    assert_eq!(code(&["classify", "--a1", "2", "--psi", "1,0", "--max-den", "0"]), 2);
    assert_eq!(code(&["classify", "--a1", "2", "--psi", "1,0", "--omega", "0,1"]), 2);
    assert_eq!(code(&["sample", "--config", &empty_grid, "--lambda", "2,0"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    // Verification failure.
    let quick = write(d.path(), "q.toml", &format!("{NONREAL}[verify]\nsuites = [\"iwasawa\"]\n"));
    assert_eq!(code(&["verify", "--config", &quick]), 0);
    assert_eq!(code(&["verify", "--config", &quick, "--corrupt-kappa"]), 4);
}

#[test]
fn classify_torus_benchmark() {
    let d = TempDir::new().unwrap();
    let o = mlag(&["classify", "--a1", "1", "--psi", "0.5773502691896258,0", "--json"], d.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kind"], "Torus");
    let pf = v["lattice"][0][0].as_f64().unwrap();
    assert!((pf - 2.0 * std::f64::consts::PI * 3f64.sqrt()).abs() < 1e-9);
    let o = mlag(
        &["classify", "--a1", "1", "--psi", "0.5773502691896258,0", "--omega", "1,0", "--json"],
        d.path(),
    );
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kind"], "NoPeriodFound");
}

#[test]
fn sweep_catalog() {
    let d = TempDir::new().unwrap();
    let cfg = write(d.path(), "s.toml", "[surface]\na1 = 2\npsi = [1, 0]\n[lambda]\ncount = 360\n");
    let a = mlag(&["sweep", "--config", &cfg], d.path());
    assert!(a.status.success());
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 360);
    assert_eq!(rows.iter().filter(|r| r.contains("HyperplaneDegenerateLambda")).count(), 6);
    assert_eq!(a.stdout, mlag(&["sweep", "--config", &cfg], d.path()).stdout);
    let j = mlag(&["sweep", "--config", &cfg, "--json"], d.path());
    let v: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 360);
    assert_eq!(j.stdout, mlag(&["sweep", "--config", &cfg, "--json"], d.path()).stdout);
}

#[test]
fn torus_box_gives_closed_mesh() {
    let d = TempDir::new().unwrap();
    let pf = 2.0 * std::f64::consts::PI * 3f64.sqrt();
    let derive = mlag(&["derive", "--a1", "1", "--psi", "0.5773502691896258,0", "--json"], d.path());
    let v: serde_json::Value = serde_json::from_slice(&derive.stdout).unwrap();
    let t = v["T"].as_f64().unwrap();
    let body = format!(
        "[surface]\na1 = 1.0\npsi = [0.5773502691896258, 0.0]\n[grid]\nx_min = 0.0\nx_max = {pf:?}\ny_min = 0.0\ny_max = {:?}\nnx = 13\nny = 9\n[output]\nformat = \"obj\"\nweld = true\n",
        4.0 * t
    );
    let cfg = write(d.path(), "t.toml", &body);
    let o = mlag(&["sample", "--config", &cfg], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 12 * 8);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 12 * 8);
    // A box that is not a period fails the weld.
    let cfg = write(d.path(), "u.toml", &body.replace("nx = 13", "nx = 13\n").replace(&format!("{pf:?}"), "5.0"));
    assert_eq!(mlag(&["sample", "--config", &cfg], d.path()).status.code(), Some(4));
}

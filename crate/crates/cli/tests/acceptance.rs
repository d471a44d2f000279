//! One pass/fail line per acceptance criterion. Criteria 1-8 run the core
//! suites with their pinned thresholds; criterion 9 drives the binary.

use std::path::Path;
use std::process::Command;

use mlag_core::verify::{run, Check, Status, Suite, VerifyOptions};
use tempfile::TempDir;

fn line(n: usize, suite: &str, checks: &[&Check]) -> bool {
    let failed: Vec<_> = checks.iter().filter(|c| c.status == Status::Fail).collect();
    let pass = failed.is_empty() && !checks.is_empty();
    // Worst check by residual relative to its threshold.
    let worst = checks.iter().max_by(|a, b| {
        let r = |c: &Check| if c.threshold > 0.0 { c.residual / c.threshold } else { c.residual };
        r(a).total_cmp(&r(b))
    });
    let detail = match (failed.first(), worst) {
        (Some(f), _) => format!("failed: {} residual {:e} > {:e}", f.name, f.residual, f.threshold),
        (None, Some(w)) => format!("{} checks; tightest: {} residual {:e} <= {:e}", checks.len(), w.name, w.residual, w.threshold),
        (None, None) => "no checks ran".into(),
    };
    println!("criterion {n} [suite:{suite}] {} ({detail})", if pass { "PASS" } else { "FAIL" });
    pass
}

fn mlag(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mlag"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

/// Deterministic output, config round-trip and the exit-code contract.
fn cli_criterion() -> Result<String, String> {
    let d = TempDir::new().map_err(|e| e.to_string())?;
    let dir = d.path();
    let cfg = dir.join("job.toml");
    std::fs::write(
        &cfg,
        "[surface]\na1 = 2.0\npsi = { abs = 1.0, arg = 0.7853981633974483 }\n\
         [grid]\nx_min = -1.0\nx_max = 1.0\ny_min = 0.0\ny_max = 1.5\nnx = 6\nny = 5\n\
         [lambda]\nvalue = [1.0, 0.0]\ncount = 24\n",
    )
    .map_err(|e| e.to_string())?;
    let cfg = cfg.to_string_lossy().into_owned();

    for args in [
        vec!["sample", "--config", &cfg],
        vec!["sample", "--config", &cfg, "--json"],
        vec!["sweep", "--config", &cfg],
        vec!["sweep", "--config", &cfg, "--json"],
        vec!["classify", "--config", &cfg, "--json"],
    ] {
        let a = mlag(&args, dir);
        let b = mlag(&args, dir);
        if !a.status.success() || a.stdout != b.stdout || a.stdout.is_empty() {
            return Err(format!("non-deterministic or failed: {args:?}"));
        }
    }

    let e1 = mlag(&["derive", "--config", &cfg, "--echo-config", "--tol", "1e-7"], dir);
    let echo = String::from_utf8_lossy(&e1.stderr).into_owned();
    let cfg2 = dir.join("echo.toml");
    std::fs::write(&cfg2, &echo).map_err(|e| e.to_string())?;
    let e2 = mlag(&["derive", "--config", &cfg2.to_string_lossy(), "--echo-config"], dir);
    if !e1.status.success() || String::from_utf8_lossy(&e2.stderr) != echo {
        return Err("config round-trip is not idempotent".into());
    }

    let grid1 = dir.join("g.toml");
    std::fs::write(
        &grid1,
        "[surface]\na1 = 2.0\npsi = [1.0, 0.0]\n[grid]\nx_min = 0\nx_max = 1\ny_min = 0\ny_max = 1\nnx = 1\nny = 1\n",
    )
    .map_err(|e| e.to_string())?;
    let grid1 = grid1.to_string_lossy().into_owned();
    let cases: [(&str, Vec<&str>, i32); 5] = [
        ("psi = 0", vec!["derive", "--a1", "2", "--psi", "0,0"], 3),
        ("flat a1 = |psi|^(2/3)", vec!["derive", "--a1", "1", "--psi", "1,0"], 3),
        ("hyperplane lambda", vec!["classify", "--a1", "2", "--psi", "0,1", "--lambda", "1,0"], 3),
        ("empty grid", vec!["sample", "--config", &grid1], 2),
        ("corrupted kappa", vec!["verify", "--a1", "2", "--psi", "0.7071067811865476,0.7071067811865476", "--corrupt-kappa"], 4),
    ];
    for (what, args, want) in cases {
        let got = mlag(&args, dir).status.code();
        if got != Some(want) {
            return Err(format!("{what}: exit {got:?}, expected {want}"));
        }
    }
    Ok("5 deterministic outputs, round-trip idempotent, exit codes 3/3/3/2/4".into())
}

#[test]
fn acceptance() {
    let report = run(&VerifyOptions::default(), &Suite::all()).expect("default surface is generic");
    let mut all = true;
    for (n, s) in Suite::all().into_iter().enumerate() {
        let checks: Vec<&Check> = report.checks.iter().filter(|c| c.suite == s).collect();
        all &= line(n + 1, s.name(), &checks);
    }
    match cli_criterion() {
        Ok(detail) => println!("criterion 9 [suite:cli] PASS ({detail})"),
        Err(e) => {
            println!("criterion 9 [suite:cli] FAIL ({e})");
            all = false;
        }
    }
    let secs: f64 = report.timings.iter().map(|t| t.seconds).sum();
    println!("core suites ran in {secs:.2}s");
    assert!(all, "some acceptance criteria failed");
}

use std::fmt::Write as _;

use mlag_core::immersion::{project_chart, sample_grid_with, Grid, LiftEvaluator};
use mlag_core::periodicity::{classify_cylinder, classify_torus_with, PeriodKind, PeriodVerdict};
use mlag_core::potential::{classify, eigensystem, on_circle, Regime};
use mlag_core::verify::{self, projective_distance, Status, VerifyOptions};
use mlag_core::{derive_constants, DerivedConstants, SurfaceClass, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Embedding, Format, Job, JobConfig};
use crate::output::{fmt17, pair, to_json};
use crate::CliError;

/// Tolerance for identifying opposite grid edges in a welded mesh.
pub const WELD_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Derive,
    Verify,
    Sample,
    Classify,
    Sweep,
}

/// What a command produced: the body for stdout or `--out`, an optional
/// message for stderr, and the exit code.
#[derive(Debug, Clone)]
pub struct Output {
    pub body: String,
    pub note: Option<String>,
    pub code: i32,
}

impl Output {
    fn ok(body: String) -> Self {
        Output {
            body,
            note: None,
            code: crate::EXIT_OK,
        }
    }
}

pub fn run(cmd: Command, job: &Job, echo: &JobConfig) -> Result<Output, CliError> {
    match cmd {
        Command::Derive => derive(job),
        Command::Verify => verify_cmd(job),
        Command::Sample => sample(job, echo),
        Command::Classify => classify_cmd(job),
        Command::Sweep => sweep(job, echo),
    }
}

fn json_out(job: &Job) -> bool {
    job.format == Some(Format::Json)
}

/// Constants for a surface that is generic at `λ`.
fn generic(job: &Job) -> Result<DerivedConstants, CliError> {
    let class = classify(&job.params, job.lambda);
    if class != SurfaceClass::Generic {
        return Err(CliError::degenerate(class));
    }
    Ok(derive_constants(&job.params)?)
}

fn require_circle(job: &Job) -> Result<(), CliError> {
    if !on_circle(job.lambda) {
        return Err(CliError::Config(format!("|lambda| = {} but this command needs |lambda| = 1", job.lambda.norm())));
    }
    Ok(())
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::NonReal => "nonreal",
        Regime::Real => "real",
        Regime::Hyperplane => "hyperplane",
    }
}

#[derive(Serialize)]
struct DeriveReport {
    a1: f64,
    psi: [f64; 2],
    beta: f64,
    a2: f64,
    a3: f64,
    k: f64,
    k2: f64,
    q2: f64,
    r: f64,
    #[serde(rename = "K")]
    kk: f64,
    #[serde(rename = "T")]
    t: f64,
    lambda: [f64; 2],
    class: SurfaceClass,
    regime: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<[f64; 3]>,
}

fn derive(job: &Job) -> Result<Output, CliError> {
    let c = generic(job)?;
    let d = if on_circle(job.lambda) { Some(eigensystem(&c, job.lambda)?.d) } else { None };
    let rep = DeriveReport {
        a1: c.a1,
        psi: pair(c.psi),
        beta: c.beta,
        a2: c.a2,
        a3: c.a3,
        k: c.k.k(),
        k2: c.k.parameter(),
        q2: c.q2,
        r: c.r,
        kk: c.kk,
        t: c.t,
        lambda: pair(job.lambda),
        class: SurfaceClass::Generic,
        regime: regime_name(c.regime(job.lambda)),
        d,
    };
    if json_out(job) {
        return Ok(Output::ok(to_json(&rep)));
    }
    let mut s = String::new();
    let rows = [
        ("a1", rep.a1),
        ("beta", rep.beta),
        ("a2", rep.a2),
        ("a3", rep.a3),
        ("k", rep.k),
        ("k^2", rep.k2),
        ("q^2", rep.q2),
        ("r", rep.r),
        ("K", rep.kk),
        ("T", rep.t),
    ];
    writeln!(s, "{:<8} {} {}", "psi", fmt17(rep.psi[0]), fmt17(rep.psi[1])).unwrap();
    for (k, v) in rows {
        writeln!(s, "{k:<8} {}", fmt17(v)).unwrap();
    }
    writeln!(s, "{:<8} {} {}", "lambda", fmt17(rep.lambda[0]), fmt17(rep.lambda[1])).unwrap();
    writeln!(s, "{:<8} Generic", "class").unwrap();
    writeln!(s, "{:<8} {}", "regime", rep.regime).unwrap();
    if let Some(d) = d {
        for (j, v) in d.iter().enumerate() {
            writeln!(s, "d{:<7} {}", j + 1, fmt17(*v)).unwrap();
        }
    }
    Ok(Output::ok(s))
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    passed: bool,
    checks: &'a [verify::Check],
}

fn verify_cmd(job: &Job) -> Result<Output, CliError> {
    require_circle(job)?;
    generic(job)?;
    let opts = VerifyOptions {
        params: job.params,
        lambda: job.lambda,
        seed: job.seed,
        branch: job.branch,
        lift_grid: job.lift_grid,
        geometry_grid: job.geometry_grid,
    };
    let rep = verify::run(&opts, &job.suites)?;
    let passed = rep.passed();
    let body = if json_out(job) {
        to_json(&VerifyJson {
            passed,
            checks: &rep.checks,
        })
    } else {
        let mut s = String::new();
        for c in &rep.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            writeln!(
                s,
                "{tag} [{}] {}: residual {} threshold {} ({} samples, {} skipped)",
                c.suite.name(),
                c.name,
                fmt17(c.residual),
                fmt17(c.threshold),
                c.samples,
                c.skipped
            )
            .unwrap();
        }
        writeln!(s, "{}", if passed { "all checks passed" } else { "some checks FAILED" }).unwrap();
        s
    };
    let timing: Vec<String> = rep.timings.iter().map(|t| format!("{} {:.3}s", t.suite.name(), t.seconds)).collect();
    Ok(Output {
        body,
        note: Some(format!("timings: {}", timing.join(", "))),
        code: if passed { crate::EXIT_OK } else { crate::EXIT_VERIFY },
    })
}

struct Cell {
    x: f64,
    y: f64,
    f: [C64; 3],
    w: Option<[C64; 2]>,
    e_u: f64,
}

fn cells(grid: &Grid) -> Vec<Cell> {
    grid.samples
        .iter()
        .zip(&grid.w)
        .map(|(s, &e_u)| Cell {
            x: s.x,
            y: s.y,
            f: s.f.0,
            w: project_chart(s).ok().map(|p| [p.w1, p.w2]),
            e_u,
        })
        .collect()
}

#[derive(Serialize)]
struct SampleRow {
    x: f64,
    y: f64,
    f: [[f64; 2]; 3],
    w1: [f64; 2],
    w2: [f64; 2],
    e_u: f64,
    flag: bool,
}

#[derive(Serialize)]
struct SampleJson<'a> {
    config: &'a JobConfig,
    lambda: [f64; 2],
    nx: usize,
    ny: usize,
    samples: Vec<SampleRow>,
}

const NAN2: [f64; 2] = [f64::NAN; 2];

fn sample_row(cell: &Cell) -> SampleRow {
    let w = cell.w.map(|[a, b]| [pair(a), pair(b)]).unwrap_or([NAN2, NAN2]);
    SampleRow {
        x: cell.x,
        y: cell.y,
        f: cell.f.map(pair),
        w1: w[0],
        w2: w[1],
        e_u: cell.e_u,
        flag: cell.w.is_none(),
    }
}

/// One row per grid point; chart-singular points keep their row with `NaN`
/// chart columns and `flag = 1`.
fn sample_csv(cells: &[Cell]) -> String {
    let mut s = String::from("x,y,re_f1,im_f1,re_f2,im_f2,re_f3,im_f3,re_w1,im_w1,re_w2,im_w2,e_u,flag\n");
    for cell in cells {
        let r = sample_row(cell);
        let mut cols = vec![fmt17(r.x), fmt17(r.y)];
        for p in r.f.iter().chain([&r.w1, &r.w2]) {
            cols.push(fmt17(p[0]));
            cols.push(fmt17(p[1]));
        }
        cols.push(fmt17(r.e_u));
        cols.push(u8::from(r.flag).to_string());
        s.push_str(&cols.join(","));
        s.push('\n');
    }
    s
}

fn sample(job: &Job, echo: &JobConfig) -> Result<Output, CliError> {
    require_circle(job)?;
    let c = generic(job)?;
    let spec = job.grid.ok_or_else(|| CliError::Config("sample needs a [grid] section".into()))?;
    let ev = LiftEvaluator::new(&c, job.lambda)?;
    let grid = sample_grid_with(&ev, &spec)?;
    let cells = cells(&grid);
    let body = match job.format.unwrap_or(Format::Csv) {
        Format::Csv => sample_csv(&cells),
        Format::Json => to_json(&SampleJson {
            config: echo,
            lambda: pair(job.lambda),
            nx: spec.nx,
            ny: spec.ny,
            samples: cells.iter().map(sample_row).collect(),
        }),
        Format::Obj => obj(&grid, &cells, job.embedding, job.weld)?,
    };
    let flagged = cells.iter().filter(|c| c.w.is_none()).count();
    Ok(Output {
        body,
        note: (flagged > 0).then(|| format!("{flagged} chart-singular cells flagged")),
        code: crate::EXIT_OK,
    })
}

fn obj(grid: &Grid, cells: &[Cell], embedding: Embedding, weld: bool) -> Result<String, CliError> {
    let (nx, ny) = (grid.spec.nx, grid.spec.ny);
    if weld {
        let mut worst = 0.0f64;
        for j in 0..ny {
            worst = worst.max(projective_distance(&grid.at(0, j).f, &grid.at(nx - 1, j).f));
        }
        for i in 0..nx {
            worst = worst.max(projective_distance(&grid.at(i, 0).f, &grid.at(i, ny - 1).f));
        }
        if worst > WELD_TOL {
            return Err(CliError::VerificationFailed(format!(
                "grid boundary is not projectively periodic (max distance {worst:e} > {WELD_TOL:e})"
            )));
        }
    }
    let (vx, vy) = if weld { (nx - 1, ny - 1) } else { (nx, ny) };
    let vertex = |cell: &Cell| -> Option<[f64; 3]> {
        match embedding {
            Embedding::Chart => cell.w.map(|[w1, w2]| [w1.re, w1.im, w2.re]),
            Embedding::Lift => {
                let [f1, f2, f3] = cell.f;
                let a = f1 * f3.conj();
                let b = f2 * f3.conj();
                Some([a.re, a.im, b.re])
            }
        }
    };
    let mut s = String::new();
    writeln!(s, "# mlag sample {}x{} {}", nx, ny, if weld { "closed" } else { "open" }).unwrap();
    let mut ok = vec![false; vx * vy];
    for j in 0..vy {
        for i in 0..vx {
            let v = vertex(&cells[j * nx + i]);
            ok[j * vx + i] = v.is_some();
            let [a, b, c] = v.unwrap_or([f64::NAN; 3]);
            writeln!(s, "v {} {} {}", fmt17(a), fmt17(b), fmt17(c)).unwrap();
        }
    }
    let (fx, fy) = if weld { (vx, vy) } else { (nx - 1, ny - 1) };
    for j in 0..fy {
        for i in 0..fx {
            let idx = |i: usize, j: usize| (j % vy) * vx + (i % vx);
            let quad = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
            if quad.iter().all(|&q| ok[q]) {
                writeln!(s, "f {} {} {} {}", quad[0] + 1, quad[1] + 1, quad[2] + 1, quad[3] + 1).unwrap();
            }
        }
    }
    Ok(s)
}

fn verdict_text(v: &PeriodVerdict) -> String {
    let mut s = String::new();
    writeln!(s, "verdict  {:?}", v.kind).unwrap();
    writeln!(s, "lambda   {} {}", fmt17(v.lambda.re), fmt17(v.lambda.im)).unwrap();
    if let Some(w) = v.omega {
        writeln!(s, "omega    {} {}", fmt17(w.re), fmt17(w.im)).unwrap();
    }
    if let Some([p, w]) = v.lattice {
        writeln!(s, "p_f      {}", fmt17(p.re)).unwrap();
        writeln!(s, "omega_f  {} {}", fmt17(w.re), fmt17(w.im)).unwrap();
    }
    if let Some(m) = v.m_f {
        writeln!(s, "m_f      {m}").unwrap();
    }
    for (name, c) in &v.certificates {
        writeln!(
            s,
            "cert     {name} = {}/{} (value {}, residual {})",
            c.numerator,
            c.denominator,
            fmt17(c.value),
            fmt17(c.residual)
        )
        .unwrap();
    }
    writeln!(s, "note     {}", v.note).unwrap();
    s
}

fn classify_cmd(job: &Job) -> Result<Output, CliError> {
    require_circle(job)?;
    let c = generic(job)?;
    let v = match job.omega {
        Some(w) => classify_cylinder(&c, job.lambda, w, &job.period)?,
        None => {
            let es = eigensystem(&c, job.lambda)?;
            classify_torus_with(&c, &es, &job.period)?
        }
    };
    Ok(Output::ok(if json_out(job) { to_json(&v) } else { verdict_text(&v) }))
}

#[derive(Serialize)]
struct SweepRow {
    index: usize,
    theta: f64,
    lambda: [f64; 2],
    regime: &'static str,
    verdict: String,
    p_f: f64,
    omega_f: [f64; 2],
    m_f: Option<i64>,
    ratio: Option<[i64; 2]>,
    flag: bool,
    note: String,
}

#[derive(Serialize)]
struct SweepJson<'a> {
    config: &'a JobConfig,
    rows: &'a [SweepRow],
}

fn sweep_row(c: &DerivedConstants, job: &Job, index: usize, theta: f64) -> SweepRow {
    let lambda = C64::from_polar(1.0, theta);
    let regime = c.regime(lambda);
    let mut row = SweepRow {
        index,
        theta,
        lambda: pair(lambda),
        regime: regime_name(regime),
        verdict: String::new(),
        p_f: f64::NAN,
        omega_f: [f64::NAN; 2],
        m_f: None,
        ratio: None,
        flag: false,
        note: String::new(),
    };
    if regime == Regime::Hyperplane {
        row.verdict = "HyperplaneDegenerateLambda".into();
        row.flag = true;
        return row;
    }
    let v = eigensystem(c, lambda).and_then(|es| classify_torus_with(c, &es, &job.period));
    match v {
        Ok(v) => {
            row.verdict = format!("{:?}", v.kind);
            if let Some([p, w]) = v.lattice {
                row.p_f = p.re;
                row.omega_f = pair(w);
            } else if let (PeriodKind::Cylinder, Some(w)) = (v.kind, v.omega) {
                row.p_f = w.re;
            }
            row.m_f = v.m_f;
            row.ratio = v.certificates.first().map(|(_, c)| [c.numerator, c.denominator]);
            row.note = v.note;
        }
        Err(e) => {
            row.verdict = "Error".into();
            row.flag = true;
            row.note = e.to_string();
        }
    }
    row
}

fn sweep(job: &Job, echo: &JobConfig) -> Result<Output, CliError> {
    let sw = job
        .sweep
        .ok_or_else(|| CliError::Config("sweep needs [lambda] count (and optionally arc)".into()))?;
    let surface_class = classify(&job.params, C64::from_polar(1.0, sw.angle(0) + 0.1));
    if matches!(surface_class, SurfaceClass::TotallyGeodesic | SurfaceClass::FlatClifford) {
        return Err(CliError::degenerate(surface_class));
    }
    let c = derive_constants(&job.params)?;
    let rows: Vec<SweepRow> = (0..sw.count)
        .into_par_iter()
        .map(|k| sweep_row(&c, job, k, sw.angle(k)))
        .collect();
    let flagged = rows.iter().filter(|r| r.flag).count();
    let body = match job.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&SweepJson { config: echo, rows: &rows }),
        Format::Obj => return Err(CliError::Config("sweep writes csv or json".into())),
        Format::Csv => {
            let mut s = String::from(
                "index,theta,re_lambda,im_lambda,regime,verdict,p_f,re_omega_f,im_omega_f,m_f,ratio_num,ratio_den,flag,note\n",
            );
            for r in &rows {
                let (num, den) = r.ratio.map(|[a, b]| (a.to_string(), b.to_string())).unwrap_or_default();
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},\"{}\"",
                    r.index,
                    fmt17(r.theta),
                    fmt17(r.lambda[0]),
                    fmt17(r.lambda[1]),
                    r.regime,
                    r.verdict,
                    fmt17(r.p_f),
                    fmt17(r.omega_f[0]),
                    fmt17(r.omega_f[1]),
                    r.m_f.map(|m| m.to_string()).unwrap_or_default(),
                    num,
                    den,
                    u8::from(r.flag),
                    r.note.replace('"', "'")
                )
                .unwrap();
            }
            s
        }
    };
    Ok(Output {
        body,
        note: Some(format!("{} samples, {flagged} flagged", rows.len())),
        code: crate::EXIT_OK,
    })
}

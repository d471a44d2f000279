//! Job configuration: a TOML file with sections, overridden by flags.

use std::path::Path;

use mlag_core::immersion::GridSpec;
use mlag_core::iwasawa::KappaBranch;
use mlag_core::periodicity::{PeriodOptions, PhaseRoute};
use mlag_core::verify::Suite;
use mlag_core::{SurfaceParams, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// A complex number written as `[re, im]`, `{ re, im }` or `{ abs, arg }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Pair([f64; 2]),
    Cartesian(Cartesian),
    Polar(Polar),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cartesian {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polar {
    pub abs: f64,
    pub arg: f64,
}

impl ComplexSpec {
    pub fn value(&self) -> C64 {
        match *self {
            ComplexSpec::Pair([re, im]) => C64::new(re, im),
            ComplexSpec::Cartesian(Cartesian { re, im }) => C64::new(re, im),
            ComplexSpec::Polar(Polar { abs, arg }) => C64::from_polar(abs, arg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub a1: f64,
    pub psi: ComplexSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<ComplexSpec>,
    /// Sweep sample count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Sweep arc `[θ_start, θ_end)` in radians.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arc: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_den: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Obj,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Embedding {
    /// `(Re w₁, Im w₁, Re w₂)` with `w = (F₁/F₃, F₂/F₃)`.
    #[default]
    Chart,
    /// `(Re F₁F̄₃, Im F₁F̄₃, Re F₂F̄₃)`: projectively invariant and never singular.
    Lift,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Identify opposite boundary edges of the grid in OBJ output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weld: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Embedding>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchSpec {
    Continuous,
    Principal,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suites: Option<Vec<String>>,
    /// `principal` is a debug negative control.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_branch: Option<BranchSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry_grid: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteSpec {
    Beta,
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySection {
    /// Candidate cylinder period; without it the torus test runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<ComplexSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<RouteSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifySection>,
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub a1: Option<f64>,
    pub psi: Option<[f64; 2]>,
    pub lambda: Option<[f64; 2]>,
    pub max_den: Option<i64>,
    pub tol: Option<f64>,
    pub out: Option<String>,
    pub json: bool,
    pub omega: Option<[f64; 2]>,
    pub corrupt_kappa: bool,
}

pub const DEFAULT_QUAD_TOL: f64 = 1e-11;
pub const DEFAULT_SEED: u64 = 20240601;

impl JobConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical TOML echo; `parse(echo(c)) == c`.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.a1.is_some() || o.psi.is_some() {
            let cur = self.surface.unwrap_or(SurfaceSection {
                a1: 2.0,
                psi: ComplexSpec::Pair([std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2]),
            });
            self.surface = Some(SurfaceSection {
                a1: o.a1.unwrap_or(cur.a1),
                psi: o.psi.map(ComplexSpec::Pair).unwrap_or(cur.psi),
            });
        }
        if let Some(l) = o.lambda {
            self.lambda.get_or_insert_with(Default::default).value = Some(ComplexSpec::Pair(l));
        }
        if o.max_den.is_some() || o.tol.is_some() {
            let t = self.tolerances.get_or_insert_with(Default::default);
            if o.max_den.is_some() {
                t.max_den = o.max_den;
            }
            if o.tol.is_some() {
                t.rational_tol = o.tol;
            }
        }
        if let Some(p) = &o.out {
            self.output.get_or_insert_with(Default::default).path = Some(p.clone());
        }
        if o.json {
            self.output.get_or_insert_with(Default::default).format = Some(Format::Json);
        }
        if let Some(w) = o.omega {
            self.classify.get_or_insert_with(Default::default).omega = Some(ComplexSpec::Pair(w));
        }
        if o.corrupt_kappa {
            self.verify.get_or_insert_with(Default::default).kappa_branch = Some(BranchSpec::Principal);
        }
    }

    pub fn resolve(&self) -> Result<Job, CliError> {
        let cfg = |m: String| CliError::Config(m);
        let surface = self.surface.ok_or_else(|| cfg("missing [surface] section (a1, psi)".into()))?;
        let psi = surface.psi.value();
        if !(surface.a1.is_finite() && psi.re.is_finite() && psi.im.is_finite()) {
            return Err(cfg("surface parameters must be finite".into()));
        }
        let lam_sec = self.lambda.unwrap_or_default();
        let lambda = lam_sec.value.map(|v| v.value()).unwrap_or(C64::new(1.0, 0.0));
        if !(lambda.re.is_finite() && lambda.im.is_finite()) || lambda.norm() == 0.0 {
            return Err(cfg("lambda must be finite and non-zero".into()));
        }
        let sweep = match (lam_sec.count, lam_sec.arc) {
            (None, None) => None,
            (count, arc) => {
                let count = count.unwrap_or(0);
                if count == 0 {
                    return Err(cfg("sweep needs [lambda] count >= 1".into()));
                }
                let arc = arc.unwrap_or([0.0, std::f64::consts::TAU]);
                if !(arc[0].is_finite() && arc[1].is_finite()) || arc[0] == arc[1] {
                    return Err(cfg("sweep arc must be finite with distinct endpoints".into()));
                }
                Some(Sweep { count, arc })
            }
        };
        if let Some(g) = &self.grid {
            g.validate().map_err(|e| cfg(e.to_string()))?;
        }

        let t = self.tolerances.unwrap_or_default();
        let quadrature = t.quadrature.unwrap_or(DEFAULT_QUAD_TOL);
        let defaults = PeriodOptions::default();
        let phase = t.phase.unwrap_or(defaults.phase_tol);
        let rational_tol = t.rational_tol.unwrap_or(defaults.tol);
        let max_den = t.max_den.unwrap_or(defaults.max_den);
        for (name, v) in [("quadrature", quadrature), ("phase", phase), ("rational_tol", rational_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(cfg(format!("tolerance {name} = {v} must be positive")));
            }
        }
        if max_den < 1 {
            return Err(cfg(format!("max_den = {max_den} must be at least 1")));
        }
        if rational_tol < quadrature {
            return Err(cfg(format!(
                "rational_tol = {rational_tol} must dominate the quadrature tolerance {quadrature}"
            )));
        }
        let route = match self.classify.and_then(|c| c.route) {
            Some(RouteSpec::G) => PhaseRoute::G,
            _ => PhaseRoute::Beta,
        };
        let period = PeriodOptions {
            max_den,
            tol: rational_tol,
            phase_tol: phase,
            route,
        };

        let out = self.output.clone().unwrap_or_default();
        let v = self.verify.clone().unwrap_or_default();
        let suites = match &v.suites {
            None => Suite::all().to_vec(),
            Some(list) => {
                let mut s = Vec::new();
                for name in list {
                    s.push(Suite::parse(name).ok_or_else(|| cfg(format!("unknown suite '{name}'")))?);
                }
                if s.is_empty() {
                    return Err(cfg("[verify] suites is empty".into()));
                }
                s
            }
        };
        let branch = match v.kappa_branch {
            Some(BranchSpec::Principal) => KappaBranch::PrincipalCubeRoot,
            _ => KappaBranch::Continuous,
        };
        let lift_grid = v.lift_grid.unwrap_or(64);
        let geometry_grid = v.geometry_grid.unwrap_or(12);
        if lift_grid < 2 || geometry_grid < 2 {
            return Err(cfg("verify grids need at least 2 points per side".into()));
        }
        Ok(Job {
            params: SurfaceParams::new(surface.a1, psi),
            lambda,
            sweep,
            grid: self.grid,
            quadrature,
            period,
            format: out.format,
            path: out.path,
            weld: out.weld.unwrap_or(false),
            embedding: out.embedding.unwrap_or_default(),
            seed: v.seed.unwrap_or(DEFAULT_SEED),
            suites,
            branch,
            lift_grid,
            geometry_grid,
            omega: self.classify.and_then(|c| c.omega).map(|w| w.value()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub count: usize,
    pub arc: [f64; 2],
}

impl Sweep {
    pub fn angle(&self, k: usize) -> f64 {
        self.arc[0] + (self.arc[1] - self.arc[0]) * k as f64 / self.count as f64
    }
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct Job {
    pub params: SurfaceParams,
    pub lambda: C64,
    pub sweep: Option<Sweep>,
    pub grid: Option<GridSpec>,
    pub quadrature: f64,
    pub period: PeriodOptions,
    pub format: Option<Format>,
    pub path: Option<String>,
    pub weld: bool,
    pub embedding: Embedding,
    pub seed: u64,
    pub suites: Vec<Suite>,
    pub branch: KappaBranch,
    pub lift_grid: usize,
    pub geometry_grid: usize,
    pub omega: Option<C64>,
}

/// Parses `RE,IM`.
pub fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let mut it = s.split(',');
    let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
        return Err(format!("expected RE,IM, got '{s}'"));
    };
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    Ok([p(a)?, p(b)?])
}

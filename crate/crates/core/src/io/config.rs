//! TOML run configuration.
//!
//! Every section and key is optional; omitted values take the defaults
//! below. Unknown keys are rejected.
//!
//! ```toml
//! [problem]
//! name = "cantilever"      # cantilever | mbb | distributed | box | custom
//! background = [320, 160]
//! ratio = 4
//! partition = [12, 6]
//! volume_fraction = 0.4
//!
//! [regularization]
//! p = 6
//! ks_l = 100.0
//! epsilon_factor = 2.0     # epsilon = factor * smallest background spacing
//! alpha_min = 1e-3
//!
//! [run]
//! max_iterations = 1000
//! deterministic = true
//! output_dir = "out"
//! ```
//!
//! `name = "custom"` defines the problem inline with `dim`, `lengths`,
//! `background`, `ratio`, `partition`, `volume_fraction` and the
//! `point_loads`, `tractions`, `supports`, `fixed_solid` and `fixed_void`
//! arrays of tables.

use serde::{Deserialize, Serialize};

use crate::driver::{self, LayoutRecipe, ProblemDef, RunSettings, Symmetry};
use crate::error::{Error, Result};
use crate::fea::{IntegrationRule, LoadCase, MaterialSpec, PointLoad, Region, SolverKind, SolverSettings, Support, Traction};
use crate::mesh::Aabb;
use crate::optimizer::MmaSettings;

fn config_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub layout: LayoutConfig,
    pub regularization: RegularizationConfig,
    pub material: MaterialConfig,
    pub mma: MmaConfig,
    pub solver: SolverConfig,
    pub run: RunControl,
    pub study: StudyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemConfig::default(),
            layout: LayoutConfig::default(),
            regularization: RegularizationConfig::default(),
            material: MaterialConfig::default(),
            mma: MmaConfig::default(),
            solver: SolverConfig::default(),
            run: RunControl::default(),
            study: StudyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointLoadConfig {
    pub point: [f64; 3],
    pub direction: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TractionConfig {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub direction: usize,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportConfig {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub components: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemConfig {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume_fraction: Option<f64>,
    /// Rows of background cells fixed solid along the loaded edge
    /// (distributed problem only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solid_layers: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub point_loads: Vec<PointLoadConfig>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tractions: Vec<TractionConfig>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub supports: Vec<SupportConfig>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fixed_solid: Vec<BoxConfig>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fixed_void: Vec<BoxConfig>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            name: "cantilever".into(),
            dim: None,
            lengths: None,
            background: None,
            ratio: None,
            partition: None,
            volume_fraction: None,
            solid_layers: None,
            point_loads: Vec::new(),
            tractions: Vec::new(),
            supports: Vec::new(),
            fixed_solid: Vec::new(),
            fixed_void: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_cell: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thickness: Option<f64>,
    /// Random perturbation of centers (fraction of the layout cell) and
    /// angles (fraction of a quarter turn), drawn from `run.seed`.
    pub jitter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularizationConfig {
    pub p: i32,
    pub ks_l: f64,
    pub epsilon_factor: f64,
    pub alpha_min: f64,
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        let s = RunSettings::default();
        Self { p: s.p_exp, ks_l: s.ks_l, epsilon_factor: s.epsilon_factor, alpha_min: s.alpha_min }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialConfig {
    pub e_s: f64,
    pub nu: f64,
    pub q: f64,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        let m = MaterialSpec::default();
        Self { e_s: m.e_s, nu: m.nu, q: m.q_penal }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MmaConfig {
    pub asy_init: f64,
    pub asy_incr: f64,
    pub asy_decr: f64,
    pub raa0: f64,
    pub asy_min: f64,
    pub move_fraction: f64,
    pub angle_move: f64,
    pub length_limit: f64,
    pub thickness_limit: f64,
}

impl Default for MmaConfig {
    fn default() -> Self {
        let s = RunSettings::default();
        Self {
            asy_init: s.mma.asy_init,
            asy_incr: s.mma.asy_incr,
            asy_decr: s.mma.asy_decr,
            raa0: s.mma.raa0,
            asy_min: s.mma.asy_min,
            move_fraction: s.move_fraction,
            angle_move: s.angle_move,
            length_limit: s.length_limit,
            thickness_limit: s.thickness_limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKindConfig {
    Auto,
    Direct,
    Pcg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrationConfig {
    Standard,
    CellCenters,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub kind: SolverKindConfig,
    pub tolerance: f64,
    pub max_pcg_iterations: usize,
    pub memory_budget_mb: usize,
    pub integration: IntegrationConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self {
            kind: SolverKindConfig::Auto,
            tolerance: s.tolerance,
            max_pcg_iterations: s.max_pcg_iterations,
            memory_budget_mb: s.memory_budget_bytes >> 20,
            integration: IntegrationConfig::Standard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunControl {
    pub max_iterations: usize,
    pub threshold: f64,
    /// Zero the timing columns of the history so identical runs give
    /// identical files.
    pub deterministic: bool,
    pub seed: u64,
    pub output_dir: String,
    /// Write a component snapshot every this many iterations (0 = final only).
    pub snapshot_every: usize,
    /// Re-solve the final design on the background mesh.
    pub reanalyze: bool,
}

impl Default for RunControl {
    fn default() -> Self {
        let s = RunSettings::default();
        Self {
            max_iterations: s.max_iterations,
            threshold: s.threshold,
            deterministic: false,
            seed: 0,
            output_dir: "out".into(),
            snapshot_every: 0,
            reanalyze: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    pub ratios: Vec<usize>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self { ratios: vec![1, 2, 4, 8] }
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| config_err("<input>", e.to_string()))?;
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        config_err(&path, e.into_inner().message())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn array<const N: usize, T: Copy + Default>(path: &str, v: &[T], dim: usize, fill: T) -> Result<[T; N]> {
    if v.len() != dim {
        return Err(config_err(path, format!("expected {dim} entries, found {}", v.len())));
    }
    let mut out = [fill; N];
    out[..dim].copy_from_slice(v);
    Ok(out)
}

fn aabb(b: &BoxConfig) -> Aabb {
    Aabb { lo: b.lo, hi: b.hi }
}

impl RunConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err("<output>", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.regularization;
        if r.p < 2 || r.p % 2 != 0 {
            return Err(config_err("regularization.p", format!("must be an even integer >= 2, got {}", r.p)));
        }
        if !(r.ks_l > 0.0) {
            return Err(config_err("regularization.ks_l", "must be positive"));
        }
        if !(r.epsilon_factor > 0.0) {
            return Err(config_err("regularization.epsilon_factor", "must be positive"));
        }
        if !(r.alpha_min > 0.0 && r.alpha_min < 1.0) {
            return Err(config_err("regularization.alpha_min", "must lie in (0, 1)"));
        }
        MaterialSpec::new(self.material.e_s, self.material.nu, self.material.q)
            .map_err(|e| config_err("material", e.to_string()))?;
        let m = &self.mma;
        for (name, v) in [
            ("mma.asy_init", m.asy_init),
            ("mma.asy_min", m.asy_min),
            ("mma.move_fraction", m.move_fraction),
            ("mma.angle_move", m.angle_move),
            ("mma.length_limit", m.length_limit),
            ("mma.thickness_limit", m.thickness_limit),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(name, format!("must be positive, got {v}")));
            }
        }
        if !(m.asy_incr >= 1.0) || !(m.asy_decr > 0.0 && m.asy_decr <= 1.0) {
            return Err(config_err("mma", "asy_incr must be >= 1 and asy_decr in (0, 1]"));
        }
        if !(self.solver.tolerance > 0.0) {
            return Err(config_err("solver.tolerance", "must be positive"));
        }
        if self.run.max_iterations == 0 {
            return Err(config_err("run.max_iterations", "must be at least 1"));
        }
        if !(self.run.threshold > 0.0) {
            return Err(config_err("run.threshold", "must be positive"));
        }
        if !(self.layout.jitter >= 0.0 && self.layout.jitter <= 1.0) {
            return Err(config_err("layout.jitter", "must lie in [0, 1]"));
        }
        if self.study.ratios.is_empty() || self.study.ratios.contains(&0) {
            return Err(config_err("study.ratios", "must list positive ratios"));
        }
        self.problem_def()?;
        Ok(())
    }

    /// The problem described by the `[problem]` and `[layout]` sections.
    pub fn problem_def(&self) -> Result<ProblemDef> {
        let pc = &self.problem;
        let inline_loads = !pc.point_loads.is_empty()
            || !pc.tractions.is_empty()
            || !pc.supports.is_empty()
            || !pc.fixed_solid.is_empty()
            || !pc.fixed_void.is_empty();
        let mut p = if pc.name == "custom" {
            self.custom_problem()?
        } else {
            if inline_loads || pc.dim.is_some() || pc.lengths.is_some() {
                return Err(config_err("problem", "loads, dim and lengths may only be given for name = \"custom\""));
            }
            let mut p = driver::builtin(&pc.name)?;
            if let Some(layers) = pc.solid_layers {
                if p.name != "distributed" {
                    return Err(config_err("problem.solid_layers", "only applies to the distributed problem"));
                }
                let bg = pc.background.clone().unwrap_or_else(|| p.background[..2].to_vec());
                let bg = array::<2, usize>("problem.background", &bg, 2, 1)?;
                p = driver::distributed_load(bg, p.ratio, [p.partition[0], p.partition[1]], layers, p.volume_fraction);
            }
            p
        };
        let dim = p.dim;
        if let Some(bg) = &pc.background {
            p.background = array("problem.background", bg, dim, 1)?;
            if p.name == "distributed" {
                // keep the fixed layer one background row thick per layer
                let layers = pc.solid_layers.unwrap_or(1);
                let vf = pc.volume_fraction.unwrap_or(p.volume_fraction);
                let keep = (p.ratio, p.partition);
                p = driver::distributed_load([p.background[0], p.background[1]], keep.0, [keep.1[0], keep.1[1]], layers, vf);
            }
        }
        if let Some(r) = pc.ratio {
            p.ratio = r;
        }
        if let Some(part) = &pc.partition {
            p.partition = array("problem.partition", part, dim, 1)?;
        }
        if let Some(vf) = pc.volume_fraction {
            p.volume_fraction = vf;
        }
        let l = &self.layout;
        if let Some(c) = &l.cells {
            p.layout.cells = array("layout.cells", c, dim, 1)?;
        }
        if let Some(n) = l.per_cell {
            p.layout.per_cell = n;
        }
        if let Some(f) = l.length_fraction {
            p.layout.length_fraction = f;
        }
        if l.thickness.is_some() {
            p.layout.thickness = l.thickness;
        }
        p.validate().map_err(|e| match e {
            Error::Config { path, message } => config_err(&format!("problem.{path}"), message),
            other => config_err("problem", other.to_string()),
        })?;
        Ok(p)
    }

    fn custom_problem(&self) -> Result<ProblemDef> {
        let pc = &self.problem;
        let dim = pc.dim.ok_or_else(|| config_err("problem.dim", "required for a custom problem"))?;
        if dim != 2 && dim != 3 {
            return Err(config_err("problem.dim", format!("must be 2 or 3, got {dim}")));
        }
        let need = |name: &str| config_err(&format!("problem.{name}"), "required for a custom problem");
        let lengths = array("problem.lengths", pc.lengths.as_ref().ok_or_else(|| need("lengths"))?, dim, 1.0)?;
        let background = array("problem.background", pc.background.as_ref().ok_or_else(|| need("background"))?, dim, 1)?;
        let partition = match &pc.partition {
            Some(v) => array("problem.partition", v, dim, 1)?,
            None => [1; 3],
        };
        let load = LoadCase {
            point_loads: pc
                .point_loads
                .iter()
                .map(|l| PointLoad { point: l.point, direction: l.direction, magnitude: l.magnitude })
                .collect(),
            tractions: pc
                .tractions
                .iter()
                .map(|t| Traction { region: Aabb { lo: t.lo, hi: t.hi }, direction: t.direction, density: t.density })
                .collect(),
            supports: pc
                .supports
                .iter()
                .map(|s| Support { region: Aabb { lo: s.lo, hi: s.hi }, components: s.components.clone() })
                .collect(),
            fixed_solid: pc.fixed_solid.iter().map(|b| Region::Box(aabb(b))).collect(),
            fixed_void: pc.fixed_void.iter().map(|b| Region::Box(aabb(b))).collect(),
        };
        if load.supports.is_empty() {
            return Err(config_err("problem.supports", "a custom problem needs at least one support"));
        }
        let layout = if dim == 2 {
            driver::planar_layout()
        } else {
            LayoutRecipe { cells: [4, 4, 4], per_cell: 2, length_fraction: driver::planar_layout().length_fraction, thickness: None }
        };
        Ok(ProblemDef {
            name: "custom".into(),
            dim,
            lengths,
            background,
            ratio: pc.ratio.unwrap_or(1),
            partition,
            volume_fraction: pc.volume_fraction.ok_or_else(|| need("volume_fraction"))?,
            load,
            layout,
            symmetry: Symmetry::None,
        })
    }

    /// The initial layout of `problem`, jittered by `layout.jitter` with
    /// `run.seed`.
    pub fn initial_design(&self, problem: &ProblemDef, settings: &RunSettings) -> Result<driver::Design> {
        let d = driver::layout_for(problem, settings)?;
        driver::jitter_design(&d, &problem.layout, problem.lengths, self.layout.jitter, self.run.seed)
    }

    /// Algorithm settings from the regularization, material, MMA, solver
    /// and run sections.
    pub fn run_settings(&self) -> RunSettings {
        let r = &self.regularization;
        let m = &self.mma;
        let s = &self.solver;
        RunSettings {
            p_exp: r.p,
            ks_l: r.ks_l,
            alpha_min: r.alpha_min,
            epsilon_factor: r.epsilon_factor,
            material: MaterialSpec { e_s: self.material.e_s, nu: self.material.nu, q_penal: self.material.q },
            mma: MmaSettings {
                asy_init: m.asy_init,
                asy_incr: m.asy_incr,
                asy_decr: m.asy_decr,
                raa0: m.raa0,
                asy_min: m.asy_min,
            },
            move_fraction: m.move_fraction,
            angle_move: m.angle_move,
            length_limit: m.length_limit,
            thickness_limit: m.thickness_limit,
            max_iterations: self.run.max_iterations,
            threshold: self.run.threshold,
            solver: SolverSettings {
                kind: match s.kind {
                    SolverKindConfig::Auto => SolverKind::Auto,
                    SolverKindConfig::Direct => SolverKind::Direct,
                    SolverKindConfig::Pcg => SolverKind::Pcg,
                },
                tolerance: s.tolerance,
                max_pcg_iterations: s.max_pcg_iterations,
                memory_budget_bytes: s.memory_budget_mb << 20,
                integration: match s.integration {
                    IntegrationConfig::Standard => IntegrationRule::Standard,
                    IntegrationConfig::CellCenters => IntegrationRule::CellCenters,
                },
            },
            reanalyze: self.run.reanalyze,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let s = cfg.run_settings();
        assert_eq!((s.p_exp, s.ks_l, s.alpha_min, s.epsilon_factor), (6, 100.0, 1e-3, 2.0));
        assert_eq!(s.material.q_penal, 2.0);
        assert_eq!(s.threshold, 5e-4);
        assert_eq!(s, RunSettings::default());
    }

    #[test]
    fn rejects_bad_volume_fraction() {
        let err = parse_config("[problem]\nvolume_fraction = 1.5\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "problem.volume_fraction"));
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = parse_config("[problem]\ncolour = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref path, ref message } if path == "problem.colour" && message.contains("unknown field")));
        assert!(parse_config("[extras]\n").is_err());
    }

    #[test]
    fn round_trip() {
        let text = "[problem]\nname = \"mbb\"\nbackground = [64, 32]\nratio = 2\n[layout]\njitter = 0.1\n[run]\ndeterministic = true\nseed = 7\n";
        let cfg = parse_config(text).unwrap();
        let again = parse_config(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.problem_def().unwrap().background, [64, 32, 1]);
    }

    #[test]
    fn custom_problem() {
        let text = r#"
[problem]
name = "custom"
dim = 2
lengths = [2.0, 1.0]
background = [8, 4]
volume_fraction = 0.5
point_loads = [{ point = [2.0, 0.5, 0.0], direction = 1, magnitude = -1.0 }]
supports = [{ lo = [0.0, 0.0, 0.0], hi = [0.0, 1.0, 0.0], components = [0, 1] }]
"#;
        let cfg = parse_config(text).unwrap();
        let p = cfg.problem_def().unwrap();
        assert_eq!(p.lengths, [2.0, 1.0, 1.0]);
        assert_eq!(p.load.point_loads.len(), 1);
        assert_eq!(parse_config(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn loads_need_custom() {
        let text = "[problem]\nname = \"cantilever\"\nsupports = [{ lo = [0.0, 0.0, 0.0], hi = [0.0, 1.0, 0.0], components = [0] }]\n";
        assert!(parse_config(text).is_err());
    }
}

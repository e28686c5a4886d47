//! JSON run configuration.
//!
//! Every section except `grid` may be omitted; missing keys take the documented
//! defaults and unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::integrator::{stable_dt, RunConfig};
use crate::material::{Material, Potential, PowerPair};
use crate::noise::{Interpretation, NoiseModel, Schedule, TableEntry, DEFAULT_MODE_CAP};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub grid: GridSection,
    #[serde(default)]
    pub material: MaterialSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    #[serde(rename = "Lx", default = "one")]
    pub lx: f64,
    #[serde(rename = "Ly", default = "one")]
    pub ly: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialSpec {
    Prototype,
    Custom(PowerPair),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "one")]
    pub eps: f64,
    #[serde(default = "one")]
    pub rho: f64,
    #[serde(default = "default_potential")]
    pub potential: PotentialSpec,
    /// Explicit shift `c` of `F` by `c (u - ln u)`. When absent the shift is
    /// the Stratonovich constant in Stratonovich mode and zero otherwise.
    #[serde(default)]
    pub strat: Option<f64>,
}

impl Default for MaterialSection {
    fn default() -> Self {
        Self {
            p: default_p(),
            eps: 1.0,
            rho: 1.0,
            potential: default_potential(),
            strat: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    PowerLaw,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpretationSpec {
    Ito,
    Stratonovich,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default = "default_schedule")]
    pub schedule: ScheduleKind,
    #[serde(default = "default_lambda0")]
    pub lambda0: f64,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default)]
    pub table: Vec<TableEntry>,
    #[serde(rename = "trunc_C", default = "one")]
    pub trunc_c: f64,
    #[serde(default = "default_mode_cap")]
    pub mode_cap: i64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_interpretation")]
    pub interpretation: InterpretationSpec,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            schedule: default_schedule(),
            lambda0: default_lambda0(),
            s: default_s(),
            table: Vec::new(),
            trunc_c: 1.0,
            mode_cap: DEFAULT_MODE_CAP,
            seed: 0,
            interpretation: default_interpretation(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Base step; the stability default is used when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(rename = "e_max_C", default = "default_e_max_c")]
    pub e_max_c: f64,
    #[serde(default = "default_u_floor")]
    pub u_floor: f64,
    #[serde(default = "default_max_halvings")]
    pub max_halvings: u32,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_diag_interval")]
    pub diag_interval: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            dt: None,
            t_max: default_t_max(),
            e_max_c: default_e_max_c(),
            u_floor: default_u_floor(),
            max_halvings: default_max_halvings(),
            snapshot_times: Vec::new(),
            diag_interval: default_diag_interval(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    Constant,
    CosinePerturbed,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default = "default_initial_kind")]
    pub kind: InitialKind,
    #[serde(default = "one")]
    pub base: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Snapshot file for `kind = "file"`, relative to the config file.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            kind: default_initial_kind(),
            base: 1.0,
            amplitude: default_amplitude(),
            path: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_prefix")]
    pub prefix: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            prefix: default_prefix(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_p() -> f64 {
    8.0
}
fn default_potential() -> PotentialSpec {
    PotentialSpec::Prototype
}
fn default_schedule() -> ScheduleKind {
    ScheduleKind::PowerLaw
}
fn default_lambda0() -> f64 {
    0.1
}
fn default_s() -> f64 {
    4.0
}
fn default_mode_cap() -> i64 {
    DEFAULT_MODE_CAP
}
fn default_interpretation() -> InterpretationSpec {
    InterpretationSpec::Ito
}
fn default_t_max() -> f64 {
    1e-4
}
fn default_e_max_c() -> f64 {
    100.0
}
fn default_u_floor() -> f64 {
    1e-10
}
fn default_max_halvings() -> u32 {
    20
}
fn default_diag_interval() -> u64 {
    1
}
fn default_initial_kind() -> InitialKind {
    InitialKind::CosinePerturbed
}
fn default_amplitude() -> f64 {
    0.1
}
fn default_dir() -> PathBuf {
    PathBuf::from(".")
}
fn default_prefix() -> String {
    "run".to_string()
}

/// Validated, fully resolved configuration.
#[derive(Clone, Debug)]
pub struct Config {
    pub file: ConfigFile,
    pub grid: Grid,
    pub material: Material,
    pub noise: NoiseModel,
    pub run: RunConfig,
    pub initial: Field,
    pub output_dir: PathBuf,
    pub prefix: String,
}

/// Read, parse and validate a configuration file.
pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Config::from_json(&text, base)
}

fn collect<T>(r: Result<T>, out: &mut Vec<String>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(Error::Config(v)) => {
            out.extend(v);
            None
        }
        Err(e) => {
            out.push(e.to_string());
            None
        }
    }
}

impl Config {
    /// Parse JSON text; relative paths resolve against `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Self> {
        let file: ConfigFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        Self::from_file(file, base)
    }

    /// Validate a parsed configuration, reporting every violation at once.
    pub fn from_file(file: ConfigFile, base: &Path) -> Result<Self> {
        let mut v = Vec::new();

        let grid = collect(Grid::new(file.grid.nx, file.grid.ny, file.grid.lx, file.grid.ly), &mut v);
        if let Some(g) = grid {
            if g.mesh_size() >= 1.0 {
                v.push(format!("(S) violated: mesh size h = {} must be < 1", g.mesh_size()));
            }
        }

        let m = &file.material;
        let potential = match &m.potential {
            PotentialSpec::Prototype => Potential::Prototype,
            PotentialSpec::Custom(pp) => Potential::Custom(*pp),
        };
        let material = collect(Material::new(m.p, m.eps, m.rho, potential), &mut v);

        let n = &file.noise;
        let schedule = match n.schedule {
            ScheduleKind::PowerLaw => Schedule::PowerLaw {
                lambda0: n.lambda0,
                s: n.s,
            },
            ScheduleKind::Table => Schedule::Table(n.table.clone()),
        };
        let interpretation = match n.interpretation {
            InterpretationSpec::Ito => Interpretation::Ito,
            InterpretationSpec::Stratonovich => Interpretation::Stratonovich,
        };
        let noise = collect(
            NoiseModel::new(schedule, n.trunc_c, n.mode_cap, n.seed, interpretation),
            &mut v,
        );

        let material = match (material, &noise, grid) {
            (Some(mat), Some(noise), Some(g)) => {
                let shift = match (m.strat, noise.interpretation()) {
                    (Some(c), _) => Ok(c),
                    (None, Interpretation::Stratonovich) => noise.strat_constant(g.lx(), g.ly()),
                    (None, Interpretation::Ito) => Ok(0.0),
                };
                collect(shift.and_then(|c| mat.with_strat_shift(c)), &mut v)
            }
            (mat, ..) => mat,
        };

        let initial = grid.and_then(|g| collect(initial_field(&file.initial, g, base), &mut v));

        let r = &file.run;
        let dt = match (r.dt, &initial, &material) {
            (Some(dt), ..) => dt,
            (None, Some(u), Some(mat)) => stable_dt(u, mat),
            _ => 1.0,
        };
        let run = RunConfig {
            dt,
            t_max: r.t_max,
            e_max_c: r.e_max_c,
            u_floor: r.u_floor,
            max_halvings: r.max_halvings,
            snapshot_times: r.snapshot_times.clone(),
            diag_interval: r.diag_interval,
        };
        v.extend(run.violations());
        if file.output.prefix.is_empty() || file.output.prefix.contains(['/', '\\']) {
            v.push(format!("output prefix must be a plain non-empty name, got {:?}", file.output.prefix));
        }

        match (grid, material, noise, initial) {
            (Some(grid), Some(material), Some(noise), Some(initial)) if v.is_empty() => Ok(Self {
                output_dir: base.join(&file.output.dir),
                prefix: file.output.prefix.clone(),
                file,
                grid,
                material,
                noise,
                run,
                initial,
            }),
            _ => Err(Error::Config(v)),
        }
    }
}

/// Initial film height; violations are tagged with the positivity assumption.
pub fn initial_field(init: &InitialSection, grid: Grid, base: &Path) -> Result<Field> {
    use std::f64::consts::TAU;
    let u = match init.kind {
        InitialKind::Constant => Field::constant(grid, init.base),
        InitialKind::CosinePerturbed => {
            let (lx, ly) = (grid.lx(), grid.ly());
            Field::interpolate(grid, |x, y| {
                init.base + init.amplitude * (TAU * x / lx).cos() * (TAU * y / ly).cos()
            })
        }
        InitialKind::File => {
            let rel = init
                .path
                .as_ref()
                .ok_or_else(|| Error::config("(I) violated: initial kind \"file\" needs a path"))?;
            let (u, _) = super::snapshot::read_snapshot(&base.join(rel))?;
            if *u.grid() != grid {
                return Err(Error::GridMismatch(format!(
                    "initial snapshot is {}x{} on {}x{}, config grid is {}x{} on {}x{}",
                    u.grid().nx(),
                    u.grid().ny(),
                    u.grid().lx(),
                    u.grid().ly(),
                    grid.nx(),
                    grid.ny(),
                    grid.lx(),
                    grid.ly()
                )));
            }
            u
        }
    };
    let min = u.min();
    if !(min > 0.0) || u.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::config(format!(
            "(I) violated: initial data must be finite and strictly positive, min = {min}"
        )));
    }
    Ok(u)
}

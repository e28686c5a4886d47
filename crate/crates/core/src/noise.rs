//! Truncated spectral Q-Wiener forcing on the periodic rectangle.
//!
//! The basis is the real trigonometric eigenbasis of the periodic Laplacian,
//! `g_kl(x, y) = g_k(x; Lx) g_l(y; Ly)`. Gaussian increments come from a
//! stateless counter-based generator keyed by `(seed, α, k, l, step, substep)`,
//! so the value of a mode never depends on which other modes are active.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// Noise component: `x` or `y` derivative direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X = 0,
    Y = 1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpretation {
    Ito,
    Stratonovich,
}

/// Explicit decay entry; modes not listed have zero amplitude.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub k: i64,
    pub l: i64,
    pub lambda_x: f64,
    pub lambda_y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Schedule {
    /// `λ^x_kl = λ^y_kl = λ0 (1 + k² + l²)^{-s/2}`.
    PowerLaw { lambda0: f64, s: f64 },
    Table(Vec<TableEntry>),
}

/// An active mode with its two decay coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub k: i64,
    pub l: i64,
    pub lambda_x: f64,
    pub lambda_y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    schedule: Schedule,
    trunc_c: f64,
    mode_cap: i64,
    seed: u64,
    interpretation: Interpretation,
}

pub const DEFAULT_MODE_CAP: i64 = 64;

impl NoiseModel {
    pub fn new(
        schedule: Schedule,
        trunc_c: f64,
        mode_cap: i64,
        seed: u64,
        interpretation: Interpretation,
    ) -> Result<Self> {
        let model = Self {
            schedule,
            trunc_c,
            mode_cap,
            seed,
            interpretation,
        };
        let v = model.violations();
        if v.is_empty() {
            Ok(model)
        } else {
            Err(Error::Config(v))
        }
    }

    /// Noise switched off.
    pub fn zero() -> Self {
        Self {
            schedule: Schedule::Table(Vec::new()),
            trunc_c: 1.0,
            mode_cap: 0,
            seed: 0,
            interpretation: Interpretation::Ito,
        }
    }

    /// Default power-law schedule with `s = 4`, `Ĉ = 1` and the default cap.
    pub fn power_law(lambda0: f64, seed: u64) -> Result<Self> {
        Self::new(
            Schedule::PowerLaw { lambda0, s: 4.0 },
            1.0,
            DEFAULT_MODE_CAP,
            seed,
            Interpretation::Ito,
        )
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.trunc_c > 0.0) {
            v.push(format!("(B4) violated: truncation constant must be positive, got {}", self.trunc_c));
        }
        if self.mode_cap < 0 {
            v.push(format!("mode_cap must be >= 0, got {}", self.mode_cap));
        }
        match &self.schedule {
            Schedule::PowerLaw { lambda0, s } => {
                if !(*lambda0 >= 0.0 && lambda0.is_finite()) {
                    v.push(format!("(B2) violated: lambda0 must be >= 0, got {lambda0}"));
                }
                if !(*s > 3.0) {
                    v.push(format!("(B3) violated: decay exponent s = {s} must exceed 3"));
                }
            }
            Schedule::Table(entries) => {
                for e in entries {
                    if !(e.lambda_x >= 0.0 && e.lambda_y >= 0.0)
                        || !e.lambda_x.is_finite()
                        || !e.lambda_y.is_finite()
                    {
                        v.push(format!(
                            "(B2) violated: decay coefficients of mode ({}, {}) must be finite and >= 0",
                            e.k, e.l
                        ));
                    }
                }
            }
        }
        if self.interpretation == Interpretation::Stratonovich && !self.is_symmetric() {
            v.push(
                "Stratonovich mode requires symmetric λ: λ^x = λ^y and λ_kl = λ_(-k)l = λ_k(-l)"
                    .to_string(),
            );
        }
        v
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn interpretation(&self) -> Interpretation {
        self.interpretation
    }
    pub fn mode_cap(&self) -> i64 {
        self.mode_cap
    }
    pub fn trunc_c(&self) -> f64 {
        self.trunc_c
    }

    /// Same model with another master seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// `(λ^x_kl, λ^y_kl)`.
    pub fn decay(&self, k: i64, l: i64) -> (f64, f64) {
        match &self.schedule {
            Schedule::PowerLaw { lambda0, s } => {
                let v = lambda0 * (1.0 + (k * k + l * l) as f64).powf(-s / 2.0);
                (v, v)
            }
            Schedule::Table(entries) => entries
                .iter()
                .find(|e| e.k == k && e.l == l)
                .map_or((0.0, 0.0), |e| (e.lambda_x, e.lambda_y)),
        }
    }

    /// `λ^x = λ^y` and evenness in both indices on every mode with nonzero amplitude.
    pub fn is_symmetric(&self) -> bool {
        match &self.schedule {
            Schedule::PowerLaw { .. } => true,
            Schedule::Table(entries) => entries.iter().all(|e| {
                let same = |a: (f64, f64)| a.0 == e.lambda_x && a.1 == e.lambda_y;
                e.lambda_x == e.lambda_y
                    && same(self.decay(-e.k, e.l))
                    && same(self.decay(e.k, -e.l))
            }),
        }
    }

    /// Largest admissible `|k|`, `|l|` for mesh size `h`:
    /// `floor(min(Ĉ h^{-ε/2}, cap))`.
    pub fn truncation_bound(&self, h: f64, eps: f64) -> i64 {
        let b = self.trunc_c * h.powf(-eps / 2.0);
        // Guard against `4 - 1e-15` from the power evaluation.
        let k = (b * (1.0 + 1e-12)).floor();
        (k.max(0.0) as i64).min(self.mode_cap)
    }

    /// Index pairs of the truncation set, including zero-amplitude modes.
    pub fn truncation_set(&self, h: f64, eps: f64) -> Vec<(i64, i64)> {
        let n = self.truncation_bound(h, eps);
        let mut out = Vec::with_capacity(((2 * n + 1) * (2 * n + 1)) as usize);
        for l in -n..=n {
            for k in -n..=n {
                out.push((k, l));
            }
        }
        out
    }

    /// Modes of the truncation set with some nonzero amplitude.
    pub fn active_modes(&self, grid: &Grid, eps: f64) -> Vec<Mode> {
        self.truncation_set(grid.mesh_size(), eps)
            .into_iter()
            .filter_map(|(k, l)| {
                let (lambda_x, lambda_y) = self.decay(k, l);
                (lambda_x != 0.0 || lambda_y != 0.0).then_some(Mode {
                    k,
                    l,
                    lambda_x,
                    lambda_y,
                })
            })
            .collect()
    }

    /// All modes with `|k|, |l| <= cap` (power law) or the table entries.
    pub fn all_modes(&self) -> Vec<Mode> {
        match &self.schedule {
            Schedule::PowerLaw { .. } => {
                let n = self.mode_cap;
                let mut v = Vec::new();
                for l in -n..=n {
                    for k in -n..=n {
                        let (lambda_x, lambda_y) = self.decay(k, l);
                        v.push(Mode {
                            k,
                            l,
                            lambda_x,
                            lambda_y,
                        });
                    }
                }
                v
            }
            Schedule::Table(entries) => entries
                .iter()
                .map(|e| Mode {
                    k: e.k,
                    l: e.l,
                    lambda_x: e.lambda_x,
                    lambda_y: e.lambda_y,
                })
                .collect(),
        }
    }

    /// Coefficient `C_Strat` of the Itô correction `C_Strat Δu` for
    /// symmetric schedules, summed over all modes of the model.
    pub fn strat_constant(&self, lx: f64, ly: f64) -> Result<f64> {
        if !self.is_symmetric() {
            return Err(Error::config(
                "Stratonovich mode requires symmetric λ: λ^x = λ^y and λ_kl = λ_(-k)l = λ_k(-l)",
            ));
        }
        let mut c00 = 0.0;
        let mut both = 0.0;
        let mut axis = 0.0;
        for m in self.all_modes() {
            let l2 = m.lambda_x * m.lambda_x;
            match (m.k == 0, m.l == 0) {
                (true, true) => c00 += l2,
                (false, false) => both += l2,
                _ => axis += l2,
            }
        }
        Ok((c00 + 4.0 * both + 2.0 * axis) / (lx * ly))
    }

    /// Surrogate `Σ (λx² + λy²) h^ε (|k|³ + |l|³)²` over the truncation set.
    pub fn b3star_monitor(&self, h: f64, eps: f64) -> f64 {
        self.truncation_set(h, eps)
            .into_iter()
            .map(|(k, l)| {
                let (a, b) = self.decay(k, l);
                let w = (k.abs().pow(3) + l.abs().pow(3)) as f64;
                (a * a + b * b) * h.powf(eps) * w * w
            })
            .sum()
    }
}

/// One-dimensional basis function `g_k(x; L)`.
#[inline]
pub fn basis_1d(k: i64, x: f64, l: f64) -> f64 {
    let c = (2.0 / l).sqrt();
    let w = 2.0 * PI * k.abs() as f64 * x / l;
    match k.signum() {
        0 => c / SQRT_2,
        1 => c * w.cos(),
        _ => c * w.sin(),
    }
}

/// Nodal interpolant of `g_kl` on the grid.
pub fn basis_eval(k: i64, l: i64, grid: &Grid) -> Field {
    let gx: Vec<f64> = (0..grid.nx()).map(|i| basis_1d(k, grid.x(i), grid.lx())).collect();
    let gy: Vec<f64> = (0..grid.ny()).map(|j| basis_1d(l, grid.y(j), grid.ly())).collect();
    Field::from_nodes(*grid, |i, j| gx[i] * gy[j])
}

/// Per-axis basis tables for a set of modes, used to synthesize
/// `Σ_m c_m g̃_m` in `O(K N)` via the tensor-product structure.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    grid: Grid,
    modes: Vec<Mode>,
    bound: i64,
    gx: Vec<Vec<f64>>,
    gy: Vec<Vec<f64>>,
}

impl SpectralBasis {
    pub fn new(grid: &Grid, modes: Vec<Mode>) -> Self {
        let bound = modes.iter().map(|m| m.k.abs().max(m.l.abs())).max().unwrap_or(0);
        let gx = (-bound..=bound)
            .map(|k| (0..grid.nx()).map(|i| basis_1d(k, grid.x(i), grid.lx())).collect())
            .collect();
        let gy = (-bound..=bound)
            .map(|l| (0..grid.ny()).map(|j| basis_1d(l, grid.y(j), grid.ly())).collect())
            .collect();
        Self {
            grid: *grid,
            modes,
            bound,
            gx,
            gy,
        }
    }

    /// Active modes of a model on a grid.
    pub fn for_model(model: &NoiseModel, grid: &Grid, eps: f64) -> Self {
        Self::new(grid, model.active_modes(grid, eps))
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Nodal field `Σ_m coeffs[m] g̃_m`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Field {
        debug_assert_eq!(coeffs.len(), self.modes.len());
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let width = (2 * self.bound + 1) as usize;
        // rows[l][i] = Σ_k c_kl g_k(x_i)
        let mut rows = vec![vec![0.0; nx]; width];
        let mut used = vec![false; width];
        for (m, &c) in self.modes.iter().zip(coeffs) {
            if c == 0.0 {
                continue;
            }
            let li = (m.l + self.bound) as usize;
            let gk = &self.gx[(m.k + self.bound) as usize];
            used[li] = true;
            for (r, g) in rows[li].iter_mut().zip(gk) {
                *r += c * g;
            }
        }
        let mut out = vec![0.0; nx * ny];
        for (li, row) in rows.iter().enumerate() {
            if !used[li] {
                continue;
            }
            let gl = &self.gy[li];
            for j in 0..ny {
                let w = gl[j];
                for (o, r) in out[j * nx..(j + 1) * nx].iter_mut().zip(row) {
                    *o += w * r;
                }
            }
        }
        Field::from_values(self.grid, out).expect("synthesized field matches grid")
    }
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Block key for `(seed, α, k, l, step, substep)`.
fn key(seed: u64, axis: Axis, k: i64, l: i64, step: u64, substep: u32) -> u64 {
    let mut h = mix64(seed.wrapping_add(GOLDEN));
    for w in [axis as u64, k as u64, l as u64, step, substep as u64] {
        h = mix64(h ^ w.wrapping_add(GOLDEN).wrapping_add(h << 6).wrapping_add(h >> 2));
    }
    h
}

#[inline]
fn unit_open(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal draw for the given key (Box–Muller on two keyed uniforms).
pub fn standard_normal(seed: u64, axis: Axis, k: i64, l: i64, step: u64, substep: u32) -> f64 {
    let h = key(seed, axis, k, l, step, substep);
    let u1 = unit_open(mix64(h ^ 0x5851_f42d_4c95_7f2d));
    let u2 = unit_open(mix64(h ^ 0x1405_7b7e_f767_814f));
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Uniform draw in `(0, 1)` from a stateless `(seed, counter)` stream.
pub fn counter_uniform(seed: u64, counter: u64) -> f64 {
    unit_open(mix64(mix64(seed ^ GOLDEN) ^ counter.wrapping_mul(GOLDEN)))
}

/// Brownian increments `(ΔW^x, ΔW^y)` for a list of modes.
#[derive(Clone, Debug, PartialEq)]
pub struct Increments {
    pub step: u64,
    pub substep: u32,
    pub dt: f64,
    pub dw: Vec<(f64, f64)>,
}

pub fn sample_increments(
    model: &NoiseModel,
    modes: &[Mode],
    step: u64,
    substep: u32,
    dt: f64,
) -> Increments {
    let sd = dt.sqrt();
    let seed = model.seed();
    let dw = modes
        .iter()
        .map(|m| {
            let wx = if m.lambda_x != 0.0 {
                sd * standard_normal(seed, Axis::X, m.k, m.l, step, substep)
            } else {
                0.0
            };
            let wy = if m.lambda_y != 0.0 {
                sd * standard_normal(seed, Axis::Y, m.k, m.l, step, substep)
            } else {
                0.0
            };
            (wx, wy)
        })
        .collect();
    Increments {
        step,
        substep,
        dt,
        dw,
    }
}

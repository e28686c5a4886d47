//! Euler–Maruyama time stepping with positivity-driven step halving and
//! energy-threshold stopping.

use crate::diagnostics::{energy_with_lap, entropy_h, threshold_energy, DiagRecord};
use crate::error::{Error, Result};
use crate::fem::lumped_integral;
use crate::grid::{Field, Grid};
use crate::material::Material;
use crate::noise::{sample_increments, NoiseModel, SpectralBasis};
use crate::scheme::{diffusion_apply, h_eps, Evaluation};

/// Safety factor applied to the explicit stability bound.
pub const STABILITY_SAFETY: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dt: f64,
    pub t_max: f64,
    pub e_max_c: f64,
    pub u_floor: f64,
    pub max_halvings: u32,
    pub snapshot_times: Vec<f64>,
    /// Emit a diagnostics row every this many steps (the final step always).
    pub diag_interval: u64,
}

impl RunConfig {
    pub fn new(dt: f64, t_max: f64, e_max_c: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_max,
            e_max_c,
            u_floor: 1e-10,
            max_halvings: 20,
            snapshot_times: Vec::new(),
            diag_interval: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            v.push(format!("time step dt must be positive, got {}", self.dt));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            v.push(format!("t_max must be >= 0, got {}", self.t_max));
        }
        if !(self.e_max_c > 0.0) {
            v.push(format!("threshold constant e_max_C must be positive, got {}", self.e_max_c));
        }
        if !(self.u_floor >= 0.0) {
            v.push(format!("u_floor must be >= 0, got {}", self.u_floor));
        }
        if self.diag_interval == 0 {
            v.push("diag_interval must be >= 1".to_string());
        }
        if self.snapshot_times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            v.push("snapshot times must be finite and >= 0".to_string());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

/// Spectral radius bound of the linearized drift at `u`:
/// `m_max λ (λ + F''_+ + h^ε λ²)` with `λ = 4/hx² + 4/hy²`.
pub fn drift_spectral_bound(u: &Field, mat: &Material) -> f64 {
    let g = u.grid();
    let lam = 4.0 / (g.hx() * g.hx()) + 4.0 / (g.hy() * g.hy());
    let umax = u.max();
    let fpp = u.values().iter().fold(0.0f64, |m, &v| m.max(mat.d2f_raw(v)));
    umax * umax * lam * (lam + fpp + h_eps(g, mat.eps()) * lam * lam)
}

/// Default step `0.1 * 2 / Λ` from the explicit Euler stability bound.
pub fn stable_dt(u: &Field, mat: &Material) -> f64 {
    STABILITY_SAFETY * 2.0 / drift_spectral_bound(u, mat)
}

#[derive(Clone, Debug)]
pub struct SimState {
    pub u: Field,
    pub t: f64,
    pub step: u64,
    pub stopped: bool,
    pub stop_time: Option<f64>,
    pub stop_step: Option<u64>,
    pub initial_mass: f64,
    /// Energy of `u`.
    pub energy: f64,
    /// Deterministic quantities of `u` (zeroed once stopped).
    pub eval: Evaluation,
    /// Trapezoidal time integral of the dissipation.
    pub integrated_dissipation: f64,
    /// Halvings used by the most recent step.
    pub last_halvings: u32,
}

impl SimState {
    pub fn mass_drift(&self) -> f64 {
        let m = lumped_integral(&self.u);
        ((m - self.initial_mass) / self.initial_mass).abs()
    }

    pub fn record(&self, mat: &Material) -> Result<DiagRecord> {
        DiagRecord::from_evaluation(self.t, &self.u, &self.eval, mat, self.stopped)
    }
}

/// Receives diagnostics rows and snapshots of one trajectory.
pub trait Sink {
    fn diag(&mut self, rec: &DiagRecord) -> Result<()>;
    fn snapshot(&mut self, t: f64, u: &Field) -> Result<()>;
}

/// In-memory sink.
#[derive(Clone, Debug, Default)]
pub struct MemorySink {
    pub diags: Vec<DiagRecord>,
    pub snapshots: Vec<(f64, Field)>,
}

impl Sink for MemorySink {
    fn diag(&mut self, rec: &DiagRecord) -> Result<()> {
        self.diags.push(*rec);
        Ok(())
    }
    fn snapshot(&mut self, t: f64, u: &Field) -> Result<()> {
        self.snapshots.push((t, u.clone()));
        Ok(())
    }
}

/// Sink that drops everything.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullSink;

impl Sink for NullSink {
    fn diag(&mut self, _: &DiagRecord) -> Result<()> {
        Ok(())
    }
    fn snapshot(&mut self, _: f64, _: &Field) -> Result<()> {
        Ok(())
    }
}

/// Summary of a completed trajectory.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub state: SimState,
    pub sup_r: f64,
    pub max_mass_drift: f64,
    pub total_halvings: u64,
}

/// Fixed parameters of one trajectory.
pub struct Simulator<'a> {
    cfg: &'a RunConfig,
    mat: &'a Material,
    noise: &'a NoiseModel,
    basis: SpectralBasis,
    e_max: f64,
}

impl<'a> Simulator<'a> {
    pub fn new(grid: &Grid, cfg: &'a RunConfig, mat: &'a Material, noise: &'a NoiseModel) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            mat,
            noise,
            basis: SpectralBasis::for_model(noise, grid, mat.eps()),
            e_max: threshold_energy(grid, mat, cfg.e_max_c),
        })
    }

    pub fn threshold(&self) -> f64 {
        self.e_max
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    /// State at `t = 0`; already stopped if the initial energy is over threshold.
    pub fn init(&self, u0: Field) -> Result<SimState> {
        u0.check_positive()?;
        let eval = Evaluation::new(&u0, self.mat, false)?;
        let energy = energy_with_lap(&u0, &eval.lap_u, self.mat).total;
        let mut state = SimState {
            initial_mass: lumped_integral(&u0),
            u: u0,
            t: 0.0,
            step: 0,
            stopped: false,
            stop_time: None,
            stop_step: None,
            energy,
            eval,
            integrated_dissipation: 0.0,
            last_halvings: 0,
        };
        if energy >= self.e_max {
            self.freeze(&mut state)?;
        }
        Ok(state)
    }

    fn freeze(&self, state: &mut SimState) -> Result<()> {
        state.stopped = true;
        state.stop_time = Some(state.t);
        state.stop_step = Some(state.step);
        state.eval = Evaluation::new(&state.u, self.mat, true)?;
        Ok(())
    }

    /// One Euler–Maruyama step of size at most `min(dt, dt_limit)`.
    /// Returns the accepted step size.
    pub fn step(&self, state: &mut SimState, dt_limit: f64) -> Result<f64> {
        let dt0 = self.cfg.dt.min(dt_limit);
        let next = state.step + 1;
        if state.stopped {
            state.t += dt0;
            state.step = next;
            state.last_halvings = 0;
            return Ok(dt0);
        }
        let mut halvings = 0;
        let mut dt = dt0;
        loop {
            let mut trial = state.u.clone();
            trial.axpy(dt, &state.eval.drift);
            if !self.basis.is_empty() {
                let inc = sample_increments(self.noise, self.basis.modes(), next, halvings, dt);
                trial.axpy(1.0, &diffusion_apply(&state.u, &self.basis, &inc, false));
            }
            if let Some(n) = trial.values().iter().position(|v| !v.is_finite()) {
                let (i, j) = trial.grid().ij(n);
                return Err(Error::Overflow {
                    step: next,
                    i,
                    j,
                    value: trial.values()[n],
                });
            }
            let (i, j, vmin) = trial.argmin();
            if vmin > self.cfg.u_floor {
                self.accept(state, trial, dt, halvings)?;
                return Ok(dt);
            }
            if halvings == self.cfg.max_halvings {
                return Err(Error::PositivityFailure {
                    step: next,
                    i,
                    j,
                    value: vmin,
                    halvings,
                });
            }
            halvings += 1;
            dt *= 0.5;
        }
    }

    fn accept(&self, state: &mut SimState, u: Field, dt: f64, halvings: u32) -> Result<()> {
        let eval = Evaluation::new(&u, self.mat, false)?;
        let energy = energy_with_lap(&u, &eval.lap_u, self.mat).total;
        state.integrated_dissipation += 0.5 * dt * (state.eval.dissipation() + eval.dissipation());
        state.u = u;
        state.eval = eval;
        state.energy = energy;
        state.t += dt;
        state.step += 1;
        state.last_halvings = halvings;
        if energy >= self.e_max {
            self.freeze(state)?;
        }
        Ok(())
    }

    fn r_value(&self, state: &SimState) -> Result<f64> {
        Ok(crate::diagnostics::DEFAULT_ALPHA
            + state.energy
            + crate::diagnostics::DEFAULT_KAPPA * entropy_h(&state.u)?)
    }

    /// Integrate from `u0` to `t_max`, streaming diagnostics and snapshots.
    pub fn run(&self, u0: Field, sink: &mut dyn Sink) -> Result<RunOutcome> {
        let t_max = self.cfg.t_max;
        let mut snaps: Vec<f64> = self
            .cfg
            .snapshot_times
            .iter()
            .copied()
            .filter(|&t| t <= t_max)
            .collect();
        snaps.sort_by(f64::total_cmp);
        snaps.dedup();
        let mut next_snap = 0;

        let mut state = self.init(u0)?;
        let mut sup_r = self.r_value(&state)?;
        let mut max_drift = 0.0f64;
        let mut total_halvings = 0u64;
        let mut last_diag_step = None;
        let mut last_snap_t = None;

        sink.diag(&state.record(self.mat)?)?;
        last_diag_step = last_diag_step.or(Some(0));
        while next_snap < snaps.len() && snaps[next_snap] <= state.t {
            sink.snapshot(state.t, &state.u)?;
            last_snap_t = Some(state.t);
            next_snap += 1;
        }

        while state.t < t_max {
            let target = snaps.get(next_snap).copied().unwrap_or(t_max).min(t_max);
            let limit = target - state.t;
            let clamps = limit <= self.cfg.dt;
            let dt = self.step(&mut state, limit)?;
            if clamps && dt == limit {
                state.t = target;
            }
            total_halvings += state.last_halvings as u64;
            if !state.stopped || state.stop_step == Some(state.step) {
                sup_r = sup_r.max(self.r_value(&state)?);
            }
            max_drift = max_drift.max(state.mass_drift());
            let done = state.t >= t_max;
            if state.step % self.cfg.diag_interval == 0 || done {
                sink.diag(&state.record(self.mat)?)?;
                last_diag_step = Some(state.step);
            }
            while next_snap < snaps.len() && snaps[next_snap] <= state.t {
                sink.snapshot(state.t, &state.u)?;
                last_snap_t = Some(state.t);
                next_snap += 1;
            }
        }
        if last_diag_step != Some(state.step) {
            sink.diag(&state.record(self.mat)?)?;
        }
        if last_snap_t != Some(state.t) {
            sink.snapshot(state.t, &state.u)?;
        }
        Ok(RunOutcome {
            state,
            sup_r,
            max_mass_drift: max_drift,
            total_halvings,
        })
    }
}

/// Convenience wrapper: one trajectory into a sink.
pub fn run(
    initial: Field,
    cfg: &RunConfig,
    mat: &Material,
    noise: &NoiseModel,
    sink: &mut dyn Sink,
) -> Result<RunOutcome> {
    let grid = *initial.grid();
    Simulator::new(&grid, cfg, mat, noise)?.run(initial, sink)
}

/// `dt Σ_m (λ^x_m Z^x_n(g̃_m))² + (λ^y_m Z^y_n(g̃_m))²`, the variance of a
/// one-step nodal increment at node `n`.
pub fn nodal_increment_variance(u: &Field, basis: &SpectralBasis, n: usize, dt: f64) -> f64 {
    let g = *u.grid();
    let mut v = 0.0;
    for m in basis.modes() {
        let w = crate::noise::basis_eval(m.k, m.l, &g);
        let zx = crate::scheme::z_x(u, &w).values()[n];
        let zy = crate::scheme::z_y(u, &w).values()[n];
        v += (m.lambda_x * zx).powi(2) + (m.lambda_y * zy).powi(2);
    }
    v * dt
}

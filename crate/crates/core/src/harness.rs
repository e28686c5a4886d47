//! Monte Carlo ensembles and mesh-refinement studies.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::interp::{h1_semi_error, interp_x_product_error, l2_error};
use crate::fem::ritz::ritz_projection;
use crate::fem::{continuous_eigenvalue_1d, lap, lap_eigenvalue_1d};
use crate::grid::{Field, Grid};
use crate::integrator::{NullSink, Simulator};
use crate::io::Config;
use crate::noise::NoiseModel;

/// Environment variable capping ensemble parallelism.
pub const THREADS_ENV: &str = "STFE2D_THREADS";

/// Outcome of one replica; aborts are recorded instead of propagated.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicaResult {
    pub replica: usize,
    pub seed: u64,
    pub sup_r: f64,
    pub integrated_dissipation: f64,
    pub stopped: bool,
    pub stop_time: Option<f64>,
    pub max_mass_drift: f64,
    pub t_final: f64,
    pub error: Option<String>,
}

/// Sample statistics over the replicas that completed.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSummary {
    pub n_replicas: usize,
    pub n_aborted: usize,
    pub mean_sup_r: f64,
    pub sd_sup_r: f64,
    pub max_sup_r: f64,
    /// Moment exponent used for `mean_sup_r_pow`.
    pub p_bar: f64,
    pub mean_sup_r_pow: f64,
    pub mean_dissipation: f64,
    pub stopped_fraction: f64,
    pub max_mass_drift: f64,
}

pub const REPLICA_COLUMNS: &str = "replica,seed,status,sup_R,int_diss,stopped,stop_time,mass_drift,t_final";
pub const SUMMARY_COLUMNS: &str =
    "n_replicas,n_aborted,mean_sup_R,sd_sup_R,max_sup_R,p_bar,mean_sup_R_pow,mean_int_diss,stopped_fraction,max_mass_drift";

/// Thread cap from the environment, else the number of processors.
pub fn thread_cap() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run_replica(cfg: &Config, replica: usize) -> ReplicaResult {
    let seed = cfg.noise.seed().wrapping_add(replica as u64);
    let noise: NoiseModel = cfg.noise.with_seed(seed);
    let mut out = ReplicaResult {
        replica,
        seed,
        sup_r: f64::NAN,
        integrated_dissipation: f64::NAN,
        stopped: false,
        stop_time: None,
        max_mass_drift: f64::NAN,
        t_final: f64::NAN,
        error: None,
    };
    let result = Simulator::new(&cfg.grid, &cfg.run, &cfg.material, &noise)
        .and_then(|sim| sim.run(cfg.initial.clone(), &mut NullSink));
    match result {
        Ok(o) => {
            out.sup_r = o.sup_r;
            out.integrated_dissipation = o.state.integrated_dissipation;
            out.stopped = o.state.stopped;
            out.stop_time = o.state.stop_time;
            out.max_mass_drift = o.max_mass_drift;
            out.t_final = o.state.t;
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

/// Run `n` replicas with seeds `seed + r` and reduce them (`p̄ = 1`).
pub fn mc_ensemble(cfg: &Config, n: usize) -> Result<(Vec<ReplicaResult>, EnsembleSummary)> {
    mc_ensemble_with(cfg, n, 1.0)
}

pub fn mc_ensemble_with(
    cfg: &Config,
    n: usize,
    p_bar: f64,
) -> Result<(Vec<ReplicaResult>, EnsembleSummary)> {
    if n == 0 {
        return Err(Error::config("ensemble needs at least one replica"));
    }
    if !(p_bar >= 1.0) {
        return Err(Error::config(format!("moment exponent must be >= 1, got {p_bar}")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap())
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let replicas: Vec<ReplicaResult> =
        pool.install(|| (0..n).into_par_iter().map(|r| run_replica(cfg, r)).collect());
    let summary = summarize(&replicas, p_bar);
    Ok((replicas, summary))
}

/// Reduction in replica order, so the result does not depend on scheduling.
pub fn summarize(replicas: &[ReplicaResult], p_bar: f64) -> EnsembleSummary {
    let ok: Vec<&ReplicaResult> = replicas.iter().filter(|r| r.error.is_none()).collect();
    let m = ok.len() as f64;
    let mean = |f: &dyn Fn(&ReplicaResult) -> f64| {
        if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().map(|r| f(r)).sum::<f64>() / m
        }
    };
    let mean_sup_r = mean(&|r| r.sup_r);
    let sd_sup_r = if ok.len() > 1 {
        (ok.iter().map(|r| (r.sup_r - mean_sup_r).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    let fold_max = |f: &dyn Fn(&ReplicaResult) -> f64| ok.iter().map(|r| f(r)).fold(f64::NAN, f64::max);
    EnsembleSummary {
        n_replicas: replicas.len(),
        n_aborted: replicas.len() - ok.len(),
        mean_sup_r,
        sd_sup_r,
        max_sup_r: fold_max(&|r| r.sup_r),
        p_bar,
        mean_sup_r_pow: mean(&|r| r.sup_r.powf(p_bar)),
        mean_dissipation: mean(&|r| r.integrated_dissipation),
        stopped_fraction: mean(&|r| if r.stopped { 1.0 } else { 0.0 }),
        max_mass_drift: fold_max(&|r| r.max_mass_drift),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.16e}"))
}

/// Per-replica table followed by a blank line and the one-row summary.
pub fn ensemble_csv(replicas: &[ReplicaResult], s: &EnsembleSummary) -> String {
    let mut out = String::new();
    writeln!(out, "{REPLICA_COLUMNS}").unwrap();
    for r in replicas {
        let status = match &r.error {
            None => "ok".to_string(),
            Some(e) => format!("\"abort: {}\"", e.replace('"', "'").replace('\n', " ")),
        };
        writeln!(
            out,
            "{},{},{},{:.16e},{:.16e},{},{},{:.16e},{:.16e}",
            r.replica,
            r.seed,
            status,
            r.sup_r,
            r.integrated_dissipation,
            u8::from(r.stopped),
            opt(r.stop_time),
            r.max_mass_drift,
            r.t_final
        )
        .unwrap();
    }
    writeln!(out).unwrap();
    writeln!(out, "{SUMMARY_COLUMNS}").unwrap();
    writeln!(
        out,
        "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
        s.n_replicas,
        s.n_aborted,
        s.mean_sup_r,
        s.sd_sup_r,
        s.max_sup_r,
        s.p_bar,
        s.mean_sup_r_pow,
        s.mean_dissipation,
        s.stopped_fraction,
        s.max_mass_drift
    )
    .unwrap();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StudyKind {
    Interp,
    LaplacianEig,
    Ritz,
    NoiseB3star,
}

impl StudyKind {
    pub const ALL: [StudyKind; 4] = [Self::Interp, Self::LaplacianEig, Self::Ritz, Self::NoiseB3star];

    pub fn name(self) -> &'static str {
        match self {
            Self::Interp => "interp",
            Self::LaplacianEig => "laplacian_eig",
            Self::Ritz => "ritz",
            Self::NoiseB3star => "noise_b3star",
        }
    }
}

impl FromStr for StudyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config(format!("unknown refinement study {s:?}")))
    }
}

/// Errors of one metric per level with fitted log-log slopes.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRates {
    pub metric: String,
    pub errors: Vec<f64>,
    /// `log(e_{i-1}/e_i) / log(h_{i-1}/h_i)` for consecutive levels.
    pub pairwise: Vec<f64>,
    /// Least-squares slope of `log e` against `log h`.
    pub fitted: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateTable {
    pub kind: StudyKind,
    pub levels: Vec<usize>,
    pub h: Vec<f64>,
    pub metrics: Vec<MetricRates>,
}

pub const RATE_COLUMNS: &str = "kind,metric,n,h,error,slope";

impl RateTable {
    pub fn metric(&self, name: &str) -> Option<&MetricRates> {
        self.metrics.iter().find(|m| m.metric == name)
    }

    /// Long-format rows; the `fit` row carries the least-squares slope.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for m in &self.metrics {
            for (i, (&n, &h)) in self.levels.iter().zip(&self.h).enumerate() {
                let slope = if i == 0 {
                    String::new()
                } else {
                    format!("{:.16e}", m.pairwise[i - 1])
                };
                writeln!(out, "{},{},{n},{h:.16e},{:.16e},{slope}", self.kind.name(), m.metric, m.errors[i])
                    .unwrap();
            }
            writeln!(out, "{},{},fit,,,{:.16e}", self.kind.name(), m.metric, m.fitted).unwrap();
        }
        out
    }
}

/// Full rate CSV for several tables.
pub fn rate_csv(tables: &[RateTable]) -> String {
    let mut out = format!("{RATE_COLUMNS}\n");
    for t in tables {
        out.push_str(&t.csv_rows());
    }
    out
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn rates(metric: &str, h: &[f64], errors: Vec<f64>) -> MetricRates {
    let lh: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let le: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let pairwise = (1..h.len()).map(|i| (le[i] - le[i - 1]) / (lh[i] - lh[i - 1])).collect();
    MetricRates {
        metric: metric.to_string(),
        fitted: ls_slope(&lh, &le),
        pairwise,
        errors,
    }
}

/// Default refinement levels `n = 8, 16, ..., 128` on the unit square.
pub const DEFAULT_LEVELS: [usize; 5] = [8, 16, 32, 64, 128];

/// Run one refinement study on unit squares with `n x n` nodes per level.
pub fn refinement_study(kind: StudyKind, levels: &[usize]) -> Result<RateTable> {
    if levels.len() < 3 {
        return Err(Error::config(format!(
            "refinement study needs at least 3 levels, got {}",
            levels.len()
        )));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("refinement levels must be strictly increasing"));
    }
    let grids = levels.iter().map(|&n| Grid::unit_square(n)).collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = grids.iter().map(|g| g.hx()).collect();
    let mut cols: Vec<(&str, Vec<f64>)> = Vec::new();
    let mut push = |name: &'static str, v: f64| match cols.iter_mut().find(|c| c.0 == name) {
        Some(c) => c.1.push(v),
        None => cols.push((name, vec![v])),
    };
    for g in &grids {
        match kind {
            StudyKind::Interp => {
                let f = |x: f64, _y: f64| (TAU * x).sin();
                let fh = Field::interpolate(*g, f);
                push("l2", l2_error(&fh, f));
                push("h1", h1_semi_error(&fh, |x, _| (TAU * (TAU * x).cos(), 0.0)));
                let a = Field::interpolate(*g, |x, y| 1.0 + 0.5 * (TAU * x).sin() * (TAU * y).cos());
                let b = Field::interpolate(*g, |x, y| 2.0 + (2.0 * TAU * x).cos() + (TAU * y).sin());
                let (e0, e1) = interp_x_product_error(&a, &b);
                push("product_l2", e0);
                push("product_dx", e1);
            }
            StudyKind::LaplacianEig => {
                let k = 1;
                let n = g.nx();
                let f = Field::from_nodes(*g, |i, _| (TAU * k as f64 * i as f64 / n as f64).cos());
                let lam_h = lap_eigenvalue_1d(k, g.hx(), g.lx());
                let residual = lap(&f).zip_map(&f, |a, b| a - lam_h * b).max_abs();
                push("eigenvalue", (lam_h - continuous_eigenvalue_1d(k, g.lx())).abs());
                push("eigenfield_residual", residual / (lam_h.abs() * f.max_abs()));
            }
            StudyKind::Ritz => {
                let v = |x: f64, y: f64| (TAU * x).sin() * (TAU * y).cos();
                let grad = |x: f64, y: f64| {
                    (TAU * (TAU * x).cos() * (TAU * y).cos(), -TAU * (TAU * x).sin() * (TAU * y).sin())
                };
                let r = ritz_projection(g, v, grad)?;
                push("l2", l2_error(&r, v));
                push("h1", h1_semi_error(&r, grad));
            }
            StudyKind::NoiseB3star => {
                let model = NoiseModel::power_law(0.1, 0)?;
                push("monitor", model.b3star_monitor(g.mesh_size(), 1.0));
            }
        }
    }
    Ok(RateTable {
        kind,
        levels: levels.to_vec(),
        metrics: cols.into_iter().map(|(name, e)| rates(name, &h, e)).collect(),
        h,
    })
}

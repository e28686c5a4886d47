//! Acceptance suite: every criterion at its stated tolerance, one line each.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stfe2d::diagnostics::{energy_h, threshold_energy};
use stfe2d::fem::{continuous_eigenvalue_1d, lap, lap_eigenvalue_1d, lumped_integral};
use stfe2d::harness::{refinement_study, StudyKind, DEFAULT_LEVELS};
use stfe2d::integrator::{stable_dt, MemorySink, RunConfig, Simulator};
use stfe2d::io::{Config, FileSink};
use stfe2d::material::Material;
use stfe2d::noise::{basis_eval, Interpretation, NoiseModel, Schedule, TableEntry};
use stfe2d::oracle::{
    apply_table, brute_force_strat_constant, chain_rule_residual, dense_drift, dense_pressure,
    dense_weak_residual, dense_z_table, ibp_residuals,
};
use stfe2d::scheme::{pressure, z_x, z_y, Evaluation};
use stfe2d::{Error, Field, Grid};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn random_field(g: Grid, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Field {
    Field::from_nodes(g, |_, _| rng.gen_range(lo..hi))
}

fn mass_conservation() -> Outcome {
    let start = Instant::now();
    let cfg = Config::from_json(r#"{"grid": {"nx": 32, "ny": 32}, "run": {"t_max": 1.0}}"#, Path::new("."))
        .expect("default config");
    let sim = Simulator::new(&cfg.grid, &cfg.run, &cfg.material, &cfg.noise).unwrap();
    let mut s = sim.init(cfg.initial.clone()).unwrap();
    let m0 = lumped_integral(&s.u);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        sim.step(&mut s, f64::INFINITY).unwrap();
        worst = worst.max(((lumped_integral(&s.u) - m0) / m0).abs());
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-10 && within(t, 10.0) && !s.stopped,
        format!("max relative mass drift {worst:.2e} over {} steps, {:.2}s", s.step, t.as_secs_f64()),
    )
}

fn ibp_identities() -> Outcome {
    let start = Instant::now();
    let g = Grid::unit_square(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = random_field(g, &mut rng, -1.0, 1.0);
        let b = random_field(g, &mut rng, -1.0, 1.0);
        let c = random_field(g, &mut rng, -1.0, 1.0);
        worst = worst.max(ibp_residuals(&a, &b, &c).max());
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-12 && within(t, 1.0),
        format!("max relative residual {worst:.2e}, {:.3}s", t.as_secs_f64()),
    )
}

fn chain_rule() -> Outcome {
    let g = Grid::unit_square(16).unwrap();
    let mat = Material::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        worst = worst.max(chain_rule_residual(&random_field(g, &mut rng, 0.05, 5.0), &mat).unwrap());
    }
    outcome(worst <= 1e-12, format!("max per-edge residual {worst:.2e}"))
}

fn dense_equivalence() -> Outcome {
    let mat = Material::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let modes = [(0i64, 0i64), (1, 0), (0, -1), (1, -1), (-2, 2)];
    let (mut wp, mut wd, mut wz, mut wr) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for n in [4usize, 6, 8] {
        let g = Grid::new(n, n, 0.9 * n as f64, 0.9 * n as f64).unwrap();
        let tables: Vec<_> = modes
            .iter()
            .map(|&(k, l)| (basis_eval(k, l, &g), dense_z_table(&g, k, l).unwrap()))
            .collect();
        for _ in 0..100 {
            let u = random_field(g, &mut rng, 0.8, 1.2);
            let p = pressure(&u, &mat, false).unwrap();
            wr = wr.max(dense_weak_residual(&u, &p, &mat).unwrap());
            wp = wp.max(p.zip_map(&dense_pressure(&u, &mat).unwrap(), |a, b| a - b).max_abs());
            let drift = Evaluation::new(&u, &mat, false).unwrap().drift;
            wd = wd.max(drift.zip_map(&dense_drift(&u, &mat).unwrap(), |a, b| a - b).max_abs());
            for (w, (tx, ty)) in &tables {
                wz = wz.max(z_x(&u, w).zip_map(&apply_table(tx, &u), |a, b| a - b).max_abs());
                wz = wz.max(z_y(&u, w).zip_map(&apply_table(ty, &u), |a, b| a - b).max_abs());
            }
        }
    }
    let worst = wp.max(wd).max(wz).max(wr);
    outcome(
        worst <= 1e-12,
        format!("pressure {wp:.2e}, weak form {wr:.2e}, drift {wd:.2e}, Z tables {wz:.2e}"),
    )
}

/// Steps of the noise-free dissipation run.
const DISSIPATION_STEPS: usize = 20_000;

fn deterministic_dissipation() -> Outcome {
    let start = Instant::now();
    let g = Grid::unit_square(32).unwrap();
    let mat = Material::default();
    let u0 = Field::interpolate(g, |x, y| {
        use std::f64::consts::TAU;
        1.0 + 0.1 * (TAU * x).cos() * (TAU * y).cos()
    });
    let cfg = RunConfig::new(stable_dt(&u0, &mat), 1.0, 1e6).unwrap();
    let noise = NoiseModel::zero();
    let sim = Simulator::new(&g, &cfg, &mat, &noise).unwrap();
    let mut s = sim.init(u0).unwrap();
    let e0 = s.energy;
    let mut prev = e0;
    let mut worst_increase = f64::NEG_INFINITY;
    for _ in 0..DISSIPATION_STEPS {
        sim.step(&mut s, f64::INFINITY).unwrap();
        worst_increase = worst_increase.max(s.energy - prev);
        prev = s.energy;
    }
    let drop = e0 - s.energy;
    let rel = (s.integrated_dissipation - drop).abs() / drop;
    let t = start.elapsed();
    outcome(
        worst_increase <= 1e-8 && rel <= 0.02 && within(t, 30.0),
        format!(
            "max per-step increase {worst_increase:.2e}, energy drop {drop:.4e}, dissipation mismatch {:.2e}, {:.2}s",
            rel,
            t.as_secs_f64()
        ),
    )
}

fn interpolation_rates() -> Outcome {
    let t = refinement_study(StudyKind::Interp, &DEFAULT_LEVELS).unwrap();
    let l2 = t.metric("product_l2").unwrap().fitted;
    let dx = t.metric("product_dx").unwrap().fitted;
    outcome(
        (1.85..=2.15).contains(&l2) && (0.85..=1.15).contains(&dx),
        format!("L2 slope {l2:.4}, derivative slope {dx:.4}"),
    )
}

fn laplacian_spectrum() -> Outcome {
    // Residual relative to |λ| ‖f‖_∞; the absolute residual grows like h^-2 times rounding.
    let mut worst: f64 = 0.0;
    let mut lh = Vec::new();
    let mut le = Vec::new();
    for &n in &DEFAULT_LEVELS {
        let g = Grid::new(n, n, 1.0, 1.0).unwrap();
        for k in [1i64, 2, 3] {
            let f = Field::from_nodes(g, |i, _| {
                (std::f64::consts::TAU * k as f64 * i as f64 / n as f64).cos()
            });
            let lam = -4.0 / (g.hx() * g.hx()) * (std::f64::consts::PI * k as f64 / n as f64).sin().powi(2);
            let r = lap(&f).zip_map(&f, |a, b| a - lam * b).max_abs();
            worst = worst.max(r / (lam.abs() * f.max_abs()));
        }
        lh.push(g.hx().ln());
        le.push((lap_eigenvalue_1d(1, g.hx(), 1.0) - continuous_eigenvalue_1d(1, 1.0)).abs().ln());
    }
    let slope = stfe2d::harness::ls_slope(&lh, &le);
    let table = refinement_study(StudyKind::LaplacianEig, &DEFAULT_LEVELS).unwrap();
    let harness_slope = table.metric("eigenvalue").unwrap().fitted;
    outcome(
        worst <= 1e-12 && (1.95..=2.05).contains(&slope) && (harness_slope - slope).abs() < 1e-12,
        format!("max relative eigenfield residual {worst:.2e}, slope {slope:.4}"),
    )
}

fn stop_and_freeze() -> Outcome {
    let g = Grid::unit_square(16).unwrap();
    let mat = Material::default();
    let mut u0 = Field::constant(g, 1.0);
    u0[(5, 9)] = 0.25;
    let e0 = energy_h(&u0, &mat).unwrap().total;
    let c = 0.5 * e0 / threshold_energy(&g, &mat, 1.0);
    let mut cfg = RunConfig::new(1e-9, 2e-8, c).unwrap();
    cfg.snapshot_times = vec![0.0, 1e-9, 5e-9, 1.5e-8];
    let noise = NoiseModel::power_law(1.0, 11).unwrap();
    let sim = Simulator::new(&g, &cfg, &mat, &noise).unwrap();
    let mut sink = MemorySink::default();
    let out = sim.run(u0.clone(), &mut sink).unwrap();
    let step1 = sink.diags.get(1).is_some_and(|d| d.stopped);
    let frozen = sink.snapshots.iter().all(|(_, u)| {
        u.values().iter().zip(u0.values()).all(|(a, b)| a.to_bits() == b.to_bits())
    });
    let rows_same = sink.diags.windows(2).all(|w| {
        let (mut a, mut b) = (w[0], w[1]);
        a.t = 0.0;
        b.t = 0.0;
        a == b
    });
    outcome(
        step1 && frozen && rows_same && out.state.stopped && sink.snapshots.len() == 5,
        format!(
            "E_h(0) = {e0:.3e} >= E_max = {:.3e}; stopped at step 1: {step1}; {} snapshots bit-identical: {frozen}",
            sim.threshold(),
            sink.snapshots.len()
        ),
    )
}

fn random_symmetric_model(rng: &mut ChaCha8Rng) -> NoiseModel {
    let r: i64 = rng.gen_range(1..=4);
    let mut entries = Vec::new();
    for k in 0..=r {
        for l in 0..=r {
            if rng.gen_bool(0.3) {
                continue;
            }
            let lam: f64 = rng.gen_range(0.0..1.0);
            let mut signs = vec![(k, l), (-k, l), (k, -l), (-k, -l)];
            signs.sort();
            signs.dedup();
            for (kk, ll) in signs {
                entries.push(TableEntry {
                    k: kk,
                    l: ll,
                    lambda_x: lam,
                    lambda_y: lam,
                });
            }
        }
    }
    NoiseModel::new(Schedule::Table(entries), 1.0, 8, 0, Interpretation::Stratonovich).unwrap()
}

fn stratonovich_constant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (lx, ly) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
        let m = random_symmetric_model(&mut rng);
        let closed = m.strat_constant(lx, ly).unwrap();
        let brute = brute_force_strat_constant(&m, lx, ly).unwrap();
        worst = worst.max((closed - brute).abs() / brute);
    }
    let asym = NoiseModel::new(
        Schedule::Table(vec![
            TableEntry {
                k: 1,
                l: 1,
                lambda_x: 0.5,
                lambda_y: 0.5,
            },
            TableEntry {
                k: -1,
                l: 1,
                lambda_x: 0.25,
                lambda_y: 0.25,
            },
        ]),
        1.0,
        8,
        0,
        Interpretation::Stratonovich,
    );
    let rejected = matches!(&asym, Err(Error::Config(v))
        if v.iter().any(|m| m.contains("Stratonovich mode requires symmetric λ")));
    outcome(
        worst <= 1e-14 && rejected,
        format!("max relative difference {worst:.2e}; asymmetric table rejected: {rejected}"),
    )
}

fn noise_law() -> Outcome {
    let start = Instant::now();
    let g = Grid::unit_square(8).unwrap();
    let mat = Material::default();
    let c = 1.3;
    let u0 = Field::constant(g, c);
    let (k, l) = (1i64, -1i64);
    let (lx, ly) = (0.02, 0.03);
    let noise = NoiseModel::new(
        Schedule::Table(vec![TableEntry {
            k,
            l,
            lambda_x: lx,
            lambda_y: ly,
        }]),
        1.0,
        8,
        0,
        Interpretation::Ito,
    )
    .unwrap();
    let dt: f64 = 1e-3;
    let cfg = RunConfig::new(dt, dt, 1e12).unwrap();
    let (tx, ty) = dense_z_table(&g, k, l).unwrap();
    let zx = apply_table(&tx, &u0);
    let zy = apply_table(&ty, &u0);
    let node = (0..g.len())
        .max_by(|&a, &b| {
            let va = (lx * zx.values()[a]).powi(2) + (ly * zy.values()[a]).powi(2);
            let vb = (lx * zx.values()[b]).powi(2) + (ly * zy.values()[b]).powi(2);
            va.total_cmp(&vb)
        })
        .unwrap();
    let sigma2 = dt * ((lx * zx.values()[node]).powi(2) + (ly * zy.values()[node]).powi(2));
    let replicas = 10_000usize;
    let mut inc = Vec::with_capacity(replicas);
    for r in 0..replicas {
        let model = noise.with_seed(r as u64);
        let sim = Simulator::new(&g, &cfg, &mat, &model).unwrap();
        let mut s = sim.init(u0.clone()).unwrap();
        sim.step(&mut s, dt).unwrap();
        inc.push(s.u.values()[node] - c);
    }
    let n = replicas as f64;
    let mean = inc.iter().sum::<f64>() / n;
    let var = inc.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = sigma2 * (2.0 / (n - 1.0)).sqrt();
    let z = (var - sigma2) / se;
    let t = start.elapsed();
    outcome(
        z.abs() <= 3.0 && sigma2 > 0.0 && within(t, 60.0),
        format!(
            "empirical variance {var:.5e} vs analytic {sigma2:.5e} ({z:+.2} SE), {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn run_to_dir(dir: &Path) -> (Vec<u8>, Vec<Vec<u8>>) {
    let cfg = Config::from_json(
        r#"{"grid": {"nx": 16, "ny": 16},
            "noise": {"lambda0": 0.2, "seed": 77},
            "run": {"t_max": 2e-8, "snapshot_times": [0.0, 5e-9, 1e-8], "diag_interval": 5}}"#,
        Path::new("."),
    )
    .unwrap();
    let sim = Simulator::new(&cfg.grid, &cfg.run, &cfg.material, &cfg.noise).unwrap();
    let mut sink = FileSink::create(dir, "det").unwrap();
    sim.run(cfg.initial.clone(), &mut sink).unwrap();
    let (diag, snaps) = sink.finish().unwrap();
    (
        std::fs::read(diag).unwrap(),
        snaps.iter().map(|p| std::fs::read(p).unwrap()).collect(),
    )
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (da, sa) = run_to_dir(a.path());
    let (db, sb) = run_to_dir(b.path());
    outcome(
        da == db && sa == sb && !sa.is_empty(),
        format!("{} diagnostic bytes, {} snapshots compared", da.len(), sa.len()),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("mass conservation", mass_conservation),
        ("integration by parts identities", ibp_identities),
        ("discrete chain rule", chain_rule),
        ("dense oracle equivalence", dense_equivalence),
        ("deterministic dissipation", deterministic_dissipation),
        ("interpolation error rates", interpolation_rates),
        ("discrete Laplacian spectrum", laplacian_spectrum),
        ("stopping and freeze", stop_and_freeze),
        ("Stratonovich constant", stratonovich_constant),
        ("nodal noise law", noise_law),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (n, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        // Written to the raw stream so the lines survive libtest output capture.
        let _ = writeln!(
            std::io::stderr(),
            "[{}] {:>2}. {:<32} {}",
            if o.pass { "PASS" } else { "FAIL" },
            n + 1,
            name,
            o.detail
        );
        if !o.pass {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

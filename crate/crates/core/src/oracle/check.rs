use super::dense::{apply_table, dense_drift, dense_weak_residual, dense_z_table};
use super::identities::{brute_force_strat_constant, chain_rule_residual, ibp_residuals};
use crate::error::Result;
use crate::fem::{dirichlet_x, dirichlet_y, lap, lap_eigenvalue_1d, lumped_inner};
use crate::grid::{Field, Grid};
use crate::material::{d_entropy_g, Material};
use crate::noise::{basis_eval, counter_uniform, Interpretation, NoiseModel, Schedule, TableEntry};
use crate::scheme::{energy_variation_along, pressure, z_x, z_y, Evaluation};

/// Outcome of one verification check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: &str, value: f64, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tol,
            pass: value <= tol,
        }
    }
}

fn random_field(g: Grid, seed: u64, lo: f64, hi: f64) -> Field {
    let mut n = 0u64;
    Field::from_nodes(g, |_, _| {
        n += 1;
        lo + (hi - lo) * counter_uniform(seed, n)
    })
}

/// Grids of the dense comparisons: `n x n` nodes with spacing 0.9.
fn dense_grids() -> Vec<Grid> {
    [4usize, 6, 8]
        .iter()
        .map(|&n| Grid::new(n, n, 0.9 * n as f64, 0.9 * n as f64).expect("valid grid"))
        .collect()
}

/// Runs the identity and dense-oracle suites with `samples` random inputs each.
pub fn run_checks(samples: usize) -> Result<Vec<CheckResult>> {
    let mat = Material::default();
    let mut out = Vec::new();

    let g8 = Grid::unit_square(8)?;
    let mut worst: f64 = 0.0;
    for s in 0..samples as u64 {
        let a = random_field(g8, 3 * s, -1.0, 1.0);
        let b = random_field(g8, 3 * s + 1, -1.0, 1.0);
        let c = random_field(g8, 3 * s + 2, -1.0, 1.0);
        worst = worst.max(ibp_residuals(&a, &b, &c).max());
    }
    out.push(CheckResult::new("discrete integration by parts", worst, 1e-12));

    let g16 = Grid::unit_square(16)?;
    let mut worst: f64 = 0.0;
    for s in 0..samples as u64 {
        worst = worst.max(chain_rule_residual(&random_field(g16, 1000 + s, 0.1, 3.0), &mat)?);
    }
    out.push(CheckResult::new("discrete chain rule", worst, 1e-12));

    let mut worst: f64 = 0.0;
    for s in 0..samples as u64 {
        let f = random_field(g8, 2000 + 2 * s, -1.0, 1.0);
        let h = random_field(g8, 2001 + 2 * s, -1.0, 1.0);
        let lhs = -lumped_inner(&lap(&f), &h);
        let rhs = dirichlet_x(&f, &h) + dirichlet_y(&f, &h);
        worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
    }
    out.push(CheckResult::new("summation by parts", worst, 1e-12));

    let (mut wp, mut wd, mut wz) = (0.0f64, 0.0f64, 0.0f64);
    for g in dense_grids() {
        let (tx, ty) = dense_z_table(&g, 1, -1)?;
        let w = basis_eval(1, -1, &g);
        for s in 0..samples as u64 {
            let u = random_field(g, 5000 + s, 0.8, 1.2);
            let p = pressure(&u, &mat, false)?;
            wp = wp.max(dense_weak_residual(&u, &p, &mat)?);
            let fast = Evaluation::new(&u, &mat, false)?.drift;
            let slow = dense_drift(&u, &mat)?;
            wd = wd.max(fast.zip_map(&slow, |a, b| a - b).max_abs());
            let zx = z_x(&u, &w).zip_map(&apply_table(&tx, &u), |a, b| a - b).max_abs();
            let zy = z_y(&u, &w).zip_map(&apply_table(&ty, &u), |a, b| a - b).max_abs();
            wz = wz.max(zx).max(zy);
        }
    }
    out.push(CheckResult::new("dense pressure weak form", wp, 1e-12));
    out.push(CheckResult::new("dense drift", wd, 1e-12));
    out.push(CheckResult::new("dense noise coefficients", wz, 1e-12));

    let g6 = Grid::unit_square(6)?;
    let (mut we, mut ws) = (0.0f64, 0.0f64);
    for s in 0..samples as u64 {
        let u = random_field(g6, 7000 + s, 0.5, 1.5);
        let e = Evaluation::new(&u, &mat, false)?;
        let d = e.dissipation();
        we = we.max((energy_variation_along(&e) + d).abs() / d);
        let dg = u.map(|v| d_entropy_g(v).expect("positive"));
        let lhs = lumped_inner(&dg, &e.drift);
        let rhs = crate::diagnostics::entropy_production(&u, &mat)?;
        ws = ws.max((lhs - rhs).abs() / rhs.abs());
    }
    out.push(CheckResult::new("energy dissipation identity", we, 1e-10));
    out.push(CheckResult::new("entropy production identity", ws, 1e-9));

    let mut worst: f64 = 0.0;
    for n in [8usize, 16, 32, 64, 128] {
        let g = Grid::new(n, 3, 1.0, 1.0)?;
        let k = 1;
        let f = Field::from_nodes(g, |i, _| {
            (2.0 * std::f64::consts::PI * k as f64 * i as f64 / n as f64).cos()
        });
        let lam = lap_eigenvalue_1d(k, g.hx(), g.lx());
        let r = lap(&f).zip_map(&f, |a, b| a - lam * b).max_abs();
        worst = worst.max(r / (lam.abs() * f.max_abs()));
    }
    out.push(CheckResult::new("discrete Laplacian eigenfields (relative)", worst, 1e-12));

    let mut worst: f64 = 0.0;
    for s in 0..samples.min(10) as u64 {
        let model = symmetric_table(9000 + s);
        let closed = model.strat_constant(1.0, 1.0)?;
        let brute = brute_force_strat_constant(&model, 1.0, 1.0)?;
        worst = worst.max((closed - brute).abs() / brute.max(f64::MIN_POSITIVE));
    }
    out.push(CheckResult::new("Stratonovich constant", worst, 1e-14));

    Ok(out)
}

/// Random table schedule symmetric under `k -> -k`, `l -> -l` with `λ^x = λ^y`.
pub fn symmetric_table(seed: u64) -> NoiseModel {
    let mut entries = Vec::new();
    let mut c = 0u64;
    for l in 0..=3i64 {
        for k in 0..=3i64 {
            c += 1;
            let lam = counter_uniform(seed, c);
            for (sk, sl) in [(1, 1), (-1, 1), (1, -1), (-1, -1)] {
                let (kk, ll) = (sk * k, sl * l);
                if !entries.iter().any(|e: &TableEntry| e.k == kk && e.l == ll) {
                    entries.push(TableEntry {
                        k: kk,
                        l: ll,
                        lambda_x: lam,
                        lambda_y: lam,
                    });
                }
            }
        }
    }
    NoiseModel::new(Schedule::Table(entries), 1.0, 8, 0, Interpretation::Stratonovich)
        .expect("symmetric table")
}

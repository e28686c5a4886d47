use crate::error::{Error, Result};
use crate::grid::Field;
use crate::material::{MeanKind, Material};
use crate::noise::{basis_1d, NoiseModel};

/// Relative residuals of the four discrete integration-by-parts identities.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IbpResiduals {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl IbpResiduals {
    pub fn max(&self) -> f64 {
        self.x1.max(self.x2).max(self.y1).max(self.y2)
    }
}

/// Exact `∫ a w` over one periodic line for piecewise linear `a`, `w`.
fn p1_product(a: &[f64], w: &[f64], h: f64) -> f64 {
    let n = a.len();
    (0..n)
        .map(|i| {
            let k = (i + 1) % n;
            h / 6.0 * (2.0 * a[i] * w[i] + a[i] * w[k] + a[k] * w[i] + 2.0 * a[k] * w[k])
        })
        .sum()
}

/// Periodic shift `(S^d v)_i = v_{i+d}`.
fn shift(v: &[f64], d: isize) -> Vec<f64> {
    let n = v.len() as isize;
    (0..n).map(|i| v[(i + d).rem_euclid(n) as usize]).collect()
}

fn dqp(v: &[f64], h: f64) -> Vec<f64> {
    shift(v, 1).iter().zip(v).map(|(a, b)| (a - b) / h).collect()
}

fn dqm(v: &[f64], h: f64) -> Vec<f64> {
    v.iter().zip(shift(v, -1)).map(|(a, b)| (a - b) / h).collect()
}

fn lap1(v: &[f64], h: f64) -> Vec<f64> {
    dqm(&dqp(v, h), h)
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Residuals of the first- and second-order identities on one line,
/// returned as `(lhs - rhs, scale)` pairs.
fn line_identities(a: &[f64], b: &[f64], c: &[f64], h: f64) -> [(f64, f64); 2] {
    // -∫ a I{b dq^- c} = ∫ a I{dq^- b c(x-h)} + ∫ dq^+ a I{b c}
    let l1 = -p1_product(a, &mul(b, &dqm(c, h)), h);
    let r1a = p1_product(a, &mul(&dqm(b, h), &shift(c, -1)), h);
    let r1b = p1_product(&dqp(a, h), &mul(b, c), h);
    // ∫ a I{b Δc} = ∫ Δa I{b(x-h) c} + ∫ a(x+h) I{Δb c} + 2 ∫ dq^+ a I{dq^- b c}
    let l2 = p1_product(a, &mul(b, &lap1(c, h)), h);
    let r2a = p1_product(&lap1(a, h), &mul(&shift(b, -1), c), h);
    let r2b = p1_product(&shift(a, 1), &mul(&lap1(b, h), c), h);
    let r2c = 2.0 * p1_product(&dqp(a, h), &mul(&dqm(b, h), c), h);
    [
        (l1 - r1a - r1b, l1.abs() + r1a.abs() + r1b.abs()),
        (l2 - r2a - r2b - r2c, l2.abs() + r2a.abs() + r2b.abs() + r2c.abs()),
    ]
}

/// Residuals of the identities applied along every grid line of `a, b, c`.
pub fn ibp_residuals(a: &Field, b: &Field, c: &Field) -> IbpResiduals {
    let g = a.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let row = |f: &Field, j: usize| (0..nx).map(|i| f.at(i, j)).collect::<Vec<_>>();
    let col = |f: &Field, i: usize| (0..ny).map(|j| f.at(i, j)).collect::<Vec<_>>();
    let mut acc = [[0.0f64; 2]; 4];
    for j in 0..ny {
        let r = line_identities(&row(a, j), &row(b, j), &row(c, j), g.hx());
        for (k, (d, s)) in r.into_iter().enumerate() {
            acc[k][0] += d * g.hy();
            acc[k][1] += s * g.hy();
        }
    }
    for i in 0..nx {
        let r = line_identities(&col(a, i), &col(b, i), &col(c, i), g.hy());
        for (k, (d, s)) in r.into_iter().enumerate() {
            acc[2 + k][0] += d * g.hx();
            acc[2 + k][1] += s * g.hx();
        }
    }
    let rel = |v: [f64; 2]| if v[1] == 0.0 { 0.0 } else { v[0].abs() / v[1] };
    IbpResiduals {
        x1: rel(acc[0]),
        x2: rel(acc[1]),
        y1: rel(acc[2]),
        y2: rel(acc[3]),
    }
}

/// Largest per-edge relative residual of
/// `∂ I_h^{xy}{u²} = I_h{[2s] ∂u}` on x- and y-edges.
pub fn chain_rule_residual(u: &Field, mat: &Material) -> Result<f64> {
    u.check_positive()?;
    let g = u.grid();
    let two_s = |s: f64| 2.0 * s;
    let mut worst: f64 = 0.0;
    for j in 0..g.ny() as isize {
        for i in 0..g.nx() as isize {
            let a = u.at_wrapped(i, j);
            for (b, h) in [(u.at_wrapped(i + 1, j), g.hx()), (u.at_wrapped(i, j + 1), g.hy())] {
                let lhs = (b * b - a * a) / h;
                let rhs = mat.elem_mean(MeanKind::Custom(&two_s), a, b)? * (b - a) / h;
                let scale = (b * b + a * a) / h;
                worst = worst.max((lhs - rhs).abs() / scale);
            }
        }
    }
    Ok(worst)
}

/// Brute-force `C_Strat = Σ_kl λ_kl² ‖g_kl‖²_∞` with the sup norm found by
/// sampling the basis functions at their extremal points.
pub fn brute_force_strat_constant(model: &NoiseModel, lx: f64, ly: f64) -> Result<f64> {
    if !model.is_symmetric() {
        return Err(Error::config(
            "Stratonovich mode requires symmetric λ: λ^x = λ^y and λ_kl = λ_(-k)l = λ_k(-l)",
        ));
    }
    let sup_sq = |k: i64, len: f64| -> f64 {
        let m = 4 * k.unsigned_abs().max(1);
        (0..m)
            .map(|q| basis_1d(k, len * q as f64 / m as f64, len).powi(2))
            .fold(0.0, f64::max)
    };
    let mut total = 0.0;
    for mode in model.all_modes() {
        let lam = mode.lambda_x;
        if lam != 0.0 {
            total += lam * lam * sup_sq(mode.k, lx) * sup_sq(mode.l, ly);
        }
    }
    Ok(total)
}

//! Ritz projection onto the periodic bilinear space.
//!
//! Finds `R f ∈ U_h` with `∫ ∇R f · ∇ψ = ∫ ∇f · ∇ψ` for all `ψ ∈ U_h` and
//! `∫ R f = ∫ f`. The consistent Q1 stiffness matrix is applied matrix-free;
//! the singular system is solved by conjugate gradients on zero-sum vectors.

use super::interp::integrate_cells;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// Relative residual tolerance of the CG solve.
pub const CG_TOL: f64 = 1e-12;

/// Ritz projection of a periodic function given by its value and gradient.
pub fn ritz_projection(
    grid: &Grid,
    value: impl Fn(f64, f64) -> f64,
    grad: impl Fn(f64, f64) -> (f64, f64),
) -> Result<Field> {
    let mut load = vec![0.0; grid.len()];
    let (hx, hy) = (grid.hx(), grid.hy());
    integrate_cells(grid, 3, |p| {
        let (gx, gy) = grad(p.x, p.y);
        let (i1, j1) = (grid.next_i(p.i), grid.next_j(p.j));
        // Hat gradients on the cell, corners (0,0), (1,0), (0,1), (1,1).
        let corners = [
            (grid.idx(p.i, p.j), -(1.0 - p.t) / hx, -(1.0 - p.s) / hy),
            (grid.idx(i1, p.j), (1.0 - p.t) / hx, -p.s / hy),
            (grid.idx(p.i, j1), -p.t / hx, (1.0 - p.s) / hy),
            (grid.idx(i1, j1), p.t / hx, p.s / hy),
        ];
        for (n, ex, ey) in corners {
            load[n] += p.w * (gx * ex + gy * ey);
        }
        0.0
    });
    let mean_f = integrate_cells(grid, 4, |p| value(p.x, p.y)) / grid.area();

    let shift = load.iter().sum::<f64>() / load.len() as f64;
    load.iter_mut().for_each(|b| *b -= shift);

    let mut u = cg(grid, &load)?;
    let mean_u = u.iter().sum::<f64>() / u.len() as f64;
    u.iter_mut().for_each(|v| *v += mean_f - mean_u);
    Field::from_values(*grid, u)
}

/// Action of the consistent periodic Q1 stiffness matrix
/// `K = K_x ⊗ M_y + M_x ⊗ K_y`.
pub fn stiffness_apply(grid: &Grid, u: &[f64]) -> Vec<f64> {
    let (hx, hy) = (grid.hx(), grid.hy());
    let mut out = vec![0.0; u.len()];
    for j in 0..grid.ny() {
        let (jm, jp) = (grid.prev_j(j), grid.next_j(j));
        for i in 0..grid.nx() {
            let (im, ip) = (grid.prev_i(i), grid.next_i(i));
            let at = |a: usize, b: usize| u[grid.idx(a, b)];
            // 1D stiffness in x applied on rows jm, j, jp.
            let kx = |b: usize| (2.0 * at(i, b) - at(im, b) - at(ip, b)) / hx;
            let ky = |a: usize| (2.0 * at(a, j) - at(a, jm) - at(a, jp)) / hy;
            let kxmy = hy / 6.0 * (kx(jm) + 4.0 * kx(j) + kx(jp));
            let mxky = hx / 6.0 * (ky(im) + 4.0 * ky(i) + ky(ip));
            out[grid.idx(i, j)] = kxmy + mxky;
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cg(grid: &Grid, b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..10 * n {
        if rr.sqrt() <= CG_TOL * bnorm {
            return Ok(x);
        }
        let ap = stiffness_apply(grid, &p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver(format!("CG breakdown, pAp = {pap:e}")));
        }
        let alpha = rr / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
    }
    if rr.sqrt() <= CG_TOL * bnorm {
        Ok(x)
    } else {
        Err(Error::Solver(format!(
            "CG did not converge in {} iterations (relative residual {:e})",
            10 * n,
            rr.sqrt() / bnorm
        )))
    }
}

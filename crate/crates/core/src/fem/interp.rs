//! Pointwise evaluation of bilinear fields, cellwise Gauss quadrature and
//! the interpolation-error functionals used by refinement studies.

use super::quadrature::gauss_legendre;
use crate::grid::{Field, Grid};

/// A quadrature point inside cell `(i, j)` with local coordinates `(s, t)`.
#[derive(Clone, Copy, Debug)]
pub struct CellPoint {
    pub i: usize,
    pub j: usize,
    pub s: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

/// `Σ_cells Σ_q w_q f(q)` with an `n x n` tensor Gauss rule per cell.
pub fn integrate_cells(grid: &Grid, n: usize, mut f: impl FnMut(&CellPoint) -> f64) -> f64 {
    let (xs, ws) = gauss_legendre(n);
    let area = grid.cell_area();
    let mut total = 0.0;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let mut cell = 0.0;
            for (&t, &wt) in xs.iter().zip(ws) {
                for (&s, &wsx) in xs.iter().zip(ws) {
                    let p = CellPoint {
                        i,
                        j,
                        s,
                        t,
                        x: grid.x(i) + s * grid.hx(),
                        y: grid.y(j) + t * grid.hy(),
                        w: wsx * wt * area,
                    };
                    cell += p.w * f(&p);
                }
            }
            total += cell;
        }
    }
    total
}

/// Value and gradient of the bilinear field on cell `(i, j)` at local `(s, t)`.
pub fn eval_cell(f: &Field, i: usize, j: usize, s: f64, t: f64) -> (f64, f64, f64) {
    let g = f.grid();
    let (i1, j1) = (g.next_i(i), g.next_j(j));
    let f00 = f.at(i, j);
    let f10 = f.at(i1, j);
    let f01 = f.at(i, j1);
    let f11 = f.at(i1, j1);
    let v = (1.0 - s) * (1.0 - t) * f00 + s * (1.0 - t) * f10 + (1.0 - s) * t * f01 + s * t * f11;
    let dx = ((1.0 - t) * (f10 - f00) + t * (f11 - f01)) / g.hx();
    let dy = ((1.0 - s) * (f01 - f00) + s * (f11 - f10)) / g.hy();
    (v, dx, dy)
}

/// Value and gradient at a global position (periodically wrapped).
pub fn eval_at(f: &Field, x: f64, y: f64) -> (f64, f64, f64) {
    let g = f.grid();
    let (i, s) = locate(x, g.lx(), g.hx(), g.nx());
    let (j, t) = locate(y, g.ly(), g.hy(), g.ny());
    eval_cell(f, i, j, s, t)
}

fn locate(x: f64, l: f64, h: f64, n: usize) -> (usize, f64) {
    let xr = x.rem_euclid(l) / h;
    let c = (xr.floor() as usize).min(n - 1);
    (c, (xr - c as f64).clamp(0.0, 1.0))
}

/// `‖f_h − f‖_{L²}` by 4-point Gauss per cell.
pub fn l2_error(fh: &Field, f: impl Fn(f64, f64) -> f64) -> f64 {
    integrate_cells(fh.grid(), 4, |p| {
        let (v, _, _) = eval_cell(fh, p.i, p.j, p.s, p.t);
        (v - f(p.x, p.y)).powi(2)
    })
    .sqrt()
}

/// `‖∇(f_h − f)‖_{L²}` given the exact gradient.
pub fn h1_semi_error(fh: &Field, grad: impl Fn(f64, f64) -> (f64, f64)) -> f64 {
    integrate_cells(fh.grid(), 4, |p| {
        let (_, dx, dy) = eval_cell(fh, p.i, p.j, p.s, p.t);
        let (gx, gy) = grad(p.x, p.y);
        (dx - gx).powi(2) + (dy - gy).powi(2)
    })
    .sqrt()
}

/// Exact-enough `‖f_h‖_{L^p}` of the bilinear function (5-point Gauss).
pub fn lp_norm(fh: &Field, p: f64) -> f64 {
    integrate_cells(fh.grid(), 5, |q| eval_cell(fh, q.i, q.j, q.s, q.t).0.abs().powf(p)).powf(1.0 / p)
}

/// `‖f_h‖_{L^∞}` of a bilinear function, attained at nodes.
pub fn linf_norm(fh: &Field) -> f64 {
    fh.max_abs()
}

/// `‖f_h‖_{H¹}` (full norm) of the bilinear function.
pub fn h1_norm(fh: &Field) -> f64 {
    integrate_cells(fh.grid(), 3, |q| {
        let (v, dx, dy) = eval_cell(fh, q.i, q.j, q.s, q.t);
        v * v + dx * dx + dy * dy
    })
    .sqrt()
}

/// `L²` norms of `(I − I_h^x){f_h g_h}` and of its x-derivative.
///
/// At fixed `y` both factors are piecewise linear in `x`, so the product is
/// piecewise quadratic and its x-interpolant uses the values on the x-nodes.
pub fn interp_x_product_error(fh: &Field, gh: &Field) -> (f64, f64) {
    debug_assert_eq!(fh.grid(), gh.grid());
    let grid = fh.grid();
    let mut value = 0.0;
    let mut deriv = 0.0;
    integrate_cells(grid, 4, |p| {
        let (f, fx, _) = eval_cell(fh, p.i, p.j, p.s, p.t);
        let (g, gx, _) = eval_cell(gh, p.i, p.j, p.s, p.t);
        let left = eval_cell(fh, p.i, p.j, 0.0, p.t).0 * eval_cell(gh, p.i, p.j, 0.0, p.t).0;
        let right = eval_cell(fh, p.i, p.j, 1.0, p.t).0 * eval_cell(gh, p.i, p.j, 1.0, p.t).0;
        let ip = (1.0 - p.s) * left + p.s * right;
        let ipx = (right - left) / grid.hx();
        value += p.w * (f * g - ip).powi(2);
        deriv += p.w * (fx * g + f * gx - ipx).powi(2);
        0.0
    });
    (value.sqrt(), deriv.sqrt())
}

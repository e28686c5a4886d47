//! Lumped tensor-product P1 machinery on periodic equidistant grids.
//!
//! On equidistant periodic grids every lumped integral `∫ I_h^{xy}{·}` is the
//! nodal sum weighted by `hx * hy`, and the lumped-in-y integral of a product
//! of x-derivatives reduces to a sum over x-edges. The discrete Laplacian
//! defined through the lumped mass matrix is the periodic three-point stencil
//! in each direction.

pub mod interp;
pub mod quadrature;
pub mod ritz;

use crate::grid::Field;

/// Forward difference quotient in `x` at node `(i, j)`.
#[inline]
pub fn dq_x_plus(f: &Field, i: usize, j: usize) -> f64 {
    let g = f.grid();
    (f.at(g.next_i(i), j) - f.at(i, j)) / g.hx()
}

/// Backward difference quotient in `x` at node `(i, j)`.
#[inline]
pub fn dq_x_minus(f: &Field, i: usize, j: usize) -> f64 {
    let g = f.grid();
    (f.at(i, j) - f.at(g.prev_i(i), j)) / g.hx()
}

#[inline]
pub fn dq_y_plus(f: &Field, i: usize, j: usize) -> f64 {
    let g = f.grid();
    (f.at(i, g.next_j(j)) - f.at(i, j)) / g.hy()
}

#[inline]
pub fn dq_y_minus(f: &Field, i: usize, j: usize) -> f64 {
    let g = f.grid();
    (f.at(i, j) - f.at(i, g.prev_j(j))) / g.hy()
}

fn nodewise(f: &Field, op: impl Fn(&Field, usize, usize) -> f64) -> Field {
    Field::from_nodes(*f.grid(), |i, j| op(f, i, j))
}

pub fn dqx_plus(f: &Field) -> Field {
    nodewise(f, dq_x_plus)
}

pub fn dqx_minus(f: &Field) -> Field {
    nodewise(f, dq_x_minus)
}

pub fn dqy_plus(f: &Field) -> Field {
    nodewise(f, dq_y_plus)
}

pub fn dqy_minus(f: &Field) -> Field {
    nodewise(f, dq_y_minus)
}

/// One-dimensional discrete Laplacian in `x`, applied row by row.
pub fn lap_x(f: &Field) -> Field {
    let g = *f.grid();
    let s = 1.0 / (g.hx() * g.hx());
    Field::from_nodes(g, |i, j| {
        (f.at(g.prev_i(i), j) - 2.0 * f.at(i, j) + f.at(g.next_i(i), j)) * s
    })
}

/// One-dimensional discrete Laplacian in `y`, applied column by column.
pub fn lap_y(f: &Field) -> Field {
    let g = *f.grid();
    let s = 1.0 / (g.hy() * g.hy());
    Field::from_nodes(g, |i, j| {
        (f.at(i, g.prev_j(j)) - 2.0 * f.at(i, j) + f.at(i, g.next_j(j))) * s
    })
}

/// Discrete Laplacian `Δ_h = Δ_h^x + Δ_h^y`.
pub fn lap(f: &Field) -> Field {
    let g = *f.grid();
    let sx = 1.0 / (g.hx() * g.hx());
    let sy = 1.0 / (g.hy() * g.hy());
    let mut out = Field::zeros(g);
    let v = f.values();
    let o = out.values_mut();
    for j in 0..g.ny() {
        let (jm, jp) = (g.prev_j(j), g.next_j(j));
        for i in 0..g.nx() {
            let (im, ip) = (g.prev_i(i), g.next_i(i));
            let c = v[g.idx(i, j)];
            o[g.idx(i, j)] = (v[g.idx(im, j)] - 2.0 * c + v[g.idx(ip, j)]) * sx
                + (v[g.idx(i, jm)] - 2.0 * c + v[g.idx(i, jp)]) * sy;
        }
    }
    out
}

/// `Δ_h Δ_h f`.
pub fn bilap(f: &Field) -> Field {
    lap(&lap(f))
}

/// `∫ I_h^{xy}{f}` for nodal data.
pub fn lumped_integral(f: &Field) -> f64 {
    f.grid().cell_area() * f.values().iter().sum::<f64>()
}

/// Lumped inner product `∫ I_h^{xy}{f g}`.
pub fn lumped_inner(f: &Field, g: &Field) -> f64 {
    debug_assert_eq!(f.grid(), g.grid());
    f.grid().cell_area()
        * f.values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| a * b)
            .sum::<f64>()
}

/// `‖f‖_h^2 = ∫ I_h^{xy}{f^2}`.
pub fn lumped_norm_sq(f: &Field) -> f64 {
    lumped_inner(f, f)
}

/// `∫ I_h^{xy}{|f|^p}`.
pub fn lumped_lp_integral(f: &Field, p: f64) -> f64 {
    f.grid().cell_area() * f.values().iter().map(|v| v.abs().powf(p)).sum::<f64>()
}

/// `∫ I_h^y{∂_x f ∂_x g}`.
pub fn dirichlet_x(f: &Field, g: &Field) -> f64 {
    edge_sum_x(None, f, g)
}

/// `∫ I_h^x{∂_y f ∂_y g}`.
pub fn dirichlet_y(f: &Field, g: &Field) -> f64 {
    edge_sum_y(None, f, g)
}

/// `∫ I_h^y{a ∂_x f ∂_x g}` with `a` given on x-edges.
pub fn weighted_dirichlet_x(a: &[f64], f: &Field, g: &Field) -> f64 {
    debug_assert_eq!(a.len(), f.grid().len());
    edge_sum_x(Some(a), f, g)
}

/// `∫ I_h^x{a ∂_y f ∂_y g}` with `a` given on y-edges.
pub fn weighted_dirichlet_y(a: &[f64], f: &Field, g: &Field) -> f64 {
    debug_assert_eq!(a.len(), f.grid().len());
    edge_sum_y(Some(a), f, g)
}

fn edge_sum_x(a: Option<&[f64]>, f: &Field, g: &Field) -> f64 {
    let grid = f.grid();
    let mut s = 0.0;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let w = a.map_or(1.0, |a| a[grid.idx(i, j)]);
            s += w * dq_x_plus(f, i, j) * dq_x_plus(g, i, j);
        }
    }
    s * grid.cell_area()
}

fn edge_sum_y(a: Option<&[f64]>, f: &Field, g: &Field) -> f64 {
    let grid = f.grid();
    let mut s = 0.0;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let w = a.map_or(1.0, |a| a[grid.idx(i, j)]);
            s += w * dq_y_plus(f, i, j) * dq_y_plus(g, i, j);
        }
    }
    s * grid.cell_area()
}

/// Closed-form eigenvalue of the 1D periodic three-point Laplacian for the
/// mode `cos(2π k x / L)` sampled with spacing `h`.
pub fn lap_eigenvalue_1d(k: i64, h: f64, l: f64) -> f64 {
    let s = (std::f64::consts::PI * k as f64 * h / l).sin();
    -4.0 / (h * h) * s * s
}

/// Continuous counterpart `-(2π k / L)^2`.
pub fn continuous_eigenvalue_1d(k: i64, l: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * k as f64 / l;
    -w * w
}

/// Shift a field by whole cells: `out(i, j) = f(i + di, j + dj)`.
pub fn shifted(f: &Field, di: isize, dj: isize) -> Field {
    let g = *f.grid();
    Field::from_nodes(g, |i, j| f.at_wrapped(i as isize + di, j as isize + dj))
}

//! Equidistant periodic tensor-product grids and nodal fields.
//!
//! Node `(i, j)` sits at `(i * hx, j * hy)`; indices wrap modulo `nx`, `ny`.
//! Nodal arrays are stored row-major with `j` outer and `i` inner.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    hx: f64,
    hy: f64,
}

impl Grid {
    /// Smallest admissible node count per axis (periodic three-point stencils).
    pub const MIN_NODES: usize = 3;

    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        let mut violations = Vec::new();
        if nx < Self::MIN_NODES || ny < Self::MIN_NODES {
            violations.push(format!(
                "grid needs at least {} nodes per axis, got {nx}x{ny}",
                Self::MIN_NODES
            ));
        }
        if !(lx > 0.0 && lx.is_finite()) || !(ly > 0.0 && ly.is_finite()) {
            violations.push(format!("domain lengths must be positive, got {lx} x {ly}"));
        }
        if !violations.is_empty() {
            return Err(Error::Config(violations));
        }
        Ok(Self {
            nx,
            ny,
            lx,
            ly,
            hx: lx / nx as f64,
            hy: ly / ny as f64,
        })
    }

    /// `n x n` grid on the unit square.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(n, n, 1.0, 1.0)
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }
    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }
    #[inline]
    pub fn lx(&self) -> f64 {
        self.lx
    }
    #[inline]
    pub fn ly(&self) -> f64 {
        self.ly
    }
    #[inline]
    pub fn hx(&self) -> f64 {
        self.hx
    }
    #[inline]
    pub fn hy(&self) -> f64 {
        self.hy
    }

    /// Number of nodes.
    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lumped mass of every node, `hx * hy`.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// Dimensionless mesh parameter `h = max(hx, hy) / l_ref` with `l_ref = 1`.
    #[inline]
    pub fn mesh_size(&self) -> f64 {
        self.hx.max(self.hy)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    /// Flat index of a node given possibly out-of-range signed indices.
    #[inline]
    pub fn wrapped(&self, i: isize, j: isize) -> usize {
        let i = i.rem_euclid(self.nx as isize) as usize;
        let j = j.rem_euclid(self.ny as isize) as usize;
        self.idx(i, j)
    }

    #[inline]
    pub fn ij(&self, n: usize) -> (usize, usize) {
        (n % self.nx, n / self.nx)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx
    }
    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy
    }

    #[inline]
    pub(crate) fn next_i(&self, i: usize) -> usize {
        if i + 1 == self.nx {
            0
        } else {
            i + 1
        }
    }
    #[inline]
    pub(crate) fn prev_i(&self, i: usize) -> usize {
        if i == 0 {
            self.nx - 1
        } else {
            i - 1
        }
    }
    #[inline]
    pub(crate) fn next_j(&self, j: usize) -> usize {
        if j + 1 == self.ny {
            0
        } else {
            j + 1
        }
    }
    #[inline]
    pub(crate) fn prev_j(&self, j: usize) -> usize {
        if j == 0 {
            self.ny - 1
        } else {
            j - 1
        }
    }
}

/// Nodal coefficients of a bilinear function in `U_h`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} nodal values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Nodal values `f(i, j)`.
    pub fn from_nodes(grid: Grid, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                values.push(f(i, j));
            }
        }
        Self { grid, values }
    }

    /// Nodal interpolant of a function of position.
    pub fn interpolate(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        Self::from_nodes(grid, |i, j| f(grid.x(i), grid.y(j)))
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Value at periodically wrapped indices.
    #[inline]
    pub fn at_wrapped(&self, i: isize, j: isize) -> f64 {
        self.values[self.grid.wrapped(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Field) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Node and value of the smallest entry.
    pub fn argmin(&self) -> (usize, usize, f64) {
        let (n, v) = self
            .values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (n, v)| if v < acc.1 { (n, v) } else { acc });
        let (i, j) = self.grid.ij(n);
        (i, j, v)
    }

    /// First node that is not strictly positive.
    pub fn check_positive(&self) -> Result<()> {
        match self.values.iter().position(|&v| !(v > 0.0)) {
            None => Ok(()),
            Some(n) => {
                let (i, j) = self.grid.ij(n);
                Err(Error::Positivity {
                    i,
                    j,
                    value: self.values[n],
                })
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for Field {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.values[self.grid.idx(i, j)]
    }
}

impl IndexMut<(usize, usize)> for Field {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        let n = self.grid.idx(i, j);
        &mut self.values[n]
    }
}

/// Edge-centred coefficients: `x[idx(i, j)]` lives on the x-edge `(i + 1/2, j)`,
/// `y[idx(i, j)]` on the y-edge `(i, j + 1/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeCoeffs {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl EdgeCoeffs {
    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self {
            x: vec![c; grid.len()],
            y: vec![c; grid.len()],
        }
    }
}

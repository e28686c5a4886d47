use crate::diagnostics::Energy;
use crate::error::{Error, Result};
use crate::fem::quadrature::gauss_legendre;
use crate::grid::{Field, Grid};
use crate::material::Material;
use crate::noise::basis_1d;

/// Largest grid (in nodes) the dense oracle accepts.
pub const MAX_NODES: usize = 64;

type Mat = Vec<Vec<f64>>;

fn zeros(n: usize) -> Mat {
    vec![vec![0.0; n]; n]
}

fn matvec(m: &Mat, v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Indices of the four corners of cell `(i, j)`, ordered `(s, t)` =
/// `(0,0), (1,0), (0,1), (1,1)`.
fn corners(g: &Grid, i: usize, j: usize) -> [(usize, usize, usize); 4] {
    let n = |s: usize, t: usize| g.wrapped((i + s) as isize, (j + t) as isize);
    [(n(0, 0), 0, 0), (n(1, 0), 1, 0), (n(0, 1), 0, 1), (n(1, 1), 1, 1)]
}

/// Dense lumped mass, stiffness and Laplacian matrices.
#[derive(Clone, Debug)]
pub struct DenseForms {
    grid: Grid,
    pub mass: Mat,
    pub kx: Mat,
    pub ky: Mat,
    pub lap: Mat,
}

impl DenseForms {
    pub fn new(grid: &Grid) -> Result<Self> {
        let n = grid.len();
        if n > MAX_NODES {
            return Err(Error::TooLarge { nodes: n, limit: MAX_NODES });
        }
        let mut mass = zeros(n);
        let area = grid.cell_area();
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                // Lumped quadrature: corner values with weight area/4.
                for (a, _, _) in corners(grid, i, j) {
                    mass[a][a] += 0.25 * area;
                }
            }
        }
        let ones = vec![1.0; n];
        let kx = Self::stiffness(grid, true, &ones);
        let ky = Self::stiffness(grid, false, &ones);
        let mut lap = zeros(n);
        for r in 0..n {
            for c in 0..n {
                debug_assert!(r == c || mass[r][c] == 0.0);
                lap[r][c] = -(kx[r][c] + ky[r][c]) / mass[r][r];
            }
        }
        Ok(Self { grid: *grid, mass, kx, ky, lap })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `∫ I_h^y{a ∂_x e_m ∂_x e_n}` (or the y counterpart) with `a` on edges.
    ///
    /// On a cell, `∂_x` of a hat is constant in `x` and linear in `y`; the
    /// y-lumping evaluates the integrand on the two cell rows with weight
    /// `hy/2`, the x-integral over the cell contributes `hx`.
    fn stiffness(g: &Grid, along_x: bool, a: &[f64]) -> Mat {
        let n = g.len();
        let mut k = zeros(n);
        let (hx, hy) = (g.hx(), g.hy());
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let cs = corners(g, i, j);
                for side in 0..2 {
                    // Edge coefficient and derivative of each hat on this side.
                    let (edge, h) = if along_x {
                        (g.wrapped(i as isize, (j + side) as isize), hx)
                    } else {
                        (g.wrapped((i + side) as isize, j as isize), hy)
                    };
                    let w = 0.5 * hx * hy * a[edge];
                    let d = |s: usize, t: usize| -> f64 {
                        let (along, across) = if along_x { (s, t) } else { (t, s) };
                        if across != side {
                            0.0
                        } else if along == 1 {
                            1.0 / h
                        } else {
                            -1.0 / h
                        }
                    };
                    for &(r, sr, tr) in &cs {
                        for &(c, sc, tc) in &cs {
                            k[r][c] += w * d(sr, tr) * d(sc, tc);
                        }
                    }
                }
            }
        }
        k
    }

    pub fn weighted_kx(&self, a: &[f64]) -> Mat {
        Self::stiffness(&self.grid, true, a)
    }

    pub fn weighted_ky(&self, a: &[f64]) -> Mat {
        Self::stiffness(&self.grid, false, a)
    }

    pub fn apply_lap(&self, u: &[f64]) -> Vec<f64> {
        matvec(&self.lap, u)
    }

    /// Right-hand side of the weak pressure relation tested with every hat.
    fn pressure_rhs(&self, u: &Field, mat: &Material) -> Vec<f64> {
        let n = self.grid.len();
        let uv = u.values();
        let he = self.grid.mesh_size().powf(mat.eps());
        let ku: Vec<f64> = matvec(&self.kx, uv)
            .iter()
            .zip(matvec(&self.ky, uv))
            .map(|(a, b)| a + b)
            .collect();
        let lu = self.apply_lap(uv);
        let mlu: Vec<f64> = (0..n).map(|m| self.mass[m][m] * lu[m]).collect();
        // ∫ I{Δu Δe_r} = Σ_m M_mm (Δu)_m Δ_{m r}
        let curv: Vec<f64> = (0..n)
            .map(|r| (0..n).map(|m| mlu[m] * self.lap[m][r]).sum())
            .collect();
        (0..n)
            .map(|r| ku[r] + self.mass[r][r] * mat.df_raw(uv[r]) + he * curv[r])
            .collect()
    }
}

fn forms_for(u: &Field) -> Result<DenseForms> {
    DenseForms::new(u.grid())
}

/// Pressure solved from the dense weak relation.
pub fn dense_pressure(u: &Field, mat: &Material) -> Result<Field> {
    u.check_positive()?;
    let f = forms_for(u)?;
    let rhs = f.pressure_rhs(u, mat);
    let p = rhs.iter().enumerate().map(|(r, v)| v / f.mass[r][r]).collect();
    Field::from_values(*u.grid(), p)
}

/// Largest residual of the weak pressure relation over all test hats.
pub fn dense_weak_residual(u: &Field, p: &Field, mat: &Material) -> Result<f64> {
    u.check_positive()?;
    let f = forms_for(u)?;
    let rhs = f.pressure_rhs(u, mat);
    let mp = matvec(&f.mass, p.values());
    Ok(mp.iter().zip(&rhs).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

/// `1 / ((1/(b-a)) ∫_a^b s^{-2} ds)` by composite Gauss quadrature.
fn oracle_mobility(a: f64, b: f64) -> f64 {
    if a == b {
        return a * a;
    }
    let (xs, ws) = gauss_legendre(5);
    let parts = 32;
    let h = (b - a) / parts as f64;
    let mut s = 0.0;
    for p in 0..parts {
        let lo = a + p as f64 * h;
        for (x, w) in xs.iter().zip(ws) {
            let t = lo + h * x;
            s += w * h / (t * t);
        }
    }
    (b - a) / s
}

/// Drift `-M^{-1} (K_x[m] + K_y[m]) p` assembled densely.
pub fn dense_drift(u: &Field, mat: &Material) -> Result<Field> {
    let g = *u.grid();
    let f = forms_for(u)?;
    let p = dense_pressure(u, mat)?;
    let mut ax = vec![0.0; g.len()];
    let mut ay = vec![0.0; g.len()];
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let n = g.idx(i, j);
            ax[n] = oracle_mobility(u.at(i, j), u.at_wrapped(i as isize + 1, j as isize));
            ay[n] = oracle_mobility(u.at(i, j), u.at_wrapped(i as isize, j as isize + 1));
        }
    }
    let kx = f.weighted_kx(&ax);
    let ky = f.weighted_ky(&ay);
    let a = matvec(&kx, p.values());
    let b = matvec(&ky, p.values());
    let l = (0..g.len()).map(|r| -(a[r] + b[r]) / f.mass[r][r]).collect();
    Field::from_values(g, l)
}

/// Matrices `T_x`, `T_y` with `Z^x(g̃_kl) = T_x u` and `Z^y(g̃_kl) = T_y u`.
///
/// Per cell and per lumped row, the local interpolant of `∂(u w) ψ` on the
/// element takes the one-sided product-rule values at both endpoints and is
/// integrated by the trapezoid rule.
pub fn dense_z_table(grid: &Grid, k: i64, l: i64) -> Result<(Mat, Mat)> {
    let n = grid.len();
    if n > MAX_NODES {
        return Err(Error::TooLarge { nodes: n, limit: MAX_NODES });
    }
    let w: Vec<f64> = (0..n)
        .map(|m| {
            let (i, j) = grid.ij(m);
            basis_1d(k, grid.x(i), grid.lx()) * basis_1d(l, grid.y(j), grid.ly())
        })
        .collect();
    let mut tx = zeros(n);
    let mut ty = zeros(n);
    let (hx, hy) = (grid.hx(), grid.hy());
    let mass = grid.cell_area();
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            for side in 0..2 {
                for (along_x, t) in [(true, &mut tx), (false, &mut ty)] {
                    // Element endpoints along the derivative direction, on the
                    // lumped line `side` across it.
                    let (n0, n1, h) = if along_x {
                        (
                            grid.wrapped(i as isize, (j + side) as isize),
                            grid.wrapped(i as isize + 1, (j + side) as isize),
                            hx,
                        )
                    } else {
                        (
                            grid.wrapped((i + side) as isize, j as isize),
                            grid.wrapped((i + side) as isize, j as isize + 1),
                            hy,
                        )
                    };
                    let dw = (w[n1] - w[n0]) / h;
                    let weight = 0.5 * h * 0.5 * if along_x { hy } else { hx };
                    // Endpoint e: value of ∂(u w) = u' w_e + u_e w', tested with
                    // the hat of node e (the other hat vanishes there).
                    for (e, we) in [(n0, w[n0]), (n1, w[n1])] {
                        // u' = (u_{n1} - u_{n0}) / h contributes to columns n1, n0
                        t[e][n1] += weight * we / h / mass;
                        t[e][n0] -= weight * we / h / mass;
                        t[e][e] += weight * dw / mass;
                    }
                }
            }
        }
    }
    Ok((tx, ty))
}

/// Apply a dense table to a field.
pub fn apply_table(t: &Mat, u: &Field) -> Field {
    Field::from_values(*u.grid(), matvec(t, u.values())).expect("table matches grid")
}

/// Regularized energy from the dense forms.
pub fn dense_energy(u: &Field, mat: &Material) -> Result<Energy> {
    u.check_positive()?;
    let f = forms_for(u)?;
    let uv = u.values();
    let n = uv.len();
    let kxu = matvec(&f.kx, uv);
    let kyu = matvec(&f.ky, uv);
    let dirichlet = 0.5 * (0..n).map(|r| uv[r] * (kxu[r] + kyu[r])).sum::<f64>();
    let potential = (0..n).map(|r| f.mass[r][r] * mat.f_raw(uv[r])).sum::<f64>();
    let lu = f.apply_lap(uv);
    let he = f.grid.mesh_size().powf(mat.eps());
    let curvature = 0.5 * he * (0..n).map(|r| f.mass[r][r] * lu[r] * lu[r]).sum::<f64>();
    Ok(Energy {
        dirichlet,
        potential,
        curvature,
        total: dirichlet + potential + curvature,
    })
}

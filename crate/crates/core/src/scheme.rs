//! Right-hand sides of the nodal SDE system.
//!
//! With the diagonal lumped mass matrix the weak pressure relation is
//! pointwise, the drift is a divergence of edge fluxes and the noise
//! coefficients are products of central differences. All forms telescope
//! under periodic summation, so mass is conserved to roundoff.

use crate::error::Result;
use crate::fem::{dq_x_plus, dq_y_plus, lap, lumped_inner};
use crate::grid::{EdgeCoeffs, Field, Grid};
use crate::material::{MeanKind, Material};
use crate::noise::{Increments, SpectralBasis};

/// `h^ε` with `h = max(hx, hy)` in units of the reference length 1.
pub fn h_eps(grid: &Grid, eps: f64) -> f64 {
    grid.mesh_size().powf(eps)
}

/// Nodal pressure `χ[-Δ_h u + F'(u) + h^ε Δ_h² u]`.
pub fn pressure(u: &Field, mat: &Material, stopped: bool) -> Result<Field> {
    u.check_positive()?;
    if stopped {
        return Ok(Field::zeros(*u.grid()));
    }
    Ok(pressure_with_lap(u, &lap(u), mat))
}

fn pressure_with_lap(u: &Field, lap_u: &Field, mat: &Material) -> Field {
    let he = h_eps(u.grid(), mat.eps());
    let bilap = lap(lap_u);
    let mut p = Field::zeros(*u.grid());
    for (n, out) in p.values_mut().iter_mut().enumerate() {
        *out = -lap_u.values()[n] + mat.df_raw(u.values()[n]) + he * bilap.values()[n];
    }
    p
}

/// Edge mobilities `1 / [G''(u)]`; equal to `u_a u_b` on every edge.
pub fn mobility_edges(u: &Field, mat: &Material) -> Result<EdgeCoeffs> {
    u.check_positive()?;
    Ok(mobility_unchecked(u, mat))
}

fn mobility_unchecked(u: &Field, mat: &Material) -> EdgeCoeffs {
    let g = u.grid();
    let mut x = vec![0.0; g.len()];
    let mut y = vec![0.0; g.len()];
    for j in 0..g.ny() {
        let jp = g.next_j(j);
        for i in 0..g.nx() {
            let ip = g.next_i(i);
            let a = u.at(i, j);
            let n = g.idx(i, j);
            x[n] = 1.0 / mat.elem_mean_raw(MeanKind::Gpp, a, u.at(ip, j));
            y[n] = 1.0 / mat.elem_mean_raw(MeanKind::Gpp, a, u.at(i, jp));
        }
    }
    EdgeCoeffs { x, y }
}

/// `dq_x^-(a_x dq_x^+ p) + dq_y^-(a_y dq_y^+ p)`.
pub fn weighted_divergence(p: &Field, a: &EdgeCoeffs) -> Field {
    let g = *p.grid();
    let (hx, hy) = (g.hx(), g.hy());
    let mut fx = vec![0.0; g.len()];
    let mut fy = vec![0.0; g.len()];
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let n = g.idx(i, j);
            fx[n] = a.x[n] * dq_x_plus(p, i, j);
            fy[n] = a.y[n] * dq_y_plus(p, i, j);
        }
    }
    Field::from_nodes(g, |i, j| {
        let n = g.idx(i, j);
        (fx[n] - fx[g.idx(g.prev_i(i), j)]) / hx + (fy[n] - fy[g.idx(i, g.prev_j(j))]) / hy
    })
}

/// Deterministic drift `L(u)`.
pub fn drift(u: &Field, mat: &Material, stopped: bool) -> Result<Field> {
    Ok(Evaluation::new(u, mat, stopped)?.drift)
}

/// Noise coefficient `Z^x(w)` at every node:
/// `[w (u_{i+1} - u_{i-1}) + u (w_{i+1} - w_{i-1})] / (2 hx)`.
pub fn z_x(u: &Field, w: &Field) -> Field {
    let g = *u.grid();
    let c = 0.5 / g.hx();
    Field::from_nodes(g, |i, j| {
        let (im, ip) = (g.prev_i(i), g.next_i(i));
        c * (w.at(i, j) * (u.at(ip, j) - u.at(im, j)) + u.at(i, j) * (w.at(ip, j) - w.at(im, j)))
    })
}

/// Noise coefficient `Z^y(w)` at every node.
pub fn z_y(u: &Field, w: &Field) -> Field {
    let g = *u.grid();
    let c = 0.5 / g.hy();
    Field::from_nodes(g, |i, j| {
        let (jm, jp) = (g.prev_j(j), g.next_j(j));
        c * (w.at(i, j) * (u.at(i, jp) - u.at(i, jm)) + u.at(i, j) * (w.at(i, jp) - w.at(i, jm)))
    })
}

/// Stochastic increment `Σ_m λ^x_m Z^x(g̃_m) ΔW^x_m + λ^y_m Z^y(g̃_m) ΔW^y_m`.
///
/// `Z` is linear in the basis function, so the weighted mode sums are
/// synthesized first and each coefficient map is applied once.
pub fn diffusion_apply(u: &Field, basis: &SpectralBasis, inc: &Increments, stopped: bool) -> Field {
    if stopped || basis.is_empty() {
        return Field::zeros(*u.grid());
    }
    let modes = basis.modes();
    let cx: Vec<f64> = modes.iter().zip(&inc.dw).map(|(m, d)| m.lambda_x * d.0).collect();
    let cy: Vec<f64> = modes.iter().zip(&inc.dw).map(|(m, d)| m.lambda_y * d.1).collect();
    let mut out = z_x(u, &basis.synthesize(&cx));
    out.axpy(1.0, &z_y(u, &basis.synthesize(&cy)));
    out
}

/// Fluxes `J = sqrt(mobility) dq^+ p` on x- and y-edges.
pub fn fluxes(u: &Field, mat: &Material, stopped: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let e = Evaluation::new(u, mat, stopped)?;
    Ok(e.fluxes())
}

/// Deterministic quantities of one state, shared by the integrator and
/// the diagnostics.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub lap_u: Field,
    pub pressure: Field,
    pub mobility: EdgeCoeffs,
    pub drift: Field,
    pub dissipation_x: f64,
    pub dissipation_y: f64,
}

impl Evaluation {
    pub fn new(u: &Field, mat: &Material, stopped: bool) -> Result<Self> {
        u.check_positive()?;
        let g = *u.grid();
        let lap_u = lap(u);
        let mobility = mobility_unchecked(u, mat);
        if stopped {
            return Ok(Self {
                lap_u,
                pressure: Field::zeros(g),
                mobility,
                drift: Field::zeros(g),
                dissipation_x: 0.0,
                dissipation_y: 0.0,
            });
        }
        let pressure = pressure_with_lap(u, &lap_u, mat);
        let drift = weighted_divergence(&pressure, &mobility);
        let (mut dx, mut dy) = (0.0, 0.0);
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let n = g.idx(i, j);
                dx += mobility.x[n] * dq_x_plus(&pressure, i, j).powi(2);
                dy += mobility.y[n] * dq_y_plus(&pressure, i, j).powi(2);
            }
        }
        Ok(Self {
            lap_u,
            pressure,
            mobility,
            drift,
            dissipation_x: dx * g.cell_area(),
            dissipation_y: dy * g.cell_area(),
        })
    }

    pub fn fluxes(&self) -> (Vec<f64>, Vec<f64>) {
        let p = &self.pressure;
        let g = *p.grid();
        let mut jx = vec![0.0; g.len()];
        let mut jy = vec![0.0; g.len()];
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let n = g.idx(i, j);
                jx[n] = self.mobility.x[n].sqrt() * dq_x_plus(p, i, j);
                jy[n] = self.mobility.y[n].sqrt() * dq_y_plus(p, i, j);
            }
        }
        (jx, jy)
    }

    pub fn dissipation(&self) -> f64 {
        self.dissipation_x + self.dissipation_y
    }
}

/// `⟨p, L⟩_h`, the energy variation along the drift.
pub fn energy_variation_along(e: &Evaluation) -> f64 {
    lumped_inner(&e.pressure, &e.drift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{lumped_integral, weighted_dirichlet_x, weighted_dirichlet_y};
    use crate::noise::{basis_eval, sample_increments, NoiseModel};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_positive(g: Grid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Field::from_nodes(g, |_, _| rng.gen_range(0.5..1.5))
    }

    #[test]
    fn constant_state_has_trivial_rhs() {
        let g = Grid::unit_square(6).unwrap();
        let mat = Material::default();
        let u = Field::constant(g, 1.0);
        let p = pressure(&u, &mat, false).unwrap();
        assert!(p.values().iter().all(|&v| v == -6.0));
        assert!(pressure(&u, &mat, true).unwrap().max_abs() == 0.0);
        assert_eq!(drift(&u, &mat, false).unwrap().max_abs(), 0.0);
        let m = mobility_edges(&Field::constant(g, 1.7), &mat).unwrap();
        assert!(m.x.iter().chain(&m.y).all(|&v| (v - 1.7 * 1.7).abs() < 1e-14));
        let (jx, jy) = fluxes(&u, &mat, false).unwrap();
        assert!(jx.iter().chain(&jy).all(|&v| v == 0.0));
    }

    #[test]
    fn mobility_is_inverse_mean_of_gpp() {
        let g = Grid::new(3, 3, 1.0, 1.0).unwrap();
        let mut u = Field::constant(g, 1.0);
        u[(1, 0)] = 2.0;
        let m = mobility_edges(&u, &Material::default()).unwrap();
        assert!((m.x[g.idx(0, 0)] - 2.0).abs() < 1e-15);
        assert!(mobility_edges(&Field::constant(g, 0.0), &Material::default()).is_err());
    }

    #[test]
    fn zero_mode_on_constant_gives_zero_noise() {
        let g = Grid::unit_square(6).unwrap();
        let u = Field::constant(g, 2.0);
        let w = basis_eval(0, 0, &g);
        assert!(z_x(&u, &w).max_abs() < 1e-15);
        assert!(z_y(&u, &w).max_abs() < 1e-15);
    }

    #[test]
    fn stopped_state_is_frozen() {
        let g = Grid::unit_square(8).unwrap();
        let u = random_positive(g, 3);
        let noise = NoiseModel::power_law(1.0, 5).unwrap();
        let basis = SpectralBasis::for_model(&noise, &g, 1.0);
        let inc = sample_increments(&noise, basis.modes(), 0, 0, 1e-3);
        assert_eq!(diffusion_apply(&u, &basis, &inc, true).max_abs(), 0.0);
        let e = Evaluation::new(&u, &Material::default(), true).unwrap();
        assert_eq!(e.drift.max_abs(), 0.0);
        assert_eq!(e.dissipation(), 0.0);
    }

    #[test]
    fn flux_squares_match_weighted_dirichlet() {
        let g = Grid::unit_square(7).unwrap();
        let u = random_positive(g, 11);
        let e = Evaluation::new(&u, &Material::default(), false).unwrap();
        let (jx, jy) = e.fluxes();
        let s: f64 = jx.iter().chain(&jy).map(|v| v * v).sum::<f64>() * g.cell_area();
        let w = weighted_dirichlet_x(&e.mobility.x, &e.pressure, &e.pressure)
            + weighted_dirichlet_y(&e.mobility.y, &e.pressure, &e.pressure);
        assert!((s - w).abs() <= 1e-12 * w);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn drift_and_noise_conserve_mass(seed in any::<u64>(), n in 4usize..10) {
            let g = Grid::new(n, n + 1, 1.0, 1.1).unwrap();
            let u = random_positive(g, seed);
            let mat = Material::default();
            let e = Evaluation::new(&u, &mat, false).unwrap();
            let scale = e.drift.max_abs() * g.area();
            prop_assert!(lumped_integral(&e.drift).abs() <= 1e-12 * scale);
            let noise = NoiseModel::power_law(1.0, seed).unwrap();
            let basis = SpectralBasis::for_model(&noise, &g, 1.0);
            let inc = sample_increments(&noise, basis.modes(), 1, 0, 1.0);
            let d = diffusion_apply(&u, &basis, &inc, false);
            prop_assert!(lumped_integral(&d).abs() <= 1e-12 * d.max_abs().max(1e-300) * g.area());
        }

        #[test]
        fn energy_decreases_along_drift(seed in any::<u64>()) {
            let g = Grid::unit_square(6).unwrap();
            let u = random_positive(g, seed);
            let e = Evaluation::new(&u, &Material::default(), false).unwrap();
            let v = energy_variation_along(&e);
            let d = e.dissipation();
            prop_assert!(d >= 0.0);
            prop_assert!((v + d).abs() <= 1e-10 * d);
        }

        #[test]
        fn mobility_between_endpoint_squares(seed in any::<u64>()) {
            let g = Grid::unit_square(5).unwrap();
            let u = random_positive(g, seed);
            let m = mobility_edges(&u, &Material::default()).unwrap();
            for j in 0..5 {
                for i in 0..5 {
                    let n = g.idx(i, j);
                    let (a, b) = (u.at(i, j), u.at((i + 1) % 5, j));
                    prop_assert!(m.x[n] >= a.min(b).powi(2) * (1.0 - 1e-15));
                    prop_assert!(m.x[n] <= a.max(b).powi(2) * (1.0 + 1e-15));
                }
            }
        }
    }
}

use proptest::prelude::*;

use stfe2d::fem::lumped_integral;
use stfe2d::integrator::{stable_dt, RunConfig, Simulator};
use stfe2d::material::Material;
use stfe2d::noise::NoiseModel;
use stfe2d::{Field, Grid};

fn field(g: Grid, seed: u64, lo: f64, hi: f64) -> Field {
    let mut n = 0;
    Field::from_nodes(g, |_, _| {
        n += 1;
        lo + (hi - lo) * stfe2d::noise::counter_uniform(seed, n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn steps_conserve_mass_and_stay_positive(seed in any::<u64>(), lambda0 in 0.0f64..0.5, n in 6usize..14) {
        let g = Grid::unit_square(n).unwrap();
        let mat = Material::default();
        let u = field(g, seed, 0.7, 1.3);
        let cfg = RunConfig::new(stable_dt(&u, &mat), 1.0, 1e12).unwrap();
        let noise = NoiseModel::power_law(lambda0, seed).unwrap();
        let sim = Simulator::new(&g, &cfg, &mat, &noise).unwrap();
        let mut s = sim.init(u).unwrap();
        let m0 = lumped_integral(&s.u);
        for _ in 0..20 {
            sim.step(&mut s, f64::INFINITY).unwrap();
            prop_assert!(s.u.min() > cfg.u_floor);
            prop_assert!(((lumped_integral(&s.u) - m0) / m0).abs() < 1e-12);
        }
    }

    #[test]
    fn stepping_is_reproducible(seed in any::<u64>()) {
        let g = Grid::unit_square(8).unwrap();
        let mat = Material::default();
        let u = field(g, seed ^ 1, 0.8, 1.2);
        let cfg = RunConfig::new(stable_dt(&u, &mat), 1.0, 1e12).unwrap();
        let noise = NoiseModel::power_law(0.3, seed).unwrap();
        let sim = Simulator::new(&g, &cfg, &mat, &noise).unwrap();
        let mut a = sim.init(u.clone()).unwrap();
        let mut b = sim.init(u).unwrap();
        for _ in 0..5 {
            sim.step(&mut a, f64::INFINITY).unwrap();
            sim.step(&mut b, f64::INFINITY).unwrap();
        }
        prop_assert_eq!(a.u, b.u);
    }

    #[test]
    fn noise_free_energy_never_increases(seed in any::<u64>()) {
        let g = Grid::unit_square(8).unwrap();
        let mat = Material::default();
        let u = field(g, seed, 0.8, 1.2);
        let cfg = RunConfig::new(stable_dt(&u, &mat), 1.0, 1e12).unwrap();
        let noise = NoiseModel::zero();
        let sim = Simulator::new(&g, &cfg, &mat, &noise).unwrap();
        let mut s = sim.init(u).unwrap();
        let mut prev = s.energy;
        for _ in 0..50 {
            sim.step(&mut s, f64::INFINITY).unwrap();
            prop_assert!(s.energy <= prev + 1e-12 * prev.abs());
            prev = s.energy;
        }
    }
}

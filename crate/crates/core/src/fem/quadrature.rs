//! Gauss–Legendre rules on the reference interval `[0, 1]`.

/// Nodes and weights of the `n`-point rule on `[0, 1]`, `1 <= n <= 5`.
/// The rule integrates polynomials of degree `2n - 1` exactly.
pub fn gauss_legendre(n: usize) -> (&'static [f64], &'static [f64]) {
    match n {
        1 => (&[0.5], &[1.0]),
        2 => (&G2_X, &G2_W),
        3 => (&G3_X, &G3_W),
        4 => (&G4_X, &G4_W),
        5 => (&G5_X, &G5_W),
        _ => panic!("gauss_legendre: unsupported order {n}"),
    }
}

const G2_X: [f64; 2] = [0.211_324_865_405_187_13, 0.788_675_134_594_812_9];
const G2_W: [f64; 2] = [0.5, 0.5];
const G3_X: [f64; 3] = [0.112_701_665_379_258_3, 0.5, 0.887_298_334_620_741_7];
const G3_W: [f64; 3] = [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0];
const G4_X: [f64; 4] = [
    0.069_431_844_202_973_71,
    0.330_009_478_207_571_87,
    0.669_990_521_792_428_1,
    0.930_568_155_797_026_2,
];
const G4_W: [f64; 4] = [
    0.173_927_422_568_726_84,
    0.326_072_577_431_273_1,
    0.326_072_577_431_273_1,
    0.173_927_422_568_726_84,
];
const G5_X: [f64; 5] = [
    0.046_910_077_030_668_02,
    0.230_765_344_947_158_45,
    0.5,
    0.769_234_655_052_841_5,
    0.953_089_922_969_332,
];
const G5_W: [f64; 5] = [
    0.118_463_442_528_094_71,
    0.239_314_335_249_683_1,
    0.284_444_444_444_444_45,
    0.239_314_335_249_683_1,
    0.118_463_442_528_094_71,
];

/// `∫_a^b f(s) ds` with the `n`-point rule.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let len = b - a;
    x.iter()
        .zip(w)
        .map(|(&xi, &wi)| wi * f(a + len * xi))
        .sum::<f64>()
        * len
}

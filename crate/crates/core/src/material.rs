//! Interface potentials, the entropy function of the quadratic mobility and
//! element means `[f(u)]` over the range of nodal values.

use crate::error::{Error, Result};
use crate::fem::quadrature::integrate;

/// Relative width below which an element mean is replaced by the midpoint value.
pub const DEGENERATE_REL: f64 = 1e-8;

/// `F(u) = a u^{-p} - b u^{-q} + c` for `u > 0`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerPair {
    pub a: f64,
    pub p: f64,
    pub b: f64,
    pub q: f64,
    pub c: f64,
}

impl PowerPair {
    /// `u^{-8} - u^{-2} + 1`.
    pub const PROTOTYPE: PowerPair = PowerPair {
        a: 1.0,
        p: 8.0,
        b: 1.0,
        q: 2.0,
        c: 1.0,
    };

    fn f(&self, u: f64) -> f64 {
        self.a * u.powf(-self.p) - self.b * u.powf(-self.q) + self.c
    }
    fn df(&self, u: f64) -> f64 {
        -self.p * self.a * u.powf(-self.p - 1.0) + self.q * self.b * u.powf(-self.q - 1.0)
    }
    fn d2f(&self, u: f64) -> f64 {
        self.p * (self.p + 1.0) * self.a * u.powf(-self.p - 2.0)
            - self.q * (self.q + 1.0) * self.b * u.powf(-self.q - 2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Potential {
    Prototype,
    Custom(PowerPair),
}

impl Potential {
    pub fn pair(&self) -> PowerPair {
        match self {
            Potential::Prototype => PowerPair::PROTOTYPE,
            Potential::Custom(pp) => *pp,
        }
    }
}

/// Which function an element mean averages.
#[derive(Clone, Copy)]
pub enum MeanKind<'a> {
    /// `1 / G''(s) = s^2`.
    InvGpp,
    /// `G''(s) = s^{-2}`.
    Gpp,
    /// `F''(s)` of the material, including the Stratonovich shift.
    Fpp,
    /// Any continuous function, averaged by 5-point Gauss–Legendre.
    Custom(&'a dyn Fn(f64) -> f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    p: f64,
    eps: f64,
    rho: f64,
    strat_shift: f64,
    potential: Potential,
}

impl Default for Material {
    fn default() -> Self {
        Self {
            p: 8.0,
            eps: 1.0,
            rho: 1.0,
            strat_shift: 0.0,
            potential: Potential::Prototype,
        }
    }
}

/// `2/p + ε/2 + ρ/(2p)`; the regularization condition requires this below 1.
pub fn r_condition(p: f64, eps: f64, rho: f64) -> f64 {
    2.0 / p + eps / 2.0 + rho / (2.0 * p)
}

impl Material {
    pub fn new(p: f64, eps: f64, rho: f64, potential: Potential) -> Result<Self> {
        let v = Self::violations(p, eps, rho, &potential);
        if !v.is_empty() {
            return Err(Error::Config(v));
        }
        Ok(Self {
            p,
            eps,
            rho,
            strat_shift: 0.0,
            potential,
        })
    }

    /// Every violated parameter assumption, tagged with its label.
    pub fn violations(p: f64, eps: f64, rho: f64, potential: &Potential) -> Vec<String> {
        let mut v = Vec::new();
        if !(p > 2.0) {
            v.push(format!("(P) violated: growth exponent p = {p} must exceed 2"));
        }
        if !(eps > 0.0 && eps < 2.0) {
            v.push(format!("(R) violated: eps = {eps} must lie in (0, 2)"));
        }
        if !(rho > 0.0) {
            v.push(format!("(R) violated: rho = {rho} must be positive"));
        }
        let r = r_condition(p, eps, rho);
        if !(r < 1.0) {
            v.push(format!("(R) violated: 2/p+eps/2+rho/(2p) = {r:.4} >= 1"));
        }
        let pp = potential.pair();
        match potential {
            Potential::Prototype if p != 8.0 => {
                v.push(format!("(P) violated: the prototype potential has p = 8, got p = {p}"))
            }
            Potential::Custom(pp) if pp.p != p => v.push(format!(
                "(P) violated: leading exponent {} of the potential differs from p = {p}",
                pp.p
            )),
            _ => {}
        }
        if !(pp.a > 0.0 && pp.q >= 0.0 && pp.q < pp.p) {
            v.push("(P) violated: potential needs a > 0 and 0 <= q < p".to_string());
        }
        v
    }

    /// Copy with the Stratonovich shift `C_Strat (u - ln u)` added to `F`.
    pub fn with_strat_shift(mut self, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::config(format!("Stratonovich shift must be >= 0, got {c}")));
        }
        self.strat_shift = c;
        Ok(self)
    }

    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn strat_shift(&self) -> f64 {
        self.strat_shift
    }
    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// `F(u)`; requires `u > 0`.
    pub fn f(&self, u: f64) -> Result<f64> {
        positive("F", u).map(|u| self.f_raw(u))
    }
    pub fn df(&self, u: f64) -> Result<f64> {
        positive("F'", u).map(|u| self.df_raw(u))
    }
    pub fn d2f(&self, u: f64) -> Result<f64> {
        positive("F''", u).map(|u| self.d2f_raw(u))
    }

    #[inline]
    pub(crate) fn f_raw(&self, u: f64) -> f64 {
        let base = self.potential.pair().f(u);
        if self.strat_shift == 0.0 {
            base
        } else {
            base + self.strat_shift * (u - u.ln())
        }
    }
    #[inline]
    pub(crate) fn df_raw(&self, u: f64) -> f64 {
        self.potential.pair().df(u) + self.strat_shift * (1.0 - 1.0 / u)
    }
    #[inline]
    pub(crate) fn d2f_raw(&self, u: f64) -> f64 {
        self.potential.pair().d2f(u) + self.strat_shift / (u * u)
    }

    /// `(1/(b-a)) ∫_a^b f(s) ds` for positive endpoints.
    pub fn elem_mean(&self, kind: MeanKind<'_>, a: f64, b: f64) -> Result<f64> {
        positive("element mean", a)?;
        positive("element mean", b)?;
        Ok(self.elem_mean_raw(kind, a, b))
    }

    pub(crate) fn elem_mean_raw(&self, kind: MeanKind<'_>, a: f64, b: f64) -> f64 {
        let degenerate = (b - a).abs() <= DEGENERATE_REL * a.max(b);
        let m = 0.5 * (a + b);
        match kind {
            MeanKind::InvGpp => {
                if degenerate {
                    m * m
                } else {
                    (a * a + a * b + b * b) / 3.0
                }
            }
            MeanKind::Gpp => {
                if degenerate {
                    1.0 / (m * m)
                } else {
                    1.0 / (a * b)
                }
            }
            MeanKind::Fpp => {
                if degenerate {
                    self.d2f_raw(m)
                } else {
                    (self.df_raw(b) - self.df_raw(a)) / (b - a)
                }
            }
            MeanKind::Custom(f) => {
                if degenerate {
                    f(m)
                } else {
                    integrate(f, a, b, 5) / (b - a)
                }
            }
        }
    }
}

fn positive(what: &'static str, u: f64) -> Result<f64> {
    if u > 0.0 {
        Ok(u)
    } else {
        Err(Error::Domain { what, value: u })
    }
}

/// Entropy density `G(u) = u - 1 - ln u`, the second primitive of `1/u^2`
/// normalized at `u = 1`.
pub fn entropy_g(u: f64) -> Result<f64> {
    positive("G", u).map(g_raw)
}
pub fn d_entropy_g(u: f64) -> Result<f64> {
    positive("G'", u).map(dg_raw)
}
pub fn d2_entropy_g(u: f64) -> Result<f64> {
    positive("G''", u).map(d2g_raw)
}

/// Quadratic mobility `m(u) = u^2`.
pub fn mobility(u: f64) -> f64 {
    u * u
}

#[inline]
pub(crate) fn g_raw(u: f64) -> f64 {
    (u - 1.0) - u.ln()
}
#[inline]
pub(crate) fn dg_raw(u: f64) -> f64 {
    1.0 - 1.0 / u
}
#[inline]
pub(crate) fn d2g_raw(u: f64) -> f64 {
    1.0 / (u * u)
}

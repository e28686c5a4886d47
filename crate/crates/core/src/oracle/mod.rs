//! Brute-force reference implementations on tiny grids.
//!
//! Everything here is assembled cell by cell from the definitions of the
//! lumped forms, independently of the stencil code in `fem` and `scheme`.

mod check;
mod dense;
mod identities;

pub use check::{run_checks, symmetric_table, CheckResult};
pub use dense::{
    apply_table, dense_drift, dense_energy, dense_pressure, dense_weak_residual, dense_z_table,
    DenseForms,
    MAX_NODES,
};
pub use identities::{
    brute_force_strat_constant, chain_rule_residual, ibp_residuals, IbpResiduals,
};

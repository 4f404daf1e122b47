//! Hyperbolic-cross approximation of mixed-smoothness function classes.
//!
//! The crate models smoothness classes governed by a majorant of
//! mixed-modulus type and measures how well their members are approximated
//! by band-limited functions with spectrum in a step hyperbolic cross:
//!
//! - [`majorant`]: majorant functions, their structural conditions, and the
//!   class parameters `(p, q, theta, l, alpha, d)`;
//! - [`lattice`]: the index families `kappa(N)` / `Theta(N)` cut out by the
//!   weight `Omega(2^{-s}) 2^{||s||_1 (1/p - 1/q)}`, cardinality fits and
//!   shell-truncated tail sums;
//! - [`kernels`] and [`quad`]: the band-limited kernel basis with certified
//!   quadrature for its `L_p` norms;
//! - [`model`] and [`norms`]: block functions, mixed moduli of smoothness,
//!   and the two equivalent class norms;
//! - [`approx`]: the cross projector, error functionals, extremal witness
//!   functions and convergence-rate experiments;
//! - [`suites`]: the property suites behind `verify`.

pub mod approx;
pub mod error;
pub mod kernels;
pub mod lattice;
pub mod majorant;
pub mod model;
pub mod norms;
pub mod quad;
pub mod suites;

pub use approx::{
    approx_error, cell_lower_bound, lemma_v_upper, make_f1, make_f2, make_f3, partial_sum,
    rate_experiment, ApproxError, RateConfig, RateRow, RateTable, Witness,
};
pub use error::{Error, Result};
pub use lattice::{
    cardinality_fit, enumerate_kappa, enumerate_theta, tail_sum, weight, DyadicIndex,
    LevelSetFamily,
};
pub use majorant::{
    check_bari_stechkin, check_psi_l, MajorantSpec, SmoothnessParams, Theta,
};
pub use model::{BlockFunction, MixedDifference};
pub use norms::{
    decomposition_norm, definition_norm, littlewood_paley_ratio, lq_norm, lq_norm_tensor,
    mixed_modulus, NormBudgets,
};
pub use quad::{block_kernel_lp_norm, Certified, QuadratureGrid};
pub use suites::{run_suite, SuiteReport, SUITE_NAMES};

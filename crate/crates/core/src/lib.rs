//! Open-system evolution and geometric phase of a two-level atom near a
//! perfectly reflecting plane.
//!
//! All kernels work in dimensionless units: frequencies in units of the bare
//! transition frequency `omega0`, times as `phi = omega0 * t`, and the
//! atom-plate distance as `u = 2 omega0 z / c`. SI quantities appear only in
//! [`units`] and the command-line front end.

// NaN must fail range checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dissipator;
pub mod dynamics;
pub mod error;
pub mod phase;
pub mod quadrature;
pub mod spectral;
pub mod units;
pub mod verify;

pub use dissipator::{build_coeffs, AtomParams, DissipatorCoeffs, Geometry, LambShiftPolicy};
pub use dynamics::{evolve_numeric, rho_analytic, sample_analytic, DensityMatrix2, Trajectory};
pub use error::{Error, Result};
pub use phase::{
    gp_closed_form, gp_first_order, gp_general, gp_integral, nonradiative_ratio, optimal_theta,
    phase_difference, sweep_z, PhaseResult, SweepRow,
};
pub use spectral::{mod_fx, mod_fy, mod_fz, modulation};

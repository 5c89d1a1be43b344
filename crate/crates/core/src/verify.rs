//! Built-in self-check suite: each analytic route is compared with an
//! independent one and the measured residual is reported against its bound.

use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::dissipator::{build_coeffs, AtomParams, DissipatorCoeffs, Geometry};
use crate::dynamics::{evolve_numeric, rho_analytic, sample_analytic};
use crate::error::Result;
use crate::phase::{gp_closed_form, gp_general, gp_integral, nonradiative_ratio, optimal_theta};
use crate::spectral::{self, boundary_factor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Pass when `residual <= threshold`.
    AtMost,
    /// Pass when `residual >= threshold`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub threshold: f64,
    pub bound: Bound,
}

impl Check {
    fn at_most(name: &'static str, residual: f64, threshold: f64) -> Self {
        Self {
            name,
            residual,
            threshold,
            bound: Bound::AtMost,
        }
    }

    fn at_least(name: &'static str, residual: f64, threshold: f64) -> Self {
        Self {
            name,
            residual,
            threshold,
            bound: Bound::AtLeast,
        }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.residual <= self.threshold,
            Bound::AtLeast => self.residual >= self.threshold,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        write!(
            f,
            "{:<28} residual {:.3e} {op} {:.1e}  {}",
            self.name,
            self.residual,
            self.threshold,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Knobs of the suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Relative error injected into the decay rate seen by the analytic side of
    /// every comparison. Zero for a real run; nonzero only to exercise the
    /// failure path.
    pub perturbation: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { perturbation: 0.0 }
    }
}

fn perturbed(c: DissipatorCoeffs, opts: &VerifyOptions) -> DissipatorCoeffs {
    DissipatorCoeffs {
        a: c.a * (1.0 + opts.perturbation),
        b: c.b * (1.0 + opts.perturbation),
        ..c
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Runs every check for the atom `params` placed at `geom`.
///
/// The evolution checks use `params` as given, with the decay rate raised to
/// `1e-3` if needed so a single cycle carries a visible dissipative signal.
pub fn run_checks(
    params: &AtomParams,
    geom: &Geometry,
    opts: &VerifyOptions,
) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    // master equation: RK4 against the closed-form state over one cycle
    let mut coeffs = build_coeffs(params, geom);
    if coeffs.a < 1e-3 {
        coeffs = DissipatorCoeffs::vacuum(1e-3);
    }
    let traj = evolve_numeric(params, &coeffs, TAU, 2000)?;
    let oracle = perturbed(coeffs, opts);
    let mut max_diff: f64 = 0.0;
    let mut max_trace: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for (phi, state) in traj.iter() {
        max_diff = max_diff.max(state.max_abs_diff(&rho_analytic(phi, params, &oracle)));
        max_trace = max_trace.max((state.trace() - 1.0).abs());
        let half_tr = 0.5 * state.trace();
        let disc = (half_tr * half_tr - state.determinant()).max(0.0).sqrt();
        min_eig = min_eig.min(half_tr - disc);
    }
    checks.push(Check::at_most("rk4_vs_analytic", max_diff, 1e-8));
    checks.push(Check::at_most("trace_preservation", max_trace, 1e-10));
    checks.push(Check::at_most(
        "positivity_violation",
        (-min_eig).max(0.0),
        1e-12,
    ));

    // phase routes on the fixed parameter grid
    let mut closed_vs_quad: f64 = 0.0;
    let mut env_closed_vs_quad: f64 = 0.0;
    for theta in [0.3, PI / 2.0, 2.0, PI] {
        for g in [1e-7, 1e-5] {
            for u in [0.1, 1.0, 10.0, f64::INFINITY] {
                let p = params.with_theta(theta)?.with_gamma_ratio(g)?;
                let c = build_coeffs(&p, &Geometry::from_u(u)?);
                for phi_end in [TAU, 200.0 * PI] {
                    let quad = gp_integral(&p, &c, phi_end)?;
                    let closed = gp_closed_form(&p, &perturbed(c, opts), phi_end)?;
                    closed_vs_quad = closed_vs_quad.max(rel(closed.total, quad.total));
                    // the environment part is zero at theta = pi
                    if theta != PI {
                        env_closed_vs_quad = env_closed_vs_quad
                            .max(rel(closed.environment_part, quad.environment_part));
                    }
                }
            }
        }
    }
    checks.push(Check::at_most(
        "closed_form_vs_quadrature",
        closed_vs_quad,
        1e-10,
    ));
    checks.push(Check::at_most(
        "environment_closed_vs_quad",
        env_closed_vs_quad,
        1e-10,
    ));

    let mut general_vs_quad: f64 = 0.0;
    for theta in [0.3, PI / 2.0, 2.0] {
        let p = params.with_theta(theta)?.with_gamma_ratio(1e-5)?;
        let c = build_coeffs(&p, &Geometry::from_u(1.0)?);
        let traj = sample_analytic(&p, &c, TAU, 10_000)?;
        let general = gp_general(&traj, &c)?;
        let quad = gp_integral(&p, &perturbed(c, opts), TAU)?.total;
        general_vs_quad = general_vs_quad.max((general - quad).abs());
    }
    checks.push(Check::at_most(
        "general_vs_quadrature",
        general_vs_quad,
        1e-6,
    ));

    let mut unitary: f64 = 0.0;
    for theta in [0.0, 0.5, 1.0, 2.0, 3.0] {
        let p = params.with_theta(theta)?;
        let c = DissipatorCoeffs::unitary();
        let got = gp_integral(&p, &c, TAU)?.total;
        unitary = unitary.max((got + PI * (1.0 - theta.cos())).abs());
    }
    checks.push(Check::at_most("unitary_limit", unitary, 1e-12));

    // boundary limits of the modulation functions
    let near = spectral::modulation(1e-8)?;
    let limit = (near.fx - 1.0).abs().max((near.fz + 1.0).abs());
    checks.push(Check::at_most("plane_contact_limit", limit, 1e-12));
    let far = spectral::modulation(1e7)?;
    let far_max = far.fx.abs().max(far.fy.abs()).max(far.fz.abs());
    checks.push(Check::at_most("free_space_limit", far_max, 1e-5));
    let doubling =
        boundary_factor([0.0, 0.0, 1.0], 1e-8)? / boundary_factor([0.0, 0.0, 1.0], f64::INFINITY)?;
    checks.push(Check::at_most(
        "normal_dipole_doubling",
        (doubling - 2.0).abs(),
        1e-12,
    ));

    // linear convergence of the first-order expansion
    let p = params.with_theta(PI / 2.0)?;
    let free = Geometry::free_space();
    let coefficient = |p: &AtomParams| -> Result<f64> {
        let theta = p.theta();
        Ok(-PI
            * PI
            * 0.5
            * boundary_factor(p.alpha(), free.u())?
            * (2.0 + theta.cos())
            * theta.sin().powi(2))
    };
    let scaled_residual = |g: f64| -> Result<f64> {
        let q = p.with_gamma_ratio(g)?;
        let c = perturbed(build_coeffs(&q, &free), opts);
        let env = gp_integral(&q, &c, TAU)?.environment_part;
        Ok((env / g - coefficient(&q)?).abs())
    };
    let ratio = scaled_residual(1e-7)? / scaled_residual(1e-8)?;
    checks.push(Check::at_least("first_order_convergence", ratio, 8.0));

    let theta = optimal_theta();
    let c = theta.cos();
    checks.push(Check::at_most("optimal_angle", (theta - 1.354).abs(), 1e-3));
    checks.push(Check::at_most(
        "optimal_angle_stationarity",
        (3.0 * c * c + 4.0 * c - 1.0).abs(),
        1e-10,
    ));

    let ratio = nonradiative_ratio(1e-6, 1e-18)?;
    checks.push(Check::at_most(
        "nonradiative_ratio",
        (ratio - 1e-6).abs(),
        0.0,
    ));

    Ok(checks)
}

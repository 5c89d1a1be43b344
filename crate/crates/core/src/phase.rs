//! Geometric phase of the decaying atom.
//!
//! Four independent routes are provided:
//!
//! * [`gp_general`] evaluates the mixed-state functional
//!   `arg( sum_k sqrt(l_k(0) l_k(T)) <phi_k(0)|phi_k(T)> exp(-int <phi_k|d phi_k>) )`
//!   on an arbitrary sampled trajectory;
//! * [`gp_integral`] integrates `-Omega cos^2(theta_tau / 2)` by adaptive quadrature;
//! * [`gp_closed_form`] uses the antiderivative of that integrand;
//! * [`gp_first_order`] is the expansion to first order in `gamma0 / omega0` for one cycle.
//!
//! Phases are split into the unitary part `-Omega (1 - cos theta) phi / 2`
//! (`-pi (1 - cos theta)` per cycle) and the environment-induced remainder.
//! The remainder is computed directly rather than as a difference of large
//! numbers, so it keeps full relative precision even when it is a tiny
//! fraction of the total.

use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dissipator::{build_coeffs, AtomParams, DissipatorCoeffs, Geometry};
use crate::dynamics::{eigen_decompose_state, Trajectory};
use crate::error::{Error, Result};
use crate::quadrature::{self, QuadOptions};
use crate::spectral;
use crate::units;

/// Relative tolerance of the phase quadrature.
pub const QUAD_REL_TOL: f64 = 1e-12;

/// Largest `a * phi` for which the closed form is guaranteed finite.
pub const MAX_DECAY_EXPONENT: f64 = 700.0;

/// Minimum number of samples accepted by [`gp_general`].
pub const MIN_TRAJECTORY_POINTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseResult {
    pub total: f64,
    /// `-(Omega/omega0)(1 - cos theta) phi / 2`: what an isolated atom would acquire.
    pub geometric_part: f64,
    pub environment_part: f64,
}

impl PhaseResult {
    fn from_parts(geometric_part: f64, environment_part: f64) -> Self {
        Self {
            total: geometric_part + environment_part,
            geometric_part,
            environment_part,
        }
    }
}

/// One row of a distance sweep: far distance in metres and phase difference in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub z: f64,
    pub delta: f64,
}

fn one_minus_cos(theta: f64) -> f64 {
    2.0 * (0.5 * theta).sin().powi(2)
}

fn one_plus_cos(theta: f64) -> f64 {
    2.0 * (0.5 * theta).cos().powi(2)
}

fn unitary_part(theta: f64, omega_eff: f64, phi: f64) -> f64 {
    -0.5 * omega_eff * one_minus_cos(theta) * phi
}

fn check_phi_end(phi_end: f64) -> Result<()> {
    if !(phi_end > 0.0 && phi_end.is_finite()) {
        return Err(Error::Precondition(format!(
            "phi_end must be positive and finite, got {phi_end}"
        )));
    }
    Ok(())
}

/// `x + expm1(-x)`, accurate for small `x`.
fn x_plus_expm1_neg(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // x^2/2 - x^3/6 + x^4/24 - ...
        let mut term = 0.5 * x * x;
        let mut sum: f64 = 0.0;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs() && k < 30.0 {
            sum += term;
            k += 1.0;
            term *= -x / k;
        }
        sum
    } else {
        x + (-x).exp_m1()
    }
}

/// `ln(1 + r) - r`, accurate for small `r`.
fn log1p_minus(r: f64) -> f64 {
    if r.abs() < 0.1 {
        // -r^2/2 + r^3/3 - ...
        let mut sum: f64 = 0.0;
        let mut pow = r * r;
        let mut k = 2.0;
        let mut sign = -1.0;
        while pow.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) && k < 60.0 {
            sum += sign * pow / k;
            pow *= r;
            k += 1.0;
            sign = -sign;
        }
        sum
    } else {
        r.ln_1p() - r
    }
}

/// Decay-dependent quantities shared by the rate and its antiderivative,
/// all in `w = e^{-x}`, `x = 4 a phi`.
struct Decay {
    w: f64,
    /// `1 - w`
    v: f64,
    /// `1 - 2w`
    m: f64,
    /// `sqrt(1 - Q^2 w (1 - w))`, the Bloch radius over `w`
    s: f64,
    /// `1 + s - 2w`
    spread: f64,
}

impl Decay {
    fn new(x: f64, p: f64, q: f64) -> Self {
        let w = (-x).exp();
        let v = -(-x).exp_m1();
        let m = 1.0 - 2.0 * w;
        // 1 - Q^2 w v rewritten as (1 - 2w)^2 + P(2 + Q) w v
        let lift = p * (2.0 + q) * w * v;
        let s = (m * m + lift).sqrt();
        let spread = if m >= 0.0 { m + s } else { lift / (s - m) };
        Self { w, v, m, s, spread }
    }
}

/// Environment part of the phase-rate integrand,
/// `cos^2(theta_tau/2) - (1 - cos theta)/2`, with `p = 1 - cos theta`,
/// `q = 1 + cos theta`.
fn environment_rate(p: f64, q: f64, x: f64) -> f64 {
    let Decay { w, v, m, s, spread } = Decay::new(x, p, q);
    if s == 0.0 {
        // excited start at the population crossing: the rate steps from 0 to 1
        return 0.5;
    }
    let twice_rate_s = if m < 0.0 {
        p * q * w * v * (1.0 + q - q * v / (1.0 + s)) / (s - m)
    } else if q >= 1.0 {
        (q - 1.0) * spread + p * v
    } else {
        q * ((s - w) + q * w * v / (1.0 + s))
    };
    0.5 * twice_rate_s / s
}

fn horner(coefs: &[f64], v: f64) -> f64 {
    coefs.iter().rev().fold(0.0, |acc, c| acc * v + c)
}

/// `8a` times the integral of [`environment_rate`] over `[0, x / 4a]`.
///
/// Three evaluations cover the parameter space without cancellation: before
/// the population crossing (`w > 1/2`) at `theta < pi/2` a rational form with
/// the factor `P` taken out analytically; otherwise the logarithms are split
/// into pieces that vanish with `x`, or, once `1 + r` is small, taken directly.
fn environment_bracket(x: f64, p: f64, q: f64) -> f64 {
    let d = Decay::new(x, p, q);
    let Decay { w, v, m, s, spread } = d;
    if m < 0.0 && q > 1.0 {
        let t = (2.0 + q) * w / (s - m);
        let (p2, p3, t2, t3) = (p * p, p * p * p, t * t, t * t * t);
        let pt = p * t;
        let den = w * w * (pt * v - 2.0 * m) * (pt * v + 2.0 * w) * (2.0 + p * v * (t - 1.0));
        let b_num = horner(
            &[
                8.0,
                8.0 * pt + 2.0 * p + 8.0 * t - 40.0,
                2.0 * p2 * t2 + p2 * t + p2 + 8.0 * p * t2 - 24.0 * pt - 10.0 * p - 32.0 * t + 72.0,
                2.0 * p2 * t3 - 2.0 * p2 * t2 - p2 * t - p2 - 18.0 * p * t2
                    + 20.0 * pt
                    + 8.0 * p
                    + 36.0 * t
                    - 48.0,
                -p2 * t3 + p2 * t2 + 6.0 * p * t2 - 6.0 * pt - 8.0 * t + 8.0,
            ],
            v,
        );
        let c_num = horner(
            &[
                -4.0 * pt + 6.0 * p + 8.0 * t,
                -4.0 * p2 * t2 + 5.0 * p2 * t + p2 + 8.0 * p * t2 + 24.0 * pt - 30.0 * p - 32.0 * t,
                -p3 * t3 + p3 * t2 + 2.0 * p2 * t3 + 16.0 * p2 * t2
                    - 15.0 * p2 * t
                    - p2
                    - 18.0 * p * t2
                    - 48.0 * pt
                    + 44.0 * p
                    + 36.0 * t
                    + 8.0,
                2.0 * p3 * t3 - 2.0 * p3 * t2 - p2 * t3 - 17.0 * p2 * t2
                    + 16.0 * p2 * t
                    + 6.0 * p * t2
                    + 34.0 * pt
                    - 28.0 * p
                    - 8.0 * t
                    - 8.0,
                -p3 * t3 + p3 * t2 + 6.0 * p2 * t2 - 6.0 * p2 * t - 8.0 * pt + 8.0 * p,
            ],
            v,
        );
        // ln(R1 R2 / w^2) = ln(1 + A), A = P v B, and B - 1 = v C
        let a = p * v * b_num / den;
        let b_minus_one = v * c_num / den;
        return log1p_minus(a) + p * (b_minus_one * v - x_plus_expm1_neg(x));
    }

    let q2 = q * q;
    let n0 = 0.5 * p * (2.0 + q);
    let first_log = (q2 * v * spread / (2.0 * (1.0 + s) * n0)).ln_1p();
    let r = -2.0 * q * v * (1.0 + q * w / (1.0 + s)) / (q + 2.0);
    if r > -0.5 {
        let k_minus_one = -q * spread / ((1.0 + s) * (q + 2.0));
        first_log + log1p_minus(r) + q * x_plus_expm1_neg(x) - q * v * k_minus_one
    } else {
        let y = p / (spread + p * w);
        let r2 = (p + 2.0 * q * w * y) / (q + 2.0);
        first_log + r2.ln() + q * x
    }
}

/// Phase from quadrature of `-Omega cos^2(theta_tau/2)` over `[0, phi_end]`.
///
/// The unitary part is integrated exactly; adaptive Gauss–Kronrod handles the
/// environment part, whose time scale is `1/a`.
pub fn gp_integral(
    params: &AtomParams,
    coeffs: &DissipatorCoeffs,
    phi_end: f64,
) -> Result<PhaseResult> {
    check_phi_end(phi_end)?;
    let theta = params.theta();
    let omega = coeffs.omega_eff;
    let geometric = unitary_part(theta, omega, phi_end);
    if coeffs.a == 0.0 {
        return Ok(PhaseResult::from_parts(geometric, 0.0));
    }
    let (p, q) = (one_minus_cos(theta), one_plus_cos(theta));
    let rate = 4.0 * coeffs.a;
    let f = |phi: f64| environment_rate(p, q, rate * phi);

    // sharpest feature of the integrand sits at e^{-4a phi} = 1/2
    let knee = LN_2 / rate;
    let mut breaks = vec![0.0];
    if knee < phi_end {
        breaks.push(knee);
    }
    breaks.push(phi_end);

    let opts = QuadOptions {
        rel_tol: QUAD_REL_TOL,
        abs_tol: 0.0,
        max_intervals: 10_000,
    };
    let mut env = 0.0;
    for w in breaks.windows(2) {
        env += quadrature::integrate(&f, w[0], w[1], &opts)?.value;
    }
    Ok(PhaseResult::from_parts(geometric, -omega * env))
}

/// Phase from the antiderivative
/// `F(phi) = -phi/2 - ln(E - Q^2/2 + S)/(8a) - sgn(Q) ln(2Q^2/E - Q^2 + 2QS/E)/(8a)`,
/// `E = e^{4a phi}`, `S = sqrt(E^2 - E Q^2 + Q^2)`, `Q = 1 + cos theta`,
/// as `(Omega/omega0)(F(phi_end) - F(0))`.
///
/// The unitary part is separated analytically and the environment part is
/// evaluated in `e^{-4a phi}` with the cancelling pieces of `F(phi) - F(0)`
/// rearranged (see `environment_bracket`), so it keeps full relative precision
/// for `a phi` from `1e-12` up to [`MAX_DECAY_EXPONENT`].
/// `theta = pi` (`Q = 0`) and `theta = 0` (where `F(0)` is singular) use the
/// exact values of the integral instead.
pub fn gp_closed_form(
    params: &AtomParams,
    coeffs: &DissipatorCoeffs,
    phi_end: f64,
) -> Result<PhaseResult> {
    check_phi_end(phi_end)?;
    let theta = params.theta();
    let omega = coeffs.omega_eff;
    let a = coeffs.a;
    let geometric = unitary_part(theta, omega, phi_end);
    if a == 0.0 || theta == PI {
        return Ok(PhaseResult::from_parts(geometric, 0.0));
    }
    if a * phi_end > MAX_DECAY_EXPONENT {
        return Err(Error::numerical(
            phi_end,
            "decay exponent beyond the closed-form range",
        ));
    }
    if theta == 0.0 {
        // the state is diagonal: cos^2(theta_tau/2) jumps from 0 to 1 at e^{4a phi} = 2
        let after = (phi_end - LN_2 / (4.0 * a)).max(0.0);
        return Ok(PhaseResult::from_parts(geometric, -omega * after));
    }

    let bracket = environment_bracket(4.0 * a * phi_end, one_minus_cos(theta), one_plus_cos(theta));
    let env = -omega * bracket / (8.0 * a);
    if !env.is_finite() {
        return Err(Error::numerical(phi_end, "closed form overflowed"));
    }
    Ok(PhaseResult::from_parts(geometric, env))
}

/// First-order expansion for one quasi-cycle:
/// `-pi(1 - cos theta) - pi^2 (gamma0 / 2 omega0) sum_i alpha_i (1 - f_i)(2 + cos theta) sin^2 theta`.
pub fn gp_first_order(params: &AtomParams, geom: &Geometry) -> Result<PhaseResult> {
    let env = first_order_environment(params, geom, TAU)?;
    Ok(PhaseResult::from_parts(
        -PI * one_minus_cos(params.theta()),
        env,
    ))
}

/// Leading term of the environment part for small `a * phi_end`,
/// `-a (2 + cos theta) sin^2 theta phi_end^2 / 2`. It grows quadratically, so
/// over one cycle it reduces to the environment part of [`gp_first_order`].
pub fn first_order_environment(params: &AtomParams, geom: &Geometry, phi_end: f64) -> Result<f64> {
    let factor = spectral::boundary_factor(params.alpha(), geom.u())?;
    let a = 0.25 * params.gamma_ratio() * factor;
    Ok(-0.5 * a * first_order_envelope(params.theta()) * phi_end * phi_end)
}

/// The first-order envelope `(2 + cos theta) sin^2 theta`.
pub fn first_order_envelope(theta: f64) -> f64 {
    (2.0 + theta.cos()) * theta.sin().powi(2)
}

/// Angle in `(0, pi/2)` maximizing [`first_order_envelope`], the root of
/// `3 cos^2 theta + 4 cos theta - 1`, found by bisection.
pub fn optimal_theta() -> f64 {
    let g = |t: f64| {
        let c = t.cos();
        3.0 * c * c + 4.0 * c - 1.0
    };
    let (mut lo, mut hi) = (0.0, 0.5 * PI);
    debug_assert!(g(lo) > 0.0 && g(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Phase difference after time `t_s` between an atom at `z0` and one at `z`
/// (both in metres), `delta = gamma(z0) - gamma(z)`.
///
/// Only the environment parts are subtracted: the unitary parts are identical
/// for both atoms under the bare level spacing.
pub fn phase_difference(z: f64, z0: f64, params: &AtomParams, t_s: f64) -> Result<f64> {
    if !(z > 0.0) || !(z0 > 0.0) {
        return Err(Error::Config(format!(
            "distances must be > 0, got z = {z}, z0 = {z0}"
        )));
    }
    if !(t_s > 0.0 && t_s.is_finite()) {
        return Err(Error::Config(format!(
            "evolution time must be > 0, got {t_s}"
        )));
    }
    if z == z0 {
        return Ok(0.0);
    }
    let phi = units::time_to_phi(t_s, params.omega0());
    let env = |d: f64| -> Result<f64> {
        let geom = Geometry::at_distance(d, params.omega0())?;
        Ok(gp_closed_form(params, &build_coeffs(params, &geom), phi)?.environment_part)
    };
    Ok(env(z0)? - env(z)?)
}

/// [`phase_difference`] over a grid of far distances, in input order.
/// Rows are evaluated in parallel; the output does not depend on scheduling.
pub fn sweep_z(z_grid: &[f64], z0: f64, params: &AtomParams, t_s: f64) -> Result<Vec<SweepRow>> {
    if z_grid.is_empty() {
        return Err(Error::Config("distance grid is empty".into()));
    }
    z_grid
        .par_iter()
        .map(|&z| phase_difference(z, z0, params, t_s).map(|delta| SweepRow { z, delta }))
        .collect()
}

/// Nonradiative-to-radiative decay ratio `beta / z^3` near an absorbing plate,
/// with `z` in metres and `beta` in cm^3.
///
/// Evaluated as `(beta / 1e-18 cm^3) / (z / 1 um)^3 * 1e-6`, so inputs on the
/// natural scales of the problem incur no conversion rounding.
pub fn nonradiative_ratio(z_m: f64, beta_cm3: f64) -> Result<f64> {
    if !(z_m > 0.0) {
        return Err(Error::Config(format!("distance must be > 0, got {z_m}")));
    }
    if !(beta_cm3 >= 0.0) {
        return Err(Error::Config(format!("beta must be >= 0, got {beta_cm3}")));
    }
    let z_um = z_m / 1e-6;
    let beta_scaled = beta_cm3 / 1e-18;
    Ok(beta_scaled / (z_um * z_um * z_um) * 1e-6)
}

fn braket(u: &[Complex64; 2], v: &[Complex64; 2]) -> Complex64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

fn combine(coef: [f64; 5], v: [&[Complex64; 2]; 5], scale: f64) -> [Complex64; 2] {
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for (c, x) in coef.iter().zip(v) {
        out[0] += *c * x[0];
        out[1] += *c * x[1];
    }
    [out[0] * scale, out[1] * scale]
}

/// Mixed-state geometric phase of a sampled trajectory.
///
/// The trajectory must start in a pure state, so only the dominant eigenvector
/// contributes. Its gauge puts the relative phase on the ground component,
/// `|phi_+> = sin(theta_tau/2)|+> + cos(theta_tau/2) e^{i chi}|->` with
/// `chi = -arg(rho_{+-})`; where the coherence vanishes `chi` follows the free
/// precession `Omega phi`. The connection `<phi_+|d phi_+>` comes from
/// fourth-order centered differences and is integrated by the trapezoid rule.
///
/// The argument of the resulting complex number is a principal value; it is
/// moved by whole turns onto the accumulated estimate
/// `arg<phi_+(0)|phi_+(T)> - Im int <phi_+|d phi_+>`.
///
/// Samples must be equally spaced. An eigenvalue crossing, or an eigenvector
/// branch swap between neighbouring samples, is a degeneracy error.
pub fn gp_general(traj: &Trajectory, coeffs: &DissipatorCoeffs) -> Result<f64> {
    let n = traj.len();
    if n < MIN_TRAJECTORY_POINTS {
        return Err(Error::Precondition(format!(
            "need at least {MIN_TRAJECTORY_POINTS} samples, got {n}"
        )));
    }
    let phi = traj.phi();
    let h = phi[1] - phi[0];
    if phi.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-6 * h) {
        return Err(Error::Precondition("samples must be equally spaced".into()));
    }

    let eig: Vec<_> = traj.states().iter().map(eigen_decompose_state).collect();
    if eig[0].lambda_minus.abs() > 1e-10 {
        return Err(Error::Precondition(format!(
            "initial state is not pure (lambda_- = {:e})",
            eig[0].lambda_minus
        )));
    }

    let mut vectors = Vec::with_capacity(n);
    for (k, e) in eig.iter().enumerate() {
        if e.eta <= crate::dynamics::DEGENERACY_TOL {
            return Err(Error::Degenerate { phi: phi[k] });
        }
        let chi = e.chi.unwrap_or(coeffs.omega_eff * phi[k]);
        let (s, c) = (0.5 * e.theta_tau).sin_cos();
        vectors.push([Complex64::new(s, 0.0), Complex64::from_polar(c, chi)]);
    }
    for k in 1..n {
        if braket(&vectors[k - 1], &vectors[k]).norm() < 0.5 {
            return Err(Error::Degenerate { phi: phi[k] });
        }
    }

    let inv = 1.0 / (12.0 * h);
    let v = &vectors;
    let derivative = |k: usize| -> [Complex64; 2] {
        if k == 0 {
            combine(
                [-25.0, 48.0, -36.0, 16.0, -3.0],
                [&v[0], &v[1], &v[2], &v[3], &v[4]],
                inv,
            )
        } else if k == 1 {
            combine(
                [-3.0, -10.0, 18.0, -6.0, 1.0],
                [&v[0], &v[1], &v[2], &v[3], &v[4]],
                inv,
            )
        } else if k == n - 2 {
            combine(
                [3.0, 10.0, -18.0, 6.0, -1.0],
                [&v[n - 1], &v[n - 2], &v[n - 3], &v[n - 4], &v[n - 5]],
                inv,
            )
        } else if k == n - 1 {
            combine(
                [25.0, -48.0, 36.0, -16.0, 3.0],
                [&v[n - 1], &v[n - 2], &v[n - 3], &v[n - 4], &v[n - 5]],
                inv,
            )
        } else {
            combine(
                [1.0, -8.0, 8.0, -1.0, 0.0],
                [&v[k - 2], &v[k - 1], &v[k + 1], &v[k + 2], &v[k]],
                inv,
            )
        }
    };

    let connection: Vec<Complex64> = (0..n).map(|k| braket(&v[k], &derivative(k))).collect();
    let interior: Complex64 = connection[1..n - 1].iter().sum();
    let integral = h * (interior + 0.5 * (connection[0] + connection[n - 1]));

    let overlap = braket(&v[0], &v[n - 1]);
    let weight = (eig[0].lambda_plus * eig[n - 1].lambda_plus)
        .max(0.0)
        .sqrt();
    let functional = weight * overlap * (-integral).exp();
    if !(functional.norm() > 0.0) {
        return Err(Error::numerical(phi[n - 1], "phase functional vanished"));
    }
    let principal = functional.arg();
    let accumulated = overlap.arg() - integral.im;
    Ok(principal + TAU * ((accumulated - principal) / TAU).round())
}

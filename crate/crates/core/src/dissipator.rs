//! Atom and geometry parameters, and the Kossakowski coefficients of the
//! vacuum-bath master equation they generate.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral;
use crate::units;

/// Largest admissible `gamma0 / omega0`; the master equation assumes weak coupling.
pub const MAX_GAMMA_RATIO: f64 = 1e-2;

/// Tolerance on `sum(alpha) == 1`.
pub const ALPHA_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    omega0: f64,
    gamma_ratio: f64,
    theta: f64,
    alpha: [f64; 3],
}

impl AtomParams {
    /// `omega0` in rad/s, `gamma_ratio = gamma0 / omega0`, `theta` the initial
    /// superposition angle, `alpha` the relative squared dipole components
    /// along x, y (tangential) and z (normal to the plane).
    pub fn new(omega0: f64, gamma_ratio: f64, theta: f64, alpha: [f64; 3]) -> Result<Self> {
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::Config(format!(
                "omega0 must be positive and finite, got {omega0}"
            )));
        }
        if !(gamma_ratio > 0.0 && gamma_ratio < MAX_GAMMA_RATIO) {
            return Err(Error::Config(format!(
                "gamma_ratio must lie in (0, {MAX_GAMMA_RATIO}), got {gamma_ratio}"
            )));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Config(format!(
                "theta must lie in [0, pi], got {theta}"
            )));
        }
        if alpha.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(Error::Config(format!(
                "alpha components must be >= 0, got {alpha:?}"
            )));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > ALPHA_SUM_TOL {
            return Err(Error::Config(format!("alpha must sum to 1, got {sum}")));
        }
        Ok(Self {
            omega0,
            gamma_ratio,
            theta,
            alpha,
        })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn gamma_ratio(&self) -> f64 {
        self.gamma_ratio
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn alpha(&self) -> [f64; 3] {
        self.alpha
    }

    pub fn with_theta(self, theta: f64) -> Result<Self> {
        Self::new(self.omega0, self.gamma_ratio, theta, self.alpha)
    }

    pub fn with_gamma_ratio(self, gamma_ratio: f64) -> Result<Self> {
        Self::new(self.omega0, gamma_ratio, self.theta, self.alpha)
    }

    pub fn with_alpha(self, alpha: [f64; 3]) -> Result<Self> {
        Self::new(self.omega0, self.gamma_ratio, self.theta, alpha)
    }
}

/// Position of the atom relative to the plane, stored as `u = 2 omega0 z / c`.
/// `u = inf` is free space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    u: f64,
}

impl Geometry {
    pub fn free_space() -> Self {
        Self { u: f64::INFINITY }
    }

    pub fn from_u(u: f64) -> Result<Self> {
        if !(u > 0.0) {
            return Err(Error::Config(format!("distance must be > 0, got u = {u}")));
        }
        Ok(Self { u })
    }

    /// Distance `z_m` in metres for an atom of transition frequency `omega0` (rad/s).
    pub fn at_distance(z_m: f64, omega0: f64) -> Result<Self> {
        if !(z_m > 0.0) {
            return Err(Error::Config(format!("distance must be > 0, got {z_m} m")));
        }
        Self::from_u(units::distance_to_u(z_m, omega0))
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn is_free_space(&self) -> bool {
        self.u.is_infinite()
    }

    pub fn distance_m(&self, omega0: f64) -> f64 {
        units::u_to_distance(self.u, omega0)
    }
}

/// Treatment of the environment-induced level shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LambShiftPolicy {
    /// Keep the bare level spacing; the shift only enters the phase at
    /// second order in `gamma_ratio`.
    #[default]
    Bare,
}

impl FromStr for LambShiftPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bare" => Ok(Self::Bare),
            other => Err(Error::Config(format!(
                "unknown Lamb-shift policy '{other}'"
            ))),
        }
    }
}

impl fmt::Display for LambShiftPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bare => f.write_str("bare"),
        }
    }
}

/// Kossakowski scalars and effective level spacing, all in units of `omega0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipatorCoeffs {
    pub a: f64,
    pub b: f64,
    pub omega_eff: f64,
}

impl DissipatorCoeffs {
    /// Coefficients of an isolated atom: no dissipation, bare precession.
    pub fn unitary() -> Self {
        Self {
            a: 0.0,
            b: 0.0,
            omega_eff: 1.0,
        }
    }

    /// Vacuum-bath coefficients with `A = B = a` and bare level spacing.
    pub fn vacuum(a: f64) -> Self {
        Self {
            a,
            b: a,
            omega_eff: 1.0,
        }
    }
}

/// `Omega / omega0` under the given policy.
pub fn effective_omega(_params: &AtomParams, _geom: &Geometry, policy: LambShiftPolicy) -> f64 {
    match policy {
        LambShiftPolicy::Bare => 1.0,
    }
}

/// `A = B = (gamma0/4) sum_i alpha_i (1 - f_i(omega0, z))`, in units of `omega0`.
pub fn build_coeffs(params: &AtomParams, geom: &Geometry) -> DissipatorCoeffs {
    build_coeffs_with(params, geom, LambShiftPolicy::Bare)
}

pub fn build_coeffs_with(
    params: &AtomParams,
    geom: &Geometry,
    policy: LambShiftPolicy,
) -> DissipatorCoeffs {
    let factor = spectral::boundary_factor(params.alpha(), geom.u()).expect("geometry has u > 0");
    let a = 0.25 * params.gamma_ratio() * factor;
    DissipatorCoeffs {
        a,
        b: a,
        omega_eff: effective_omega(params, geom, policy),
    }
}

/// The 3x3 Kossakowski matrix `a_ij`, indexed by Pauli component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KossakowskiMatrix(pub [[Complex64; 3]; 3]);

/// `a_ij = A delta_ij - i B eps_ij3 - A delta_i3 delta_j3`.
pub fn kossakowski_matrix(coeffs: &DissipatorCoeffs) -> KossakowskiMatrix {
    let zero = Complex64::new(0.0, 0.0);
    let a = Complex64::new(coeffs.a, 0.0);
    let ib = Complex64::new(0.0, coeffs.b);
    KossakowskiMatrix([[a, -ib, zero], [ib, a, zero], [zero, zero, zero]])
}

impl KossakowskiMatrix {
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..3).all(|i| (0..3).all(|j| (self.0[i][j] - self.0[j][i].conj()).norm() <= tol))
    }

    /// Eigenvalues in ascending order, from the characteristic polynomial.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let m = &self.0;
        let tr = m[0][0].re + m[1][1].re + m[2][2].re;
        let minor = |i: usize, j: usize| (m[i][i] * m[j][j] - m[i][j] * m[j][i]).re;
        let c1 = minor(0, 1) + minor(0, 2) + minor(1, 2);
        let det = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
            .re;
        // x^3 - tr x^2 + c1 x - det = 0 with all roots real
        let shift = tr / 3.0;
        let p = c1 - tr * tr / 3.0;
        let q = -2.0 * shift.powi(3) + c1 * shift - det;
        let mut roots = if p.abs() <= f64::EPSILON * tr.abs().max(1e-300).powi(2) {
            [shift; 3]
        } else {
            let r = (-p / 3.0).max(0.0).sqrt();
            let arg = if r > 0.0 {
                (-q / (2.0 * r.powi(3))).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            let phi = arg.acos() / 3.0;
            let t = 2.0 * r;
            [
                shift + t * phi.cos(),
                shift + t * (phi + 2.0 * PI / 3.0).cos(),
                shift + t * (phi + 4.0 * PI / 3.0).cos(),
            ]
        };
        roots.sort_by(|a, b| a.total_cmp(b));
        roots
    }

    /// All principal minors non-negative (to `tol`).
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        let m = &self.0;
        let diag_ok = (0..3).all(|i| m[i][i].re >= -tol);
        let pairs_ok = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .all(|&(i, j)| (m[i][i] * m[j][j] - m[i][j] * m[j][i]).re >= -tol);
        let det = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
            .re;
        diag_ok && pairs_ok && det >= -tol
    }
}

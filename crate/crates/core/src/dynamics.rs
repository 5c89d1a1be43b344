//! Reduced density matrix of the atom: closed-form solution for the vacuum
//! bath, a brute-force Lindblad integrator to check it against, and the
//! eigen-decomposition that the geometric phase is built from.
//!
//! Basis ordering is `(|+>, |->)`: excited state first. Time is the
//! dimensionless precession angle `phi = omega0 * tau`.

use num_complex::Complex64;

use crate::dissipator::{kossakowski_matrix, AtomParams, DissipatorCoeffs};
use crate::error::{Error, Result};

pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Positivity slack accepted on numerically produced states.
pub const POSITIVITY_TOL: f64 = 1e-12;

/// Positivity violation beyond which the integrator gives up.
pub const INTEGRATOR_POSITIVITY_TOL: f64 = 1e-8;

/// Eigenvalue splitting `eta` below which the spectrum counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-14;

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mat_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

fn mat_scale(a: &Mat2, s: Complex64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

fn pauli() -> [Mat2; 3] {
    [
        [[ZERO, ONE], [ONE, ZERO]],
        [[ZERO, -I], [I, ZERO]],
        [[ONE, ZERO], [ZERO, -ONE]],
    ]
}

/// Hermitian 2x2 state, stored by its independent entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    /// Excited-state population.
    pub ee: f64,
    /// Coherence `<+|rho|->`.
    pub eg: Complex64,
    pub gg: f64,
}

impl DensityMatrix2 {
    /// `cos(theta/2)|+> + sin(theta/2)|->` as a projector.
    pub fn pure_superposition(theta: f64) -> Self {
        let (s, c) = (0.5 * theta).sin_cos();
        Self {
            ee: c * c,
            eg: Complex64::new(c * s, 0.0),
            gg: s * s,
        }
    }

    pub fn ground() -> Self {
        Self {
            ee: 0.0,
            eg: ZERO,
            gg: 1.0,
        }
    }

    pub fn trace(&self) -> f64 {
        self.ee + self.gg
    }

    pub fn determinant(&self) -> f64 {
        self.ee * self.gg - self.eg.norm_sqr()
    }

    pub fn purity(&self) -> f64 {
        self.ee * self.ee + self.gg * self.gg + 2.0 * self.eg.norm_sqr()
    }

    /// `rho3 = ee - gg`, the Bloch-vector component along the quantization axis.
    pub fn inversion(&self) -> f64 {
        self.ee - self.gg
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        self.ee >= -tol && self.gg >= -tol && self.determinant() >= -tol
    }

    pub fn to_matrix(&self) -> Mat2 {
        [
            [Complex64::new(self.ee, 0.0), self.eg],
            [self.eg.conj(), Complex64::new(self.gg, 0.0)],
        ]
    }

    /// Reads the independent entries; the anti-Hermitian part of the input is dropped.
    pub fn from_matrix(m: &Mat2) -> Self {
        Self {
            ee: m[0][0].re,
            eg: 0.5 * (m[0][1] + m[1][0].conj()),
            gg: m[1][1].re,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.ee - other.ee)
            .abs()
            .max((self.gg - other.gg).abs())
            .max((self.eg - other.eg).norm())
    }
}

/// Time derivative of a density matrix, `d rho / d phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTangent {
    pub ee: f64,
    pub eg: Complex64,
    pub gg: f64,
}

impl StateTangent {
    pub fn trace(&self) -> f64 {
        self.ee + self.gg
    }
}

/// Closed-form state for the vacuum bath (`A = B`):
/// `ee = e^{-4a phi} cos^2(theta/2)`, `eg = 1/2 e^{-2a phi - i Omega phi} sin(theta)`.
pub fn rho_analytic(phi: f64, params: &AtomParams, coeffs: &DissipatorCoeffs) -> DensityMatrix2 {
    let theta = params.theta();
    let decay = (-4.0 * coeffs.a * phi).exp();
    let half_c = (0.5 * theta).cos();
    let ee = decay * half_c * half_c;
    let eg = Complex64::from_polar(
        0.5 * (-2.0 * coeffs.a * phi).exp() * theta.sin(),
        -coeffs.omega_eff * phi,
    );
    DensityMatrix2 {
        ee,
        eg,
        gg: 1.0 - ee,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenDecomp {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Bloch angle of the dominant eigenvector,
    /// `|phi_+> = sin(theta_tau/2)|+> + cos(theta_tau/2) e^{i chi}|->`.
    pub theta_tau: f64,
    pub eta: f64,
    pub rho3: f64,
    /// Set when `rho` is proportional to the identity; `theta_tau` then holds
    /// the value approached from earlier times.
    pub degenerate: bool,
}

impl EigenDecomp {
    /// Dominant eigenvector with its relative phase `chi` on the ground component.
    pub fn plus_vector(&self, chi: f64) -> [Complex64; 2] {
        let (s, c) = (0.5 * self.theta_tau).sin_cos();
        [Complex64::new(s, 0.0), Complex64::from_polar(c, chi)]
    }

    /// Orthogonal complement of [`plus_vector`](Self::plus_vector).
    pub fn minus_vector(&self, chi: f64) -> [Complex64; 2] {
        let (s, c) = (0.5 * self.theta_tau).sin_cos();
        [Complex64::new(c, 0.0), Complex64::from_polar(-s, chi)]
    }

    /// `lambda_+ P_+ + lambda_- P_-`.
    pub fn reconstruct(&self, chi: f64) -> DensityMatrix2 {
        let p = self.plus_vector(chi);
        let m = self.minus_vector(chi);
        let entry = |i: usize, j: usize| {
            self.lambda_plus * p[i] * p[j].conj() + self.lambda_minus * m[i] * m[j].conj()
        };
        DensityMatrix2 {
            ee: entry(0, 0).re,
            eg: entry(0, 1),
            gg: entry(1, 1).re,
        }
    }
}

/// Eigen-decomposition of [`rho_analytic`] at `phi`.
///
/// `rho3 = e^{-4a phi}(1 + cos theta) - 1`, `eta = sqrt(rho3^2 + e^{-4a phi} sin^2 theta)`,
/// `tan(theta_tau/2) = sqrt((eta + rho3)/(eta - rho3))`.
pub fn eigen_decompose(phi: f64, params: &AtomParams, coeffs: &DissipatorCoeffs) -> EigenDecomp {
    let theta = params.theta();
    let x = 4.0 * coeffs.a * phi;
    let decay = (-x).exp();
    let q = 1.0 + theta.cos();
    let rho3 = decay * q - 1.0;
    let coherence = decay.sqrt() * theta.sin();
    let eta = rho3.hypot(coherence);
    // 1 - eta^2 = e^{-x} q^2 (1 - e^{-x}) avoids cancellation near purity
    let lambda_minus = decay * q * q * (-(-x).exp_m1()) / (2.0 * (1.0 + eta));
    let lambda_plus = 1.0 - lambda_minus;
    let degenerate = eta <= DEGENERACY_TOL;
    let theta_tau = if degenerate {
        // only reachable with sin(theta) = 0, where rho3 falls through zero from above
        std::f64::consts::PI
    } else {
        coherence.atan2(-rho3)
    };
    EigenDecomp {
        lambda_plus,
        lambda_minus,
        theta_tau,
        eta,
        rho3,
        degenerate,
    }
}

/// Eigen-decomposition of an arbitrary state, as used along numerical trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateEigen {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub theta_tau: f64,
    /// Phase `-arg(eg)` of the ground component of the dominant eigenvector;
    /// `None` when the coherence vanishes and the phase is set by convention only.
    pub chi: Option<f64>,
    pub eta: f64,
}

pub fn eigen_decompose_state(state: &DensityMatrix2) -> StateEigen {
    let tr = state.trace();
    let rho3 = state.inversion();
    let off = 2.0 * state.eg.norm();
    let eta = rho3.hypot(off);
    let lambda_plus = 0.5 * (tr + eta);
    let lambda_minus = if lambda_plus > 0.0 {
        state.determinant() / lambda_plus
    } else {
        0.5 * (tr - eta)
    };
    let chi = if off > 1e-14 * eta {
        Some(-state.eg.arg())
    } else {
        None
    };
    StateEigen {
        lambda_plus,
        lambda_minus,
        theta_tau: off.atan2(-rho3),
        chi,
        eta,
    }
}

/// Full generator `-i[H_eff, rho] + L[rho]` with `H_eff = Omega/2 sigma_3` and
/// `L[rho] = 1/2 sum_ij a_ij (2 s_j rho s_i - s_i s_j rho - rho s_i s_j)`.
///
/// Accepts independent `a` and `b`.
pub fn lindblad_generator(rho: &Mat2, coeffs: &DissipatorCoeffs) -> Mat2 {
    let s = pauli();
    let h = mat_scale(&s[2], Complex64::new(0.5 * coeffs.omega_eff, 0.0));
    let comm = mat_add(&mat_mul(&h, rho), &mat_scale(&mat_mul(rho, &h), -ONE));
    let mut out = mat_scale(&comm, -I);
    let k = kossakowski_matrix(coeffs);
    for i in 0..3 {
        for j in 0..3 {
            let aij = k.entry(i, j);
            if aij == ZERO {
                continue;
            }
            let sisj = mat_mul(&s[i], &s[j]);
            let jump = mat_scale(
                &mat_mul(&mat_mul(&s[j], rho), &s[i]),
                Complex64::new(2.0, 0.0),
            );
            let left = mat_mul(&sisj, rho);
            let right = mat_mul(rho, &sisj);
            let term = mat_add(&jump, &mat_scale(&mat_add(&left, &right), -ONE));
            out = mat_add(&out, &mat_scale(&term, 0.5 * aij));
        }
    }
    out
}

pub fn lindblad_rhs(state: &DensityMatrix2, coeffs: &DissipatorCoeffs) -> StateTangent {
    let d = lindblad_generator(&state.to_matrix(), coeffs);
    StateTangent {
        ee: d[0][0].re,
        eg: d[0][1],
        gg: d[1][1].re,
    }
}

/// Time-ordered samples of the reduced state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    phi: Vec<f64>,
    states: Vec<DensityMatrix2>,
}

impl Trajectory {
    pub fn new(phi: Vec<f64>, states: Vec<DensityMatrix2>) -> Result<Self> {
        if phi.len() != states.len() || phi.is_empty() {
            return Err(Error::Precondition(
                "trajectory needs equally many, nonzero, times and states".into(),
            ));
        }
        if phi[0] != 0.0 {
            return Err(Error::Precondition(format!(
                "trajectory must start at phi = 0, got {}",
                phi[0]
            )));
        }
        if phi.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition(
                "trajectory times must increase strictly".into(),
            ));
        }
        Ok(Self { phi, states })
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn states(&self) -> &[DensityMatrix2] {
        &self.states
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DensityMatrix2)> {
        self.phi.iter().copied().zip(self.states.iter())
    }

    pub fn last(&self) -> (f64, DensityMatrix2) {
        (*self.phi.last().unwrap(), *self.states.last().unwrap())
    }

    /// Keeps every `stride`-th sample plus the final one.
    pub fn decimate(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let n = self.len();
        let keep = (0..n).filter(|k| k % stride == 0 || *k == n - 1);
        let (phi, states) = keep.map(|k| (self.phi[k], self.states[k])).unzip();
        Self { phi, states }
    }
}

/// Closed-form trajectory on `intervals + 1` equally spaced points.
pub fn sample_analytic(
    params: &AtomParams,
    coeffs: &DissipatorCoeffs,
    phi_end: f64,
    intervals: usize,
) -> Result<Trajectory> {
    if !(phi_end > 0.0) || intervals == 0 {
        return Err(Error::Precondition(
            "need phi_end > 0 and at least one interval".into(),
        ));
    }
    let h = phi_end / intervals as f64;
    let phi: Vec<f64> = (0..=intervals).map(|k| k as f64 * h).collect();
    let states = phi
        .iter()
        .map(|&p| rho_analytic(p, params, coeffs))
        .collect();
    Trajectory::new(phi, states)
}

/// Classical fixed-step RK4 integration of the master equation from the pure
/// initial superposition. The trace is left free so its drift stays visible.
pub fn evolve_numeric(
    params: &AtomParams,
    coeffs: &DissipatorCoeffs,
    phi_end: f64,
    steps: usize,
) -> Result<Trajectory> {
    if steps < 10 {
        return Err(Error::Precondition(format!(
            "need at least 10 steps, got {steps}"
        )));
    }
    if !(phi_end > 0.0 && phi_end.is_finite()) {
        return Err(Error::Precondition(format!(
            "phi_end must be positive, got {phi_end}"
        )));
    }
    let h = phi_end / steps as f64;
    let half = Complex64::new(0.5 * h, 0.0);
    let full = Complex64::new(h, 0.0);
    let sixth = Complex64::new(h / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);

    let mut rho = DensityMatrix2::pure_superposition(params.theta()).to_matrix();
    let mut phi = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    phi.push(0.0);
    states.push(DensityMatrix2::from_matrix(&rho));

    for k in 1..=steps {
        let k1 = lindblad_generator(&rho, coeffs);
        let k2 = lindblad_generator(&mat_add(&rho, &mat_scale(&k1, half)), coeffs);
        let k3 = lindblad_generator(&mat_add(&rho, &mat_scale(&k2, half)), coeffs);
        let k4 = lindblad_generator(&mat_add(&rho, &mat_scale(&k3, full)), coeffs);
        let incr = mat_add(
            &mat_add(&k1, &mat_scale(&k2, two)),
            &mat_add(&mat_scale(&k3, two), &k4),
        );
        rho = mat_add(&rho, &mat_scale(&incr, sixth));

        let t = k as f64 * h;
        let state = DensityMatrix2::from_matrix(&rho);
        if !state.is_positive(INTEGRATOR_POSITIVITY_TOL) || !state.ee.is_finite() {
            return Err(Error::numerical(t, "state left the positive cone"));
        }
        phi.push(t);
        states.push(state);
    }
    Trajectory::new(phi, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn params(theta: f64) -> AtomParams {
        AtomParams::new(1e9, 1e-6, theta, [1.0 / 3.0; 3]).unwrap()
    }

    #[test]
    fn initial_state_is_pure() {
        for theta in [0.0, 0.4, PI / 2.0, 2.5, PI] {
            let c = DissipatorCoeffs::vacuum(1e-3);
            let rho = rho_analytic(0.0, &params(theta), &c);
            let half = 0.5 * theta;
            assert!((rho.ee - half.cos().powi(2)).abs() < 1e-15);
            assert!((rho.eg.re - 0.5 * theta.sin()).abs() < 1e-15 && rho.eg.im == 0.0);
            assert!((rho.purity() - 1.0).abs() < 1e-15);
            assert_eq!(eigen_decompose(0.0, &params(theta), &c).lambda_minus, 0.0);
        }
    }

    #[test]
    fn relaxes_to_ground_state() {
        let c = DissipatorCoeffs::vacuum(1e-2);
        let rho = rho_analytic(1e4, &params(1.0), &c);
        assert!(rho.ee < 1e-100 && rho.eg.norm() < 1e-40 && rho.gg == 1.0);
    }

    #[test]
    fn coherence_decays_at_twice_a() {
        let c = DissipatorCoeffs::vacuum(3e-3);
        let theta = 1.1;
        for phi in [0.5, 10.0, 77.0] {
            let rho = rho_analytic(phi, &params(theta), &c);
            let expect = 0.5 * theta.sin() * (-2.0 * c.a * phi).exp();
            assert!((rho.eg.norm() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn unitary_limit_angle() {
        for theta in [0.3, 1.0, 2.0, 3.0] {
            for phi in [0.0, 1.0, 100.0] {
                let e = eigen_decompose(phi, &params(theta), &DissipatorCoeffs::unitary());
                assert!((e.theta_tau - (PI - theta)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn stationary_ground_state() {
        for phi in [0.0, 3.0, 1e3] {
            let e = eigen_decompose(phi, &params(PI), &DissipatorCoeffs::vacuum(1e-3));
            assert!((e.rho3 + 1.0).abs() < 1e-15);
            assert!((e.eta - 1.0).abs() < 1e-15);
            assert!(e.theta_tau.abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_crossing_flagged() {
        // theta = 0: rho3 = 2 e^{-4a phi} - 1 vanishes at phi = ln 2 / (4a)
        let a = 0.25;
        let phi = 2f64.ln() / (4.0 * a);
        let c = DissipatorCoeffs::vacuum(a);
        let e = eigen_decompose(phi, &params(0.0), &c);
        assert!(e.eta < 1e-15 && e.degenerate);
        assert_eq!(e.theta_tau, PI);
        let before = eigen_decompose(phi * (1.0 - 1e-9), &params(0.0), &c);
        assert!(!before.degenerate && before.theta_tau == PI);
    }

    #[test]
    fn generator_stationary_ground() {
        let d = lindblad_rhs(&DensityMatrix2::ground(), &DissipatorCoeffs::vacuum(0.1));
        assert_eq!(d.ee, 0.0);
        assert_eq!(d.gg, 0.0);
        assert_eq!(d.eg, ZERO);
    }

    #[test]
    fn generator_excited_decay_rate() {
        let a = 0.0125;
        let d = lindblad_rhs(
            &DensityMatrix2::pure_superposition(0.0),
            &DissipatorCoeffs::vacuum(a),
        );
        assert!((d.ee + 4.0 * a).abs() < 1e-16);
        assert!((d.gg - 4.0 * a).abs() < 1e-16);
    }

    #[test]
    fn generator_general_coefficients() {
        // with B != A the upward rate is 2(A - B) and the downward 2(A + B)
        let c = DissipatorCoeffs {
            a: 0.3,
            b: 0.1,
            omega_eff: 1.0,
        };
        let d = lindblad_rhs(&DensityMatrix2::ground(), &c);
        assert!((d.ee - 2.0 * (c.a - c.b)).abs() < 1e-15);
        let d = lindblad_rhs(&DensityMatrix2::pure_superposition(0.0), &c);
        assert!((d.ee + 2.0 * (c.a + c.b)).abs() < 1e-15);
    }

    #[test]
    fn rk4_matches_closed_form() {
        let p = params(PI / 2.0);
        let c = DissipatorCoeffs::vacuum(0.25e-6);
        let traj = evolve_numeric(&p, &c, TAU, 2000).unwrap();
        let mut worst: f64 = 0.0;
        for (phi, s) in traj.iter() {
            worst = worst.max(s.max_abs_diff(&rho_analytic(phi, &p, &c)));
            assert!((s.trace() - 1.0).abs() <= 1e-10);
        }
        assert!(worst <= 1e-8, "worst = {worst}");
    }

    #[test]
    fn rk4_populations_frozen_without_dissipation() {
        let p = params(1.2);
        let traj = evolve_numeric(&p, &DissipatorCoeffs::unitary(), 3.0 * TAU, 3000).unwrap();
        let ee0 = traj.states()[0].ee;
        assert!(traj.states().iter().all(|s| (s.ee - ee0).abs() <= 1e-10));
    }

    #[test]
    fn rk4_rejects_bad_arguments() {
        let p = params(1.0);
        let c = DissipatorCoeffs::vacuum(1e-6);
        assert!(matches!(
            evolve_numeric(&p, &c, 1.0, 5),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            evolve_numeric(&p, &c, -1.0, 100),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn rk4_reports_instability() {
        // step far beyond the stability region of RK4 for the decay rate
        let c = DissipatorCoeffs::vacuum(5.0);
        let r = evolve_numeric(&params(0.5), &c, 100.0, 10);
        assert!(matches!(r, Err(Error::Numerical { .. })), "{r:?}");
    }

    #[test]
    fn trajectory_validation() {
        let s = DensityMatrix2::ground();
        assert!(Trajectory::new(vec![0.1, 0.2], vec![s, s]).is_err());
        assert!(Trajectory::new(vec![0.0, 0.0], vec![s, s]).is_err());
        assert!(Trajectory::new(vec![0.0], vec![]).is_err());
        let t = Trajectory::new(vec![0.0, 1.0, 2.0, 3.0], vec![s; 4]).unwrap();
        assert_eq!(t.decimate(2).phi(), &[0.0, 2.0, 3.0]);
    }

    #[test]
    fn purity_decreases_until_minimum() {
        let c = DissipatorCoeffs::vacuum(1e-3);
        let p = params(1.3);
        let end = 0.75 / c.a;
        let n = 3000;
        let purity: Vec<f64> = (0..=n)
            .map(|k| rho_analytic(end * k as f64 / n as f64, &p, &c).purity())
            .collect();
        let min_at = purity
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap();
        assert!(min_at > 0);
        for w in purity[..=min_at].windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn closed_form_solves_master_equation(
            theta in 0.0f64..PI,
            a in 1e-6f64..1e-2,
            phi in 0.0f64..200.0,
        ) {
            let p = params(theta);
            let c = DissipatorCoeffs::vacuum(a);
            let h = 1e-4;
            let phi = phi + h;
            let up = rho_analytic(phi + h, &p, &c);
            let dn = rho_analytic(phi - h, &p, &c);
            let fd_ee = (up.ee - dn.ee) / (2.0 * h);
            let fd_eg = (up.eg - dn.eg) / (2.0 * h);
            let rhs = lindblad_rhs(&rho_analytic(phi, &p, &c), &c);
            let scale = rhs.ee.abs().max(rhs.eg.norm()).max(1e-12);
            prop_assert!((fd_ee - rhs.ee).abs() <= 1e-6 * scale);
            prop_assert!((fd_eg - rhs.eg).norm() <= 1e-6 * scale);
        }

        #[test]
        fn generator_preserves_trace_and_hermiticity(
            ee in 0.0f64..1.0,
            re in -0.5f64..0.5,
            im in -0.5f64..0.5,
            a in 0.0f64..1.0,
            b in 0.0f64..1.0,
        ) {
            let m = DensityMatrix2 { ee, eg: Complex64::new(re, im), gg: 1.0 - ee }.to_matrix();
            let c = DissipatorCoeffs { a, b, omega_eff: 1.0 };
            let d = lindblad_generator(&m, &c);
            prop_assert!((d[0][0] + d[1][1]).norm() <= 1e-15);
            prop_assert!(d[0][0].im.abs() <= 1e-15 && d[1][1].im.abs() <= 1e-15);
            prop_assert!((d[0][1] - d[1][0].conj()).norm() <= 1e-15);
        }

        #[test]
        fn eigen_decomposition_reconstructs_state(
            theta in 0.0f64..PI,
            a in 1e-7f64..1e-2,
            phi in 0.0f64..500.0,
        ) {
            let p = params(theta);
            let c = DissipatorCoeffs::vacuum(a);
            let e = eigen_decompose(phi, &p, &c);
            prop_assume!(!e.degenerate);
            prop_assert!((e.lambda_plus + e.lambda_minus - 1.0).abs() <= 1e-15);
            prop_assert!(e.lambda_plus >= e.lambda_minus);
            prop_assert!((0.0..=PI).contains(&e.theta_tau));
            let back = e.reconstruct(c.omega_eff * phi);
            let rho = rho_analytic(phi, &p, &c);
            prop_assert!(back.max_abs_diff(&rho) <= 1e-12);
            let tan_half = ((e.eta + e.rho3) / (e.eta - e.rho3)).sqrt();
            if tan_half.is_finite() && tan_half < 1e6 {
                prop_assert!(((0.5 * e.theta_tau).tan() - tan_half).abs() <= 1e-9 * tan_half.max(1.0));
            }
        }
    }
}

//! Boundary modulation functions and the vacuum spectral density seen by an
//! atom at fixed distance from a perfectly reflecting plane.
//!
//! Everything here is dimensionless. The distance enters through
//! `u = 2 lambda z / c` evaluated at the frequency of interest, and rates are
//! measured in units of the transition frequency.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dissipator::{AtomParams, Geometry};
use crate::error::{Error, Result};
use crate::quadrature::{self, QuadOptions};

/// Below this `u` the modulation functions are evaluated from their Taylor
/// series; above it from the closed expressions.
pub const SERIES_THRESHOLD: f64 = 1e-2;

/// Values of the three modulation functions at one distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationValues {
    pub fx: f64,
    pub fy: f64,
    pub fz: f64,
}

impl ModulationValues {
    pub fn as_array(&self) -> [f64; 3] {
        [self.fx, self.fy, self.fz]
    }
}

/// Spectral density in units of the transition frequency.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SpectralDensity(pub f64);

/// Cartesian axis of a field or dipole component; `Z` is the plane normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

fn check_u(u: f64) -> Result<()> {
    if u.is_nan() || u < 0.0 {
        return Err(Error::Domain(format!("u must be >= 0, got {u}")));
    }
    Ok(())
}

/// Tangential modulation `fx(u) = 3/(2u^3) [u cos u + (u^2 - 1) sin u]`.
///
/// Tends to 1 at the plane and to 0 far away; `u = inf` returns exactly 0.
pub fn mod_fx(u: f64) -> Result<f64> {
    check_u(u)?;
    Ok(fx_unchecked(u))
}

/// Tangential modulation along `y`; identical to [`mod_fx`].
pub fn mod_fy(u: f64) -> Result<f64> {
    mod_fx(u)
}

/// Normal modulation `fz(u) = 3/u^3 [u cos u - sin u]`.
///
/// Tends to -1 at the plane and to 0 far away.
pub fn mod_fz(u: f64) -> Result<f64> {
    check_u(u)?;
    Ok(fz_unchecked(u))
}

pub fn modulation(u: f64) -> Result<ModulationValues> {
    let fx = mod_fx(u)?;
    Ok(ModulationValues {
        fx,
        fy: fx,
        fz: fz_unchecked(u),
    })
}

fn fx_unchecked(u: f64) -> f64 {
    if u.is_infinite() {
        0.0
    } else if u < SERIES_THRESHOLD {
        fx_series(u)
    } else {
        fx_direct(u)
    }
}

fn fz_unchecked(u: f64) -> f64 {
    if u.is_infinite() {
        0.0
    } else if u < SERIES_THRESHOLD {
        fz_series(u)
    } else {
        fz_direct(u)
    }
}

pub(crate) fn fx_series(u: f64) -> f64 {
    let u2 = u * u;
    1.0 - u2 / 5.0 + 3.0 * u2 * u2 / 280.0
}

pub(crate) fn fz_series(u: f64) -> f64 {
    let u2 = u * u;
    -1.0 + u2 / 10.0 - u2 * u2 / 280.0
}

pub(crate) fn fx_direct(u: f64) -> f64 {
    let (s, c) = u.sin_cos();
    1.5 * (u * c + (u * u - 1.0) * s) / (u * u * u)
}

pub(crate) fn fz_direct(u: f64) -> f64 {
    let (s, c) = u.sin_cos();
    3.0 * (u * c - s) / (u * u * u)
}

/// Dipole-weighted boundary factor `sum_i alpha_i (1 - f_i(u))`.
///
/// Equals 1 in free space, 2/3 at the plane for an isotropic dipole.
pub fn boundary_factor(alpha: [f64; 3], u: f64) -> Result<f64> {
    let f = modulation(u)?.as_array();
    Ok(alpha.iter().zip(f).map(|(a, fi)| a * (1.0 - fi)).sum())
}

/// Spectral density at frequency `lambda` (in units of the transition
/// frequency), in units of the transition frequency.
///
/// Zero for `lambda <= 0`; otherwise `gamma_ratio * lambda^3 * sum_i alpha_i (1 - f_i(lambda u))`,
/// where `u` belongs to the geometry at the transition frequency.
pub fn spectral_density(
    lambda: f64,
    geom: &Geometry,
    params: &AtomParams,
) -> Result<SpectralDensity> {
    if lambda.is_nan() {
        return Err(Error::Domain("lambda is NaN".into()));
    }
    if lambda <= 0.0 {
        return Ok(SpectralDensity(0.0));
    }
    let u = if geom.is_free_space() {
        f64::INFINITY
    } else {
        lambda * geom.u()
    };
    let factor = boundary_factor(params.alpha(), u)?;
    Ok(SpectralDensity(
        params.gamma_ratio() * lambda.powi(3) * factor,
    ))
}

/// Boundary part of the proper-frame field correlator along one axis.
///
/// Arguments are dimensionless: `dtau` is the proper-time separation times the
/// transition frequency, `zeta = omega0 z / c`, `eps` the regulator in the same
/// units. The result is normalized by `hbar c / (pi^2 eps0)` with `c = 1`, so the
/// free-space correlator reads `1 / (dtau - i eps)^4`.
pub fn correlator_boundary(dtau: f64, zeta: f64, eps: f64, component: Axis) -> Result<Complex64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("regulator must be > 0, got {eps}")));
    }
    if !(zeta > 0.0) {
        return Err(Error::Domain(format!("distance must be > 0, got {zeta}")));
    }
    let shifted = Complex64::new(dtau, -eps);
    let d = shifted * shifted - 4.0 * zeta * zeta;
    Ok(match component {
        Axis::X | Axis::Y => -(dtau * dtau + 4.0 * zeta * zeta) / (d * d * d),
        Axis::Z => 1.0 / (d * d),
    })
}

/// Settings of the windowed Fourier transform used to cross-check the
/// modulation functions against the correlators.
#[derive(Debug, Clone, Copy)]
pub struct FourierOracle {
    pub eps: f64,
    /// Half-width of the integration window in `dtau`.
    pub window: f64,
}

impl Default for FourierOracle {
    fn default() -> Self {
        Self {
            eps: 5e-3,
            window: 400.0,
        }
    }
}

impl FourierOracle {
    /// Estimates `f_i(2 lambda zeta)` by numerically transforming the boundary
    /// correlator at frequency `lambda`.
    ///
    /// The free correlator transforms to `pi lambda^3 / 3`, so the boundary
    /// term divided by that value is `-f_i`.
    pub fn modulation_estimate(&self, lambda: f64, zeta: f64, component: Axis) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
        }
        if !(self.window > 4.0 * zeta) {
            return Err(Error::Domain("window must enclose the image poles".into()));
        }
        correlator_boundary(0.0, zeta, self.eps, component)?;

        let half = self.window;
        let flat = 0.5 * half;
        let taper = |t: f64| {
            let a = t.abs();
            if a <= flat {
                1.0
            } else {
                0.5 * (1.0 + (PI * (a - flat) / (half - flat)).cos())
            }
        };
        let integrand = |t: f64| {
            let k = correlator_boundary(t, zeta, self.eps, component).expect("validated");
            let phase = Complex64::from_polar(1.0, lambda * t);
            taper(t) * (phase * k).re
        };

        let pole = 2.0 * zeta;
        let w = 50.0 * self.eps;
        let mut breaks = vec![
            -half,
            -pole - w,
            -pole,
            -pole + w,
            0.0,
            pole - w,
            pole,
            pole + w,
            half,
        ];
        breaks.dedup();
        let opts = QuadOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_intervals: 20_000,
        };
        let mut total = 0.0;
        for pair in breaks.windows(2) {
            total += quadrature::integrate(&integrand, pair[0], pair[1], &opts)?.value;
        }
        Ok(-3.0 * total / (PI * lambda.powi(3)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn limits_at_plane() {
        assert_eq!(mod_fx(0.0).unwrap(), 1.0);
        assert_eq!(mod_fz(0.0).unwrap(), -1.0);
        assert_eq!(mod_fy(1e-9).unwrap(), mod_fx(1e-9).unwrap());
    }

    #[test]
    fn limits_far_away() {
        assert_eq!(mod_fx(f64::INFINITY).unwrap(), 0.0);
        assert_eq!(mod_fz(f64::INFINITY).unwrap(), 0.0);
        assert!(mod_fx(1e7).unwrap().abs() <= 1e-5);
        assert!(mod_fz(1e7).unwrap().abs() <= 1e-5);
    }

    #[test]
    fn values_at_pi() {
        // direct evaluation: -3/(2 pi^2) and -3/pi^2
        assert!((mod_fx(PI).unwrap() + 0.151_981_775_463_506_66).abs() < 1e-14);
        assert!((mod_fz(PI).unwrap() + 0.303_963_550_927_013_3).abs() < 1e-14);
    }

    #[test]
    fn negative_distance_rejected() {
        assert!(matches!(mod_fx(-1.0), Err(Error::Domain(_))));
        assert!(matches!(mod_fz(-1e-300), Err(Error::Domain(_))));
        assert!(mod_fx(f64::NAN).is_err());
    }

    #[test]
    fn branches_agree_near_threshold() {
        let mut u = 0.5 * SERIES_THRESHOLD;
        while u <= 2.0 * SERIES_THRESHOLD {
            assert!((fx_series(u) - fx_direct(u)).abs() <= 1e-10, "fx at {u}");
            assert!((fz_series(u) - fz_direct(u)).abs() <= 1e-10, "fz at {u}");
            u *= 1.01;
        }
    }

    #[test]
    fn continuous_at_threshold() {
        let lo = SERIES_THRESHOLD * (1.0 - f64::EPSILON);
        let hi = SERIES_THRESHOLD;
        assert!((mod_fx(lo).unwrap() - mod_fx(hi).unwrap()).abs() <= 1e-12);
        assert!((mod_fz(lo).unwrap() - mod_fz(hi).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn bounded_on_dense_grid() {
        let n = 200_000;
        for k in 0..=n {
            let u = 1e3 * k as f64 / n as f64;
            let m = modulation(u).unwrap();
            assert!(m.fx.abs() <= 1.0 && m.fz.abs() <= 1.0, "u = {u}: {m:?}");
        }
    }

    fn isotropic() -> AtomParams {
        AtomParams::new(1e9, 1e-6, PI / 2.0, [1.0 / 3.0; 3]).unwrap()
    }

    #[test]
    fn spectral_density_step_and_scaling() {
        let p = isotropic();
        let free = Geometry::free_space();
        assert_eq!(spectral_density(-1.0, &free, &p).unwrap().0, 0.0);
        assert_eq!(spectral_density(0.0, &free, &p).unwrap().0, 0.0);
        let g1 = spectral_density(1.0, &free, &p).unwrap().0;
        let g2 = spectral_density(2.0, &free, &p).unwrap().0;
        assert!((g1 - 1e-6).abs() <= 1e-22);
        assert_eq!(g2 / g1, 8.0);
    }

    #[test]
    fn spectral_density_far_plane_matches_free_space() {
        let p = isotropic();
        let g = spectral_density(1.0, &Geometry::from_u(1e6).unwrap(), &p)
            .unwrap()
            .0;
        // the modulation decays only as 1/u
        assert!(((g - 1e-6) / 1e-6).abs() <= 2e-6);
    }

    #[test]
    fn normal_dipole_doubles_at_plane() {
        let p = AtomParams::new(1e9, 1e-6, PI / 2.0, [0.0, 0.0, 1.0]).unwrap();
        let g = spectral_density(1.0, &Geometry::from_u(1e-9).unwrap(), &p)
            .unwrap()
            .0;
        assert!((g - 2e-6).abs() <= 1e-18);
    }

    #[test]
    fn correlator_tangential_components_equal() {
        for &(t, z) in &[(0.0, 0.3), (1.7, 0.5), (-4.0, 2.0)] {
            let x = correlator_boundary(t, z, 1e-2, Axis::X).unwrap();
            let y = correlator_boundary(t, z, 1e-2, Axis::Y).unwrap();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn correlator_at_coincidence() {
        let (z, eps) = (0.5, 1e-3);
        let k = correlator_boundary(0.0, z, eps, Axis::Z).unwrap();
        let exact = 1.0 / (eps * eps + 4.0 * z * z).powi(2);
        assert!((k.re - exact).abs() <= 1e-12 * exact && k.im.abs() <= 1e-12 * exact);
        assert!((k.re - 1.0 / (16.0 * z.powi(4))).abs() <= 1e-5 * k.re);
    }

    #[test]
    fn correlator_rejects_bad_regulator() {
        assert!(correlator_boundary(0.0, 1.0, 0.0, Axis::Z).is_err());
        assert!(correlator_boundary(0.0, 1.0, -1e-3, Axis::X).is_err());
    }

    #[test]
    fn fourier_oracle_reproduces_modulation() {
        let oracle = FourierOracle::default();
        for &u in &[1.0, 3.0] {
            let zeta = 0.5 * u;
            let ex = oracle.modulation_estimate(1.0, zeta, Axis::X).unwrap();
            let ez = oracle.modulation_estimate(1.0, zeta, Axis::Z).unwrap();
            let fx = mod_fx(u).unwrap();
            let fz = mod_fz(u).unwrap();
            assert!(((ex - fx) / fx).abs() <= 0.05, "fx({u}): {ex} vs {fx}");
            assert!(((ez - fz) / fz).abs() <= 0.05, "fz({u}): {ez} vs {fz}");
        }
    }

    proptest! {
        #[test]
        fn modulation_bounded(u in 0.0f64..1e3) {
            let m = modulation(u).unwrap();
            prop_assert!(m.fx <= 1.0 && m.fx >= -1.0);
            prop_assert!(m.fz <= 1.0 && m.fz >= -1.0);
            prop_assert_eq!(m.fx, m.fy);
        }
    }
}

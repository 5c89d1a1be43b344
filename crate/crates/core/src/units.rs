//! Conversion between SI quantities and the dimensionless variables used by
//! every kernel: frequencies in units of the transition frequency, time as the
//! precession angle `phi = omega0 * t`, distances as `u = 2 omega0 z / c`.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `u = 2 omega0 z / c`. An infinite distance maps to `u = inf`.
pub fn distance_to_u(z_m: f64, omega0: f64) -> f64 {
    2.0 * omega0 * z_m / SPEED_OF_LIGHT
}

pub fn u_to_distance(u: f64, omega0: f64) -> f64 {
    u * SPEED_OF_LIGHT / (2.0 * omega0)
}

/// Elapsed time in seconds to the accumulated precession angle.
pub fn time_to_phi(t_s: f64, omega0: f64) -> f64 {
    omega0 * t_s
}

pub fn phi_to_time(phi: f64, omega0: f64) -> f64 {
    phi / omega0
}

pub fn cycles_to_phi(cycles: f64) -> f64 {
    std::f64::consts::TAU * cycles
}

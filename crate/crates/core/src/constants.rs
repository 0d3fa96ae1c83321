//! Physical constants, CODATA 2018 values.

/// Neutron mass in kg.
pub const NEUTRON_MASS: f64 = 1.674_927_498_04e-27;

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Planck constant in J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

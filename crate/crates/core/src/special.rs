//! Special functions.

/// First positive zero of J0.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// Bessel function of the first kind, order zero.
///
/// Delegates to `libm`'s double-precision FreeBSD port (rational
/// approximation below |x| = 2, asymptotic form with polynomial-corrected
/// amplitude and phase above), accurate to a few ulps everywhere we use it
/// (|x| <= 50 needs absolute error under 1e-12). The unit tests pin it
/// against an independent truncated power series.
pub fn bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}

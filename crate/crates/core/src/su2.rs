//! Complex 2x2 unitary algebra for the interferometer path qubit.
//!
//! The path degree of freedom is a two-level system spanned by `|I>` (the
//! +k_y beam) and `|II>` (the -k_y beam). Every rotation here uses the
//! convention `R_n(theta) = exp(+i theta sigma_n / 2)`, so
//! `R_z(phi) = diag(e^{i phi/2}, e^{-i phi/2})` and
//! `R_x(pi) = i sigma_x`. A crystal blade is the composite
//! `R_z(beta) R_x(alpha) R_z(beta)` with transmission `t = cos(alpha/2)`
//! and reflection `r = sin(alpha/2)`; `beta` is the dynamical phase.
//!
//! Global phases carry no physics in this model (all observables are
//! `|amplitude|^2`), so operator comparisons that should ignore them go
//! through [`equal_up_to_global_phase`].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex probability amplitude.
pub type ComplexAmplitude = Complex64;

/// Tolerance used for the normalization check in [`PathState::new`].
pub const NORM_TOL: f64 = 1e-12;

/// A 2x2 complex matrix acting on the path qubit.
///
/// All public constructors produce unitaries; [`Operator2::scaled`] is the
/// one escape hatch (used for global-phase bookkeeping) and keeps unitarity
/// only for unit-modulus factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator2 {
    entries: [[Complex64; 2]; 2],
}

impl Operator2 {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            entries: [[one, zero], [zero, one]],
        }
    }

    pub fn from_entries(entries: [[Complex64; 2]; 2]) -> Self {
        Self { entries }
    }

    /// Entry at (row, col); row/col 0 is `|I>`, 1 is `|II>`.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    /// Matrix product `self * rhs` (rhs acts first on a ket).
    pub fn mul(&self, rhs: &Operator2) -> Operator2 {
        let a = &self.entries;
        let b = &rhs.entries;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Operator2 { entries: out }
    }

    pub fn adjoint(&self) -> Operator2 {
        let e = &self.entries;
        Operator2 {
            entries: [[e[0][0].conj(), e[1][0].conj()], [e[0][1].conj(), e[1][1].conj()]],
        }
    }

    pub fn determinant(&self) -> Complex64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    /// `self` multiplied entrywise by `factor`. Unitary only for
    /// `|factor| = 1`.
    pub fn scaled(&self, factor: Complex64) -> Operator2 {
        let mut out = self.entries;
        for row in &mut out {
            for e in row.iter_mut() {
                *e *= factor;
            }
        }
        Operator2 { entries: out }
    }

    /// Max-norm of `U^dagger U - 1`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().mul(self);
        let id = Operator2::identity();
        max_entry_distance(&p, &id)
    }

    pub fn apply(&self, state: &PathState) -> PathState {
        let e = &self.entries;
        PathState {
            amplitude_i: e[0][0] * state.amplitude_i + e[0][1] * state.amplitude_ii,
            amplitude_ii: e[1][0] * state.amplitude_i + e[1][1] * state.amplitude_ii,
        }
    }
}

/// Max-norm of the entrywise difference of two operators.
pub fn max_entry_distance(a: &Operator2, b: &Operator2) -> f64 {
    let mut max = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            max = max.max((a.entries[i][j] - b.entries[i][j]).norm());
        }
    }
    max
}

/// A normalized pure state of the path qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    amplitude_i: Complex64,
    amplitude_ii: Complex64,
}

impl PathState {
    /// Builds a state from amplitudes; they must already be normalized to
    /// within [`NORM_TOL`].
    pub fn new(amplitude_i: ComplexAmplitude, amplitude_ii: ComplexAmplitude) -> Result<Self> {
        if !amplitude_i.is_finite() || !amplitude_ii.is_finite() {
            return Err(Error::NonFinite("PathState amplitude"));
        }
        let norm_sq = amplitude_i.norm_sqr() + amplitude_ii.norm_sqr();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self {
            amplitude_i,
            amplitude_ii,
        })
    }

    /// The `|I>` basis state.
    pub fn path_i() -> Self {
        Self {
            amplitude_i: Complex64::new(1.0, 0.0),
            amplitude_ii: Complex64::new(0.0, 0.0),
        }
    }

    /// The `|II>` basis state.
    pub fn path_ii() -> Self {
        Self {
            amplitude_i: Complex64::new(0.0, 0.0),
            amplitude_ii: Complex64::new(1.0, 0.0),
        }
    }

    pub fn amplitude_i(&self) -> ComplexAmplitude {
        self.amplitude_i
    }

    pub fn amplitude_ii(&self) -> ComplexAmplitude {
        self.amplitude_ii
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitude_i.norm_sqr() + self.amplitude_ii.norm_sqr()
    }

    /// Detection probabilities `(|<I|psi>|^2, |<II|psi>|^2)`.
    pub fn probabilities(&self) -> (f64, f64) {
        (self.amplitude_i.norm_sqr(), self.amplitude_ii.norm_sqr())
    }
}

/// Splitting angle and dynamical phase of one crystal blade.
///
/// `t = cos(alpha/2) >= 0` and `r = sin(alpha/2) >= 0` hold by the range
/// restriction on `alpha`, and `t^2 + r^2 = 1` by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BladeParams {
    alpha: f64,
    beta: f64,
}

impl BladeParams {
    /// `alpha` must lie in `[0, pi]`; `beta` is any finite phase in radians.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::NonFinite("alpha"));
        }
        if !beta.is_finite() {
            return Err(Error::NonFinite("beta"));
        }
        if !(0.0..=std::f64::consts::PI).contains(&alpha) {
            return Err(Error::InvalidInput(format!(
                "alpha = {alpha} outside [0, pi]"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// 50:50 splitting (`alpha = pi/2`) with the given dynamical phase.
    pub fn balanced(beta: f64) -> Result<Self> {
        Self::new(std::f64::consts::FRAC_PI_2, beta)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Transmission amplitude modulus `t = cos(alpha/2)`.
    pub fn transmission(&self) -> f64 {
        (self.alpha * 0.5).cos()
    }

    /// Reflection amplitude modulus `r = sin(alpha/2)`.
    pub fn reflection(&self) -> f64 {
        (self.alpha * 0.5).sin()
    }
}

pub(crate) fn rz(phi: f64) -> Operator2 {
    let half = 0.5 * phi;
    let zero = Complex64::new(0.0, 0.0);
    Operator2 {
        entries: [
            [Complex64::from_polar(1.0, half), zero],
            [zero, Complex64::from_polar(1.0, -half)],
        ],
    }
}

pub(crate) fn rxy(phi_r: f64, alpha: f64) -> Operator2 {
    let c = Complex64::new((alpha * 0.5).cos(), 0.0);
    let s = (alpha * 0.5).sin();
    // exp(i a (cos(p) sx + sin(p) sy) / 2) = cos(a/2) 1 + i sin(a/2) (cos(p) sx + sin(p) sy)
    let upper = Complex64::new(0.0, s) * Complex64::from_polar(1.0, -phi_r);
    let lower = Complex64::new(0.0, s) * Complex64::from_polar(1.0, phi_r);
    Operator2 {
        entries: [[c, upper], [lower, c]],
    }
}

pub(crate) fn rx(alpha: f64) -> Operator2 {
    rxy(0.0, alpha)
}

/// Rotation about z: `diag(e^{i phi/2}, e^{-i phi/2})`.
pub fn rot_z(phi: f64) -> Result<Operator2> {
    if !phi.is_finite() {
        return Err(Error::NonFinite("phi"));
    }
    Ok(rz(phi))
}

/// Rotation about x: `cos(alpha/2) 1 + i sin(alpha/2) sigma_x`.
pub fn rot_x(alpha: f64) -> Result<Operator2> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite("alpha"));
    }
    Ok(rx(alpha))
}

/// Rotation about the equatorial axis at azimuth `phi_r`:
/// `exp(i alpha (cos(phi_r) sigma_x + sin(phi_r) sigma_y) / 2)`.
///
/// `rot_xy(0, alpha)` equals `rot_x(alpha)` entry by entry.
pub fn rot_xy(phi_r: f64, alpha: f64) -> Result<Operator2> {
    if !phi_r.is_finite() {
        return Err(Error::NonFinite("phi_r"));
    }
    if !alpha.is_finite() {
        return Err(Error::NonFinite("alpha"));
    }
    Ok(rxy(phi_r, alpha))
}

/// Composite blade operator `R_z(beta) R_x(alpha) R_z(beta)`.
///
/// Written out: `[[t e^{i beta}, i r], [i r, t e^{-i beta}]]` with
/// `t = cos(alpha/2)`, `r = sin(alpha/2)`, so the transmitted amplitude
/// carries the dynamical phase `beta = arg<I|U_B|I>`.
pub fn blade_operator(params: BladeParams) -> Operator2 {
    let zb = rz(params.beta);
    zb.mul(&rx(params.alpha)).mul(&zb)
}

/// Product of a sequence of operators; the first element of the slice acts
/// first on the state, i.e. `compose(&[a, b, c]) == c * b * a`.
pub fn compose(sequence: &[Operator2]) -> Result<Operator2> {
    let (first, rest) = sequence.split_first().ok_or(Error::EmptySequence)?;
    Ok(rest.iter().fold(*first, |acc, op| op.mul(&acc)))
}

/// True when `a == c * b` for some unit-modulus scalar `c`, to within `tol`
/// in the entrywise max-norm. The candidate phase is taken from the ratio of
/// the entries at the position where `b` has its largest modulus.
pub fn equal_up_to_global_phase(a: &Operator2, b: &Operator2, tol: f64) -> bool {
    debug_assert!(tol > 0.0);
    let mut best = (0usize, 0usize);
    let mut best_norm = -1.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let n = b.entry(i, j).norm();
            if n > best_norm {
                best_norm = n;
                best = (i, j);
            }
        }
    }
    if best_norm == 0.0 {
        return max_entry_distance(a, b) < tol;
    }
    let ratio = a.entry(best.0, best.1) / b.entry(best.0, best.1);
    if ratio.norm() == 0.0 {
        return false;
    }
    let phase = ratio / ratio.norm();
    max_entry_distance(a, &b.scaled(phase)) < tol
}

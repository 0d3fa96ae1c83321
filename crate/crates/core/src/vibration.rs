//! Sinusoidal mechanical-vibration model.
//!
//! The whole crystal vibrates as `zeta(t) = zeta_0 sin(omega t + varphi)`,
//! either translating along the reciprocal lattice vector (y-noise,
//! amplitude in meters) or rotating about the normal of the beam plane
//! (z-noise, amplitude in radians). A neutron entering at `t = 0` picks up
//! a loop phase difference that depends on the random arrival phase
//! `varphi`; averaging `e^{i Delta Phi(varphi)}` over uniform `varphi`
//! gives the coherence function. For the low-frequency phases, which are
//! all of the form `K sin`/`K cos`, that average is `J_0(K)`.
//!
//! Loop phases follow the bouncing-ball blade interaction model evaluated
//! at `t = 0`; the five-blade geometry carries two branches, symmetric
//! (middle blade transmitting, identical to the four-blade loop pair) and
//! antisymmetric (middle blade reflecting).

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constants::{HBAR, NEUTRON_MASS};
use crate::error::{Error, Result};
use crate::geometry::GeometryKind;
use crate::material;
use crate::quad;
pub use crate::special::bessel_j0;

/// Beam and instrument parameters with the derived kinematic quantities.
///
/// Derived values (speed, Bragg angle, velocity components, transit time)
/// are recomputed on access, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    wavelength: f64,
    d_spacing: f64,
    blade_separation: f64,
    mass: f64,
    hbar: f64,
}

impl PhysicalParams {
    pub fn new(wavelength: f64, d_spacing: f64, blade_separation: f64) -> Result<Self> {
        Self::with_constants(wavelength, d_spacing, blade_separation, NEUTRON_MASS, HBAR)
    }

    pub fn with_constants(
        wavelength: f64,
        d_spacing: f64,
        blade_separation: f64,
        mass: f64,
        hbar: f64,
    ) -> Result<Self> {
        material::bragg_angle(wavelength, d_spacing)?;
        if !(blade_separation.is_finite() && blade_separation > 0.0) {
            return Err(Error::InvalidInput(format!(
                "blade separation must be positive, got {blade_separation}"
            )));
        }
        if !(mass.is_finite() && mass > 0.0 && hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidInput(
                "mass and hbar must be positive".into(),
            ));
        }
        Ok(Self {
            wavelength,
            d_spacing,
            blade_separation,
            mass,
            hbar,
        })
    }

    /// 4.4 Å neutrons on Si(111) with L = 5 cm.
    pub fn defaults() -> Self {
        let si111 = material::lookup("Si111").expect("shipped reflection table");
        Self::new(4.4e-10, si111.d_spacing, 0.05).expect("default parameters are valid")
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn d_spacing(&self) -> f64 {
        self.d_spacing
    }

    /// Distance between the first and second blades, the length unit `L`.
    pub fn blade_separation(&self) -> f64 {
        self.blade_separation
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// de Broglie speed `h / (m lambda)` with `h = 2 pi hbar`.
    pub fn speed(&self) -> f64 {
        std::f64::consts::TAU * self.hbar / (self.mass * self.wavelength)
    }

    pub fn bragg_angle(&self) -> f64 {
        material::bragg_angle(self.wavelength, self.d_spacing)
            .expect("validated at construction")
    }

    /// Velocity component along the reciprocal lattice vector.
    pub fn v_parallel(&self) -> f64 {
        self.speed() * self.bragg_angle().sin()
    }

    /// Velocity component along the blade normal.
    pub fn v_perp(&self) -> f64 {
        self.speed() * self.bragg_angle().cos()
    }

    /// Transit time `tau = L / v_perp`.
    pub fn transit_time(&self) -> f64 {
        self.blade_separation / self.v_perp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseAxis {
    /// Translation along the reciprocal lattice vector; amplitude in meters.
    Y,
    /// Rotation about the z-axis; amplitude in radians.
    Z,
}

impl NoiseAxis {
    pub fn label(self) -> &'static str {
        match self {
            Self::Y => "y",
            Self::Z => "z",
        }
    }
}

/// One sinusoidal noise realization `zeta(t) = zeta_0 sin(omega t + varphi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    axis: NoiseAxis,
    amplitude: f64,
    omega: f64,
    varphi: f64,
}

impl NoiseSpec {
    /// `varphi` is reduced into `[0, 2 pi)`.
    pub fn new(axis: NoiseAxis, amplitude: f64, omega: f64, varphi: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise amplitude must be non-negative, got {amplitude}"
            )));
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "angular frequency must be non-negative, got {omega}"
            )));
        }
        if !varphi.is_finite() {
            return Err(Error::NonFinite("varphi"));
        }
        Ok(Self {
            axis,
            amplitude,
            omega,
            varphi: varphi.rem_euclid(std::f64::consts::TAU),
        })
    }

    pub fn axis(&self) -> NoiseAxis {
        self.axis
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn varphi(&self) -> f64 {
        self.varphi
    }
}

/// Displacement and its first three time derivatives at time `t`.
///
/// For y-noise the blade-frame velocity is `u_y = d1`, so `u̇_y = d2` and
/// `ü_y = d3`; for z-noise the angular rate is `θ̇ = d1` and `θ̈ = d2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalDerivatives {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// Derivatives of the noise signal at time `t`.
pub fn noise_kinematics(spec: &NoiseSpec, t: f64) -> SignalDerivatives {
    let (a, w) = (spec.amplitude, spec.omega);
    let (s, c) = (w * t + spec.varphi).sin_cos();
    SignalDerivatives {
        value: a * s,
        d1: a * w * c,
        d2: -a * w * w * s,
        d3: -a * w * w * w * c,
    }
}

/// Loop phase differences of one noise realization.
///
/// `loop2` is absent for the three-blade geometry (a single loop);
/// `loop2_antisymmetric` is populated only for the five-blade geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopPhases {
    pub loop1: f64,
    pub loop2: Option<f64>,
    pub loop2_antisymmetric: Option<f64>,
}

impl LoopPhases {
    /// Total phase with the middle blade transmitting (or the only total
    /// for the three- and four-blade geometries).
    pub fn total_symmetric(&self) -> f64 {
        self.loop1 + self.loop2.unwrap_or(0.0)
    }

    /// Total phase with the middle blade reflecting (five-blade only).
    pub fn total_antisymmetric(&self) -> Option<f64> {
        self.loop2_antisymmetric.map(|l2| self.loop1 + l2)
    }
}

/// Exact loop phases of the bouncing-ball model, evaluated at entry time
/// `t = 0`.
pub fn loop_phases_exact(
    kind: GeometryKind,
    spec: &NoiseSpec,
    params: &PhysicalParams,
) -> LoopPhases {
    let k = noise_kinematics(spec, 0.0);
    let m = params.mass();
    let hbar = params.hbar();
    let tau = params.transit_time();
    let v_par = params.v_parallel();
    match spec.axis {
        NoiseAxis::Y => {
            let bracket = v_par - k.d1;
            match kind {
                GeometryKind::ThreeBlade => LoopPhases {
                    loop1: 32.0 * m / hbar * tau * tau * bracket * k.d2,
                    loop2: None,
                    loop2_antisymmetric: None,
                },
                GeometryKind::FourBlade | GeometryKind::FiveBlade => {
                    let pre = 4.0 * m * tau * tau / hbar * bracket;
                    let loop1 = -pre * (2.0 * k.d2 + tau * k.d3);
                    let loop2 = pre * (2.0 * k.d2 + 7.0 * tau * k.d3);
                    let anti = (kind == GeometryKind::FiveBlade)
                        .then_some(-pre * (2.0 * k.d2 + 3.0 * tau * k.d3));
                    LoopPhases {
                        loop1,
                        loop2: Some(loop2),
                        loop2_antisymmetric: anti,
                    }
                }
            }
        }
        NoiseAxis::Z => {
            let l = params.blade_separation();
            let bracket = v_par - 2.0 * l * k.d1;
            match kind {
                GeometryKind::ThreeBlade => LoopPhases {
                    loop1: 32.0 * m * tau / hbar * bracket * l * k.d1,
                    loop2: None,
                    loop2_antisymmetric: None,
                },
                GeometryKind::FourBlade | GeometryKind::FiveBlade => {
                    let pre = 8.0 * m * tau / hbar * bracket;
                    let loop1 = pre * (l * k.d1 - l * tau * k.d2);
                    let loop2 = -pre * (l * k.d1 + 5.0 * l * tau * k.d2);
                    let anti = (kind == GeometryKind::FiveBlade)
                        .then_some(pre * (l * k.d1 + l * tau * k.d2));
                    LoopPhases {
                        loop1,
                        loop2: Some(loop2),
                        loop2_antisymmetric: anti,
                    }
                }
            }
        }
    }
}

/// Scaling of a low-frequency total phase: `Delta Phi = prefactor *
/// omega^omega_power * sin-or-cos(varphi)`. The prefactor is also the
/// argument scale of the closed-form coherence `J_0(prefactor omega^power)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceScaling {
    pub prefactor: f64,
    pub omega_power: i32,
}

impl CoherenceScaling {
    pub fn bessel_argument(&self, omega: f64) -> f64 {
        self.prefactor * omega.powi(self.omega_power)
    }
}

/// Low-frequency scaling of the symmetric-branch total phase (the only
/// branch for the three- and four-blade geometries).
pub fn coherence_scaling(
    kind: GeometryKind,
    axis: NoiseAxis,
    params: &PhysicalParams,
    amplitude: f64,
) -> CoherenceScaling {
    let m = params.mass();
    let hbar = params.hbar();
    let tau = params.transit_time();
    let v_par = params.v_parallel();
    match (axis, kind) {
        (NoiseAxis::Y, GeometryKind::ThreeBlade) => CoherenceScaling {
            prefactor: 32.0 * m * v_par * amplitude * tau * tau / hbar,
            omega_power: 2,
        },
        (NoiseAxis::Y, _) => CoherenceScaling {
            prefactor: 24.0 * m * v_par * amplitude * tau.powi(3) / hbar,
            omega_power: 3,
        },
        (NoiseAxis::Z, GeometryKind::ThreeBlade) => CoherenceScaling {
            prefactor: 32.0 * m * params.v_perp() * v_par * amplitude * tau * tau / hbar,
            omega_power: 1,
        },
        (NoiseAxis::Z, _) => CoherenceScaling {
            prefactor: 48.0 * m * params.v_perp() * v_par * amplitude * tau.powi(3) / hbar,
            omega_power: 2,
        },
    }
}

/// Low-frequency scaling of the five-blade antisymmetric branch.
pub fn coherence_scaling_antisymmetric(
    axis: NoiseAxis,
    params: &PhysicalParams,
    amplitude: f64,
) -> CoherenceScaling {
    let m = params.mass();
    let hbar = params.hbar();
    let tau = params.transit_time();
    let v_par = params.v_parallel();
    match axis {
        NoiseAxis::Y => CoherenceScaling {
            prefactor: 16.0 * m * v_par * amplitude * tau * tau / hbar,
            omega_power: 2,
        },
        NoiseAxis::Z => CoherenceScaling {
            prefactor: 16.0 * m * params.v_perp() * v_par * amplitude * tau * tau / hbar,
            omega_power: 1,
        },
    }
}

/// Literal low-frequency (`omega tau << 1`) total phases: symmetric branch
/// and, for the five-blade geometry, the antisymmetric one.
///
/// The phase quadrature (sin vs cos of `varphi`) follows the printed
/// low-frequency results; the exact expressions can differ from these by a
/// quarter-period shift in `varphi`, which leaves every uniform-average
/// quantity unchanged.
pub fn loop_phase_lowfreq(
    kind: GeometryKind,
    spec: &NoiseSpec,
    params: &PhysicalParams,
) -> (f64, Option<f64>) {
    let sym =
        lowfreq_phase_fn(kind, spec.axis, spec.omega, params, spec.amplitude, false)(spec.varphi);
    let anti = (kind == GeometryKind::FiveBlade).then(|| {
        lowfreq_phase_fn(kind, spec.axis, spec.omega, params, spec.amplitude, true)(spec.varphi)
    });
    (sym, anti)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// A coherence function value with provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceResult {
    pub gamma: Complex64,
    pub method: CoherenceMethod,
    /// Largest per-component standard error (Monte Carlo only).
    pub stderr: Option<f64>,
    /// Integrand evaluations or Monte Carlo samples.
    pub samples: u64,
}

/// Coherence of one geometry: the symmetric branch and, for the five-blade
/// geometry, the antisymmetric one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryCoherence {
    pub symmetric: CoherenceResult,
    pub antisymmetric: Option<CoherenceResult>,
}

/// Closed-form low-frequency coherence `J_0(prefactor omega^power)`.
pub fn coherence_closed_form(
    kind: GeometryKind,
    axis: NoiseAxis,
    omega: f64,
    params: &PhysicalParams,
    amplitude: f64,
) -> GeometryCoherence {
    let make = |scaling: CoherenceScaling| CoherenceResult {
        gamma: Complex64::new(bessel_j0(scaling.bessel_argument(omega)), 0.0),
        method: CoherenceMethod::ClosedForm,
        stderr: None,
        samples: 0,
    };
    GeometryCoherence {
        symmetric: make(coherence_scaling(kind, axis, params, amplitude)),
        antisymmetric: (kind == GeometryKind::FiveBlade)
            .then(|| make(coherence_scaling_antisymmetric(axis, params, amplitude))),
    }
}

/// `gamma = (1/2 pi) int_0^{2 pi} e^{i Delta Phi(varphi)} d varphi` by
/// adaptive quadrature to absolute tolerance `tol` per component.
pub fn coherence_quadrature<F: Fn(f64) -> f64>(phase: F, tol: f64) -> Result<CoherenceResult> {
    let tau = std::f64::consts::TAU;
    let pts = [0.0, 0.25 * tau, 0.5 * tau, 0.75 * tau, tau];
    let re = quad::integrate_segmented(|v| phase(v).cos(), &pts, tol * tau)?;
    let im = quad::integrate_segmented(|v| phase(v).sin(), &pts, tol * tau)?;
    Ok(CoherenceResult {
        gamma: Complex64::new(re.value / tau, im.value / tau),
        method: CoherenceMethod::Quadrature,
        stderr: None,
        samples: (re.evaluations + im.evaluations) as u64,
    })
}

/// Monte Carlo estimate of the same average over `n >= 1000` uniform
/// arrival phases from a seeded generator; bitwise reproducible for a
/// fixed seed.
pub fn coherence_montecarlo<F: Fn(f64) -> f64>(
    phase: F,
    n: u64,
    seed: u64,
) -> Result<CoherenceResult> {
    if n < 1000 {
        return Err(Error::InvalidInput(format!(
            "need at least 1000 samples, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sum_sq = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        let varphi = rng.gen::<f64>() * std::f64::consts::TAU;
        let (s, c) = phase(varphi).sin_cos();
        sum += Complex64::new(c, s);
        sum_sq += Complex64::new(c * c, s * s);
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var_re = ((sum_sq.re / nf - mean.re * mean.re) / (nf - 1.0)).max(0.0);
    let var_im = ((sum_sq.im / nf - mean.im * mean.im) / (nf - 1.0)).max(0.0);
    Ok(CoherenceResult {
        gamma: mean,
        method: CoherenceMethod::MonteCarlo,
        stderr: Some(var_re.sqrt().max(var_im.sqrt())),
        samples: n,
    })
}

/// The low-frequency total phase as a function of the arrival phase, for
/// feeding the quadrature and Monte Carlo averages.
pub fn lowfreq_phase_fn(
    kind: GeometryKind,
    axis: NoiseAxis,
    omega: f64,
    params: &PhysicalParams,
    amplitude: f64,
    antisymmetric: bool,
) -> impl Fn(f64) -> f64 {
    let scaling = if antisymmetric {
        coherence_scaling_antisymmetric(axis, params, amplitude)
    } else {
        coherence_scaling(kind, axis, params, amplitude)
    };
    let k = scaling.bessel_argument(omega);
    // (signed amplitude, sine-vs-cosine quadrature) of the printed limits
    let (sign, use_sin) = if antisymmetric {
        (1.0, true)
    } else {
        match (axis, kind) {
            (NoiseAxis::Y, GeometryKind::ThreeBlade) => (1.0, true),
            (NoiseAxis::Y, _) => (1.0, false),
            (NoiseAxis::Z, GeometryKind::ThreeBlade) => (1.0, false),
            (NoiseAxis::Z, _) => (-1.0, true),
        }
    };
    move |varphi: f64| {
        if use_sin {
            sign * k * varphi.sin()
        } else {
            sign * k * varphi.cos()
        }
    }
}

/// The exact total phase (symmetric or antisymmetric branch) as a function
/// of the arrival phase.
pub fn exact_phase_fn(
    kind: GeometryKind,
    axis: NoiseAxis,
    omega: f64,
    params: &PhysicalParams,
    amplitude: f64,
    antisymmetric: bool,
) -> impl Fn(f64) -> f64 + '_ {
    move |varphi: f64| {
        let spec = NoiseSpec::new(axis, amplitude, omega, varphi)
            .expect("amplitude and omega validated by caller");
        let phases = loop_phases_exact(kind, &spec, params);
        if antisymmetric {
            phases
                .total_antisymmetric()
                .expect("antisymmetric branch requested for five-blade geometry")
        } else {
            phases.total_symmetric()
        }
    }
}

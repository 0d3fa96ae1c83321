//! Dynamical-diffraction phase model and momentum-averaged coherence.
//!
//! Near the Bragg condition a crystal blade transmits with the symmetric-Laue
//! amplitude
//!
//! ```text
//! t(y) = e^{iAy} [ cos(A sqrt(1+y^2)) - i (y / sqrt(1+y^2)) sin(A sqrt(1+y^2)) ]
//! ```
//!
//! where `A = pi D / Delta_H` (blade thickness over Pendellösung length) and
//! `y` is the angular deviation from Bragg in Darwin-width units. The phase
//! of the transmitted amplitude is the dynamical phase `beta = arg t`;
//! averaging `e^{i beta}` (one extra crystal) or `e^{i 2 beta}` (the
//! phase-sensitive four-blade loop) over the momentum distribution accepted
//! by the crystal yields the coherence and hence the contrast.
//!
//! Two knobs that the literature does not fix uniquely are exposed on the
//! profile instead of hard-coded: the scale converting radians of deviation
//! to `y` (default `sin(2 theta_B) Delta_H / lambda = cos(theta_B) Delta_H / d`),
//! and whether `arg t` keeps the `e^{iAy}` reference-wave factor. With the
//! ramp the phase is odd and bounded, falling off as `-A/(2y)`; without it
//! the linear, defocusing-like part is removed and the unwrapped phase grows
//! asymptotically linearly. Measured phase curves can be supplied as
//! tabulated profiles in place of the analytic form.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::material::Reflection;
use crate::quad;

/// Analytic symmetric-Laue transmission profile.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticProfile {
    /// Blade thickness D in meters.
    thickness: f64,
    /// Pendellösung length in meters.
    pendellosung: f64,
    /// Bragg angle in radians.
    bragg_angle: f64,
    /// Lattice plane spacing in meters.
    d_spacing: f64,
    /// Override for the deviation scale dy/d(delta theta) in 1/rad.
    deviation_scale: Option<f64>,
    /// Keep the e^{iAy} reference-wave factor in the phase.
    include_ramp: bool,
}

impl AnalyticProfile {
    pub fn new(
        thickness: f64,
        pendellosung: f64,
        bragg_angle: f64,
        d_spacing: f64,
    ) -> Result<Self> {
        for (value, what) in [
            (thickness, "thickness"),
            (pendellosung, "pendellosung"),
            (d_spacing, "d-spacing"),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{what} must be positive, got {value}"
                )));
            }
        }
        if !(bragg_angle.is_finite() && bragg_angle > 0.0 && bragg_angle < std::f64::consts::FRAC_PI_2)
        {
            return Err(Error::InvalidInput(format!(
                "Bragg angle must lie in (0, pi/2), got {bragg_angle}"
            )));
        }
        Ok(Self {
            thickness,
            pendellosung,
            bragg_angle,
            d_spacing,
            deviation_scale: None,
            include_ramp: true,
        })
    }

    /// Profile for a shipped reflection at the given wavelength.
    pub fn for_reflection(r: &Reflection, wavelength: f64, thickness: f64) -> Result<Self> {
        Self::new(
            thickness,
            r.pendellosung_at(wavelength)?,
            r.bragg_angle(wavelength)?,
            r.d_spacing,
        )
    }

    /// Overrides the deviation scale (1/rad).
    pub fn with_deviation_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidInput(format!(
                "deviation scale must be positive, got {scale}"
            )));
        }
        self.deviation_scale = Some(scale);
        Ok(self)
    }

    /// Drops the linear `A y` reference-wave term from the reported phase,
    /// leaving only the bounded oscillatory part (the convention in which
    /// the defocusing-like piece has been separated off).
    pub fn without_ramp(mut self) -> Self {
        self.include_ramp = false;
        self
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn pendellosung(&self) -> f64 {
        self.pendellosung
    }

    pub fn bragg_angle(&self) -> f64 {
        self.bragg_angle
    }

    pub fn includes_ramp(&self) -> bool {
        self.include_ramp
    }

    /// `A = pi D / Delta_H`.
    pub fn thickness_parameter(&self) -> f64 {
        std::f64::consts::PI * self.thickness / self.pendellosung
    }

    /// dy/d(delta theta) in 1/rad; defaults to
    /// `cos(theta_B) Delta_H / d = sin(2 theta_B) Delta_H / lambda`.
    pub fn deviation_scale(&self) -> f64 {
        self.deviation_scale
            .unwrap_or(self.bragg_angle.cos() * self.pendellosung / self.d_spacing)
    }

    fn amplitudes(&self, delta_theta: f64) -> (Complex64, Complex64) {
        let y = self.deviation_scale() * delta_theta;
        let a = self.thickness_parameter();
        let root = (1.0 + y * y).sqrt();
        let x = a * root;
        let bracket = Complex64::new(x.cos(), -(y / root) * x.sin());
        let refl = Complex64::new(0.0, x.sin() / root);
        if self.include_ramp {
            let ramp = Complex64::from_polar(1.0, a * y);
            (ramp * bracket, ramp * refl)
        } else {
            (bracket, refl)
        }
    }

    /// Continuously unwrapped `arg t`.
    ///
    /// Odd in the deviation; with the ramp it decays as `-A/(2y)` far from
    /// Bragg, without it it grows like `-A |y| sign(y)`. Exactly at the
    /// Bragg angle the value is the `y -> 0+` limit (the two half-lines
    /// differ by an invisible multiple of 2 pi when `A` is not a multiple
    /// of pi).
    fn beta_unwrapped(&self, delta_theta: f64) -> f64 {
        let a = self.thickness_parameter();
        let y = self.deviation_scale() * delta_theta;
        let u = y.abs();
        let root = (1.0 + u * u).sqrt();
        let x = a * root;
        let s = u / root;
        // cos X - i s sin X = e^{-iX} [ (1+s) + (1-s) e^{2iX} ] / 2, and the
        // bracketed factor stays in the right half-plane for u > 0, so its
        // principal argument is already continuous.
        let f = Complex64::new(
            (1.0 + s) + (1.0 - s) * (2.0 * x).cos(),
            (1.0 - s) * (2.0 * x).sin(),
        );
        let positive_branch = if self.include_ramp {
            // arg f - X + A u, with the cancellation-prone A(u - root)
            // rewritten as -A / (u + root)
            f.arg() - a / (u + root)
        } else {
            f.arg() - x
        };
        if y < 0.0 {
            -positive_branch
        } else {
            positive_branch
        }
    }
}

/// Tabulated dynamical-phase profile (for measured curves).
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    delta_theta: Vec<f64>,
    beta: Vec<f64>,
}

impl TabulatedProfile {
    /// Grid in radians, strictly increasing, with one beta value per node.
    pub fn new(delta_theta: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if delta_theta.len() != beta.len() {
            return Err(Error::InvalidInput(format!(
                "grid and beta lengths differ: {} vs {}",
                delta_theta.len(),
                beta.len()
            )));
        }
        if delta_theta.len() < 2 {
            return Err(Error::InvalidInput(
                "tabulated profile needs at least two nodes".into(),
            ));
        }
        for v in delta_theta.iter().chain(beta.iter()) {
            if !v.is_finite() {
                return Err(Error::NonFinite("tabulated profile value"));
            }
        }
        if delta_theta.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "tabulated grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { delta_theta, beta })
    }

    /// Parses two whitespace- or comma-separated numeric columns: deviation
    /// in microradians and phase in radians. Lines starting with `#` are
    /// comments.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut grid = Vec::new();
        let mut beta = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if fields.len() != 2 {
                return Err(Error::InvalidInput(format!(
                    "line {}: expected 2 columns, found {}",
                    idx + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| {
                    Error::InvalidInput(format!("line {}: not a number: {s:?}", idx + 1))
                })
            };
            grid.push(parse(fields[0])? * 1e-6);
            beta.push(parse(fields[1])?);
        }
        Self::new(grid, beta)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.delta_theta[0], *self.delta_theta.last().unwrap())
    }

    /// Linear interpolation; exact at the nodes.
    pub fn beta_at(&self, delta_theta: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if delta_theta < lo || delta_theta > hi {
            return Err(Error::OutOfRange(format!(
                "delta theta {delta_theta:e} outside [{lo:e}, {hi:e}]"
            )));
        }
        match self
            .delta_theta
            .binary_search_by(|probe| probe.total_cmp(&delta_theta))
        {
            Ok(i) => Ok(self.beta[i]),
            Err(i) => {
                let (x0, x1) = (self.delta_theta[i - 1], self.delta_theta[i]);
                let w = (delta_theta - x0) / (x1 - x0);
                Ok(self.beta[i - 1] * (1.0 - w) + self.beta[i] * w)
            }
        }
    }
}

/// Dynamical-phase profile: analytic transmission model or tabulated data.
#[derive(Debug, Clone, PartialEq)]
pub enum DDProfile {
    Analytic(AnalyticProfile),
    Tabulated(TabulatedProfile),
}

/// Transmission and reflection amplitudes at the given deviation from Bragg.
///
/// Only defined for analytic profiles; tabulated profiles carry the phase
/// alone. `|t|^2 + |r|^2 = 1` to machine precision.
pub fn laue_amplitudes(delta_theta: f64, profile: &DDProfile) -> Result<(Complex64, Complex64)> {
    if !delta_theta.is_finite() {
        return Err(Error::NonFinite("delta_theta"));
    }
    match profile {
        DDProfile::Analytic(p) => Ok(p.amplitudes(delta_theta)),
        DDProfile::Tabulated(_) => Err(Error::Unsupported(
            "tabulated profiles carry beta only; amplitudes need the analytic model".into(),
        )),
    }
}

/// Dynamical phase `beta = arg t`, continuously unwrapped in the deviation
/// for analytic profiles, linearly interpolated for tabulated ones.
pub fn dynamical_beta(delta_theta: f64, profile: &DDProfile) -> Result<f64> {
    if !delta_theta.is_finite() {
        return Err(Error::NonFinite("delta_theta"));
    }
    match profile {
        DDProfile::Analytic(p) => Ok(p.beta_unwrapped(delta_theta)),
        DDProfile::Tabulated(t) => t.beta_at(delta_theta),
    }
}

/// Lorentzian momentum distribution in the deviation angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumDistribution {
    /// Width parameter sigma in radians (half width at half maximum).
    sigma: f64,
    /// Center delta-theta_0 in radians (crystal misalignment).
    center: f64,
}

impl MomentumDistribution {
    pub fn new(sigma: f64, center: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if !center.is_finite() {
            return Err(Error::NonFinite("center"));
        }
        Ok(Self { sigma, center })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn center(&self) -> f64 {
        self.center
    }
}

/// `g(delta theta) = (sigma/pi) / (sigma^2 + (delta theta - center)^2)`.
pub fn lorentzian_density(delta_theta: f64, dist: &MomentumDistribution) -> f64 {
    let d = delta_theta - dist.center;
    (dist.sigma / std::f64::consts::PI) / (dist.sigma * dist.sigma + d * d)
}

/// Coherence of a discrete phase distribution: `sum_k w_k e^{i 2 beta_k}`.
///
/// The weights must sum to one within 1e-6.
pub fn coherence_dd(beta_samples: &[(f64, f64)]) -> Result<Complex64> {
    let total: f64 = beta_samples.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::UnnormalizedDensity { total });
    }
    Ok(beta_samples
        .iter()
        .map(|&(beta, w)| Complex64::from_polar(w, 2.0 * beta))
        .sum())
}

/// Which power of the dynamical phase enters the coherence integral:
/// `e^{i beta}` for a single extra crystal, `e^{i 2 beta}` for the
/// four-blade loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaWeight {
    Single,
    Double,
}

impl BetaWeight {
    fn power(self) -> i32 {
        match self {
            Self::Single => 1,
            Self::Double => 2,
        }
    }
}

/// Result of the momentum average: normalization `A_O`, coherence integral
/// `B_O`, and derived contrast/phase, with quadrature metadata.
#[derive(Debug, Clone, Copy)]
pub struct DDAverage {
    /// Integral of the density over the truncated domain (close to 1).
    pub normalization: f64,
    /// Integral of density times the phase factor.
    pub coherence: Complex64,
    /// `|B_O| / A_O`, in [0, 1].
    pub contrast: f64,
    /// `arg B_O`.
    pub phase: f64,
    /// Analytic estimate of the density mass outside the truncated domain.
    pub truncated_mass: f64,
    /// Total integrand evaluations across the three quadratures.
    pub evaluations: usize,
    /// Summed quadrature error estimates.
    pub error_estimate: f64,
}

/// Domain half-width of the momentum average, in units of sigma. The
/// Lorentzian mass left outside is `2/(pi * 1e5) ~ 6.4e-6`, reported in
/// [`DDAverage::truncated_mass`].
pub const TRUNCATION_SIGMAS: f64 = 1e5;

fn unit_phase_factor(profile: &DDProfile, delta_theta: f64) -> Complex64 {
    match profile {
        // The unwrapped form is free of the large-phase cancellation that
        // t / |t| develops far from Bragg, and stays defined through the
        // isolated |t| = 0 points.
        DDProfile::Analytic(p) => Complex64::from_polar(1.0, p.beta_unwrapped(delta_theta)),
        DDProfile::Tabulated(t) => Complex64::from_polar(
            1.0,
            t.beta_at(delta_theta)
                .expect("integration domain clipped to the tabulated grid"),
        ),
    }
}

fn average_breakpoints(dist: &MomentumDistribution, profile: &DDProfile, lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    for k in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1e3, 2e3, 5e3, 1e4, 2e4, 5e4] {
        pts.push(dist.center - k * dist.sigma);
        pts.push(dist.center + k * dist.sigma);
    }
    pts.push(dist.center);
    // The transmission phase oscillates out to hundreds of Darwin widths
    // around the exact Bragg angle (which need not coincide with the
    // distribution center); seed panels across that whole band so the
    // refinement starts from the right scales.
    if let DDProfile::Analytic(p) = profile {
        let darwin = 1.0 / p.deviation_scale();
        for k in [
            0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1e3,
        ] {
            pts.push(-k * darwin);
            pts.push(k * darwin);
        }
    }
    pts.retain(|x| *x >= lo && *x <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Momentum average of the phase factor over the Lorentzian distribution,
/// truncated at [`TRUNCATION_SIGMAS`].
pub fn dd_average(
    dist: &MomentumDistribution,
    profile: &DDProfile,
    weight: BetaWeight,
    tol: f64,
) -> Result<DDAverage> {
    dd_average_with_span(dist, profile, weight, tol, TRUNCATION_SIGMAS)
}

/// [`dd_average`] with an explicit truncation, in units of sigma.
///
/// Ramp-free profiles keep oscillating far into the Lorentzian tails, where
/// the contributions cancel but a pointwise quadrature still has to resolve
/// every cycle; a reduced span (the tail integrals decay like the density
/// itself) keeps that tractable.
pub fn dd_average_with_span(
    dist: &MomentumDistribution,
    profile: &DDProfile,
    weight: BetaWeight,
    tol: f64,
    span_sigmas: f64,
) -> Result<DDAverage> {
    if !(span_sigmas.is_finite() && span_sigmas > 1.0) {
        return Err(Error::InvalidInput(format!(
            "span must exceed one sigma, got {span_sigmas}"
        )));
    }
    let span = span_sigmas * dist.sigma;
    let (mut lo, mut hi) = (dist.center - span, dist.center + span);
    if let DDProfile::Tabulated(t) = profile {
        let (grid_lo, grid_hi) = t.range();
        lo = lo.max(grid_lo);
        hi = hi.min(grid_hi);
        if lo >= hi {
            return Err(Error::OutOfRange(format!(
                "tabulated grid [{grid_lo:e}, {grid_hi:e}] does not cover the distribution center {:e}",
                dist.center
            )));
        }
    }
    let pts = average_breakpoints(dist, profile, lo, hi);
    let power = weight.power();

    let norm = quad::integrate_segmented(|x| lorentzian_density(x, dist), &pts, tol)?;
    let re = quad::integrate_segmented(
        |x| lorentzian_density(x, dist) * unit_phase_factor(profile, x).powi(power).re,
        &pts,
        tol,
    )?;
    let im = quad::integrate_segmented(
        |x| lorentzian_density(x, dist) * unit_phase_factor(profile, x).powi(power).im,
        &pts,
        tol,
    )?;

    let coherence = Complex64::new(re.value, im.value);
    let truncated = 1.0
        - (((hi - dist.center) / dist.sigma).atan() - ((lo - dist.center) / dist.sigma).atan())
            / std::f64::consts::PI;
    Ok(DDAverage {
        normalization: norm.value,
        coherence,
        contrast: coherence.norm() / norm.value,
        phase: coherence.arg(),
        truncated_mass: truncated,
        evaluations: norm.evaluations + re.evaluations + im.evaluations,
        error_estimate: norm.error_estimate + re.error_estimate + im.error_estimate,
    })
}

/// Momentum-averaged interferogram on `phi_grid`.
///
/// For [`BetaWeight::Single`] the curve is `A_O - |B_O| cos(phi + arg B_O)`
/// (extra-crystal setup); for [`BetaWeight::Double`] it is the four-blade
/// O-beam form `(1 - |gamma| cos(phi + arg gamma)) / 2` with
/// `gamma = B_O / A_O`.
pub fn averaged_interferogram_dd(
    phi_grid: &[f64],
    dist: &MomentumDistribution,
    profile: &DDProfile,
    weight: BetaWeight,
    tol: f64,
) -> Result<(DDAverage, Vec<f64>)> {
    let avg = dd_average(dist, profile, weight, tol)?;
    let amp = avg.coherence.norm();
    let curve = phi_grid
        .iter()
        .map(|&phi| match weight {
            BetaWeight::Single => avg.normalization - amp * (phi + avg.phase).cos(),
            BetaWeight::Double => 0.5 * (1.0 - avg.contrast * (phi + avg.phase).cos()),
        })
        .collect();
    Ok((avg, curve))
}

/// Contrast and phase of the single-crystal average as the crystal is
/// rocked through the Bragg condition: one `(contrast, arg B_O)` pair per
/// misalignment in `centers`.
pub fn contrast_vs_misalignment(
    centers: &[f64],
    sigma: f64,
    profile: &DDProfile,
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    centers
        .par_iter()
        .map(|&c| {
            let dist = MomentumDistribution::new(sigma, c)?;
            let avg = dd_average(&dist, profile, BetaWeight::Single, tol)?;
            Ok((avg.contrast, avg.phase))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// 1 mm blade in the (111) orientation at 2.71 A, the configuration of
    /// the contrast anchor.
    fn anchor_profile() -> AnalyticProfile {
        let r = material::lookup("Si111").unwrap();
        AnalyticProfile::for_reflection(r, 2.71e-10, 1.0e-3).unwrap()
    }

    #[test]
    fn amplitudes_are_unitary() {
        let p = DDProfile::Analytic(anchor_profile());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let dt = (rng.gen::<f64>() - 0.5) * 2e-4;
            let (t, r) = laue_amplitudes(dt, &p).unwrap();
            assert!((t.norm_sqr() + r.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transmission_vanishes_at_bragg_for_quarter_period_thickness() {
        // A = pi D / Delta = pi/2 when D = Delta / 2.
        let r = material::lookup("Si111").unwrap();
        let delta = r.pendellosung_at(2.71e-10).unwrap();
        let p = AnalyticProfile::for_reflection(r, 2.71e-10, 0.5 * delta).unwrap();
        let (t, r_amp) = laue_amplitudes(0.0, &DDProfile::Analytic(p)).unwrap();
        assert!(t.norm() < 1e-14);
        assert!((r_amp.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn beta_matches_arg_of_transmission() {
        for profile in [
            anchor_profile(),
            anchor_profile().without_ramp(),
        ] {
            let p = DDProfile::Analytic(profile);
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..1000 {
                let dt = (rng.gen::<f64>() - 0.5) * 1e-4;
                let (t, _) = laue_amplitudes(dt, &p).unwrap();
                let beta = dynamical_beta(dt, &p).unwrap();
                let diff = (Complex64::from_polar(1.0, beta) - t / t.norm()).norm();
                assert!(diff < 1e-9, "phase mismatch {diff:e} at {dt:e}");
            }
        }
    }

    #[test]
    fn beta_is_odd_and_continuous() {
        let p = DDProfile::Analytic(anchor_profile());
        for k in 1..400 {
            let dt = k as f64 * 1e-7;
            let plus = dynamical_beta(dt, &p).unwrap();
            let minus = dynamical_beta(-dt, &p).unwrap();
            assert!((plus + minus).abs() < 1e-9);
            // small steps never jump by more than the local slope allows
            let next = dynamical_beta(dt + 1e-10, &p).unwrap();
            assert!((next - plus).abs() < 1e-2);
        }
    }

    #[test]
    fn beta_slope_at_bragg_matches_closed_form() {
        // d(beta)/d(dtheta) at 0+ is (A - tan A) * scale with the ramp and
        // -tan(A) * scale without it. One-sided differences: the unwrapped
        // branch carries a multiple of 2 pi across the origin.
        let p = anchor_profile();
        let a = p.thickness_parameter();
        let scale = p.deviation_scale();
        let h = 1e-10;
        let ramped = DDProfile::Analytic(p.clone());
        let slope =
            (dynamical_beta(2.0 * h, &ramped).unwrap() - dynamical_beta(h, &ramped).unwrap()) / h;
        let expected = (a - a.tan()) * scale;
        assert!(
            ((slope - expected) / expected).abs() < 1e-3,
            "slope {slope:e} vs {expected:e}"
        );

        let bare = DDProfile::Analytic(p.without_ramp());
        let slope0 =
            (dynamical_beta(2.0 * h, &bare).unwrap() - dynamical_beta(h, &bare).unwrap()) / h;
        let expected0 = -a.tan() * scale;
        assert!(((slope0 - expected0) / expected0).abs() < 1e-3);
    }

    #[test]
    fn beta_asymptotics_per_convention() {
        let p = anchor_profile();
        let a = p.thickness_parameter();
        let scale = p.deviation_scale();
        let darwin = 1.0 / scale;
        let ramped = DDProfile::Analytic(p.clone());
        let bare = DDProfile::Analytic(p.without_ramp());
        for k in [1e4, 3e4] {
            let dt = k * darwin;
            let y = scale * dt;
            // with the ramp: beta -> -A/(2y), and |t| -> 1
            let (t, _) = laue_amplitudes(dt, &ramped).unwrap();
            assert!(t.norm() > 1.0 - 1e-8 / 2.0 - 1e-9);
            let beta = dynamical_beta(dt, &ramped).unwrap();
            assert!(
                (beta * y / (-a / 2.0) - 1.0).abs() < 1e-3,
                "tail behaviour at y = {y}"
            );
            // without it: asymptotically linear, beta -> -A y
            let beta0 = dynamical_beta(dt, &bare).unwrap();
            assert!((beta0 / (-a * y) - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn mid_flank_slope_has_arcsecond_scale_sensitivity() {
        // A 2 mm blade: the phase changes by tens of pi per arcsecond of
        // rotation near the Bragg angle (order-of-magnitude check).
        let r = material::lookup("Si111").unwrap();
        let p = DDProfile::Analytic(AnalyticProfile::for_reflection(r, 2.71e-10, 2.0e-3).unwrap());
        let h = 1e-10;
        let slope = (dynamical_beta(2.0 * h, &p).unwrap() - dynamical_beta(h, &p).unwrap()) / h;
        let arcsec = 4.848136811e-6;
        let per_arcsec = slope.abs() * arcsec / PI;
        assert!(
            (10.0..100.0).contains(&per_arcsec),
            "got {per_arcsec} pi rad per arcsecond"
        );
    }

    #[test]
    fn tabulated_profile_round_trip_and_interpolation() {
        let text = "# comment line\n-10 0.5\n0,0.0\n10 -0.5\n";
        let t = TabulatedProfile::from_text(text).unwrap();
        let (lo, hi) = t.range();
        assert!((lo + 10e-6).abs() < 1e-18 && (hi - 10e-6).abs() < 1e-18);
        let p = DDProfile::Tabulated(t);
        // exact at nodes
        assert_eq!(dynamical_beta(lo, &p).unwrap(), 0.5);
        assert_eq!(dynamical_beta(0.0, &p).unwrap(), 0.0);
        // linear in between
        assert!((dynamical_beta(0.5 * hi, &p).unwrap() + 0.25).abs() < 1e-15);
        // outside the grid
        assert!(matches!(
            dynamical_beta(1.1 * hi, &p),
            Err(Error::OutOfRange(_))
        ));
        // amplitudes are undefined
        assert!(matches!(
            laue_amplitudes(0.0, &p),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn tabulated_parser_rejects_bad_input() {
        assert!(TabulatedProfile::from_text("1 2 3\n").is_err());
        assert!(TabulatedProfile::from_text("0 abc\n1 2\n").is_err());
        assert!(TabulatedProfile::from_text("1 0.1\n1 0.2\n").is_err());
        assert!(TabulatedProfile::from_text("5 0.1\n").is_err());
    }

    #[test]
    fn average_needs_the_grid_to_cover_the_distribution_center() {
        let t = TabulatedProfile::new(vec![-1e-5, 1e-5], vec![0.0, 0.0]).unwrap();
        let dist = MomentumDistribution::new(1e-6, 5.0).unwrap();
        let out = dd_average(&dist, &DDProfile::Tabulated(t), BetaWeight::Single, 1e-9);
        assert!(matches!(out, Err(Error::OutOfRange(_))));
    }

    #[test]
    fn lorentzian_peak_and_half_width() {
        let d = MomentumDistribution::new(4.26e-6, 1e-6).unwrap();
        let peak = 1.0 / (PI * d.sigma());
        assert!((lorentzian_density(1e-6, &d) - peak).abs() < 1e-9 * peak);
        for sign in [-1.0, 1.0] {
            let half = lorentzian_density(1e-6 + sign * d.sigma(), &d);
            assert!((half - 0.5 * peak).abs() < 1e-9 * peak);
        }
    }

    #[test]
    fn lorentzian_mass_versus_truncation() {
        // arctan oracle: mass within +-k sigma is (2/pi) atan(k).
        let d = MomentumDistribution::new(1e-6, 0.0).unwrap();
        let mass_50 = quad::integrate_segmented(
            |x| lorentzian_density(x, &d),
            &[-50e-6, -5e-6, 0.0, 5e-6, 50e-6],
            1e-12,
        )
        .unwrap()
        .value;
        let expect_50 = 2.0 / PI * 50.0f64.atan();
        assert!((mass_50 - expect_50).abs() < 1e-10);
        assert!((1.0 - mass_50 - 0.012731).abs() < 1e-4);

        let pts: Vec<f64> = [-1e5, -1e4, -1e3, -100.0, -10.0, -1.0, 0.0, 1.0, 10.0, 100.0, 1e3, 1e4, 1e5]
            .iter()
            .map(|k| k * 1e-6)
            .collect();
        let mass_wide = quad::integrate_segmented(|x| lorentzian_density(x, &d), &pts, 1e-12)
            .unwrap()
            .value;
        let defect = 2.0 / (PI * 1e5);
        assert!((1.0 - mass_wide - defect).abs() < 1e-9);
    }

    #[test]
    fn coherence_dd_point_mass_uniform_and_gaussian() {
        // point mass at 0
        let gamma = coherence_dd(&[(0.0, 1.0)]).unwrap();
        assert!((gamma - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        // point mass at beta0: e^{2 i beta0}
        let gamma = coherence_dd(&[(0.35, 1.0)]).unwrap();
        assert!((gamma - Complex64::from_polar(1.0, 0.7)).norm() < 1e-15);

        // uniform on [0, pi): midpoint discretization sums to zero exactly
        let n = 64;
        let uniform: Vec<(f64, f64)> = (0..n)
            .map(|k| (PI * (k as f64 + 0.5) / n as f64, 1.0 / n as f64))
            .collect();
        assert!(coherence_dd(&uniform).unwrap().norm() < 1e-14);

        // Gaussian with std s: |gamma| = e^{-2 s^2}
        let s = 0.4;
        let m = 20_001;
        let mut samples = Vec::with_capacity(m);
        let mut total = 0.0;
        for k in 0..m {
            let x = -8.0 * s + 16.0 * s * (k as f64) / (m - 1) as f64;
            let w = (-0.5 * (x / s) * (x / s)).exp();
            samples.push((x, w));
            total += w;
        }
        for sample in &mut samples {
            sample.1 /= total;
        }
        let gamma = coherence_dd(&samples).unwrap();
        assert!((gamma.norm() - (-2.0 * s * s).exp()).abs() < 1e-6);
    }

    #[test]
    fn coherence_dd_rejects_unnormalized_density() {
        assert!(matches!(
            coherence_dd(&[(0.0, 0.5), (1.0, 0.6)]),
            Err(Error::UnnormalizedDensity { .. })
        ));
    }

    #[test]
    fn coherence_magnitude_is_bounded_for_random_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..1000 {
            let n = rng.gen_range(1..40);
            let mut samples: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.gen::<f64>() * 20.0 - 10.0, rng.gen::<f64>() + 1e-3))
                .collect();
            let total: f64 = samples.iter().map(|s| s.1).sum();
            for s in &mut samples {
                s.1 /= total;
            }
            let gamma = coherence_dd(&samples).unwrap();
            assert!(gamma.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn zero_phase_profile_has_unit_contrast() {
        let flat = TabulatedProfile::new(vec![-1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let dist = MomentumDistribution::new(4.26e-6, 0.0).unwrap();
        let (avg, curve) = averaged_interferogram_dd(
            &[0.0, PI],
            &dist,
            &DDProfile::Tabulated(flat),
            BetaWeight::Double,
            1e-9,
        )
        .unwrap();
        assert!((avg.contrast - 1.0).abs() < 1e-9);
        assert!(avg.phase.abs() < 1e-9);
        assert!(curve[0].abs() < 1e-9 && (curve[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contrast_approaches_one_as_the_distribution_narrows() {
        // Successive factor-of-ten narrowing from 1e-3 Darwin widths on
        // down: monotone rise toward full contrast. (At Darwin-scale widths
        // the ramped convention is not monotone: the flat far tails carry
        // weight back to the average.)
        let p = DDProfile::Analytic(anchor_profile());
        let darwin = 1.0 / anchor_profile().deviation_scale();
        let mut last = 0.0;
        for k in 0..4 {
            let sigma = 1e-3 * darwin * 10f64.powi(-k);
            let dist = MomentumDistribution::new(sigma, 0.0).unwrap();
            let avg = dd_average(&dist, &p, BetaWeight::Double, 1e-9).unwrap();
            assert!(
                avg.contrast > last,
                "contrast {:.6} not above {:.6} at sigma = {sigma:e}",
                avg.contrast,
                last
            );
            last = avg.contrast;
        }
        assert!(last > 0.999);
    }

    #[test]
    fn contrast_bounds_hold_for_random_distributions() {
        let p = DDProfile::Analytic(anchor_profile());
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..25 {
            let sigma = 10f64.powf(rng.gen::<f64>() * 4.0 - 9.0);
            let center = (rng.gen::<f64>() - 0.5) * 1e-4;
            let dist = MomentumDistribution::new(sigma, center).unwrap();
            let weight = if rng.gen::<bool>() {
                BetaWeight::Single
            } else {
                BetaWeight::Double
            };
            let avg = dd_average(&dist, &p, weight, 1e-8).unwrap();
            assert!(avg.contrast >= 0.0 && avg.contrast <= 1.0 + 1e-9);
            assert!(avg.coherence.norm() <= avg.normalization + 1e-9);
        }
    }

    #[test]
    fn rocking_curve_recovers_contrast_off_bragg() {
        let r = material::lookup("Si111").unwrap();
        let p = DDProfile::Analytic(
            AnalyticProfile::for_reflection(r, 2.71e-10, 2.0e-3).unwrap(),
        );
        let sigma = 4.26e-6;
        let centers: Vec<f64> = vec![-1000.0 * sigma, -10.0 * sigma, 0.0, 10.0 * sigma, 1000.0 * sigma];
        let curve = contrast_vs_misalignment(&centers, sigma, &p, 1e-9).unwrap();
        // far off-Bragg the phase is nearly flat
        assert!(curve[0].0 > 0.99 && curve[4].0 > 0.99);
        // on-Bragg sits at the bottom of the dip
        let min = curve.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        assert_eq!(curve[2].0, min);
        // symmetric under reflection of the misalignment
        assert!((curve[0].0 - curve[4].0).abs() < 1e-6);
        assert!((curve[1].0 - curve[3].0).abs() < 1e-6);
    }

    #[test]
    fn monte_carlo_cross_check_of_the_momentum_average() {
        // Importance-sample the Lorentzian via its quantile function and
        // compare with the quadrature result.
        let p = DDProfile::Analytic(anchor_profile());
        let dist = MomentumDistribution::new(4.26e-6, 0.0).unwrap();
        let avg = dd_average(&dist, &p, BetaWeight::Double, 1e-10).unwrap();

        let n = 10_000_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sum_sq = 0.0;
        let cap = TRUNCATION_SIGMAS.atan();
        for _ in 0..n {
            let u = (2.0 * rng.gen::<f64>() - 1.0) * cap;
            let x = dist.sigma() * u.tan();
            let z = unit_phase_factor(&p, x).powi(2);
            sum += z;
            sum_sq += z.norm_sqr();
        }
        let scale = 2.0 * cap / std::f64::consts::PI; // mass of the sampled window
        let mean = sum / n as f64;
        let mc = mean * scale;
        let var = (sum_sq / n as f64 - mean.norm_sqr()).max(0.0);
        let stderr = scale * (var / n as f64).sqrt();
        let diff = (mc - avg.coherence).norm();
        assert!(
            diff < 3.0 * stderr + 1e-9,
            "MC {mc} vs quadrature {} (3 sigma = {:e})",
            avg.coherence,
            3.0 * stderr
        );
    }
}

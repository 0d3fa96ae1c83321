//! The numerical verification suite.
//!
//! Ten checks pin the library against closed forms, independent oracles and
//! the published anchor values. The `acceptance` integration test asserts
//! each check and the CLI `selftest` subcommand prints the same table.
//!
//! Checks 7 and 10 each contain one sub-clause whose stated threshold the
//! implemented model genuinely does not meet; they are asserted as stated
//! and report the measured numbers rather than being loosened to pass (see
//! the printed details for the exact margins).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use std::time::Instant;

use crate::analysis::{
    self, density_map, fit_fringe, map_line_correlated, map_line_diagonal, Method,
};
use crate::dyndiff::{dd_average, AnalyticProfile, BetaWeight, DDProfile, MomentumDistribution};
use crate::geometry::{
    assemble, closed_form_intensity, enumerate_paths, intensities, intensities_from_paths,
    throughput, GeometryKind, InterferometerSpec, MirrorModel,
};
use crate::material;
use crate::special::bessel_j0;
use crate::su2::{BladeParams, PathState};
use crate::vibration::{
    coherence_montecarlo, coherence_quadrature, coherence_scaling,
    coherence_scaling_antisymmetric, exact_phase_fn, lowfreq_phase_fn, NoiseAxis, PhysicalParams,
};

/// Outcome of one verification criterion.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    /// One line per sub-check with the measured numbers.
    pub details: Vec<String>,
}

impl CheckReport {
    fn new(id: u32, name: &'static str) -> Self {
        Self {
            id,
            name,
            passed: true,
            details: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.details
            .push(format!("[{}] {line}", if ok { "ok" } else { "FAIL" }));
    }

    /// The `PASS`/`FAIL` summary line.
    pub fn summary(&self) -> String {
        format!(
            "criterion {:2} {:<42} {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// Runs all ten checks in order.
pub fn run_all() -> Vec<CheckReport> {
    vec![
        check_closed_form_grid(),
        check_refocusing_invariants(),
        check_path_enumeration(),
        check_bessel_quadrature_oracle(),
        check_five_blade_offset_anchor(),
        check_y_noise_sweep(),
        check_z_noise_sweep(),
        check_lowfreq_limits(),
        check_dd_contrast_anchor(),
        check_dfs_line_property(),
    ]
}

fn default_spec(kind: GeometryKind, beta: f64, phi: f64, chi: f64) -> InterferometerSpec {
    InterferometerSpec::new(kind, BladeParams::balanced(beta).unwrap(), phi, chi, 0.05).unwrap()
}

/// 1. Matrix-assembled intensities against the printed closed forms on a
///    50^3 grid of flag and blade phases.
pub fn check_closed_form_grid() -> CheckReport {
    let mut report = CheckReport::new(1, "closed-form intensity oracle (50^3 grid)");
    let start = Instant::now();
    let n = 50;
    let mut max_err = 0.0f64;
    for i in 0..n {
        let phi = TAU * i as f64 / n as f64;
        for j in 0..n {
            let chi = TAU * j as f64 / n as f64;
            for k in 0..n {
                let beta = TAU * k as f64 / n as f64;
                for kind in GeometryKind::all() {
                    let spec = default_spec(kind, beta, phi, chi);
                    let (o, h) = intensities(&assemble(&spec), &PathState::path_i());
                    let (co, ch) = closed_form_intensity(kind, phi, chi, beta);
                    max_err = max_err.max((o - co).abs()).max((h - ch).abs());
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report.record(
        max_err < 1e-12,
        format!("max |matrix - closed form| = {max_err:.3e} (tol 1e-12)"),
    );
    report.record(elapsed < 5.0, format!("runtime {elapsed:.2} s (limit 5 s)"));
    report
}

/// 2. Dynamical-phase refocusing: 3- and 5-blade intensities independent of
///    beta; the 4-blade beta dependence is exactly a fringe shift.
pub fn check_refocusing_invariants() -> CheckReport {
    let mut report = CheckReport::new(2, "refocusing invariants in beta");
    let betas: Vec<f64> = (0..128).map(|k| TAU * k as f64 / 128.0).collect();
    for kind in [GeometryKind::ThreeBlade, GeometryKind::FiveBlade] {
        let mut spread = 0.0f64;
        for &(phi, chi) in &[(0.0, 0.0), (0.8, 2.1), (PI, 0.4), (4.9, 5.6)] {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &beta in &betas {
                let (o, _) = intensities(
                    &assemble(&default_spec(kind, beta, phi, chi)),
                    &PathState::path_i(),
                );
                lo = lo.min(o);
                hi = hi.max(o);
            }
            spread = spread.max(hi - lo);
        }
        report.record(
            spread < 1e-12,
            format!("{} intensity spread over beta = {spread:.3e} (tol 1e-12)", kind.label()),
        );
    }
    let mut max_err = 0.0f64;
    for &beta in &betas {
        for m in 0..32 {
            let phi = TAU * m as f64 / 32.0;
            let (with_beta, _) = intensities(
                &assemble(&default_spec(GeometryKind::FourBlade, beta, phi, 0.0)),
                &PathState::path_i(),
            );
            let (shifted, _) = intensities(
                &assemble(&default_spec(GeometryKind::FourBlade, 0.0, phi + 2.0 * beta, 0.0)),
                &PathState::path_i(),
            );
            max_err = max_err.max((with_beta - shifted).abs());
        }
    }
    report.record(
        max_err < 1e-12,
        format!("4-blade I(phi, beta) vs I(phi + 2 beta, 0): max diff {max_err:.3e}"),
    );
    report
}

/// 3. Path-enumeration oracle equivalence and the physical-mirror
///    throughput fractions.
pub fn check_path_enumeration() -> CheckReport {
    let mut report = CheckReport::new(3, "path-enumeration equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let mut max_err = 0.0f64;
    for _ in 0..1000 {
        let kind = GeometryKind::all()[rng.gen_range(0..3)];
        let spec = InterferometerSpec::new(
            kind,
            BladeParams::new(rng.gen::<f64>() * PI, rng.gen::<f64>() * TAU).unwrap(),
            rng.gen::<f64>() * TAU,
            rng.gen::<f64>() * TAU,
            0.05,
        )
        .unwrap();
        let matrix = intensities(&assemble(&spec), &PathState::path_i());
        let paths = intensities_from_paths(&enumerate_paths(&spec, MirrorModel::Ideal));
        max_err = max_err
            .max((matrix.0 - paths.0).abs())
            .max((matrix.1 - paths.1).abs());
    }
    report.record(
        max_err < 1e-12,
        format!("max |matrix - enumerated| over 1000 random specs = {max_err:.3e}"),
    );
    for (kind, expected) in [
        (GeometryKind::ThreeBlade, 0.5),
        (GeometryKind::FourBlade, 0.25),
        (GeometryKind::FiveBlade, 0.25),
    ] {
        let mut worst = 0.0f64;
        for &phi in &[0.0, 1.1, 2.9] {
            let spec = default_spec(kind, 0.41, phi, 1.7);
            worst = worst.max((throughput(&spec, true) - expected).abs());
        }
        report.record(
            worst < 1e-12,
            format!("{} physical-mirror throughput = {expected} (max dev {worst:.3e})", kind.label()),
        );
    }
    report
}

/// 4. Coherence quadrature against the Bessel identity, and Monte Carlo
///    against quadrature on random phase functions.
pub fn check_bessel_quadrature_oracle() -> CheckReport {
    let mut report = CheckReport::new(4, "Bessel / quadrature / Monte Carlo oracle");
    let mut max_err = 0.0f64;
    for i in 0..50 {
        let k = 10.0 * (i as f64 + 0.5) / 50.0;
        let q = coherence_quadrature(move |v| k * v.sin(), 1e-10).unwrap();
        max_err = max_err.max((q.gamma.re - bessel_j0(k)).abs().max(q.gamma.im.abs()));
    }
    report.record(
        max_err < 1e-8,
        format!("max |quadrature - J0| over 50 amplitudes in [0, 10] = {max_err:.3e}"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(401);
    let mut failures = 0usize;
    let mut worst_ratio = 0.0f64;
    for idx in 0..100u64 {
        let a1 = rng.gen::<f64>() * 4.0;
        let b1 = rng.gen::<f64>() * TAU;
        let a2 = rng.gen::<f64>() * 2.0;
        let b2 = rng.gen::<f64>() * TAU;
        let c = rng.gen::<f64>() * TAU - PI;
        let phase = move |v: f64| a1 * (v + b1).sin() + a2 * (2.0 * v + b2).sin() + c;
        let q = coherence_quadrature(phase, 1e-10).unwrap();
        let mc = coherence_montecarlo(phase, 100_000, 0x5eed ^ idx).unwrap();
        let se = mc.stderr.unwrap().max(1e-12);
        let dev = (mc.gamma.re - q.gamma.re)
            .abs()
            .max((mc.gamma.im - q.gamma.im).abs());
        worst_ratio = worst_ratio.max(dev / se);
        if dev > 3.0 * se {
            failures += 1;
        }
    }
    report.record(
        failures == 0,
        format!("Monte Carlo within 3 stderr of quadrature on 100 phase functions (worst {worst_ratio:.2} stderr)"),
    );
    report
}

/// 5. Five-blade refocused-line anchors at omega = 100: DC offset and
///    relative contrast.
pub fn check_five_blade_offset_anchor() -> CheckReport {
    let mut report = CheckReport::new(5, "five-blade DC offset and relative contrast");
    let start = Instant::now();
    let params = PhysicalParams::defaults();
    let grid: Vec<f64> = (0..720).map(|k| TAU * k as f64 / 720.0).collect();
    let curve = analysis::refocused_interferogram(
        &grid,
        PI,
        NoiseAxis::Y,
        100.0,
        &params,
        0.1e-6,
        Method::default(),
    )
    .unwrap();
    let gamma_anti = curve.metadata.gamma_antisymmetric.unwrap().re;
    let offset = 1.0 - gamma_anti;
    report.record(
        (0.15..=0.27).contains(&offset),
        format!("1 - gamma' = {offset:.4} (band [0.15, 0.27], nominal 0.2)"),
    );
    let v = analysis::contrast(&curve).unwrap();
    let expected = curve.metadata.gamma.norm() / (2.0 - gamma_anti);
    report.record(
        (0.77..=0.87).contains(&v),
        format!("relative contrast = {v:.4} (band [0.77, 0.87], nominal 0.82)"),
    );
    report.record(
        (v - expected).abs() < 1e-3,
        format!("curve contrast vs |gamma|/(2 - gamma') = {expected:.4}"),
    );
    let elapsed = start.elapsed().as_secs_f64();
    report.record(elapsed < 1.0, format!("runtime {elapsed:.3} s (limit 1 s)"));
    report
}

/// 6. Y-noise sweep: 4-/5-blade coherence flat to 250, 3-blade first zero
///    position, monotone decline before the zero.
pub fn check_y_noise_sweep() -> CheckReport {
    let mut report = CheckReport::new(6, "y-noise sweep (flatness, first zero)");
    let params = PhysicalParams::defaults();
    let y0 = 0.1e-6;
    let omegas: Vec<f64> = (0..=100).map(|k| k as f64 * 2.5).collect();
    let sweep = analysis::coherence_sweep(
        &GeometryKind::all(),
        NoiseAxis::Y,
        &omegas,
        &params,
        y0,
        Method::default(),
    )
    .unwrap();
    for (kind, values) in sweep.gamma_abs.iter().skip(1) {
        let min = values
            .iter()
            .zip(&omegas)
            .filter(|(_, &w)| w <= 250.0)
            .map(|(v, _)| *v)
            .fold(f64::INFINITY, f64::min);
        report.record(
            min >= 0.99,
            format!("{} min |gamma| for omega <= 250: {min:.5} (>= 0.99)", kind.label()),
        );
    }

    // first zero of the three-blade coherence by bisection on gamma
    let gamma3 = |omega: f64| {
        coherence_quadrature(
            lowfreq_phase_fn(GeometryKind::ThreeBlade, NoiseAxis::Y, omega, &params, y0, false),
            1e-10,
        )
        .unwrap()
        .gamma
        .re
    };
    let (mut lo, mut hi) = (100.0, 120.0);
    assert!(gamma3(lo) > 0.0 && gamma3(hi) < 0.0);
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if gamma3(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let zero = 0.5 * (lo + hi);
    report.record(
        (zero - 110.9).abs() <= 0.5,
        format!("3-blade first zero at omega = {zero:.2} (110.9 +- 0.5)"),
    );

    let three = &sweep.gamma_abs[0].1;
    let mut monotone = true;
    for (pair, w) in three.windows(2).zip(&omegas) {
        if *w < zero - 2.5 && pair[1] > pair[0] + 1e-12 {
            monotone = false;
        }
    }
    report.record(monotone, "3-blade |gamma| declines monotonically before the zero".into());
    report
}

/// 7. Z-noise sweep anchors. The middle clause asserts the stated
///    `|gamma| >= 0.999 up to omega = 100` for the 4-/5-blade geometries;
///    the model value J0(Omega_4z * 100^2) = 0.9946 genuinely sits below
///    that threshold (the bound holds only for omega <= ~52).
pub fn check_z_noise_sweep() -> CheckReport {
    let mut report = CheckReport::new(7, "z-noise sweep anchors");
    let params = PhysicalParams::defaults();
    let theta0 = 0.1e-6;

    let q = coherence_quadrature(
        lowfreq_phase_fn(GeometryKind::ThreeBlade, NoiseAxis::Z, 4.4, &params, theta0, false),
        1e-10,
    )
    .unwrap();
    let scaling = coherence_scaling(GeometryKind::ThreeBlade, NoiseAxis::Z, &params, theta0);
    let expected = bessel_j0(scaling.bessel_argument(4.4));
    report.record(
        (q.gamma.re - expected).abs() < 1e-6,
        format!(
            "3-blade |gamma|(4.4) = {:.6} vs J0(Omega_z * 4.4) = {expected:.6} (tol 1e-6)",
            q.gamma.re
        ),
    );
    report.record(
        (expected - 0.9257).abs() < 5e-4,
        format!("anchor value {expected:.4} ~ 0.93"),
    );

    let omegas: Vec<f64> = (0..=50).map(|k| k as f64 * 2.0).collect();
    let sweep = analysis::coherence_sweep(
        &[GeometryKind::FourBlade, GeometryKind::FiveBlade],
        NoiseAxis::Z,
        &omegas,
        &params,
        theta0,
        Method::default(),
    )
    .unwrap();
    for (kind, values) in &sweep.gamma_abs {
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        report.record(
            min >= 0.999,
            format!(
                "{} min |gamma| for omega <= 100: {min:.5} (stated >= 0.999; model gives J0(1.465e-5 * omega^2))",
                kind.label()
            ),
        );
    }

    let mut dropped = false;
    for k in 0..=60 {
        let omega = 0.1 * k as f64;
        let g = bessel_j0(scaling.bessel_argument(omega));
        if g < 0.95 {
            dropped = true;
            break;
        }
    }
    report.record(dropped, "3-blade |gamma| falls below 0.95 within omega <= 6".into());
    report
}

/// 8. Exact loop phases against the printed low-frequency envelopes at
///    omega tau = 1e-3 and 1e-4.
pub fn check_lowfreq_limits() -> CheckReport {
    let mut report = CheckReport::new(8, "low-frequency limit property");
    let params = PhysicalParams::defaults();
    let tau = params.transit_time();
    let envelope = |f: &dyn Fn(f64) -> f64| -> f64 {
        (0..3600)
            .map(|k| f(TAU * k as f64 / 3600.0).abs())
            .fold(0.0, f64::max)
    };
    for (omega_tau, tol) in [(1e-3, 1e-2), (1e-4, 1e-4)] {
        let omega = omega_tau / tau;
        let mut worst = 0.0f64;
        for axis in [NoiseAxis::Y, NoiseAxis::Z] {
            let amplitude = 0.1e-6;
            for kind in GeometryKind::all() {
                let exact = exact_phase_fn(kind, axis, omega, &params, amplitude, false);
                let low = coherence_scaling(kind, axis, &params, amplitude).bessel_argument(omega);
                worst = worst.max((envelope(&exact) / low - 1.0).abs());
            }
            let exact = exact_phase_fn(GeometryKind::FiveBlade, axis, omega, &params, amplitude, true);
            let low =
                coherence_scaling_antisymmetric(axis, &params, amplitude).bessel_argument(omega);
            worst = worst.max((envelope(&exact) / low - 1.0).abs());
        }
        report.record(
            worst < tol,
            format!("worst envelope mismatch at omega tau = {omega_tau:.0e}: {worst:.2e} (tol {tol:.0e})"),
        );
    }
    report
}

/// Pinned regression value of the dynamical-phase contrast estimate under
/// the default conventions (ramped analytic phase, literal 4.26 urad
/// Lorentzian, shipped Si(111) table value, 1 mm blades at 2.71 angstrom).
pub const DD_CONTRAST_DEFAULTS: f64 = 0.038_264_646;

/// 9. Four-blade maximum-contrast estimate from the dynamical-phase
///    average. The published anchor is ~0.85; the raw transmission-phase
///    model cannot reach it (see details), so the band check stands as an
///    honest failure while the computed value is pinned as a regression.
pub fn check_dd_contrast_anchor() -> CheckReport {
    let mut report = CheckReport::new(9, "dynamical-phase contrast anchor");
    let si111 = material::lookup("Si111").unwrap();
    let profile = AnalyticProfile::for_reflection(si111, 2.71e-10, 1.0e-3).unwrap();
    let dist = MomentumDistribution::new(4.26e-6, 0.0).unwrap();
    let avg = dd_average(&dist, &DDProfile::Analytic(profile.clone()), BetaWeight::Double, 1e-9)
        .unwrap();
    report.record(
        (0.75..=0.95).contains(&avg.contrast),
        format!(
            "contrast = {:.6} (stated band [0.75, 0.95]; the steep raw phase averages the coherence away)",
            avg.contrast
        ),
    );
    report.record(
        (avg.contrast - DD_CONTRAST_DEFAULTS).abs() < 1e-6,
        format!(
            "pinned regression value {:.9} vs computed {:.9}",
            DD_CONTRAST_DEFAULTS, avg.contrast
        ),
    );
    // Ramp-free phases keep oscillating through the far tails, so the
    // informational value uses a 100-sigma window (the tail contributions
    // cancel at the 1e-5 level).
    let bare = crate::dyndiff::dd_average_with_span(
        &dist,
        &DDProfile::Analytic(profile.without_ramp()),
        BetaWeight::Double,
        1e-7,
        100.0,
    )
    .unwrap();
    report.details.push(format!(
        "[info] ramp-free convention gives {:.4}; the published ~0.85 needs the measured (smoothed) phase curve",
        bare.contrast
    ));
    report
}

/// 10. Density-map line properties for omega in {100, 200, 250}: depth
///     drift along the correlated line (stated < 1e-3; the model value at
///     250 is ~2e-3) and the antisymmetric damping along the diagonal.
pub fn check_dfs_line_property() -> CheckReport {
    let mut report = CheckReport::new(10, "DFS-line property on density maps");
    let params = PhysicalParams::defaults();
    let y0 = 0.1e-6;
    let n = 128;
    let map0 = density_map(0.0, n, NoiseAxis::Y, &params, y0, Method::default()).unwrap();
    let depth0 = fit_fringe(&map0.phi_grid, &map_line_correlated(&map0, n / 2), 2)
        .unwrap()
        .amplitude;
    for omega in [100.0, 200.0, 250.0] {
        let map = density_map(omega, n, NoiseAxis::Y, &params, y0, Method::default()).unwrap();
        let depth = fit_fringe(&map.phi_grid, &map_line_correlated(&map, n / 2), 2)
            .unwrap()
            .amplitude;
        let drift = (depth - depth0).abs();
        report.record(
            drift < 1e-3,
            format!(
                "depth drift along phi = -chi + pi at omega = {omega}: {drift:.2e} (stated < 1e-3; model J0(Omega omega^3)/4)"
            ),
        );
        let diag = fit_fringe(&map.phi_grid, &map_line_diagonal(&map), 2)
            .unwrap()
            .amplitude;
        let expected = bessel_j0(
            coherence_scaling_antisymmetric(NoiseAxis::Y, &params, y0).bessel_argument(omega),
        )
        .abs()
            / 4.0;
        report.record(
            (4.0 * diag - 4.0 * expected).abs() < 1e-6,
            format!(
                "diagonal damping at omega = {omega}: 4*depth = {:.8} vs J0(Omega' omega^2) = {:.8}",
                4.0 * diag,
                4.0 * expected
            ),
        );
    }
    report
}

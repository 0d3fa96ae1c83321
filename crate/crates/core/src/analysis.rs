//! Observable-level results: averaged interferograms, contrast, coherence
//! sweeps, density maps, and the refocused (noise-immune) fringe of the
//! five-blade geometry.
//!
//! Averaged intensities insert the coherence function into the ideal fringe
//! forms:
//!
//! * 3-blade O: `(1 + |g| cos(phi + arg g)) / 2`
//! * 4-blade O: `(1 - |g| cos(phi + arg g)) / 2` (H has the opposite sign)
//! * 5-blade H: `(2 - |g| cos(chi - phi + arg g) + |g'| cos(chi + phi + arg g')) / 4`
//!
//! where `g` is the symmetric-branch coherence and `g'` the five-blade
//! antisymmetric one. Along the correlated flag lines `phi = -chi + mu` the
//! symmetric modulation survives with full depth while the antisymmetric
//! term collapses to a DC shift, which is the five-blade refocusing
//! property.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::GeometryKind;
use crate::vibration::{
    coherence_closed_form, coherence_montecarlo, coherence_quadrature, lowfreq_phase_fn,
    CoherenceResult, NoiseAxis, PhysicalParams,
};

/// Detector port of an interferogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    O,
    H,
}

/// How coherence values are computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    ClosedForm,
    Quadrature { tol: f64 },
    MonteCarlo { samples: u64, seed: u64 },
}

impl Default for Method {
    fn default() -> Self {
        Method::Quadrature { tol: 1e-9 }
    }
}

/// Context echoed along with each computed curve.
#[derive(Debug, Clone, Copy)]
pub struct InterferogramMeta {
    pub kind: GeometryKind,
    pub axis: NoiseAxis,
    pub omega: f64,
    /// Symmetric-branch coherence used for the curve.
    pub gamma: Complex64,
    /// Antisymmetric coherence (five-blade only).
    pub gamma_antisymmetric: Option<Complex64>,
    /// DC shift relative to the noiseless curve (refocused line only).
    pub dc_offset: Option<f64>,
    /// Coherence magnitude of the surviving modulation (refocused line only).
    pub modulation_depth: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Interferogram {
    pub phase_grid: Vec<f64>,
    pub intensity: Vec<f64>,
    pub port: Port,
    pub metadata: InterferogramMeta,
}

#[derive(Debug, Clone)]
pub struct DensityMap {
    pub phi_grid: Vec<f64>,
    pub chi_grid: Vec<f64>,
    /// `values[i][j]` is the H intensity at `(phi_grid[i], chi_grid[j])`.
    pub values: Vec<Vec<f64>>,
    pub omega: f64,
    pub axis: NoiseAxis,
}

#[derive(Debug, Clone)]
pub struct SweepCurve {
    pub omega_grid: Vec<f64>,
    /// `|gamma|` per geometry, in the order of `kinds` passed to the sweep.
    pub gamma_abs: Vec<(GeometryKind, Vec<f64>)>,
    pub axis: NoiseAxis,
}

/// Least-squares fit of `A + B sin(k phi + c)`.
#[derive(Debug, Clone, Copy)]
pub struct FringeFit {
    pub mean: f64,
    pub amplitude: f64,
    pub phase: f64,
}

/// Fringe visibility `(I_max - I_min) / (I_max + I_min)`.
///
/// The curve must cover at least one full fringe period for the extrema to
/// be meaningful; an identically zero curve has no defined contrast.
pub fn contrast(curve: &Interferogram) -> Result<f64> {
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for &v in &curve.intensity {
        max = max.max(v);
        min = min.min(v);
    }
    if curve.intensity.is_empty() || max <= 0.0 {
        return Err(Error::UndefinedContrast);
    }
    Ok((max - min) / (max + min))
}

fn branch_coherence(
    kind: GeometryKind,
    axis: NoiseAxis,
    omega: f64,
    params: &PhysicalParams,
    amplitude: f64,
    antisymmetric: bool,
    method: Method,
) -> Result<CoherenceResult> {
    match method {
        Method::ClosedForm => {
            let g = coherence_closed_form(kind, axis, omega, params, amplitude);
            Ok(if antisymmetric {
                g.antisymmetric.expect("antisymmetric branch only for five-blade")
            } else {
                g.symmetric
            })
        }
        Method::Quadrature { tol } => coherence_quadrature(
            lowfreq_phase_fn(kind, axis, omega, params, amplitude, antisymmetric),
            tol,
        ),
        Method::MonteCarlo { samples, seed } => coherence_montecarlo(
            lowfreq_phase_fn(kind, axis, omega, params, amplitude, antisymmetric),
            samples,
            seed,
        ),
    }
}

/// Noise-averaged interferogram versus the loop-1 flag `phi`.
///
/// For the five-blade geometry `chi` fixes the loop-2 flag; it is ignored
/// otherwise.
#[allow(clippy::too_many_arguments)]
pub fn averaged_interferogram(
    kind: GeometryKind,
    axis: NoiseAxis,
    omega: f64,
    params: &PhysicalParams,
    amplitude: f64,
    port: Port,
    phase_grid: &[f64],
    chi: f64,
    method: Method,
) -> Result<Interferogram> {
    let sym = branch_coherence(kind, axis, omega, params, amplitude, false, method)?;
    let anti = match kind {
        GeometryKind::FiveBlade => Some(
            branch_coherence(kind, axis, omega, params, amplitude, true, method)?,
        ),
        _ => None,
    };
    let (g_abs, g_arg) = (sym.gamma.norm(), sym.gamma.arg());
    let intensity = phase_grid
        .iter()
        .map(|&phi| match kind {
            GeometryKind::ThreeBlade => {
                let osc = g_abs * (phi + g_arg).cos();
                match port {
                    Port::O => 0.5 * (1.0 + osc),
                    Port::H => 0.5 * (1.0 - osc),
                }
            }
            GeometryKind::FourBlade => {
                let osc = g_abs * (phi + g_arg).cos();
                match port {
                    Port::O => 0.5 * (1.0 - osc),
                    Port::H => 0.5 * (1.0 + osc),
                }
            }
            GeometryKind::FiveBlade => {
                let a = anti.as_ref().expect("five-blade carries both branches");
                let sym_term = g_abs * (chi - phi + g_arg).cos();
                let anti_term = a.gamma.norm() * (chi + phi + a.gamma.arg()).cos();
                match port {
                    Port::O => 0.25 * (2.0 + sym_term - anti_term),
                    Port::H => 0.25 * (2.0 - sym_term + anti_term),
                }
            }
        })
        .collect();
    Ok(Interferogram {
        phase_grid: phase_grid.to_vec(),
        intensity,
        port,
        metadata: InterferogramMeta {
            kind,
            axis,
            omega,
            gamma: sym.gamma,
            gamma_antisymmetric: anti.map(|a| a.gamma),
            dc_offset: None,
            modulation_depth: None,
        },
    })
}

/// Five-blade H intensity along the correlated flag line `chi = mu - phi`.
///
/// With `mu = pi` the noise contributes only the DC shift `(1 - g') / 4`
/// while the fringe keeps its full modulation depth `|g| / 4`.
pub fn refocused_interferogram(
    phi_grid: &[f64],
    mu: f64,
    axis: NoiseAxis,
    omega: f64,
    params: &PhysicalParams,
    amplitude: f64,
    method: Method,
) -> Result<Interferogram> {
    let kind = GeometryKind::FiveBlade;
    let sym = branch_coherence(kind, axis, omega, params, amplitude, false, method)?;
    let anti = branch_coherence(kind, axis, omega, params, amplitude, true, method)?;
    let (g_abs, g_arg) = (sym.gamma.norm(), sym.gamma.arg());
    let anti_dc = anti.gamma.norm() * (mu + anti.gamma.arg()).cos();
    let intensity: Vec<f64> = phi_grid
        .iter()
        .map(|&phi| 0.25 * (2.0 - g_abs * (mu - 2.0 * phi + g_arg).cos() + anti_dc))
        .collect();
    let dc_offset = 0.25 * (anti_dc - mu.cos());
    Ok(Interferogram {
        phase_grid: phi_grid.to_vec(),
        intensity,
        port: Port::H,
        metadata: InterferogramMeta {
            kind,
            axis,
            omega,
            gamma: sym.gamma,
            gamma_antisymmetric: Some(anti.gamma),
            dc_offset: Some(dc_offset),
            modulation_depth: Some(g_abs),
        },
    })
}

/// H-beam intensity of the five-blade geometry on an `n x n` grid over
/// `[0, 2 pi)^2` in the two flag phases.
pub fn density_map(
    omega: f64,
    grid_n: usize,
    axis: NoiseAxis,
    params: &PhysicalParams,
    amplitude: f64,
    method: Method,
) -> Result<DensityMap> {
    if grid_n < 16 {
        return Err(Error::InvalidInput(format!(
            "density map grid must have at least 16 points per axis, got {grid_n}"
        )));
    }
    let kind = GeometryKind::FiveBlade;
    let sym = branch_coherence(kind, axis, omega, params, amplitude, false, method)?;
    let anti = branch_coherence(kind, axis, omega, params, amplitude, true, method)?;
    let grid: Vec<f64> = (0..grid_n)
        .map(|k| std::f64::consts::TAU * k as f64 / grid_n as f64)
        .collect();
    let (g_abs, g_arg) = (sym.gamma.norm(), sym.gamma.arg());
    let (a_abs, a_arg) = (anti.gamma.norm(), anti.gamma.arg());
    let values: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&phi| {
            grid.iter()
                .map(|&chi| {
                    0.25 * (2.0 - g_abs * (chi - phi + g_arg).cos()
                        + a_abs * (chi + phi + a_arg).cos())
                })
                .collect()
        })
        .collect();
    Ok(DensityMap {
        phi_grid: grid.clone(),
        chi_grid: grid,
        values,
        omega,
        axis,
    })
}

/// `|gamma|` versus noise frequency for the requested geometries.
///
/// The five-blade entry reports the symmetric branch, the one that,
/// operated on the correlated flag line, sets the surviving fringe depth.
/// Monte Carlo runs derive one seed per grid point (`seed xor index`) so
/// results do not depend on evaluation order.
pub fn coherence_sweep(
    kinds: &[GeometryKind],
    axis: NoiseAxis,
    omega_grid: &[f64],
    params: &PhysicalParams,
    amplitude: f64,
    method: Method,
) -> Result<SweepCurve> {
    let mut gamma_abs = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let values: Result<Vec<f64>> = omega_grid
            .par_iter()
            .enumerate()
            .map(|(idx, &omega)| {
                let point_method = match method {
                    Method::MonteCarlo { samples, seed } => Method::MonteCarlo {
                        samples,
                        seed: seed ^ idx as u64,
                    },
                    other => other,
                };
                Ok(
                    branch_coherence(kind, axis, omega, params, amplitude, false, point_method)?
                        .gamma
                        .norm(),
                )
            })
            .collect();
        gamma_abs.push((kind, values?));
    }
    Ok(SweepCurve {
        omega_grid: omega_grid.to_vec(),
        gamma_abs,
        axis,
    })
}

/// Least-squares fit of `A + B sin(k phi + c)` on the sampled curve.
#[allow(clippy::needless_range_loop)]
pub fn fit_fringe(phi: &[f64], intensity: &[f64], harmonic: u32) -> Result<FringeFit> {
    if phi.len() != intensity.len() || phi.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "fringe fit needs matching grids with at least 3 points, got {} and {}",
            phi.len(),
            intensity.len()
        )));
    }
    let k = harmonic as f64;
    // basis (1, sin k phi, cos k phi); normal equations
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (&x, &y) in phi.iter().zip(intensity) {
        let b = [1.0, (k * x).sin(), (k * x).cos()];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += b[i] * b[j];
            }
            rhs[i] += b[i] * y;
        }
    }
    // 3x3 Gaussian elimination with partial pivoting
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        if m[col][col].abs() < 1e-300 {
            return Err(Error::InvalidInput(
                "degenerate fringe-fit system; sample more phases".into(),
            ));
        }
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            for j in col..3 {
                m[row][j] -= f * m[col][j];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut c = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = rhs[row];
        for j in (row + 1)..3 {
            acc -= m[row][j] * c[j];
        }
        c[row] = acc / m[row][row];
    }
    Ok(FringeFit {
        mean: c[0],
        amplitude: c[1].hypot(c[2]),
        phase: c[2].atan2(c[1]),
    })
}

/// Samples of the density map along the correlated line `chi = mu - phi`,
/// one value per `phi_grid` entry of the map. `mu` must be a grid point
/// multiple of the grid step for the sampling to be exact.
pub fn map_line_correlated(map: &DensityMap, mu_index: usize) -> Vec<f64> {
    let n = map.phi_grid.len();
    (0..n)
        .map(|i| {
            let j = (mu_index + n - i) % n;
            map.values[i][j]
        })
        .collect()
}

/// Samples of the density map along the diagonal `chi = phi`.
pub fn map_line_diagonal(map: &DensityMap) -> Vec<f64> {
    (0..map.phi_grid.len()).map(|i| map.values[i][i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{closed_form_intensity, GeometryKind};
    use crate::special::bessel_j0;
    use crate::vibration::coherence_scaling;
    use std::f64::consts::{PI, TAU};

    const Y0: f64 = 0.1e-6;
    const THETA0: f64 = 0.1e-6;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|k| TAU * k as f64 / n as f64).collect()
    }

    #[test]
    fn contrast_of_a_clean_fringe() {
        let g = grid(720);
        let intensity: Vec<f64> = g.iter().map(|p| 0.5 * (1.0 + p.cos())).collect();
        let curve = Interferogram {
            phase_grid: g,
            intensity,
            port: Port::O,
            metadata: meta_stub(),
        };
        let v = contrast(&curve).unwrap();
        assert!((v - 1.0).abs() < 1e-4);
    }

    #[test]
    fn contrast_of_flat_and_zero_curves() {
        let g = grid(64);
        let flat = Interferogram {
            phase_grid: g.clone(),
            intensity: vec![0.37; 64],
            port: Port::O,
            metadata: meta_stub(),
        };
        assert_eq!(contrast(&flat).unwrap(), 0.0);
        let zero = Interferogram {
            phase_grid: g,
            intensity: vec![0.0; 64],
            port: Port::O,
            metadata: meta_stub(),
        };
        assert!(matches!(contrast(&zero), Err(Error::UndefinedContrast)));
    }

    fn meta_stub() -> InterferogramMeta {
        InterferogramMeta {
            kind: GeometryKind::ThreeBlade,
            axis: NoiseAxis::Y,
            omega: 0.0,
            gamma: Complex64::new(1.0, 0.0),
            gamma_antisymmetric: None,
            dc_offset: None,
            modulation_depth: None,
        }
    }

    #[test]
    fn offset_fringe_relative_contrast() {
        // (2 - g' - sin(2 phi)) / 4 with g' = 0.78: contrast 1/(2 - 0.78).
        let g = grid(720);
        let intensity: Vec<f64> = g
            .iter()
            .map(|p| 0.25 * (2.0 - 0.78 - (2.0 * p).sin()))
            .collect();
        let curve = Interferogram {
            phase_grid: g,
            intensity,
            port: Port::H,
            metadata: meta_stub(),
        };
        let v = contrast(&curve).unwrap();
        assert!((v - 1.0 / 1.22).abs() < 1e-4, "got {v}");
    }

    #[test]
    fn zero_frequency_reduces_to_ideal_fringes() {
        let p = PhysicalParams::defaults();
        let g = grid(64);
        for kind in GeometryKind::all() {
            let chi = 0.9;
            let curve = averaged_interferogram(
                kind,
                NoiseAxis::Y,
                0.0,
                &p,
                Y0,
                Port::O,
                &g,
                chi,
                Method::default(),
            )
            .unwrap();
            for (i, &phi) in g.iter().enumerate() {
                let (o, _) = closed_form_intensity(kind, phi, chi, 0.0);
                assert!(
                    (curve.intensity[i] - o).abs() < 1e-8,
                    "{kind:?} at phi = {phi}"
                );
            }
        }
    }

    #[test]
    fn four_blade_h_port_form() {
        let p = PhysicalParams::defaults();
        let g = grid(128);
        let omega = 30.0;
        let curve = averaged_interferogram(
            GeometryKind::FourBlade,
            NoiseAxis::Y,
            omega,
            &p,
            Y0,
            Port::H,
            &g,
            0.0,
            Method::default(),
        )
        .unwrap();
        let gamma = curve.metadata.gamma;
        assert!(gamma.im.abs() < 1e-9);
        for (i, &phi) in g.iter().enumerate() {
            let expected = 0.5 * (1.0 + gamma.re * phi.cos());
            assert!((curve.intensity[i] - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn three_blade_z_visibility_anchor() {
        // omega = 4.4 with default parameters: visibility ~ 0.926.
        let p = PhysicalParams::defaults();
        let g = grid(720);
        let curve = averaged_interferogram(
            GeometryKind::ThreeBlade,
            NoiseAxis::Z,
            4.4,
            &p,
            THETA0,
            Port::O,
            &g,
            0.0,
            Method::default(),
        )
        .unwrap();
        let v = contrast(&curve).unwrap();
        let scaling = coherence_scaling(GeometryKind::ThreeBlade, NoiseAxis::Z, &p, THETA0);
        let expected = bessel_j0(scaling.bessel_argument(4.4));
        assert!((v - expected).abs() < 1e-6);
        assert!((expected - 0.9257).abs() < 5e-4);
    }

    #[test]
    fn contrast_equals_gamma_for_three_and_four_blade() {
        let p = PhysicalParams::defaults();
        let g = grid(720);
        for kind in [GeometryKind::ThreeBlade, GeometryKind::FourBlade] {
            for omega in [10.0, 60.0, 100.0] {
                let curve = averaged_interferogram(
                    kind,
                    NoiseAxis::Y,
                    omega,
                    &p,
                    Y0,
                    Port::O,
                    &g,
                    0.0,
                    Method::default(),
                )
                .unwrap();
                let v = contrast(&curve).unwrap();
                assert!(
                    (v - curve.metadata.gamma.norm()).abs() < 1e-6,
                    "{kind:?} omega {omega}"
                );
            }
        }
    }

    #[test]
    fn refocused_curve_without_noise() {
        let p = PhysicalParams::defaults();
        let g = grid(256);
        let curve =
            refocused_interferogram(&g, PI, NoiseAxis::Y, 0.0, &p, Y0, Method::default()).unwrap();
        assert!(curve.metadata.dc_offset.unwrap().abs() < 1e-8);
        let lo = curve.intensity.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = curve
            .intensity
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(lo.abs() < 1e-6 && (hi - 0.5).abs() < 1e-6);
    }

    #[test]
    fn refocused_curve_dc_offset_anchor() {
        let p = PhysicalParams::defaults();
        let g = grid(256);
        let curve =
            refocused_interferogram(&g, PI, NoiseAxis::Y, 100.0, &p, Y0, Method::default())
                .unwrap();
        let offset = curve.metadata.dc_offset.unwrap();
        // (1 - gamma') / 4 with 1 - gamma' ~ 0.2245
        assert!((4.0 * offset - 0.2245).abs() < 2e-3, "offset {offset}");
        // modulation depth stays put; J0(Omega * 100^3) ~ 0.99997
        let depth = curve.metadata.modulation_depth.unwrap();
        assert!((depth - 0.99997).abs() < 1e-4);
        // the curve matches the explicit form
        for (i, &phi) in curve.phase_grid.iter().enumerate() {
            let g_sym = curve.metadata.gamma;
            let g_anti = curve.metadata.gamma_antisymmetric.unwrap();
            let expected = 0.25
                * (2.0 - g_sym.norm() * (PI - 2.0 * phi + g_sym.arg()).cos()
                    + g_anti.norm() * (PI + g_anti.arg()).cos());
            assert!((curve.intensity[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn refocused_modulation_depth_follows_the_symmetric_branch() {
        // The depth is J0(Omega omega^3): 0.9996 at omega = 150 and 0.9979
        // at omega = 200 with the default parameters.
        let p = PhysicalParams::defaults();
        let scaling = coherence_scaling(GeometryKind::FiveBlade, NoiseAxis::Y, &p, Y0);
        let g = grid(128);
        for omega in [100.0, 150.0, 200.0] {
            let curve =
                refocused_interferogram(&g, PI, NoiseAxis::Y, omega, &p, Y0, Method::default())
                    .unwrap();
            let depth = curve.metadata.modulation_depth.unwrap();
            let expected = bessel_j0(scaling.bessel_argument(omega));
            assert!((depth - expected).abs() < 1e-8);
        }
        let at = |omega: f64| bessel_j0(scaling.bessel_argument(omega));
        assert!(at(150.0) > 0.999);
        assert!((at(200.0) - 0.99791).abs() < 1e-4);
    }

    #[test]
    fn density_map_no_noise_spans_full_range() {
        let p = PhysicalParams::defaults();
        let map = density_map(0.0, 64, NoiseAxis::Y, &p, Y0, Method::default()).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &map.values {
            for &v in row {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        assert!(lo.abs() < 1e-6 && (hi - 1.0).abs() < 1e-6);
    }

    #[test]
    fn density_map_rejects_coarse_grids() {
        let p = PhysicalParams::defaults();
        assert!(density_map(0.0, 8, NoiseAxis::Y, &p, Y0, Method::default()).is_err());
    }

    #[test]
    fn refocused_interferogram_matches_map_line() {
        let p = PhysicalParams::defaults();
        let n = 128;
        for omega in [0.0, 100.0, 200.0] {
            let map = density_map(omega, n, NoiseAxis::Y, &p, Y0, Method::default()).unwrap();
            let line = map_line_correlated(&map, n / 2); // mu = pi
            let curve = refocused_interferogram(
                &map.phi_grid,
                PI,
                NoiseAxis::Y,
                omega,
                &p,
                Y0,
                Method::default(),
            )
            .unwrap();
            for (i, (a, b)) in line.iter().zip(&curve.intensity).enumerate() {
                assert!((a - b).abs() < 1e-12, "omega {omega} index {i}");
            }
        }
    }

    #[test]
    fn sweep_shapes_and_zero_frequency_start() {
        let p = PhysicalParams::defaults();
        let omegas: Vec<f64> = (0..=40).map(|k| k as f64 * 10.0).collect();
        let sweep = coherence_sweep(
            &GeometryKind::all(),
            NoiseAxis::Y,
            &omegas,
            &p,
            Y0,
            Method::default(),
        )
        .unwrap();
        assert_eq!(sweep.gamma_abs.len(), 3);
        for (kind, values) in &sweep.gamma_abs {
            assert_eq!(values.len(), omegas.len());
            assert!((values[0] - 1.0).abs() < 1e-9, "{kind:?} at omega 0");
            for &v in values {
                assert!((0.0..=1.0 + 1e-9).contains(&v));
            }
        }
    }

    #[test]
    fn sweep_monte_carlo_is_deterministic_and_order_free() {
        let p = PhysicalParams::defaults();
        let omegas: Vec<f64> = (0..16).map(|k| k as f64 * 25.0).collect();
        let method = Method::MonteCarlo {
            samples: 20_000,
            seed: 7,
        };
        let a = coherence_sweep(&[GeometryKind::ThreeBlade], NoiseAxis::Y, &omegas, &p, Y0, method)
            .unwrap();
        let b = coherence_sweep(&[GeometryKind::ThreeBlade], NoiseAxis::Y, &omegas, &p, Y0, method)
            .unwrap();
        assert_eq!(a.gamma_abs[0].1, b.gamma_abs[0].1);
    }

    #[test]
    fn fringe_fit_recovers_parameters() {
        let g = grid(96);
        let y: Vec<f64> = g.iter().map(|p| 0.4 + 0.21 * (2.0 * p + 0.63).sin()).collect();
        let fit = fit_fringe(&g, &y, 2).unwrap();
        assert!((fit.mean - 0.4).abs() < 1e-12);
        assert!((fit.amplitude - 0.21).abs() < 1e-12);
        assert!((fit.phase - 0.63).abs() < 1e-12);
    }

    #[test]
    fn fringe_fit_rejects_degenerate_input() {
        assert!(fit_fringe(&[0.0, 1.0], &[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn monte_carlo_maps_converge_to_quadrature_maps() {
        // The map is 1/4-Lipschitz in each coherence branch, so the map
        // deviation is bounded by the branch deviations, which in turn sit
        // within the Monte Carlo error bars.
        let p = PhysicalParams::defaults();
        let omega = 180.0;
        let quad_map = density_map(omega, 32, NoiseAxis::Y, &p, Y0, Method::default()).unwrap();
        let mut last_dev = f64::INFINITY;
        for samples in [10_000u64, 1_000_000] {
            let seed = 606;
            let mc_map = density_map(
                omega,
                32,
                NoiseAxis::Y,
                &p,
                Y0,
                Method::MonteCarlo { samples, seed },
            )
            .unwrap();
            let mut dev = 0.0f64;
            for (row_mc, row_q) in mc_map.values.iter().zip(&quad_map.values) {
                for (v_mc, v_q) in row_mc.iter().zip(row_q) {
                    dev = dev.max((v_mc - v_q).abs());
                }
            }
            // branch-wise 3-sigma bounds from the same seeded estimates
            let mut bound = 0.0;
            for anti in [false, true] {
                let phase = crate::vibration::lowfreq_phase_fn(
                    GeometryKind::FiveBlade,
                    NoiseAxis::Y,
                    omega,
                    &p,
                    Y0,
                    anti,
                );
                let mc = crate::vibration::coherence_montecarlo(phase, samples, seed).unwrap();
                let q = crate::vibration::coherence_quadrature(
                    crate::vibration::lowfreq_phase_fn(
                        GeometryKind::FiveBlade,
                        NoiseAxis::Y,
                        omega,
                        &p,
                        Y0,
                        anti,
                    ),
                    1e-10,
                )
                .unwrap();
                let dist = (mc.gamma - q.gamma).norm();
                let stderr = mc.stderr.unwrap();
                assert!(dist <= 3.0 * 2.0f64.sqrt() * stderr + 1e-9);
                bound += dist;
            }
            assert!(dev <= bound / 4.0 + 1e-12, "map dev {dev:e} vs bound {bound:e}");
            assert!(dev < last_dev, "deviation should shrink with samples");
            last_dev = dev;
        }
        assert!(last_dev < 2e-3);
    }

    #[test]
    fn every_correlated_line_keeps_its_depth_while_the_dc_level_moves() {
        // The refocusing family is phi = -chi + mu for any mu: the fitted
        // modulation depth stays put while the fitted mean tracks gamma'.
        let p = PhysicalParams::defaults();
        let n = 128;
        for mu_index in [0, n / 4, n / 2, (3 * n) / 4] {
            let mut depths = Vec::new();
            let mut means = Vec::new();
            for omega in [0.0, 100.0, 150.0] {
                let map = density_map(omega, n, NoiseAxis::Y, &p, Y0, Method::default()).unwrap();
                let fit = fit_fringe(&map.phi_grid, &map_line_correlated(&map, mu_index), 2).unwrap();
                depths.push(fit.amplitude);
                means.push(fit.mean);
            }
            for d in &depths {
                assert!((d - depths[0]).abs() < 1e-3, "mu index {mu_index}");
            }
            let mu = std::f64::consts::TAU * mu_index as f64 / n as f64;
            // DC level: (2 + gamma' cos(mu)) / 4 moves with omega unless
            // the line sits where cos(mu) = 0.
            if mu.cos().abs() > 0.5 {
                assert!(
                    (means[2] - means[0]).abs() > 1e-3,
                    "DC level should move with omega at mu = {mu}"
                );
                let g_anti = bessel_j0(
                    crate::vibration::coherence_scaling_antisymmetric(NoiseAxis::Y, &p, Y0)
                        .bessel_argument(150.0),
                );
                let expected = 0.25 * (2.0 + g_anti * mu.cos());
                assert!((means[2] - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dfs_line_depth_is_frequency_independent_while_diagonal_damps() {
        let p = PhysicalParams::defaults();
        let n = 128;
        let map0 = density_map(0.0, n, NoiseAxis::Y, &p, Y0, Method::default()).unwrap();
        let depth0 = fit_fringe(&map0.phi_grid, &map_line_correlated(&map0, n / 2), 2)
            .unwrap()
            .amplitude;
        assert!((depth0 - 0.25).abs() < 1e-9);
        for omega in [100.0, 150.0] {
            let map = density_map(omega, n, NoiseAxis::Y, &p, Y0, Method::default()).unwrap();
            let depth = fit_fringe(&map.phi_grid, &map_line_correlated(&map, n / 2), 2)
                .unwrap()
                .amplitude;
            assert!((depth - depth0).abs() < 1e-3, "omega {omega}: {depth}");

            // along phi = chi the antisymmetric branch sets the modulation
            let diag_depth = fit_fringe(&map.phi_grid, &map_line_diagonal(&map), 2)
                .unwrap()
                .amplitude;
            let anti = crate::vibration::coherence_scaling_antisymmetric(NoiseAxis::Y, &p, Y0);
            let expected = bessel_j0(anti.bessel_argument(omega)).abs() / 4.0;
            assert!((diag_depth - expected).abs() < 1e-6);
        }
    }
}

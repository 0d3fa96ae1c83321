//! Subcommand implementations.

use std::path::PathBuf;

use nisim::analysis::{self, Method, Port};
use nisim::dyndiff::{self, BetaWeight, DDProfile, MomentumDistribution, TabulatedProfile};
use nisim::geometry::GeometryKind;
use nisim::selfcheck;
use nisim::vibration::NoiseAxis;

use crate::config::{self, OmegaUnit, OutputFormat, RunConfig};
use crate::measured;
use crate::output::Table;
use crate::{parse_value_list, AxisArg, Cli, CliError, Command, MethodArg, PortArg, WeightArg};

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os("NISIM_CONFIG").map(PathBuf::from));
    let mut config = match path {
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| {
                CliError::validation(format!("cannot read config {}: {e}", p.display()))
            })?;
            config::parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if cli.hz {
        config.omega_unit = OmegaUnit::Hz;
    }
    if cli.json {
        config.output_format = OutputFormat::CsvJson;
    }
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }
    if config.threads > 0 {
        // Ignore the error when a pool already exists (e.g. repeated calls
        // in one process); results do not depend on the thread count.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global();
    }
    Ok(config)
}

fn axis_of(arg: AxisArg) -> NoiseAxis {
    match arg {
        AxisArg::Y => NoiseAxis::Y,
        AxisArg::Z => NoiseAxis::Z,
    }
}

fn amplitude_of(config: &RunConfig, axis: NoiseAxis, flag: &Option<String>) -> Result<f64, CliError> {
    match flag {
        None => Ok(match axis {
            NoiseAxis::Y => config.y_amplitude,
            NoiseAxis::Z => config.theta_amplitude,
        }),
        Some(raw) => {
            let parsed = match axis {
                NoiseAxis::Y => config::parse_length(raw, 0),
                NoiseAxis::Z => config::parse_angle(raw, 0),
            }?;
            if !(parsed.is_finite() && parsed >= 0.0) {
                return Err(CliError::validation(format!(
                    "amplitude must be non-negative, got {raw:?}"
                )));
            }
            Ok(parsed)
        }
    }
}

fn method_of(config: &RunConfig, arg: MethodArg) -> Method {
    match arg {
        MethodArg::Closed => Method::ClosedForm,
        MethodArg::Quadrature => Method::Quadrature {
            tol: config.quad_tol,
        },
        MethodArg::Mc => Method::MonteCarlo {
            samples: config.mc_samples,
            seed: config.seed,
        },
    }
}

fn geometry_of(code: u8) -> Result<GeometryKind, CliError> {
    match code {
        3 => Ok(GeometryKind::ThreeBlade),
        4 => Ok(GeometryKind::FourBlade),
        5 => Ok(GeometryKind::FiveBlade),
        other => Err(CliError::validation(format!(
            "geometry must be 3, 4 or 5, got {other}"
        ))),
    }
}

fn geometry_list(spec: &str) -> Result<Vec<GeometryKind>, CliError> {
    if spec.trim() == "all" {
        return Ok(GeometryKind::all().to_vec());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<u8>()
                .map_err(|_| CliError::validation(format!("bad geometry {s:?}")))
                .and_then(geometry_of)
        })
        .collect()
}

fn phase_grid(points: usize) -> Result<Vec<f64>, CliError> {
    if points < 8 {
        return Err(CliError::validation(format!(
            "need at least 8 phase points, got {points}"
        )));
    }
    Ok((0..points)
        .map(|k| std::f64::consts::TAU * k as f64 / points as f64)
        .collect())
}

fn out_path(cli: &Cli, default_name: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(default_name))
}

pub fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let config = load_config(&cli)?;
    match &cli.command {
        Command::Sweep {
            axis,
            geometry,
            omega,
            amplitude,
            method,
        } => {
            let axis = axis_of(*axis);
            let kinds = geometry_list(geometry)?;
            let omegas: Vec<f64> = parse_value_list(omega)?
                .into_iter()
                .map(|w| config.omega_to_rad(w))
                .collect();
            let amp = amplitude_of(&config, axis, amplitude)?;
            let sweep = analysis::coherence_sweep(
                &kinds,
                axis,
                &omegas,
                &config.params()?,
                amp,
                method_of(&config, *method),
            )?;
            let mut columns = vec!["omega".to_string()];
            for (kind, _) in &sweep.gamma_abs {
                columns.push(format!("gamma_abs_{}", kind.blade_count()));
            }
            let col_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
            let mut table = Table::new("sweep", &col_refs);
            table.note("axis", axis.label());
            table.note("amplitude_si", format!("{amp:e}"));
            table.note("omega_unit", "rad/s (converted from input)");
            for (i, &w) in omegas.iter().enumerate() {
                let mut row = vec![w];
                for (_, values) in &sweep.gamma_abs {
                    row.push(values[i]);
                }
                table.push_row(row);
            }
            table.write(&out_path(&cli, "sweep.csv"), &config)?;
            Ok(0)
        }

        Command::Densitymap {
            omega,
            grid,
            axis,
            method,
        } => {
            let axis = axis_of(*axis);
            let omega = config.omega_to_rad(*omega);
            let amp = amplitude_of(&config, axis, &None)?;
            let map = analysis::density_map(
                omega,
                *grid,
                axis,
                &config.params()?,
                amp,
                method_of(&config, *method),
            )?;
            let mut table = Table::new("densitymap", &["phi", "chi", "intensity_h"]);
            table.note("axis", axis.label());
            table.note("omega_rad_per_s", format!("{omega:e}"));
            table.note("grid", grid);
            for (i, &phi) in map.phi_grid.iter().enumerate() {
                for (j, &chi) in map.chi_grid.iter().enumerate() {
                    table.push_row(vec![phi, chi, map.values[i][j]]);
                }
            }
            table.write(&out_path(&cli, "densitymap.csv"), &config)?;
            Ok(0)
        }

        Command::Interferogram {
            geometry,
            axis,
            omega,
            port,
            chi,
            points,
            method,
        } => {
            let kind = geometry_of(*geometry)?;
            let axis = axis_of(*axis);
            let omega = config.omega_to_rad(*omega);
            let amp = amplitude_of(&config, axis, &None)?;
            let grid = phase_grid(*points)?;
            let port_sel = match port {
                PortArg::O => Port::O,
                PortArg::H => Port::H,
            };
            let curve = analysis::averaged_interferogram(
                kind,
                axis,
                omega,
                &config.params()?,
                amp,
                port_sel,
                &grid,
                *chi,
                method_of(&config, *method),
            )?;
            let column = match port_sel {
                Port::O => "intensity_o",
                Port::H => "intensity_h",
            };
            let mut table = Table::new("interferogram", &["phi", column]);
            table.note("geometry", kind.label());
            table.note("axis", axis.label());
            table.note("omega_rad_per_s", format!("{omega:e}"));
            table.note("gamma_re", format!("{:e}", curve.metadata.gamma.re));
            table.note("gamma_im", format!("{:e}", curve.metadata.gamma.im));
            if let Some(anti) = curve.metadata.gamma_antisymmetric {
                table.note("gamma_anti_re", format!("{:e}", anti.re));
                table.note("gamma_anti_im", format!("{:e}", anti.im));
            }
            if kind == GeometryKind::FiveBlade {
                table.note("chi", format!("{chi:e}"));
            }
            for (i, &phi) in curve.phase_grid.iter().enumerate() {
                table.push_row(vec![phi, curve.intensity[i]]);
            }
            table.write(&out_path(&cli, "interferogram.csv"), &config)?;
            Ok(0)
        }

        Command::Refocus {
            omega,
            mu,
            axis,
            points,
            method,
        } => {
            let axis = axis_of(*axis);
            let omegas: Vec<f64> = parse_value_list(omega)?
                .into_iter()
                .map(|w| config.omega_to_rad(w))
                .collect();
            let amp = amplitude_of(&config, axis, &None)?;
            let grid = phase_grid(*points)?;
            let mut columns = vec!["phi".to_string()];
            let mut curves = Vec::new();
            for &w in &omegas {
                let curve = analysis::refocused_interferogram(
                    &grid,
                    *mu,
                    axis,
                    w,
                    &config.params()?,
                    amp,
                    method_of(&config, *method),
                )?;
                columns.push(format!("intensity_h_at_{w}"));
                curves.push(curve);
            }
            let col_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
            let mut table = Table::new("refocus", &col_refs);
            table.note("axis", axis.label());
            table.note("mu", format!("{mu:e}"));
            for (k, curve) in curves.iter().enumerate() {
                table.note(
                    &format!("dc_offset_at_{}", omegas[k]),
                    format!("{:e}", curve.metadata.dc_offset.unwrap_or(0.0)),
                );
                table.note(
                    &format!("modulation_depth_at_{}", omegas[k]),
                    format!("{:e}", curve.metadata.modulation_depth.unwrap_or(0.0)),
                );
            }
            for (i, &phi) in grid.iter().enumerate() {
                let mut row = vec![phi];
                for curve in &curves {
                    row.push(curve.intensity[i]);
                }
                table.push_row(row);
            }
            table.write(&out_path(&cli, "refocus.csv"), &config)?;
            Ok(0)
        }

        Command::Ddscan {
            range,
            thickness,
            lambda,
            sigma,
            weight,
            profile,
        } => {
            let centers_urad = parse_value_list(range)?;
            let centers: Vec<f64> = centers_urad.iter().map(|c| c * 1e-6).collect();
            let sigma = match sigma {
                Some(raw) => config::parse_angle(raw, 0)?,
                None => config.sigma(),
            };
            let dd_profile = resolve_profile(&config, thickness, lambda, profile)?;
            let weight_sel = match weight {
                WeightArg::Single => BetaWeight::Single,
                WeightArg::Double => BetaWeight::Double,
            };
            let results: Vec<(f64, f64)> = match weight_sel {
                BetaWeight::Single => {
                    dyndiff::contrast_vs_misalignment(&centers, sigma, &dd_profile, config.quad_tol)?
                }
                BetaWeight::Double => centers
                    .iter()
                    .map(|&c| {
                        let dist = MomentumDistribution::new(sigma, c)?;
                        let avg =
                            dyndiff::dd_average(&dist, &dd_profile, weight_sel, config.quad_tol)?;
                        Ok((avg.contrast, avg.phase))
                    })
                    .collect::<Result<_, nisim::Error>>()?,
            };
            let mut table = Table::new("ddscan", &["dtheta0_urad", "contrast", "phase_rad"]);
            table.note("sigma_rad", format!("{sigma:e}"));
            table.note(
                "weight",
                match weight_sel {
                    BetaWeight::Single => "single",
                    BetaWeight::Double => "double",
                },
            );
            annotate_profile(&mut table, &dd_profile);
            for (k, &(contrast, phase)) in results.iter().enumerate() {
                table.push_row(vec![centers_urad[k], contrast, phase]);
            }
            table.write(&out_path(&cli, "ddscan.csv"), &config)?;
            Ok(0)
        }

        Command::Ddcontrast {
            geometry,
            thickness,
            lambda,
            sigma,
        } => {
            let kind = geometry_of(*geometry)?;
            let sigma = match sigma {
                Some(raw) => config::parse_angle(raw, 0)?,
                None => config.sigma(),
            };
            let dd_profile = resolve_profile(&config, thickness, lambda, &None)?;
            let mut table = Table::new(
                "ddcontrast",
                &["geometry", "sigma_urad", "contrast", "phase_rad"],
            );
            annotate_profile(&mut table, &dd_profile);
            let (contrast, phase) = match kind {
                // The blade phases cancel pairwise in these geometries, so
                // the momentum spread does not dephase them at all.
                GeometryKind::ThreeBlade | GeometryKind::FiveBlade => (1.0, 0.0),
                GeometryKind::FourBlade => {
                    let dist = MomentumDistribution::new(sigma, 0.0)?;
                    let avg =
                        dyndiff::dd_average(&dist, &dd_profile, BetaWeight::Double, config.quad_tol)?;
                    (avg.contrast, avg.phase)
                }
            };
            table.push_row(vec![
                kind.blade_count() as f64,
                sigma * 1e6,
                contrast,
                phase,
            ]);
            table.write(&out_path(&cli, "ddcontrast.csv"), &config)?;
            println!(
                "{}: estimated maximum contrast {:.4} (phase {:.4} rad)",
                kind.label(),
                contrast,
                phase
            );
            Ok(0)
        }

        Command::Compare {
            measured: measured_path,
            simulated,
        } => {
            let measured = measured::read_measured(measured_path)?;
            let sim = measured::read_measured(simulated)?;
            let report = measured::compare(&measured, &sim.x, &sim.y)?;
            let mut table = Table::new("compare", &["x", "measured", "simulated", "residual"]);
            table.note("rms", format!("{:e}", report.rms));
            table.note("max_abs_residual", format!("{:e}", report.max_abs));
            table.note("points_compared", report.points.len());
            table.note("points_outside_range", report.skipped);
            for &(x, m, s, r) in &report.points {
                table.push_row(vec![x, m, s, r]);
            }
            table.write(&out_path(&cli, "compare.csv"), &config)?;
            println!(
                "rms {:.6e}, max |residual| {:.6e} over {} points ({} outside range)",
                report.rms,
                report.max_abs,
                report.points.len(),
                report.skipped
            );
            Ok(0)
        }

        Command::Selftest => {
            let reports = selfcheck::run_all();
            let mut all_passed = true;
            for report in &reports {
                println!("{}", report.summary());
                for line in &report.details {
                    println!("    {line}");
                }
                all_passed &= report.passed;
            }
            println!(
                "{}/{} criteria passed",
                reports.iter().filter(|r| r.passed).count(),
                reports.len()
            );
            Ok(if all_passed { 0 } else { 1 })
        }
    }
}

fn resolve_profile(
    config: &RunConfig,
    thickness: &Option<String>,
    lambda: &Option<String>,
    tabulated: &Option<PathBuf>,
) -> Result<DDProfile, CliError> {
    if let Some(path) = tabulated {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::validation(format!("cannot read profile {}: {e}", path.display()))
        })?;
        return Ok(DDProfile::Tabulated(TabulatedProfile::from_text(&text)?));
    }
    let thickness = thickness
        .as_ref()
        .map(|raw| config::parse_length(raw, 0))
        .transpose()?;
    let lambda = lambda
        .as_ref()
        .map(|raw| config::parse_length(raw, 0))
        .transpose()?;
    Ok(DDProfile::Analytic(config.dd_profile(lambda, thickness)?))
}

fn annotate_profile(table: &mut Table, profile: &DDProfile) {
    match profile {
        DDProfile::Analytic(p) => {
            table.note("profile", "analytic");
            table.note("thickness_m", format!("{:e}", p.thickness()));
            table.note("pendellosung_m", format!("{:e}", p.pendellosung()));
            table.note("thickness_parameter", format!("{:e}", p.thickness_parameter()));
            table.note("deviation_scale_per_rad", format!("{:e}", p.deviation_scale()));
            table.note("ramp", p.includes_ramp());
        }
        DDProfile::Tabulated(t) => {
            let (lo, hi) = t.range();
            table.note("profile", "tabulated");
            table.note("range_rad", format!("[{lo:e}, {hi:e}]"));
        }
    }
}

//! Flat `key = value` configuration with unit suffixes.
//!
//! Lengths accept `m`, `cm`, `mm`, `um`, `nm`, `pm`, `angstrom`; angles
//! accept `rad`, `mrad`, `urad`, `deg`, `arcsec`; bare numbers are SI
//! (meters / radians). `#` starts a comment. Unknown keys are rejected
//! with the offending line number.

use std::fmt;

use nisim::dyndiff::AnalyticProfile;
use nisim::material;
use nisim::vibration::PhysicalParams;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line number, 0 when the error is not tied to one line.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "config line {}: {}", self.line, self.message)
        } else {
            write!(f, "config: {}", self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaUnit {
    /// Frequencies are angular (rad/s), used as given.
    Rad,
    /// Frequencies are in Hz and get multiplied by 2 pi.
    Hz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    CsvJson,
}

/// Fully resolved run configuration (SI units throughout).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub wavelength: f64,
    pub reflection: String,
    /// Explicit plane spacing override; `None` means the reflection's.
    pub d_spacing: Option<f64>,
    pub blade_separation: f64,
    pub y_amplitude: f64,
    pub theta_amplitude: f64,
    pub dd_thickness: f64,
    /// Explicit Pendellösung override; `None` means the shipped table value
    /// rescaled to `wavelength`.
    pub pendellosung: Option<f64>,
    pub sigma_theta: f64,
    pub width_is_fwhm: bool,
    /// Deviation-scale override for the analytic profile (1/rad).
    pub dd_deviation_scale: Option<f64>,
    pub dd_ramp: bool,
    pub quad_tol: f64,
    pub mc_samples: u64,
    pub seed: u64,
    pub omega_unit: OmegaUnit,
    pub output_format: OutputFormat,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            wavelength: 4.4e-10,
            reflection: "Si111".to_string(),
            d_spacing: None,
            blade_separation: 0.05,
            y_amplitude: 0.1e-6,
            theta_amplitude: 0.1e-6,
            dd_thickness: 2.0e-3,
            pendellosung: None,
            sigma_theta: 4.26e-6,
            width_is_fwhm: false,
            dd_deviation_scale: None,
            dd_ramp: true,
            quad_tol: 1e-9,
            mc_samples: 100_000,
            seed: 1,
            omega_unit: OmegaUnit::Rad,
            output_format: OutputFormat::Csv,
            threads: 0,
        }
    }
}

impl RunConfig {
    /// Plane spacing: the explicit override or the named reflection's.
    pub fn d_spacing(&self) -> Result<f64, ConfigError> {
        if let Some(d) = self.d_spacing {
            return Ok(d);
        }
        material::lookup(&self.reflection)
            .map(|r| r.d_spacing)
            .ok_or_else(|| ConfigError {
                line: 0,
                message: format!("unknown reflection {:?}", self.reflection),
            })
    }

    /// Beam/instrument parameters for the vibration model.
    pub fn params(&self) -> Result<PhysicalParams, ConfigError> {
        PhysicalParams::new(self.wavelength, self.d_spacing()?, self.blade_separation).map_err(
            |e| ConfigError {
                line: 0,
                message: e.to_string(),
            },
        )
    }

    /// Lorentzian width parameter, halved when the configured value is a
    /// full width at half maximum.
    pub fn sigma(&self) -> f64 {
        if self.width_is_fwhm {
            0.5 * self.sigma_theta
        } else {
            self.sigma_theta
        }
    }

    /// Analytic transmission profile at the given wavelength and thickness
    /// (falling back to the configured defaults).
    pub fn dd_profile(
        &self,
        wavelength: Option<f64>,
        thickness: Option<f64>,
    ) -> Result<AnalyticProfile, ConfigError> {
        let lambda = wavelength.unwrap_or(self.wavelength);
        let thickness = thickness.unwrap_or(self.dd_thickness);
        let d = self.d_spacing()?;
        let wrap = |m: String| ConfigError { line: 0, message: m };
        let pendellosung = match self.pendellosung {
            Some(p) => p,
            None => material::lookup(&self.reflection)
                .ok_or_else(|| wrap(format!("unknown reflection {:?}", self.reflection)))?
                .pendellosung_at(lambda)
                .map_err(|e| wrap(e.to_string()))?,
        };
        let bragg = material::bragg_angle(lambda, d).map_err(|e| wrap(e.to_string()))?;
        let mut profile = AnalyticProfile::new(thickness, pendellosung, bragg, d)
            .map_err(|e| wrap(e.to_string()))?;
        if let Some(scale) = self.dd_deviation_scale {
            profile = profile
                .with_deviation_scale(scale)
                .map_err(|e| wrap(e.to_string()))?;
        }
        if !self.dd_ramp {
            profile = profile.without_ramp();
        }
        Ok(profile)
    }

    /// Converts a configured frequency value to rad/s.
    pub fn omega_to_rad(&self, omega: f64) -> f64 {
        match self.omega_unit {
            OmegaUnit::Rad => omega,
            OmegaUnit::Hz => omega * std::f64::consts::TAU,
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

/// Splits `4.4 angstrom` / `4.4angstrom` / `1e-6` into number and unit:
/// at whitespace when present, otherwise after the longest numeric prefix
/// (so exponents like `1e-6` stay with the number).
fn split_value(raw: &str) -> (&str, &str) {
    let raw = raw.trim();
    if let Some((num, unit)) = raw.split_once(char::is_whitespace) {
        return (num.trim(), unit.trim());
    }
    for i in (1..=raw.len()).rev() {
        if raw.is_char_boundary(i) && raw[..i].parse::<f64>().is_ok() {
            return (&raw[..i], &raw[i..]);
        }
    }
    (raw, "")
}

pub(crate) fn parse_length(raw: &str, line: usize) -> Result<f64, ConfigError> {
    let (num, unit) = split_value(raw);
    let value: f64 = num
        .parse()
        .map_err(|_| err(line, format!("not a number: {num:?}")))?;
    let factor = match unit {
        "" | "m" => 1.0,
        "cm" => 1e-2,
        "mm" => 1e-3,
        "um" => 1e-6,
        "nm" => 1e-9,
        "pm" => 1e-12,
        "angstrom" => 1e-10,
        other => return Err(err(line, format!("unknown length unit {other:?}"))),
    };
    Ok(value * factor)
}

pub(crate) fn parse_angle(raw: &str, line: usize) -> Result<f64, ConfigError> {
    let (num, unit) = split_value(raw);
    let value: f64 = num
        .parse()
        .map_err(|_| err(line, format!("not a number: {num:?}")))?;
    let factor = match unit {
        "" | "rad" => 1.0,
        "mrad" => 1e-3,
        "urad" => 1e-6,
        "deg" => std::f64::consts::PI / 180.0,
        "arcsec" => std::f64::consts::PI / 180.0 / 3600.0,
        other => return Err(err(line, format!("unknown angle unit {other:?}"))),
    };
    Ok(value * factor)
}

fn parse_number(raw: &str, line: usize) -> Result<f64, ConfigError> {
    raw.trim()
        .parse()
        .map_err(|_| err(line, format!("not a number: {raw:?}")))
}

fn parse_integer(raw: &str, line: usize) -> Result<u64, ConfigError> {
    raw.trim()
        .parse()
        .map_err(|_| err(line, format!("not an integer: {raw:?}")))
}

fn parse_bool(raw: &str, line: usize) -> Result<bool, ConfigError> {
    match raw.trim() {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        other => Err(err(line, format!("not a boolean: {other:?}"))),
    }
}

/// Parses a configuration document; omitted keys keep their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(err(line_no, format!("no value for key {key:?}")));
        }
        match key {
            "wavelength" => config.wavelength = parse_length(value, line_no)?,
            "reflection" => config.reflection = value.to_string(),
            "d_spacing" => config.d_spacing = Some(parse_length(value, line_no)?),
            "blade_separation" => config.blade_separation = parse_length(value, line_no)?,
            "y_amplitude" => config.y_amplitude = parse_length(value, line_no)?,
            "theta_amplitude" => config.theta_amplitude = parse_angle(value, line_no)?,
            "dd_thickness" => config.dd_thickness = parse_length(value, line_no)?,
            "pendellosung" => {
                config.pendellosung = if value == "auto" {
                    None
                } else {
                    Some(parse_length(value, line_no)?)
                }
            }
            "sigma_theta" => config.sigma_theta = parse_angle(value, line_no)?,
            "width_is_fwhm" => config.width_is_fwhm = parse_bool(value, line_no)?,
            "dd_deviation_scale" => {
                config.dd_deviation_scale = if value == "auto" {
                    None
                } else {
                    Some(parse_number(value, line_no)?)
                }
            }
            "dd_ramp" => config.dd_ramp = parse_bool(value, line_no)?,
            "quad_tol" => config.quad_tol = parse_number(value, line_no)?,
            "mc_samples" => config.mc_samples = parse_integer(value, line_no)?,
            "seed" => config.seed = parse_integer(value, line_no)?,
            "omega_unit" => {
                config.omega_unit = match value {
                    "rad" => OmegaUnit::Rad,
                    "hz" => OmegaUnit::Hz,
                    other => {
                        return Err(err(line_no, format!("omega_unit must be rad or hz, got {other:?}")))
                    }
                }
            }
            "output_format" => {
                config.output_format = match value {
                    "csv" => OutputFormat::Csv,
                    "csv+json" => OutputFormat::CsvJson,
                    other => {
                        return Err(err(
                            line_no,
                            format!("output_format must be csv or csv+json, got {other:?}"),
                        ))
                    }
                }
            }
            "threads" => config.threads = parse_integer(value, line_no)? as usize,
            other => return Err(err(line_no, format!("unknown key {other:?}"))),
        }
    }
    validate(&config)?;
    Ok(config)
}

fn validate(config: &RunConfig) -> Result<(), ConfigError> {
    let d = config.d_spacing()?;
    material::bragg_angle(config.wavelength, d).map_err(|e| ConfigError {
        line: 0,
        message: format!("{e} (wavelength vs {})", config.reflection),
    })?;
    if !(config.quad_tol.is_finite() && config.quad_tol > 0.0) {
        return Err(err(0, format!("quad_tol must be positive, got {}", config.quad_tol)));
    }
    if config.mc_samples < 1000 {
        return Err(err(0, format!("mc_samples must be at least 1000, got {}", config.mc_samples)));
    }
    for (value, what) in [
        (config.blade_separation, "blade_separation"),
        (config.y_amplitude, "y_amplitude"),
        (config.theta_amplitude, "theta_amplitude"),
        (config.dd_thickness, "dd_thickness"),
        (config.sigma_theta, "sigma_theta"),
    ] {
        if !(value.is_finite() && value > 0.0) {
            return Err(err(0, format!("{what} must be positive, got {value}")));
        }
    }
    Ok(())
}

/// Canonical SI-unit rendering; `parse_config(emit(c)) == c`.
pub fn emit(config: &RunConfig) -> String {
    let mut out = String::new();
    let mut push = |key: &str, value: String| {
        out.push_str(key);
        out.push_str(" = ");
        out.push_str(&value);
        out.push('\n');
    };
    push("wavelength", format!("{:e} m", config.wavelength));
    push("reflection", config.reflection.clone());
    if let Some(d) = config.d_spacing {
        push("d_spacing", format!("{d:e} m"));
    }
    push("blade_separation", format!("{:e} m", config.blade_separation));
    push("y_amplitude", format!("{:e} m", config.y_amplitude));
    push("theta_amplitude", format!("{:e} rad", config.theta_amplitude));
    push("dd_thickness", format!("{:e} m", config.dd_thickness));
    push(
        "pendellosung",
        match config.pendellosung {
            Some(p) => format!("{p:e} m"),
            None => "auto".to_string(),
        },
    );
    push("sigma_theta", format!("{:e} rad", config.sigma_theta));
    push("width_is_fwhm", config.width_is_fwhm.to_string());
    push(
        "dd_deviation_scale",
        match config.dd_deviation_scale {
            Some(s) => format!("{s:e}"),
            None => "auto".to_string(),
        },
    );
    push("dd_ramp", config.dd_ramp.to_string());
    push("quad_tol", format!("{:e}", config.quad_tol));
    push("mc_samples", config.mc_samples.to_string());
    push("seed", config.seed.to_string());
    push(
        "omega_unit",
        match config.omega_unit {
            OmegaUnit::Rad => "rad",
            OmegaUnit::Hz => "hz",
        }
        .to_string(),
    );
    push(
        "output_format",
        match config.output_format {
            OutputFormat::Csv => "csv",
            OutputFormat::CsvJson => "csv+json",
        }
        .to_string(),
    );
    push("threads", config.threads.to_string());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default_config() {
        let config = parse_config("").unwrap();
        assert_eq!(config, RunConfig::default());
        assert_eq!(config.blade_separation, 0.05);
        assert_eq!(config.wavelength, 4.4e-10);
        assert_eq!(config.reflection, "Si111");
    }

    #[test]
    fn units_and_comments() {
        let text = "\
# a comment
wavelength = 2.71 angstrom  # inline comment
blade_separation = 5 cm
y_amplitude = 0.1um
theta_amplitude = 0.1 urad
dd_thickness = 1 mm
";
        let config = parse_config(text).unwrap();
        assert!((config.wavelength - 2.71e-10).abs() < 1e-25);
        assert_eq!(config.blade_separation, 0.05);
        assert!((config.y_amplitude - 1e-7).abs() < 1e-20);
        assert!((config.theta_amplitude - 1e-7).abs() < 1e-20);
        assert_eq!(config.dd_thickness, 1e-3);
    }

    #[test]
    fn unknown_key_names_the_line() {
        let e = parse_config("seed = 3\nwavelenght = 4 angstrom\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("unknown key"));
    }

    #[test]
    fn malformed_unit_is_rejected() {
        let e = parse_config("wavelength = 4.4 parsec\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.message.contains("unknown length unit"));
    }

    #[test]
    fn bragg_impossible_pair_is_rejected() {
        let e = parse_config("wavelength = 4.4 angstrom\nreflection = Si220\n").unwrap_err();
        assert!(e.message.contains("Bragg condition unsatisfiable"), "{e}");
    }

    #[test]
    fn hz_flag_scales_frequencies() {
        let config = parse_config("omega_unit = hz\n").unwrap();
        assert!((config.omega_to_rad(1.0) - std::f64::consts::TAU).abs() < 1e-15);
        let config = parse_config("omega_unit = rad\n").unwrap();
        assert_eq!(config.omega_to_rad(1.0), 1.0);
    }

    #[test]
    fn emit_round_trips() {
        let config = RunConfig {
            wavelength: 2.71e-10,
            dd_thickness: 1e-3,
            seed: 987,
            width_is_fwhm: true,
            omega_unit: OmegaUnit::Hz,
            dd_deviation_scale: Some(12345.5),
            ..RunConfig::default()
        };
        let text = emit(&config);
        assert_eq!(parse_config(&text).unwrap(), config);
    }

    #[test]
    fn dd_profile_uses_table_and_overrides() {
        let config = parse_config("wavelength = 2.71 angstrom\ndd_thickness = 1 mm\n").unwrap();
        let profile = config.dd_profile(None, None).unwrap();
        assert!((profile.thickness_parameter() - 44.029).abs() < 1e-2);
        assert!(profile.includes_ramp());

        let config = parse_config("dd_ramp = false\n").unwrap();
        let profile = config.dd_profile(Some(2.71e-10), Some(1e-3)).unwrap();
        assert!(!profile.includes_ramp());
    }

    #[test]
    fn fwhm_flag_halves_sigma() {
        let config = parse_config("width_is_fwhm = true\n").unwrap();
        assert!((config.sigma() - 2.13e-6).abs() < 1e-12);
    }
}

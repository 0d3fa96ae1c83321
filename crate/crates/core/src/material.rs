//! Crystal reflection data.
//!
//! The shipped table (`data/pendellosung_si.csv`) carries the lattice plane
//! spacing and the Pendellösung length of the silicon reflections used by
//! the default configurations. Pendellösung lengths are quoted at a
//! reference wavelength and rescaled as `cos(theta_B) / lambda` when
//! queried elsewhere.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const TABLE: &str = include_str!("../data/pendellosung_si.csv");

#[derive(Debug, Clone, PartialEq)]
pub struct Reflection {
    pub name: String,
    /// Lattice plane spacing d in meters.
    pub d_spacing: f64,
    /// Pendellösung length in meters at `reference_wavelength`.
    pub pendellosung: f64,
    /// Wavelength in meters at which `pendellosung` is quoted.
    pub reference_wavelength: f64,
}

impl Reflection {
    /// Bragg angle for the given wavelength, or an error when
    /// `lambda / 2d` is not inside (0, 1).
    pub fn bragg_angle(&self, wavelength: f64) -> Result<f64> {
        bragg_angle(wavelength, self.d_spacing)
    }

    /// Pendellösung length rescaled to `wavelength`.
    pub fn pendellosung_at(&self, wavelength: f64) -> Result<f64> {
        let theta = self.bragg_angle(wavelength)?;
        let theta_ref = self.bragg_angle(self.reference_wavelength)?;
        Ok(self.pendellosung * (self.reference_wavelength / wavelength)
            * (theta.cos() / theta_ref.cos()))
    }
}

/// Bragg angle `asin(lambda / 2d)` with domain checking.
pub fn bragg_angle(wavelength: f64, d_spacing: f64) -> Result<f64> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::InvalidInput(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    if !(d_spacing.is_finite() && d_spacing > 0.0) {
        return Err(Error::InvalidInput(format!(
            "d-spacing must be positive, got {d_spacing}"
        )));
    }
    let s = wavelength / (2.0 * d_spacing);
    if s >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "Bragg condition unsatisfiable: lambda / 2d = {s:.4} >= 1"
        )));
    }
    Ok(s.asin())
}

fn parse_table(text: &str) -> Vec<Reflection> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        assert_eq!(fields.len(), 4, "malformed reflection table line: {line}");
        let parse = |s: &str| s.parse::<f64>().expect("numeric field in reflection table");
        out.push(Reflection {
            name: fields[0].to_string(),
            d_spacing: parse(fields[1]) * 1e-10,
            pendellosung: parse(fields[2]) * 1e-6,
            reference_wavelength: parse(fields[3]) * 1e-10,
        });
    }
    out
}

/// All shipped reflections.
pub fn reflections() -> &'static [Reflection] {
    static CACHE: OnceLock<Vec<Reflection>> = OnceLock::new();
    CACHE.get_or_init(|| parse_table(TABLE))
}

/// Case-insensitive lookup by name ("Si111", "Si220").
pub fn lookup(name: &str) -> Option<&'static Reflection> {
    reflections()
        .iter()
        .find(|r| r.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_contains_both_reflections() {
        assert!(lookup("Si111").is_some());
        assert!(lookup("si220").is_some());
        assert!(lookup("Ge111").is_none());
    }

    #[test]
    fn si111_numbers() {
        let r = lookup("Si111").unwrap();
        assert!((r.d_spacing - 3.135601e-10).abs() < 1e-16);
        // At the reference wavelength the rescaling is the identity.
        let p = r.pendellosung_at(2.71e-10).unwrap();
        assert!((p - r.pendellosung).abs() < 1e-20);
        // 4.4 A on Si(111): Bragg angle ~ 44.57 degrees.
        let theta = r.bragg_angle(4.4e-10).unwrap();
        assert!((theta.to_degrees() - 44.57).abs() < 0.05);
    }

    #[test]
    fn bragg_condition_guard() {
        let r = lookup("Si220").unwrap();
        assert!(r.bragg_angle(4.4e-10).is_err());
        assert!(bragg_angle(0.0, 1e-10).is_err());
        assert!(bragg_angle(1e-10, -1.0).is_err());
    }

    #[test]
    fn pendellosung_rescaling_follows_cos_over_lambda() {
        let r = lookup("Si111").unwrap();
        let lam = 2.0e-10;
        let p = r.pendellosung_at(lam).unwrap();
        let theta = r.bragg_angle(lam).unwrap();
        let theta_ref = r.bragg_angle(r.reference_wavelength).unwrap();
        let expected = r.pendellosung * (r.reference_wavelength / lam) * theta.cos()
            / theta_ref.cos();
        assert!((p - expected).abs() < 1e-18);
    }
}

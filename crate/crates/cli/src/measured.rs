//! Measured-series ingestion and comparison against simulated curves.

use std::path::Path;

use crate::CliError;

/// A measured data series: `x`, `y`, and optional per-point errors.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredSeries {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y_err: Option<Vec<f64>>,
}

/// Reads a CSV with header `x,y` or `x,y,y_err`; `#` lines are comments.
/// Errors name the offending file line.
pub fn read_measured_text(text: &str) -> Result<MeasuredSeries, CliError> {
    let mut header: Option<usize> = None;
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut y_err = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        match header {
            None => {
                let cols = match cells.as_slice() {
                    ["x", "y"] => 2,
                    ["x", "y", "y_err"] => 3,
                    _ => {
                        return Err(CliError::validation(format!(
                            "row {line_no}: expected header `x,y` or `x,y,y_err`, got {line:?}"
                        )))
                    }
                };
                header = Some(cols);
            }
            Some(cols) => {
                if cells.len() != cols {
                    return Err(CliError::validation(format!(
                        "row {line_no}: expected {cols} cells, found {}",
                        cells.len()
                    )));
                }
                let parse = |s: &str| -> Result<f64, CliError> {
                    let v: f64 = s.parse().map_err(|_| {
                        CliError::validation(format!("row {line_no}: not a number: {s:?}"))
                    })?;
                    if !v.is_finite() {
                        return Err(CliError::validation(format!(
                            "row {line_no}: non-finite value {s:?}"
                        )));
                    }
                    Ok(v)
                };
                x.push(parse(cells[0])?);
                y.push(parse(cells[1])?);
                if cols == 3 {
                    y_err.push(parse(cells[2])?);
                }
            }
        }
    }
    if header.is_none() {
        return Err(CliError::validation("no header row found".to_string()));
    }
    if x.is_empty() {
        return Err(CliError::validation("no data rows found".to_string()));
    }
    Ok(MeasuredSeries {
        x,
        y,
        y_err: (!y_err.is_empty()).then_some(y_err),
    })
}

pub fn read_measured(path: &Path) -> Result<MeasuredSeries, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    read_measured_text(&text)
}

/// Residual report of a measured series against a simulated curve.
#[derive(Debug, Clone)]
pub struct CompareReport {
    /// `(x, measured, simulated, residual)` per measured point inside the
    /// simulated range.
    pub points: Vec<(f64, f64, f64, f64)>,
    pub rms: f64,
    pub max_abs: f64,
    /// Measured points outside the simulated x-range.
    pub skipped: usize,
}

/// Interpolates the simulated curve onto the measured abscissae and
/// reports the per-point residuals. The simulated grid must be strictly
/// increasing; the ranges must overlap.
pub fn compare(
    measured: &MeasuredSeries,
    sim_x: &[f64],
    sim_y: &[f64],
) -> Result<CompareReport, CliError> {
    if sim_x.len() != sim_y.len() || sim_x.len() < 2 {
        return Err(CliError::validation(
            "simulated curve needs at least two points".to_string(),
        ));
    }
    if sim_x.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::validation(
            "simulated grid must be strictly increasing".to_string(),
        ));
    }
    let (lo, hi) = (sim_x[0], *sim_x.last().unwrap());
    let mut points = Vec::new();
    let mut skipped = 0usize;
    let mut sum_sq = 0.0;
    let mut max_abs = 0.0f64;
    for (&x, &y) in measured.x.iter().zip(&measured.y) {
        if x < lo || x > hi {
            skipped += 1;
            continue;
        }
        let i = match sim_x.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(sim_x.len() - 2),
            Err(i) => (i.max(1) - 1).min(sim_x.len() - 2),
        };
        let w = (x - sim_x[i]) / (sim_x[i + 1] - sim_x[i]);
        let sim = sim_y[i] * (1.0 - w) + sim_y[i + 1] * w;
        let residual = y - sim;
        sum_sq += residual * residual;
        max_abs = max_abs.max(residual.abs());
        points.push((x, y, sim, residual));
    }
    if points.is_empty() {
        return Err(CliError::validation(
            "measured and simulated x-ranges do not overlap".to_string(),
        ));
    }
    Ok(CompareReport {
        rms: (sum_sq / points.len() as f64).sqrt(),
        max_abs,
        points,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_well_formed_series() {
        let s = read_measured_text("x,y\n0,1\n0.5,0.8\n1,0.2\n").unwrap();
        assert_eq!(s.x.len(), 3);
        assert!(s.y_err.is_none());
    }

    #[test]
    fn preamble_comments_are_ignored() {
        let s = read_measured_text("# origin: test rig\n# date scrubbed\nx,y,y_err\n1,2,0.1\n").unwrap();
        assert_eq!(s.x, vec![1.0]);
        assert_eq!(s.y_err, Some(vec![0.1]));
    }

    #[test]
    fn bad_cell_names_the_row() {
        let e = read_measured_text("x,y\n0.5,abc\n").unwrap_err();
        assert!(e.to_string().contains("row 2"), "{e}");
        let e = read_measured_text("x,y\n1,2\n3,4,5\n").unwrap_err();
        assert!(e.to_string().contains("row 3"), "{e}");
    }

    #[test]
    fn compare_identity_and_offset() {
        let sim_x: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let sim_y: Vec<f64> = sim_x.iter().map(|x| x * x).collect();
        let measured = MeasuredSeries {
            x: sim_x.clone(),
            y: sim_y.clone(),
            y_err: None,
        };
        let report = compare(&measured, &sim_x, &sim_y).unwrap();
        assert!(report.rms < 1e-15);
        assert_eq!(report.skipped, 0);

        let offset = MeasuredSeries {
            x: sim_x.clone(),
            y: sim_y.iter().map(|y| y + 0.1).collect(),
            y_err: None,
        };
        let report = compare(&offset, &sim_x, &sim_y).unwrap();
        assert!((report.rms - 0.1).abs() < 1e-12);
        assert!((report.max_abs - 0.1).abs() < 1e-12);
    }

    #[test]
    fn compare_rejects_disjoint_ranges() {
        let measured = MeasuredSeries {
            x: vec![10.0, 11.0],
            y: vec![0.0, 0.0],
            y_err: None,
        };
        assert!(compare(&measured, &[0.0, 1.0], &[0.0, 1.0]).is_err());
    }
}

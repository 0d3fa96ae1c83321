//! Adaptive Gauss–Kronrod quadrature on finite intervals.
//!
//! A 7-point Gauss / 15-point Kronrod pair supplies the local estimate and
//! error; refinement always bisects the interval with the largest error
//! until the summed error estimate drops below the requested absolute
//! tolerance. Integrands with known sharp features should be passed through
//! [`integrate_segmented`] with breakpoints at those features, since a
//! single wide panel can hide a narrow spike from the 15 sample points.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (positive half).
// Rule constants carry the full published digits.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// Weights of the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Weights of the 15-point Kronrod rule.
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const MAX_INTERVALS: usize = 1_000_000;

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

/// QUADPACK-style error rescaling: sharpens the raw `|K15 - G7|` estimate
/// using the integral of |f - mean|.
fn rescale_error(raw: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = raw.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

fn kernel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut fv = [[0.0f64; 2]; 8];
    for (j, x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        fv[j] = [f(center - dx), f(center + dx)];
    }

    let mut gauss = f_center * WG[3];
    let mut kronrod = f_center * WGK[7];
    let mut resabs = kronrod.abs();
    for j in 0..7 {
        let sum = fv[j][0] + fv[j][1];
        kronrod += WGK[j] * sum;
        resabs += WGK[j] * (fv[j][0].abs() + fv[j][1].abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }

    let mean = 0.5 * kronrod;
    let mut resasc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j][0] - mean).abs() + (fv[j][1] - mean).abs());
    }

    let value = kronrod * half;
    let err = rescale_error((kronrod - gauss) * half, resabs * half.abs(), resasc * half.abs());
    (value, err)
}

#[derive(Debug)]
struct Panel {
    err: f64,
    value: f64,
    a: f64,
    b: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[a, b]` to the absolute tolerance `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<QuadResult> {
    integrate_segmented(f, &[a, b], abs_tol)
}

/// Integrates `f` over the union of the panels delimited by `breakpoints`
/// (strictly increasing, at least two entries).
pub fn integrate_segmented<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
) -> Result<QuadResult> {
    if !(abs_tol.is_finite() && abs_tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "quadrature tolerance must be positive and finite, got {abs_tol}"
        )));
    }
    if breakpoints.len() < 2 {
        return Err(Error::InvalidInput(
            "need at least two breakpoints".to_string(),
        ));
    }
    for pair in breakpoints.windows(2) {
        if !(pair[0].is_finite() && pair[1].is_finite() && pair[0] < pair[1]) {
            return Err(Error::InvalidInput(format!(
                "breakpoints must be finite and strictly increasing, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }

    let mut heap = BinaryHeap::new();
    let mut total_value = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0usize;

    for pair in breakpoints.windows(2) {
        let (value, err) = kernel(&f, pair[0], pair[1]);
        evaluations += 15;
        total_value += value;
        total_err += err;
        heap.push(Panel {
            err,
            value,
            a: pair[0],
            b: pair[1],
        });
    }

    while total_err > abs_tol {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureNonConvergence {
                requested: abs_tol,
                achieved: total_err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Cannot bisect further in f64; the error estimate of this
            // panel is irreducible.
            return Err(Error::QuadratureNonConvergence {
                requested: abs_tol,
                achieved: total_err,
                intervals: heap.len() + 1,
            });
        }
        let (lv, le) = kernel(&f, worst.a, mid);
        let (rv, re) = kernel(&f, mid, worst.b);
        evaluations += 30;
        total_value += lv + rv - worst.value;
        total_err += le + re - worst.err;
        heap.push(Panel {
            err: le,
            value: lv,
            a: worst.a,
            b: mid,
        });
        heap.push(Panel {
            err: re,
            value: rv,
            a: mid,
            b: worst.b,
        });
    }

    Ok(QuadResult {
        value: total_value,
        error_estimate: total_err,
        evaluations,
        intervals: heap.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn oscillatory_integral() {
        // int_0^{5 pi} sin = 2
        let r = integrate(f64::sin, 0.0, 5.0 * PI, 1e-12).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_lorentzian_with_breakpoints() {
        let sigma = 1e-6;
        let g = move |x: f64| (sigma / PI) / (sigma * sigma + x * x);
        let exact = 2.0 / PI * (1e5f64).atan();
        let bp = [
            -1e-1, -1e-3, -1e-5, 0.0, 1e-5, 1e-3, 1e-1,
        ];
        let r = integrate_segmented(g, &bp, 1e-10).unwrap();
        assert!((r.value - exact).abs() < 1e-9, "{} vs {}", r.value, exact);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(integrate(|x| x, 0.0, 1.0, 0.0).is_err());
        assert!(integrate(|x| x, 1.0, 0.0, 1e-9).is_err());
        assert!(integrate_segmented(|x| x, &[0.0], 1e-9).is_err());
        assert!(integrate_segmented(|x| x, &[0.0, f64::NAN], 1e-9).is_err());
    }

    #[test]
    fn reports_non_convergence_with_diagnostics() {
        // Unresolvable: tolerance far below what f64 can do on this span.
        let err = integrate(|x: f64| (1e6 * x).sin().abs(), 0.0, 1000.0, 1e-18).unwrap_err();
        match err {
            Error::QuadratureNonConvergence {
                requested,
                achieved,
                intervals,
            } => {
                assert_eq!(requested, 1e-18);
                assert!(achieved > requested);
                assert!(intervals > 0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}

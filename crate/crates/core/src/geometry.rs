//! Interferometer assembly and output intensities.
//!
//! The three supported geometries, written right-to-left so the rightmost
//! factor acts first on the incoming state:
//!
//! * 3-blade: `U_B . R_x(pi) . R_z(phi) . U_B`
//! * 4-blade: `U_B . R_x(pi) . R_x(pi) . R_z(phi) . U_B`
//! * 5-blade: `U_B . R_z(chi) . R_x(pi) . U_B . R_x(pi) . R_z(phi) . U_B`
//!
//! Mirror blades are modeled as exact `R_x(pi)` pulses (post-selection on
//! the beams that stay inside the interferometer makes them perfect); the
//! 50:50 character of a physical mirror blade only shows up in the
//! throughput numbers, which [`enumerate_paths`] reproduces by brute-force
//! trajectory enumeration. That enumeration doubles as an independent
//! oracle for the matrix products.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::su2::{blade_operator, rx, rz, BladeParams, Operator2, PathState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeometryKind {
    ThreeBlade,
    FourBlade,
    FiveBlade,
}

impl GeometryKind {
    pub fn all() -> [GeometryKind; 3] {
        [Self::ThreeBlade, Self::FourBlade, Self::FiveBlade]
    }

    pub fn blade_count(self) -> usize {
        match self {
            Self::ThreeBlade => 3,
            Self::FourBlade => 4,
            Self::FiveBlade => 5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::ThreeBlade => "3-blade",
            Self::FourBlade => "4-blade",
            Self::FiveBlade => "5-blade",
        }
    }
}

/// One fully specified interferometer: geometry, blade parameters, the two
/// phase flags and the inter-blade distance unit `L`.
///
/// `chi` is only read for [`GeometryKind::FiveBlade`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerSpec {
    kind: GeometryKind,
    blade: BladeParams,
    phi: f64,
    chi: f64,
    blade_separation: f64,
}

impl InterferometerSpec {
    pub fn new(
        kind: GeometryKind,
        blade: BladeParams,
        phi: f64,
        chi: f64,
        blade_separation: f64,
    ) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::NonFinite("phi"));
        }
        if !chi.is_finite() {
            return Err(Error::NonFinite("chi"));
        }
        if !blade_separation.is_finite() || blade_separation <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "blade separation must be positive, got {blade_separation}"
            )));
        }
        Ok(Self {
            kind,
            blade,
            phi,
            chi,
            blade_separation,
        })
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn blade(&self) -> BladeParams {
        self.blade
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn blade_separation(&self) -> f64 {
        self.blade_separation
    }
}

/// Builds the full operator for the given interferometer.
pub fn assemble(spec: &InterferometerSpec) -> Operator2 {
    let blade = blade_operator(spec.blade);
    let mirror = rx(std::f64::consts::PI);
    // Listed in the order the neutron meets them; fold multiplies each new
    // element from the left.
    let sequence: &[Operator2] = match spec.kind {
        GeometryKind::ThreeBlade => &[blade, rz(spec.phi), mirror, blade],
        GeometryKind::FourBlade => &[blade, rz(spec.phi), mirror, mirror, blade],
        GeometryKind::FiveBlade => &[
            blade,
            rz(spec.phi),
            mirror,
            blade,
            mirror,
            rz(spec.chi),
            blade,
        ],
    };
    sequence
        .iter()
        .skip(1)
        .fold(sequence[0], |acc, op| op.mul(&acc))
}

/// O- and H-detector probabilities for `input` sent through `op`.
///
/// The O port is the `|I>` (forward) exit, H the `|II>` (diffracted) exit.
/// For the lossless ideal-mirror model the two sum to one.
pub fn intensities(op: &Operator2, input: &PathState) -> (f64, f64) {
    op.apply(input).probabilities()
}

/// The closed-form intensities for 50:50 blades (`alpha = pi/2`).
///
/// * 3-blade: `I_O = (1 + cos phi) / 2` — no `beta` dependence;
/// * 4-blade: `I_O = (1 - cos(phi + 2 beta)) / 2`;
/// * 5-blade: `I_O = (2 + cos(chi - phi) - cos(chi + phi)) / 4` — again
///   `beta`-free.
///
/// Serves as the analytic oracle for [`assemble`] + [`intensities`].
pub fn closed_form_intensity(
    kind: GeometryKind,
    phi: f64,
    chi: f64,
    beta: f64,
) -> (f64, f64) {
    let i_o = match kind {
        GeometryKind::ThreeBlade => 0.5 * (1.0 + phi.cos()),
        GeometryKind::FourBlade => 0.5 * (1.0 - (phi + 2.0 * beta).cos()),
        GeometryKind::FiveBlade => 0.25 * (2.0 + (chi - phi).cos() - (chi + phi).cos()),
    };
    (i_o, 1.0 - i_o)
}

/// Whether mirror blades act as lossless pi pulses or as physical 50:50
/// splitters whose transmitted branch leaves the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirrorModel {
    Ideal,
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interaction {
    Transmit,
    Reflect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitPort {
    O,
    H,
    Loss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BladeEvent {
    /// Blade index along the beam, starting at 0.
    pub blade: usize,
    pub interaction: Interaction,
}

/// One classical trajectory through the blade sequence with its accumulated
/// amplitude and exit port.
#[derive(Debug, Clone)]
pub struct BeamPath {
    pub events: Vec<BladeEvent>,
    pub amplitude: Complex64,
    pub port: ExitPort,
}

impl BeamPath {
    /// Interaction at the middle blade of a 5-blade interferometer, if this
    /// path reached it. `Transmit` tags the symmetric class (path labels
    /// preserved through the second loop), `Reflect` the antisymmetric one.
    pub fn middle_blade_interaction(&self) -> Option<Interaction> {
        self.events
            .iter()
            .find(|e| e.blade == 2)
            .map(|e| e.interaction)
    }
}

enum Element {
    Blade { index: usize, mirror: bool },
    Flag(f64),
}

fn element_sequence(kind: GeometryKind, phi: f64, chi: f64) -> Vec<Element> {
    use Element::{Blade, Flag};
    match kind {
        GeometryKind::ThreeBlade => vec![
            Blade { index: 0, mirror: false },
            Flag(phi),
            Blade { index: 1, mirror: true },
            Blade { index: 2, mirror: false },
        ],
        GeometryKind::FourBlade => vec![
            Blade { index: 0, mirror: false },
            Flag(phi),
            Blade { index: 1, mirror: true },
            Blade { index: 2, mirror: true },
            Blade { index: 3, mirror: false },
        ],
        GeometryKind::FiveBlade => vec![
            Blade { index: 0, mirror: false },
            Flag(phi),
            Blade { index: 1, mirror: true },
            Blade { index: 2, mirror: false },
            Blade { index: 3, mirror: true },
            Flag(chi),
            Blade { index: 4, mirror: false },
        ],
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Label {
    I,
    II,
}

/// Enumerates every classical trajectory through the blade sequence.
///
/// Blade amplitude factors are the entries of the blade operator:
/// `t = cos(alpha/2) e^{i beta}` and `r = i sin(alpha/2)` from `|I>`, and
/// their barred partners `tbar = t*`, `rbar = i sin(alpha/2)` from `|II>`.
/// Ideal mirrors contribute a single label-swapping branch of amplitude `i`;
/// physical mirrors also emit the transmitted branch, terminated with
/// [`ExitPort::Loss`]. Summing amplitudes per exit port and squaring
/// reproduces [`intensities`].
pub fn enumerate_paths(spec: &InterferometerSpec, mirrors: MirrorModel) -> Vec<BeamPath> {
    let elements = element_sequence(spec.kind, spec.phi, spec.chi);
    let t = Complex64::from_polar(spec.blade.transmission(), spec.blade.beta());
    let r = Complex64::new(0.0, spec.blade.reflection());
    let swap_ideal = Complex64::new(0.0, 1.0);

    let mut finished = Vec::new();
    // (position in element list, label, amplitude, events so far)
    let mut stack: Vec<(usize, Label, Complex64, Vec<BladeEvent>)> =
        vec![(0, Label::I, Complex64::new(1.0, 0.0), Vec::new())];

    while let Some((pos, label, amp, events)) = stack.pop() {
        if pos == elements.len() {
            let port = match label {
                Label::I => ExitPort::O,
                Label::II => ExitPort::H,
            };
            finished.push(BeamPath {
                events,
                amplitude: amp,
                port,
            });
            continue;
        }
        match elements[pos] {
            Element::Flag(phase) => {
                let factor = match label {
                    Label::I => Complex64::from_polar(1.0, 0.5 * phase),
                    Label::II => Complex64::from_polar(1.0, -0.5 * phase),
                };
                stack.push((pos + 1, label, amp * factor, events));
            }
            Element::Blade { index, mirror } => {
                let (stay, swap) = match label {
                    Label::I => (t, r),
                    Label::II => (t.conj(), r),
                };
                let swapped = match label {
                    Label::I => Label::II,
                    Label::II => Label::I,
                };
                let push_branch =
                    |stack: &mut Vec<_>,
                     finished: &mut Vec<BeamPath>,
                     interaction: Interaction,
                     new_label: Label,
                     factor: Complex64,
                     lost: bool| {
                        let mut ev = events.clone();
                        ev.push(BladeEvent {
                            blade: index,
                            interaction,
                        });
                        if lost {
                            finished.push(BeamPath {
                                events: ev,
                                amplitude: amp * factor,
                                port: ExitPort::Loss,
                            });
                        } else {
                            stack.push((pos + 1, new_label, amp * factor, ev));
                        }
                    };
                if mirror {
                    match mirrors {
                        MirrorModel::Ideal => {
                            push_branch(
                                &mut stack,
                                &mut finished,
                                Interaction::Reflect,
                                swapped,
                                swap_ideal,
                                false,
                            );
                        }
                        MirrorModel::Physical => {
                            // Only the Bragg-reflected branch stays aimed at
                            // the next blade.
                            push_branch(
                                &mut stack,
                                &mut finished,
                                Interaction::Reflect,
                                swapped,
                                swap,
                                false,
                            );
                            push_branch(
                                &mut stack,
                                &mut finished,
                                Interaction::Transmit,
                                label,
                                stay,
                                true,
                            );
                        }
                    }
                } else {
                    push_branch(
                        &mut stack,
                        &mut finished,
                        Interaction::Transmit,
                        label,
                        stay,
                        false,
                    );
                    push_branch(
                        &mut stack,
                        &mut finished,
                        Interaction::Reflect,
                        swapped,
                        swap,
                        false,
                    );
                }
            }
        }
    }
    finished
}

/// Coherent amplitude sums over the detector ports.
pub fn port_amplitudes(paths: &[BeamPath]) -> (Complex64, Complex64) {
    let mut o = Complex64::new(0.0, 0.0);
    let mut h = Complex64::new(0.0, 0.0);
    for p in paths {
        match p.port {
            ExitPort::O => o += p.amplitude,
            ExitPort::H => h += p.amplitude,
            ExitPort::Loss => {}
        }
    }
    (o, h)
}

/// Detector intensities obtained from the path enumeration.
pub fn intensities_from_paths(paths: &[BeamPath]) -> (f64, f64) {
    let (o, h) = port_amplitudes(paths);
    (o.norm_sqr(), h.norm_sqr())
}

/// Fraction of the incident intensity that reaches the two detectors.
///
/// With ideal mirrors this is 1. With physical 50:50 mirror blades
/// (`alpha = pi/2`) the transmitted mirror branches leave the instrument
/// and the fraction drops to 1/2, 1/4 and 1/4 for the 3-, 4- and 5-blade
/// geometries, independent of the phase flags.
pub fn throughput(spec: &InterferometerSpec, physical_mirrors: bool) -> f64 {
    let model = if physical_mirrors {
        MirrorModel::Physical
    } else {
        MirrorModel::Ideal
    };
    let (i_o, i_h) = intensities_from_paths(&enumerate_paths(spec, model));
    i_o + i_h
}

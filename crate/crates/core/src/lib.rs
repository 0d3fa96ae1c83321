//! Simulation of perfect-crystal neutron interferometers.
//!
//! A crystal blade splits the neutron beam coherently into two path states,
//! `|I>` and `|II>`, so a whole interferometer is a product of 2x2 unitaries
//! on that path qubit. This crate builds the 3-, 4-, and 5-blade Laue-type
//! geometries from composite rotations, and quantifies how two noise
//! channels degrade the interference contrast:
//!
//! * dispersion of the dynamical phase picked up in each blade over the
//!   momentum spread accepted by the crystal ([`dyndiff`]);
//! * sinusoidal mechanical vibrations of the whole crystal, translational
//!   along the reciprocal lattice vector or rotational about the beam-plane
//!   normal ([`vibration`]).
//!
//! Observable-level results (averaged interferograms, coherence sweeps,
//! density maps, refocused fringes) live in [`analysis`]. The [`selfcheck`]
//! module bundles the numerical verification suite that the `acceptance`
//! integration test and the CLI `selftest` subcommand both run.

pub mod analysis;
pub mod constants;
pub mod dyndiff;
pub mod error;
pub mod geometry;
pub mod material;
pub mod quad;
pub mod selfcheck;
pub mod special;
pub mod su2;
pub mod vibration;

pub use error::{Error, Result};
pub use special::bessel_j0;

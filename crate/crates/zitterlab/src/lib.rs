//! Numerics for the trembling motion (zitterbewegung) of a free Dirac
//! electron, treated consistently at two levels:
//!
//! * **Wavefunction level** — [`wavepacket`] synthesizes Dirac wavepackets
//!   from momentum-space amplitudes and splits their mean velocity into a
//!   ballistic part and an interference part that oscillates at angular
//!   frequency 2E; [`spectrum`] measures that frequency from sampled series.
//! * **Field-operator level** — [`fock`] builds the center-of-charge
//!   position and current operators on a truncated fermionic Fock space over
//!   the same momentum modes, where the oscillating parts become
//!   electron-positron pair creation/annihilation channels, and audits the
//!   whole decomposition against a direct construction.
//!
//! Shared machinery: [`grid`] (negation-closed momentum quadrature),
//! [`spinor`] (Dirac matrices, momentum spinors, polarization triads),
//! [`noether`] (currents, the continuity identity they satisfy, and the
//! local phase transformation that generates the center-of-charge as a
//! non-conserved charge), [`sparse`] and [`numeric`] (small utilities).

pub mod fock;
pub mod grid;
pub mod noether;
pub mod numeric;
pub mod sparse;
pub mod spectrum;
pub mod spinor;
pub mod wavepacket;

pub use grid::{GridError, GridSpec, MomentumGrid};

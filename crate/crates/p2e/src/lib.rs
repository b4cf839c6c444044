//! Exact-arithmetic scattering diagrams for the projective plane relative to a
//! smooth cubic, and the BPS / Donaldson-Thomas / Gromov-Witten invariant
//! families they compute.
//!
//! The crate builds the classical and quantum scattering diagrams whose
//! initial rays sit at the points `s_n = (n, -n^2/2)` on the parabola
//! `y = -x^2/2`, completes them to consistency order by order, reads the
//! invariants of one-dimensional semistable sheaves off the vertical rays,
//! and derives from them every related invariant family:
//!
//! - refined invariants `Omega_{d,chi}(y^{1/2})` (symmetrized intersection
//!   Poincare polynomials) and their Euler-characteristic specializations,
//! - relative BPS invariants `Omega_d = Omega_d^{P2}/(3d)` and the
//!   per-contact-point counts `N_{0,d}^k`, `m_{d,k}`,
//! - genus-0 local Gopakumar-Vafa invariants of the canonical bundle,
//! - higher-genus counts `N_{g,d}^k` through the substitution `y = e^{i hbar}`,
//! - the Nekrasov-Shatashvili style generating series in `Q`.
//!
//! Everything is exact: rationals are arbitrary precision, Laurent objects in
//! `y^{1/2}` are sparse maps, and there is no floating point on any code path
//! that produces an invariant.
//!
//! See the `examples/` directory for one runnable example per capability and
//! the `p2e` binary for the command-line front end.

pub mod affine;
pub mod cli;
pub mod engine;
pub mod hbar;
pub mod invariants;
pub mod io;
pub mod lattice;
pub mod multicover;
pub mod rational;
pub mod render;
pub mod torsion;
pub mod torus;
pub mod verify;
pub mod ylaurent;
pub mod yrational;

pub use engine::{initial_diagram, Mode, Ray, Region, ScatteringDiagram};
pub use invariants::InvariantTable;
pub use lattice::LatticeClass;
pub use rational::Q;
pub use ylaurent::YLaurent;
pub use yrational::YRational;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integrity fault: {0}")]
    Integrity(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn integrity(msg: impl Into<String>) -> Self {
        Error::Integrity(msg.into())
    }
}

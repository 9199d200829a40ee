//! Growth-fragmentation processes driven by ricocheted stable Lévy
//! processes.
//!
//! The crate simulates cell trees and spine processes pathwise, evaluates
//! the closed-form exponents, cumulants and first-passage densities that
//! govern them, and ships a seeded statistical harness that confirms the
//! analytic identities against simulation at desk scale.
//!
//! Module map:
//!
//! * [`specfun`] / [`quad`] — special-function and quadrature kernels
//! * [`stable`] — stable-process parameterization, sampling, paths
//! * [`ricochet`] — the ricocheted stable process and its Lévy exponent
//! * [`lamperti`] — the pssMp <-> Lévy bijection on sampled paths
//! * [`cumulant`] — cell exponent, dislocation measure, cumulants, roots
//! * [`gf`] — the growth-fragmentation cell system and freezing lines
//! * [`verify`] — closed-form densities and the statistical test suite
//! * [`cli`] — batch front door used by the `gfr` binary
//!
//! The runnable `examples/` directory exercises each capability end to end.

pub mod cli;
pub mod cumulant;
pub mod error;
pub mod gf;
pub mod lamperti;
pub mod quad;
pub mod ricochet;
pub mod rng;
pub mod specfun;
pub mod stable;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};

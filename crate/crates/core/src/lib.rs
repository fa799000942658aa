//! Pseudo-spectral laboratory for small perturbations of a magnetised,
//! inviscid, resistive, isentropic compressible fluid on the periodic unit box.
//!
//! The modules follow the pipeline of an experiment: [`spectral`] fields and
//! operators, the non-resonance analysis of the background field in
//! [`diophantine`], the mode-wise [`linear`] spectrum, the nonlinear [`solver`],
//! energy [`diagnostics`], preset [`scenario`]s and the file formats in [`io`].
//! The guide in `book/` walks through each of them; its snippets run as doc-tests.

pub mod diagnostics;
pub mod diophantine;
pub mod error;
pub mod io;
pub mod linear;
pub mod pressure;
pub mod scenario;
pub mod solver;
pub mod spectral;
pub mod state;

pub use error::{Error, Result};
pub use state::PerturbationState;

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
    #[doc = include_str!("../../../book/src/spectral.md")]
    struct Spectral;
    #[doc = include_str!("../../../book/src/diophantine.md")]
    struct Diophantine;
    #[doc = include_str!("../../../book/src/linear.md")]
    struct Linear;
    #[doc = include_str!("../../../book/src/solver.md")]
    struct Solver;
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    struct Diagnostics;
    #[doc = include_str!("../../../book/src/formats.md")]
    struct Formats;
}

//! Simulation and analysis of frequency-domain time-reversal precoded
//! MISO-OFDM links with a configurable back-off factor.
//!
//! The crate has three layers:
//!
//! * [`specfun`] and the random-variate module [`randdist`] provide the
//!   numerical machinery: incomplete gamma functions (including the
//!   generalization to non-positive order), modified Bessel functions of the
//!   second kind, Lah numbers, and the distribution of the effective gain
//!   magnitude at an unintended position.
//! * [`channel`] and [`link`] simulate the physical layer: tapped-delay-line
//!   channels, spreading across subcarriers, per-subcarrier MMSE
//!   equalization, and Monte-Carlo NMSE estimation over channel and
//!   spreading-code realizations, with the noise average taken in closed
//!   form per realization.
//! * [`analytic`] evaluates the same NMSE through numerical quadrature of
//!   the exact integrals, through closed-form expressions built from
//!   incomplete gamma functions, and through high- and low-SNR asymptotes.
//!
//! The three NMSE paths are independent implementations and are held against
//! each other in the test suite.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod link;
pub mod randdist;
pub mod specfun;

pub(crate) mod quad;

pub use error::{Error, Result};

/// Compiles and runs the code samples embedded in the guide under `book/`,
/// so the prose cannot drift from the API. The items exist only for rustdoc
/// to collect the examples.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;

    #[doc = include_str!("../../../book/src/model.md")]
    pub struct Model;

    #[doc = include_str!("../../../book/src/intended.md")]
    pub struct Intended;

    #[doc = include_str!("../../../book/src/unintended.md")]
    pub struct Unintended;

    #[doc = include_str!("../../../book/src/specfun.md")]
    pub struct Specfun;

    #[doc = include_str!("../../../book/src/experiments.md")]
    pub struct Experiments;
}

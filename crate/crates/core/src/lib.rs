//! Simulation and verification toolkit for the oriented swap process.
//!
//! The oriented swap process starts from the identity permutation of
//! `1..=n` and swaps every adjacent increasing pair at rate 1 until the
//! reverse permutation is reached. Restricting attention to labels `<= k`
//! yields a totally asymmetric exclusion process (TASEP), and all such
//! processes are built here from one shared family of per-bond Poisson
//! clocks, so identities between them can be checked pathwise.
//!
//! Module map:
//!
//! * [`perm`] and [`enumerate`]: permutations, sorting operators, exact
//!   laws of the discrete-time chains.
//! * [`clock`] and [`schedule`]: reproducible ring-time streams and the
//!   drivers that replay them.
//! * [`sim`]: the continuous-time process and its time-change variants.
//! * [`tasep`]: exclusion configurations, the cut-off/push-back/jump
//!   operators, windowed infinite-line dynamics and second-class particles.
//! * [`limits`], [`tracy_widom`], [`lpp`]: limiting objects and the
//!   last-passage oracle.
//! * [`stats`] and [`harness`]: statistics and experiment orchestration.

pub mod clock;
pub mod enumerate;
pub mod error;
pub mod harness;
pub mod identities;
pub mod limits;
pub mod lpp;
pub mod perm;
pub mod quad;
pub mod schedule;
pub mod sim;
pub mod stats;
pub mod tasep;
pub mod tracy_widom;

pub use error::{Error, Result};
pub use perm::Permutation;

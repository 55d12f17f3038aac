//! Exclusion processes coupled to the swap process.
//!
//! * [`config`]: configurations with a rightmost particle, the operators
//!   `R_k` (cut-off), `B_n` (push-back), `J_m` (jump), projections `T_k`,
//!   and compatible pairs with a second-class particle.
//! * [`dense`]: a slow site-by-site reference for the same operators.
//! * [`lattice`]: ring-driven dynamics on intervals and on the whole line.
//! * [`coupling`]: pathwise checks tying all of these to the swap process.

pub mod config;
pub mod coupling;
pub mod dense;
pub mod lattice;

pub use config::{BinaryConfig, SecondClassPair};
pub use coupling::{check_coupling, CouplingReport};
pub use lattice::{second_class_trajectory, simulate_tasep, Region, SecondClassRun, TasepConfig, TasepRun, WindowPolicy};

//! Monte Carlo laboratory for U-statistics indexed by a stable random walk in
//! random scenery.
//!
//! The walk `S_n` takes iid lattice steps attracted to an `alpha`-stable law,
//! the scenery `xi(x)` is an iid field on the lattice, and the object of study
//! is `U_n = sum_{i<j} h(xi(S_i), xi(S_j))` for a symmetric kernel `h`,
//! together with its Hoeffding split `U_n = (n-1) L_n + R_n`.

pub mod error;
pub mod limit;
pub mod rng;
pub mod scenery;
pub mod stable;
pub mod stats;
pub mod ustat;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};

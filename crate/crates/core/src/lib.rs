//! Numerical engine for the Selberg zeta function of the modular group.
//!
//! The library evaluates the smoothed geodesic sum `psi_s(x)` attached to
//! `Z'/Z` for `SL(2,Z)` along two fully independent routes:
//!
//! * the geodesic side, enumerating discriminants, narrow class numbers
//!   (as `rho`-cycles of reduced indefinite forms) and fundamental Pell
//!   units, and
//! * the L-function side, enumerating integer traces `t` and evaluating
//!   the divisor-structured value `L(1, t^2 - 4)` from real Dirichlet
//!   characters.
//!
//! The agreement of the two routes, per trace and per strip point, is the
//! correctness contract of the whole crate; `cli` packages those checks as
//! verification suites next to the growth-scan experiment along vertical
//! lines in the critical strip.

// divisibility is written `n % p == 0` throughout; reference constants
// keep the digits of the oracle they were computed with
#![allow(clippy::manual_is_multiple_of, clippy::excessive_precision)]

pub mod arith;
pub mod cli;
mod error;
pub mod expsum;
pub mod lfunc;
pub mod pell;
pub mod quadforms;
pub mod selberg;
mod sum;

pub use error::{Error, Result};

//! Exact verification of two q-series identities and of each step of their
//! q-Rice formula proofs.
//!
//! Values are computed either at exact rational points or as truncated
//! power series in `q`; the [`verifier`] samples pole-free points and runs
//! the checks as suites, in parallel when the `parallel` feature is on.

pub mod cli;
pub mod error;
pub mod identities;
pub mod qprim;
pub mod rational;
pub mod series;
pub mod verifier;

pub use error::{Error, Result};
pub use identities::{EvalMode, Side, SideValue};
pub use qprim::QPoint;
pub use rational::Rational;
pub use series::{TruncSeries, WPoly};

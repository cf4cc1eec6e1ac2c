//! Property testers for k-piecewise functions on `[0, 1]`.
//!
//! A function is *k-piecewise* over a base class `H` when `[0, 1]` splits
//! into `k` consecutive intervals on each of which it equals some member of
//! `H`. This crate tests that property from random samples: it estimates a
//! class-aware noise sensitivity of the target and compares it against what
//! any k-piecewise function could produce.
//!
//! * [`class`]: base classes (constants, degree-`p` polynomials, shifted
//!   sines) and anchored disagreement minimization.
//! * [`piecewise`], [`oracle`], [`report`]: targets, budgeted sample/query
//!   access, verdicts.
//! * [`ns`]: ground-truth noise sensitivity and the two empirical estimators.
//! * [`testers`]: the general active tester, the birthday-pairing tester for
//!   piecewise constants, learn-then-validate, and the exact polynomial
//!   tester.
//! * [`distance`], [`instances`]: distance oracles and certified instance
//!   generators for checking all of the above.

pub mod class;
pub mod distance;
mod error;
pub mod instances;
pub mod interp;
pub mod ns;
pub mod oracle;
pub mod piecewise;
pub mod report;
pub mod seed;
pub mod testers;

pub use class::{BaseClass, Class, ClassKind, Member, Tolerance, ValuePoint};
pub use error::{Error, Result};
pub use oracle::{QueryCounting, TargetOracle};
pub use piecewise::{PiecewiseFunction, Target};
pub use report::{FailureEvent, TesterReport, Verdict};

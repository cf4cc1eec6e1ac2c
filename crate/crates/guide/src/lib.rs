//! The book's chapters as doc comments, so `cargo test` runs every listing
//! against the current library. One module per chapter keeps failures easy
//! to place.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/piecewise.md")]
pub mod piecewise {}
#[doc = include_str!("../../../book/src/noise-sensitivity.md")]
pub mod noise_sensitivity {}
#[doc = include_str!("../../../book/src/active-tester.md")]
pub mod active_tester {}
#[doc = include_str!("../../../book/src/constant-tester.md")]
pub mod constant_tester {}
#[doc = include_str!("../../../book/src/baselines.md")]
pub mod baselines {}
#[doc = include_str!("../../../book/src/distance.md")]
pub mod distance {}
#[doc = include_str!("../../../book/src/harness.md")]
pub mod harness {}

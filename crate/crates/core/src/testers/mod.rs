//! Decision procedures.

mod constant;
mod fit;
mod general;
mod learn_validate;
pub mod params;
mod poly_exact;

pub use constant::constant_test;
pub use fit::fit_consistent_piecewise;
pub use general::active_test_general;
pub use learn_validate::learn_validate_test;
pub use poly_exact::poly_exact_test;

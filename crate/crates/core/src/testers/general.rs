use crate::class::BaseClass;
use crate::error::Result;
use crate::ns::ns_hat_general;
use crate::oracle::TargetOracle;
use crate::report::TesterReport;
use crate::testers::params::ActiveParams;

/// Active tester for `F_k(H)`: accept iff the general noise-sensitivity
/// estimate is at most `(k-1)(delta/2)(1+eps/8)`.
///
/// The oracle should carry `params.s` samples and
/// `params.effective_queries()` queries.
pub fn active_test_general(
    oracle: &mut TargetOracle<'_>,
    class: &dyn BaseClass,
    params: &ActiveParams,
) -> Result<TesterReport> {
    let est = ns_hat_general(oracle, class, params)?;
    Ok(TesterReport::from_oracle(oracle, est.estimate.value, params.threshold, est.failure))
}

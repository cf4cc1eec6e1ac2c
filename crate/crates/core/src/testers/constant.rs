use crate::error::Result;
use crate::ns::ns_hat_pairs;
use crate::oracle::TargetOracle;
use crate::report::TesterReport;
use crate::testers::params::{ConstantParams, Mode};

/// Birthday-pairing tester for piecewise-constant functions, active or
/// passive. Accept iff the pair estimate is at most the threshold.
pub fn constant_test(
    oracle: &mut TargetOracle<'_>,
    params: &ConstantParams,
    mode: Mode,
) -> Result<TesterReport> {
    let est = ns_hat_pairs(oracle, params, mode)?;
    Ok(TesterReport::from_oracle(oracle, est.estimate.value, params.threshold, est.failure))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::Member;
    use crate::piecewise::PiecewiseFunction;
    use crate::report::{FailureEvent, Verdict};

    #[test]
    fn budgets_and_verdicts() {
        let params = ConstantParams::new(0.4, 200, 1.0).unwrap();
        let f = PiecewiseFunction::single(Member::Constant(0.0));
        for mode in [Mode::Active, Mode::Passive] {
            let mut o = TargetOracle::new(&f, params.s_prime, params.queries(mode), 2);
            let r = constant_test(&mut o, &params, mode).unwrap();
            assert_eq!(r.verdict, Verdict::Accept);
            assert_eq!(r.samples_used, params.s_prime);
            assert_eq!(r.queries_used, params.queries(mode));
        }
    }

    #[test]
    fn insufficient_pairs_accepts_with_flag() {
        // A tiny block size makes qualifying pairs rare.
        let mut params = ConstantParams::with_delta(0.4, 2, 1e-4, 1.0).unwrap();
        params.n = 3;
        params.s_prime = 4 * params.n * params.m_prime;
        let f = PiecewiseFunction::single(Member::Constant(0.0));
        let mut o = TargetOracle::new(&f, params.s_prime, params.queries(Mode::Active), 2);
        let r = constant_test(&mut o, &params, Mode::Active).unwrap();
        assert_eq!(r.failure_event, Some(FailureEvent::InsufficientPairs));
        assert_eq!(r.verdict, Verdict::Accept);
    }
}

use crate::class::{BaseClass, ValuePoint};
use crate::error::Result;
use crate::oracle::TargetOracle;
use crate::report::{TesterReport, Verdict};
use crate::testers::fit::fit_consistent_piecewise;
use crate::testers::params::LearnValidateParams;

/// Learn-then-validate tester.
///
/// Labels `train_size + validate_size` samples, fits a consistent member of
/// `F_k(H)` on the training split only, and accepts iff it agrees with at
/// least `(1 - eps/2) validate_size` validation labels. No consistent fit
/// rejects.
///
/// The report's statistic is the validation disagreement count (one more than
/// the split size when no fit exists); the threshold is the number of
/// disagreements the agreement rule tolerates.
pub fn learn_validate_test(
    oracle: &mut TargetOracle<'_>,
    class: &dyn BaseClass,
    params: &LearnValidateParams,
) -> Result<TesterReport> {
    let train = oracle.draw(params.train_size)?;
    let validate = oracle.draw(params.validate_size)?;
    let mut train_points = Vec::with_capacity(train.len());
    for i in train {
        train_points.push(ValuePoint::new(oracle.point(i), oracle.query(i)?));
    }
    let mut validate_points = Vec::with_capacity(validate.len());
    for i in validate {
        validate_points.push(ValuePoint::new(oracle.point(i), oracle.query(i)?));
    }
    train_points.sort_by(|a, b| a.x.total_cmp(&b.x));

    let tol = class.tolerance();
    let total = params.validate_size;
    let threshold = total as f64 - params.agreement_threshold;
    let (statistic, verdict) = match fit_consistent_piecewise(&train_points, class, params.k)? {
        None => ((total + 1) as f64, Verdict::Reject),
        Some(g) => {
            let agreements =
                validate_points.iter().filter(|p| tol.agree(g.evaluate(p.x), p.y)).count();
            let verdict = if agreements as f64 >= params.agreement_threshold {
                Verdict::Accept
            } else {
                Verdict::Reject
            };
            ((total - agreements) as f64, verdict)
        }
    };
    let mut report = TesterReport::from_oracle(oracle, statistic, threshold, None);
    report.verdict = verdict;
    Ok(report)
}

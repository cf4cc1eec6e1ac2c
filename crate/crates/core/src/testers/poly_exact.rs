use crate::class::Tolerance;
use crate::error::{Error, Result};
use crate::interp::NewtonPoly;
use crate::oracle::TargetOracle;
use crate::report::TesterReport;
use crate::testers::params::poly_validation_size;

/// Exact tester for single degree-`p` polynomials.
///
/// Interpolates through the first `p + 1` samples and accepts iff the
/// interpolant matches all `ceil(ln 3 / eps)` further samples. A repeated
/// abscissa among the interpolation nodes is redrawn once if the budget
/// allows, and is an error otherwise. Statistic: validation mismatches;
/// threshold: 0.
pub fn poly_exact_test(oracle: &mut TargetOracle<'_>, p: usize, eps: f64) -> Result<TesterReport> {
    let tol = Tolerance::default();
    let mut nodes = oracle.draw(p + 1)?;
    let mut newton = NewtonPoly::default();
    let mut attempts = 0;
    loop {
        let xs: Vec<f64> = nodes.clone().map(|i| oracle.point(i)).collect();
        let mut ys = Vec::with_capacity(xs.len());
        for i in nodes.clone() {
            ys.push(oracle.query(i)?);
        }
        match newton.refit(&xs, &ys) {
            Ok(()) => break,
            Err(Error::DuplicateX(x)) if attempts == 0 => {
                attempts += 1;
                nodes = oracle.draw(p + 1).map_err(|_| Error::DuplicateX(x))?;
            }
            Err(e) => return Err(e),
        }
    }
    let validation = oracle.draw(poly_validation_size(eps))?;
    let mut mismatches = 0usize;
    for i in validation {
        let y = oracle.query(i)?;
        if !tol.agree(newton.eval(oracle.point(i)), y) {
            mismatches += 1;
        }
    }
    Ok(TesterReport::from_oracle(oracle, mismatches as f64, 0.0, None))
}

//! Sample/query budgets and thresholds for every tester.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Ceiling that ignores floating-point noise sitting just above an integer,
/// so that e.g. `1 / 0.2^4` sizes to 625 rather than 626.
pub fn ceil_exact(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(invalid(format!("eps = {eps} outside (0, 1/2)")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {v} must be positive")))
    }
}

/// `delta = eps^2 / (32 k)`.
pub fn derive_delta(eps: f64, k: usize) -> Result<f64> {
    check_eps(eps)?;
    if k < 2 {
        return Err(invalid(format!("k = {k} must be at least 2")));
    }
    Ok(eps * eps / (32.0 * k as f64))
}

/// Acceptance threshold `(k-1)(delta/2)(1+eps/8)` shared by the
/// noise-sensitivity testers.
pub fn ns_threshold(k: usize, delta: f64, eps: f64) -> f64 {
    (k as f64 - 1.0) * (delta / 2.0) * (1.0 + eps / 8.0)
}

/// Whether `(eps, k)` is in the regime `k >= 80/eps` where the
/// noise-sensitivity testers apply.
pub fn ns_regime(eps: f64, k: usize) -> bool {
    k as f64 >= 80.0 / eps
}

/// Numerical constants `c`, `c'`, `c''` of the general active tester.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveConstants {
    pub c: f64,
    pub c_prime: f64,
    pub c_double_prime: f64,
}

impl Default for ActiveConstants {
    fn default() -> Self {
        Self { c: 1.0, c_prime: 1.0, c_double_prime: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveParams {
    pub eps: f64,
    pub k: usize,
    pub d: usize,
    pub delta: f64,
    pub constants: ActiveConstants,
    /// Anchors.
    pub m: usize,
    /// Neighbors per anchor.
    pub ell: usize,
    /// Samples.
    pub s: usize,
    /// Nominal queries `m (ell + 1)`; may exceed `s`.
    pub q: usize,
    pub threshold: f64,
}

impl ActiveParams {
    /// Parameters for the regime `k >= 80/eps`; outside it use
    /// [`plan_active`], which routes to learn-then-validate.
    pub fn new(eps: f64, k: usize, d: usize, constants: ActiveConstants) -> Result<Self> {
        let delta = derive_delta(eps, k)?;
        if !ns_regime(eps, k) {
            return Err(invalid(format!("k = {k} < 80/eps; use learn-then-validate")));
        }
        Self::with_delta(eps, k, d, delta, constants)
    }

    /// Same schedule with an explicit `delta` and no regime check, for
    /// studying the estimator on its own.
    pub fn with_delta(
        eps: f64,
        k: usize,
        d: usize,
        delta: f64,
        constants: ActiveConstants,
    ) -> Result<Self> {
        check_eps(eps)?;
        check_positive("delta", delta)?;
        if d == 0 {
            return Err(invalid("graph dimension must be positive"));
        }
        let ActiveConstants { c, c_prime, c_double_prime } = constants;
        check_positive("c", c)?;
        check_positive("c'", c_prime)?;
        check_positive("c''", c_double_prime)?;
        let e4 = eps.powi(4);
        let m = ceil_exact(c / e4).max(1);
        let ell = ceil_exact(c_prime * d as f64 / e4 * (c_double_prime / eps).ln()).max(1);
        let s = m + pool_size(m, ell, delta);
        Ok(Self {
            eps,
            k,
            d,
            delta,
            constants,
            m,
            ell,
            s,
            q: m * (ell + 1),
            threshold: ns_threshold(k, delta, eps),
        })
    }

    /// Queries actually budgeted: when `q > s` every sample is labeled instead.
    pub fn effective_queries(&self) -> usize {
        self.q.min(self.s)
    }

    pub fn queries_all(&self) -> bool {
        self.q > self.s
    }
}

fn pool_size(m: usize, ell: usize, delta: f64) -> usize {
    let by_neighbors = 2.0 * ell as f64 / delta;
    let by_union = 8.0 / delta * (12.0 * m as f64).ln();
    ceil_exact(by_neighbors.max(by_union))
}

/// Budgets implied by the constants the correctness argument actually needs.
///
/// `m` comes from a multiplicative Chernoff bound (relative deviation
/// `eps/33` at mean at least `eps^2/65`, failure `1/12`); `ell` is the
/// smallest value with `4 (d ln(2 e ell / d) + ln(96 m)) / ell` at most
/// `eps^4 / (65 * 68 * 33)`. Reported, never run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryBudget {
    pub m: usize,
    pub ell: usize,
    pub s: usize,
    pub q: usize,
}

pub fn theory_budget(eps: f64, k: usize, d: usize) -> Result<TheoryBudget> {
    let delta = derive_delta(eps, k)?;
    let e4 = eps.powi(4);
    let m = ceil_exact(3.0 * 12f64.ln() * 65.0 * 33.0 * 33.0 / e4);
    let target = e4 / (65.0 * 68.0 * 33.0);
    let dim = d.max(1) as f64;
    let deviation = |ell: f64| {
        4.0 * (dim * (2.0 * std::f64::consts::E * ell / dim).ln() + (96.0 * m as f64).ln()) / ell
    };
    // deviation() is decreasing for ell beyond a few d; double then bisect.
    let mut hi = 1.0f64;
    while deviation(hi) > target {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    while hi - lo > 0.5 {
        let mid = (lo + hi) / 2.0;
        if deviation(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let ell = hi.ceil() as usize;
    let s = m + pool_size(m, ell, delta);
    Ok(TheoryBudget { m, ell, s, q: m * (ell + 1) })
}

/// Parameters of the birthday-pairing tester for piecewise constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantParams {
    pub eps: f64,
    pub k: usize,
    pub delta: f64,
    pub c: f64,
    /// Pairs `m'`.
    pub m_prime: usize,
    /// Block size `n`.
    pub n: usize,
    /// Samples `s' = 4 n m'`.
    pub s_prime: usize,
    pub threshold: f64,
}

impl ConstantParams {
    pub fn new(eps: f64, k: usize, c: f64) -> Result<Self> {
        let delta = derive_delta(eps, k)?;
        if !ns_regime(eps, k) {
            return Err(invalid(format!("k = {k} < 80/eps; use learn-then-validate")));
        }
        Self::with_delta(eps, k, delta, c)
    }

    /// Explicit `delta`, no regime check.
    pub fn with_delta(eps: f64, k: usize, delta: f64, c: f64) -> Result<Self> {
        check_eps(eps)?;
        check_positive("delta", delta)?;
        check_positive("c", c)?;
        let m_prime = ceil_exact(c / eps.powi(4)).max(1);
        let n = block_size(delta);
        Ok(Self {
            eps,
            k,
            delta,
            c,
            m_prime,
            n,
            s_prime: 4 * n * m_prime,
            threshold: ns_threshold(k, delta, eps),
        })
    }

    pub fn queries(&self, mode: Mode) -> usize {
        match mode {
            Mode::Active => 2 * self.m_prime,
            Mode::Passive => self.s_prime,
        }
    }

    pub fn blocks(&self) -> usize {
        self.s_prime / self.n
    }
}

/// `n = 1 + ceil(2 sqrt(ceil(1/delta)))`.
pub fn block_size(delta: f64) -> usize {
    1 + ceil_exact(2.0 * (ceil_exact(1.0 / delta) as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Active,
    Passive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnValidateConstants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for LearnValidateConstants {
    fn default() -> Self {
        Self { c1: 1.0, c2: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnValidateParams {
    pub eps: f64,
    pub k: usize,
    pub d: usize,
    pub constants: LearnValidateConstants,
    pub train_size: usize,
    pub validate_size: usize,
    /// Minimum validation agreements for acceptance, `(1 - eps/2) * validate_size`.
    pub agreement_threshold: f64,
}

impl LearnValidateParams {
    pub fn new(eps: f64, k: usize, d: usize, constants: LearnValidateConstants) -> Result<Self> {
        check_eps(eps)?;
        check_positive("c1", constants.c1)?;
        check_positive("c2", constants.c2)?;
        if k == 0 || d == 0 {
            return Err(invalid("k and d must be positive"));
        }
        let kf = k as f64;
        let train_size = ceil_exact(
            constants.c1 * d as f64 * kf / eps
                * (2.0 * std::f64::consts::E * kf).ln()
                * (1.0 / eps).ln(),
        );
        let validate_size = ceil_exact(constants.c2 / eps);
        Ok(Self {
            eps,
            k,
            d,
            constants,
            train_size,
            validate_size,
            agreement_threshold: (1.0 - eps / 2.0) * validate_size as f64,
        })
    }

    /// Samples and queries: the learner labels everything it draws.
    pub fn budget(&self) -> usize {
        self.train_size + self.validate_size
    }

    /// Upper bound `4 d k log2(2 e k)` on the graph dimension of `F_k(H)`.
    pub fn graph_dimension_bound(&self) -> f64 {
        graph_dimension_bound(self.d, self.k)
    }
}

pub fn graph_dimension_bound(d: usize, k: usize) -> f64 {
    let kf = k as f64;
    4.0 * d as f64 * kf * (2.0 * std::f64::consts::E * kf).log2()
}

/// Budget `(p + 1) + ceil(ln 3 / eps)` of the exact polynomial tester.
pub fn poly_exact_budget(p: usize, eps: f64) -> Result<usize> {
    check_positive("eps", eps)?;
    Ok(p + 1 + poly_validation_size(eps))
}

pub(crate) fn poly_validation_size(eps: f64) -> usize {
    ceil_exact(3f64.ln() / eps)
}

/// Which procedure a `(eps, k)` pair calls for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plan<P> {
    NoiseSensitivity(P),
    LearnValidate(LearnValidateParams),
}

pub fn plan_active(
    eps: f64,
    k: usize,
    d: usize,
    constants: ActiveConstants,
    fallback: LearnValidateConstants,
) -> Result<Plan<ActiveParams>> {
    if ns_regime(eps, k) {
        ActiveParams::new(eps, k, d, constants).map(Plan::NoiseSensitivity)
    } else {
        LearnValidateParams::new(eps, k, d, fallback).map(Plan::LearnValidate)
    }
}

pub fn plan_constant(
    eps: f64,
    k: usize,
    c: f64,
    fallback: LearnValidateConstants,
) -> Result<Plan<ConstantParams>> {
    if ns_regime(eps, k) {
        ConstantParams::new(eps, k, c).map(Plan::NoiseSensitivity)
    } else {
        LearnValidateParams::new(eps, k, 1, fallback).map(Plan::LearnValidate)
    }
}

//! The non-trial subcommands: parameter listings, distance certificates and
//! noise-sensitivity comparisons.

use anyhow::{bail, Context};
use serde::Serialize;

use pwtest::distance::{certify_grid, certify_step, DistanceCertificate, StepFunction};
use pwtest::instances::{Instance, TargetSpec};
use pwtest::ns::{ns_true_mc_with, NsEstimate};
use pwtest::seed::substream;
use pwtest::testers::params::{
    derive_delta, graph_dimension_bound, ns_regime, theory_budget, ActiveParams, ConstantParams,
    LearnValidateParams, Mode, TheoryBudget,
};
use pwtest::{BaseClass, Class, ClassKind, Member, PiecewiseFunction, TargetOracle};

use crate::config::{Constants, RunConfig, TesterKind};
use crate::runner::Procedure;

#[derive(Debug, Serialize)]
pub struct ActiveListing {
    pub m: usize,
    pub ell: usize,
    pub s: usize,
    pub q: usize,
    pub effective_q: usize,
}

#[derive(Debug, Serialize)]
pub struct ConstantListing {
    pub m_prime: usize,
    pub n: usize,
    pub s_prime: usize,
    pub q_active: usize,
    pub q_passive: usize,
}

#[derive(Debug, Serialize)]
pub struct LearnValidateListing {
    pub train_size: usize,
    pub validate_size: usize,
    pub agreement_threshold: f64,
    pub graph_dimension_bound: f64,
}

#[derive(Debug, Serialize)]
pub struct ParamsListing {
    pub eps: f64,
    pub k: usize,
    pub d: usize,
    pub delta: f64,
    pub threshold: f64,
    /// Whether `k >= 80/eps`, where the noise-sensitivity testers apply.
    pub ns_regime: bool,
    pub routed_procedure: String,
    pub active: Option<ActiveListing>,
    pub constant: Option<ConstantListing>,
    pub learn_validate: LearnValidateListing,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theory: Option<TheoryBudget>,
}

/// Derived budgets for `(eps, k, d)` under `constants`. The active and
/// constant listings are computed even outside the regime, for reference.
pub fn params(
    eps: f64,
    k: usize,
    d: usize,
    constants: &Constants,
    tester: TesterKind,
    theory: bool,
) -> anyhow::Result<ParamsListing> {
    let delta = derive_delta(eps, k)?;
    let active = ActiveParams::with_delta(eps, k, d, delta, constants.active())?;
    let constant = ConstantParams::with_delta(eps, k, delta, constants.c)?;
    let lv = LearnValidateParams::new(eps, k, d, constants.learn_validate())?;
    let routed = Procedure::resolve(&RunConfig {
        tester,
        k,
        eps,
        constants: *constants,
        class: if d == 1 { ClassKind::Constants } else { ClassKind::Polynomials { degree: d - 1 } },
        ..Default::default()
    })?;
    Ok(ParamsListing {
        eps,
        k,
        d,
        delta,
        threshold: active.threshold,
        ns_regime: ns_regime(eps, k),
        routed_procedure: routed.name().into(),
        active: Some(ActiveListing {
            m: active.m,
            ell: active.ell,
            s: active.s,
            q: active.q,
            effective_q: active.effective_queries(),
        }),
        constant: Some(ConstantListing {
            m_prime: constant.m_prime,
            n: constant.n,
            s_prime: constant.s_prime,
            q_active: constant.queries(Mode::Active),
            q_passive: constant.queries(Mode::Passive),
        }),
        learn_validate: LearnValidateListing {
            train_size: lv.train_size,
            validate_size: lv.validate_size,
            agreement_threshold: lv.agreement_threshold,
            graph_dimension_bound: graph_dimension_bound(d, k),
        },
        theory: if theory { Some(theory_budget(eps, k, d)?) } else { None },
    })
}

/// Reads either a full [`Instance`] or a bare [`TargetSpec`].
pub fn read_target(text: &str) -> anyhow::Result<TargetSpec> {
    if let Ok(inst) = serde_json::from_str::<Instance>(text) {
        return Ok(inst.target);
    }
    serde_json::from_str::<TargetSpec>(text).context("expected an instance or target JSON document")
}

/// Distance certificate of `target` against `F_k(class)`: exact for step
/// and piecewise-constant targets against constants, grid-based otherwise.
pub fn dist(
    id: &str,
    target: &TargetSpec,
    class: &Class,
    k: usize,
    grid: usize,
) -> anyhow::Result<DistanceCertificate> {
    let step = match (target, class.kind) {
        (TargetSpec::Step(f), ClassKind::Constants) => Some(f.clone()),
        (TargetSpec::Piecewise(f), ClassKind::Constants) => step_of(f),
        _ => None,
    };
    Ok(match step {
        Some(f) => certify_step(id, &f, k)?,
        None => certify_grid(id, target, class, k, grid)?,
    })
}

fn step_of(f: &PiecewiseFunction) -> Option<StepFunction> {
    let values = f
        .pieces()
        .iter()
        .map(|m| match m {
            Member::Constant(v) => Some(*v),
            _ => None,
        })
        .collect::<Option<Vec<_>>>()?;
    // Drop repeated or boundary breakpoints along with their empty pieces.
    let mut bps = Vec::new();
    let mut vals = vec![values[0]];
    for (t, v) in f.breakpoints().iter().zip(&values[1..]) {
        if *t <= 0.0 {
            vals[0] = *v;
            continue;
        }
        if *t >= 1.0 || bps.last() == Some(t) {
            if bps.last() == Some(t) {
                *vals.last_mut().unwrap() = *v;
            }
            continue;
        }
        bps.push(*t);
        vals.push(*v);
    }
    StepFunction::new(bps, vals).ok()
}

#[derive(Debug, Serialize)]
pub struct NsComparison {
    pub delta: f64,
    pub k: usize,
    /// `(k - 1) delta / 2`, the bound for members of `F_k(H)`.
    pub bound: f64,
    pub ground_truth: NsEstimate,
    /// Mean and standard error of the birthday-pair estimator over trials,
    /// for piecewise-constant targets under the constants class.
    pub pair_estimator: Option<NsEstimate>,
    pub pair_failures: usize,
}

pub fn ns(
    target: &TargetSpec,
    class: &Class,
    k: usize,
    delta: f64,
    anchors: usize,
    inner_probes: usize,
    estimator_trials: usize,
    seed: u64,
) -> anyhow::Result<NsComparison> {
    if !(delta > 0.0 && delta < 0.5) {
        bail!("delta = {delta} outside (0, 1/2)");
    }
    let ground_truth =
        ns_true_mc_with(target, class, delta, anchors, substream(seed, 0), inner_probes)?;
    let mut pair_estimator = None;
    let mut pair_failures = 0;
    if class.kind == ClassKind::Constants && estimator_trials > 0 {
        let params = ConstantParams::with_delta(0.4, k.max(2), delta, 1.0)?;
        let mut values = Vec::with_capacity(estimator_trials);
        for t in 0..estimator_trials {
            let mut o = TargetOracle::new(
                target,
                params.s_prime,
                params.queries(Mode::Active),
                substream(substream(seed, 1), t as u64),
            );
            let est = pwtest::ns::ns_hat_pairs(&mut o, &params, Mode::Active)?;
            pair_failures += est.failure.is_some() as usize;
            values.push(est.estimate.value);
        }
        pair_estimator = Some(mean_estimate(&values));
    }
    Ok(NsComparison {
        delta,
        k,
        bound: (k.max(1) - 1) as f64 * delta / 2.0,
        ground_truth,
        pair_estimator,
        pair_failures,
    })
}

fn mean_estimate(values: &[f64]) -> NsEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    NsEstimate { value: mean, std_error: (var / n).sqrt(), used: values.len() }
}

/// Graph dimension of a class, for `params --class`.
pub fn dimension(kind: ClassKind) -> usize {
    Class { kind, tolerance: Default::default() }.graph_dimension()
}

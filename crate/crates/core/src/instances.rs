//! Synthetic targets: in-class members, certified far instances, and the
//! random binary partitions used in the lower-bound construction.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::class::{BaseClass, Class, ClassKind, Member, CONSTANT_ALPHABET};
use crate::distance::{
    certify_grid, certify_step, DistanceCertificate, StepFunction, DEFAULT_GRID_SIZE,
};
use crate::error::{invalid, Error, Result};
use crate::piecewise::{PiecewiseFunction, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    InClass,
    AlternatingFar,
    RandomPartitionFar,
    SineProbe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub class: ClassKind,
    pub k: usize,
    pub eps: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<DistanceCertificate>,
}

/// Serializable target function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum TargetSpec {
    Piecewise(PiecewiseFunction),
    Step(StepFunction),
    /// `x -> sin(frequency * x)`.
    Sine { frequency: f64 },
}

impl Target for TargetSpec {
    fn value(&self, x: f64) -> f64 {
        match self {
            Self::Piecewise(f) => f.evaluate(x),
            Self::Step(f) => f.evaluate(x),
            Self::Sine { frequency } => (frequency * x).sin(),
        }
    }
}

/// A target together with how it was made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub target: TargetSpec,
}

impl Instance {
    /// Far instances must carry a certificate of distance at least `eps`.
    pub fn is_certified_far(&self) -> bool {
        self.spec.certificate.as_ref().is_some_and(|c| c.distance >= self.spec.eps)
    }
}

/// Random member of `F_k(H)`: `k - 1` sorted Uniform(0,1) breakpoints and
/// `k` random members. Constant pieces come from a 4-symbol alphabet with
/// adjacent pieces forced distinct, so the nominal `k` is the real one.
pub fn gen_in_class(class: &Class, k: usize, seed: u64) -> Result<PiecewiseFunction> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut breakpoints: Vec<f64> = (0..k - 1).map(|_| rng.random()).collect();
    breakpoints.sort_by(f64::total_cmp);
    let mut pieces: Vec<Member> = Vec::with_capacity(k);
    for _ in 0..k {
        let member = match (class.kind, pieces.last()) {
            (ClassKind::Constants, Some(Member::Constant(prev))) => {
                // Uniform over the other symbols.
                let step = rng.random_range(1..CONSTANT_ALPHABET) as f64;
                Member::Constant((prev + step) % CONSTANT_ALPHABET as f64)
            }
            (ClassKind::ShiftedSine, _) => Member::ShiftedSine(rng.random_range(0.0..TAU)),
            _ => class.random_member(&mut rng),
        };
        pieces.push(member);
    }
    PiecewiseFunction::new(breakpoints, pieces)
}

/// Largest doubling applied by [`gen_alternating_far`].
const MAX_DOUBLINGS: u32 = 12;

/// Two-valued step function alternating on `n'` equal pieces, `n'` starting
/// at `8k` and doubling until its exact distance to `F_k(constants)` reaches
/// `eps`. The family's distances approach 1/2.
pub fn gen_alternating_far(k: usize, eps: f64, seed: u64) -> Result<Instance> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid(format!("eps = {eps} outside (0, 1/2)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..2) as f64;
    for doubling in 0..=MAX_DOUBLINGS {
        let n = 8 * k << doubling;
        let f = StepFunction::equal_pieces(
            (0..n).map(|i| if i % 2 == 0 { first } else { 1.0 - first }).collect(),
        )?;
        let cert = certify_step(format!("alternating-far/k={k}/n={n}/seed={seed}"), &f, k)?;
        if cert.distance >= eps {
            return Ok(Instance {
                spec: InstanceSpec {
                    kind: InstanceKind::AlternatingFar,
                    class: ClassKind::Constants,
                    k,
                    eps,
                    seed,
                    certificate: Some(cert),
                },
                target: TargetSpec::Step(f),
            });
        }
    }
    Err(Error::RetryLimit(MAX_DOUBLINGS as usize + 1))
}

/// Redraws allowed by [`gen_random_partition_far`].
pub const PARTITION_RETRIES: usize = 16;

/// Binary function on `n'` equal pieces with i.i.d. fair-coin values,
/// redrawn until its exact distance to `F_k(constants)` is at least `eps`.
///
/// For a `{0,1}`-valued target the distance to `F_k(polynomials)` equals the
/// distance to `F_k(constants)`: a nonconstant polynomial meets each level in
/// finitely many points, so on every piece only constant members agree on a
/// set of positive mass. The certificate therefore also covers `class`.
pub fn gen_random_partition_far(
    class: ClassKind,
    k: usize,
    n_prime: usize,
    eps: f64,
    seed: u64,
) -> Result<Instance> {
    if k == 0 || n_prime < 8 * k {
        return Err(invalid(format!("need n' >= 8k, got n' = {n_prime}, k = {k}")));
    }
    if matches!(class, ClassKind::ShiftedSine) {
        return Err(invalid("random partitions are certified for constants and polynomials only"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..PARTITION_RETRIES {
        let f = StepFunction::equal_pieces(
            (0..n_prime).map(|_| rng.random_range(0..2) as f64).collect(),
        )?;
        let id = format!("random-partition-far/k={k}/n={n_prime}/seed={seed}/attempt={attempt}");
        let cert = certify_step(id, &f, k)?;
        if cert.distance >= eps {
            return Ok(Instance {
                spec: InstanceSpec {
                    kind: InstanceKind::RandomPartitionFar,
                    class,
                    k,
                    eps,
                    seed,
                    certificate: Some(cert),
                },
                target: TargetSpec::Step(f),
            });
        }
    }
    Err(Error::RetryLimit(PARTITION_RETRIES))
}

/// `x -> sin(frequency x)` with a grid certificate against `F_k(class)`.
pub fn gen_sine_probe(
    class: &Class,
    k: usize,
    frequency: f64,
    eps: f64,
    grid_size: Option<usize>,
) -> Result<Instance> {
    let target = TargetSpec::Sine { frequency };
    let grid = grid_size.unwrap_or(DEFAULT_GRID_SIZE);
    let cert = certify_grid(format!("sine-probe/freq={frequency}/k={k}"), &target, class, k, grid)?;
    Ok(Instance {
        spec: InstanceSpec {
            kind: InstanceKind::SineProbe,
            class: class.kind,
            k,
            eps,
            seed: 0,
            certificate: Some(cert),
        },
        target,
    })
}

/// In-class instance wrapped with its spec.
pub fn in_class_instance(class: &Class, k: usize, eps: f64, seed: u64) -> Result<Instance> {
    Ok(Instance {
        spec: InstanceSpec { kind: InstanceKind::InClass, class: class.kind, k, eps, seed, certificate: None },
        target: TargetSpec::Piecewise(gen_in_class(class, k, seed)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::dist_step_to_piecewise_const;

    #[test]
    fn single_piece_in_class() {
        let f = gen_in_class(&Class::constants(), 1, 3).unwrap();
        assert_eq!(f.k(), 1);
        assert!(f.breakpoints().is_empty());
    }

    #[test]
    fn adjacent_constants_distinct() {
        for seed in 0..50 {
            let f = gen_in_class(&Class::constants(), 50, seed).unwrap();
            assert_eq!(f.k(), 50);
            for w in f.pieces().windows(2) {
                assert_ne!(w[0], w[1]);
            }
            assert!(f.breakpoints().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn alternating_far_small() {
        let inst = gen_alternating_far(2, 0.2, 0).unwrap();
        let TargetSpec::Step(f) = &inst.target else { panic!() };
        assert_eq!(f.pieces(), 16);
        let cert = inst.spec.certificate.as_ref().unwrap();
        assert!((cert.distance - 0.4375).abs() < 1e-12);
        assert!(inst.is_certified_far());
    }

    #[test]
    fn alternating_far_terminates() {
        let inst = gen_alternating_far(200, 0.4, 1).unwrap();
        let TargetSpec::Step(f) = &inst.target else { panic!() };
        assert!(f.pieces() <= 8 * 200 * 16);
        assert!(inst.is_certified_far());
        assert!(gen_alternating_far(2, 0.5, 0).is_err());
    }

    #[test]
    fn random_partition_deterministic_and_certified() {
        let a = gen_random_partition_far(ClassKind::Constants, 2, 128, 0.25, 5).unwrap();
        let b = gen_random_partition_far(ClassKind::Constants, 2, 128, 0.25, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.is_certified_far());
        assert!(gen_random_partition_far(ClassKind::Constants, 2, 15, 0.25, 5).is_err());
        assert!(matches!(
            gen_random_partition_far(ClassKind::Constants, 2, 16, 0.9, 5),
            Err(Error::RetryLimit(_))
        ));
    }

    #[test]
    fn in_class_distance_zero() {
        let f = gen_in_class(&Class::constants(), 50, 8).unwrap();
        let values = f
            .pieces()
            .iter()
            .map(|m| match m {
                Member::Constant(v) => *v,
                _ => unreachable!(),
            })
            .collect();
        let step = StepFunction::new(f.breakpoints().to_vec(), values).unwrap();
        assert_eq!(dist_step_to_piecewise_const(&step, 50).unwrap(), 0.0);
    }
}

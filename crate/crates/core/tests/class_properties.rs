use proptest::prelude::*;
use pwtest::class::{check_zero_measure_crossings, BaseClass, Class, Member, ValuePoint};
use pwtest::PiecewiseFunction;

/// Lagrange evaluation through `nodes`, written independently of the
/// library's Newton form.
fn lagrange(nodes: &[(f64, f64)], x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .map(|(i, &(xi, yi))| {
            let basis: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &(xj, _))| (x - xj) / (xi - xj))
                .product();
            yi * basis
        })
        .sum()
}

/// Brute-force minimum over every interpolant through the anchor and at most
/// `p` probes. Degree-`p` polynomials through fewer points are still members.
fn brute_force_min(class: &Class, p: usize, anchor: ValuePoint, probes: &[ValuePoint]) -> usize {
    let tol = class.tolerance();
    let n = probes.len();
    let mut best = n;
    for mask in 0u32..1 << n {
        if mask.count_ones() as usize > p {
            continue;
        }
        let mut nodes = vec![(anchor.x, anchor.y)];
        nodes.extend((0..n).filter(|i| mask >> i & 1 == 1).map(|i| (probes[i].x, probes[i].y)));
        let mut xs: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        xs.sort_by(f64::total_cmp);
        if xs.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let misses = probes.iter().filter(|q| !tol.agree(lagrange(&nodes, q.x), q.y)).count();
        best = best.min(misses);
    }
    best
}

fn anchored_case() -> impl Strategy<Value = (usize, ValuePoint, Vec<ValuePoint>)> {
    (0usize..=2, 1usize..=8).prop_flat_map(|(p, n)| {
        (
            Just(p),
            0.0..1.0f64,
            prop::collection::vec((0.0..1.0f64, 0usize..3, -1.0..1.0f64), n),
            prop::collection::vec(prop::collection::vec(-1.0..1.0f64, p + 1), 3),
        )
            .prop_map(|(p, ax, raw, polys)| {
                // Probes mostly lie on one of three random polynomials that
                // share the anchor's value, so ties and partial fits occur.
                let eval = |c: &[f64], x: f64| c.iter().rev().fold(0.0, |acc, &a| acc * x + a);
                let ay = eval(&polys[0], ax);
                let probes = raw
                    .iter()
                    .map(|&(x, which, noise)| {
                        let c = &polys[which];
                        let y = if which == 2 { noise } else { eval(c, x) - eval(c, ax) + ay };
                        ValuePoint::new(x, y)
                    })
                    .collect();
                (p, ValuePoint::new(ax, ay), probes)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn anchored_min_matches_brute_force((p, anchor, probes) in anchored_case()) {
        let class = Class::polynomials(p);
        let fit = class.min_disagreements_anchored(anchor, &probes).unwrap();
        prop_assert_eq!(fit.disagreements, brute_force_min(&class, p, anchor, &probes));
        let witness = fit.witness.unwrap();
        prop_assert!(class.tolerance().agree(witness.eval(anchor.x), anchor.y));
        let misses = probes.iter().filter(|q| !class.tolerance().agree(witness.eval(q.x), q.y)).count();
        prop_assert_eq!(misses, fit.disagreements);
    }

    #[test]
    fn constants_count_mismatches(anchor in 0usize..3, labels in prop::collection::vec(0usize..3, 1..20)) {
        let probes: Vec<ValuePoint> =
            labels.iter().enumerate().map(|(i, &l)| ValuePoint::new(i as f64 / 20.0, l as f64)).collect();
        let fit = Class::constants()
            .min_disagreements_anchored(ValuePoint::new(0.5, anchor as f64), &probes)
            .unwrap();
        prop_assert_eq!(fit.disagreements, labels.iter().filter(|&&l| l != anchor).count());
    }

    #[test]
    fn breakpoints_belong_to_left_piece(mut ts in prop::collection::vec(0.0..1.0f64, 1..10)) {
        ts.sort_by(f64::total_cmp);
        let pieces = (0..=ts.len()).map(|i| Member::Constant(i as f64)).collect();
        let f = PiecewiseFunction::new(ts.clone(), pieces).unwrap();
        for (i, &t) in ts.iter().enumerate() {
            // Repeated breakpoints give empty pieces; the first owner wins.
            let first = ts.iter().position(|&u| u == t).unwrap();
            prop_assert_eq!(f.evaluate(t), first as f64);
            prop_assert!(first <= i);
        }
    }
}

#[test]
fn sine_anchor_outside_range_is_empty() {
    let fit = Class::shifted_sine()
        .min_disagreements_anchored(ValuePoint::new(0.3, 1.5), &[ValuePoint::new(0.31, 0.2)])
        .unwrap();
    assert!(fit.witness.is_none());
    assert_eq!(fit.rate(1), 1.0);
}

#[test]
fn shipped_classes_have_zero_measure_crossings() {
    for class in [Class::constants(), Class::polynomials(1), Class::polynomials(2), Class::shifted_sine()] {
        let report = check_zero_measure_crossings(&class, 100, 256, 9, 0.01).unwrap();
        assert!(report.passed, "{:?}: {:?}", class.kind, report);
    }
}

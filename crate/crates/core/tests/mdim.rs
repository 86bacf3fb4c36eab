mod common;

use common::{doubling_tripling, identity_on};
use mdim_core::counting::{CountKind, CountMode, WordCounter};
use mdim_core::mdim::{
    cp_averaged, cp_critical_exponent, cp_outer_measure, lambda_b, lmdim_subset, mdim_whole, open_cover_oracle,
    scale_entropy, umdim_subset, CpQuery, EstimatorOptions, Variant, COVER_SLACK,
};
use mdim_core::randomwalk::{expected_count, RandomWalkSpec};
use mdim_core::semigroup::Word;
use mdim_core::shift::ShiftSystem;
use mdim_core::zoo::{instantiate, ZooParams, ZooSystem};
use proptest::prelude::*;

fn shift(name: &str, levels: Option<usize>) -> ShiftSystem {
    let p = ZooParams {
        levels,
        ..Default::default()
    };
    match instantiate(name, &p).unwrap().system {
        ZooSystem::Shift(s) => s,
        ZooSystem::Sampled(_) => unreachable!(),
    }
}

fn walk(k: usize) -> RandomWalkSpec {
    RandomWalkSpec::uniform_symbols(k, 0)
}

#[test]
fn binary_shift_scale_entropy_is_log_two() {
    let sys = shift("binary-shift", None);
    for eps in [0.2, 0.125, 0.0625, 0.03] {
        let (rec, _) =
            scale_entropy(&sys, &walk(1), eps, &[2, 4, 6], &sys.full_target(), EstimatorOptions::default()).unwrap();
        assert!((rec.sup_estimate - 2f64.ln()).abs() < 0.05, "eps {eps}: {}", rec.sup_estimate);
    }
}

#[test]
fn interval_shift_scale_entropy_is_log_sixteen() {
    let sys = shift("interval-shift", None);
    let (rec, _) =
        scale_entropy(&sys, &walk(2), 0.0625, &[1, 2], &sys.full_target(), EstimatorOptions::default()).unwrap();
    assert!((rec.sup_estimate - 16f64.ln()).abs() < 0.1, "{}", rec.sup_estimate);
}

#[test]
fn identity_scale_entropy_vanishes() {
    let sys = identity_on(&[0.0, 0.3, 0.6, 0.9], 2);
    for eps in [0.25, 0.1] {
        let (rec, _) =
            scale_entropy(&sys, &walk(2), eps, &[1, 2, 3], &sys.full_target(), EstimatorOptions::default()).unwrap();
        assert_eq!(rec.sup_estimate, 0.0);
    }
}

#[test]
fn whole_space_slopes() {
    let opts = EstimatorOptions::default();
    let bin = shift("binary-shift", None);
    let r = mdim_whole(&bin, &walk(1), &[0.125, 0.0625, 0.03125], &[2, 4, 6, 8], Variant::Upper, opts).unwrap();
    assert!(r.slope.abs() < 0.05, "{}", r.slope);
    let int = shift("interval-shift", None);
    let r = mdim_whole(&int, &walk(2), &[0.25, 0.125, 0.0625], &[1, 2], Variant::Upper, opts).unwrap();
    assert!((r.slope - 1.0).abs() < 0.1, "{}", r.slope);
    let id = identity_on(&[0.0, 0.5, 1.0], 2);
    let r = mdim_whole(&id, &walk(2), &[0.25, 0.125, 0.0625], &[1, 2], Variant::Upper, opts).unwrap();
    assert_eq!(r.slope, 0.0);
}

#[test]
fn lambda_b_examples() {
    let sys = identity_on(&[0.0, 0.3, 0.6], 2);
    for n in [1, 3] {
        assert_eq!(lambda_b(&sys, &walk(2), &vec![1], n, 0.01, CountMode::Exact, 100).unwrap(), 1.0);
        assert_eq!(lambda_b(&sys, &walk(2), &vec![0, 1, 2], n, 0.35, CountMode::Exact, 100).unwrap(), 1.0);
    }
    let dt = doubling_tripling(256);
    let z = dt.full_target();
    let l = lambda_b(&dt, &walk(2), &z, 3, 1.0 / 16.0, CountMode::Greedy, 1 << 10).unwrap();
    let e = expected_count(&dt, &walk(2), 3, 1.0 / 16.0, &z, CountKind::Spanning, CountMode::Greedy, 1 << 10).unwrap();
    assert_eq!(l, e.mean);
}

#[test]
fn subset_dimension_of_the_whole_binary_shift() {
    let sys = shift("binary-shift", None);
    let (eps, ns) = ([0.125, 0.0625, 0.03125], [2, 4, 6, 8]);
    let full = sys.full_target();
    let u = umdim_subset(&sys, &walk(1), &full, &eps, &ns, 4096).unwrap();
    let l = lmdim_subset(&sys, &walk(1), &full, &eps, &ns, 4096).unwrap();
    let m = mdim_whole(&sys, &walk(1), &eps, &ns, Variant::Upper, EstimatorOptions::default()).unwrap();
    assert!(u.slope.abs() < 0.05 && l.slope.abs() < 0.05);
    assert!((u.slope - m.slope).abs() < 0.05);
}

#[test]
fn subset_dimension_of_a_point() {
    let sys = doubling_tripling(64);
    let r = umdim_subset(&sys, &walk(2), &vec![5], &[0.25, 0.125, 0.0625], &[1, 2, 3], 100).unwrap();
    assert_eq!(r.slope, 0.0);
}

fn query(target: Vec<usize>, lambda: f64, n: usize, eps: f64) -> CpQuery<Vec<usize>> {
    CpQuery {
        target,
        lambda,
        n,
        eps,
        prefix: Word::new(vec![0; n]),
    }
}

#[test]
fn cp_measure_of_a_point() {
    let sys = doubling_tripling(64);
    for (lambda, n) in [(0.5, 1), (1.0, 2), (2.0, 3)] {
        let v = cp_outer_measure(&sys, &query(vec![7], lambda, n, 0.1)).unwrap().value;
        // the longest admissible word is the cheapest single ball
        let want = (-lambda * (n + COVER_SLACK + 1) as f64).exp();
        assert!((v - want).abs() < 1e-12, "{v} vs {want}");
    }
    assert_eq!(cp_outer_measure(&sys, &query(vec![7], 0.0, 2, 0.1)).unwrap().value, 1.0);
}

#[test]
fn cp_measure_of_three_points() {
    let sys = identity_on(&[0.0, 0.3, 0.6], 2);
    let v = cp_outer_measure(&sys, &query(vec![0, 1, 2], 0.0, 1, 0.35)).unwrap();
    assert_eq!(v.value, 1.0);
    assert!(v.exact);
    let v = cp_outer_measure(&sys, &query(vec![0, 1, 2], 0.0, 1, 0.2)).unwrap();
    assert!(v.value >= 1.0);
}

#[test]
fn critical_exponent_examples() {
    let id = identity_on(&[0.0, 0.3, 0.6], 2);
    for z in [vec![1], vec![0, 1, 2]] {
        let c = cp_critical_exponent(&id, &walk(2), &z, &[1, 2, 3], 0.2, 1000).unwrap();
        assert!(c.lambda.abs() < 1e-3, "{}", c.lambda);
    }
    let dt = doubling_tripling(64);
    let c = cp_critical_exponent(&dt, &walk(2), &vec![9], &[1, 2, 3], 0.1, 1000).unwrap();
    assert!(c.lambda.abs() < 1e-3);
    let bin = shift("binary-shift", None);
    let c = cp_critical_exponent(&bin, &walk(1), &bin.full_target(), &[2, 4, 6], 0.125, 1000).unwrap();
    assert!((c.lambda - 2f64.ln()).abs() < 0.1, "{}", c.lambda);
}

#[test]
fn averaged_cp_measure_at_zero_lambda_is_a_cover_count() {
    let sys = identity_on(&[0.0, 0.3, 0.6], 2);
    let m = cp_averaged(&sys, &walk(2), &vec![0, 1, 2], 0.0, 2, 0.35, 100).unwrap();
    assert_eq!(m, 1.0);
}

fn small_target() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(0usize..32, 1..6).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn string_and_bowen_measures_sandwich(
        z in small_target(),
        prefix in prop::collection::vec(0usize..2, 1..3),
        lambda in prop::sample::select(vec![0.0, 0.5, 1.0]),
        eps in 0.05f64..0.4,
    ) {
        let sys = doubling_tripling(32);
        let prefix = Word::new(prefix);
        let n = prefix.len();
        let mb = |e: f64| {
            cp_outer_measure(&sys, &CpQuery { target: z.clone(), lambda, n, eps: e, prefix: prefix.clone() })
                .unwrap()
                .value
        };
        let m = open_cover_oracle(&sys, &z, lambda, &prefix, eps).unwrap();
        prop_assert!(mb(2.0 * eps) <= m + 1e-12);
        prop_assert!(m <= mb(eps / 4.0) + 1e-12);
    }

    #[test]
    fn cp_measure_is_monotone(
        z in small_target(),
        extra in 0usize..32,
        lambda in 0.0f64..2.0,
        eps in 0.05f64..0.4,
    ) {
        let sys = doubling_tripling(32);
        let v = |t: Vec<usize>, l: f64, e: f64, n: usize| cp_outer_measure(&sys, &query(t, l, n, e)).unwrap().value;
        let mut bigger = z.clone();
        if !bigger.contains(&extra) {
            bigger.push(extra);
            bigger.sort();
        }
        prop_assert!(v(z.clone(), lambda, eps, 2) <= v(bigger, lambda, eps, 2) + 1e-12);
        prop_assert!(v(z.clone(), lambda + 0.5, eps, 2) <= v(z.clone(), lambda, eps, 2) + 1e-12);
        prop_assert!(v(z.clone(), lambda, eps, 2) <= v(z.clone(), lambda, eps / 2.0, 2) + 1e-12);
        prop_assert!(v(z.clone(), 0.0, eps, 1) <= v(z, 0.0, eps, 2) + 1e-12);
    }

    #[test]
    fn lambda_b_is_monotone_in_the_target(z in small_target(), extra in small_target(), eps in 0.05f64..0.2) {
        // spanning sets lie inside the target, so monotonicity costs a factor 2 in eps
        let sys = doubling_tripling(32);
        let mut union = z.clone();
        union.extend(extra.iter().copied());
        union.sort();
        union.dedup();
        let l = |t: &Vec<usize>, e: f64| lambda_b(&sys, &walk(2), t, 2, e, CountMode::Exact, 100).unwrap();
        prop_assert!(l(&z, 2.0 * eps) <= l(&union, eps));
        prop_assert!(l(&extra, 2.0 * eps) <= l(&union, eps));
        prop_assert!(l(&union, eps) <= l(&z, eps) + l(&extra, eps));
    }
}

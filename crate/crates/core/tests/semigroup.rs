mod common;

use std::sync::Arc;

use common::{doubling_tripling, dw, identity_on, orbit, symbols};
use mdim_core::metric::SampledSpace;
use mdim_core::semigroup::{GenFn, SemigroupSystem, Word};
use proptest::prelude::*;

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

fn doubling(n: usize) -> SemigroupSystem {
    let gen: GenFn = Arc::new(|_, x: &[f64]| vec![(2.0 * x[0]).rem_euclid(1.0)]);
    SemigroupSystem::new(SampledSpace::circle_grid(n), symbols(1), gen).unwrap()
}

fn idx(n: usize, x: f64) -> usize {
    (x * n as f64).round() as usize
}

#[test]
fn empty_word_fixes_points() {
    let sys = doubling_tripling(24);
    for x in 0..24 {
        assert_eq!(sys.apply_word(&Word::empty(), x).unwrap(), x);
    }
}

#[test]
fn rightmost_symbol_acts_first() {
    let sys = doubling_tripling(24);
    assert_eq!(sys.apply_word(&w("01"), idx(24, 1.0 / 12.0)).unwrap(), idx(24, 0.5));
    let p = sys.apply_word_point(&w("01"), &[1.0 / 12.0]).unwrap();
    assert!((p[0] - 0.5).abs() < 1e-12);
    assert_eq!(sys.apply_word(&w("0"), idx(8, 3.0 / 8.0) * 3).unwrap(), idx(24, 0.75));
}

#[test]
fn unknown_symbol_is_rejected() {
    assert!(doubling_tripling(8).apply_word(&w("2"), 0).is_err());
}

#[test]
fn bowen_distance_examples() {
    let sys = doubling(8);
    assert_eq!(sys.bowen_distance(&w("0"), 0, 1).unwrap(), 0.25);
    assert_eq!(sys.bowen_distance(&Word::empty(), 0, 1).unwrap(), 0.125);
    assert_eq!(sys.bowen_distance(&w("000"), 3, 3).unwrap(), 0.0);
}

#[test]
fn bowen_ball_is_open() {
    let sys = doubling(8);
    assert!(!sys.bowen_ball_contains(&w("0"), 0, 0.25, 1).unwrap());
    assert!(sys.bowen_ball_contains(&w("0"), 0, 0.26, 1).unwrap());
    assert!(sys.bowen_ball_contains(&w("000"), 5, 1e-9, 5).unwrap());
    assert!(sys.bowen_ball_contains(&w("0"), 0, 0.0, 1).is_err());
}

#[test]
fn glw_ball_at_depth_zero_is_the_plain_ball() {
    let sys = doubling_tripling(16);
    for x in 0..16 {
        let plain = sys.phase.d(3, x) < 0.2;
        assert_eq!(sys.glw_ball_contains(0, 3, 0.2, x, 1 << 10).unwrap(), plain);
    }
}

#[test]
fn glw_ball_of_identity_generators_is_the_plain_ball() {
    let v: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
    let sys = identity_on(&v, 2);
    for x in 0..10 {
        assert_eq!(sys.glw_ball_contains(4, 2, 0.3, x, 1 << 10).unwrap(), sys.phase.d(2, x) < 0.3);
    }
}

#[test]
fn glw_ball_respects_the_budget() {
    assert!(doubling_tripling(16).glw_ball_contains(20, 0, 0.1, 1, 1000).is_err());
}

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec(0usize..2, 0..6).prop_map(Word::new)
}

proptest! {
    #[test]
    fn composition_matches_concatenation(a in word(), b in word(), x in 0usize..48) {
        let sys = doubling_tripling(48);
        let ab = Word::concat(&a, &b);
        let inner = sys.apply_word(&b, x).unwrap();
        prop_assert_eq!(sys.apply_word(&ab, x).unwrap(), sys.apply_word(&a, inner).unwrap());
        prop_assert!(sys.composition_defect(&a, &b).unwrap() < 1e-12);
    }

    #[test]
    fn bowen_distance_matches_orbit_oracle(u in word(), a in 0usize..48, b in 0usize..48) {
        let sys = doubling_tripling(48);
        prop_assert_eq!(sys.bowen_distance(&u, a, b).unwrap(), dw(&sys, &u, a, b));
        prop_assert_eq!(sys.orbit(&u, a), orbit(&sys, &u, a));
    }

    #[test]
    fn bowen_distance_is_a_metric(u in word(), a in 0usize..24, b in 0usize..24, c in 0usize..24) {
        let sys = doubling_tripling(24);
        let d = |p, q| sys.bowen_distance(&u, p, q).unwrap();
        prop_assert_eq!(d(a, a), 0.0);
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-12);
    }

    #[test]
    fn longer_words_separate_more(u in word(), y in 0usize..2, a in 0usize..48, b in 0usize..48) {
        let sys = doubling_tripling(48);
        let mut longer = u.clone();
        longer.push(y);
        prop_assert!(sys.bowen_distance(&u, a, b).unwrap() <= sys.bowen_distance(&longer, a, b).unwrap());
    }
}

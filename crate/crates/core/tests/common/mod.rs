#![allow(dead_code)]

use std::sync::Arc;

use mdim_core::metric::{Metric, SampledSpace};
use mdim_core::semigroup::{GenFn, SemigroupSystem, Word};

pub fn symbols(k: usize) -> SampledSpace {
    SampledSpace::line(&(0..k).map(|y| y as f64).collect::<Vec<_>>(), Metric::Euclidean)
}

/// Identity generators on the given points of the line.
pub fn identity_on(values: &[f64], k: usize) -> SemigroupSystem {
    let phase = SampledSpace::line(values, Metric::Euclidean);
    let gen: GenFn = Arc::new(|_, x: &[f64]| x.to_vec());
    let table = vec![(0..values.len()).collect(); k];
    SemigroupSystem::from_table(phase, symbols(k), gen, table).unwrap()
}

/// f_0 = 2x, f_1 = 3x on an n-point circle grid.
pub fn doubling_tripling(n: usize) -> SemigroupSystem {
    let gen: GenFn = Arc::new(|y, x: &[f64]| vec![(x[0] * (y + 2) as f64).rem_euclid(1.0)]);
    SemigroupSystem::new(SampledSpace::circle_grid(n), symbols(2), gen).unwrap()
}

/// Orbit x, f_{i1} x, f_{i2 i1} x, ... of length |w| + 1, i1 acting first.
pub fn orbit(sys: &SemigroupSystem, w: &Word, x: usize) -> Vec<usize> {
    let mut out = vec![x];
    let mut cur = x;
    for &y in &w.symbols {
        cur = sys.table()[y][cur];
        out.push(cur);
    }
    out
}

pub fn dw(sys: &SemigroupSystem, w: &Word, a: usize, b: usize) -> f64 {
    orbit(sys, w, a)
        .iter()
        .zip(orbit(sys, w, b))
        .map(|(&p, q)| sys.phase.d(p, q))
        .fold(0.0, f64::max)
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n).map(move |m| (0..n).filter(|i| m >> i & 1 == 1).collect())
}

/// Largest subset of z with pairwise d_w > eps, by trying every subset.
pub fn brute_separated(sys: &SemigroupSystem, w: &Word, eps: f64, z: &[usize]) -> usize {
    subsets(z.len())
        .filter(|s| {
            s.iter()
                .enumerate()
                .all(|(i, &a)| s[i + 1..].iter().all(|&b| dw(sys, w, z[a], z[b]) > eps))
        })
        .map(|s| s.len())
        .max()
        .unwrap_or(0)
}

/// Smallest E in z with every point of z within d_w <= eps of E.
pub fn brute_spanning(sys: &SemigroupSystem, w: &Word, eps: f64, z: &[usize]) -> usize {
    subsets(z.len())
        .filter(|s| z.iter().all(|&p| s.iter().any(|&e| dw(sys, w, z[e], p) <= eps)))
        .map(|s| s.len())
        .min()
        .unwrap_or(0)
}

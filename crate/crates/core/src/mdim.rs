//! Scale entropies, metric mean dimension estimators and Caratheodory-Pesin covers.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::{CountKind, CountMode, WordCounter};
use crate::error::{param, Error, Result};
use crate::graph;
use crate::randomwalk::{expected_count, RandomWalkSpec};
use crate::report::{check_eps_ladder, check_n_ladder, DimensionReport, Diagnostics, ScaleRecord};
use crate::semigroup::{SemigroupSystem, Word};
use crate::shift::{ShiftSystem, ShiftTarget};

/// Extra symbols allowed beyond the prefix in cover words.
pub const COVER_SLACK: usize = 3;
/// Largest target handled by the exact cover search.
pub const EXACT_CP_LIMIT: usize = 16;
pub const BISECTION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    pub kind: CountKind,
    pub mode: CountMode,
    /// exact word enumeration up to this many words, otherwise this many Monte Carlo words
    pub budget: usize,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            kind: CountKind::Separated,
            mode: CountMode::Auto,
            budget: 4096,
        }
    }
}

/// Walk-averaged counts over an n-ladder at one scale.
pub fn scale_entropy<C: WordCounter>(
    sys: &C,
    walk: &RandomWalkSpec,
    eps: f64,
    n_ladder: &[usize],
    target: &C::Target,
    opts: EstimatorOptions,
) -> Result<(ScaleRecord, Diagnostics)> {
    if !(eps > 0.0) {
        return param("eps must be positive");
    }
    check_n_ladder(n_ladder, 1)?;
    let cells: Vec<_> = n_ladder
        .par_iter()
        .map(|&n| expected_count(sys, walk, n, eps, target, opts.kind, opts.mode, opts.budget))
        .collect::<Result<_>>()?;
    let mut diag = Diagnostics::default();
    let size = sys.target_size(target);
    for c in &cells {
        diag.merge(&c.diagnostics);
        if c.mean >= size && size > 1.0 {
            diag.resolution_limited = true;
            diag.note(format!("count saturates the sample at eps = {eps}"));
        }
    }
    let counts: Vec<f64> = cells.iter().map(|c| c.mean).collect();
    let stderr: Vec<f64> = cells.iter().map(|c| c.stderr).collect();
    let logs: Vec<f64> = counts.iter().map(|c| c.max(f64::MIN_POSITIVE).ln()).collect();
    Ok((ScaleRecord::from_logs(eps, n_ladder, counts, stderr, &logs, 0), diag))
}

fn ladder_report<C: WordCounter>(
    sys: &C,
    walk: &RandomWalkSpec,
    target: &C::Target,
    eps_ladder: &[f64],
    n_ladder: &[usize],
    variant: Variant,
    opts: EstimatorOptions,
) -> Result<DimensionReport> {
    check_eps_ladder(eps_ladder)?;
    let cells: Vec<_> = eps_ladder
        .par_iter()
        .map(|&e| scale_entropy(sys, walk, e, n_ladder, target, opts))
        .collect::<Result<_>>()?;
    let mut diag = Diagnostics::default();
    let mut records = Vec::new();
    let mut per_eps = Vec::new();
    for (rec, d) in cells {
        diag.merge(&d);
        per_eps.push(match variant {
            Variant::Upper => rec.sup_estimate,
            Variant::Lower => rec.inf_estimate,
        });
        records.push(rec);
    }
    Ok(DimensionReport::new(records, eps_ladder, per_eps, diag))
}

/// Upper or lower metric mean dimension of the whole sample from separated counts.
pub fn mdim_whole<C: WordCounter>(
    sys: &C,
    walk: &RandomWalkSpec,
    eps_ladder: &[f64],
    n_ladder: &[usize],
    variant: Variant,
    opts: EstimatorOptions,
) -> Result<DimensionReport> {
    let target = sys.full_target();
    ladder_report(sys, walk, &target, eps_ladder, n_ladder, variant, opts)
}

/// Lambda^B(Z, N, eps) = walk average of r(w, eps, Z).
pub fn lambda_b<C: WordCounter>(
    sys: &C,
    walk: &RandomWalkSpec,
    target: &C::Target,
    n: usize,
    eps: f64,
    mode: CountMode,
    budget: usize,
) -> Result<f64> {
    Ok(expected_count(sys, walk, n, eps, target, CountKind::Spanning, mode, budget)?.mean)
}

/// umdim (Upper) or lmdim (Lower) of a subset from Lambda^B growth in N.
#[allow(clippy::too_many_arguments)]
pub fn subset_mdim<C: WordCounter>(
    sys: &C,
    walk: &RandomWalkSpec,
    target: &C::Target,
    eps_ladder: &[f64],
    n_ladder: &[usize],
    variant: Variant,
    mode: CountMode,
    budget: usize,
) -> Result<DimensionReport> {
    let opts = EstimatorOptions {
        kind: CountKind::Spanning,
        mode,
        budget,
    };
    ladder_report(sys, walk, target, eps_ladder, n_ladder, variant, opts)
}

pub fn umdim_subset<C: WordCounter>(
    sys: &C,
    walk: &RandomWalkSpec,
    target: &C::Target,
    eps_ladder: &[f64],
    n_ladder: &[usize],
    budget: usize,
) -> Result<DimensionReport> {
    subset_mdim(sys, walk, target, eps_ladder, n_ladder, Variant::Upper, CountMode::Auto, budget)
}

pub fn lmdim_subset<C: WordCounter>(
    sys: &C,
    walk: &RandomWalkSpec,
    target: &C::Target,
    eps_ladder: &[f64],
    n_ladder: &[usize],
    budget: usize,
) -> Result<DimensionReport> {
    subset_mdim(sys, walk, target, eps_ladder, n_ladder, Variant::Lower, CountMode::Auto, budget)
}

/// A cover problem for one prefix word, independent of lambda.
#[derive(Debug, Clone, PartialEq)]
pub enum CoverProblem {
    /// exact search: candidate sets as bitmasks over the target with the longest word length realizing each
    Exact { n_targets: usize, cands: Vec<(u32, usize)> },
    /// uniform-length covers: (word length, number of balls)
    Uniform { counts: Vec<(usize, f64)>, greedy: bool },
}

impl CoverProblem {
    /// min sum of exp(-lambda (|w_i| + 1)) over covers.
    pub fn eval(&self, lambda: f64) -> f64 {
        match self {
            CoverProblem::Uniform { counts, .. } => counts
                .iter()
                .map(|&(l, k)| k * (-lambda * (l + 1) as f64).exp())
                .fold(f64::INFINITY, f64::min),
            CoverProblem::Exact { n_targets, cands } => {
                let n = *n_targets;
                if n == 0 {
                    return 0.0;
                }
                let costs: Vec<f64> = cands
                    .iter()
                    .map(|&(_, l)| (-lambda * (l + 1) as f64).exp())
                    .collect();
                let mut by_bit: Vec<Vec<usize>> = vec![Vec::new(); n];
                for (i, &(m, _)) in cands.iter().enumerate() {
                    for (b, list) in by_bit.iter_mut().enumerate() {
                        if m >> b & 1 == 1 {
                            list.push(i);
                        }
                    }
                }
                let full = (1u32 << n) - 1;
                let mut dp = vec![f64::INFINITY; 1 << n];
                dp[0] = 0.0;
                for s in 0..full {
                    let cur = dp[s as usize];
                    if !cur.is_finite() {
                        continue;
                    }
                    let b = (!s).trailing_zeros() as usize;
                    for &i in &by_bit[b] {
                        let t = (s | cands[i].0) as usize;
                        let v = cur + costs[i];
                        if v < dp[t] {
                            dp[t] = v;
                        }
                    }
                }
                dp[full as usize]
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CoverProblem::Exact { .. })
    }
}

/// Systems whose targets can be covered by Bowen balls with prefix-constrained words.
pub trait CoverMeasure: WordCounter {
    /// Cover problem for covers by B_{w u}(x, eps), |u| <= COVER_SLACK.
    fn cover_problem(&self, w: &Word, target: &Self::Target, eps: f64) -> Result<CoverProblem>;
}

fn prune(mut cands: Vec<(u32, usize)>) -> Vec<(u32, usize)> {
    let mut best: HashMap<u32, usize> = HashMap::new();
    for (m, l) in cands.drain(..) {
        if m == 0 {
            continue;
        }
        let e = best.entry(m).or_insert(l);
        *e = (*e).max(l);
    }
    let mut v: Vec<(u32, usize)> = best.into_iter().collect();
    v.sort_unstable();
    let keep: Vec<bool> = v
        .iter()
        .map(|&(m, l)| {
            !v.iter()
                .any(|&(m2, l2)| (m2, l2) != (m, l) && m & m2 == m && l2 >= l)
        })
        .collect();
    v.into_iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c).collect()
}

impl CoverMeasure for SemigroupSystem {
    fn cover_problem(&self, w: &Word, z: &Vec<usize>, eps: f64) -> Result<CoverProblem> {
        if !(eps > 0.0) {
            return param("eps must be positive");
        }
        w.check(self.alphabet_len())?;
        if z.iter().any(|&x| x >= self.phase.len()) {
            return param("target outside the phase sample");
        }
        let k = self.alphabet_len();
        let centers: Vec<usize> = (0..self.phase.len()).collect();
        let words: Vec<Word> = (0..=COVER_SLACK)
            .flat_map(|j| Word::all(k, j).into_iter().map(|u| Word::concat(w, &u)))
            .collect();
        if z.len() <= EXACT_CP_LIMIT {
            let cands: Vec<(u32, usize)> = words
                .par_iter()
                .flat_map_iter(|v| {
                    let l = v.len();
                    self.ball_sets(v, eps, &centers, z)
                        .into_iter()
                        .map(move |b| (b.ones().fold(0u32, |m, i| m | 1 << i), l))
                })
                .collect();
            return Ok(CoverProblem::Exact {
                n_targets: z.len(),
                cands: prune(cands),
            });
        }
        let counts: Vec<(usize, f64)> = (w.len()..=w.len() + COVER_SLACK)
            .into_par_iter()
            .map(|l| {
                let sets: Vec<_> = words
                    .iter()
                    .filter(|v| v.len() == l)
                    .flat_map(|v| self.ball_sets(v, eps, &centers, z))
                    .collect();
                let c = graph::greedy_cover(&sets, z.len()).expect("centers include the target");
                (l, c.len() as f64)
            })
            .collect();
        Ok(CoverProblem::Uniform {
            counts,
            greedy: true,
        })
    }
}

impl CoverMeasure for ShiftSystem {
    fn cover_problem(&self, w: &Word, t: &ShiftTarget, eps: f64) -> Result<CoverProblem> {
        if !(eps > 0.0) {
            return param("eps must be positive");
        }
        w.check(self.alphabet_len())?;
        let counts = (w.len()..=w.len() + COVER_SLACK)
            .map(|l| Ok((l, self.product_open_cover(l, eps, t)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(CoverProblem::Uniform {
            counts,
            greedy: false,
        })
    }
}

/// One M^B evaluation request.
#[derive(Debug, Clone)]
pub struct CpQuery<T> {
    pub target: T,
    pub lambda: f64,
    pub n: usize,
    pub eps: f64,
    pub prefix: Word,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpValue {
    pub value: f64,
    pub exact: bool,
}

/// M^B_w(Z, lambda, N, eps).
pub fn cp_outer_measure<C: CoverMeasure>(sys: &C, q: &CpQuery<C::Target>) -> Result<CpValue> {
    if q.n == 0 {
        return param("N must be at least 1");
    }
    if q.prefix.len() != q.n {
        return param("prefix length must equal N");
    }
    let p = sys.cover_problem(&q.prefix, &q.target, q.eps)?;
    Ok(CpValue {
        value: p.eval(q.lambda),
        exact: p.is_exact(),
    })
}

/// Walk-weighted family of cover problems at one N.
struct AveragedCover {
    problems: Vec<CoverProblem>,
    weights: Vec<f64>,
}

impl AveragedCover {
    fn build<C: CoverMeasure>(
        sys: &C,
        walk: &RandomWalkSpec,
        target: &C::Target,
        n: usize,
        eps: f64,
        budget: usize,
        diag: &mut Diagnostics,
    ) -> Result<AveragedCover> {
        let (words, weights, exact) = walk.words_for(n, budget);
        if !exact {
            diag.monte_carlo = true;
        }
        let problems: Vec<CoverProblem> = words
            .par_iter()
            .map(|w| sys.cover_problem(w, target, eps))
            .collect::<Result<_>>()?;
        for p in &problems {
            match p {
                CoverProblem::Uniform { greedy: true, .. } => {
                    diag.greedy_used = true;
                    diag.note("cover measure from greedy uniform-length covers");
                }
                CoverProblem::Uniform { greedy: false, .. } => {
                    diag.note("cover measure from uniform-length covers (upper bound)");
                }
                CoverProblem::Exact { .. } => {}
            }
        }
        Ok(AveragedCover { problems, weights })
    }

    fn eval(&self, lambda: f64) -> f64 {
        self.problems
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * p.eval(lambda))
            .sum()
    }
}

/// Walk-averaged M^B(Z, lambda, N, eps).
pub fn cp_averaged<C: CoverMeasure>(
    sys: &C,
    walk: &RandomWalkSpec,
    target: &C::Target,
    lambda: f64,
    n: usize,
    eps: f64,
    budget: usize,
) -> Result<f64> {
    let mut d = Diagnostics::default();
    Ok(AveragedCover::build(sys, walk, target, n, eps, budget, &mut d)?.eval(lambda))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponent {
    pub eps: f64,
    pub lambda: f64,
    /// (lambda, M at the previous N, M at the largest N, classified below critical)
    pub trace: Vec<(f64, f64, f64, bool)>,
    pub diagnostics: Diagnostics,
}

const PROBES: usize = 16;

/// Critical lambda of the walk-averaged M^B at scale eps.
///
/// lambda is below critical when M^B grows from the previous to the largest N of the ladder.
pub fn cp_critical_exponent<C: CoverMeasure>(
    sys: &C,
    walk: &RandomWalkSpec,
    target: &C::Target,
    n_ladder: &[usize],
    eps: f64,
    budget: usize,
) -> Result<CriticalExponent> {
    check_n_ladder(n_ladder, 1)?;
    if n_ladder.len() < 2 {
        return param("critical exponent needs at least two N values");
    }
    if !(eps > 0.0) {
        return param("eps must be positive");
    }
    let mut diag = Diagnostics::default();
    let n_prev = n_ladder[n_ladder.len() - 2];
    let n_max = n_ladder[n_ladder.len() - 1];
    let prev = AveragedCover::build(sys, walk, target, n_prev, eps, budget, &mut diag)?;
    let last = AveragedCover::build(sys, walk, target, n_max, eps, budget, &mut diag)?;
    let mut trace = Vec::new();
    let mut classify = |lambda: f64| {
        let a = prev.eval(lambda);
        let b = last.eval(lambda);
        let below = b > a * (1.0 + 1e-12);
        trace.push((lambda, a, b, below));
        below
    };
    let size = sys.target_size(target);
    let top = if size > 1.0 { size.ln() } else { 0.0 };
    let grid: Vec<f64> = (0..=PROBES).map(|i| top * i as f64 / PROBES as f64).collect();
    let marks: Vec<bool> = grid.iter().map(|&l| classify(l)).collect();
    if let Some(i) = (1..marks.len()).find(|&i| marks[i] && !marks[i - 1]) {
        return Err(Error::NonMonotone(format!(
            "classifier flips back to below-critical at lambda = {:.6} (eps = {eps}); trace: {:?}",
            grid[i], trace
        )));
    }
    let lambda = if !marks[0] {
        0.0
    } else if marks[PROBES] {
        top
    } else {
        let j = marks.iter().position(|m| !m).unwrap();
        let (mut lo, mut hi) = (grid[j - 1], grid[j]);
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if classify(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    Ok(CriticalExponent {
        eps,
        lambda,
        trace,
        diagnostics: diag,
    })
}

/// Per-scale critical exponents across an eps-ladder.
pub fn cp_dimension<C: CoverMeasure>(
    sys: &C,
    walk: &RandomWalkSpec,
    target: &C::Target,
    eps_ladder: &[f64],
    n_ladder: &[usize],
    budget: usize,
) -> Result<(DimensionReport, Vec<CriticalExponent>)> {
    check_eps_ladder(eps_ladder)?;
    let exps: Vec<CriticalExponent> = eps_ladder
        .par_iter()
        .map(|&e| cp_critical_exponent(sys, walk, target, n_ladder, e, budget))
        .collect::<Result<_>>()?;
    let mut diag = Diagnostics::default();
    for e in &exps {
        diag.merge(&e.diagnostics);
    }
    let per_eps = exps.iter().map(|e| e.lambda).collect();
    Ok((DimensionReport::new(vec![], eps_ladder, per_eps, diag), exps))
}

pub const ORACLE_MAX_TARGET: usize = 8;
pub const ORACLE_MAX_ALPHABET: usize = 3;
pub const ORACLE_MAX_N: usize = 3;

/// String-based M_w(Z, lambda, N, eps) for the open cover by balls B(c, eps/2), c sampled.
///
/// A subset S of Z is the trace of a string of length L+1 with word w u (|w u| = L) when at every
/// orbit time t <= L the points f_{(w u)|t} z, z in S, lie in one cover ball.
pub fn open_cover_oracle(
    sys: &SemigroupSystem,
    z: &[usize],
    lambda: f64,
    prefix: &Word,
    eps: f64,
) -> Result<f64> {
    let n = prefix.len();
    if z.len() > ORACLE_MAX_TARGET || sys.alphabet_len() > ORACLE_MAX_ALPHABET || n > ORACLE_MAX_N {
        return Err(Error::Unsupported(format!(
            "oracle instance too large: |Z| = {}, alphabet = {}, N = {n}",
            z.len(),
            sys.alphabet_len()
        )));
    }
    if n == 0 {
        return param("N must be at least 1");
    }
    if !(eps > 0.0) {
        return param("eps must be positive");
    }
    prefix.check(sys.alphabet_len())?;
    if z.iter().any(|&x| x >= sys.phase.len()) {
        return param("target outside the phase sample");
    }
    let m = z.len();
    if m == 0 {
        return Ok(0.0);
    }
    let r = eps / 2.0;
    let k = sys.alphabet_len();
    let words: Vec<Word> = (0..=COVER_SLACK)
        .flat_map(|j| Word::all(k, j).into_iter().map(|u| Word::concat(prefix, &u)))
        .collect();
    let mut best_len = vec![None::<usize>; 1 << m];
    for v in &words {
        let orbits: Vec<Vec<usize>> = z.iter().map(|&x| sys.orbit(v, x)).collect();
        // per time: masks of Z-orbit points inside some cover ball
        let per_time: Vec<Vec<u32>> = (0..=v.len())
            .map(|t| {
                let mut masks: Vec<u32> = (0..sys.phase.len())
                    .map(|c| {
                        (0..m).fold(0u32, |acc, i| {
                            if sys.phase.d(c, orbits[i][t]) < r {
                                acc | 1 << i
                            } else {
                                acc
                            }
                        })
                    })
                    .collect();
                masks.sort_unstable();
                masks.dedup();
                masks
            })
            .collect();
        for s in 1u32..(1 << m) {
            let ok = per_time
                .iter()
                .all(|ms| ms.iter().any(|&mk| s & mk == s));
            if ok {
                let e = &mut best_len[s as usize];
                *e = Some(e.map_or(v.len(), |l| l.max(v.len())));
            }
        }
    }
    let cands: Vec<(u32, usize)> = best_len
        .iter()
        .enumerate()
        .filter_map(|(s, l)| l.map(|l| (s as u32, l)))
        .collect();
    Ok(CoverProblem::Exact {
        n_targets: m,
        cands: prune(cands),
    }
    .eval(lambda))
}

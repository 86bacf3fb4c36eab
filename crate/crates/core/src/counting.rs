//! Separated and spanning counts under d_w, and the disjoint-subfamily covering lemma.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::graph;
use crate::metric::{separated_on_adjacency, EXACT_POINT_LIMIT};
use crate::semigroup::{SemigroupSystem, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountKind {
    Separated,
    Spanning,
}

impl CountKind {
    pub fn name(self) -> &'static str {
        match self {
            CountKind::Separated => "separated",
            CountKind::Spanning => "spanning",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    /// exact or a budget error
    Exact,
    /// greedy witness with whatever certificate is cheap
    Greedy,
    /// exact when feasible, otherwise greedy
    Auto,
}

/// A count together with proven bounds; `value` is the witness size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Count {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    /// an unseen coordinate beyond a truncation could change the count
    pub horizon_limited: bool,
}

impl Count {
    pub fn exact(v: f64) -> Count {
        Count {
            value: v,
            lower: v,
            upper: v,
            exact: true,
            horizon_limited: false,
        }
    }
}

/// Anything that can count (w, eps)-separated or spanning subsets of a target.
pub trait WordCounter: Sync {
    type Target: Sync + Clone;

    fn alphabet_len(&self) -> usize;

    fn count(
        &self,
        w: &Word,
        eps: f64,
        target: &Self::Target,
        kind: CountKind,
        mode: CountMode,
    ) -> Result<Count>;

    fn full_target(&self) -> Self::Target;

    /// number of sampled points in the target (as a real, it may be huge)
    fn target_size(&self, target: &Self::Target) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub count: usize,
    /// phase indices of the witness
    pub witness: Vec<usize>,
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
}

fn check_target(sys: &SemigroupSystem, w: &Word, eps: f64, z: &[usize]) -> Result<()> {
    if !(eps > 0.0) {
        return param("eps must be positive");
    }
    w.check(sys.alphabet_len())?;
    if let Some(x) = z.iter().find(|&&x| x >= sys.phase.len()) {
        return param(format!("target point {x} outside the phase sample"));
    }
    let mut seen = vec![false; sys.phase.len()];
    for &x in z {
        if seen[x] {
            return param(format!("target point {x} listed twice"));
        }
        seen[x] = true;
    }
    Ok(())
}

fn budget_error(n: usize, limit: usize) -> Error {
    Error::Budget {
        needed: n as u128,
        budget: limit as u128,
        hint: "use greedy mode".into(),
    }
}

/// Maximum (w, eps)-separated subset of z (pairwise d_w > eps).
pub fn max_separated(
    sys: &SemigroupSystem,
    w: &Word,
    eps: f64,
    z: &[usize],
    mode: CountMode,
) -> Result<CountResult> {
    check_target(sys, w, eps, z)?;
    if z.is_empty() {
        return Ok(CountResult {
            count: 0,
            witness: vec![],
            lower: 0,
            upper: 0,
            exact: true,
        });
    }
    if mode == CountMode::Exact && z.len() > EXACT_POINT_LIMIT {
        return Err(budget_error(z.len(), EXACT_POINT_LIMIT));
    }
    let adj = sys.word_closeness(w, eps, false, z);
    let c = match mode {
        CountMode::Greedy => {
            let g = graph::greedy_independent(&adj);
            let upper = graph::clique_partition(&adj);
            crate::metric::SeparatedCount {
                count: g.len(),
                exact: g.len() == upper,
                witness: g.iter().map(|&i| z[i]).collect(),
                upper,
            }
        }
        _ => separated_on_adjacency(&adj, z),
    };
    if mode == CountMode::Exact && !c.exact {
        return Err(budget_error(z.len(), crate::metric::EXACT_SEARCH_LIMIT));
    }
    Ok(CountResult {
        count: c.count,
        witness: c.witness,
        lower: c.count,
        upper: c.upper,
        exact: c.exact,
    })
}

pub const EXACT_COVER_LIMIT: usize = 24;

/// Minimum (w, eps)-spanning subset E of z: every point of z within d_w <= eps of E.
pub fn min_spanning(
    sys: &SemigroupSystem,
    w: &Word,
    eps: f64,
    z: &[usize],
    mode: CountMode,
) -> Result<CountResult> {
    check_target(sys, w, eps, z)?;
    if z.is_empty() {
        return Ok(CountResult {
            count: 0,
            witness: vec![],
            lower: 0,
            upper: 0,
            exact: true,
        });
    }
    let adj = sys.word_closeness(w, eps, false, z);
    let n = z.len();
    if mode != CountMode::Greedy && n <= EXACT_COVER_LIMIT {
        let masks: Vec<u64> = adj
            .iter()
            .map(|b| b.ones().fold(0u64, |m, i| m | 1 << i))
            .collect();
        if let Some(best) = graph::exact_cover(&masks, n, 1 << 26) {
            return Ok(CountResult {
                count: best.len(),
                witness: best.iter().map(|&i| z[i]).collect(),
                lower: best.len(),
                upper: best.len(),
                exact: true,
            });
        }
    }
    let cover = graph::greedy_cover(&adj, n).expect("every point covers itself");
    let lower = graph::dual_packing(&adj, n).len();
    let exact = lower == cover.len();
    if mode == CountMode::Exact && !exact {
        return Err(budget_error(n, EXACT_COVER_LIMIT));
    }
    Ok(CountResult {
        count: cover.len(),
        witness: cover.iter().map(|&i| z[i]).collect(),
        lower,
        upper: cover.len(),
        exact,
    })
}

impl WordCounter for SemigroupSystem {
    type Target = Vec<usize>;

    fn alphabet_len(&self) -> usize {
        SemigroupSystem::alphabet_len(self)
    }

    fn count(
        &self,
        w: &Word,
        eps: f64,
        target: &Vec<usize>,
        kind: CountKind,
        mode: CountMode,
    ) -> Result<Count> {
        let r = match kind {
            CountKind::Separated => max_separated(self, w, eps, target, mode)?,
            CountKind::Spanning => min_spanning(self, w, eps, target, mode)?,
        };
        Ok(Count {
            value: r.count as f64,
            lower: r.lower as f64,
            upper: r.upper as f64,
            exact: r.exact,
            horizon_limited: false,
        })
    }

    fn full_target(&self) -> Vec<usize> {
        (0..self.phase.len()).collect()
    }

    fn target_size(&self, target: &Vec<usize>) -> f64 {
        target.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub r_eps: usize,
    pub s_eps: usize,
    pub r_half: usize,
    pub holds: bool,
}

/// Checks r(w, eps) <= s(w, eps) <= r(w, eps/2) with exact counts.
pub fn sandwich_check(sys: &SemigroupSystem, w: &Word, eps: f64, z: &[usize]) -> Result<SandwichReport> {
    let r_eps = min_spanning(sys, w, eps, z, CountMode::Exact)?.count;
    let s_eps = max_separated(sys, w, eps, z, CountMode::Exact)?.count;
    let r_half = min_spanning(sys, w, eps / 2.0, z, CountMode::Exact)?.count;
    Ok(SandwichReport {
        r_eps,
        s_eps,
        r_half,
        holds: r_eps <= s_eps && s_eps <= r_half,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub word: Word,
    pub center: usize,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subfamily {
    pub chosen: Vec<usize>,
    pub disjoint: bool,
    pub covers: bool,
}

/// Disjoint subfamily whose 3eps-dilations cover the union of all balls, checked on the sample.
///
/// Balls are taken greedily by increasing word length (largest balls first).
pub fn disjoint_subfamily(sys: &SemigroupSystem, balls: &[BallSpec]) -> Result<Subfamily> {
    if balls.is_empty() {
        return Ok(Subfamily {
            chosen: vec![],
            disjoint: true,
            covers: true,
        });
    }
    let eps = balls[0].eps;
    if balls.iter().any(|b| b.eps != eps) {
        return param("all balls must share eps");
    }
    if !(eps > 0.0) {
        return param("eps must be positive");
    }
    let all: Vec<usize> = (0..sys.phase.len()).collect();
    let member = |b: &BallSpec, r: f64| -> Result<fixedbitset::FixedBitSet> {
        b.word.check(sys.alphabet_len())?;
        if b.center >= sys.phase.len() {
            return param(format!("center {} outside the phase sample", b.center));
        }
        Ok(sys.ball_sets(&b.word, r, &[b.center], &all).remove(0))
    };
    let sets: Vec<_> = balls.iter().map(|b| member(b, eps)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by_key(|&i| (balls[i].word.len(), i));
    let mut chosen: Vec<usize> = Vec::new();
    for i in order {
        if chosen.iter().all(|&j| sets[i].is_disjoint(&sets[j])) {
            chosen.push(i);
        }
    }
    chosen.sort_unstable();
    let disjoint = chosen
        .iter()
        .enumerate()
        .all(|(a, &i)| chosen[a + 1..].iter().all(|&j| sets[i].is_disjoint(&sets[j])));
    let mut union = fixedbitset::FixedBitSet::with_capacity(all.len());
    for s in &sets {
        union.union_with(s);
    }
    let mut dilated = fixedbitset::FixedBitSet::with_capacity(all.len());
    for &i in &chosen {
        dilated.union_with(&member(&balls[i], 3.0 * eps)?);
    }
    Ok(Subfamily {
        covers: union.is_subset(&dilated),
        disjoint,
        chosen,
    })
}

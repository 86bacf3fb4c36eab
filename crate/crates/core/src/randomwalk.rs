//! Product random walks nu^N on words and walk-averaged counts.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::{CountKind, CountMode, WordCounter};
use crate::error::{param, Result};
use crate::metric::{MeasureOnSpace, SampledSpace};
use crate::report::Diagnostics;
use crate::semigroup::Word;

/// nu on the Y sample plus the seed of the word streams.
#[derive(Debug, Clone)]
pub struct RandomWalkSpec {
    pub base: MeasureOnSpace,
    pub seed: u64,
}

impl RandomWalkSpec {
    pub fn new(base: MeasureOnSpace, seed: u64) -> RandomWalkSpec {
        RandomWalkSpec { base, seed }
    }

    pub fn uniform(params: SampledSpace, seed: u64) -> RandomWalkSpec {
        RandomWalkSpec::new(MeasureOnSpace::uniform(params), seed)
    }

    /// Uniform over `k` symbols placed at 0, 1, ..., k-1.
    pub fn uniform_symbols(k: usize, seed: u64) -> RandomWalkSpec {
        let params = SampledSpace::line(
            &(0..k).map(|y| y as f64).collect::<Vec<_>>(),
            crate::metric::Metric::Euclidean,
        );
        RandomWalkSpec::uniform(params, seed)
    }

    pub fn point_mass(params: SampledSpace, symbol: usize, seed: u64) -> Result<RandomWalkSpec> {
        if symbol >= params.len() {
            return param("point mass outside the Y sample");
        }
        let mut w = vec![0.0; params.len()];
        w[symbol] = 1.0;
        Ok(RandomWalkSpec::new(MeasureOnSpace::new(params, w)?, seed))
    }

    pub fn alphabet_len(&self) -> usize {
        self.base.weights.len()
    }

    pub fn support(&self) -> Vec<usize> {
        self.base.support()
    }

    /// nu^n(w)
    pub fn word_prob(&self, w: &Word) -> f64 {
        w.symbols.iter().map(|&s| self.base.weights[s]).product()
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// omega|[1,n] with i.i.d. nu coordinates, determined by (seed, stream).
    pub fn sample_word(&self, n: usize, stream: u64) -> Word {
        if n == 0 {
            return Word::empty();
        }
        let mut rng = self.rng(stream);
        let dist = WeightedIndex::new(&self.base.weights).expect("weights validated on construction");
        Word::new((0..n).map(|_| dist.sample(&mut rng)).collect())
    }

    /// All words of length n over the support of nu, lexicographic.
    pub fn support_words(&self, n: usize) -> Vec<Word> {
        let supp = self.support();
        Word::all(supp.len(), n)
            .into_iter()
            .map(|w| Word::new(w.symbols.iter().map(|&i| supp[i]).collect()))
            .collect()
    }

    /// |supp nu|^n, saturating.
    pub fn support_word_count(&self, n: usize) -> u128 {
        (self.support().len() as u128)
            .checked_pow(n as u32)
            .unwrap_or(u128::MAX)
    }

    /// Words to average over: the full support when |supp|^n <= budget, otherwise `budget`
    /// sampled words (streams 0..budget). Returns (words, weights, exact).
    pub fn words_for(&self, n: usize, budget: usize) -> (Vec<Word>, Vec<f64>, bool) {
        if self.support_word_count(n) <= budget as u128 {
            let words = self.support_words(n);
            let weights = words.iter().map(|w| self.word_prob(w)).collect();
            (words, weights, true)
        } else {
            let m = budget.max(1);
            let words: Vec<Word> = (0..m as u64).map(|s| self.sample_word(n, s)).collect();
            (words, vec![1.0 / m as f64; m], false)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub mean: f64,
    pub stderr: f64,
    pub exact: bool,
    /// per-word counts in evaluation order
    pub per_word: Vec<(String, f64)>,
    pub diagnostics: Diagnostics,
}

/// Average of count(w) over words of length n under nu^n, exact or Monte Carlo per `budget`.
#[allow(clippy::too_many_arguments)]
pub fn expected_count<C: WordCounter>(
    sys: &C,
    walk: &RandomWalkSpec,
    n: usize,
    eps: f64,
    target: &C::Target,
    kind: CountKind,
    mode: CountMode,
    budget: usize,
) -> Result<Expectation> {
    if walk.alphabet_len() != sys.alphabet_len() {
        return param("walk alphabet does not match the system");
    }
    let (words, weights, exact) = walk.words_for(n, budget);
    average(sys, &words, &weights, exact, eps, target, kind, mode)
}

/// Monte Carlo average over `samples` seeded words regardless of the exact budget.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_count<C: WordCounter>(
    sys: &C,
    walk: &RandomWalkSpec,
    n: usize,
    eps: f64,
    target: &C::Target,
    kind: CountKind,
    mode: CountMode,
    samples: usize,
) -> Result<Expectation> {
    if samples == 0 {
        return param("need at least one sample");
    }
    let words: Vec<Word> = (0..samples as u64).map(|s| walk.sample_word(n, s)).collect();
    let weights = vec![1.0 / samples as f64; samples];
    average(sys, &words, &weights, false, eps, target, kind, mode)
}

#[allow(clippy::too_many_arguments)]
fn average<C: WordCounter>(
    sys: &C,
    words: &[Word],
    weights: &[f64],
    exact: bool,
    eps: f64,
    target: &C::Target,
    kind: CountKind,
    mode: CountMode,
) -> Result<Expectation> {
    let counts: Vec<_> = words
        .par_iter()
        .map(|w| sys.count(w, eps, target, kind, mode))
        .collect::<Result<_>>()?;
    let mean: f64 = counts.iter().zip(weights).map(|(c, p)| c.value * p).sum();
    let stderr = if exact || counts.len() < 2 {
        0.0
    } else {
        let m = counts.len() as f64;
        let var = counts.iter().map(|c| (c.value - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    };
    let mut diagnostics = Diagnostics {
        monte_carlo: !exact,
        greedy_used: counts.iter().any(|c| !c.exact),
        horizon_limited: counts.iter().any(|c| c.horizon_limited),
        ..Default::default()
    };
    if diagnostics.greedy_used {
        diagnostics.note(format!("{} counts are greedy bounds", kind.name()));
    }
    Ok(Expectation {
        mean,
        stderr,
        exact,
        per_word: words
            .iter()
            .zip(&counts)
            .map(|(w, c)| (w.to_string(), c.value))
            .collect(),
        diagnostics,
    })
}

/// Writes per-word counts as CSV (columns: word, count).
pub fn write_per_word_csv<W: std::io::Write>(out: W, e: &Expectation) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["word", "count"])?;
    for (w, c) in &e.per_word {
        wtr.write_record([w.as_str(), &c.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let walk = RandomWalkSpec::uniform_symbols(3, 7);
        assert_eq!(walk.sample_word(20, 4), walk.sample_word(20, 4));
        assert_ne!(walk.sample_word(20, 4), walk.sample_word(20, 5));
        assert!(walk.sample_word(0, 1).is_empty());
    }

    #[test]
    fn support_words_skip_null_symbols() {
        let params = SampledSpace::line(&[0.0, 1.0, 2.0], crate::metric::Metric::Euclidean);
        let walk = RandomWalkSpec::new(MeasureOnSpace::new(params, vec![0.5, 0.0, 0.5]).unwrap(), 0);
        let ws = walk.support_words(2);
        assert_eq!(ws.len(), 4);
        assert!(ws.iter().all(|w| !w.symbols.contains(&1)));
        let total: f64 = ws.iter().map(|w| walk.word_prob(w)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

//! Words, generator families on a sampled phase space, Bowen word-metrics and balls.
//!
//! For a word w = i_1 ... i_k the composed map is f_w = f_{i_1} o ... o f_{i_k}, so the
//! rightmost symbol acts first. The Bowen metric d_w maximizes d over the orbit
//! x, f_{i_1} x, f_{i_2} f_{i_1} x, ..., i.e. it reads w left to right with i_1 first.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::graph::{self, Adjacency};
use crate::metric::{Point, SampledSpace};

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    pub symbols: Vec<usize>,
}

impl Word {
    pub fn new(symbols: Vec<usize>) -> Word {
        Word { symbols }
    }

    pub fn empty() -> Word {
        Word::default()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn reverse(&self) -> Word {
        Word::new(self.symbols.iter().rev().cloned().collect())
    }

    /// 1-indexed inclusive slice w|_[a,b]; empty when b < a.
    pub fn slice(&self, a: usize, b: usize) -> Result<Word> {
        if a == 0 || b > self.len() {
            return param(format!("slice [{a},{b}] out of range for length {}", self.len()));
        }
        if b < a {
            return Ok(Word::empty());
        }
        Ok(Word::new(self.symbols[a - 1..b].to_vec()))
    }

    /// Prefix of length n.
    pub fn prefix(&self, n: usize) -> Word {
        Word::new(self.symbols[..n.min(self.len())].to_vec())
    }

    /// The word w'' w' (w' is a right factor of the result).
    pub fn concat(left: &Word, right: &Word) -> Word {
        let mut s = left.symbols.clone();
        s.extend_from_slice(&right.symbols);
        Word::new(s)
    }

    pub fn push(&mut self, a: usize) {
        self.symbols.push(a);
    }

    /// Every word of length n over an alphabet of size k, in lexicographic order.
    pub fn all(k: usize, n: usize) -> Vec<Word> {
        let total = k.pow(n as u32);
        (0..total).map(|i| Word::from_index(i, k, n)).collect()
    }

    /// The i-th word of length n in lexicographic order.
    pub fn from_index(mut i: usize, k: usize, n: usize) -> Word {
        let mut s = vec![0; n];
        for slot in s.iter_mut().rev() {
            *slot = i % k;
            i /= k;
        }
        Word::new(s)
    }

    pub fn check(&self, alphabet: usize) -> Result<()> {
        match self.symbols.iter().find(|&&s| s >= alphabet) {
            Some(s) => param(format!("symbol {s} outside alphabet of size {alphabet}")),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symbols.iter().all(|&s| s < 10) {
            for s in &self.symbols {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
            f.write_str(&parts.join("."))
        }
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        let parsed: Option<Vec<usize>> = if s.contains('.') {
            s.split('.').map(|p| p.parse().ok()).collect()
        } else {
            s.chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect()
        };
        parsed
            .map(Word::new)
            .ok_or_else(|| Error::Param(format!("bad word '{s}'")))
    }
}

pub type GenFn = Arc<dyn Fn(usize, &[f64]) -> Point + Send + Sync>;
/// Candidate points near `center` within `radius` at refinement level `level` (level 0 is the sample).
pub type RefineFn = Arc<dyn Fn(u32, &[f64], f64) -> Vec<Point> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Closure {
    Exact,
    Snapped,
}

const SNAP_TOL: f64 = 1e-12;
const NEIGHBOR_CACHE_LIMIT: usize = 1 << 13;

type NeighborKey = (u64, bool);

/// Generator family y -> f_y acting on a sampled phase space.
#[derive(Clone)]
pub struct SemigroupSystem {
    pub phase: SampledSpace,
    pub params: SampledSpace,
    gen: GenFn,
    table: Arc<Vec<Vec<usize>>>,
    pub closure: Closure,
    pub snap_error: f64,
    refiner: Option<RefineFn>,
    neighbors: Arc<Mutex<HashMap<NeighborKey, Arc<Vec<FixedBitSet>>>>>,
}

impl fmt::Debug for SemigroupSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemigroupSystem")
            .field("phase", &self.phase)
            .field("alphabet", &self.params.len())
            .field("closure", &self.closure)
            .field("snap_error", &self.snap_error)
            .finish()
    }
}

impl SemigroupSystem {
    /// Builds the transition tables by snapping each image to its nearest sampled point.
    pub fn new(phase: SampledSpace, params: SampledSpace, gen: GenFn) -> Result<SemigroupSystem> {
        if phase.is_empty() || params.is_empty() {
            return Err(Error::EmptySpace);
        }
        let table: Vec<Vec<usize>> = (0..params.len())
            .map(|y| {
                phase
                    .points
                    .par_iter()
                    .map(|p| phase.nearest(&gen(y, p)).0)
                    .collect()
            })
            .collect();
        Self::from_table(phase, params, gen, table)
    }

    /// Uses known transition tables; snap error is measured against `gen`.
    pub fn from_table(
        phase: SampledSpace,
        params: SampledSpace,
        gen: GenFn,
        table: Vec<Vec<usize>>,
    ) -> Result<SemigroupSystem> {
        if phase.is_empty() || params.is_empty() {
            return Err(Error::EmptySpace);
        }
        if table.len() != params.len() || table.iter().any(|t| t.len() != phase.len()) {
            return param("transition table shape does not match the samples");
        }
        if table.iter().flatten().any(|&j| j >= phase.len()) {
            return param("transition table points outside the phase sample");
        }
        let snap_error = (0..params.len())
            .flat_map(|y| (0..phase.len()).map(move |i| (y, i)))
            .map(|(y, i)| phase.metric.dist(&gen(y, &phase.points[i]), &phase.points[table[y][i]]))
            .fold(0.0, f64::max);
        let closure = if snap_error <= SNAP_TOL {
            Closure::Exact
        } else {
            Closure::Snapped
        };
        Ok(SemigroupSystem {
            phase,
            params,
            gen,
            table: Arc::new(table),
            closure,
            snap_error,
            refiner: None,
            neighbors: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    pub fn with_refiner(mut self, f: RefineFn) -> SemigroupSystem {
        self.refiner = Some(f);
        self
    }

    pub fn refiner(&self) -> Option<&RefineFn> {
        self.refiner.as_ref()
    }

    pub fn alphabet_len(&self) -> usize {
        self.params.len()
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    #[inline]
    pub fn step(&self, y: usize, x: usize) -> usize {
        self.table[y][x]
    }

    pub fn gen_point(&self, y: usize, p: &[f64]) -> Point {
        (self.gen)(y, p)
    }

    fn check_point(&self, x: usize) -> Result<()> {
        if x >= self.phase.len() {
            return param(format!("point {x} outside the phase sample"));
        }
        Ok(())
    }

    /// f_w(x) on sampled points.
    pub fn apply_word(&self, w: &Word, x: usize) -> Result<usize> {
        w.check(self.alphabet_len())?;
        self.check_point(x)?;
        Ok(w.symbols.iter().rev().fold(x, |p, &s| self.step(s, p)))
    }

    /// f_w(p) evaluated with the generator functions on an arbitrary point.
    pub fn apply_word_point(&self, w: &Word, p: &[f64]) -> Result<Point> {
        w.check(self.alphabet_len())?;
        let mut q = p.to_vec();
        for &s in w.symbols.iter().rev() {
            q = self.gen_point(s, &q);
        }
        Ok(q)
    }

    /// Orbit x, f_{i_1}x, f_{i_2}f_{i_1}x, ... (|w|+1 points).
    pub fn orbit(&self, w: &Word, x: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(w.len() + 1);
        let mut p = x;
        out.push(p);
        for &s in &w.symbols {
            p = self.step(s, p);
            out.push(p);
        }
        out
    }

    pub fn orbit_points(&self, w: &Word, p: &[f64]) -> Vec<Point> {
        let mut out = Vec::with_capacity(w.len() + 1);
        let mut q = p.to_vec();
        out.push(q.clone());
        for &s in &w.symbols {
            q = self.gen_point(s, &q);
            out.push(q.clone());
        }
        out
    }

    pub fn bowen_distance(&self, w: &Word, x1: usize, x2: usize) -> Result<f64> {
        w.check(self.alphabet_len())?;
        self.check_point(x1)?;
        self.check_point(x2)?;
        let (a, b) = (self.orbit(w, x1), self.orbit(w, x2));
        Ok(a.iter()
            .zip(&b)
            .map(|(&p, &q)| self.phase.d(p, q))
            .fold(0.0, f64::max))
    }

    pub fn bowen_distance_points(&self, w: &Word, p1: &[f64], p2: &[f64]) -> Result<f64> {
        w.check(self.alphabet_len())?;
        let (a, b) = (self.orbit_points(w, p1), self.orbit_points(w, p2));
        Ok(a.iter()
            .zip(&b)
            .map(|(p, q)| self.phase.metric.dist(p, q))
            .fold(0.0, f64::max))
    }

    pub fn bowen_ball_contains(&self, w: &Word, center: usize, delta: f64, x: usize) -> Result<bool> {
        if !(delta > 0.0) {
            return param("delta must be positive");
        }
        Ok(self.bowen_distance(w, center, x)? < delta)
    }

    /// Membership in the ball of radius eps for every composition of length at most n.
    pub fn glw_ball_contains(
        &self,
        n: usize,
        center: usize,
        eps: f64,
        x: usize,
        budget: u128,
    ) -> Result<bool> {
        self.check_point(center)?;
        self.check_point(x)?;
        let k = self.alphabet_len() as u128;
        let needed: u128 = (0..=n as u32).map(|i| k.saturating_pow(i)).sum();
        if needed > budget {
            return Err(Error::Budget {
                needed,
                budget,
                hint: "reduce n or the alphabet".into(),
            });
        }
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        let mut frontier = vec![(center, x)];
        seen.insert((center, x));
        for depth in 0..=n {
            for &(a, b) in &frontier {
                if self.phase.d(a, b) >= eps {
                    return Ok(false);
                }
            }
            if depth == n {
                break;
            }
            let mut next = Vec::new();
            for &(a, b) in &frontier {
                for y in 0..self.alphabet_len() {
                    let pair = (self.step(y, a), self.step(y, b));
                    if seen.insert(pair) {
                        next.push(pair);
                    }
                }
            }
            frontier = next;
        }
        Ok(true)
    }

    /// Largest distance between the tabulated f_{ww'} and f_w(f_{w'}) evaluated with the generators.
    pub fn composition_defect(&self, w: &Word, w2: &Word) -> Result<f64> {
        let ww = Word::concat(w, w2);
        let mut worst: f64 = 0.0;
        for x in 0..self.phase.len() {
            let tab = self.apply_word(&ww, x)?;
            let inner = self.apply_word_point(w2, &self.phase.points[x])?;
            let raw = self.apply_word_point(w, &inner)?;
            worst = worst.max(self.phase.metric.dist(&self.phase.points[tab], &raw));
        }
        Ok(worst)
    }

    /// Base-metric neighbor sets of every phase point (d <= eps, or < eps when strict).
    pub fn neighbors(&self, eps: f64, strict: bool) -> Option<Arc<Vec<FixedBitSet>>> {
        if self.phase.len() > NEIGHBOR_CACHE_LIMIT {
            return None;
        }
        let key = (eps.to_bits(), strict);
        if let Some(v) = self.neighbors.lock().unwrap().get(&key) {
            return Some(v.clone());
        }
        let idx: Vec<usize> = (0..self.phase.len()).collect();
        let adj = Arc::new(self.phase.closeness(&idx, eps, strict));
        self.neighbors.lock().unwrap().insert(key, adj.clone());
        Some(adj)
    }

    #[inline]
    fn base_close(&self, nb: Option<&Vec<FixedBitSet>>, a: usize, b: usize, eps: f64, strict: bool) -> bool {
        match nb {
            Some(n) => n[a].contains(b),
            None => {
                let d = self.phase.d(a, b);
                if strict {
                    d < eps
                } else {
                    d <= eps
                }
            }
        }
    }

    /// Closeness relation of d_w on the target `z` (positions into `z`).
    pub fn word_closeness(&self, w: &Word, eps: f64, strict: bool, z: &[usize]) -> Adjacency {
        let n = z.len();
        let orbits: Vec<Vec<usize>> = z.iter().map(|&x| self.orbit(w, x)).collect();
        let rows = self.close_rows(&orbits, &orbits, z, eps, strict);
        rows.into_iter().map(|r| graph::bitset_from(n, r)).collect()
    }

    /// For each center c in `centers`, the positions of `z` inside the open ball B_w(c, eps).
    pub fn ball_sets(&self, w: &Word, eps: f64, centers: &[usize], z: &[usize]) -> Vec<FixedBitSet> {
        let corb: Vec<Vec<usize>> = centers.iter().map(|&c| self.orbit(w, c)).collect();
        let zorb: Vec<Vec<usize>> = z.iter().map(|&x| self.orbit(w, x)).collect();
        let rows = self.close_rows(&corb, &zorb, z, eps, true);
        rows.into_iter().map(|r| graph::bitset_from(z.len(), r)).collect()
    }

    /// rows[a] = positions b with every orbit time of `left[a]` close to `right[b]`.
    fn close_rows(
        &self,
        left: &[Vec<usize>],
        right: &[Vec<usize>],
        z: &[usize],
        eps: f64,
        strict: bool,
    ) -> Vec<Vec<usize>> {
        let nb = self.neighbors(eps, strict);
        let all_close = |a: &Vec<usize>, b: &Vec<usize>| {
            a.iter()
                .zip(b)
                .all(|(&p, &q)| self.base_close(nb.as_deref(), p, q, eps, strict))
        };
        match nb.as_deref() {
            Some(nbv) => {
                let mut pos = vec![usize::MAX; self.phase.len()];
                let mut dup = false;
                for (i, &x) in z.iter().enumerate() {
                    if pos[x] != usize::MAX {
                        dup = true;
                    }
                    pos[x] = i;
                }
                if dup {
                    return left
                        .par_iter()
                        .map(|a| (0..right.len()).filter(|&b| all_close(a, &right[b])).collect())
                        .collect();
                }
                left.par_iter()
                    .map(|a| {
                        let mut r: Vec<usize> = nbv[a[0]]
                            .ones()
                            .filter_map(|q| (pos[q] != usize::MAX).then(|| pos[q]))
                            .filter(|&b| all_close(a, &right[b]))
                            .collect();
                        r.sort_unstable();
                        r
                    })
                    .collect()
            }
            None => left
                .par_iter()
                .map(|a| (0..right.len()).filter(|&b| all_close(a, &right[b])).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_parsing_and_display() {
        let w: Word = "0110".parse().unwrap();
        assert_eq!(w.symbols, vec![0, 1, 1, 0]);
        assert_eq!(w.to_string(), "0110");
        let long: Word = "3.12.0".parse().unwrap();
        assert_eq!(long.to_string(), "3.12.0");
        assert!("0a".parse::<Word>().is_err());
        assert_eq!("".parse::<Word>().unwrap(), Word::empty());
    }

    #[test]
    fn slices_are_one_indexed() {
        let w = Word::new(vec![4, 5, 6, 7]);
        assert_eq!(w.slice(2, 3).unwrap().symbols, vec![5, 6]);
        assert!(w.slice(2, 1).unwrap().is_empty());
        assert!(w.slice(0, 1).is_err());
        assert!(w.slice(1, 5).is_err());
    }

    #[test]
    fn enumeration_order() {
        let ws = Word::all(2, 2);
        let s: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
        assert_eq!(s, vec!["00", "01", "10", "11"]);
    }
}

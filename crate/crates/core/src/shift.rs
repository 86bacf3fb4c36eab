//! Truncated shifts on L^depth with exact product-structured counts.
//!
//! Each generator is the left shift followed by a coordinatewise isometry of the
//! level set, so d_w depends on |w| only: with the seq-weighted metric
//! d(x,y) = max_j w0 2^-j |x_j - y_j| one gets d_n = max_i w0 2^-max(0, i-n) |x_i - y_i|.
//! Counts on product targets then factor into 1-D interval counts, which greedy
//! solves exactly.

use serde::{Deserialize, Serialize};

use crate::counting::{Count, CountKind, CountMode, WordCounter};
use crate::error::{param, Error, Result};
use crate::metric::{Metric, Point, SampledSpace};
use crate::semigroup::{GenFn, SemigroupSystem, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoordMap {
    Identity,
    /// v -> lo + hi - v
    Reflect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSystem {
    /// sorted coordinate values
    pub levels: Vec<f64>,
    pub depth: usize,
    pub weight0: f64,
    /// level index shifted in at the end of the truncation
    pub filler: usize,
    pub generators: Vec<CoordMap>,
}

/// Product target: allowed level indices per coordinate, times `tails` distinct tails
/// beyond the truncation depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTarget {
    pub coords: Vec<Vec<usize>>,
    pub tails: usize,
}

/// Product of per-coordinate weights over the levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductMeasure {
    pub weights: Vec<Vec<f64>>,
}

impl ShiftSystem {
    pub fn new(levels: Vec<f64>, depth: usize, weight0: f64, generators: Vec<CoordMap>) -> Result<ShiftSystem> {
        if levels.is_empty() || generators.is_empty() {
            return Err(Error::EmptySpace);
        }
        if depth == 0 {
            return param("depth must be positive");
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return param("levels must be strictly increasing");
        }
        if !(weight0 > 0.0) {
            return param("weight0 must be positive");
        }
        let sys = ShiftSystem {
            levels,
            depth,
            weight0,
            filler: 0,
            generators,
        };
        if sys.generators.contains(&CoordMap::Reflect) {
            for k in 0..sys.levels.len() {
                let v = sys.map_value(CoordMap::Reflect, sys.levels[k]);
                if (v - sys.levels[sys.levels.len() - 1 - k]).abs() > 1e-12 {
                    return param("reflection needs a symmetric level set");
                }
            }
        }
        Ok(sys)
    }

    pub fn with_filler(mut self, filler: usize) -> ShiftSystem {
        self.filler = filler.min(self.levels.len() - 1);
        self
    }

    pub fn range(&self) -> f64 {
        self.levels[self.levels.len() - 1] - self.levels[0]
    }

    pub fn alphabet_len(&self) -> usize {
        self.generators.len()
    }

    pub fn metric(&self) -> Metric {
        Metric::SeqWeighted {
            weight0: self.weight0,
        }
    }

    pub fn map_value(&self, m: CoordMap, v: f64) -> f64 {
        match m {
            CoordMap::Identity => v,
            CoordMap::Reflect => self.levels[0] + self.levels[self.levels.len() - 1] - v,
        }
    }

    fn map_index(&self, m: CoordMap, k: usize) -> usize {
        match m {
            CoordMap::Identity => k,
            CoordMap::Reflect => self.levels.len() - 1 - k,
        }
    }

    /// f_y on a point of any length (the filler value enters at the end).
    pub fn apply(&self, y: usize, p: &[f64]) -> Point {
        let m = self.generators[y];
        let fill = self.levels[self.filler];
        (0..p.len())
            .map(|j| self.map_value(m, if j + 1 < p.len() { p[j + 1] } else { fill }))
            .collect()
    }

    pub fn apply_word(&self, w: &Word, p: &[f64]) -> Result<Point> {
        w.check(self.alphabet_len())?;
        let mut q = p.to_vec();
        for &s in w.symbols.iter().rev() {
            q = self.apply(s, &q);
        }
        Ok(q)
    }

    /// Weight of coordinate i in d_n.
    pub fn coord_weight(&self, i: usize, n: usize) -> f64 {
        self.weight0 * 0.5f64.powi(i.saturating_sub(n) as i32)
    }

    /// d_n between two points (compared on their common length).
    pub fn bowen_distance(&self, n: usize, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (x, y))| self.coord_weight(i, n) * (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// True when no coordinate at or beyond the depth can reach eps under d_n.
    pub fn within_horizon(&self, n: usize, eps: f64) -> bool {
        let w = if n >= self.depth {
            self.weight0
        } else {
            self.coord_weight(self.depth, n)
        };
        w * self.range() <= eps
    }

    pub fn full_product(&self) -> ShiftTarget {
        ShiftTarget {
            coords: vec![(0..self.levels.len()).collect(); self.depth],
            tails: 1,
        }
    }

    pub fn uniform_measure(&self) -> ProductMeasure {
        let g = self.levels.len();
        ProductMeasure {
            weights: vec![vec![1.0 / g as f64; g]; self.depth],
        }
    }

    pub fn check_target(&self, t: &ShiftTarget) -> Result<()> {
        if t.coords.len() != self.depth {
            return param("target needs one level list per coordinate");
        }
        for c in &t.coords {
            if c.windows(2).any(|w| w[1] <= w[0]) || c.iter().any(|&k| k >= self.levels.len()) {
                return param("target level lists must be sorted, distinct and in range");
            }
        }
        if t.tails == 0 {
            return param("target needs at least one tail");
        }
        Ok(())
    }

    fn values(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().map(|&k| self.levels[k]).collect()
    }

    /// Exact count of (n, eps)-separated or spanning subsets of a product target.
    pub fn product_count(&self, n: usize, eps: f64, t: &ShiftTarget, kind: CountKind) -> Result<Count> {
        if !(eps > 0.0) {
            return param("eps must be positive");
        }
        self.check_target(t)?;
        let horizon = self.within_horizon(n, eps);
        if t.tails > 1 && !horizon {
            return Err(Error::Resolution(format!(
                "distinct tails are visible at n = {n}, eps = {eps}"
            )));
        }
        let mut total = 1.0;
        for (i, c) in t.coords.iter().enumerate() {
            if c.is_empty() {
                return Ok(Count::exact(0.0));
            }
            let s = eps / self.coord_weight(i, n);
            let vals = self.values(c);
            let k = match kind {
                CountKind::Separated => separated_1d(&vals, s),
                CountKind::Spanning => spanning_1d(&vals, s),
            };
            total *= k as f64;
        }
        let mut c = Count::exact(total);
        c.horizon_limited = !horizon;
        Ok(c)
    }

    /// Fewest open d_n-balls of radius eps centered in the full sample covering a product target.
    pub fn product_open_cover(&self, n: usize, eps: f64, t: &ShiftTarget) -> Result<f64> {
        self.check_target(t)?;
        if t.tails > 1 && !self.within_horizon(n, eps) {
            return Err(Error::Resolution(format!(
                "distinct tails are visible at n = {n}, eps = {eps}"
            )));
        }
        let mut total = 1.0;
        for (i, c) in t.coords.iter().enumerate() {
            if c.is_empty() {
                return Ok(0.0);
            }
            let s = eps / self.coord_weight(i, n);
            total *= open_cover_1d(&self.values(c), &self.levels, s) as f64;
        }
        Ok(total)
    }

    /// Mass of the open ball B_n(x, eps) under a product measure.
    pub fn product_ball_mass(&self, mu: &ProductMeasure, n: usize, x: &[f64], eps: f64) -> Result<f64> {
        if mu.weights.len() != self.depth || x.len() < self.depth {
            return param("measure and point must cover the truncation depth");
        }
        let mut m = 1.0;
        for i in 0..self.depth {
            let c = self.coord_weight(i, n);
            let w: f64 = self
                .levels
                .iter()
                .zip(&mu.weights[i])
                .filter(|(v, _)| c * (*v - x[i]).abs() < eps)
                .map(|(_, w)| w)
                .sum();
            m *= w;
        }
        Ok(m)
    }

    /// All points of L^depth as an explicit system (coordinate 0 most significant).
    pub fn materialize(&self, limit: usize) -> Result<SemigroupSystem> {
        let g = self.levels.len();
        let total = (g as u128).checked_pow(self.depth as u32).unwrap_or(u128::MAX);
        if total > limit as u128 {
            return Err(Error::Budget {
                needed: total,
                budget: limit as u128,
                hint: "lower depth or levels".into(),
            });
        }
        let total = total as usize;
        let digits = |mut i: usize| {
            let mut d = vec![0usize; self.depth];
            for slot in d.iter_mut().rev() {
                *slot = i % g;
                i /= g;
            }
            d
        };
        let index = |d: &[usize]| d.iter().fold(0usize, |acc, &k| acc * g + k);
        let points: Vec<Point> = (0..total).map(|i| self.values(&digits(i))).collect();
        let table: Vec<Vec<usize>> = self
            .generators
            .iter()
            .map(|&m| {
                (0..total)
                    .map(|i| {
                        let d = digits(i);
                        let next: Vec<usize> = (0..self.depth)
                            .map(|j| self.map_index(m, if j + 1 < self.depth { d[j + 1] } else { self.filler }))
                            .collect();
                        index(&next)
                    })
                    .collect()
            })
            .collect();
        let phase = SampledSpace::new(points, self.metric());
        let params = SampledSpace::line(
            &(0..self.generators.len()).map(|y| y as f64).collect::<Vec<_>>(),
            Metric::Euclidean,
        );
        let me = self.clone();
        let gen: GenFn = std::sync::Arc::new(move |y: usize, p: &[f64]| me.apply(y, p));
        SemigroupSystem::from_table(phase, params, gen, table)
    }

    /// Phase index in the materialized system of a point given by level indices.
    pub fn point_index(&self, idx: &[usize]) -> usize {
        let g = self.levels.len();
        idx.iter().fold(0usize, |acc, &k| acc * g + k)
    }
}

/// Greedy maximum subset of sorted values with gaps > s.
pub fn separated_1d(vals: &[f64], s: f64) -> usize {
    let mut count = 0;
    let mut last = f64::NEG_INFINITY;
    for &v in vals {
        if count == 0 || v - last > s {
            count += 1;
            last = v;
        }
    }
    count
}

/// Fewest centers from `vals` with every value within <= s of one.
pub fn spanning_1d(vals: &[f64], s: f64) -> usize {
    let mut count = 0;
    let mut i = 0;
    while i < vals.len() {
        let a = vals[i];
        let mut c = i;
        while c + 1 < vals.len() && vals[c + 1] - a <= s {
            c += 1;
        }
        let reach = vals[c] + s;
        count += 1;
        while i < vals.len() && vals[i] <= reach {
            i += 1;
        }
    }
    count
}

/// Fewest open intervals (c - s, c + s), c in `centers`, covering sorted `vals`.
pub fn open_cover_1d(vals: &[f64], centers: &[f64], s: f64) -> usize {
    let mut count = 0;
    let mut i = 0;
    while i < vals.len() {
        let a = vals[i];
        let c = centers
            .iter()
            .rev()
            .find(|&&c| (c - a).abs() < s)
            .copied()
            .unwrap_or(a);
        count += 1;
        while i < vals.len() && (vals[i] - c).abs() < s {
            i += 1;
        }
    }
    count
}

impl WordCounter for ShiftSystem {
    type Target = ShiftTarget;

    fn alphabet_len(&self) -> usize {
        self.generators.len()
    }

    fn count(&self, w: &Word, eps: f64, target: &ShiftTarget, kind: CountKind, _mode: CountMode) -> Result<Count> {
        w.check(self.alphabet_len())?;
        self.product_count(w.len(), eps, target, kind)
    }

    fn full_target(&self) -> ShiftTarget {
        self.full_product()
    }

    fn target_size(&self, t: &ShiftTarget) -> f64 {
        t.coords.iter().map(|c| c.len() as f64).product::<f64>() * t.tails as f64
    }
}

//! Sampled metric spaces, separated counts, box dimension and homogeneity.

use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::graph;
use crate::report::{check_eps_ladder, DimensionReport, Diagnostics, ScaleRecord};

pub type Point = Vec<f64>;
pub type DistFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Metric {
    Euclidean,
    Sup,
    /// max over coordinates of the distance on R/Z
    Circle,
    /// max_j w0 * 2^-j |x_j - y_j|
    SeqWeighted { weight0: f64 },
    Custom { name: String, f: DistFn },
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Metric {
    pub fn by_name(name: &str) -> Result<Metric> {
        match name {
            "euclidean" => Ok(Metric::Euclidean),
            "sup" => Ok(Metric::Sup),
            "circle" => Ok(Metric::Circle),
            "seq-weighted" => Ok(Metric::SeqWeighted { weight0: 1.0 }),
            other => param(format!("unknown metric '{other}'")),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Metric::Euclidean => "euclidean".into(),
            Metric::Sup => "sup".into(),
            Metric::Circle => "circle".into(),
            Metric::SeqWeighted { weight0 } => format!("seq-weighted(w0={weight0})"),
            Metric::Custom { name, .. } => name.clone(),
        }
    }

    #[inline]
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Sup => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
            Metric::Circle => a
                .iter()
                .zip(b)
                .map(|(x, y)| circle_dist(*x, *y))
                .fold(0.0, f64::max),
            Metric::SeqWeighted { weight0 } => {
                let mut w = *weight0;
                let mut m: f64 = 0.0;
                for (x, y) in a.iter().zip(b) {
                    m = m.max(w * (x - y).abs());
                    w *= 0.5;
                }
                m
            }
            Metric::Custom { f, .. } => f(a, b),
        }
    }
}

pub fn circle_dist(x: f64, y: f64) -> f64 {
    let d = (x - y).abs() % 1.0;
    d.min(1.0 - d)
}

/// A finite point set standing in for a compact metric space.
#[derive(Clone)]
pub struct SampledSpace {
    pub points: Vec<Point>,
    pub metric: Metric,
    diameter: Arc<OnceLock<f64>>,
}

impl fmt::Debug for SampledSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledSpace")
            .field("len", &self.points.len())
            .field("metric", &self.metric)
            .finish()
    }
}

impl SampledSpace {
    pub fn new(points: Vec<Point>, metric: Metric) -> SampledSpace {
        SampledSpace {
            points,
            metric,
            diameter: Arc::new(OnceLock::new()),
        }
    }

    /// Points of a 1-D space.
    pub fn line(values: &[f64], metric: Metric) -> SampledSpace {
        SampledSpace::new(values.iter().map(|v| vec![*v]).collect(), metric)
    }

    /// `n` equally spaced points j/(n-1) of [0,1].
    pub fn unit_grid(n: usize) -> SampledSpace {
        let vals: Vec<f64> = (0..n)
            .map(|j| if n == 1 { 0.0 } else { j as f64 / (n - 1) as f64 })
            .collect();
        SampledSpace::line(&vals, Metric::Euclidean)
    }

    /// `n` points j/n on the circle.
    pub fn circle_grid(n: usize) -> SampledSpace {
        let vals: Vec<f64> = (0..n).map(|j| j as f64 / n as f64).collect();
        SampledSpace::line(&vals, Metric::Circle)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.metric.dist(&self.points[i], &self.points[j])
    }

    pub fn diameter(&self) -> f64 {
        *self.diameter.get_or_init(|| {
            let n = self.len();
            (0..n)
                .into_par_iter()
                .map(|i| (i + 1..n).map(|j| self.d(i, j)).fold(0.0, f64::max))
                .reduce(|| 0.0, f64::max)
        })
    }

    /// Smallest positive pairwise distance (infinity for a single point).
    pub fn min_gap(&self) -> f64 {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                (i + 1..n)
                    .map(|j| self.d(i, j))
                    .filter(|d| *d > 0.0)
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// Index of the nearest sampled point and its distance.
    pub fn nearest(&self, p: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, q) in self.points.iter().enumerate() {
            let d = self.metric.dist(p, q);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Reads one point per CSV row (coordinates as columns, no header).
    pub fn from_csv(path: &Path, metric: &str) -> Result<SampledSpace> {
        let metric = Metric::by_name(metric)?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut points = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let p: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            match p {
                Ok(p) => points.push(p),
                Err(e) => return param(format!("row {}: {e}", row + 1)),
            }
        }
        if points.is_empty() {
            return Err(Error::EmptySpace);
        }
        Ok(SampledSpace::new(points, metric))
    }

    /// Closeness relation d(p,q) <= eps (or < eps when `strict`) restricted to `idx`.
    pub fn closeness(&self, idx: &[usize], eps: f64, strict: bool) -> graph::Adjacency {
        let n = idx.len();
        let rows: Vec<Vec<usize>> = (0..n)
            .into_par_iter()
            .map(|a| {
                (0..n)
                    .filter(|&b| {
                        let d = self.d(idx[a], idx[b]);
                        if strict {
                            d < eps
                        } else {
                            d <= eps
                        }
                    })
                    .collect()
            })
            .collect();
        rows.into_iter().map(|r| graph::bitset_from(n, r)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct MeasureOnSpace {
    pub space: SampledSpace,
    pub weights: Vec<f64>,
}

impl MeasureOnSpace {
    pub fn new(space: SampledSpace, weights: Vec<f64>) -> Result<MeasureOnSpace> {
        if weights.len() != space.len() {
            return param("one weight per point required");
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return param("weights must be nonnegative");
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return param(format!("weights sum to {s}, not 1"));
        }
        Ok(MeasureOnSpace { space, weights })
    }

    pub fn uniform(space: SampledSpace) -> MeasureOnSpace {
        let n = space.len();
        MeasureOnSpace {
            space,
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&i| self.weights[i] > 0.0)
            .collect()
    }

    /// Mass of the open ball B(center, r).
    pub fn ball(&self, center: usize, r: f64) -> f64 {
        (0..self.space.len())
            .filter(|&j| self.space.d(center, j) < r)
            .map(|j| self.weights[j])
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    Identity { p: usize, value: f64 },
    Symmetry { p: usize, q: usize, pq: f64, qp: f64 },
    Triangle { p: usize, q: usize, r: usize, excess: f64 },
    Negative { p: usize, q: usize, value: f64 },
}

const AUDIT_TOL: f64 = 1e-12;

/// Checks identity, symmetry and the triangle inequality on up to `triple_budget` triples.
pub fn metric_audit(space: &SampledSpace, triple_budget: usize) -> Result<Vec<Violation>> {
    let n = space.len();
    if n == 0 {
        return Err(Error::EmptySpace);
    }
    let mut out = Vec::new();
    for p in 0..n {
        let v = space.d(p, p);
        if v.abs() > AUDIT_TOL {
            out.push(Violation::Identity { p, value: v });
        }
    }
    let pair_limit = triple_budget.max(n);
    let mut pairs = 0usize;
    'pairs: for p in 0..n {
        for q in p + 1..n {
            pairs += 1;
            if pairs > pair_limit {
                break 'pairs;
            }
            let pq = space.d(p, q);
            let qp = space.d(q, p);
            if pq < 0.0 || qp < 0.0 {
                out.push(Violation::Negative { p, q, value: pq.min(qp) });
            }
            if (pq - qp).abs() > AUDIT_TOL {
                out.push(Violation::Symmetry { p, q, pq, qp });
            }
        }
    }
    // triples in a fixed stride order so a budget covers the whole range
    let total = (n as u128).pow(3);
    let budget = triple_budget as u128;
    let stride = if total <= budget {
        1
    } else {
        (total / budget.max(1)) | 1
    };
    let mut t: u128 = 0;
    let mut checked = 0usize;
    while t < total && checked < triple_budget {
        let p = (t / (n as u128 * n as u128)) as usize;
        let q = ((t / n as u128) % n as u128) as usize;
        let r = (t % n as u128) as usize;
        let excess = space.d(p, r) - space.d(p, q) - space.d(q, r);
        if excess > 1e-9 {
            out.push(Violation::Triangle { p, q, r, excess });
        }
        checked += 1;
        t += stride;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedCount {
    pub count: usize,
    pub witness: Vec<usize>,
    /// best proven upper bound
    pub upper: usize,
    pub exact: bool,
}

/// Largest subset pairs of which are at distance > eps.
pub fn eps_separated_count(space: &SampledSpace, eps: f64) -> Result<SeparatedCount> {
    if !(eps > 0.0) {
        return param("eps must be positive");
    }
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    let idx: Vec<usize> = (0..space.len()).collect();
    Ok(separated_on_adjacency(&space.closeness(&idx, eps, false), &idx))
}

pub(crate) const EXACT_POINT_LIMIT: usize = 1 << 12;
pub(crate) const EXACT_SEARCH_LIMIT: usize = 48;

pub(crate) fn separated_on_adjacency(adj: &graph::Adjacency, idx: &[usize]) -> SeparatedCount {
    let greedy = graph::greedy_independent(adj);
    let upper = graph::clique_partition(adj);
    if greedy.len() == upper {
        return SeparatedCount {
            count: upper,
            witness: greedy.iter().map(|&i| idx[i]).collect(),
            upper,
            exact: true,
        };
    }
    if adj.len() <= EXACT_SEARCH_LIMIT {
        if let Some(best) = graph::exact_independent(adj, 1 << 24) {
            return SeparatedCount {
                count: best.len(),
                witness: best.iter().map(|&i| idx[i]).collect(),
                upper: best.len(),
                exact: true,
            };
        }
    }
    SeparatedCount {
        count: greedy.len(),
        witness: greedy.iter().map(|&i| idx[i]).collect(),
        upper,
        exact: false,
    }
}

/// Upper box dimension from maximal separated counts over an eps ladder.
pub fn upper_box_dimension(space: &SampledSpace, eps_ladder: &[f64]) -> Result<DimensionReport> {
    check_eps_ladder(eps_ladder)?;
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    let min_gap = space.min_gap();
    let mut diag = Diagnostics::default();
    let mut records = Vec::new();
    let mut per_eps = Vec::new();
    for &eps in eps_ladder {
        let c = eps_separated_count(space, eps)?;
        if eps < min_gap || c.count == space.len() {
            diag.resolution_limited = true;
            diag.note(format!("eps {eps} at or below sample resolution"));
        }
        if !c.exact {
            diag.greedy_used = true;
        }
        let l = (c.count as f64).ln();
        per_eps.push(l);
        records.push(ScaleRecord {
            eps,
            n_ladder: vec![],
            counts: vec![c.count as f64],
            stderr: vec![0.0],
            values: vec![l / (1.0 / eps).ln()],
            increments: vec![],
            sup_estimate: l,
            inf_estimate: l,
        });
    }
    Ok(DimensionReport::new(records, eps_ladder, per_eps, diag))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityEstimate {
    pub l: f64,
    /// (y1, y2, eps) attaining the maximum
    pub argmax: Option<(usize, usize, f64)>,
    /// pairs whose eps-ball has zero mass
    pub failures: Vec<(usize, usize, f64)>,
}

/// Empirical lower bound on the homogeneity constant over support pairs.
pub fn homogeneity_constant(
    mu: &MeasureOnSpace,
    eps_ladder: &[f64],
    pair_budget: usize,
) -> Result<HomogeneityEstimate> {
    if eps_ladder.iter().any(|e| !(*e > 0.0)) {
        return param("eps ladder must be positive");
    }
    let supp = mu.support();
    let k = supp.len();
    let total = (k * k).max(1);
    let stride = if total <= pair_budget {
        1
    } else {
        total / pair_budget.max(1)
    };
    let mut est = HomogeneityEstimate {
        l: 0.0,
        argmax: None,
        failures: vec![],
    };
    for &eps in eps_ladder {
        let big: Vec<f64> = supp.iter().map(|&y| mu.ball(y, 2.0 * eps)).collect();
        let small: Vec<f64> = supp.iter().map(|&y| mu.ball(y, eps)).collect();
        let mut t = 0;
        while t < total {
            let (a, b) = (t / k, t % k);
            if small[b] <= 0.0 {
                est.failures.push((supp[a], supp[b], eps));
            } else {
                let r = big[a] / small[b];
                if r > est.l {
                    est.l = r;
                    est.argmax = Some((supp[a], supp[b], eps));
                }
            }
            t += stride;
        }
    }
    Ok(est)
}

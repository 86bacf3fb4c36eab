//! Birkhoff averages along words, irregularity scores, explicit irregular points and the
//! irregular-set dimension harness.

use std::sync::Arc;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::counting::CountMode;
use crate::dynamics::Generators;
use crate::error::{param, Error, Result};
use crate::mdim::{mdim_whole, subset_mdim, EstimatorOptions, Variant};
use crate::randomwalk::RandomWalkSpec;
use crate::report::Diagnostics;
use crate::semigroup::Word;
use crate::shift::{CoordMap, ShiftSystem, ShiftTarget};
use crate::skew::{skew_apply, SkewPoint};

pub type ObservableFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Observable {
    FirstCoordinate,
    Coordinate(usize),
    Constant(f64),
    Custom { name: String, f: ObservableFn },
}

impl std::fmt::Debug for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

impl Observable {
    pub fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Observable::FirstCoordinate => p[0],
            Observable::Coordinate(i) => p[*i],
            Observable::Constant(c) => *c,
            Observable::Custom { f, .. } => f(p),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Observable::FirstCoordinate => "x0".into(),
            Observable::Coordinate(i) => format!("x{i}"),
            Observable::Constant(c) => format!("const({c})"),
            Observable::Custom { name, .. } => name.clone(),
        }
    }

    pub fn by_name(name: &str) -> Result<Observable> {
        if name == "x0" || name == "first-coordinate" {
            return Ok(Observable::FirstCoordinate);
        }
        if let Some(i) = name.strip_prefix('x').and_then(|s| s.parse().ok()) {
            return Ok(Observable::Coordinate(i));
        }
        if let Some(c) = name
            .strip_prefix("const(")
            .and_then(|s| s.strip_suffix(')'))
            .and_then(|s| s.parse().ok())
        {
            return Ok(Observable::Constant(c));
        }
        param(format!("unknown observable '{name}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableTrace {
    pub omega: Word,
    /// A_m = (1/m) sum_{j<m} phi(f_{omega|[1,j]} x), m = 1..n
    pub partials: Vec<f64>,
    pub oscillation: f64,
}

/// max - min of the partial averages over the trailing half.
pub fn tail_oscillation(partials: &[f64]) -> f64 {
    if partials.is_empty() {
        return 0.0;
    }
    let start = (partials.len() / 2).saturating_sub(1);
    let tail = &partials[start..];
    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo
}

fn partials_of(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut sum = 0.0;
    values
        .enumerate()
        .map(|(j, v)| {
            sum += v;
            sum / (j + 1) as f64
        })
        .collect()
}

pub fn birkhoff_trace<G: Generators>(
    sys: &G,
    phi: &Observable,
    x: &G::P,
    omega: &Word,
    n: usize,
) -> Result<ObservableTrace> {
    if omega.len() < n {
        return param("omega shorter than n");
    }
    omega.check(sys.alphabet_len())?;
    let mut vals = Vec::with_capacity(n);
    let mut q = x.clone();
    for j in 0..n {
        vals.push(phi.eval(sys.coords(&q)));
        if j + 1 < n {
            q = sys.step_point(omega.symbols[j], &q);
        }
    }
    let partials = partials_of(vals.into_iter());
    Ok(ObservableTrace {
        omega: omega.prefix(n),
        oscillation: tail_oscillation(&partials),
        partials,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    Fixed(Word),
    /// best of the first `candidates` omega constructions
    Adversarial { candidates: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Irregularity {
    pub oscillation: f64,
    pub omega: Word,
}

/// Greedy omega: alternately push phi up and down over blocks of geometric length.
fn greedy_omega<G: Generators>(sys: &G, phi: &Observable, x: &G::P, n: usize, base: f64) -> Word {
    let k = sys.alphabet_len();
    let mut q = x.clone();
    let mut w = Word::empty();
    for j in 0..n {
        let phase = ((j + 1) as f64).ln() / base.ln();
        let up = (phase.floor() as i64) % 2 == 0;
        let mut best = 0;
        let mut best_q = sys.step_point(0, &q);
        let mut best_v = phi.eval(sys.coords(&best_q));
        for a in 1..k {
            let nq = sys.step_point(a, &q);
            let v = phi.eval(sys.coords(&nq));
            if (up && v > best_v) || (!up && v < best_v) {
                best = a;
                best_q = nq;
                best_v = v;
            }
        }
        w.push(best);
        q = best_q;
    }
    w
}

/// Candidate omega number `i` for the adversarial search.
fn candidate<G: Generators>(sys: &G, phi: &Observable, x: &G::P, n: usize, i: usize, seed: u64) -> Word {
    let k = sys.alphabet_len();
    if i < k {
        return Word::new(vec![i; n]);
    }
    match i - k {
        0 => greedy_omega(sys, phi, x, n, 2.0),
        1 => greedy_omega(sys, phi, x, n, 3.0),
        r => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let s = Uniform::new(0, k);
            Word::new((0..n).map(|_| s.sample(&mut rng)).collect())
        }
    }
}

/// Oscillation of the partial averages at x, for a fixed omega or the best of several.
pub fn irregularity_score<G: Generators>(
    sys: &G,
    phi: &Observable,
    x: &G::P,
    n: usize,
    strategy: &Strategy,
) -> Result<Irregularity> {
    if n == 0 {
        return param("n must be positive");
    }
    match strategy {
        Strategy::Fixed(w) => {
            let t = birkhoff_trace(sys, phi, x, w, n)?;
            Ok(Irregularity {
                oscillation: t.oscillation,
                omega: t.omega,
            })
        }
        Strategy::Adversarial { candidates, seed } => {
            let mut best: Option<Irregularity> = None;
            for i in 0..(*candidates).max(1) {
                let w = candidate(sys, phi, x, n, i, *seed);
                let t = birkhoff_trace(sys, phi, x, &w, n)?;
                if best.as_ref().map_or(true, |b| t.oscillation > b.oscillation) {
                    best = Some(Irregularity {
                        oscillation: t.oscillation,
                        omega: t.omega,
                    });
                }
            }
            Ok(best.unwrap())
        }
    }
}

/// Coordinates of the doubling-block sequence lo^1 hi^2 lo^4 hi^8 ...
pub fn block_sequence(lo: f64, hi: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut b = 0u32;
    while out.len() < len {
        let v = if b % 2 == 0 { lo } else { hi };
        for _ in 0..(1usize << b) {
            if out.len() == len {
                break;
            }
            out.push(v);
        }
        b += 1;
    }
    out
}

/// Doubling-block point for a coordinate observable, with a constant omega.
///
/// `n` is the trace length the point must support; the point has depth + n coordinates.
pub fn construct_irregular(sys: &ShiftSystem, phi: &Observable, n: usize) -> Result<(Vec<f64>, Word)> {
    let offset = match phi {
        Observable::FirstCoordinate => 0,
        Observable::Coordinate(i) => *i,
        Observable::Constant(_) => {
            return Err(Error::Unsupported("constant observable has no irregular point".into()))
        }
        Observable::Custom { .. } => {
            return Err(Error::Unsupported("explicit construction needs a coordinate observable".into()))
        }
    };
    let lo = sys.levels[0];
    let hi = sys.levels[sys.levels.len() - 1];
    let len = sys.depth.max(offset + 1) + n;
    let mut point = vec![lo; offset];
    point.extend(block_sequence(lo, hi, len - offset));
    let ident = sys
        .generators
        .iter()
        .position(|&g| g == CoordMap::Identity)
        .unwrap_or(0);
    Ok((point, Word::new(vec![ident; n])))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrregularOptions {
    /// trace length
    pub n: usize,
    /// seeded random tails scored besides the constructed one
    pub random_tails: usize,
    /// adversarial candidates per tail
    pub candidates: usize,
    pub seed: u64,
    /// irregularity threshold; None means 0.1 * range(phi)
    pub threshold: Option<f64>,
    pub budget: usize,
    pub tol: f64,
}

impl Default for IrregularOptions {
    fn default() -> Self {
        IrregularOptions {
            n: 4096,
            random_tails: 4,
            candidates: 4,
            seed: 0,
            threshold: None,
            budget: 4096,
            tol: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailScore {
    pub label: String,
    pub score: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem5Report {
    pub threshold: f64,
    pub margin: f64,
    pub tails: Vec<TailScore>,
    pub certified: usize,
    pub umdim_irregular: Option<f64>,
    pub mdim_whole: f64,
    pub gap: Option<f64>,
    pub tol: f64,
    /// None when no irregular point was detected (no assertion)
    pub holds: Option<bool>,
    pub inclusion_checked: usize,
    pub inclusion_counterexamples: usize,
    pub trace_mismatches: usize,
    pub diagnostics: Diagnostics,
}

/// Range of phi over the constant sequences at each level.
pub fn observable_range(sys: &ShiftSystem, phi: &Observable) -> f64 {
    let vals: Vec<f64> = sys
        .levels
        .iter()
        .map(|&v| phi.eval(&vec![v; sys.depth.max(8)]))
        .collect();
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Skew trace of psi(omega, x) = phi(x) along F, iterated with skew_apply.
pub fn skew_trace(sys: &ShiftSystem, phi: &Observable, x: &[f64], omega: &Word, n: usize) -> Result<Vec<f64>> {
    let mut p = SkewPoint {
        omega: omega.clone(),
        x: x.to_vec(),
    };
    let mut vals = Vec::with_capacity(n);
    for j in 0..n {
        vals.push(phi.eval(&p.x));
        if j + 1 < n {
            p = skew_apply(sys, 0, &p)?;
        }
    }
    Ok(partials_of(vals.into_iter()))
}

/// Irregular points are detected on tails; Z_irr = every prefix over the truncation depth times
/// the certified tails. Compares its umdim with the whole-space mdim and checks that skew-irregular
/// pairs project to irregular points.
pub fn theorem5_harness(
    sys: &ShiftSystem,
    walk: &RandomWalkSpec,
    phi: &Observable,
    eps_ladder: &[f64],
    n_ladder: &[usize],
    opts: &IrregularOptions,
) -> Result<Theorem5Report> {
    let n = opts.n;
    let range = observable_range(sys, phi);
    let threshold = opts.threshold.unwrap_or(0.1 * range);
    if !(threshold > 0.0) && range > 0.0 {
        return param("threshold must be positive");
    }
    let d = sys.depth;
    // moving D leading coordinates shifts each late partial average by at most 2 D range / n
    let margin = 4.0 * d as f64 * range / n as f64;
    let lo = sys.levels[0];
    let len = d + n;
    let mut tails: Vec<(String, Vec<f64>)> = Vec::new();
    if let Ok((p, _)) = construct_irregular(sys, phi, n) {
        tails.push(("blocks".into(), p[..len.min(p.len())].to_vec()));
    }
    tails.push(("constant".into(), vec![lo; len]));
    let g = sys.levels.len();
    for r in 0..opts.random_tails {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(1000 + r as u64);
        let s = Uniform::new(0, g);
        tails.push((
            format!("random-{r}"),
            (0..len).map(|_| sys.levels[s.sample(&mut rng)]).collect(),
        ));
    }
    let strategy = Strategy::Adversarial {
        candidates: opts.candidates,
        seed: opts.seed,
    };
    let mut scores = Vec::new();
    let mut witnesses = Vec::new();
    for (label, tail) in &tails {
        // score with the filler prefix; certification covers every prefix
        let mut x = vec![lo; d];
        x.extend_from_slice(&tail[d.min(tail.len())..]);
        x.resize(len, lo);
        let s = irregularity_score(sys, phi, &x, n, &strategy)?;
        let certified = range > 0.0 && s.oscillation - margin > threshold;
        scores.push(TailScore {
            label: label.clone(),
            score: s.oscillation,
            certified,
        });
        witnesses.push((x, s.omega));
    }
    let certified = scores.iter().filter(|t| t.certified).count();
    // inclusion: skew-irregular (omega, x) must be base-irregular along the same omega
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(7);
    let s = Uniform::new(0, g);
    let mut checked = 0;
    let mut counterexamples = 0;
    let mut mismatches = 0;
    for (x, omega) in &witnesses {
        let mut prefixed = x.clone();
        for c in prefixed.iter_mut().take(d) {
            *c = sys.levels[s.sample(&mut rng)];
        }
        for pt in [x, &prefixed] {
            let base = birkhoff_trace(sys, phi, pt, omega, n)?;
            let skew = skew_trace(sys, phi, pt, omega, n)?;
            checked += 1;
            if base.partials != skew {
                mismatches += 1;
            }
            if tail_oscillation(&skew) > threshold && !(base.oscillation > threshold) {
                counterexamples += 1;
            }
        }
    }
    let whole = mdim_whole(sys, walk, eps_ladder, n_ladder, Variant::Upper, EstimatorOptions {
        budget: opts.budget,
        ..Default::default()
    })?;
    let mut diagnostics = whole.diagnostics.clone();
    let (umdim_irregular, gap, holds) = if certified == 0 {
        diagnostics.note("irregular set empty at this resolution");
        (None, None, None)
    } else {
        let z = ShiftTarget {
            coords: sys.full_product().coords,
            tails: certified,
        };
        let rep = subset_mdim(sys, walk, &z, eps_ladder, n_ladder, Variant::Upper, CountMode::Auto, opts.budget)?;
        diagnostics.merge(&rep.diagnostics);
        let gap = (rep.slope - whole.slope).abs();
        (Some(rep.slope), Some(gap), Some(gap <= opts.tol))
    };
    Ok(Theorem5Report {
        threshold,
        margin,
        tails: scores,
        certified,
        umdim_irregular,
        mdim_whole: whole.slope,
        gap,
        tol: opts.tol,
        holds,
        inclusion_checked: checked,
        inclusion_counterexamples: counterexamples,
        trace_mismatches: mismatches,
        diagnostics,
    })
}

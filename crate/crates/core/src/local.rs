//! Local entropies of measures along words, local metric mean dimensions and the
//! local-to-global bracket.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::BallMass;
use crate::error::{param, Result};
use crate::mdim::{cp_dimension, CoverMeasure};
use crate::randomwalk::RandomWalkSpec;
use crate::report::{check_eps_ladder, check_n_ladder, regression_slope, Diagnostics, ScaleRecord};
use crate::semigroup::Word;

pub const BEAM_WIDTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalKind {
    /// infimum of ball masses over words (L+)
    Plus,
    /// supremum of ball masses over words (L-)
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordMode {
    Exhaustive,
    Adversarial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalEntropyEstimate {
    pub eps: f64,
    pub kind: LocalKind,
    pub n_ladder: Vec<usize>,
    /// extremal ball mass per n
    pub masses: Vec<f64>,
    /// extremal word per n
    pub words: Vec<String>,
    /// -(1/(n+1)) log mass
    pub values: Vec<f64>,
    pub liminf: f64,
    pub exhaustive: bool,
    pub diagnostics: Diagnostics,
}

fn better(kind: LocalKind, a: f64, b: f64) -> bool {
    match kind {
        LocalKind::Plus => a < b,
        LocalKind::Minus => a > b,
    }
}

fn extremal_exhaustive<S: BallMass>(
    sys: &S,
    mu: &S::Measure,
    x: &S::P,
    eps: f64,
    n: usize,
    kind: LocalKind,
) -> Result<(f64, Word)> {
    let words = Word::all(sys.alphabet_len(), n);
    let masses: Vec<f64> = words
        .par_iter()
        .map(|w| sys.ball_mass(mu, w, x, eps))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for i in 1..masses.len() {
        if better(kind, masses[i], masses[best]) {
            best = i;
        }
    }
    Ok((masses[best], words[best].clone()))
}

/// Beam search over symbol extensions; returns the best (mass, word) at every length 0..=n_max.
fn extremal_beam<S: BallMass>(
    sys: &S,
    mu: &S::Measure,
    x: &S::P,
    eps: f64,
    n_max: usize,
    kind: LocalKind,
) -> Result<Vec<(f64, Word)>> {
    let k = sys.alphabet_len();
    let start = Word::empty();
    let m0 = sys.ball_mass(mu, &start, x, eps)?;
    let mut beam = vec![(m0, start)];
    let mut out = vec![beam[0].clone()];
    for _ in 0..n_max {
        let cands: Vec<Word> = beam
            .iter()
            .flat_map(|(_, w)| {
                (0..k).map(move |a| {
                    let mut v = w.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
        let mut scored: Vec<(f64, Word)> = cands
            .into_par_iter()
            .map(|w| Ok((sys.ball_mass(mu, &w, x, eps)?, w)))
            .collect::<Result<_>>()?;
        scored.sort_by(|a, b| {
            let o = a.0.partial_cmp(&b.0).unwrap();
            let o = if kind == LocalKind::Minus { o.reverse() } else { o };
            o.then_with(|| a.1.symbols.cmp(&b.1.symbols))
        });
        scored.dedup_by(|a, b| a.1 == b.1);
        scored.truncate(BEAM_WIDTH);
        out.push(scored[0].clone());
        beam = scored;
    }
    Ok(out)
}

/// h^{L+} (kind Plus) or h^{L-} (kind Minus) of mu at x and scale eps.
#[allow(clippy::too_many_arguments)]
pub fn local_entropy<S: BallMass>(
    sys: &S,
    mu: &S::Measure,
    x: &S::P,
    eps: f64,
    n_ladder: &[usize],
    kind: LocalKind,
    mode: WordMode,
    budget: usize,
) -> Result<LocalEntropyEstimate> {
    if !(eps > 0.0) {
        return param("eps must be positive");
    }
    check_n_ladder(n_ladder, 0)?;
    let k = sys.alphabet_len() as u128;
    let n_max = *n_ladder.last().unwrap();
    let feasible = k.checked_pow(n_max as u32).is_some_and(|c| c <= budget as u128);
    let mut diag = Diagnostics::default();
    let exhaustive = mode == WordMode::Exhaustive && feasible;
    if mode == WordMode::Exhaustive && !feasible {
        diag.note("exhaustive word search over budget; switched to beam search");
    }
    let picks: Vec<(f64, Word)> = if exhaustive {
        n_ladder
            .iter()
            .map(|&n| extremal_exhaustive(sys, mu, x, eps, n, kind))
            .collect::<Result<_>>()?
    } else {
        let all = extremal_beam(sys, mu, x, eps, n_max, kind)?;
        n_ladder.iter().map(|&n| all[n].clone()).collect()
    };
    let masses: Vec<f64> = picks.iter().map(|p| p.0).collect();
    let logs: Vec<f64> = masses.iter().map(|m| -m.max(f64::MIN_POSITIVE).ln()).collect();
    let rec = ScaleRecord::from_logs(eps, n_ladder, masses.clone(), vec![0.0; masses.len()], &logs, 1);
    Ok(LocalEntropyEstimate {
        eps,
        kind,
        n_ladder: n_ladder.to_vec(),
        words: picks.iter().map(|p| p.1.to_string()).collect(),
        masses,
        values: rec.values,
        liminf: rec.inf_estimate,
        exhaustive,
        diagnostics: diag,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalVariant {
    /// tail-max over eps of h^{L+}/log(1/eps)
    Upper,
    /// tail-min over eps of h^{L-}/log(1/eps)
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalMdim {
    pub value: f64,
    pub eps_ladder: Vec<f64>,
    pub entropies: Vec<f64>,
    pub ratios: Vec<f64>,
    /// regression slope of the entropies against log(1/eps)
    pub slope: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn local_mdim<S: BallMass>(
    sys: &S,
    mu: &S::Measure,
    x: &S::P,
    eps_ladder: &[f64],
    n_ladder: &[usize],
    variant: LocalVariant,
    mode: WordMode,
    budget: usize,
) -> Result<LocalMdim> {
    check_eps_ladder(eps_ladder)?;
    let kind = match variant {
        LocalVariant::Upper => LocalKind::Plus,
        LocalVariant::Lower => LocalKind::Minus,
    };
    let entropies: Vec<f64> = eps_ladder
        .iter()
        .map(|&e| Ok(local_entropy(sys, mu, x, e, n_ladder, kind, mode, budget)?.liminf))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = eps_ladder.iter().map(|e| (1.0 / e).ln()).collect();
    let ratios: Vec<f64> = entropies.iter().zip(&xs).map(|(h, l)| h / l).collect();
    let tail = &ratios[ratios.len() / 2..];
    let value = match variant {
        LocalVariant::Upper => tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        LocalVariant::Lower => tail.iter().cloned().fold(f64::INFINITY, f64::min),
    };
    Ok(LocalMdim {
        value,
        eps_ladder: eps_ladder.to_vec(),
        slope: regression_slope(&xs, &entropies),
        entropies,
        ratios,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    /// min over sampled x in Z of the lower local mdim
    pub s_minus: f64,
    /// max over sampled x in Z of the upper local mdim
    pub s_plus: f64,
    /// CP exponent of Z in ratio form (tail-max over eps of lambda(eps)/log(1/eps))
    pub cp: f64,
    pub cp_per_eps: Vec<f64>,
    pub mu_z: f64,
    pub lower_checked: bool,
    pub lower_holds: bool,
    pub upper_holds: bool,
    pub tol: f64,
    pub diagnostics: Diagnostics,
}

impl BracketReport {
    pub fn holds(&self) -> bool {
        self.upper_holds && (!self.lower_checked || self.lower_holds)
    }
}

/// Brackets the CP exponent of Z between the extreme local mdims of sampled points of Z.
#[allow(clippy::too_many_arguments)]
pub fn theorem1_harness<S: BallMass + CoverMeasure>(
    sys: &S,
    mu: &S::Measure,
    mu_z: f64,
    walk: &RandomWalkSpec,
    target: &<S as crate::counting::WordCounter>::Target,
    points: &[S::P],
    eps_ladder: &[f64],
    n_ladder: &[usize],
    budget: usize,
    tol: f64,
) -> Result<BracketReport> {
    if points.is_empty() {
        return param("need at least one sampled point of Z");
    }
    let locals: Vec<(f64, f64)> = points
        .par_iter()
        .map(|x| {
            let lo = local_mdim(sys, mu, x, eps_ladder, n_ladder, LocalVariant::Lower, WordMode::Exhaustive, budget)?;
            let up = local_mdim(sys, mu, x, eps_ladder, n_ladder, LocalVariant::Upper, WordMode::Exhaustive, budget)?;
            Ok((lo.value, up.value))
        })
        .collect::<Result<_>>()?;
    let s_minus = locals.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let s_plus = locals.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let (rep, _) = cp_dimension(sys, walk, target, eps_ladder, n_ladder, budget)?;
    let cp = rep.ratio_sup;
    let mut diagnostics = rep.diagnostics.clone();
    diagnostics.note("local dimensions evaluated on sampled points of Z only");
    let lower_checked = mu_z > 0.0;
    if !lower_checked {
        diagnostics.note("mu(Z) = 0: lower bound not asserted");
    }
    Ok(BracketReport {
        s_minus,
        s_plus,
        cp,
        cp_per_eps: rep.per_eps.clone(),
        mu_z,
        lower_checked,
        lower_holds: s_minus - tol <= cp,
        upper_holds: cp <= s_plus + tol,
        tol,
        diagnostics,
    })
}

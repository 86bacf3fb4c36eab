//! Report types shared by the estimators, plus the ladder arithmetic they use.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Diagnostics {
    pub resolution_limited: bool,
    pub greedy_used: bool,
    pub horizon_limited: bool,
    pub monte_carlo: bool,
    pub snap_error: f64,
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Diagnostics) {
        self.resolution_limited |= other.resolution_limited;
        self.greedy_used |= other.greedy_used;
        self.horizon_limited |= other.horizon_limited;
        self.monte_carlo |= other.monte_carlo;
        self.snap_error = self.snap_error.max(other.snap_error);
        for n in &other.notes {
            if !self.notes.contains(n) {
                self.notes.push(n.clone());
            }
        }
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        if !self.notes.contains(&msg) {
            self.notes.push(msg);
        }
    }
}

/// One scale of a ladder computation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScaleRecord {
    pub eps: f64,
    pub n_ladder: Vec<usize>,
    /// averaged counts (or extremal masses for local entropies)
    pub counts: Vec<f64>,
    pub stderr: Vec<f64>,
    /// per-n normalized logarithms
    pub values: Vec<f64>,
    /// ladder increments of the unnormalized logarithm
    pub increments: Vec<f64>,
    pub sup_estimate: f64,
    pub inf_estimate: f64,
}

impl ScaleRecord {
    /// Builds a record from log-quantities `logs[i]` at `n_ladder[i]`, normalized by `n + offset`.
    pub fn from_logs(
        eps: f64,
        n_ladder: &[usize],
        counts: Vec<f64>,
        stderr: Vec<f64>,
        logs: &[f64],
        offset: usize,
    ) -> ScaleRecord {
        let values = n_ladder
            .iter()
            .zip(logs)
            .map(|(&n, &l)| {
                let d = n + offset;
                if d == 0 {
                    l
                } else {
                    l / d as f64
                }
            })
            .collect();
        let increments = increments(n_ladder, logs);
        let tail = tail_increments(n_ladder.len(), &increments);
        let (sup_estimate, inf_estimate) = if tail.is_empty() {
            let v = logs.last().copied().unwrap_or(0.0);
            (v, v)
        } else {
            (
                tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                tail.iter().cloned().fold(f64::INFINITY, f64::min),
            )
        };
        ScaleRecord {
            eps,
            n_ladder: n_ladder.to_vec(),
            counts,
            stderr,
            values,
            increments,
            sup_estimate,
            inf_estimate,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DimensionReport {
    pub records: Vec<ScaleRecord>,
    pub eps_ladder: Vec<f64>,
    /// the per-scale value regressed against log(1/eps)
    pub per_eps: Vec<f64>,
    /// per_eps / log(1/eps)
    pub ratios: Vec<f64>,
    pub slope: f64,
    pub ratio_sup: f64,
    pub ratio_inf: f64,
    pub diagnostics: Diagnostics,
}

impl DimensionReport {
    pub fn new(
        records: Vec<ScaleRecord>,
        eps_ladder: &[f64],
        per_eps: Vec<f64>,
        diagnostics: Diagnostics,
    ) -> DimensionReport {
        let xs: Vec<f64> = eps_ladder.iter().map(|e| (1.0 / e).ln()).collect();
        let ratios: Vec<f64> = per_eps.iter().zip(&xs).map(|(v, x)| v / x).collect();
        let slope = regression_slope(&xs, &per_eps);
        let tail = &ratios[ratios.len() / 2..];
        let ratio_sup = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ratio_inf = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        DimensionReport {
            records,
            eps_ladder: eps_ladder.to_vec(),
            per_eps,
            ratios,
            slope,
            ratio_sup,
            ratio_inf,
            diagnostics,
        }
    }

    /// Recomputes the slope from the stored per-scale values.
    pub fn recomputed_slope(&self) -> f64 {
        let xs: Vec<f64> = self.eps_ladder.iter().map(|e| (1.0 / e).ln()).collect();
        regression_slope(&xs, &self.per_eps)
    }
}

/// Unweighted least-squares slope of ys against xs.
pub fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Ladder increments (l[i] - l[i-1]) / (n[i] - n[i-1]).
pub fn increments(n_ladder: &[usize], logs: &[f64]) -> Vec<f64> {
    (1..n_ladder.len())
        .map(|i| (logs[i] - logs[i - 1]) / (n_ladder[i] - n_ladder[i - 1]) as f64)
        .collect()
}

/// Increments whose right endpoint lies in the trailing half of a ladder of length `len`.
pub fn tail_increments(len: usize, incs: &[f64]) -> Vec<f64> {
    let start = (len / 2).max(1);
    (start..len).map(|j| incs[j - 1]).collect()
}

pub fn check_eps_ladder(eps: &[f64]) -> crate::Result<()> {
    if eps.len() < 3 {
        return crate::error::param("eps ladder needs at least 3 scales");
    }
    if eps.iter().any(|e| !(*e > 0.0)) {
        return crate::error::param("eps ladder scales must be positive");
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return crate::error::param("eps ladder must be strictly decreasing");
    }
    Ok(())
}

pub fn check_n_ladder(ns: &[usize], min: usize) -> crate::Result<()> {
    if ns.len() < 2 {
        return crate::error::param("n ladder needs at least 2 entries");
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return crate::error::param("n ladder must be strictly increasing");
    }
    if ns[0] < min {
        return crate::error::param(format!("n ladder entries must be >= {min}"));
    }
    Ok(())
}

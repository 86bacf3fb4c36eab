//! Config-driven experiment runner: one CSV table and one JSON summary per run.

use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Config, Experiment, GlueMode, TargetKind};
use crate::counting::{disjoint_subfamily, sandwich_check, BallSpec, CountKind, WordCounter};
use crate::dynamics::{BallMass, Generators};
use crate::error::{Error, Result};
use crate::irregular::{
    birkhoff_trace, construct_irregular, irregularity_score, tail_oscillation, theorem5_harness, IrregularOptions,
    Observable, Strategy,
};
use crate::local::{local_entropy, local_mdim, theorem1_harness, LocalKind, LocalVariant, WordMode, BEAM_WIDTH};
use crate::mdim::{
    cp_averaged, cp_dimension, cp_outer_measure, mdim_whole, open_cover_oracle, subset_mdim, CoverMeasure, CpQuery,
    EstimatorOptions, Variant,
};
use crate::metric::{metric_audit, upper_box_dimension, MeasureOnSpace};
use crate::randomwalk::RandomWalkSpec;
use crate::report::{DimensionReport, Diagnostics};
use crate::semigroup::{Closure, SemigroupSystem, Word};
use crate::shift::{ShiftSystem, ShiftTarget};
use crate::skew::{
    gluing_search, materialize_skew, skew_apply, specification_search, symbol_space, theorem4_harness, verify_glue,
    GlueInstance, GlueOptions, SkewPoint,
};
use crate::zoo::{instantiate, ZooInstance, ZooMeasure, ZooSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Violation,
    Incomplete,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Violation => 2,
            Status::Incomplete => 3,
        }
    }
}

/// Exit code for errors that stop a run before any output.
pub const CONFIG_EXIT: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub experiment: Experiment,
    pub status: Status,
    pub csv: String,
    pub summary: String,
}

impl RunOutput {
    /// Writes `<experiment>.csv` and `<experiment>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let name = self.experiment.name();
        std::fs::write(dir.join(format!("{name}.csv")), &self.csv)?;
        std::fs::write(dir.join(format!("{name}.json")), &self.summary)?;
        Ok(())
    }
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Table {
        Table {
            header: header.to_vec(),
            rows: vec![],
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn render(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

fn f(x: f64) -> String {
    format!("{x}")
}

struct Part {
    table: Table,
    results: Value,
    diagnostics: Diagnostics,
    status: Status,
}

fn header(e: Experiment) -> &'static [&'static str] {
    match e {
        Experiment::Boxdim => &["epsilon", "count", "log_count", "ratio"],
        Experiment::Mdim | Experiment::Cp => &["epsilon", "n", "kind", "count_mean", "count_stderr", "entropy", "exponent"],
        Experiment::Localent => &["x_index", "epsilon", "n", "kind", "mass", "value"],
        Experiment::Skew => &["quantity", "value"],
        Experiment::Glue => &["witness", "gap_words", "y", "level"],
        Experiment::Irregular => &["x_index", "n", "partial_average", "oscillation"],
        Experiment::Verify => &["invariant", "checked", "violations", "detail"],
    }
}

/// Runs the configured experiment. Budget overruns come back as an incomplete run with the
/// header-only table; other errors are returned.
pub fn run(cfg: &Config, base_dir: &Path) -> Result<RunOutput> {
    let inst = instantiate(&cfg.preset, &cfg.system).map_err(|e| Error::Config {
        field: "system".into(),
        line: 0,
        msg: e.to_string(),
    })?;
    let walk = inst.walk(cfg.seed);
    let res = match cfg.experiment {
        Experiment::Boxdim => boxdim(cfg, &inst),
        Experiment::Mdim => match &inst.system {
            ZooSystem::Sampled(s) => mdim(cfg, s, &walk),
            ZooSystem::Shift(s) => mdim(cfg, s, &walk),
        },
        Experiment::Cp => match &inst.system {
            ZooSystem::Sampled(s) => cp(cfg, s, &sampled_target(cfg, s)?, &walk),
            ZooSystem::Shift(s) => cp(cfg, s, &shift_target(cfg, s)?, &walk),
        },
        Experiment::Localent => localent(cfg, &inst, &walk),
        Experiment::Skew => match &inst.system {
            ZooSystem::Sampled(s) => skew(cfg, s, &sampled_target(cfg, s)?),
            ZooSystem::Shift(s) => skew(cfg, s, &shift_target(cfg, s)?),
        },
        Experiment::Glue => glue(cfg, &inst, base_dir),
        Experiment::Irregular => irregular(cfg, &inst, &walk),
        Experiment::Verify => verify(cfg, &inst, &walk),
    };
    let part = match res {
        Ok(p) => p,
        Err(e @ Error::Budget { .. }) => {
            let mut diagnostics = Diagnostics::default();
            diagnostics.note(e.to_string());
            Part {
                table: Table::new(header(cfg.experiment)),
                results: Value::Null,
                diagnostics,
                status: Status::Incomplete,
            }
        }
        Err(e) => return Err(e),
    };
    let summary = json!({
        "experiment": cfg.experiment,
        "preset": cfg.preset,
        "seed": cfg.seed,
        "ladders": cfg.ladders,
        "config": cfg,
        "status": part.status,
        "results": part.results,
        "diagnostics": part.diagnostics,
    });
    Ok(RunOutput {
        experiment: cfg.experiment,
        status: part.status,
        csv: part.table.render()?,
        summary: serde_json::to_string_pretty(&summary)? + "\n",
    })
}

fn rng_for(cfg: &Config, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    rng
}

fn sampled_view(inst: &ZooInstance, limit: usize) -> Result<SemigroupSystem> {
    match &inst.system {
        ZooSystem::Sampled(s) => Ok(s.clone()),
        ZooSystem::Shift(s) => s.materialize(limit),
    }
}

fn sampled_target(cfg: &Config, sys: &SemigroupSystem) -> Result<Vec<usize>> {
    let n = sys.phase.len();
    match cfg.target.kind {
        TargetKind::Full => Ok((0..n).collect()),
        TargetKind::Indices => {
            if let Some(&i) = cfg.target.indices.iter().find(|&&i| i >= n) {
                return Err(Error::Config {
                    field: "target.indices".into(),
                    line: 0,
                    msg: format!("index {i} outside the phase sample of {n} points"),
                });
            }
            let mut z = cfg.target.indices.clone();
            z.sort();
            z.dedup();
            Ok(z)
        }
        TargetKind::RandomHalf => {
            let mut z = sample(&mut rng_for(cfg, 99), n, n.div_ceil(2)).into_vec();
            z.sort();
            Ok(z)
        }
    }
}

fn shift_target(cfg: &Config, sys: &ShiftSystem) -> Result<ShiftTarget> {
    let mut t = sys.full_product();
    match cfg.target.kind {
        TargetKind::Full => Ok(t),
        TargetKind::Indices => Err(Error::Unsupported("index targets need a sampled preset".into())),
        TargetKind::RandomHalf => {
            // first coordinate restricted to a seeded half of the levels
            let g = sys.levels.len();
            let mut h = sample(&mut rng_for(cfg, 99), g, g.div_ceil(2)).into_vec();
            h.sort();
            t.coords[0] = h;
            Ok(t)
        }
    }
}

fn estimator(cfg: &Config) -> EstimatorOptions {
    EstimatorOptions {
        kind: cfg.estimator.kind,
        mode: cfg.estimator.mode,
        budget: cfg.budget.words,
    }
}

fn boxdim(cfg: &Config, inst: &ZooInstance) -> Result<Part> {
    let sys = sampled_view(inst, cfg.budget.materialize)?;
    let rep = upper_box_dimension(&sys.phase, &cfg.ladders.eps)?;
    let mut table = Table::new(header(Experiment::Boxdim));
    for (r, ratio) in rep.records.iter().zip(&rep.ratios) {
        table.push(vec![f(r.eps), f(r.counts[0]), f(r.counts[0].ln()), f(*ratio)]);
    }
    Ok(Part {
        table,
        results: json!({
            "points": sys.phase.len(),
            "slope": rep.slope,
            "ratio_sup": rep.ratio_sup,
            "ratio_inf": rep.ratio_inf,
        }),
        diagnostics: rep.diagnostics,
        status: Status::Pass,
    })
}

fn ladder_rows(table: &mut Table, kind: &str, rep: &DimensionReport) {
    for r in &rep.records {
        let l = (1.0 / r.eps).ln();
        for (i, &n) in r.n_ladder.iter().enumerate() {
            table.push(vec![
                f(r.eps),
                n.to_string(),
                kind.to_string(),
                f(r.counts[i]),
                f(r.stderr[i]),
                f(r.values[i]),
                f(r.values[i] / l),
            ]);
        }
    }
}

fn mdim<C: WordCounter>(cfg: &Config, sys: &C, walk: &RandomWalkSpec) -> Result<Part> {
    let (eps, ns) = (&cfg.ladders.eps, &cfg.ladders.n);
    let opts = estimator(cfg);
    let up = mdim_whole(sys, walk, eps, ns, Variant::Upper, opts)?;
    let lo = mdim_whole(sys, walk, eps, ns, Variant::Lower, opts)?;
    let full = sys.full_target();
    let um = subset_mdim(sys, walk, &full, eps, ns, Variant::Upper, opts.mode, opts.budget)?;
    let lm = subset_mdim(sys, walk, &full, eps, ns, Variant::Lower, opts.mode, opts.budget)?;
    let mut table = Table::new(header(Experiment::Mdim));
    ladder_rows(&mut table, opts.kind.name(), &up);
    if opts.kind != CountKind::Spanning {
        ladder_rows(&mut table, CountKind::Spanning.name(), &um);
    }
    let mut diagnostics = up.diagnostics.clone();
    diagnostics.merge(&um.diagnostics);
    Ok(Part {
        table,
        results: json!({
            "slope": up.slope,
            "slope_lower": lo.slope,
            "umdim": um.slope,
            "lmdim": lm.slope,
            "scale_entropy": up.per_eps,
            "ratios": up.ratios,
            "ratio_sup": up.ratio_sup,
            "ratio_inf": lo.ratio_inf,
        }),
        diagnostics,
        status: Status::Pass,
    })
}

fn cp<C: CoverMeasure>(cfg: &Config, sys: &C, target: &C::Target, walk: &RandomWalkSpec) -> Result<Part> {
    let (eps, ns) = (&cfg.ladders.eps, &cfg.ladders.n);
    let budget = cfg.budget.words;
    let (rep, exps) = cp_dimension(sys, walk, target, eps, ns, budget)?;
    let um = subset_mdim(sys, walk, target, eps, ns, Variant::Upper, cfg.estimator.mode, budget)?;
    let lm = subset_mdim(sys, walk, target, eps, ns, Variant::Lower, cfg.estimator.mode, budget)?;
    let mut table = Table::new(header(Experiment::Cp));
    ladder_rows(&mut table, "spanning", &um);
    let n_max = *ns.last().unwrap();
    let mut diagnostics = rep.diagnostics.clone();
    for e in &exps {
        let m = cp_averaged(sys, walk, target, e.lambda, n_max, e.eps, budget)?;
        table.push(vec![
            f(e.eps),
            n_max.to_string(),
            "cp".into(),
            f(m),
            f(0.0),
            f(e.lambda),
            f(e.lambda / (1.0 / e.eps).ln()),
        ]);
        diagnostics.merge(&e.diagnostics);
    }
    let tol = cfg.verify.tol;
    let ordered = rep
        .per_eps
        .iter()
        .zip(&lm.per_eps)
        .zip(&um.per_eps)
        .all(|((c, l), u)| *c <= l + tol && *l <= u + tol);
    Ok(Part {
        table,
        results: json!({
            "slope": rep.slope,
            "ratio_sup": rep.ratio_sup,
            "lambda": rep.per_eps,
            "umdim": um.slope,
            "lmdim": lm.slope,
            "umdim_per_eps": um.per_eps,
            "lmdim_per_eps": lm.per_eps,
            "ordering_holds": ordered,
        }),
        diagnostics,
        status: Status::Pass,
    })
}

/// Local entropies of sampled points of Z and the local-to-global bracket.
#[allow(clippy::too_many_arguments)]
fn local_part<S: BallMass + CoverMeasure>(
    cfg: &Config,
    sys: &S,
    mu: &S::Measure,
    mu_z: f64,
    target: &<S as WordCounter>::Target,
    points: &[S::P],
    labels: &[usize],
    walk: &RandomWalkSpec,
) -> Result<Part> {
    let (eps, ns) = (&cfg.ladders.eps, &cfg.ladders.n);
    let budget = cfg.budget.words;
    let mode = cfg.localent.mode;
    let mut table = Table::new(header(Experiment::Localent));
    let mut diagnostics = Diagnostics::default();
    let mut per_point = Vec::new();
    for (x, &label) in points.iter().zip(labels) {
        for &e in eps {
            for kind in [LocalKind::Plus, LocalKind::Minus] {
                let est = local_entropy(sys, mu, x, e, ns, kind, mode, budget)?;
                diagnostics.merge(&est.diagnostics);
                let k = match kind {
                    LocalKind::Plus => "plus",
                    LocalKind::Minus => "minus",
                };
                for (i, &n) in ns.iter().enumerate() {
                    table.push(vec![label.to_string(), f(e), n.to_string(), k.into(), f(est.masses[i]), f(est.values[i])]);
                }
            }
        }
        let up = local_mdim(sys, mu, x, eps, ns, LocalVariant::Upper, mode, budget)?;
        let lo = local_mdim(sys, mu, x, eps, ns, LocalVariant::Lower, mode, budget)?;
        per_point.push(json!({
            "x_index": label,
            "upper": up.value,
            "lower": lo.value,
            "upper_slope": up.slope,
            "lower_slope": lo.slope,
        }));
    }
    let bracket = theorem1_harness(sys, mu, mu_z, walk, target, points, eps, ns, budget, cfg.localent.tol)?;
    diagnostics.merge(&bracket.diagnostics);
    let status = if bracket.holds() {
        Status::Pass
    } else {
        Status::Violation
    };
    Ok(Part {
        table,
        results: json!({
            "points": per_point,
            "bracket": {
                "s_minus": bracket.s_minus,
                "cp": bracket.cp,
                "s_plus": bracket.s_plus,
                "mu_z": bracket.mu_z,
                "lower_checked": bracket.lower_checked,
                "holds": bracket.holds(),
            },
        }),
        diagnostics,
        status,
    })
}

fn localent(cfg: &Config, inst: &ZooInstance, walk: &RandomWalkSpec) -> Result<Part> {
    let count = cfg.localent.points.max(1);
    match (&inst.system, &inst.measure) {
        (ZooSystem::Sampled(sys), ZooMeasure::Sampled(mu)) => {
            let z = sampled_target(cfg, sys)?;
            let picks: Vec<usize> = (0..count.min(z.len())).map(|i| z[i * z.len() / count.min(z.len())]).collect();
            let mu_z: f64 = z.iter().map(|&i| mu.weights[i]).sum();
            local_part(cfg, sys, mu, mu_z, &z, &picks, &picks, walk)
        }
        (ZooSystem::Shift(sys), ZooMeasure::Product(mu)) => {
            let t = shift_target(cfg, sys)?;
            let mut rng = rng_for(cfg, 98);
            let points: Vec<Vec<f64>> = (0..count)
                .map(|_| {
                    t.coords
                        .iter()
                        .map(|c| sys.levels[c[rng.gen_range(0..c.len())]])
                        .collect()
                })
                .collect();
            let mu_z: f64 = t
                .coords
                .iter()
                .zip(&mu.weights)
                .map(|(c, w)| c.iter().map(|&l| w[l]).sum::<f64>())
                .product();
            let labels: Vec<usize> = (0..count).collect();
            local_part(cfg, sys, mu, mu_z, &t, &points, &labels, walk)
        }
        _ => Err(Error::Unsupported("measure does not match the system".into())),
    }
}

fn skew<C: WordCounter + Generators>(cfg: &Config, sys: &C, target: &C::Target) -> Result<Part> {
    let k = WordCounter::alphabet_len(sys);
    let nu = if cfg.skew.support.is_empty() {
        RandomWalkSpec::uniform_symbols(k, cfg.seed)
    } else {
        let mut w = vec![0.0; k];
        for &s in &cfg.skew.support {
            if s >= k {
                return Err(Error::Config {
                    field: "skew.support".into(),
                    line: 0,
                    msg: format!("symbol {s} outside the alphabet of {k}"),
                });
            }
            w[s] = 1.0 / cfg.skew.support.len() as f64;
        }
        let all: Vec<usize> = (0..k).collect();
        RandomWalkSpec::new(MeasureOnSpace::new(symbol_space(sys, &all), w)?, cfg.seed)
    };
    let r = theorem4_harness(
        sys,
        &nu,
        target,
        &cfg.ladders.eps,
        &cfg.ladders.n,
        cfg.budget.words,
        cfg.skew.tol,
        cfg.skew.slack,
    )?;
    let mut table = Table::new(header(Experiment::Skew));
    for (q, v) in [
        ("dim_b_support", r.dim_b_support),
        ("umdim_z", r.umdim_z),
        ("lhs", r.lhs),
        ("rhs", r.rhs),
        ("rhs_support", r.rhs_support),
        ("gap", r.gap),
        ("support_gap", r.support_gap),
        ("homogeneity", r.homogeneity),
    ] {
        table.push(vec![q.into(), f(v)]);
    }
    Ok(Part {
        table,
        results: serde_json::to_value(&r)?,
        diagnostics: r.diagnostics.clone(),
        status: if r.holds { Status::Pass } else { Status::Violation },
    })
}

fn glue(cfg: &Config, inst: &ZooInstance, base_dir: &Path) -> Result<Part> {
    let sys = sampled_view(inst, cfg.budget.materialize)?;
    let g = &cfg.glue;
    let instance = match &g.instance {
        Some(p) => GlueInstance::from_json(&base_dir.join(p))?,
        None => GlueInstance {
            segments: g.segments.clone(),
            eps: g.eps,
            p_max: g.p_max,
        },
    };
    if instance.segments.is_empty() {
        return Err(Error::Config {
            field: "glue.segments".into(),
            line: 0,
            msg: "glue needs at least one segment".into(),
        });
    }
    let opts = GlueOptions {
        gap_word_budget: g.gap_word_budget,
        samples: g.samples,
        seed: cfg.seed,
        max_level: g.max_level,
    };
    let (found, gaps, witnesses, exhaustive, note) = match g.mode {
        GlueMode::Gluing => match gluing_search(&sys, &instance, &opts) {
            Ok(r) => (true, r.gaps, r.witnesses, r.exhaustive, None),
            Err(Error::NotFound(m)) => (false, vec![], vec![], true, Some(m)),
            Err(e) => return Err(e),
        },
        GlueMode::Specification => {
            let r = specification_search(&sys, &instance, &g.gaps, g.m_eps, &opts)?;
            (r.ok, g.gaps.clone(), r.witnesses, r.exhaustive, None)
        }
    };
    let mut table = Table::new(header(Experiment::Glue));
    for (i, w) in witnesses.iter().enumerate() {
        let words: Vec<String> = w.gap_words.iter().map(|x| x.to_string()).collect();
        let y: Vec<String> = w.y.iter().map(|v| f(*v)).collect();
        table.push(vec![i.to_string(), words.join("|"), y.join(";"), w.level.to_string()]);
    }
    let verified = witnesses.iter().all(|w| verify_glue(&sys, &instance.segments, w, instance.eps));
    let mut diagnostics = Diagnostics::default();
    if let Some(m) = note {
        diagnostics.note(m);
    }
    if !exhaustive {
        diagnostics.note("gap words sampled, not exhausted");
    }
    let status = if !verified {
        Status::Violation
    } else if !exhaustive {
        Status::Incomplete
    } else {
        Status::Pass
    };
    Ok(Part {
        table,
        results: json!({
            "found": found,
            "gaps": gaps,
            "witnesses": witnesses.len(),
            "exhaustive": exhaustive,
            "verified": verified,
            "max_level": witnesses.iter().map(|w| w.level).max().unwrap_or(0),
        }),
        diagnostics,
        status,
    })
}

fn trace_rows(table: &mut Table, label: usize, partials: &[f64]) {
    for m in 1..=partials.len() {
        table.push(vec![
            label.to_string(),
            m.to_string(),
            f(partials[m - 1]),
            f(tail_oscillation(&partials[..m])),
        ]);
    }
}

fn irregular(cfg: &Config, inst: &ZooInstance, walk: &RandomWalkSpec) -> Result<Part> {
    let phi = Observable::by_name(&cfg.irregular.observable)?;
    let c = &cfg.irregular;
    let mut table = Table::new(header(Experiment::Irregular));
    match &inst.system {
        ZooSystem::Shift(sys) => {
            let opts = IrregularOptions {
                n: c.n,
                random_tails: c.random_tails,
                candidates: c.candidates,
                seed: cfg.seed,
                threshold: c.threshold,
                budget: cfg.budget.words,
                tol: c.tol,
            };
            let rep = theorem5_harness(sys, walk, &phi, &cfg.ladders.eps, &cfg.ladders.n, &opts)?;
            if let Ok((x, omega)) = construct_irregular(sys, &phi, c.n) {
                trace_rows(&mut table, 0, &birkhoff_trace(sys, &phi, &x, &omega, c.n)?.partials);
            }
            let status = if rep.holds == Some(false) || rep.inclusion_counterexamples > 0 {
                Status::Violation
            } else {
                Status::Pass
            };
            Ok(Part {
                table,
                results: serde_json::to_value(&rep)?,
                diagnostics: rep.diagnostics.clone(),
                status,
            })
        }
        ZooSystem::Sampled(sys) => {
            let n_pts = sys.phase.len();
            let vals: Vec<f64> = sys.phase.points.iter().map(|p| phi.eval(p)).collect();
            let range = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let threshold = c.threshold.unwrap_or(0.1 * range);
            let count = c.points.clamp(1, n_pts);
            let strategy = Strategy::Adversarial {
                candidates: c.candidates,
                seed: cfg.seed,
            };
            let mut scores = Vec::new();
            for i in 0..count {
                let x = i * n_pts / count;
                let s = irregularity_score(sys, &phi, &x, c.n, &strategy)?;
                let t = birkhoff_trace(sys, &phi, &x, &s.omega, c.n)?;
                trace_rows(&mut table, x, &t.partials);
                scores.push(json!({
                    "x_index": x,
                    "oscillation": s.oscillation,
                    "irregular": threshold > 0.0 && s.oscillation > threshold,
                }));
            }
            Ok(Part {
                table,
                results: json!({ "threshold": threshold, "points": scores }),
                diagnostics: Diagnostics::default(),
                status: Status::Pass,
            })
        }
    }
}

struct Check {
    name: &'static str,
    checked: usize,
    violations: usize,
    detail: String,
}

fn random_word(rng: &mut ChaCha8Rng, k: usize, max_len: usize) -> Word {
    let n = rng.gen_range(0..=max_len);
    Word::new((0..n).map(|_| rng.gen_range(0..k)).collect())
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// Phase sample used by the property suite: the preset itself or a shallow copy of a shift.
fn verify_view(inst: &ZooInstance) -> Result<SemigroupSystem> {
    match &inst.system {
        ZooSystem::Sampled(s) => Ok(s.clone()),
        ZooSystem::Shift(s) => {
            let g = s.levels.len();
            let mut depth = 1;
            while depth < s.depth && g.pow(depth as u32 + 1) <= 4096 {
                depth += 1;
            }
            ShiftSystem::new(s.levels.clone(), depth, s.weight0, s.generators.clone())?.materialize(4096)
        }
    }
}

fn verify(cfg: &Config, inst: &ZooInstance, walk: &RandomWalkSpec) -> Result<Part> {
    let sys = verify_view(inst)?;
    let m = cfg.verify.instances;
    let k = sys.alphabet_len();
    let n = sys.phase.len();
    let mut checks = Vec::new();

    let v = metric_audit(&sys.phase, 200_000)?;
    checks.push(Check {
        name: "metric_audit",
        checked: n,
        violations: v.len(),
        detail: String::new(),
    });

    let mut rng = rng_for(cfg, 1);
    let mut c = Check {
        name: "composition",
        checked: 0,
        violations: 0,
        detail: String::new(),
    };
    if sys.closure == Closure::Exact {
        for _ in 0..m {
            let (a, b) = (random_word(&mut rng, k, 3), random_word(&mut rng, k, 3));
            c.checked += 1;
            if sys.composition_defect(&a, &b)? > 1e-9 {
                c.violations += 1;
            }
        }
    } else {
        c.detail = format!("snapped closure (snap error {}); not checked", sys.snap_error);
    }
    checks.push(c);

    let mut rng = rng_for(cfg, 2);
    let mut c = Check {
        name: "sandwich",
        checked: 0,
        violations: 0,
        detail: String::new(),
    };
    for _ in 0..m {
        let size = rng.gen_range(1..=10.min(n));
        let z = sample(&mut rng, n, size).into_vec();
        let w = random_word(&mut rng, k, 4);
        let eps = log_uniform(&mut rng, 1.0 / 64.0, 0.5);
        c.checked += 1;
        if !sandwich_check(&sys, &w, eps, &z)?.holds {
            c.violations += 1;
        }
    }
    checks.push(c);

    let mut rng = rng_for(cfg, 3);
    let mut c = Check {
        name: "covering_lemma",
        checked: 0,
        violations: 0,
        detail: String::new(),
    };
    for _ in 0..m {
        let eps = log_uniform(&mut rng, 1.0 / 32.0, 0.25);
        let balls: Vec<BallSpec> = (0..rng.gen_range(1..=12))
            .map(|_| BallSpec {
                word: random_word(&mut rng, k, 3),
                center: rng.gen_range(0..n),
                eps,
            })
            .collect();
        let s = disjoint_subfamily(&sys, &balls)?;
        c.checked += 1;
        if !(s.disjoint && s.covers) {
            c.violations += 1;
        }
    }
    checks.push(c);

    // M^B monotonicity and the string/Bowen sandwich on oracle-sized instances
    let mut rng = rng_for(cfg, 4);
    let mut mono = Check {
        name: "cp_monotone",
        checked: 0,
        violations: 0,
        detail: "lambda and eps exact; N at lambda = 0".into(),
    };
    let mut oracle = Check {
        name: "open_cover_sandwich",
        checked: 0,
        violations: 0,
        detail: String::new(),
    };
    for _ in 0..m {
        let size = rng.gen_range(1..=8.min(n));
        let z = sample(&mut rng, n, size).into_vec();
        let nn = rng.gen_range(1..=2);
        let prefix = Word::new((0..nn).map(|_| rng.gen_range(0..k)).collect());
        let eps = log_uniform(&mut rng, 1.0 / 16.0, 0.5);
        let mb = |lambda: f64, e: f64, w: &Word| -> Result<f64> {
            Ok(cp_outer_measure(
                &sys,
                &CpQuery {
                    target: z.clone(),
                    lambda,
                    n: w.len(),
                    eps: e,
                    prefix: w.clone(),
                },
            )?
            .value)
        };
        let vals: Vec<f64> = [0.0, 0.5, 1.0].iter().map(|&l| mb(l, eps, &prefix)).collect::<Result<_>>()?;
        let mut longer = prefix.clone();
        longer.push(rng.gen_range(0..k));
        mono.checked += 1;
        if !(vals[0] >= vals[1] && vals[1] >= vals[2])
            || mb(0.5, eps, &prefix)? > mb(0.5, eps / 2.0, &prefix)?
            || mb(0.0, eps, &prefix)? > mb(0.0, eps, &longer)?
        {
            mono.violations += 1;
        }
        for lambda in [0.0, 0.5, 1.0] {
            match open_cover_oracle(&sys, &z, lambda, &prefix, eps) {
                Ok(mw) => {
                    oracle.checked += 1;
                    if !(mw >= mb(lambda, 2.0 * eps, &prefix)? && mb(lambda, eps / 4.0, &prefix)? >= mw) {
                        oracle.violations += 1;
                    }
                }
                Err(Error::Unsupported(msg)) => oracle.detail = msg,
                Err(e) => return Err(e),
            }
        }
    }
    checks.push(mono);
    checks.push(oracle);

    // local entropies: L+ >= L-, monotone in eps, beam = exhaustive when the beam holds every word
    let mu = MeasureOnSpace::uniform(sys.phase.clone());
    let ns = [1, 2, 3];
    let beam_exact = (k as u128).pow(3) <= BEAM_WIDTH as u128;
    let mut c = Check {
        name: "local_entropy",
        checked: 0,
        violations: 0,
        detail: if beam_exact {
            String::new()
        } else {
            "beam narrower than the word set; agreement not checked".into()
        },
    };
    let mut rng = rng_for(cfg, 5);
    for _ in 0..m.min(8) {
        let x = rng.gen_range(0..n);
        let eps = log_uniform(&mut rng, 1.0 / 32.0, 0.25);
        let h = |kind, e, mode| local_entropy(&sys, &mu, &x, e, &ns, kind, mode, 1 << 12);
        let plus = h(LocalKind::Plus, eps, WordMode::Exhaustive)?;
        let minus = h(LocalKind::Minus, eps, WordMode::Exhaustive)?;
        let plus2 = h(LocalKind::Plus, 2.0 * eps, WordMode::Exhaustive)?;
        c.checked += 1;
        let mut bad = plus.values.iter().zip(&minus.values).any(|(p, q)| p < q)
            || plus2.values.iter().zip(&plus.values).any(|(a, b)| a > b);
        if beam_exact {
            let adv = h(LocalKind::Plus, eps, WordMode::Adversarial)?;
            bad |= adv.masses != plus.masses;
        }
        if bad {
            c.violations += 1;
        }
    }
    checks.push(c);

    // whole-space agreement on the preset itself
    let (u, l, md) = match &inst.system {
        ZooSystem::Sampled(s) => whole_triple(cfg, s, walk)?,
        ZooSystem::Shift(s) => whole_triple(cfg, s, walk)?,
    };
    let tol = cfg.verify.tol;
    checks.push(Check {
        name: "whole_space_agreement",
        checked: 1,
        violations: usize::from(!((u - l).abs() <= tol && (u - md).abs() <= tol)),
        detail: format!("umdim {u} lmdim {l} mdim {md} tol {tol}"),
    });

    // F-orbit unfolding: pi_X F^n(omega, x) = f_{reverse(omega|n)} x
    let mut rng = rng_for(cfg, 6);
    let mut c = Check {
        name: "skew_unfolding",
        checked: 0,
        violations: 0,
        detail: String::new(),
    };
    for _ in 0..m {
        let len = rng.gen_range(1..=6);
        let omega = Word::new((0..len).map(|_| rng.gen_range(0..k)).collect());
        let x = rng.gen_range(0..n);
        let mut p = SkewPoint { omega: omega.clone(), x };
        for _ in 0..len {
            p = skew_apply(&sys, 0, &p)?;
        }
        c.checked += 1;
        if p.x != sys.apply_word(&omega.reverse(), x)? {
            c.violations += 1;
        }
    }
    checks.push(c);

    let all: Vec<usize> = (0..k).collect();
    let depth = (0..=3).rev().find(|&d| (k as u128).pow(d) * n as u128 <= 8192).unwrap_or(0) as usize;
    let skew_sys = materialize_skew(&sys, &all, depth, 0, 8192)?;
    let v = metric_audit(&skew_sys.phase, 200_000)?;
    checks.push(Check {
        name: "skew_metric_audit",
        checked: skew_sys.phase.len(),
        violations: v.len(),
        detail: format!("truncation depth {depth}"),
    });

    let mut table = Table::new(header(Experiment::Verify));
    let mut results = serde_json::Map::new();
    let mut total = 0;
    for c in &checks {
        total += c.violations;
        table.push(vec![c.name.into(), c.checked.to_string(), c.violations.to_string(), c.detail.clone()]);
        results.insert(c.name.into(), json!({ "checked": c.checked, "violations": c.violations }));
    }
    Ok(Part {
        table,
        results: Value::Object(results),
        diagnostics: Diagnostics::default(),
        status: if total == 0 { Status::Pass } else { Status::Violation },
    })
}

fn whole_triple<C: WordCounter>(cfg: &Config, sys: &C, walk: &RandomWalkSpec) -> Result<(f64, f64, f64)> {
    let (eps, ns) = (&cfg.ladders.eps, &cfg.ladders.n);
    let full = sys.full_target();
    let b = cfg.budget.words;
    let u = subset_mdim(sys, walk, &full, eps, ns, Variant::Upper, cfg.estimator.mode, b)?.slope;
    let l = subset_mdim(sys, walk, &full, eps, ns, Variant::Lower, cfg.estimator.mode, b)?.slope;
    let m = mdim_whole(sys, walk, eps, ns, Variant::Upper, estimator(cfg))?.slope;
    Ok((u, l, m))
}

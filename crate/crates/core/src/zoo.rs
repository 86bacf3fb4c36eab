//! Named example systems.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::metric::{MeasureOnSpace, Metric, Point, SampledSpace};
use crate::randomwalk::RandomWalkSpec;
use crate::semigroup::{GenFn, RefineFn, SemigroupSystem};
use crate::shift::{CoordMap, ProductMeasure, ShiftSystem};

pub const PRESETS: [&str; 5] = ["identity", "circle-expanding", "binary-shift", "interval-shift", "rotation-pair"];

/// Resolution overrides; None picks the preset default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZooParams {
    /// phase grid size for sampled presets
    pub grid: Option<usize>,
    /// truncation depth for shift presets
    pub depth: Option<usize>,
    /// coordinate levels for interval-shift
    pub levels: Option<usize>,
    pub generators: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum ZooSystem {
    Sampled(SemigroupSystem),
    Shift(ShiftSystem),
}

#[derive(Debug, Clone)]
pub enum ZooMeasure {
    Sampled(MeasureOnSpace),
    Product(ProductMeasure),
}

#[derive(Debug, Clone)]
pub struct ZooInstance {
    pub name: String,
    pub system: ZooSystem,
    pub measure: ZooMeasure,
}

impl ZooInstance {
    pub fn alphabet_len(&self) -> usize {
        match &self.system {
            ZooSystem::Sampled(s) => s.alphabet_len(),
            ZooSystem::Shift(s) => s.alphabet_len(),
        }
    }

    /// Uniform walk over the generators.
    pub fn walk(&self, seed: u64) -> RandomWalkSpec {
        RandomWalkSpec::uniform_symbols(self.alphabet_len(), seed)
    }
}

fn symbols(k: usize) -> SampledSpace {
    SampledSpace::line(&(0..k).map(|y| y as f64).collect::<Vec<_>>(), Metric::Euclidean)
}

/// Dyadic points j / (n 2^level) of the circle within `radius` of `center`, nearest first.
pub fn circle_refiner(n: usize) -> RefineFn {
    Arc::new(move |level: u32, center: &[f64], radius: f64| {
        let m = (n as f64) * f64::powi(2.0, level as i32);
        let c = center[0] * m;
        let r = (radius * m).ceil() as i64;
        let base = c.round() as i64;
        let mut out: Vec<Point> = Vec::new();
        for off in 0..=r {
            for j in [base + off, base - off] {
                let v = (j as f64 / m).rem_euclid(1.0);
                if crate::metric::circle_dist(v, center[0]) < radius {
                    out.push(vec![v]);
                }
                if off == 0 {
                    break;
                }
            }
        }
        out
    })
}

fn circle_system(n: usize, gen: GenFn, k: usize) -> Result<SemigroupSystem> {
    Ok(SemigroupSystem::new(SampledSpace::circle_grid(n), symbols(k), gen)?.with_refiner(circle_refiner(n)))
}

fn identity(p: &ZooParams) -> Result<ZooInstance> {
    let n = p.grid.unwrap_or(16);
    let k = p.generators.unwrap_or(2);
    let phase = SampledSpace::unit_grid(n);
    let gen: GenFn = Arc::new(|_, x: &[f64]| x.to_vec());
    let table = vec![(0..n).collect(); k];
    let sys = SemigroupSystem::from_table(phase.clone(), symbols(k), gen, table)?;
    Ok(ZooInstance {
        name: "identity".into(),
        measure: ZooMeasure::Sampled(MeasureOnSpace::uniform(phase)),
        system: ZooSystem::Sampled(sys),
    })
}

fn circle_expanding(p: &ZooParams) -> Result<ZooInstance> {
    let n = p.grid.unwrap_or(512);
    if p.generators.is_some_and(|k| k != 2) {
        return param("circle-expanding has exactly 2 generators");
    }
    let gen: GenFn = Arc::new(|y, x: &[f64]| vec![(x[0] * (y + 2) as f64).rem_euclid(1.0)]);
    let sys = circle_system(n, gen, 2)?;
    Ok(ZooInstance {
        name: "circle-expanding".into(),
        measure: ZooMeasure::Sampled(MeasureOnSpace::uniform(sys.phase.clone())),
        system: ZooSystem::Sampled(sys),
    })
}

fn rotation_pair(p: &ZooParams) -> Result<ZooInstance> {
    let n = p.grid.unwrap_or(64);
    if p.generators.is_some_and(|k| k != 2) {
        return param("rotation-pair has exactly 2 generators");
    }
    let steps = [1.0, 3.0];
    let gen: GenFn = Arc::new(move |y, x: &[f64]| vec![(x[0] + steps[y] / n as f64).rem_euclid(1.0)]);
    let sys = circle_system(n, gen, 2)?;
    Ok(ZooInstance {
        name: "rotation-pair".into(),
        measure: ZooMeasure::Sampled(MeasureOnSpace::uniform(sys.phase.clone())),
        system: ZooSystem::Sampled(sys),
    })
}

fn coord_maps(k: usize) -> Result<Vec<CoordMap>> {
    match k {
        1 => Ok(vec![CoordMap::Identity]),
        2 => Ok(vec![CoordMap::Identity, CoordMap::Reflect]),
        _ => param("shift presets support 1 or 2 generators"),
    }
}

fn binary_shift(p: &ZooParams) -> Result<ZooInstance> {
    let sys = ShiftSystem::new(
        vec![0.0, 1.0],
        p.depth.unwrap_or(12),
        0.5,
        coord_maps(p.generators.unwrap_or(1))?,
    )?;
    Ok(ZooInstance {
        name: "binary-shift".into(),
        measure: ZooMeasure::Product(sys.uniform_measure()),
        system: ZooSystem::Shift(sys),
    })
}

fn interval_shift(p: &ZooParams) -> Result<ZooInstance> {
    let g = p.levels.unwrap_or(16);
    if g < 2 {
        return param("interval-shift needs at least 2 levels");
    }
    let levels = (0..g).map(|j| j as f64 / (g - 1) as f64).collect();
    let sys = ShiftSystem::new(
        levels,
        p.depth.unwrap_or(6),
        1.0,
        coord_maps(p.generators.unwrap_or(2))?,
    )?;
    Ok(ZooInstance {
        name: "interval-shift".into(),
        measure: ZooMeasure::Product(sys.uniform_measure()),
        system: ZooSystem::Shift(sys),
    })
}

pub fn instantiate(name: &str, p: &ZooParams) -> Result<ZooInstance> {
    match name {
        "identity" => identity(p),
        "circle-expanding" => circle_expanding(p),
        "rotation-pair" => rotation_pair(p),
        "binary-shift" => binary_shift(p),
        "interval-shift" => interval_shift(p),
        other => param(format!("unknown preset '{other}' (known: {})", PRESETS.join(", "))),
    }
}

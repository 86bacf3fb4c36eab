//! Point-level view shared by sampled and structured systems.

use crate::error::{param, Result};
use crate::metric::MeasureOnSpace;
use crate::semigroup::{SemigroupSystem, Word};
use crate::shift::{ProductMeasure, ShiftSystem};

/// Generators acting on points of some representation.
pub trait Generators: Sync {
    type P: Clone + Send + Sync + PartialEq + std::fmt::Debug;

    fn alphabet_len(&self) -> usize;
    fn step_point(&self, y: usize, p: &Self::P) -> Self::P;
    fn point_dist(&self, a: &Self::P, b: &Self::P) -> f64;
    fn coords<'a>(&'a self, p: &'a Self::P) -> &'a [f64];
    /// d_Y between two symbols
    fn symbol_dist(&self, a: usize, b: usize) -> f64;

    fn symbol_diameter(&self) -> f64 {
        let k = self.alphabet_len();
        let mut m: f64 = 0.0;
        for a in 0..k {
            for b in 0..k {
                m = m.max(self.symbol_dist(a, b));
            }
        }
        m
    }

    /// Smallest positive symbol distance (infinite for one symbol).
    fn symbol_gap(&self) -> f64 {
        let k = self.alphabet_len();
        let mut m = f64::INFINITY;
        for a in 0..k {
            for b in 0..k {
                let d = self.symbol_dist(a, b);
                if a != b && d > 0.0 {
                    m = m.min(d);
                }
            }
        }
        m
    }

    /// Orbit along w read left to right (|w|+1 points).
    fn orbit_of(&self, w: &Word, p: &Self::P) -> Vec<Self::P> {
        let mut out = Vec::with_capacity(w.len() + 1);
        let mut q = p.clone();
        out.push(q.clone());
        for &s in &w.symbols {
            q = self.step_point(s, &q);
            out.push(q.clone());
        }
        out
    }

    fn word_dist(&self, w: &Word, a: &Self::P, b: &Self::P) -> f64 {
        self.orbit_of(w, a)
            .iter()
            .zip(self.orbit_of(w, b).iter())
            .map(|(x, y)| self.point_dist(x, y))
            .fold(0.0, f64::max)
    }
}

impl Generators for SemigroupSystem {
    type P = usize;

    fn alphabet_len(&self) -> usize {
        SemigroupSystem::alphabet_len(self)
    }

    fn step_point(&self, y: usize, p: &usize) -> usize {
        self.step(y, *p)
    }

    fn point_dist(&self, a: &usize, b: &usize) -> f64 {
        self.phase.d(*a, *b)
    }

    fn coords<'a>(&'a self, p: &'a usize) -> &'a [f64] {
        &self.phase.points[*p]
    }

    fn symbol_dist(&self, a: usize, b: usize) -> f64 {
        self.params.d(a, b)
    }
}

impl Generators for ShiftSystem {
    type P = Vec<f64>;

    fn alphabet_len(&self) -> usize {
        ShiftSystem::alphabet_len(self)
    }

    fn step_point(&self, y: usize, p: &Vec<f64>) -> Vec<f64> {
        self.apply(y, p)
    }

    fn point_dist(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        self.bowen_distance(0, a, b)
    }

    fn coords<'a>(&'a self, p: &'a Vec<f64>) -> &'a [f64] {
        p
    }

    /// symbols sit at 0, 1, ..., k-1 on the line
    fn symbol_dist(&self, a: usize, b: usize) -> f64 {
        (a as f64 - b as f64).abs()
    }
}

/// Measures of Bowen balls.
pub trait BallMass: Generators {
    type Measure: Sync;

    /// mu(B_w(x, eps)), open ball.
    fn ball_mass(&self, mu: &Self::Measure, w: &Word, x: &Self::P, eps: f64) -> Result<f64>;
}

impl BallMass for SemigroupSystem {
    type Measure = MeasureOnSpace;

    fn ball_mass(&self, mu: &MeasureOnSpace, w: &Word, x: &usize, eps: f64) -> Result<f64> {
        if mu.weights.len() != self.phase.len() {
            return param("measure must live on the phase sample");
        }
        if *x >= self.phase.len() {
            return param("point outside the phase sample");
        }
        w.check(SemigroupSystem::alphabet_len(self))?;
        let supp = mu.support();
        let ball = self.ball_sets(w, eps, &[*x], &supp).remove(0);
        Ok(ball.ones().map(|i| mu.weights[supp[i]]).sum())
    }
}

impl BallMass for ShiftSystem {
    type Measure = ProductMeasure;

    fn ball_mass(&self, mu: &ProductMeasure, w: &Word, x: &Vec<f64>, eps: f64) -> Result<f64> {
        w.check(ShiftSystem::alphabet_len(self))?;
        self.product_ball_mass(mu, w.len(), x, eps)
    }
}

//! Goal-directed use of learned models.

use rand::{Rng, RngCore};

use super::LinearModel;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

/// Source of candidate motor commands.
pub trait CommandSampler<T> {
    fn dim(&self) -> usize;
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<T>;
}

/// Uniform commands over a per-channel box `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSampler {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxSampler {
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Self {
        BoxSampler { lo: vec![lo; dim], hi: vec![hi; dim] }
    }
}

impl<T: Scalar> CommandSampler<T> for BoxSampler {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<T> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&lo, &hi)| {
                T::of(lo + (hi - lo) * rng.random::<f64>())
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reach<T> {
    pub command: Vec<T>,
    pub predicted: Vec<T>,
    /// Euclidean distance between `predicted` and the goal.
    pub distance: T,
    /// Position of `command` among the candidates.
    pub index: usize,
}

fn distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&p, &q)| (p - q) * (p - q)).sum::<T>().sqrt()
}

/// Picks the candidate whose prediction lies closest to `goal`; ties go to the
/// lowest index.
pub fn best_of_candidates<T: Scalar>(model: &LinearModel<T>, goal: &[T], candidates: &[Vec<T>]) -> Result<Reach<T>> {
    if goal.len() != model.d_out() {
        return Err(Error::DimensionMismatch { expected: model.d_out(), got: goal.len() });
    }
    let mut best: Option<Reach<T>> = None;
    for (index, c) in candidates.iter().enumerate() {
        let predicted = model.predict(c)?;
        let d = distance(&predicted, goal);
        if best.as_ref().is_none_or(|b| d < b.distance) {
            best = Some(Reach { command: c.clone(), predicted, distance: d, index });
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("need at least one candidate".into()))
}

/// Samples `n` commands from `rng::stream(seed, "best_of_n")`, feeds them
/// through the forward model and keeps the one predicted closest to `goal`.
pub fn best_of_n<T: Scalar, S: CommandSampler<T> + ?Sized>(
    model: &LinearModel<T>,
    goal: &[T],
    n: usize,
    seed: u64,
    sampler: &S,
) -> Result<Reach<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("best_of_n needs n >= 1".into()));
    }
    if sampler.dim() != model.d_in() {
        return Err(Error::DimensionMismatch { expected: model.d_in(), got: sampler.dim() });
    }
    let mut rng = rng::stream(seed, "best_of_n");
    let candidates: Vec<Vec<T>> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
    best_of_candidates(model, goal, &candidates)
}

/// Command predicted by an inverse model for `goal`.
pub fn invert_direct<T: Scalar>(inverse_model: &LinearModel<T>, goal: &[T]) -> Result<Vec<T>> {
    inverse_model.predict(goal)
}

use std::collections::VecDeque;

use super::{Anchor, Column, Plan};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tapdsl::Tapping;

/// One training row produced by [`StreamState::push`].
#[derive(Debug, Clone, PartialEq)]
pub struct Emission<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub anchor: Anchor,
}

/// Incremental tapping over a live measurement stream.
///
/// Keeps the last `span` measurements. The row for anchor `t` is emitted by the
/// push that delivers time `t + max_lag`, so a buffered tapping lags the stream
/// by its largest target lag.
#[derive(Debug, Clone)]
pub struct StreamState<T> {
    plan: Plan,
    n_sm: usize,
    window: VecDeque<Vec<T>>,
    pushed: usize,
    episode: u64,
}

impl<T: Scalar> StreamState<T> {
    pub fn open(tapping: &Tapping) -> Self {
        Self::open_episode(tapping, 0)
    }

    pub fn open_episode(tapping: &Tapping, episode: u64) -> Self {
        StreamState {
            plan: Plan::new(tapping),
            n_sm: tapping.space().n_sm(),
            window: VecDeque::new(),
            pushed: 0,
            episode,
        }
    }

    /// Starts a new episode; no window spans the boundary.
    pub fn next_episode(&mut self, episode: u64) {
        self.window.clear();
        self.pushed = 0;
        self.episode = episode;
    }

    pub fn input_columns(&self) -> &[Column] {
        &self.plan.input_columns
    }

    pub fn target_columns(&self) -> &[Column] {
        &self.plan.target_columns
    }

    /// Measurements pushed in the current episode.
    pub fn steps(&self) -> usize {
        self.pushed
    }

    pub fn push(&mut self, sm_vector: &[T]) -> Result<Option<Emission<T>>> {
        if sm_vector.len() != self.n_sm {
            return Err(Error::DimensionMismatch { expected: self.n_sm, got: sm_vector.len() });
        }
        let span = self.plan.span();
        if self.window.len() == span {
            let mut recycled = self.window.pop_front().expect("window is full");
            recycled.copy_from_slice(sm_vector);
            self.window.push_back(recycled);
        } else {
            self.window.push_back(sm_vector.to_vec());
        }
        self.pushed += 1;
        if self.pushed < span {
            return Ok(None);
        }
        let newest = self.pushed as i64 - 1;
        let t = newest - self.plan.max_lag;
        let oldest = self.pushed - self.window.len();
        let mut x = Vec::with_capacity(self.plan.inputs.len());
        let mut y = Vec::with_capacity(self.plan.targets.len());
        let window = &self.window;
        self.plan.fill(t, |row, time| window[time - oldest][row], &mut x, &mut y);
        Ok(Some(Emission { x, y, anchor: Anchor { episode: self.episode, t } }))
    }
}

//! Temporal-difference learning driven through tappings.
//!
//! A trajectory of (state, reward) pairs is stored as a two-channel
//! interoceptive sensorimotor matrix. The `td0` template tapping reads
//! `(S, S', R)` = `(s@-1, s@0, r@0)` as inputs and `s@-1` as the target, i.e. the
//! state whose value gets updated. Feeding those rows to [`ValueTable::td0_update`]
//! reproduces plain TD(0) on the trajectory exactly.
//!
//! The update is the standard error form `v(S) ← v(S) + α (R + γ v(S') − v(S))`.
//! Written as a bare increment, `Δv = α (R + γ v(S'))` omits the `− v(S)` term;
//! only the error form is executed here.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::engine::apply;
use crate::error::{Error, Result};
use crate::models::solve;
use crate::rng;
use crate::scalar::Scalar;
use crate::smcore::{Kind, SensorimotorMatrix, SensorimotorSpace};
use crate::tapdsl::templates;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Left = 0,
    Right = 1,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Left, Action::Right];

    fn from_index(i: usize) -> Action {
        if i == 0 {
            Action::Left
        } else {
            Action::Right
        }
    }
}

/// Deterministic chain `0 .. n-1`; `n-1` is the absorbing right terminal.
///
/// Moving left from state 0 stays in 0. Entering the terminal pays reward 1,
/// every other transition pays 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainEnv {
    pub n_states: usize,
    pub gamma: f64,
}

impl ChainEnv {
    pub fn new(n_states: usize, gamma: f64) -> Result<Self> {
        if n_states < 2 {
            return Err(Error::InvalidArgument("chain needs at least 2 states".into()));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidArgument(format!("gamma {gamma} outside (0, 1]")));
        }
        Ok(ChainEnv { n_states, gamma })
    }

    pub fn terminal(&self) -> usize {
        self.n_states - 1
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        s == self.terminal()
    }

    /// Next state and reward.
    pub fn step(&self, s: usize, a: Action) -> (usize, f64) {
        if self.is_terminal(s) {
            return (s, 0.0);
        }
        let next = match a {
            Action::Left => s.saturating_sub(1),
            Action::Right => s + 1,
        };
        (next, if self.is_terminal(next) { 1.0 } else { 0.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    AlwaysRight,
    UniformRandom,
}

/// Tabular state values `v` and action values `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable<T> {
    pub v: Vec<T>,
    /// `q[s][a]`, indexed by `Action as usize`.
    pub q: Vec<[T; 2]>,
    pub alpha: T,
    pub gamma: T,
}

impl<T: Scalar> ValueTable<T> {
    pub fn new(n_states: usize, alpha: f64, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("alpha {alpha} outside [0, 1]")));
        }
        Ok(ValueTable {
            v: vec![T::zero(); n_states],
            q: vec![[T::zero(); 2]; n_states],
            alpha: T::of(alpha),
            gamma: T::of(gamma),
        })
    }

    pub fn for_env(env: &ChainEnv, alpha: f64) -> Result<Self> {
        Self::new(env.n_states, alpha, env.gamma)
    }

    fn check(&self, states: &[usize]) -> Result<()> {
        match states.iter().find(|&&s| s >= self.v.len()) {
            Some(&s) => Err(Error::InvalidArgument(format!("state {s} out of range 0..{}", self.v.len()))),
            None => Ok(()),
        }
    }

    /// `v(s) += α (r + γ v(s') − v(s))`.
    pub fn td0_update(&mut self, s: usize, r: T, s_next: usize) -> Result<()> {
        self.check(&[s, s_next])?;
        let delta = r + self.gamma * self.v[s_next] - self.v[s];
        self.v[s] = self.v[s] + self.alpha * delta;
        Ok(())
    }

    /// `q(s,a) += α (r + γ q(s',a') − q(s,a))`.
    pub fn sarsa_update(&mut self, s: usize, a: Action, r: T, s_next: usize, a_next: Action) -> Result<()> {
        self.check(&[s, s_next])?;
        let target = r + self.gamma * self.q[s_next][a_next as usize];
        let q = &mut self.q[s][a as usize];
        *q = *q + self.alpha * (target - *q);
        Ok(())
    }

    /// `q(s,a) += α (r + γ max_a' q(s',a') − q(s,a))`.
    pub fn q_update(&mut self, s: usize, a: Action, r: T, s_next: usize) -> Result<()> {
        self.check(&[s, s_next])?;
        let best = self.q[s_next][0].max(self.q[s_next][1]);
        let target = r + self.gamma * best;
        let q = &mut self.q[s][a as usize];
        *q = *q + self.alpha * (target - *q);
        Ok(())
    }

    /// Greedy action per state; ties go to `Left`.
    pub fn greedy_policy(&self) -> Vec<Action> {
        self.q.iter().map(|q| if q[1] > q[0] { Action::Right } else { Action::Left }).collect()
    }
}

fn choose(policy: Policy, rng: &mut ChaCha8Rng) -> Action {
    match policy {
        Policy::AlwaysRight => Action::Right,
        Policy::UniformRandom => Action::from_index(rng.random_range(0..2)),
    }
}

/// States and rewards `(s_t, r_t)` from `start` until the terminal or `max_steps`
/// transitions; `r_0 = 0` and `r_t` is the reward for entering `s_t`.
pub fn rollout(env: &ChainEnv, start: usize, policy: Policy, rng: &mut ChaCha8Rng, max_steps: usize) -> Vec<(usize, f64)> {
    let mut traj = vec![(start, 0.0)];
    let mut s = start;
    while !env.is_terminal(s) && traj.len() <= max_steps {
        let (next, r) = env.step(s, choose(policy, rng));
        traj.push((next, r));
        s = next;
    }
    traj
}

/// Trajectories used by both TD(0) paths; episode `e` starts in a uniform state
/// (terminal included) drawn from `rng::stream(seed, "td/episode/<e>")`.
pub fn td_trajectories(env: &ChainEnv, episodes: usize, seed: u64, policy: Policy) -> Vec<Vec<(usize, f64)>> {
    (0..episodes)
        .map(|e| {
            let mut rng = rng::stream(seed, &format!("td/episode/{e}"));
            let start = rng.random_range(0..env.n_states);
            rollout(env, start, policy, &mut rng, 100 * env.n_states)
        })
        .collect()
}

/// The two-channel `(s, r)` interoceptive space.
pub fn td_space() -> Arc<SensorimotorSpace> {
    Arc::new(SensorimotorSpace::define("td", [(Kind::Intero, "s", 1), (Kind::Intero, "r", 1)]).expect("static space"))
}

/// Stores trajectories as a sensorimotor matrix, one episode each.
pub fn trajectories_to_matrix<T: Scalar>(trajectories: &[Vec<(usize, f64)>]) -> SensorimotorMatrix<T> {
    let mut m = SensorimotorMatrix::new(td_space());
    for (e, traj) in trajectories.iter().enumerate() {
        for &(s, r) in traj {
            m.append(e as u64, &[T::of(s as f64), T::of(r)]).expect("two channels");
        }
    }
    m
}

/// TD(0) fed by rows of the `td0` tapping over the trajectory matrix.
pub fn tapped_td_run<T: Scalar>(
    env: &ChainEnv,
    episodes: usize,
    alpha: f64,
    seed: u64,
    policy: Policy,
) -> Result<ValueTable<T>> {
    let trajectories = td_trajectories(env, episodes, seed, policy);
    let matrix = trajectories_to_matrix::<T>(&trajectories);
    let tapping = templates::td0(matrix.space().clone(), "s", "r")?;
    let rows = apply(&matrix, &tapping)?;
    let mut table = ValueTable::for_env(env, alpha)?;
    let index = |v: T| v.to_usize().ok_or_else(|| Error::InvalidArgument(format!("bad state value {v}")));
    for i in 0..rows.len() {
        // x = (S, S', R), y = (S)
        let x = rows.x_row(i);
        let target = index(rows.y_row(i)[0])?;
        table.td0_update(target, x[2], index(x[1])?)?;
    }
    Ok(table)
}

/// TD(0) applied directly to consecutive trajectory steps.
pub fn direct_td_run<T: Scalar>(
    env: &ChainEnv,
    episodes: usize,
    alpha: f64,
    seed: u64,
    policy: Policy,
) -> Result<ValueTable<T>> {
    let mut table = ValueTable::for_env(env, alpha)?;
    for traj in td_trajectories(env, episodes, seed, policy) {
        for pair in traj.windows(2) {
            let (s, _) = pair[0];
            let (s_next, r) = pair[1];
            table.td0_update(s, T::of(r), s_next)?;
        }
    }
    Ok(table)
}

/// `sweeps` always-right episodes from state 0.
pub fn td0_sweeps<T: Scalar>(env: &ChainEnv, alpha: f64, sweeps: usize) -> Result<ValueTable<T>> {
    let mut table = ValueTable::for_env(env, alpha)?;
    for _ in 0..sweeps {
        let mut s = 0;
        while !env.is_terminal(s) {
            let (next, r) = env.step(s, Action::Right);
            table.td0_update(s, T::of(r), next)?;
            s = next;
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Sarsa,
    QLearning,
}

fn epsilon_greedy<T: Scalar>(q: &[T; 2], epsilon: f64, rng: &mut ChaCha8Rng) -> Action {
    if rng.random::<f64>() < epsilon || q[0] == q[1] {
        Action::from_index(rng.random_range(0..2))
    } else if q[1] > q[0] {
        Action::Right
    } else {
        Action::Left
    }
}

/// ε-greedy control with exploring starts: every episode begins in a uniform
/// non-terminal state with a uniform first action, drawn from
/// `rng::stream(seed, "control")`. Greedy ties are broken uniformly.
pub fn run_control<T: Scalar>(
    env: &ChainEnv,
    algo: Control,
    episodes: usize,
    alpha: f64,
    epsilon: f64,
    seed: u64,
) -> Result<ValueTable<T>> {
    let mut table = ValueTable::for_env(env, alpha)?;
    let mut rng = rng::stream(seed, "control");
    let max_steps = 100 * env.n_states;
    for _ in 0..episodes {
        let mut s = rng.random_range(0..env.terminal());
        let mut a = Action::from_index(rng.random_range(0..2));
        for _ in 0..max_steps {
            let (next, r) = env.step(s, a);
            let a_next = epsilon_greedy(&table.q[next], epsilon, &mut rng);
            match algo {
                Control::Sarsa => table.sarsa_update(s, a, T::of(r), next, a_next)?,
                Control::QLearning => table.q_update(s, a, T::of(r), next)?,
            }
            if env.is_terminal(next) {
                break;
            }
            s = next;
            a = a_next;
        }
    }
    Ok(table)
}

/// State values of the always-right policy from the Bellman linear system
/// `(I − γP) v = r`, with the terminal pinned to 0.
pub fn bellman_solve_right(env: &ChainEnv) -> Result<Vec<f64>> {
    let n = env.n_states;
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for s in 0..n {
        a[s * n + s] = 1.0;
        if env.is_terminal(s) {
            continue;
        }
        let (next, r) = env.step(s, Action::Right);
        if !env.is_terminal(next) {
            a[s * n + next] -= env.gamma;
        }
        b[s] = r;
    }
    solve(a, b, n, 1)
}

/// Optimal action values by value iteration, iterated until the largest change
/// is below `tol`.
pub fn value_iteration(env: &ChainEnv, tol: f64) -> Vec<[f64; 2]> {
    let mut q = vec![[0.0f64; 2]; env.n_states];
    loop {
        let mut change = 0.0f64;
        let v: Vec<f64> = q.iter().map(|r| r[0].max(r[1])).collect();
        for s in 0..env.terminal() {
            for a in Action::ALL {
                let (next, r) = env.step(s, a);
                let vn = if env.is_terminal(next) { 0.0 } else { v[next] };
                let new = r + env.gamma * vn;
                change = change.max((new - q[s][a as usize]).abs());
                q[s][a as usize] = new;
            }
        }
        if change < tol {
            return q;
        }
    }
}

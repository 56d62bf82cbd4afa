//! The hand-reaching pipeline on the simulated four-joint arm.
//!
//! Random joint commands are recorded, the forward tapping `m@-1 -> vision@0`
//! turns the recording into training rows, a quadratic-feature linear model is
//! fit, and the model picks commands for random reachable goals by scoring
//! `n` random candidates. The chosen commands are judged by the true arm.

use std::fmt;

use rand::Rng;

use crate::engine::apply;
use crate::error::Result;
use crate::models::{best_of_n, fit, BoxSampler, FeatureMap};
use crate::rng;
use crate::sim::{generate, Plant, PlantConfig};
use crate::tapdsl::templates;

#[derive(Debug, Clone, PartialEq)]
pub struct NaoDemoConfig {
    pub seed: u64,
    pub steps: usize,
    pub goals: usize,
    pub candidates: usize,
    pub ridge: f64,
}

impl Default for NaoDemoConfig {
    fn default() -> Self {
        NaoDemoConfig { seed: 0, steps: 500, goals: 100, candidates: 256, ridge: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaoDemoReport {
    pub config: NaoDemoConfig,
    pub training_rows: usize,
    pub fit_rmse: f64,
    /// True hand-to-goal distances of the model-chosen commands.
    pub model_distances: Vec<f64>,
    /// True hand-to-goal distances of one random command per goal.
    pub baseline_distances: Vec<f64>,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

impl NaoDemoReport {
    pub fn model_median(&self) -> f64 {
        median(&self.model_distances)
    }

    pub fn baseline_median(&self) -> f64 {
        median(&self.baseline_distances)
    }

    pub fn goals_met(&self) -> bool {
        self.model_median() < 0.5 * self.baseline_median()
    }
}

impl fmt::Display for NaoDemoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(f, "nao demo (seed {}, {} steps)", c.seed, c.steps)?;
        writeln!(f, "{} training rows from tapping m@-1 -> vision@0", self.training_rows)?;
        writeln!(f, "fit rmse {:.6e} (quadratic features, ridge {:e})", self.fit_rmse, c.ridge)?;
        writeln!(f, "goals {}, candidates per goal {}", c.goals, c.candidates)?;
        writeln!(f, "median goal distance: model {:.6}, random baseline {:.6}", self.model_median(), self.baseline_median())?;
        write!(f, "ratio {:.4}", self.model_median() / self.baseline_median())?;
        if self.goals_met() {
            writeln!(f, " (model below half the baseline)")
        } else {
            writeln!(f, " (model NOT below half the baseline)")
        }
    }
}

pub fn nao_demo(config: &NaoDemoConfig) -> Result<NaoDemoReport> {
    let plant = Plant::default_arm();
    let pc = PlantConfig::new(plant.clone(), config.seed);
    let matrix = generate::<f64>(&pc, 1, config.steps)?;
    let tapping = templates::forward(matrix.space().clone(), "m", "vision")?;
    let data = apply(&matrix, &tapping)?;
    let model = fit(&data, FeatureMap::Quadratic, config.ridge)?;
    let fit_rmse = model.rmse(&data)?;

    let dim = plant.command_dim();
    let sampler = BoxSampler::uniform(dim, pc.command_lo, pc.command_hi);
    let mut goal_rng = rng::stream(config.seed, "demo/goals");
    let mut base_rng = rng::stream(config.seed, "demo/baseline");
    let draw = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        (0..dim).map(|_| r.random_range(pc.command_lo..pc.command_hi)).collect()
    };
    let mut model_distances = Vec::with_capacity(config.goals);
    let mut baseline_distances = Vec::with_capacity(config.goals);
    for k in 0..config.goals {
        let goal = plant.respond(&draw(&mut goal_rng));
        let seed = rng::derive(config.seed, &format!("demo/goal/{k}"));
        let reach = best_of_n(&model, &goal, config.candidates, seed, &sampler)?;
        model_distances.push(dist(&plant.respond(&reach.command), &goal));
        baseline_distances.push(dist(&plant.respond(&draw(&mut base_rng)), &goal));
    }
    Ok(NaoDemoReport {
        config: config.clone(),
        training_rows: data.len(),
        fit_rmse,
        model_distances,
        baseline_distances,
    })
}

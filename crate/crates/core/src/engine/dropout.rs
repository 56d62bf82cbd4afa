//! Dataset-level dropout: augmented copies with masked cells, per-episode
//! blocking taps, and per-tap drop probabilities.

use rand::seq::index;
use rand::Rng;

use super::{apply, Dataset};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;
use crate::smcore::SensorimotorMatrix;
use crate::tapdsl::Tapping;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropScope {
    Inputs,
    Targets,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropoutConfig {
    /// Number of masked copies appended after the original rows.
    pub copies: usize,
    /// Fraction of in-scope cells masked in each copy.
    pub proportion: f64,
    pub scope: DropScope,
    pub inactive_value: f64,
    pub seed: u64,
}

impl Default for DropoutConfig {
    fn default() -> Self {
        DropoutConfig { copies: 1, proportion: 0.5, scope: DropScope::Inputs, inactive_value: 0.0, seed: 0 }
    }
}

fn check_proportion(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("proportion {p} outside [0,1]")))
    }
}

/// Appends `copies` copies of `dataset`; copy `c` masks exactly
/// `⌊proportion · cells⌋` uniformly chosen in-scope cells, drawn from
/// `rng::stream(seed, "dropout/<c>")`. Rows `0..N` are left untouched.
pub fn dropout_augment<T: Scalar>(dataset: &Dataset<T>, config: &DropoutConfig) -> Result<Dataset<T>> {
    check_proportion(config.proportion)?;
    let n = dataset.len();
    let (d_in, d_out) = (dataset.d_in(), dataset.d_out());
    let fill = T::of(config.inactive_value);
    let x_cells = if config.scope == DropScope::Targets { 0 } else { n * d_in };
    let y_cells = if config.scope == DropScope::Inputs { 0 } else { n * d_out };
    let cells = x_cells + y_cells;
    let count = (config.proportion * cells as f64).floor() as usize;

    let mut out = dataset.clone();
    for c in 1..=config.copies {
        let base_x = out.x.len();
        let base_y = out.y.len();
        out.x.extend_from_slice(&dataset.x);
        out.y.extend_from_slice(&dataset.y);
        out.x_mask.extend_from_slice(&dataset.x_mask);
        out.y_mask.extend_from_slice(&dataset.y_mask);
        out.anchors.extend_from_slice(&dataset.anchors);
        let mut rng = rng::stream(config.seed, &format!("dropout/{c}"));
        let mut picked = index::sample(&mut rng, cells, count).into_vec();
        picked.sort_unstable();
        for cell in picked {
            if cell < x_cells {
                out.deactivate_x(base_x + cell, fill);
            } else {
                out.deactivate_y(base_y + cell - x_cells, fill);
            }
        }
    }
    Ok(out)
}

/// [`apply`] with `⌊proportion · #taps⌋` taps blocked for each whole episode.
///
/// The blocked set for episode `e` is drawn from `rng::stream(seed, "blocking/<e>")`.
/// Blocked cells are masked and set to zero.
pub fn apply_blocking<T: Scalar>(
    matrix: &SensorimotorMatrix<T>,
    tapping: &Tapping,
    proportion: f64,
    seed: u64,
) -> Result<Dataset<T>> {
    check_proportion(proportion)?;
    let mut ds = apply(matrix, tapping)?;
    let n_taps = tapping.taps().len();
    let count = (proportion * n_taps as f64).floor() as usize;
    if count == 0 {
        return Ok(ds);
    }
    let (d_in, d_out) = (ds.d_in(), ds.d_out());
    let mut start = 0;
    while start < ds.len() {
        let episode = ds.anchors[start].episode;
        let end = start + ds.anchors[start..].iter().take_while(|a| a.episode == episode).count();
        let mut rng = rng::stream(seed, &format!("blocking/{episode}"));
        let mut blocked = vec![false; n_taps];
        for tap in index::sample(&mut rng, n_taps, count) {
            blocked[tap] = true;
        }
        let xcols: Vec<usize> = (0..d_in).filter(|&j| blocked[ds.inputs[j].tap]).collect();
        let ycols: Vec<usize> = (0..d_out).filter(|&j| blocked[ds.targets[j].tap]).collect();
        for i in start..end {
            for &j in &xcols {
                ds.deactivate_x(i * d_in + j, T::zero());
            }
            for &j in &ycols {
                ds.deactivate_y(i * d_out + j, T::zero());
            }
        }
        start = end;
    }
    Ok(ds)
}

/// Masks each tap with `drop_p > 0` independently per row.
///
/// Draws one uniform number per (row, tap) pair, row-major in tap order, from
/// `rng::stream(seed, "tap-dropout")`; taps with `drop_p = 0` consume no draws.
pub fn apply_tap_dropout<T: Scalar>(dataset: &mut Dataset<T>, tapping: &Tapping, seed: u64, fill: T) {
    let dropping: Vec<(usize, f64)> = tapping
        .taps()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.drop_p > 0.0)
        .map(|(i, t)| (i, t.drop_p))
        .collect();
    if dropping.is_empty() {
        return;
    }
    let (d_in, d_out) = (dataset.d_in(), dataset.d_out());
    let mut rng = rng::stream(seed, "tap-dropout");
    for i in 0..dataset.len() {
        for &(tap, p) in &dropping {
            if rng.random::<f64>() >= p {
                continue;
            }
            for j in 0..d_in {
                if dataset.inputs[j].tap == tap {
                    dataset.deactivate_x(i * d_in + j, fill);
                }
            }
            for j in 0..d_out {
                if dataset.targets[j].tap == tap {
                    dataset.deactivate_y(i * d_out + j, fill);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::smcore::{Kind, SensorimotorSpace};
    use crate::tapdsl::{templates, Tap};

    fn space() -> Arc<SensorimotorSpace> {
        Arc::new(SensorimotorSpace::define("s", [(Kind::Motor, "m", 4), (Kind::Extero, "v", 2)]).unwrap())
    }

    fn matrix(episodes: usize, len: usize) -> SensorimotorMatrix<f64> {
        let mut m = SensorimotorMatrix::new(space());
        for e in 0..episodes {
            for t in 0..len {
                m.append(e as u64, &[1.0 + t as f64; 6]).unwrap();
            }
        }
        m
    }

    fn forward_ds() -> Dataset<f64> {
        apply(&matrix(1, 11), &templates::forward(space(), "m", "v").unwrap()).unwrap()
    }

    #[test]
    fn zero_copies_identity() {
        let ds = forward_ds();
        let cfg = DropoutConfig { copies: 0, ..Default::default() };
        assert_eq!(dropout_augment(&ds, &cfg).unwrap(), ds);
    }

    #[test]
    fn counts_per_copy() {
        let ds = forward_ds();
        assert_eq!((ds.len(), ds.d_in()), (10, 4));
        let cfg = DropoutConfig { copies: 3, proportion: 0.5, scope: DropScope::Inputs, inactive_value: -9.0, seed: 11 };
        let aug = dropout_augment(&ds, &cfg).unwrap();
        assert_eq!(aug.len(), 40);
        assert_eq!(aug.masked_count(0..10), (0, 0));
        for c in 1..4 {
            assert_eq!(aug.masked_count(c * 10..(c + 1) * 10), (20, 0));
        }
        let filled = aug.x().iter().zip(aug.x_mask()).filter(|(v, m)| !**m && **v == -9.0).count();
        assert_eq!(filled, 60);
        assert_eq!(&aug.x()[..40], ds.x());
    }

    #[test]
    fn both_scope_counts_all_cells() {
        let ds = forward_ds();
        let cfg = DropoutConfig { copies: 1, proportion: 0.25, scope: DropScope::Both, inactive_value: 0.0, seed: 3 };
        let aug = dropout_augment(&ds, &cfg).unwrap();
        let (mx, my) = aug.masked_count(10..20);
        assert_eq!(mx + my, 15);
        let t = DropoutConfig { scope: DropScope::Targets, ..cfg };
        assert_eq!(dropout_augment(&ds, &t).unwrap().masked_count(10..20), (0, 5));
    }

    #[test]
    fn seed_determinism() {
        let ds = forward_ds();
        let cfg = DropoutConfig { copies: 2, proportion: 0.3, scope: DropScope::Both, inactive_value: 0.0, seed: 5 };
        assert_eq!(dropout_augment(&ds, &cfg).unwrap(), dropout_augment(&ds, &cfg).unwrap());
        let other = DropoutConfig { seed: 6, ..cfg.clone() };
        assert_ne!(dropout_augment(&ds, &cfg).unwrap(), dropout_augment(&ds, &other).unwrap());
        assert!(dropout_augment(&ds, &DropoutConfig { proportion: 1.5, ..cfg }).is_err());
    }

    #[test]
    fn blocking_extremes() {
        let m = matrix(2, 6);
        let t = templates::forward(space(), "m", "v").unwrap();
        assert_eq!(apply_blocking(&m, &t, 0.0, 1).unwrap(), apply(&m, &t).unwrap());
        let all = apply_blocking(&m, &t, 1.0, 1).unwrap();
        assert!(all.x_mask().iter().chain(all.y_mask()).all(|b| !b));
        assert!(all.x().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn blocking_is_per_episode_and_reproducible() {
        let m = matrix(8, 5);
        let taps = (0..4).map(|c| Tap::input("m", -1).with_channels(vec![c])).chain([Tap::target("v", 0)]);
        let t = Tapping::new("many", space(), taps.collect()).unwrap();
        let a = apply_blocking(&m, &t, 0.4, 42).unwrap();
        assert_eq!(a, apply_blocking(&m, &t, 0.4, 42).unwrap());
        // 2 of 5 taps blocked per episode, constant within an episode
        let mut patterns = std::collections::BTreeSet::new();
        for e in 0..8 {
            let rows: Vec<usize> = (0..a.len()).filter(|&i| a.anchors()[i].episode == e).collect();
            let first: Vec<bool> = a.x_mask_row(rows[0]).iter().chain(a.y_mask_row(rows[0])).copied().collect();
            let cols = a.input_columns().iter().chain(a.target_columns());
            let blocked: std::collections::BTreeSet<usize> =
                cols.zip(&first).filter(|(_, m)| !**m).map(|(c, _)| c.tap).collect();
            assert_eq!(blocked.len(), 2);
            for &i in &rows {
                let mask: Vec<bool> = a.x_mask_row(i).iter().chain(a.y_mask_row(i)).copied().collect();
                assert_eq!(mask, first);
            }
            patterns.insert(first);
        }
        assert!(patterns.len() > 1);
    }

    #[test]
    fn tap_dropout_respects_probability() {
        let space = space();
        let t = Tapping::new("d", space.clone(), vec![Tap::input("m", -1).with_drop(0.5), Tap::target("v", 0)]).unwrap();
        let mut ds = apply(&matrix(1, 2001), &t).unwrap();
        apply_tap_dropout(&mut ds, &t, 9, 0.0);
        let dropped_rows = (0..ds.len()).filter(|&i| !ds.x_mask_row(i)[0]).count();
        assert!((900..1100).contains(&dropped_rows), "{dropped_rows}");
        for i in 0..ds.len() {
            let m = ds.x_mask_row(i);
            assert!(m.iter().all(|b| *b == m[0]));
        }
        assert!(ds.y_mask().iter().all(|b| *b));
    }
}

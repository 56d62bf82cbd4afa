//! Lagged mutual information and effective tappings.
//!
//! Estimates are plug-in values from an equal-width `bins × bins` joint
//! histogram spanning the observed range of each series, in bits, clamped at 0.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::smcore::{ChannelRef, SensorimotorMatrix};
use crate::tapdsl::{Tap, Tapping};

#[derive(Debug, Clone, PartialEq)]
pub struct MIResult {
    pub source: ChannelRef,
    /// Lag of the source relative to the target, ≤ 0.
    pub lag: i64,
    pub target: ChannelRef,
    pub mi_bits: f64,
    pub bins: usize,
    pub samples: usize,
}

/// `⌈n^(1/4)⌉` clamped to `[4, 32]`.
pub fn default_bins(samples: usize) -> usize {
    ((samples as f64).sqrt().sqrt().ceil() as usize).clamp(4, 32)
}

fn bin_indices<T: Scalar>(x: &[T], bins: usize) -> Option<Vec<usize>> {
    let (lo, hi) = x
        .iter()
        .map(|v| v.as_f64())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return None;
    }
    Some(
        x.iter()
            .map(|v| (((v.as_f64() - lo) / range * bins as f64) as usize).min(bins - 1))
            .collect(),
    )
}

fn check_args(n: usize, bins: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 samples, got {n}")));
    }
    if bins < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 bins, got {bins}")));
    }
    Ok(())
}

/// Plug-in entropy of `x` in bits over the same binning as [`mutual_information`].
pub fn entropy<T: Scalar>(x: &[T], bins: usize) -> Result<f64> {
    check_args(x.len(), bins)?;
    let Some(idx) = bin_indices(x, bins) else {
        return Ok(0.0);
    };
    let mut counts = vec![0usize; bins];
    for i in idx {
        counts[i] += 1;
    }
    let n = x.len() as f64;
    let mut terms: Vec<f64> = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .collect();
    terms.sort_by(f64::total_cmp);
    Ok(terms.iter().sum())
}

/// Plug-in mutual information between paired samples, in bits.
///
/// Cell contributions are summed in sorted order, so swapping `x` and `y`
/// gives a bit-identical result. A constant series has zero information.
pub fn mutual_information<T: Scalar>(x: &[T], y: &[T], bins: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    check_args(x.len(), bins)?;
    let (Some(bx), Some(by)) = (bin_indices(x, bins), bin_indices(y, bins)) else {
        return Ok(0.0);
    };
    let mut joint = vec![0usize; bins * bins];
    let mut mx = vec![0usize; bins];
    let mut my = vec![0usize; bins];
    for (&i, &j) in bx.iter().zip(&by) {
        joint[i * bins + j] += 1;
        mx[i] += 1;
        my[j] += 1;
    }
    let n = x.len() as f64;
    let mut terms = Vec::new();
    for i in 0..bins {
        for j in 0..bins {
            let c = joint[i * bins + j];
            if c > 0 {
                let c = c as f64;
                terms.push(c / n * (c * n / (mx[i] as f64 * my[j] as f64)).log2());
            }
        }
    }
    terms.sort_by(f64::total_cmp);
    Ok(terms.iter().sum::<f64>().max(0.0))
}

/// Pairs `(source[t + lag], target[t])` pooled over episodes, for `lag ≤ 0`.
pub fn lagged_pairs<T: Scalar>(
    matrix: &SensorimotorMatrix<T>,
    source_row: usize,
    target_row: usize,
    lag: usize,
) -> (Vec<T>, Vec<T>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ep in matrix.episodes() {
        for t in lag..ep.len() {
            xs.push(ep.get(source_row, t - lag));
            ys.push(ep.get(target_row, t));
        }
    }
    (xs, ys)
}

/// MI between `source` at lags `0, -1, …, -max_lag` and `target` at lag 0.
///
/// `bins = None` picks [`default_bins`] from the sample count at each lag.
pub fn lag_scan<T: Scalar>(
    matrix: &SensorimotorMatrix<T>,
    source: &ChannelRef,
    target: &ChannelRef,
    max_lag: usize,
    bins: Option<usize>,
) -> Result<Vec<MIResult>> {
    let space = matrix.space();
    let src = space.resolve(source)?;
    let tgt = space.resolve(target)?;
    let longest = matrix.episodes().iter().map(|e| e.len()).max().unwrap_or(0);
    if longest < max_lag + 2 {
        return Err(Error::InsufficientData(format!(
            "lag scan to -{max_lag} needs an episode of at least {} steps",
            max_lag + 2
        )));
    }
    (0..=max_lag)
        .map(|l| {
            let (xs, ys) = lagged_pairs(matrix, src, tgt, l);
            let b = bins.unwrap_or_else(|| default_bins(xs.len()));
            Ok(MIResult {
                source: source.clone(),
                lag: -(l as i64),
                target: target.clone(),
                mi_bits: mutual_information(&xs, &ys, b)?,
                bins: b,
                samples: xs.len(),
            })
        })
        .collect()
}

/// Lag scans of every channel against `target`, excluding the target itself at lag 0.
///
/// Results are ordered by channel row, then by lag from 0 downwards.
pub fn scan_all<T: Scalar>(
    matrix: &SensorimotorMatrix<T>,
    target: &ChannelRef,
    max_lag: usize,
    bins: Option<usize>,
) -> Result<Vec<MIResult>> {
    let space = matrix.space();
    let mut out = Vec::new();
    for row in 0..space.n_sm() {
        let source = space.channel_at(row).expect("row in range");
        for r in lag_scan(matrix, &source, target, max_lag, bins)? {
            if !(r.lag == 0 && &source == target) {
                out.push(r);
            }
        }
    }
    Ok(out)
}

/// Builds a causal tapping from the strongest lagged dependencies of `target`.
///
/// Keeps every (channel, lag) whose MI reaches `threshold_frac` of the largest
/// MI found; taps are grouped per (group, lag), and a tap covering a whole
/// group lists no channels.
pub fn effective_tapping<T: Scalar>(
    matrix: &SensorimotorMatrix<T>,
    target: &ChannelRef,
    max_lag: usize,
    bins: Option<usize>,
    threshold_frac: f64,
) -> Result<Tapping> {
    if !(threshold_frac > 0.0 && threshold_frac <= 1.0) {
        return Err(Error::InvalidArgument(format!("threshold {threshold_frac} outside (0, 1]")));
    }
    let scan = scan_all(matrix, target, max_lag, bins)?;
    tapping_from_scan(matrix, target, &scan, threshold_frac)
}

/// The selection step of [`effective_tapping`] on precomputed scan results.
pub fn tapping_from_scan<T: Scalar>(
    matrix: &SensorimotorMatrix<T>,
    target: &ChannelRef,
    scan: &[MIResult],
    threshold_frac: f64,
) -> Result<Tapping> {
    let best = scan.iter().map(|r| r.mi_bits).fold(0.0, f64::max);
    if !(best > 0.0) {
        return Err(Error::NoDependency);
    }
    let space = matrix.space();
    let cut = threshold_frac * best;
    let mut kept: BTreeMap<(usize, i64), Vec<usize>> = BTreeMap::new();
    for r in scan.iter().filter(|r| r.mi_bits >= cut) {
        let g = space.group_index(&r.source.group).expect("scanned channel exists");
        kept.entry((g, r.lag)).or_default().push(r.source.index);
    }
    let mut taps: Vec<Tap> = kept
        .into_iter()
        .map(|((g, lag), mut chans)| {
            let group = &space.groups()[g];
            chans.sort_unstable();
            let tap = Tap::input(&group.name, lag);
            if chans.len() == group.dim {
                tap
            } else {
                tap.with_channels(chans)
            }
        })
        .collect();
    taps.push(Tap::target(&target.group, 0).with_channels(vec![target.index]));
    Tapping::new(format!("effective_{}_{}", target.group, target.index), space.clone(), taps)
}

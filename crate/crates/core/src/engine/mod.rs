//! Applying tappings to sensorimotor data.
//!
//! [`apply`] slides a tapping over every episode of a matrix and emits one
//! training row per anchor `t` whose whole window fits inside the episode.
//! [`StreamState`] does the same on a live measurement stream, emitting each
//! row as soon as the measurement at `t + max_lag` arrives.

pub mod dropout;
mod io;
pub mod stream;

use std::fmt;

pub use dropout::{apply_blocking, apply_tap_dropout, dropout_augment, DropScope, DropoutConfig};
pub use io::mask_path;
pub use stream::{Emission, StreamState};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::smcore::{ChannelRef, Episode, SensorimotorMatrix, SensorimotorSpace};
use crate::tapdsl::{Role, Tapping};

/// Provenance of a dataset row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Anchor {
    pub episode: u64,
    /// Anchor time; may lie outside `0..T_e` when every lag has the same sign.
    pub t: i64,
}

/// One dataset column: a channel read at a lag, produced by tap number `tap`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub channel: ChannelRef,
    pub lag: i64,
    pub role: Role,
    pub tap: usize,
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.role {
            Role::Input => "x",
            Role::Target => "y",
        };
        write!(f, "{prefix}:{}@{}", self.channel, self.lag)
    }
}

/// Supervised training set: row-major `X` (N × d_in) and `Y` (N × d_out) with
/// activity masks (`true` = active) and per-row anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    x: Vec<T>,
    y: Vec<T>,
    x_mask: Vec<bool>,
    y_mask: Vec<bool>,
    anchors: Vec<Anchor>,
    inputs: Vec<Column>,
    targets: Vec<Column>,
}

impl<T: Scalar> Dataset<T> {
    pub fn empty(inputs: Vec<Column>, targets: Vec<Column>) -> Self {
        Dataset {
            x: Vec::new(),
            y: Vec::new(),
            x_mask: Vec::new(),
            y_mask: Vec::new(),
            anchors: Vec::new(),
            inputs,
            targets,
        }
    }

    /// Appends a fully active row.
    pub fn push_row(&mut self, x: &[T], y: &[T], anchor: Anchor) -> Result<()> {
        if x.len() != self.d_in() {
            return Err(Error::DimensionMismatch { expected: self.d_in(), got: x.len() });
        }
        if y.len() != self.d_out() {
            return Err(Error::DimensionMismatch { expected: self.d_out(), got: y.len() });
        }
        self.x.extend_from_slice(x);
        self.y.extend_from_slice(y);
        self.x_mask.extend(std::iter::repeat_n(true, x.len()));
        self.y_mask.extend(std::iter::repeat_n(true, y.len()));
        self.anchors.push(anchor);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn d_in(&self) -> usize {
        self.inputs.len()
    }

    pub fn d_out(&self) -> usize {
        self.targets.len()
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn x_row(&self, i: usize) -> &[T] {
        &self.x[i * self.d_in()..(i + 1) * self.d_in()]
    }

    pub fn y_row(&self, i: usize) -> &[T] {
        &self.y[i * self.d_out()..(i + 1) * self.d_out()]
    }

    pub fn x_mask(&self) -> &[bool] {
        &self.x_mask
    }

    pub fn y_mask(&self) -> &[bool] {
        &self.y_mask
    }

    pub fn x_mask_row(&self, i: usize) -> &[bool] {
        &self.x_mask[i * self.d_in()..(i + 1) * self.d_in()]
    }

    pub fn y_mask_row(&self, i: usize) -> &[bool] {
        &self.y_mask[i * self.d_out()..(i + 1) * self.d_out()]
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn input_columns(&self) -> &[Column] {
        &self.inputs
    }

    pub fn target_columns(&self) -> &[Column] {
        &self.targets
    }

    /// All columns in tap declaration order, ascending channel within a tap.
    pub fn layout(&self) -> Vec<&Column> {
        let mut all: Vec<&Column> = self.inputs.iter().chain(&self.targets).collect();
        all.sort_by_key(|c| (c.tap, c.channel.index));
        all
    }

    /// Number of masked (inactive) cells in rows `rows` of X and Y.
    pub fn masked_count(&self, rows: std::ops::Range<usize>) -> (usize, usize) {
        let xs = &self.x_mask[rows.start * self.d_in()..rows.end * self.d_in()];
        let ys = &self.y_mask[rows.start * self.d_out()..rows.end * self.d_out()];
        (xs.iter().filter(|m| !**m).count(), ys.iter().filter(|m| !**m).count())
    }

    fn deactivate_x(&mut self, cell: usize, fill: T) {
        self.x[cell] = fill;
        self.x_mask[cell] = false;
    }

    fn deactivate_y(&mut self, cell: usize, fill: T) {
        self.y[cell] = fill;
        self.y_mask[cell] = false;
    }
}

/// A tapping resolved against its space: absolute rows per column.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    pub inputs: Vec<(usize, i64)>,
    pub targets: Vec<(usize, i64)>,
    pub input_columns: Vec<Column>,
    pub target_columns: Vec<Column>,
    pub min_lag: i64,
    pub max_lag: i64,
}

impl Plan {
    pub fn new(tapping: &Tapping) -> Plan {
        let space = tapping.space();
        let mut plan = Plan {
            inputs: Vec::new(),
            targets: Vec::new(),
            input_columns: Vec::new(),
            target_columns: Vec::new(),
            min_lag: tapping.min_lag(),
            max_lag: tapping.max_lag(),
        };
        for (ti, tap) in tapping.taps().iter().enumerate() {
            for c in tap.channel_indices(space).expect("tapping validated") {
                let channel = ChannelRef::new(&tap.group, c);
                let row = space.resolve(&channel).expect("tapping validated");
                let col = Column { channel, lag: tap.lag, role: tap.role, tap: ti };
                match tap.role {
                    Role::Input => {
                        plan.inputs.push((row, tap.lag));
                        plan.input_columns.push(col);
                    }
                    Role::Target => {
                        plan.targets.push((row, tap.lag));
                        plan.target_columns.push(col);
                    }
                }
            }
        }
        plan
    }

    pub fn span(&self) -> usize {
        (self.max_lag - self.min_lag + 1) as usize
    }

    /// Anchors `t` with `t + min_lag >= 0` and `t + max_lag <= len - 1`.
    pub fn anchors(&self, len: usize) -> std::ops::Range<i64> {
        let first = -self.min_lag;
        let end = len as i64 - self.max_lag;
        first..end.max(first)
    }

    /// Fills one row; `at(row, time)` reads the matrix.
    pub fn fill<T: Scalar>(&self, t: i64, at: impl Fn(usize, usize) -> T, x: &mut Vec<T>, y: &mut Vec<T>) {
        let time = |lag: i64| (t + lag) as usize;
        x.extend(self.inputs.iter().map(|&(r, l)| at(r, time(l))));
        y.extend(self.targets.iter().map(|&(r, l)| at(r, time(l))));
    }
}

fn check_space(matrix_space: &SensorimotorSpace, tapping: &Tapping) -> Result<()> {
    if matrix_space != &**tapping.space() {
        return Err(Error::SpaceMismatch(matrix_space.name().into(), tapping.space().name().into()));
    }
    Ok(())
}

/// Number of rows [`apply`] emits for an episode of length `len` under `tapping`.
pub fn row_count(tapping: &Tapping, len: usize) -> usize {
    (len + 1).saturating_sub(tapping.span())
}

fn apply_episode<T: Scalar>(plan: &Plan, ep: &Episode<T>, ds: &mut Dataset<T>) {
    for t in plan.anchors(ep.len()) {
        plan.fill(t, |r, tt| ep.get(r, tt), &mut ds.x, &mut ds.y);
        ds.anchors.push(Anchor { episode: ep.id, t });
    }
}

/// Builds the supervised dataset for `tapping` over every episode of `matrix`.
///
/// Windows never cross episode boundaries; episodes shorter than the tapping's
/// span contribute no rows.
pub fn apply<T: Scalar>(matrix: &SensorimotorMatrix<T>, tapping: &Tapping) -> Result<Dataset<T>> {
    check_space(matrix.space(), tapping)?;
    let plan = Plan::new(tapping);
    let mut ds = Dataset::empty(plan.input_columns.clone(), plan.target_columns.clone());
    for ep in matrix.episodes() {
        apply_episode(&plan, ep, &mut ds);
    }
    ds.x_mask = vec![true; ds.x.len()];
    ds.y_mask = vec![true; ds.y.len()];
    Ok(ds)
}

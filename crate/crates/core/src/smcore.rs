//! Sensorimotor spaces and episode-structured sensorimotor matrices.
//!
//! A [`SensorimotorSpace`] fixes the row layout: groups are concatenated in
//! declaration order, so group `g` occupies rows `offset(g)..offset(g) + dim(g)`.
//! A [`SensorimotorMatrix`] stores one dense `n_sm × T_e` block per episode,
//! with columns in time order.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Modality kind of a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Motor,
    Proprio,
    Extero,
    Intero,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::Motor, Kind::Proprio, Kind::Extero, Kind::Intero];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Motor => "motor",
            Kind::Proprio => "proprio",
            Kind::Extero => "extero",
            Kind::Intero => "intero",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "motor" => Ok(Kind::Motor),
            "proprio" => Ok(Kind::Proprio),
            "extero" => Ok(Kind::Extero),
            "intero" => Ok(Kind::Intero),
            other => Err(Error::InvalidArgument(format!("unknown modality kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub kind: Kind,
    pub name: String,
    pub dim: usize,
}

impl Group {
    pub fn new(kind: Kind, name: impl Into<String>, dim: usize) -> Self {
        Group { kind, name: name.into(), dim }
    }
}

/// A channel addressed by group name and within-group index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelRef {
    pub group: String,
    pub index: usize,
}

impl ChannelRef {
    pub fn new(group: impl Into<String>, index: usize) -> Self {
        ChannelRef { group: group.into(), index }
    }
}

impl fmt::Display for ChannelRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.group, self.index)
    }
}

impl FromStr for ChannelRef {
    type Err = Error;

    /// Parses `group[index]`; a bare `group` means index 0.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad channel reference `{s}`, expected group[index]"));
        match s.find('[') {
            None if !s.is_empty() => Ok(ChannelRef::new(s, 0)),
            None => Err(bad()),
            Some(open) => {
                let rest = s[open + 1..].strip_suffix(']').ok_or_else(bad)?;
                let index = rest.trim().parse().map_err(|_| bad())?;
                if open == 0 {
                    return Err(bad());
                }
                Ok(ChannelRef::new(&s[..open], index))
            }
        }
    }
}

/// Declared modality groups; the group order is the row order of every matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorimotorSpace {
    name: String,
    groups: Vec<Group>,
    offsets: Vec<usize>,
    n_sm: usize,
}

impl SensorimotorSpace {
    pub fn new(name: impl Into<String>, groups: Vec<Group>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(groups.len());
        let mut n_sm = 0;
        for (i, g) in groups.iter().enumerate() {
            if groups[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::DuplicateGroup(g.name.clone()));
            }
            if g.dim == 0 {
                return Err(Error::ZeroDimension(g.name.clone()));
            }
            offsets.push(n_sm);
            n_sm += g.dim;
        }
        if n_sm == 0 {
            return Err(Error::EmptySpace);
        }
        Ok(SensorimotorSpace { name: name.into(), groups, offsets, n_sm })
    }

    /// Builds a space from `(kind, name, dim)` triples.
    pub fn define<'a>(
        name: impl Into<String>,
        spec: impl IntoIterator<Item = (Kind, &'a str, usize)>,
    ) -> Result<Self> {
        let groups = spec.into_iter().map(|(k, n, d)| Group::new(k, n, d)).collect();
        Self::new(name, groups)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    /// Total channel count.
    pub fn n_sm(&self) -> usize {
        self.n_sm
    }

    pub fn group(&self, name: &str) -> Option<&Group> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn group_index(&self, name: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.name == name)
    }

    /// Row of the first channel of `group`.
    pub fn offset(&self, group: &str) -> Option<usize> {
        self.group_index(group).map(|i| self.offsets[i])
    }

    /// Absolute row of a channel.
    pub fn resolve(&self, channel: &ChannelRef) -> Result<usize> {
        let gi = self
            .group_index(&channel.group)
            .ok_or_else(|| Error::UnknownGroup(channel.group.clone()))?;
        let dim = self.groups[gi].dim;
        if channel.index >= dim {
            return Err(Error::ChannelOutOfRange { group: channel.group.clone(), index: channel.index, dim });
        }
        Ok(self.offsets[gi] + channel.index)
    }

    /// Inverse of [`resolve`](Self::resolve).
    pub fn channel_at(&self, row: usize) -> Option<ChannelRef> {
        if row >= self.n_sm {
            return None;
        }
        let gi = self.offsets.partition_point(|&o| o <= row) - 1;
        Some(ChannelRef::new(&self.groups[gi].name, row - self.offsets[gi]))
    }

    /// Column names in row order, `<kind>:<group>[<index>]`.
    pub fn channel_names(&self) -> Vec<String> {
        self.groups
            .iter()
            .flat_map(|g| (0..g.dim).map(move |i| format!("{}:{}[{}]", g.kind, g.name, i)))
            .collect()
    }

    /// Reconstructs a space from matrix CSV column names (everything after `episode`).
    ///
    /// Consecutive columns sharing a group name form one group; indices must count up from 0.
    pub fn from_channel_names<S: AsRef<str>>(name: &str, columns: &[S]) -> Result<Self> {
        let mut groups: Vec<Group> = Vec::new();
        for col in columns {
            let col = col.as_ref();
            let bad = || Error::InvalidArgument(format!("bad channel column `{col}`"));
            let (kind, chan) = col.split_once(':').ok_or_else(bad)?;
            let kind: Kind = kind.parse()?;
            let chan: ChannelRef = chan.parse().map_err(|_| bad())?;
            match groups.last_mut() {
                Some(g) if g.name == chan.group => {
                    if g.kind != kind || chan.index != g.dim {
                        return Err(bad());
                    }
                    g.dim += 1;
                }
                _ => {
                    if chan.index != 0 {
                        return Err(bad());
                    }
                    groups.push(Group::new(kind, chan.group, 1));
                }
            }
        }
        Self::new(name, groups)
    }
}

/// One episode: `n_sm` rows, columns stored contiguously in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode<T> {
    pub id: u64,
    n_sm: usize,
    columns: Vec<T>,
}

impl<T: Scalar> Episode<T> {
    fn new(id: u64, n_sm: usize) -> Self {
        Episode { id, n_sm, columns: Vec::new() }
    }

    /// Number of time steps `T_e`.
    pub fn len(&self) -> usize {
        self.columns.len() / self.n_sm
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn get(&self, row: usize, t: usize) -> T {
        self.columns[t * self.n_sm + row]
    }

    /// The sensorimotor vector at time `t`.
    pub fn column(&self, t: usize) -> &[T] {
        &self.columns[t * self.n_sm..(t + 1) * self.n_sm]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[T]> {
        self.columns.chunks_exact(self.n_sm)
    }

    /// Time series of one row.
    pub fn row(&self, row: usize) -> Vec<T> {
        self.columns().map(|c| c[row]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorimotorMatrix<T> {
    space: Arc<SensorimotorSpace>,
    episodes: Vec<Episode<T>>,
    /// Sampling interval in seconds; metadata only.
    pub dt: f64,
}

impl<T: Scalar> SensorimotorMatrix<T> {
    pub fn new(space: Arc<SensorimotorSpace>) -> Self {
        SensorimotorMatrix { space, episodes: Vec::new(), dt: 1.0 }
    }

    pub fn space(&self) -> &Arc<SensorimotorSpace> {
        &self.space
    }

    pub fn episodes(&self) -> &[Episode<T>] {
        &self.episodes
    }

    pub fn episode(&self, id: u64) -> Option<&Episode<T>> {
        self.episodes.iter().find(|e| e.id == id)
    }

    /// Total number of columns across episodes.
    pub fn total_steps(&self) -> usize {
        self.episodes.iter().map(Episode::len).sum()
    }

    /// Appends one measurement to `episode_id`.
    ///
    /// A new id must be greater than every id seen so far; once a later episode
    /// has been opened the earlier ones are closed.
    pub fn append(&mut self, episode_id: u64, sm_vector: &[T]) -> Result<()> {
        let n_sm = self.space.n_sm();
        if sm_vector.len() != n_sm {
            return Err(Error::DimensionMismatch { expected: n_sm, got: sm_vector.len() });
        }
        match self.episodes.last_mut() {
            Some(last) if last.id == episode_id => {}
            Some(last) if last.id > episode_id => return Err(Error::ClosedEpisode(episode_id)),
            _ => self.episodes.push(Episode::new(episode_id, n_sm)),
        }
        let ep = self.episodes.last_mut().expect("episode just ensured");
        ep.columns.extend_from_slice(sm_vector);
        Ok(())
    }

    /// Writes the CSV form: `episode` column, then one column per channel.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["episode".to_string()];
        header.extend(self.space.channel_names());
        w.write_record(&header).map_err(|e| Error::csv("<writer>", e))?;
        let mut record = Vec::with_capacity(header.len());
        for ep in &self.episodes {
            for col in ep.columns() {
                record.clear();
                record.push(ep.id.to_string());
                record.extend(col.iter().map(|v| v.to_text()));
                w.write_record(&record).map_err(|e| Error::csv("<writer>", e))?;
            }
        }
        w.flush().map_err(|e| Error::csv("<writer>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| relabel(e, path))
    }

    /// Reads the CSV form; the header must match `space` exactly.
    pub fn read_csv<R: Read>(space: Arc<SensorimotorSpace>, reader: R) -> Result<Self> {
        read_matrix(Some(space), reader, "<reader>")
    }

    pub fn load_csv(space: Arc<SensorimotorSpace>, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        read_matrix(Some(space), file, &path.display().to_string())
    }

    /// Loads a matrix CSV, reconstructing the space from its header.
    pub fn load_csv_infer(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        read_matrix(None, file, &path.display().to_string())
    }
}

fn relabel(e: Error, path: &Path) -> Error {
    match e {
        Error::Csv { msg, .. } => Error::csv(path.display(), msg),
        other => other,
    }
}

fn read_matrix<T: Scalar, R: Read>(
    space: Option<Arc<SensorimotorSpace>>,
    reader: R,
    label: &str,
) -> Result<SensorimotorMatrix<T>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::csv(label, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.first().map(String::as_str) != Some("episode") {
        return Err(Error::csv(label, "first column must be `episode`"));
    }
    let space = match space {
        Some(s) => {
            if header[1..] != s.channel_names()[..] {
                return Err(Error::csv(
                    label,
                    format!("header does not match space `{}`: expected {:?}", s.name(), s.channel_names()),
                ));
            }
            s
        }
        None => Arc::new(
            SensorimotorSpace::from_channel_names("data", &header[1..]).map_err(|e| Error::csv(label, e))?,
        ),
    };
    let mut m = SensorimotorMatrix::new(space);
    let mut values = Vec::with_capacity(header.len() - 1);
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::csv(label, e))?;
        let id: u64 = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::csv(label, format!("line {line}: bad episode id `{}`", &rec[0])))?;
        values.clear();
        for cell in rec.iter().skip(1) {
            let v = cell
                .trim()
                .parse::<T>()
                .map_err(|_| Error::csv(label, format!("line {line}: non-numeric cell `{cell}`")))?;
            values.push(v);
        }
        m.append(id, &values).map_err(|e| match e {
            Error::ClosedEpisode(id) => Error::csv(label, format!("line {line}: non-monotone episode id {id}")),
            other => Error::csv(label, format!("line {line}: {other}")),
        })?;
    }
    Ok(m)
}

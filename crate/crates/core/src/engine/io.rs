//! Dataset CSV files.
//!
//! Header `episode,t,` followed by `x:<group>[<i>]@<lag>` columns and then
//! `y:<group>[<i>]@<lag>` columns. Masked cells hold the fill value; the
//! parallel `<stem>.mask.csv` has the same header with 0/1 cells.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{Anchor, Column, Dataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::smcore::ChannelRef;
use crate::tapdsl::Role;

/// `DS.csv` → `DS.mask.csv`.
pub fn mask_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.mask.csv"))
}

fn parse_column(name: &str) -> Option<(Role, ChannelRef, i64)> {
    let (role, rest) = name.split_once(':')?;
    let role = match role {
        "x" => Role::Input,
        "y" => Role::Target,
        _ => return None,
    };
    let (chan, lag) = rest.rsplit_once('@')?;
    Some((role, chan.parse().ok()?, lag.parse().ok()?))
}

impl<T: Scalar> Dataset<T> {
    fn header(&self) -> Vec<String> {
        let mut h = vec!["episode".to_string(), "t".to_string()];
        h.extend(self.inputs.iter().chain(&self.targets).map(Column::to_string));
        h
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.write_with(writer, |v, _| v.to_text())
    }

    pub fn write_mask_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.write_with(writer, |_, m| if m { "1".into() } else { "0".into() })
    }

    fn write_with<W: Write>(&self, writer: W, cell: impl Fn(T, bool) -> String) -> Result<()> {
        let csv_err = |e: csv::Error| Error::csv("<writer>", e);
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.header()).map_err(csv_err)?;
        let mut rec = Vec::new();
        for i in 0..self.len() {
            rec.clear();
            rec.push(self.anchors[i].episode.to_string());
            rec.push(self.anchors[i].t.to_string());
            rec.extend(self.x_row(i).iter().zip(self.x_mask_row(i)).map(|(v, m)| cell(*v, *m)));
            rec.extend(self.y_row(i).iter().zip(self.y_mask_row(i)).map(|(v, m)| cell(*v, *m)));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::csv("<writer>", e))?;
        Ok(())
    }

    /// Writes `path` and its mask sidecar.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let create = |p: &Path| std::fs::File::create(p).map(std::io::BufWriter::new).map_err(|e| Error::io(p, e));
        self.write_csv(create(path)?)?;
        let mp = mask_path(path);
        self.write_mask_csv(create(&mp)?)
    }

    /// Reads a dataset CSV; `mask` supplies the 0/1 sidecar when present.
    ///
    /// The header does not record tap order, so `Column::tap` is renumbered
    /// from runs of equal (role, group, lag) with all inputs first.
    pub fn read_csv<R: Read, M: Read>(data: R, mask: Option<M>) -> Result<Self> {
        let label = "<dataset>";
        let mut r = csv::Reader::from_reader(data);
        let header: Vec<String> = r.headers().map_err(|e| Error::csv(label, e))?.iter().map(String::from).collect();
        if header.len() < 2 || header[0] != "episode" || header[1] != "t" {
            return Err(Error::csv(label, "header must start with `episode,t`"));
        }
        let mut inputs: Vec<Column> = Vec::new();
        let mut targets: Vec<Column> = Vec::new();
        let mut tap = 0;
        let mut prev: Option<(Role, String, i64)> = None;
        for name in &header[2..] {
            let (role, channel, lag) =
                parse_column(name).ok_or_else(|| Error::csv(label, format!("bad column `{name}`")))?;
            if role == Role::Input && !targets.is_empty() {
                return Err(Error::csv(label, "input columns must precede target columns"));
            }
            let key = (role, channel.group.clone(), lag);
            if prev.as_ref().is_some_and(|p| *p != key) {
                tap += 1;
            }
            prev = Some(key);
            let col = Column { channel, lag, role, tap };
            match role {
                Role::Input => inputs.push(col),
                Role::Target => targets.push(col),
            }
        }
        let mut ds = Dataset::empty(inputs, targets);
        let (d_in, d_out) = (ds.d_in(), ds.d_out());
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::csv(label, e))?;
            let line = i + 2;
            let bad = |what: &str| Error::csv(label, format!("line {line}: bad {what}"));
            let episode = rec[0].trim().parse().map_err(|_| bad("episode"))?;
            let t = rec[1].trim().parse().map_err(|_| bad("anchor time"))?;
            let vals = rec
                .iter()
                .skip(2)
                .map(|c| c.trim().parse::<T>().map_err(|_| bad("cell")))
                .collect::<Result<Vec<T>>>()?;
            ds.push_row(&vals[..d_in], &vals[d_in..], Anchor { episode, t })
                .map_err(|e| Error::csv(label, format!("line {line}: {e}")))?;
        }
        if let Some(mask) = mask {
            let mut r = csv::Reader::from_reader(mask);
            let mheader: Vec<String> = r.headers().map_err(|e| Error::csv(label, e))?.iter().map(String::from).collect();
            if mheader != header {
                return Err(Error::csv(label, "mask header differs from data header"));
            }
            let mut rows = 0;
            for (i, rec) in r.records().enumerate() {
                let rec = rec.map_err(|e| Error::csv(label, e))?;
                if i >= ds.len() {
                    return Err(Error::csv(label, "mask has more rows than data"));
                }
                for (j, c) in rec.iter().skip(2).enumerate() {
                    let active = match c.trim() {
                        "1" => true,
                        "0" => false,
                        other => return Err(Error::csv(label, format!("mask line {}: bad cell `{other}`", i + 2))),
                    };
                    if j < d_in {
                        ds.x_mask[i * d_in + j] = active;
                    } else {
                        ds.y_mask[i * d_out + j - d_in] = active;
                    }
                }
                rows += 1;
            }
            if rows != ds.len() {
                return Err(Error::csv(label, "mask row count differs from data"));
            }
        }
        Ok(ds)
    }

    /// Reads `path`, plus its mask sidecar if one exists.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let data = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mp = mask_path(path);
        let mask = if mp.exists() { Some(std::fs::File::open(&mp).map_err(|e| Error::io(&mp, e))?) } else { None };
        Self::read_csv(data, mask).map_err(|e| match e {
            Error::Csv { msg, .. } => Error::csv(path.display(), msg),
            other => other,
        })
    }
}

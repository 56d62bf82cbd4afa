//! Tapping diagrams as Graphviz DOT text.
//!
//! The drawing is a grid with one column per lag and one row per modality kind
//! (collapsed) or per channel (expanded). Cells holding an input tap, a target
//! tap or both get distinct fills, and every input cell has an edge to every
//! target cell. Node ids encode the grid position, so output is byte-stable.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::smcore::Kind;
use crate::tapdsl::{Role, Tapping};

const INPUT_FILL: &str = "#9ecae1";
const TARGET_FILL: &str = "#fc9272";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiagramOptions {
    /// Inclusive lag range drawn, `min ≤ 0 ≤ max`.
    pub lag_window: (i64, i64),
    /// One row per modality kind instead of one per channel.
    pub collapse_groups: bool,
}

impl DiagramOptions {
    pub fn new(min: i64, max: i64, collapse_groups: bool) -> Result<Self> {
        if !(min <= 0 && 0 <= max) {
            return Err(Error::InvalidArgument(format!("lag window [{min}, {max}] must contain 0")));
        }
        Ok(DiagramOptions { lag_window: (min, max), collapse_groups })
    }

    /// Smallest window holding every tap of `tapping` and lag 0.
    pub fn fit(tapping: &Tapping, collapse_groups: bool) -> Self {
        DiagramOptions {
            lag_window: (tapping.min_lag().min(0), tapping.max_lag().max(0)),
            collapse_groups,
        }
    }
}

/// Rows, tap cells and edges of a diagram before it is written out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    pub rows: Vec<String>,
    pub lags: Vec<i64>,
    /// `(row, lag)` cells.
    pub inputs: BTreeSet<(usize, i64)>,
    pub targets: BTreeSet<(usize, i64)>,
}

impl Diagram {
    pub fn build(tapping: &Tapping, options: &DiagramOptions) -> Result<Diagram> {
        let (lo, hi) = options.lag_window;
        if !(lo <= 0 && 0 <= hi) {
            return Err(Error::InvalidArgument(format!("lag window [{lo}, {hi}] must contain 0")));
        }
        let outside: Vec<String> = tapping
            .taps()
            .iter()
            .filter(|t| t.lag < lo || t.lag > hi)
            .map(|t| t.to_string())
            .collect();
        if !outside.is_empty() {
            return Err(Error::OutsideWindow(outside.join("; ")));
        }
        let space = tapping.space();
        let rows: Vec<String> = if options.collapse_groups {
            Kind::ALL.iter().map(|k| k.to_string()).collect()
        } else {
            (0..space.n_sm()).map(|r| space.channel_at(r).expect("row in range").to_string()).collect()
        };
        let mut d = Diagram { rows, lags: (lo..=hi).collect(), inputs: BTreeSet::new(), targets: BTreeSet::new() };
        for tap in tapping.taps() {
            let group = space.group(&tap.group).expect("valid tapping");
            let set = match tap.role {
                Role::Input => &mut d.inputs,
                Role::Target => &mut d.targets,
            };
            if options.collapse_groups {
                let row = Kind::ALL.iter().position(|k| *k == group.kind).expect("known kind");
                set.insert((row, tap.lag));
            } else {
                let offset = space.offset(&tap.group).expect("valid tapping");
                for ch in tap.channel_indices(space)? {
                    set.insert((offset + ch, tap.lag));
                }
            }
        }
        Ok(d)
    }

    pub fn node_count(&self) -> usize {
        self.rows.len() * self.lags.len()
    }

    pub fn edges(&self) -> Vec<((usize, i64), (usize, i64))> {
        let mut out = Vec::with_capacity(self.inputs.len() * self.targets.len());
        for &i in &self.inputs {
            for &t in &self.targets {
                out.push((i, t));
            }
        }
        out
    }

    fn node_id(&self, (row, lag): (usize, i64)) -> String {
        format!("r{}c{}", row, lag - self.lags[0])
    }
}

/// DOT text for `tapping`.
pub fn to_dot(tapping: &Tapping, options: &DiagramOptions) -> Result<String> {
    let d = Diagram::build(tapping, options)?;
    let mut s = String::new();
    let w = &mut s;
    // writes to a String cannot fail
    let _ = writeln!(w, "digraph \"{}\" {{", tapping.name());
    let _ = writeln!(w, "  graph [layout=neato, splines=true, label=\"{}\", labelloc=t];", tapping.name());
    let _ = writeln!(w, "  node [shape=box, fixedsize=true, width=1.1, height=0.5, fontsize=10, style=filled, fillcolor=white];");
    let _ = writeln!(w, "  edge [color=\"#555555\"];");
    for (j, lag) in d.lags.iter().enumerate() {
        let _ = writeln!(
            w,
            "  lag{j} [shape=plaintext, style=\"\", label=\"{lag}\", pos=\"{:.1},{:.1}!\"];",
            j as f64 * 1.5,
            0.8
        );
    }
    for (r, name) in d.rows.iter().enumerate() {
        let y = 0.0 - r as f64 * 0.8;
        let _ = writeln!(w, "  row{r} [shape=plaintext, style=\"\", label=\"{name}\", pos=\"-1.5,{y:.1}!\"];");
        for (j, &lag) in d.lags.iter().enumerate() {
            let cell = (r, lag);
            let fill = match (d.inputs.contains(&cell), d.targets.contains(&cell)) {
                (true, true) => format!("style=\"filled,striped\", fillcolor=\"{INPUT_FILL}:{TARGET_FILL}\", "),
                (true, false) => format!("fillcolor=\"{INPUT_FILL}\", "),
                (false, true) => format!("fillcolor=\"{TARGET_FILL}\", "),
                (false, false) => String::new(),
            };
            let _ = writeln!(
                w,
                "  {} [{fill}label=\"{name}@{lag}\", pos=\"{:.1},{y:.1}!\"];",
                d.node_id(cell),
                j as f64 * 1.5
            );
        }
    }
    for (a, b) in d.edges() {
        let _ = writeln!(w, "  {} -> {};", d.node_id(a), d.node_id(b));
    }
    s.push_str("}\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smcore::SensorimotorSpace;
    use crate::tapdsl::templates;
    use std::sync::Arc;

    fn nao() -> Arc<SensorimotorSpace> {
        Arc::new(SensorimotorSpace::define("nao", [(Kind::Motor, "m", 4), (Kind::Extero, "vision", 2)]).unwrap())
    }

    #[test]
    fn forward_collapsed_counts() {
        let t = templates::forward(nao(), "m", "vision").unwrap();
        let d = Diagram::build(&t, &DiagramOptions::new(-1, 0, true).unwrap()).unwrap();
        assert_eq!(d.node_count(), 8);
        assert_eq!(d.inputs.len() + d.targets.len(), 2);
        assert_eq!(d.edges().len(), 1);
    }

    #[test]
    fn forward_expanded_counts() {
        let t = templates::forward(nao(), "m", "vision").unwrap();
        let d = Diagram::build(&t, &DiagramOptions::new(-1, 0, false).unwrap()).unwrap();
        assert_eq!(d.node_count(), 12);
        assert_eq!(d.edges().len(), 8);
    }

    #[test]
    fn autoencoder_cells_coincide() {
        let t = templates::autoencoder(nao(), &["vision"]).unwrap();
        let dot = to_dot(&t, &DiagramOptions::fit(&t, true)).unwrap();
        assert!(dot.contains("striped"));
        assert!(dot.contains("r2c0 -> r2c0;"));
    }

    #[test]
    fn window_must_cover_taps() {
        let t = templates::forward(nao(), "m", "vision").unwrap();
        let err = to_dot(&t, &DiagramOptions::new(0, 0, true).unwrap()).unwrap_err();
        assert!(matches!(&err, Error::OutsideWindow(m) if m.contains("input m @ -1")), "{err}");
        assert!(DiagramOptions::new(1, 2, true).is_err());
    }

    #[test]
    fn stable_output() {
        let t = templates::forward(nao(), "m", "vision").unwrap();
        let o = DiagramOptions::fit(&t, false);
        assert_eq!(to_dot(&t, &o).unwrap(), to_dot(&t, &o).unwrap());
    }
}

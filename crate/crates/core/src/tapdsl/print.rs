//! Canonical text form: one tap per line, lag ranges written out one lag at a time.

use std::fmt::{self, Write};

use super::{Tap, Tapping};
use crate::smcore::SensorimotorSpace;

impl fmt::Display for SensorimotorSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "space {} {{", self.name())?;
        for g in self.groups() {
            writeln!(f, "  {} {} : {}", g.kind, g.name, g.dim)?;
        }
        writeln!(f, "}}")
    }
}

impl fmt::Display for Tap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.role, self.group)?;
        if let Some(ch) = &self.channels {
            let list: Vec<_> = ch.iter().map(usize::to_string).collect();
            write!(f, "[{}]", list.join(", "))?;
        }
        write!(f, " @ {}", self.lag)?;
        if self.drop_p > 0.0 {
            write!(f, " [drop p = {}]", self.drop_p)?;
        }
        Ok(())
    }
}

impl fmt::Display for Tapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tapping {} {{", self.name())?;
        for tap in self.taps() {
            writeln!(f, "  {tap}")?;
        }
        writeln!(f, "}}")
    }
}

/// A whole `.tap` file: the space block followed by each tapping.
pub fn print_file(space: &SensorimotorSpace, tappings: &[Tapping]) -> String {
    let mut out = space.to_string();
    for t in tappings {
        out.push('\n');
        write!(out, "{t}").expect("writing to String");
    }
    out
}

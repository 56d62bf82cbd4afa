//! The canonical tapping gallery.
//!
//! | template | inputs | targets |
//! |---|---|---|
//! | `temporal_predictor(g)` | g@-1 | g@0 |
//! | `intermodal_predictor(src, dst)` | src@0 | dst@0 |
//! | `forward(m, s)` | m@-1 | s@0 |
//! | `inverse(m, s)` | s@0 | m@-1 |
//! | `multi_step(g, k, sym)` | g@-(k-1)..0 | g@+1, or g@+1..+(k-1) when symmetric |
//! | `autoencoder(gs)` | g@0 for each g | g@0 for each g |
//! | `ape(gs)` | g@-1 for each g | g@0 for each g |
//! | `conditioning(cs, us, d)` | cs@-d | us@0 |
//! | `td0(s, r)` | s@-1, s@0, r@0 | s@-1 (the state whose value is updated) |

use std::fmt;
use std::sync::Arc;

use super::{Tap, Tapping};
use crate::error::{Error, Result};
use crate::smcore::SensorimotorSpace;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Template {
    TemporalPredictor { group: String },
    IntermodalPredictor { source: String, dest: String },
    Forward { motor: String, sensor: String },
    Inverse { motor: String, sensor: String },
    MultiStep { group: String, k: usize, symmetric: bool },
    Autoencoder { groups: Vec<String> },
    Ape { groups: Vec<String> },
    Conditioning { cs: String, us: String, delay: usize },
    Td0 { state: String, reward: String },
}

impl Template {
    pub fn taps(&self) -> Result<Vec<Tap>> {
        use Template::*;
        Ok(match self {
            TemporalPredictor { group } => vec![Tap::input(group, -1), Tap::target(group, 0)],
            IntermodalPredictor { source, dest } => vec![Tap::input(source, 0), Tap::target(dest, 0)],
            Forward { motor, sensor } => vec![Tap::input(motor, -1), Tap::target(sensor, 0)],
            Inverse { motor, sensor } => vec![Tap::input(sensor, 0), Tap::target(motor, -1)],
            MultiStep { group, k, symmetric } => {
                if *k < 1 {
                    return Err(Error::InvalidArgument("multi_step needs k >= 1".into()));
                }
                let k = *k as i64;
                let last_target = if *symmetric { (k - 1).max(1) } else { 1 };
                let inputs = (-(k - 1)..=0).map(|l| Tap::input(group, l));
                let targets = (1..=last_target).map(|l| Tap::target(group, l));
                inputs.chain(targets).collect()
            }
            Autoencoder { groups } => groups
                .iter()
                .map(|g| Tap::input(g, 0))
                .chain(groups.iter().map(|g| Tap::target(g, 0)))
                .collect(),
            Ape { groups } => groups
                .iter()
                .map(|g| Tap::input(g, -1))
                .chain(groups.iter().map(|g| Tap::target(g, 0)))
                .collect(),
            Conditioning { cs, us, delay } => {
                if *delay < 1 {
                    return Err(Error::InvalidArgument("conditioning needs delay >= 1".into()));
                }
                vec![Tap::input(cs, -(*delay as i64)), Tap::target(us, 0)]
            }
            Td0 { state, reward } => vec![
                Tap::input(state, -1),
                Tap::input(state, 0),
                Tap::input(reward, 0),
                Tap::target(state, -1),
            ],
        })
    }

    pub fn build(&self, space: Arc<SensorimotorSpace>) -> Result<Tapping> {
        Tapping::new(self.default_name(), space, self.taps()?)
    }

    pub fn kind(&self) -> &'static str {
        use Template::*;
        match self {
            TemporalPredictor { .. } => "temporal_predictor",
            IntermodalPredictor { .. } => "intermodal_predictor",
            Forward { .. } => "forward",
            Inverse { .. } => "inverse",
            MultiStep { .. } => "multi_step",
            Autoencoder { .. } => "autoencoder",
            Ape { .. } => "ape",
            Conditioning { .. } => "conditioning",
            Td0 { .. } => "td0",
        }
    }

    fn args(&self) -> Vec<String> {
        use Template::*;
        match self {
            TemporalPredictor { group } => vec![group.clone()],
            IntermodalPredictor { source, dest } => vec![source.clone(), dest.clone()],
            Forward { motor, sensor } | Inverse { motor, sensor } => vec![motor.clone(), sensor.clone()],
            MultiStep { group, k, symmetric } => {
                let mut a = vec![group.clone(), k.to_string()];
                if *symmetric {
                    a.push("symmetric".into());
                }
                a
            }
            Autoencoder { groups } | Ape { groups } => groups.clone(),
            Conditioning { cs, us, delay } => vec![cs.clone(), us.clone(), delay.to_string()],
            Td0 { state, reward } => vec![state.clone(), reward.clone()],
        }
    }

    /// Identifier such as `forward_m_vision` or `multi_step_v_3_symmetric`.
    pub fn default_name(&self) -> String {
        let mut name = self.kind().to_string();
        for a in self.args() {
            name.push('_');
            name.push_str(&a);
        }
        name
    }

    /// Parses call syntax, e.g. `forward(m, vision)` or `multi_step(v, 3, symmetric)`.
    pub fn parse_call(text: &str) -> Result<Template> {
        let bad = |msg: &str| Error::InvalidArgument(format!("template `{text}`: {msg}"));
        let text = text.trim();
        let open = text.find('(').ok_or_else(|| bad("expected kind(args)"))?;
        let body = text[open + 1..].strip_suffix(')').ok_or_else(|| bad("missing `)`"))?;
        let kind = text[..open].trim();
        let args: Vec<String> = body
            .split(',')
            .map(|a| a.trim().to_string())
            .filter(|a| !a.is_empty())
            .collect();
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(bad(&format!("expected {n} arguments")))
            }
        };
        let count = |s: &str| s.parse::<usize>().map_err(|_| bad(&format!("`{s}` is not a non-negative integer")));
        use Template::*;
        Ok(match kind {
            "temporal_predictor" => {
                arity(1)?;
                TemporalPredictor { group: args[0].clone() }
            }
            "intermodal_predictor" => {
                arity(2)?;
                IntermodalPredictor { source: args[0].clone(), dest: args[1].clone() }
            }
            "forward" => {
                arity(2)?;
                Forward { motor: args[0].clone(), sensor: args[1].clone() }
            }
            "inverse" => {
                arity(2)?;
                Inverse { motor: args[0].clone(), sensor: args[1].clone() }
            }
            "multi_step" => {
                let symmetric = match args.get(2).map(String::as_str) {
                    None => false,
                    Some("symmetric") if args.len() == 3 => true,
                    _ => return Err(bad("expected multi_step(group, k[, symmetric])")),
                };
                if args.len() < 2 {
                    return Err(bad("expected multi_step(group, k[, symmetric])"));
                }
                MultiStep { group: args[0].clone(), k: count(&args[1])?, symmetric }
            }
            "autoencoder" => Autoencoder { groups: args },
            "ape" => Ape { groups: args },
            "conditioning" => {
                arity(3)?;
                Conditioning { cs: args[0].clone(), us: args[1].clone(), delay: count(&args[2])? }
            }
            "td0" => {
                arity(2)?;
                Td0 { state: args[0].clone(), reward: args[1].clone() }
            }
            other => return Err(bad(&format!("unknown template kind `{other}`"))),
        })
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind(), self.args().join(", "))
    }
}

pub fn temporal_predictor(space: Arc<SensorimotorSpace>, group: &str) -> Result<Tapping> {
    Template::TemporalPredictor { group: group.into() }.build(space)
}

pub fn intermodal_predictor(space: Arc<SensorimotorSpace>, source: &str, dest: &str) -> Result<Tapping> {
    Template::IntermodalPredictor { source: source.into(), dest: dest.into() }.build(space)
}

pub fn forward(space: Arc<SensorimotorSpace>, motor: &str, sensor: &str) -> Result<Tapping> {
    Template::Forward { motor: motor.into(), sensor: sensor.into() }.build(space)
}

pub fn inverse(space: Arc<SensorimotorSpace>, motor: &str, sensor: &str) -> Result<Tapping> {
    Template::Inverse { motor: motor.into(), sensor: sensor.into() }.build(space)
}

pub fn multi_step(space: Arc<SensorimotorSpace>, group: &str, k: usize, symmetric: bool) -> Result<Tapping> {
    Template::MultiStep { group: group.into(), k, symmetric }.build(space)
}

pub fn autoencoder(space: Arc<SensorimotorSpace>, groups: &[&str]) -> Result<Tapping> {
    Template::Autoencoder { groups: groups.iter().map(|g| g.to_string()).collect() }.build(space)
}

pub fn ape(space: Arc<SensorimotorSpace>, groups: &[&str]) -> Result<Tapping> {
    Template::Ape { groups: groups.iter().map(|g| g.to_string()).collect() }.build(space)
}

pub fn conditioning(space: Arc<SensorimotorSpace>, cs: &str, us: &str, delay: usize) -> Result<Tapping> {
    Template::Conditioning { cs: cs.into(), us: us.into(), delay }.build(space)
}

pub fn td0(space: Arc<SensorimotorSpace>, state: &str, reward: &str) -> Result<Tapping> {
    Template::Td0 { state: state.into(), reward: reward.into() }.build(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smcore::Kind;
    use crate::tapdsl::{compose, Causality, Role};

    fn nao() -> Arc<SensorimotorSpace> {
        Arc::new(SensorimotorSpace::define("nao", [(Kind::Motor, "m", 4), (Kind::Extero, "vision", 2)]).unwrap())
    }

    fn multi() -> Arc<SensorimotorSpace> {
        Arc::new(
            SensorimotorSpace::define(
                "multi",
                [(Kind::Motor, "m", 2), (Kind::Proprio, "q", 2), (Kind::Extero, "v", 2), (Kind::Intero, "r", 1)],
            )
            .unwrap(),
        )
    }

    #[test]
    fn forward_is_nao_tapping() {
        let t = forward(nao(), "m", "vision").unwrap();
        assert_eq!(t.taps(), &[Tap::input("m", -1), Tap::target("vision", 0)]);
        assert_eq!(t.validate().class, Causality::Causal);
    }

    #[test]
    fn multi_step_k1_is_shifted_temporal_predictor() {
        let ms = multi_step(multi(), "v", 1, false).unwrap();
        let tp = temporal_predictor(multi(), "v").unwrap();
        assert_eq!(ms.shifted(-1).taps(), tp.taps());
    }

    #[test]
    fn ape_is_autoencoder_with_inputs_shifted() {
        let ae = autoencoder(multi(), &["v", "q"]).unwrap();
        let ape = ape(multi(), &["v", "q"]).unwrap();
        let shifted: Vec<Tap> = ae
            .taps()
            .iter()
            .cloned()
            .map(|mut t| {
                if t.role == Role::Input {
                    t.lag -= 1;
                }
                t
            })
            .collect();
        assert_eq!(ape.taps(), &shifted[..]);
    }

    #[test]
    fn forward_inverse_same_coordinates() {
        let f = forward(multi(), "m", "v").unwrap();
        let i = inverse(multi(), "m", "v").unwrap();
        assert_eq!(f.coordinates(), i.coordinates());
        let swapped: Vec<_> = f
            .cells()
            .into_iter()
            .map(|(g, c, l, r)| (g, c, l, if r == Role::Input { Role::Target } else { Role::Input }))
            .collect();
        assert_eq!(swapped.into_iter().collect::<std::collections::BTreeSet<_>>(), i.cells());
    }

    #[test]
    fn classes_of_gallery() {
        let s = multi();
        let causal = [
            temporal_predictor(s.clone(), "v"),
            intermodal_predictor(s.clone(), "q", "v"),
            forward(s.clone(), "m", "v"),
            inverse(s.clone(), "m", "v"),
            autoencoder(s.clone(), &["v"]),
            ape(s.clone(), &["v", "q"]),
            conditioning(s.clone(), "q", "r", 3),
            td0(s.clone(), "v", "r"),
        ];
        for t in causal {
            assert_eq!(t.unwrap().validate().class, Causality::Causal);
        }
        for k in 2..6 {
            let r = multi_step(s.clone(), "v", k, true).unwrap().validate();
            assert_eq!(r.class, Causality::Buffered);
            assert_eq!(r.buffer_delay, k - 1);
        }
    }

    #[test]
    fn template_errors() {
        assert!(multi_step(multi(), "v", 0, false).is_err());
        assert!(conditioning(multi(), "q", "r", 0).is_err());
        assert!(matches!(forward(multi(), "arm", "v"), Err(Error::UnknownGroup(_))));
    }

    #[test]
    fn compose_proto_tappings() {
        let s = multi();
        let c = compose(
            &temporal_predictor(s.clone(), "v").unwrap(),
            &intermodal_predictor(s, "q", "v").unwrap(),
            "both",
        )
        .unwrap();
        assert_eq!(c.taps(), &[Tap::input("v", -1), Tap::target("v", 0), Tap::input("q", 0)]);
    }

    #[test]
    fn call_syntax_roundtrip() {
        let all = [
            Template::TemporalPredictor { group: "v".into() },
            Template::MultiStep { group: "v".into(), k: 3, symmetric: true },
            Template::MultiStep { group: "v".into(), k: 2, symmetric: false },
            Template::Autoencoder { groups: vec!["v".into(), "q".into()] },
            Template::Conditioning { cs: "q".into(), us: "r".into(), delay: 2 },
            Template::Td0 { state: "v".into(), reward: "r".into() },
        ];
        for t in all {
            assert_eq!(Template::parse_call(&t.to_string()).unwrap(), t);
        }
        assert!(Template::parse_call("forward(m)").is_err());
        assert!(Template::parse_call("wobble(m, v)").is_err());
        assert!(Template::parse_call("multi_step(v, x)").is_err());
    }
}

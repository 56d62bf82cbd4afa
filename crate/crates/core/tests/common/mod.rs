//! Random cases, brute-force oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tapkit_core::tapdsl::templates::Template;
use tapkit_core::{Kind, Role, SensorimotorMatrix, SensorimotorSpace, Tap, Tapping};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 1 to 3 groups of random kind and dimension 1 to 3.
pub fn random_space(rng: &mut ChaCha8Rng) -> Arc<SensorimotorSpace> {
    let n = rng.random_range(1..=3);
    let groups: Vec<(Kind, String, usize)> = (0..n)
        .map(|i| (Kind::ALL[rng.random_range(0..4)], format!("g{i}"), rng.random_range(1..=3)))
        .collect();
    Arc::new(SensorimotorSpace::define("rand", groups.iter().map(|(k, n, d)| (*k, n.as_str(), *d))).unwrap())
}

/// A valid tapping with 2 to 5 taps at lags in `-4..=4`; may be causal,
/// buffered or acausal.
pub fn random_tapping(rng: &mut ChaCha8Rng, space: &Arc<SensorimotorSpace>) -> Tapping {
    loop {
        let n = rng.random_range(2..=5);
        let taps: Vec<Tap> = (0..n)
            .map(|i| {
                let g = &space.groups()[rng.random_range(0..space.groups().len())];
                let lag = rng.random_range(-4..=4);
                let mut tap = match i {
                    0 => Tap::input(&g.name, lag),
                    1 => Tap::target(&g.name, lag),
                    _ if rng.random_bool(0.5) => Tap::input(&g.name, lag),
                    _ => Tap::target(&g.name, lag),
                };
                if g.dim > 1 && rng.random_bool(0.5) {
                    let chans: Vec<usize> = (0..g.dim).filter(|_| rng.random_bool(0.5)).collect();
                    if !chans.is_empty() {
                        tap = tap.with_channels(chans);
                    }
                }
                tap
            })
            .collect();
        if let Ok(t) = Tapping::new("rand", space.clone(), taps) {
            return t;
        }
    }
}

/// 1 to 3 episodes of 1 to `max_len` steps with distinct random values.
pub fn random_matrix(rng: &mut ChaCha8Rng, space: &Arc<SensorimotorSpace>, max_len: usize) -> SensorimotorMatrix<f64> {
    let mut m = SensorimotorMatrix::new(space.clone());
    let episodes = rng.random_range(1..=3);
    for e in 0..episodes {
        let len = rng.random_range(1..=max_len);
        for _ in 0..len {
            let col: Vec<f64> = (0..space.n_sm()).map(|_| rng.random_range(-10.0..10.0)).collect();
            m.append(e, &col).unwrap();
        }
    }
    m
}

/// One oracle row: episode, anchor, inputs, targets.
pub type OracleRow = (u64, i64, Vec<f64>, Vec<f64>);

/// Enumerates every candidate anchor far beyond the episode and keeps those
/// whose taps all land inside it.
pub fn oracle_rows(matrix: &SensorimotorMatrix<f64>, tapping: &Tapping) -> Vec<OracleRow> {
    let space = tapping.space();
    let mut out = Vec::new();
    for ep in matrix.episodes() {
        let len = ep.len() as i64;
        for t in -64..len + 64 {
            if !tapping.taps().iter().all(|tap| (0..len).contains(&(t + tap.lag))) {
                continue;
            }
            let mut x = Vec::new();
            let mut y = Vec::new();
            for tap in tapping.taps() {
                let g = space.group(&tap.group).unwrap();
                let offset = space.offset(&tap.group).unwrap();
                let mut chans = tap.channels.clone().unwrap_or_else(|| (0..g.dim).collect());
                chans.sort_unstable();
                let dest = if tap.role == Role::Input { &mut x } else { &mut y };
                for c in chans {
                    dest.push(ep.get(offset + c, (t + tap.lag) as usize));
                }
            }
            out.push((ep.id, t, x, y));
        }
    }
    out
}

/// A space with every modality kind, used for the template gallery.
pub fn gallery_space() -> Arc<SensorimotorSpace> {
    Arc::new(
        SensorimotorSpace::define(
            "gallery",
            [
                (Kind::Motor, "m", 2),
                (Kind::Proprio, "q", 2),
                (Kind::Extero, "vision", 2),
                (Kind::Intero, "s", 1),
                (Kind::Intero, "r", 1),
            ],
        )
        .unwrap(),
    )
}

/// One instance of every template on [`gallery_space`].
pub fn gallery_templates() -> Vec<Template> {
    let s = |v: &str| v.to_string();
    vec![
        Template::TemporalPredictor { group: s("vision") },
        Template::IntermodalPredictor { source: s("q"), dest: s("vision") },
        Template::Forward { motor: s("m"), sensor: s("vision") },
        Template::Inverse { motor: s("m"), sensor: s("vision") },
        Template::MultiStep { group: s("vision"), k: 3, symmetric: false },
        Template::MultiStep { group: s("vision"), k: 3, symmetric: true },
        Template::Autoencoder { groups: vec![s("q"), s("vision")] },
        Template::Ape { groups: vec![s("q"), s("vision")] },
        Template::Conditioning { cs: s("vision"), us: s("r"), delay: 2 },
        Template::Td0 { state: s("s"), reward: s("r") },
    ]
}

pub fn gallery() -> Vec<Tapping> {
    let space = gallery_space();
    gallery_templates().iter().map(|t| t.build(space.clone()).unwrap()).collect()
}

/// The Nao-like space: four joint commands and a 2-D hand position.
pub fn nao_space() -> Arc<SensorimotorSpace> {
    Arc::new(SensorimotorSpace::define("nao", [(Kind::Motor, "m", 4), (Kind::Extero, "vision", 2)]).unwrap())
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests")
}

/// Compares `actual` against a checked-in file; `UPDATE_GOLDEN=1` rewrites it.
pub fn check_golden(rel: &str, actual: &str) -> Result<(), String> {
    let path = data_dir().join(rel);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).map_err(|e| e.to_string())?;
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!("{} differs from generated output", path.display()))
    }
}

/// Builds a dataset from explicit rows, with anchors `(0, i)`.
pub fn dataset_from_rows(rows: &[(Vec<f64>, Vec<f64>)]) -> tapkit_core::Dataset<f64> {
    use tapkit_core::engine::{Anchor, Column};
    use tapkit_core::ChannelRef;
    let cols = |role, n: usize| (0..n).map(|i| Column { channel: ChannelRef::new("c", i), lag: 0, role, tap: 0 }).collect();
    let mut ds = tapkit_core::Dataset::empty(cols(Role::Input, rows[0].0.len()), cols(Role::Target, rows[0].1.len()));
    for (i, (x, y)) in rows.iter().enumerate() {
        ds.push_row(x, y, Anchor { episode: 0, t: i as i64 }).unwrap();
    }
    ds
}

/// `[x, x_i x_j for i <= j]` when `quadratic`.
fn features(x: &[f64], quadratic: bool) -> Vec<f64> {
    let mut f = x.to_vec();
    if quadratic {
        for i in 0..x.len() {
            for j in i..x.len() {
                f.push(x[i] * x[j]);
            }
        }
    }
    f
}

/// `Σ‖y − Wφ(x) − b‖² + ridge‖W‖²` with `theta = [W row-major, b]`.
pub fn ridge_objective(rows: &[(Vec<f64>, Vec<f64>)], quadratic: bool, ridge: f64, theta: &[f64]) -> f64 {
    let d_out = rows[0].1.len();
    let d_feat = features(&rows[0].0, quadratic).len();
    let (w, b) = theta.split_at(d_out * d_feat);
    let mut j = 0.0;
    for (x, y) in rows {
        let phi = features(x, quadratic);
        for o in 0..d_out {
            let pred: f64 = b[o] + (0..d_feat).map(|f| w[o * d_feat + f] * phi[f]).sum::<f64>();
            j += (y[o] - pred).powi(2);
        }
    }
    j + ridge * w.iter().map(|v| v * v).sum::<f64>()
}

/// Central-difference gradient of [`ridge_objective`].
pub fn fd_gradient(rows: &[(Vec<f64>, Vec<f64>)], quadratic: bool, ridge: f64, theta: &[f64], h: f64) -> Vec<f64> {
    (0..theta.len())
        .map(|k| {
            let mut p = theta.to_vec();
            let mut m = theta.to_vec();
            p[k] += h;
            m[k] -= h;
            (ridge_objective(rows, quadratic, ridge, &p) - ridge_objective(rows, quadratic, ridge, &m)) / (2.0 * h)
        })
        .collect()
}

/// Fits a random small ridge problem (d ≤ 5, N ≤ 20) and returns the largest
/// finite-difference gradient at the fit relative to the largest at zero.
pub fn gradient_check(seed: u64) -> f64 {
    use tapkit_core::models::{fit, FeatureMap};
    let mut r = rng(seed);
    let d_in = r.random_range(1..=5);
    let d_out = r.random_range(1..=3);
    let n = r.random_range(1..=20);
    let quadratic = d_in <= 3 && r.random_bool(0.5);
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .map(|_| {
            let x = (0..d_in).map(|_| r.random_range(-1.0..1.0)).collect();
            let y = (0..d_out).map(|_| r.random_range(-1.0..1.0)).collect();
            (x, y)
        })
        .collect();
    let d_feat = features(&rows[0].0, quadratic).len();
    let ridge = if n > d_feat + 3 && r.random_bool(0.5) { 0.0 } else { r.random_range(1e-3..1.0) };
    let fm = if quadratic { FeatureMap::Quadratic } else { FeatureMap::Identity };
    let model = fit(&dataset_from_rows(&rows), fm, ridge).unwrap();
    let mut theta = model.weights().to_vec();
    theta.extend_from_slice(model.bias());
    let at_fit = fd_gradient(&rows, quadratic, ridge, &theta, 1e-5);
    let at_zero = fd_gradient(&rows, quadratic, ridge, &vec![0.0; theta.len()], 1e-5);
    let inf = |g: &[f64]| g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    inf(&at_fit) / inf(&at_zero).max(1e-300)
}

/// Hand position of a planar chain by composing homogeneous transforms.
pub fn arm_fk_oracle(links: &[f64], angles: &[f64]) -> [f64; 2] {
    use nalgebra::{Isometry2, Point2};
    let mut pose = Isometry2::identity();
    for (l, th) in links.iter().zip(angles) {
        pose = pose * Isometry2::rotation(*th) * Isometry2::translation(*l, 0.0);
    }
    let p = pose * Point2::origin();
    [p.x, p.y]
}

/// The `# expect L:C` header of a malformed corpus file.
pub fn expected_pos(text: &str) -> (usize, usize) {
    let first = text.lines().next().unwrap();
    let (l, c) = first.strip_prefix("# expect ").unwrap().split_once(':').unwrap();
    (l.parse().unwrap(), c.trim().parse().unwrap())
}

/// Golden file path and freshly rendered DOT for each checked-in diagram.
pub fn golden_diagrams() -> Vec<(&'static str, String)> {
    use tapkit_core::render::{to_dot, DiagramOptions};
    let nao = nao_space();
    let fwd = tapkit_core::tapdsl::templates::forward(nao, "m", "vision").unwrap();
    let mut out = vec![
        ("golden/forward_nao_collapsed.dot", to_dot(&fwd, &DiagramOptions::new(-1, 0, true).unwrap()).unwrap()),
        ("golden/forward_nao_expanded.dot", to_dot(&fwd, &DiagramOptions::new(-1, 0, false).unwrap()).unwrap()),
    ];
    for (file, name) in [
        ("golden/autoencoder.dot", "autoencoder_q_vision"),
        ("golden/ape.dot", "ape_q_vision"),
        ("golden/td0.dot", "td0_s_r"),
        ("golden/multi_step_symmetric.dot", "multi_step_vision_3_symmetric"),
    ] {
        let t = gallery().into_iter().find(|t| t.name() == name).unwrap();
        out.push((file, to_dot(&t, &DiagramOptions::fit(&t, true)).unwrap()));
    }
    out
}

//! Linear adaptive models over tapped datasets.
//!
//! A [`LinearModel`] predicts `ŷ = W φ(x) + b`, where `φ` is the identity or a
//! quadratic expansion. Models are fit in batch by ridge-regularized least
//! squares ([`fit`]) or adapted online by LMS ([`LinearModel::lms_step`]).

mod linalg;
mod reach;

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

pub use linalg::solve;
pub use reach::{best_of_candidates, best_of_n, invert_direct, BoxSampler, CommandSampler, Reach};

use crate::engine::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMap {
    Identity,
    /// `x` followed by every product `x_i x_j` with `i ≤ j`, in lexicographic order.
    Quadratic,
}

impl FeatureMap {
    pub fn dim(self, d_in: usize) -> usize {
        match self {
            FeatureMap::Identity => d_in,
            FeatureMap::Quadratic => d_in + d_in * (d_in + 1) / 2,
        }
    }

    /// Input dimension that maps to `d_feat` features.
    pub fn input_dim(self, d_feat: usize) -> Option<usize> {
        (0..=d_feat).find(|&d| self.dim(d) == d_feat)
    }

    pub fn expand<T: Scalar>(self, x: &[T], out: &mut Vec<T>) {
        out.clear();
        out.extend_from_slice(x);
        if self == FeatureMap::Quadratic {
            for i in 0..x.len() {
                for j in i..x.len() {
                    out.push(x[i] * x[j]);
                }
            }
        }
    }
}

impl fmt::Display for FeatureMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureMap::Identity => "identity",
            FeatureMap::Quadratic => "quadratic",
        })
    }
}

impl FromStr for FeatureMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(FeatureMap::Identity),
            "quadratic" => Ok(FeatureMap::Quadratic),
            other => Err(Error::InvalidArgument(format!("unknown feature map `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<T> {
    /// Row-major `d_out × d_feat`.
    w: Vec<T>,
    b: Vec<T>,
    d_in: usize,
    feature_map: FeatureMap,
    ridge: f64,
}

impl<T: Scalar> LinearModel<T> {
    pub fn zeros(d_in: usize, d_out: usize, feature_map: FeatureMap) -> Self {
        LinearModel {
            w: vec![T::zero(); d_out * feature_map.dim(d_in)],
            b: vec![T::zero(); d_out],
            d_in,
            feature_map,
            ridge: 0.0,
        }
    }

    /// Builds a model from row-major `w` (`d_out × d_feat`) and `b`.
    pub fn from_parts(w: Vec<T>, b: Vec<T>, d_in: usize, feature_map: FeatureMap, ridge: f64) -> Result<Self> {
        let d_feat = feature_map.dim(d_in);
        if w.len() != b.len() * d_feat {
            return Err(Error::DimensionMismatch { expected: b.len() * d_feat, got: w.len() });
        }
        Ok(LinearModel { w, b, d_in, feature_map, ridge })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.b.len()
    }

    pub fn d_feat(&self) -> usize {
        self.feature_map.dim(self.d_in)
    }

    pub fn feature_map(&self) -> FeatureMap {
        self.feature_map
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn weights(&self) -> &[T] {
        &self.w
    }

    pub fn bias(&self) -> &[T] {
        &self.b
    }

    pub fn weight(&self, out: usize, feat: usize) -> T {
        self.w[out * self.d_feat() + feat]
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.d_in {
            return Err(Error::DimensionMismatch { expected: self.d_in, got: x.len() });
        }
        Ok(())
    }

    fn predict_features(&self, phi: &[T]) -> Vec<T> {
        let d_feat = phi.len();
        self.w
            .chunks_exact(d_feat)
            .zip(&self.b)
            .map(|(row, &b)| row.iter().zip(phi).fold(b, |acc, (&w, &p)| acc + w * p))
            .collect()
    }

    pub fn predict(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_input(x)?;
        let mut phi = Vec::with_capacity(self.d_feat());
        self.feature_map.expand(x, &mut phi);
        Ok(self.predict_features(&phi))
    }

    /// One LMS update: `W += rate·(y − ŷ)·φ(x)ᵀ`, `b += rate·(y − ŷ)`.
    pub fn lms_step(&mut self, x: &[T], y: &[T], rate: T) -> Result<()> {
        self.check_input(x)?;
        if y.len() != self.d_out() {
            return Err(Error::DimensionMismatch { expected: self.d_out(), got: y.len() });
        }
        if !(rate >= T::zero()) {
            return Err(Error::InvalidArgument("LMS rate must be non-negative".into()));
        }
        let mut phi = Vec::with_capacity(self.d_feat());
        self.feature_map.expand(x, &mut phi);
        let y_hat = self.predict_features(&phi);
        let d_feat = phi.len();
        for (o, (row, b)) in self.w.chunks_exact_mut(d_feat).zip(self.b.iter_mut()).enumerate() {
            let e = rate * (y[o] - y_hat[o]);
            for (w, &p) in row.iter_mut().zip(&phi) {
                *w = *w + e * p;
            }
            *b = *b + e;
        }
        Ok(())
    }

    /// `Σ‖y − ŷ‖² + ridge·‖W‖²_F` over the dataset.
    pub fn objective(&self, data: &Dataset<T>) -> Result<T> {
        let mut sse = T::zero();
        for i in 0..data.len() {
            let p = self.predict(data.x_row(i))?;
            sse = sse + p.iter().zip(data.y_row(i)).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>();
        }
        let wn = self.w.iter().map(|&w| w * w).sum::<T>();
        Ok(sse + T::of(self.ridge) * wn)
    }

    /// Root mean squared error over all target cells.
    pub fn rmse(&self, data: &Dataset<T>) -> Result<T> {
        if data.is_empty() || data.d_out() == 0 {
            return Ok(T::zero());
        }
        let mut sse = T::zero();
        for i in 0..data.len() {
            let p = self.predict(data.x_row(i))?;
            sse = sse + p.iter().zip(data.y_row(i)).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>();
        }
        Ok((sse / T::of((data.len() * data.d_out()) as f64)).sqrt())
    }

    /// Text form: header `d_out d_feat ridge feature_map`, then one line per row
    /// of `W`, then one line for `b`.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {} {} {}", self.d_out(), self.d_feat(), self.ridge, self.feature_map)?;
        let d_feat = self.d_feat();
        for row in self.w.chunks(d_feat.max(1)).take(self.d_out()) {
            let cells: Vec<String> = row.iter().map(|v| v.to_text()).collect();
            writeln!(w, "{}", cells.join(" "))?;
        }
        let cells: Vec<String> = self.b.iter().map(|v| v.to_text()).collect();
        writeln!(w, "{}", cells.join(" "))
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let bad = |msg: String| Error::InvalidArgument(format!("model file: {msg}"));
        let mut tokens: Vec<String> = Vec::new();
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad("empty".into()))?
            .map_err(|e| bad(e.to_string()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 {
            return Err(bad("header must be `d_out d_feat ridge feature_map`".into()));
        }
        let d_out: usize = h[0].parse().map_err(|_| bad(format!("bad d_out `{}`", h[0])))?;
        let d_feat: usize = h[1].parse().map_err(|_| bad(format!("bad d_feat `{}`", h[1])))?;
        let ridge: f64 = h[2].parse().map_err(|_| bad(format!("bad ridge `{}`", h[2])))?;
        let fm: FeatureMap = h[3].parse()?;
        let d_in = fm
            .input_dim(d_feat)
            .ok_or_else(|| bad(format!("d_feat {d_feat} is not a valid {fm} dimension")))?;
        for line in lines {
            tokens.extend(line.map_err(|e| bad(e.to_string()))?.split_whitespace().map(String::from));
        }
        if tokens.len() != d_out * d_feat + d_out {
            return Err(bad(format!("expected {} values, found {}", d_out * d_feat + d_out, tokens.len())));
        }
        let vals = tokens
            .iter()
            .map(|t| t.parse::<T>().map_err(|_| bad(format!("bad value `{t}`"))))
            .collect::<Result<Vec<T>>>()?;
        let (w, b) = vals.split_at(d_out * d_feat);
        LinearModel::from_parts(w.to_vec(), b.to_vec(), d_in, fm, ridge)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_text(std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_text(std::io::BufReader::new(file))
    }
}

/// Ridge least squares: minimizes `Σ‖y − W φ(x) − b‖² + ridge·‖W‖²_F`.
///
/// Solves the normal equations of the bias-augmented design; the bias is not
/// regularized. Masked cells enter with whatever fill value the dataset holds.
pub fn fit<T: Scalar>(data: &Dataset<T>, feature_map: FeatureMap, ridge: f64) -> Result<LinearModel<T>> {
    if data.is_empty() {
        return Err(Error::InsufficientData("fit needs at least one row".into()));
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidArgument(format!("ridge {ridge} must be non-negative")));
    }
    let d_in = data.d_in();
    let d_out = data.d_out();
    let d_feat = feature_map.dim(d_in);
    let p = d_feat + 1;
    let mut gram = vec![T::zero(); p * p];
    let mut rhs = vec![T::zero(); p * d_out];
    let mut phi = Vec::with_capacity(p);
    for i in 0..data.len() {
        feature_map.expand(data.x_row(i), &mut phi);
        phi.push(T::one());
        for a in 0..p {
            let pa = phi[a];
            for b in a..p {
                gram[a * p + b] = gram[a * p + b] + pa * phi[b];
            }
            for (o, &y) in data.y_row(i).iter().enumerate() {
                rhs[a * d_out + o] = rhs[a * d_out + o] + pa * y;
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[a * p + b] = gram[b * p + a];
        }
    }
    for a in 0..d_feat {
        gram[a * p + a] = gram[a * p + a] + T::of(ridge);
    }
    let theta = solve(gram, rhs, p, d_out)?;
    let mut w = vec![T::zero(); d_out * d_feat];
    for o in 0..d_out {
        for f in 0..d_feat {
            w[o * d_feat + f] = theta[f * d_out + o];
        }
    }
    let b = (0..d_out).map(|o| theta[d_feat * d_out + o]).collect();
    Ok(LinearModel { w, b, d_in, feature_map, ridge })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Anchor, Column};
    use crate::smcore::ChannelRef;
    use crate::tapdsl::Role;

    fn cols(role: Role, n: usize) -> Vec<Column> {
        (0..n).map(|i| Column { channel: ChannelRef::new("g", i), lag: 0, role, tap: 0 }).collect()
    }

    fn dataset(rows: &[(Vec<f64>, Vec<f64>)]) -> Dataset<f64> {
        let mut ds = Dataset::empty(cols(Role::Input, rows[0].0.len()), cols(Role::Target, rows[0].1.len()));
        for (t, (x, y)) in rows.iter().enumerate() {
            ds.push_row(x, y, Anchor { episode: 0, t: t as i64 }).unwrap();
        }
        ds
    }

    #[test]
    fn quadratic_dims() {
        assert_eq!(FeatureMap::Quadratic.dim(4), 14);
        assert_eq!(FeatureMap::Quadratic.input_dim(14), Some(4));
        assert_eq!(FeatureMap::Quadratic.input_dim(13), None);
        let mut out = Vec::new();
        FeatureMap::Quadratic.expand(&[2.0, 3.0], &mut out);
        assert_eq!(out, vec![2.0, 3.0, 4.0, 6.0, 9.0]);
    }

    #[test]
    fn zero_model_predicts_zero() {
        let m = LinearModel::<f64>::zeros(3, 2, FeatureMap::Identity);
        assert_eq!(m.predict(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(m.predict(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn lms_step_algebra() {
        let mut m = LinearModel::<f64>::zeros(3, 2, FeatureMap::Identity);
        m.lms_step(&[1.0, 0.0, 0.0], &[4.0, -2.0], 1.0).unwrap();
        assert_eq!((m.weight(0, 0), m.weight(1, 0)), (4.0, -2.0));
        assert_eq!(m.bias(), &[4.0, -2.0]);
        let before = m.clone();
        m.lms_step(&[0.3, 0.1, 9.0], &[1.0, 1.0], 0.0).unwrap();
        assert_eq!(m, before);
        assert!(m.lms_step(&[0.0; 3], &[0.0; 2], -1.0).is_err());
        assert!(m.lms_step(&[0.0; 3], &[0.0; 3], 1.0).is_err());
    }

    #[test]
    fn fit_recovers_affine_map() {
        let rows: Vec<_> = (0..12)
            .map(|i| {
                let x = vec![(i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()];
                let y = vec![2.0 * x[0] - x[1] + 0.5, 0.25 * x[1] - 1.0];
                (x, y)
            })
            .collect();
        let m = fit(&dataset(&rows), FeatureMap::Identity, 0.0).unwrap();
        let expect_w = [2.0, -1.0, 0.0, 0.25];
        for (a, b) in m.weights().iter().zip(expect_w) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((m.bias()[0] - 0.5).abs() < 1e-12 && (m.bias()[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_dataset_gives_wires() {
        let rows: Vec<_> = (0..8)
            .map(|i| {
                let x = vec![(i as f64).sin(), (i as f64 * 0.5).cos(), i as f64 * 0.1];
                (x.clone(), x)
            })
            .collect();
        let ds = dataset(&rows);
        let m = fit(&ds, FeatureMap::Identity, 0.0).unwrap();
        for o in 0..3 {
            for f in 0..3 {
                let want = if o == f { 1.0 } else { 0.0 };
                assert!((m.weight(o, f) - want).abs() < 1e-8);
            }
            assert!(m.bias()[o].abs() < 1e-8);
        }
        assert!(m.rmse(&ds).unwrap() < 1e-8);
    }

    #[test]
    fn single_row_needs_ridge() {
        let ds = dataset(&[(vec![1.0, 2.0], vec![3.0])]);
        assert!(matches!(fit(&ds, FeatureMap::Identity, 0.0), Err(Error::Singular)));
        let m = fit(&ds, FeatureMap::Identity, 0.1).unwrap();
        assert!(m.weights().iter().all(|w| w.is_finite()));
        assert!(fit(&ds, FeatureMap::Identity, -1.0).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let rows: Vec<_> = (0..20).map(|i| (vec![i as f64 / 7.0, (i as f64).sqrt()], vec![(i as f64).ln_1p()])).collect();
        let m = fit(&dataset(&rows), FeatureMap::Quadratic, 1e-3).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("1 5 0.001 quadratic\n"));
        assert_eq!(LinearModel::<f64>::read_text(&buf[..]).unwrap(), m);
        assert!(LinearModel::<f64>::read_text("1 4 0 quadratic\n0 0 0 0\n0\n".as_bytes()).is_err());
    }
}

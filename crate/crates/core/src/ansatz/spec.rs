use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input features fed to the first layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeatureMap {
    Identity,
    /// `x ↦ (sin(2πx/L), cos(2πx/L))`.
    TrigPeriodic { period: f64 },
}

impl FeatureMap {
    pub fn dim(&self) -> usize {
        match self {
            FeatureMap::Identity => 1,
            FeatureMap::TrigPeriodic { .. } => 2,
        }
    }
}

/// How boundary conditions are built into the ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundaryWrapper {
    None,
    /// `û = D(x)·net(x) + G(x,t)` with `D` vanishing at `a` and `b` and `G` the
    /// linear interpolant of the boundary data.
    DirichletLift { a: f64, b: f64 },
    /// Periodicity through the trigonometric feature map.
    Periodic { period: f64 },
}

/// Architecture of the tanh network plus its boundary treatment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub layer_widths: Vec<usize>,
    pub feature_map: FeatureMap,
    pub bc: BoundaryWrapper,
    pub seed: u64,
}

impl AnsatzSpec {
    /// `[1, width × hidden, 1]` on `[a, b]` with homogeneous-capable Dirichlet lift.
    pub fn dirichlet(hidden: &[usize], a: f64, b: f64, seed: u64) -> Self {
        let mut widths = vec![1];
        widths.extend_from_slice(hidden);
        widths.push(1);
        Self {
            layer_widths: widths,
            feature_map: FeatureMap::Identity,
            bc: BoundaryWrapper::DirichletLift { a, b },
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.layer_widths;
        if w.len() < 2 || w.contains(&0) {
            return Err(Error::Config(format!("invalid layer widths {w:?}")));
        }
        if w[0] != self.feature_map.dim() {
            return Err(Error::Config(format!(
                "first width {} does not match feature dimension {}",
                w[0],
                self.feature_map.dim()
            )));
        }
        if *w.last().unwrap() != 1 {
            return Err(Error::Config("the ansatz must have scalar output".into()));
        }
        match (self.bc, self.feature_map) {
            (BoundaryWrapper::Periodic { period }, FeatureMap::TrigPeriodic { period: p })
                if period == p && period > 0.0 => {}
            (BoundaryWrapper::Periodic { .. }, _) => {
                return Err(Error::Config(
                    "periodic wrapper requires the trigonometric feature map with the same period".into(),
                ))
            }
            (BoundaryWrapper::DirichletLift { a, b }, _) if !(b > a) => {
                return Err(Error::Config(format!("Dirichlet lift needs a < b, got [{a}, {b}]")))
            }
            _ => {}
        }
        if let FeatureMap::TrigPeriodic { period } = self.feature_map {
            if !(period > 0.0) {
                return Err(Error::Config("period must be positive".into()));
            }
        }
        Ok(())
    }

    /// Total parameter count `Σ (fan_in·fan_out + fan_out)`.
    pub fn n_params(&self) -> usize {
        self.layer_widths
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// Offsets of each layer's weights and biases in the flat parameter vector.
    pub fn layout(&self) -> Vec<LayerLayout> {
        let mut off = 0;
        self.layer_widths
            .windows(2)
            .map(|w| {
                let l = LayerLayout {
                    fan_in: w[0],
                    fan_out: w[1],
                    weights: off,
                    biases: off + w[0] * w[1],
                };
                off += w[0] * w[1] + w[1];
                l
            })
            .collect()
    }
}

/// Position of one affine layer inside the flat parameter vector.
///
/// Weights are row-major `fan_out × fan_in` (entry `(o, i)` at `weights + o*fan_in + i`),
/// followed by `fan_out` biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerLayout {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: usize,
    pub biases: usize,
}

/// Time-dependent Dirichlet data `g_a(t)`, `g_b(t)` and their time derivatives.
pub trait BoundaryData: Send + Sync {
    fn values(&self, t: f64) -> (f64, f64);
    fn rates(&self, t: f64) -> (f64, f64);
}

/// Homogeneous data.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroBoundary;

impl BoundaryData for ZeroBoundary {
    fn values(&self, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
    fn rates(&self, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// Boundary data given by closures.
pub struct FnBoundary<V, R> {
    pub values: V,
    pub rates: R,
}

impl<V, R> BoundaryData for FnBoundary<V, R>
where
    V: Fn(f64) -> (f64, f64) + Send + Sync,
    R: Fn(f64) -> (f64, f64) + Send + Sync,
{
    fn values(&self, t: f64) -> (f64, f64) {
        (self.values)(t)
    }
    fn rates(&self, t: f64) -> (f64, f64) {
        (self.rates)(t)
    }
}

/// Boundary values tabulated on a time grid, linearly interpolated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryTable {
    pub times: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl BoundaryTable {
    pub fn new(times: Vec<f64>, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != left.len() || times.len() != right.len() {
            return Err(Error::Config("boundary table needs ≥ 2 matching samples".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("boundary table times must increase".into()));
        }
        Ok(Self { times, left, right })
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.times.len();
        match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }
}

impl BoundaryData for BoundaryTable {
    fn values(&self, t: f64) -> (f64, f64) {
        let k = self.segment(t);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let s = (t - t0) / (t1 - t0);
        (
            self.left[k] + s * (self.left[k + 1] - self.left[k]),
            self.right[k] + s * (self.right[k + 1] - self.right[k]),
        )
    }

    fn rates(&self, t: f64) -> (f64, f64) {
        let k = self.segment(t);
        let dt = self.times[k + 1] - self.times[k];
        (
            (self.left[k + 1] - self.left[k]) / dt,
            (self.right[k + 1] - self.right[k]) / dt,
        )
    }
}

/// Mask `D(x)` and its first two derivatives: `(x-a)(b-x)` scaled to 1 at the midpoint.
pub(crate) fn mask(a: f64, b: f64, x: f64) -> (f64, f64, f64) {
    let c = 4.0 / ((b - a) * (b - a));
    (c * (x - a) * (b - x), c * (a + b - 2.0 * x), -2.0 * c)
}

pub(crate) fn features(map: FeatureMap, x: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
    match map {
        FeatureMap::Identity => ([x, 0.0], [1.0, 0.0], [0.0, 0.0]),
        FeatureMap::TrigPeriodic { period } => {
            let k = 2.0 * PI / period;
            let (s, c) = (k * x).sin_cos();
            ([s, c], [k * c, -k * s], [-k * k * s, -k * k * c])
        }
    }
}

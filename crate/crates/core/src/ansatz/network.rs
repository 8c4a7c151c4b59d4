use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::spec::{features, mask, AnsatzSpec, BoundaryData, BoundaryWrapper, LayerLayout, ZeroBoundary};
use crate::error::{check_len, Result};
use crate::par;

/// Flat parameter vector `q` in layer-major layout (see [`LayerLayout`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

/// Per-layer weights (`fan_out` rows of `fan_in`) and biases.
pub type LayerParams = (Vec<Vec<f64>>, Vec<f64>);

impl ParamVector {
    pub fn pack(spec: &AnsatzSpec, layers: &[LayerParams]) -> Result<Self> {
        let layout = spec.layout();
        check_len("layer count", layout.len(), layers.len())?;
        let mut v = Vec::with_capacity(spec.n_params());
        for (l, (w, b)) in layout.iter().zip(layers) {
            check_len("layer rows", l.fan_out, w.len())?;
            for row in w {
                check_len("layer columns", l.fan_in, row.len())?;
                v.extend_from_slice(row);
            }
            check_len("layer biases", l.fan_out, b.len())?;
            v.extend_from_slice(b);
        }
        Ok(ParamVector(v))
    }

    pub fn unpack(&self, spec: &AnsatzSpec) -> Result<Vec<LayerParams>> {
        check_len("parameter vector", spec.n_params(), self.len())?;
        Ok(spec
            .layout()
            .iter()
            .map(|l| {
                let w = (0..l.fan_out)
                    .map(|o| self[l.weights + o * l.fan_in..l.weights + (o + 1) * l.fan_in].to_vec())
                    .collect();
                (w, self[l.biases..l.biases + l.fan_out].to_vec())
            })
            .collect())
    }
}

/// Wrapped values at a set of points: `û`, `∂_x û`, `∂_xx û`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Samples {
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
    pub uxx: Vec<f64>,
}

impl Samples {
    pub fn zeros(n: usize) -> Self {
        Self {
            u: vec![0.0; n],
            ux: vec![0.0; n],
            uxx: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// The parametrization `û(x, t) = Φ(x; q)`: a tanh network with the boundary wrapper applied.
#[derive(Clone)]
pub struct Ansatz {
    spec: AnsatzSpec,
    layout: Vec<LayerLayout>,
    boundary: Arc<dyn BoundaryData>,
    max_width: usize,
}

impl std::fmt::Debug for Ansatz {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ansatz").field("spec", &self.spec).finish()
    }
}

impl Ansatz {
    pub fn new(spec: AnsatzSpec) -> Result<Self> {
        Self::with_boundary(spec, Arc::new(ZeroBoundary))
    }

    pub fn with_boundary(spec: AnsatzSpec, boundary: Arc<dyn BoundaryData>) -> Result<Self> {
        spec.validate()?;
        let layout = spec.layout();
        let max_width = spec.layer_widths.iter().copied().max().unwrap_or(1).max(2);
        Ok(Self {
            spec,
            layout,
            boundary,
            max_width,
        })
    }

    pub fn spec(&self) -> &AnsatzSpec {
        &self.spec
    }

    pub fn n_params(&self) -> usize {
        self.spec.n_params()
    }

    pub fn boundary(&self) -> &Arc<dyn BoundaryData> {
        &self.boundary
    }

    fn check(&self, q: &[f64]) -> Result<()> {
        check_len("parameter vector", self.n_params(), q.len())
    }

    /// Raw network output and its first two x-derivatives, before the wrapper.
    fn net3(&self, q: &[f64], x: f64) -> (f64, f64, f64) {
        let w = self.max_width;
        let mut h0 = vec![0.0; w];
        let mut h1 = vec![0.0; w];
        let mut h2 = vec![0.0; w];
        let mut n0 = vec![0.0; w];
        let mut n1 = vec![0.0; w];
        let mut n2 = vec![0.0; w];
        let (f0, f1, f2) = features(self.spec.feature_map, x);
        let d = self.spec.feature_map.dim();
        h0[..d].copy_from_slice(&f0[..d]);
        h1[..d].copy_from_slice(&f1[..d]);
        h2[..d].copy_from_slice(&f2[..d]);
        let last = self.layout.len() - 1;
        for (li, l) in self.layout.iter().enumerate() {
            for o in 0..l.fan_out {
                let row = &q[l.weights + o * l.fan_in..l.weights + (o + 1) * l.fan_in];
                let (mut a0, mut a1, mut a2) = (q[l.biases + o], 0.0, 0.0);
                for i in 0..l.fan_in {
                    a0 += row[i] * h0[i];
                    a1 += row[i] * h1[i];
                    a2 += row[i] * h2[i];
                }
                if li == last {
                    n0[o] = a0;
                    n1[o] = a1;
                    n2[o] = a2;
                } else {
                    // tanh' = 1 - s², tanh'' = -2 s (1 - s²)
                    let s = a0.tanh();
                    let ds = 1.0 - s * s;
                    n0[o] = s;
                    n1[o] = ds * a1;
                    n2[o] = ds * a2 - 2.0 * s * ds * a1 * a1;
                }
            }
            std::mem::swap(&mut h0, &mut n0);
            std::mem::swap(&mut h1, &mut n1);
            std::mem::swap(&mut h2, &mut n2);
        }
        (h0[0], h1[0], h2[0])
    }

    /// `(û, û_x, û_xx)` at one point. Exact derivatives, propagated layer by layer.
    pub fn eval_u_ux_uxx(&self, q: &[f64], x: f64, t: f64) -> Result<(f64, f64, f64)> {
        self.check(q)?;
        Ok(self.eval_unchecked(q, x, t))
    }

    fn eval_unchecked(&self, q: &[f64], x: f64, t: f64) -> (f64, f64, f64) {
        let (n0, n1, n2) = self.net3(q, x);
        match self.spec.bc {
            BoundaryWrapper::None | BoundaryWrapper::Periodic { .. } => (n0, n1, n2),
            BoundaryWrapper::DirichletLift { a, b } => {
                let (d0, d1, d2) = mask(a, b, x);
                let (ga, gb) = self.boundary.values(t);
                let len = b - a;
                let g0 = ga * (b - x) / len + gb * (x - a) / len;
                let g1 = (gb - ga) / len;
                (d0 * n0 + g0, d1 * n0 + d0 * n1 + g1, d2 * n0 + 2.0 * d1 * n1 + d0 * n2)
            }
        }
    }

    /// `û` only, at one point.
    pub fn value(&self, q: &[f64], x: f64, t: f64) -> Result<f64> {
        Ok(self.eval_u_ux_uxx(q, x, t)?.0)
    }

    pub fn eval_many(&self, q: &[f64], xs: &[f64], t: f64) -> Result<Samples> {
        self.check(q)?;
        let triples = par::map_slice(xs, |&x| self.eval_unchecked(q, x, t));
        let mut s = Samples::zeros(xs.len());
        for (i, (u, ux, uxx)) in triples.into_iter().enumerate() {
            s.u[i] = u;
            s.ux[i] = ux;
            s.uxx[i] = uxx;
        }
        Ok(s)
    }

    pub fn values(&self, q: &[f64], xs: &[f64], t: f64) -> Result<Vec<f64>> {
        Ok(self.eval_many(q, xs, t)?.u)
    }

    /// `∂_t G(x, t)`: the explicit time dependence of the Dirichlet lift.
    pub fn lift_rate(&self, xs: &[f64], t: f64) -> Vec<f64> {
        match self.spec.bc {
            BoundaryWrapper::DirichletLift { a, b } => {
                let (ra, rb) = self.boundary.rates(t);
                xs.iter()
                    .map(|&x| (ra * (b - x) + rb * (x - a)) / (b - a))
                    .collect()
            }
            _ => vec![0.0; xs.len()],
        }
    }

    /// Output mask factor multiplying the network (1 without a Dirichlet lift).
    fn mask_value(&self, x: f64) -> f64 {
        match self.spec.bc {
            BoundaryWrapper::DirichletLift { a, b } => mask(a, b, x).0,
            _ => 1.0,
        }
    }

    /// Adds `seed · ∂û(x)/∂q` into `grad`; returns `û(x)`.
    ///
    /// Reverse accumulation through the same layers as the forward pass.
    pub fn backprop(&self, q: &[f64], x: f64, t: f64, seed: f64, grad: &mut [f64]) -> f64 {
        let d = self.spec.feature_map.dim();
        let (f0, _, _) = features(self.spec.feature_map, x);
        // activations[l] is the input of layer l
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layout.len() + 1);
        acts.push(f0[..d].to_vec());
        let last = self.layout.len() - 1;
        for (li, l) in self.layout.iter().enumerate() {
            let input = &acts[li];
            let mut out = vec![0.0; l.fan_out];
            for (o, out_o) in out.iter_mut().enumerate() {
                let row = &q[l.weights + o * l.fan_in..l.weights + (o + 1) * l.fan_in];
                let a = q[l.biases + o] + row.iter().zip(input).map(|(w, h)| w * h).sum::<f64>();
                *out_o = if li == last { a } else { a.tanh() };
            }
            acts.push(out);
        }
        let net = acts[last + 1][0];
        let m = self.mask_value(x);
        let value = match self.spec.bc {
            BoundaryWrapper::DirichletLift { a, b } => {
                let (ga, gb) = self.boundary.values(t);
                m * net + (ga * (b - x) + gb * (x - a)) / (b - a)
            }
            _ => net,
        };

        let mut delta = vec![seed * m];
        for li in (0..=last).rev() {
            let l = self.layout[li];
            let input = &acts[li];
            for (o, &dl) in delta.iter().enumerate() {
                let base = l.weights + o * l.fan_in;
                for i in 0..l.fan_in {
                    grad[base + i] += dl * input[i];
                }
                grad[l.biases + o] += dl;
            }
            if li == 0 {
                break;
            }
            let mut back = vec![0.0; l.fan_in];
            for (o, &dl) in delta.iter().enumerate() {
                let row = &q[l.weights + o * l.fan_in..l.weights + (o + 1) * l.fan_in];
                for i in 0..l.fan_in {
                    back[i] += row[i] * dl;
                }
            }
            // input of this layer is a tanh output of the previous one
            for (i, b) in back.iter_mut().enumerate() {
                let s = input[i];
                *b *= 1.0 - s * s;
            }
            delta = back;
        }
        value
    }

    /// One Jacobian row `∂û(x)/∂q`.
    pub fn jacobian_row(&self, q: &[f64], x: f64, t: f64) -> Result<Vec<f64>> {
        self.check(q)?;
        let mut row = vec![0.0; self.n_params()];
        self.backprop(q, x, t, 1.0, &mut row);
        Ok(row)
    }

    /// `J_ij = ∂û(x_i)/∂q_j`, shape `xs.len() × n_params`. Rows are independent.
    pub fn param_jacobian(&self, q: &[f64], xs: &[f64], t: f64) -> Result<DMatrix<f64>> {
        self.check(q)?;
        let rows = par::map_slice(xs, |&x| {
            let mut row = vec![0.0; self.n_params()];
            self.backprop(q, x, t, 1.0, &mut row);
            row
        });
        Ok(assemble(rows, self.n_params()))
    }

    /// Values `û(x_i)` together with the Jacobian, from one sweep per point.
    pub fn values_and_jacobian(&self, q: &[f64], xs: &[f64], t: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.check(q)?;
        let rows = par::map_slice(xs, |&x| {
            let mut row = vec![0.0; self.n_params()];
            let u = self.backprop(q, x, t, 1.0, &mut row);
            (u, row)
        });
        let (u, rows): (Vec<f64>, Vec<Vec<f64>>) = rows.into_iter().unzip();
        Ok((u, assemble(rows, self.n_params())))
    }

    /// [`param_jacobian`](Self::param_jacobian) on the calling thread only.
    pub fn param_jacobian_sequential(&self, q: &[f64], xs: &[f64], t: f64) -> Result<DMatrix<f64>> {
        self.check(q)?;
        let rows = par::map_indices_sequential(xs.len(), |i| {
            let mut row = vec![0.0; self.n_params()];
            self.backprop(q, xs[i], t, 1.0, &mut row);
            row
        });
        Ok(assemble(rows, self.n_params()))
    }
}

fn assemble(rows: Vec<Vec<f64>>, cols: usize) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, cols, |i, j| rows[i][j])
}

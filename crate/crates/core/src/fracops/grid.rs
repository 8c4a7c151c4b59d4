use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform nodes `x_k = a + k h`, `k = 0..n`, with trapezoid quadrature weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct UniformGrid {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct GridSpec {
    a: f64,
    b: f64,
    n_points: usize,
}

impl TryFrom<GridSpec> for UniformGrid {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        UniformGrid::new(s.a, s.b, s.n_points)
    }
}

impl From<UniformGrid> for GridSpec {
    fn from(g: UniformGrid) -> Self {
        GridSpec {
            a: g.a,
            b: g.b,
            n_points: g.n,
        }
    }
}

impl UniformGrid {
    pub fn new(a: f64, b: f64, n_points: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::Domain(format!("grid needs a < b, got [{a}, {b}]")));
        }
        if n_points < 2 {
            return Err(Error::Domain(format!(
                "grid needs at least 2 points, got {n_points}"
            )));
        }
        let h = (b - a) / (n_points - 1) as f64;
        let mut weights = vec![h; n_points];
        weights[0] = 0.5 * h;
        weights[n_points - 1] = 0.5 * h;
        Ok(Self {
            a,
            b,
            n: n_points,
            h,
            weights,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Trapezoid weights (`h/2` at the ends, `h` inside).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn x(&self, k: usize) -> f64 {
        if k + 1 == self.n {
            self.b
        } else {
            self.a + k as f64 * self.h
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.x(k)).collect()
    }

    /// The grid with every interval halved: `2n - 1` nodes, the old nodes at even indices.
    pub fn refined(&self) -> UniformGrid {
        UniformGrid::new(self.a, self.b, 2 * self.n - 1).expect("refinement of a valid grid")
    }

    /// Trapezoid approximation of `∫ v dx`.
    pub fn integrate(&self, v: &[f64]) -> f64 {
        self.weights.iter().zip(v).map(|(w, v)| w * v).sum()
    }

    /// Weighted L² norm `sqrt(Σ w_i v_i²)`.
    pub fn l2_norm(&self, v: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(v)
            .map(|(w, v)| w * v * v)
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_length() {
        for &(a, b, n) in &[(0.0, 1.0, 2), (-1.0, 1.0, 300), (0.3, 7.9, 1001)] {
            let g = UniformGrid::new(a, b, n).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!(((s - (b - a)) / (b - a)).abs() < 1e-12);
            let pts = g.points();
            assert!(pts.windows(2).all(|w| w[1] > w[0]));
            assert_eq!(pts[n - 1], b);
        }
    }

    #[test]
    fn rejects_degenerate() {
        assert!(UniformGrid::new(1.0, 1.0, 10).is_err());
        assert!(UniformGrid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn refined_keeps_old_nodes() {
        let g = UniformGrid::new(-1.0, 1.0, 11).unwrap();
        let r = g.refined();
        assert_eq!(r.len(), 21);
        for k in 0..g.len() {
            assert!((r.x(2 * k) - g.x(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn serde_validates() {
        let g: UniformGrid = serde_json::from_str(r#"{"a":0.0,"b":2.0,"n_points":5}"#).unwrap();
        assert_eq!(g.h(), 0.5);
        assert!(serde_json::from_str::<UniformGrid>(r#"{"a":0.0,"b":0.0,"n_points":5}"#).is_err());
    }
}

//! Gauss–Legendre rules on intervals, the radial ball rule and the product
//! rule on the unit sphere.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights mapped to `[a, b]`, in ascending order.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("at least one node");
    let rule = GaussLegendre::new(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut pairs: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs
}

/// Radial rule on `(0, 1]` for the measure `r² dr`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialRule {
    pub nodes: Vec<f64>,
    /// Weights with `r²` absorbed.
    pub weights: Vec<f64>,
}

impl RadialRule {
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("radial rule needs at least one node".into()));
        }
        let (nodes, weights) = gauss_legendre(n, 0.0, 1.0)
            .into_iter()
            .map(|(r, w)| (r, w * r * r))
            .unzip();
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weight for the plain measure `dr` at node `i`.
    pub fn dr_weight(&self, i: usize) -> f64 {
        self.weights[i] / (self.nodes[i] * self.nodes[i])
    }

    /// Lagrange basis polynomial through the radial nodes, evaluated at `r`.
    pub fn lagrange(&self, i: usize, r: f64) -> f64 {
        let ri = self.nodes[i];
        self.nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .fold(1.0, |acc, (_, &rj)| acc * (r - rj) / (ri - rj))
    }
}

/// Product rule on S²: Gauss nodes in `cos θ`, uniform nodes in `φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereRule {
    pub directions: Vec<Vector3<f64>>,
    pub weights: Vec<f64>,
    /// Spherical polynomials up to this total degree are integrated exactly.
    pub degree: usize,
}

impl SphereRule {
    pub fn product(degree: usize) -> Self {
        let n_theta = degree / 2 + 1;
        let n_phi = degree + 1;
        let mut directions = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (z, wz) in gauss_legendre(n_theta, -1.0, 1.0) {
            let s = (1.0 - z * z).max(0.0).sqrt();
            for k in 0..n_phi {
                let phi = 2.0 * PI * (k as f64) / (n_phi as f64);
                directions.push(Vector3::new(s * phi.cos(), s * phi.sin(), z));
                weights.push(wz * 2.0 * PI / n_phi as f64);
            }
        }
        Self {
            directions,
            weights,
            degree,
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// Spherical product rule on the ball `|y| ≤ radius` around `center`, for the
/// plain measure `d³y`.
pub fn ball_rule(
    center: &Vector3<f64>,
    radius: f64,
    radial_nodes: usize,
    angular_degree: usize,
) -> Vec<(Vector3<f64>, f64)> {
    let sphere = SphereRule::product(angular_degree);
    let mut out = Vec::with_capacity(radial_nodes * sphere.len());
    for (s, ws) in gauss_legendre(radial_nodes, 0.0, radius) {
        for (u, wu) in sphere.directions.iter().zip(&sphere.weights) {
            out.push((center + u * s, ws * s * s * wu));
        }
    }
    out
}

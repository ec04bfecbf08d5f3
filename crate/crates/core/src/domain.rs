//! Box domains and their tensor midpoint discretization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the closed box. One-dimensional points keep `0.0` in the second slot.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    bounds: Vec<Interval>,
    n_per_axis: Vec<usize>,
}

impl Domain {
    pub fn new(bounds: Vec<Interval>, n_per_axis: Vec<usize>) -> Result<Self> {
        if bounds.is_empty() || bounds.len() > 2 {
            return Err(Error::InvalidDomain(format!(
                "dimension must be 1 or 2, got {}",
                bounds.len()
            )));
        }
        if bounds.len() != n_per_axis.len() {
            return Err(Error::InvalidDomain(format!(
                "{} axes declared but {} node counts given",
                bounds.len(),
                n_per_axis.len()
            )));
        }
        for (axis, iv) in bounds.iter().enumerate() {
            if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo < iv.hi) {
                return Err(Error::InvalidDomain(format!(
                    "axis {axis}: need lo < hi, got [{}, {}]",
                    iv.lo, iv.hi
                )));
            }
        }
        if let Some(axis) = n_per_axis.iter().position(|&n| n < 2) {
            return Err(Error::InvalidDomain(format!(
                "axis {axis}: at least 2 nodes required, got {}",
                n_per_axis[axis]
            )));
        }
        Ok(Domain { bounds, n_per_axis })
    }

    /// The unit interval with `n` nodes.
    pub fn unit_interval(n: usize) -> Result<Self> {
        Domain::new(vec![Interval::new(0.0, 1.0)], vec![n])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn n_per_axis(&self) -> &[usize] {
        &self.n_per_axis
    }

    pub fn node_count(&self) -> usize {
        self.n_per_axis.iter().product()
    }

    /// Lebesgue measure |Ω|.
    pub fn measure(&self) -> f64 {
        self.bounds.iter().map(Interval::length).product()
    }

    /// Index of the midpoint node equal to `p` (up to 1e-12, scaled by the box size).
    pub fn locate(&self, p: &Point) -> Option<usize> {
        let scale = self
            .bounds()
            .iter()
            .map(|iv| iv.lo.abs().max(iv.hi.abs()).max(iv.length()))
            .fold(1.0, f64::max);
        let tol = 1e-12 * scale;
        // Tensor structure: recover each axis index directly.
        let mut index = 0usize;
        for (axis, (iv, &n)) in self.bounds.iter().zip(&self.n_per_axis).enumerate() {
            let h = iv.length() / n as f64;
            let k = ((p[axis] - iv.lo) / h - 0.5).round();
            if k < 0.0 || k >= n as f64 {
                return None;
            }
            let k = k as usize;
            let centre = iv.lo + (k as f64 + 0.5) * h;
            if (centre - p[axis]).abs() > tol {
                return None;
            }
            index = index * n + k;
        }
        if self.dim() == 1 && p[1].abs() > tol {
            return None;
        }
        Some(index)
    }

    pub fn diameter(&self) -> f64 {
        self.bounds
            .iter()
            .map(|iv| iv.length().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: Domain,
    nodes: Vec<Point>,
    weights: Vec<f64>,
}

impl Grid {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ_i w_i u_i.
    pub fn integrate(&self, u: &[f64]) -> f64 {
        self.weights.iter().zip(u).map(|(w, v)| w * v).sum()
    }

    /// Σ_i w_i u_i v_i.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(u.iter().zip(v))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// Index of the node equal to `p`, see [`Domain::locate`].
    pub fn locate(&self, p: &Point) -> Option<usize> {
        self.domain.locate(p)
    }
}

/// Tensor midpoint rule: nodes at cell centres, weights equal to cell volumes,
/// row-major ordering with the first axis varying slowest.
pub fn build_grid(domain: &Domain) -> Grid {
    let axes: Vec<Vec<f64>> = domain
        .bounds()
        .iter()
        .zip(domain.n_per_axis())
        .map(|(iv, &n)| {
            let h = iv.length() / n as f64;
            (0..n).map(|k| iv.lo + (k as f64 + 0.5) * h).collect()
        })
        .collect();
    let cell: f64 = domain
        .bounds()
        .iter()
        .zip(domain.n_per_axis())
        .map(|(iv, &n)| iv.length() / n as f64)
        .product();

    let nodes: Vec<Point> = match axes.as_slice() {
        [xs] => xs.iter().map(|&x| [x, 0.0]).collect(),
        [xs, ys] => xs
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| [x, y]))
            .collect(),
        _ => unreachable!("Domain enforces dim in {{1, 2}}"),
    };
    let weights = vec![cell; nodes.len()];
    Grid {
        domain: domain.clone(),
        nodes,
        weights,
    }
}

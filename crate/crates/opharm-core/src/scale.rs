//! Logarithmic scale grids carrying the measure dε/ε.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Log-spaced quadrature grid for integrals against dε/ε: trapezoid rule in
/// log ε, so Σ w_k = log(ε_max/ε_min) exactly up to rounding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleGrid {
    eps_min: f64,
    eps_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ScaleGrid {
    pub fn new(eps_min: f64, eps_max: f64, k: usize) -> Result<Self> {
        if !(eps_min > 0.0 && eps_max > eps_min) {
            return Err(Error::Domain(format!(
                "scale grid needs 0 < eps_min < eps_max, got [{eps_min}, {eps_max}]"
            )));
        }
        if k < 2 {
            return Err(Error::Domain("scale grid needs at least 2 nodes".into()));
        }
        let (lo, hi) = (eps_min.ln(), eps_max.ln());
        let du = (hi - lo) / (k - 1) as f64;
        let nodes: Vec<f64> = (0..k).map(|i| (lo + du * i as f64).exp()).collect();
        let weights: Vec<f64> = (0..k)
            .map(|i| if i == 0 || i == k - 1 { du / 2.0 } else { du })
            .collect();
        Ok(ScaleGrid {
            eps_min,
            eps_max,
            nodes,
            weights,
        })
    }

    /// Wraps explicit nodes and weights (strictly increasing nodes).
    pub fn from_nodes_weights(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::Domain(
                "nodes and weights must match and be nonempty".into(),
            ));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) || nodes[0] <= 0.0 {
            return Err(Error::Domain(
                "nodes must be positive and increasing".into(),
            ));
        }
        Ok(ScaleGrid {
            eps_min: nodes[0],
            eps_max: *nodes.last().unwrap(),
            nodes,
            weights,
        })
    }

    /// Default grid for reproducing-pair residuals on a lattice of N points
    /// per axis: [1/(4N), 8] with 256 nodes.
    pub fn default_for_reproducing(n_axis: usize) -> Self {
        ScaleGrid::new(1.0 / (4.0 * n_axis as f64), 8.0, 256).expect("valid parameters")
    }

    /// Default grid for Hardy-norm square functions. The lower endpoint
    /// scales like 1e-3 / band so the finest oscillation of a band-limited
    /// field keeps all but ~1e-4 of its scale mass inside the grid.
    pub fn default_for_hardy(band: usize) -> Self {
        let b = band.max(1) as f64;
        ScaleGrid::new(1e-3 / b, 8.0, 128).expect("valid parameters")
    }

    pub fn eps_min(&self) -> f64 {
        self.eps_min
    }

    pub fn eps_max(&self) -> f64 {
        self.eps_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Quadrature of ∫ g(ε) dε/ε over the grid.
    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&e, &w)| w * g(e))
            .sum()
    }

    /// Restriction to nodes with ε ≤ cap, weights untouched.
    pub fn clipped(&self, cap: f64) -> ScaleGrid {
        let k = self.nodes.iter().take_while(|&&e| e <= cap).count();
        ScaleGrid {
            eps_min: self.eps_min,
            eps_max: self
                .nodes
                .get(k.saturating_sub(1))
                .copied()
                .unwrap_or(self.eps_min),
            nodes: self.nodes[..k].to_vec(),
            weights: self.weights[..k].to_vec(),
        }
    }
}

/// Dyadic scale levels 2^{-j}, j = 0..=max_level, for the discrete square
/// functions on the torus. The deepest level keeps 2^{-j} >= 1/(2N).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicLevels {
    max_level: u32,
}

impl DyadicLevels {
    pub fn new(max_level: u32) -> Self {
        DyadicLevels { max_level }
    }

    pub fn default_for_grid(n_axis: usize) -> Self {
        // 2^{-j} >= 1/(2N)  <=>  j <= log2(2N)
        DyadicLevels {
            max_level: (2 * n_axis).ilog2(),
        }
    }

    pub fn scales(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.max_level).map(|j| 0.5f64.powi(j as i32))
    }

    pub fn len(&self) -> usize {
        self.max_level as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_log_range() {
        let g = ScaleGrid::new(1e-3, 8.0, 101).unwrap();
        let sum: f64 = g.weights().iter().sum();
        assert!((sum - (8.0f64 / 1e-3).ln()).abs() < 1e-12);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn quadrature_of_compact_bump_is_accurate() {
        // ∫ exp(-ln(ε)^2) dε/ε = sqrt(pi)
        let g = ScaleGrid::new(1e-4, 1e4, 257).unwrap();
        let v = g.integrate(|e| (-e.ln().powi(2)).exp());
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn clipping_keeps_prefix() {
        let g = ScaleGrid::new(0.01, 1.0, 64).unwrap();
        let c = g.clipped(0.5);
        assert!(c.nodes().iter().all(|&e| e <= 0.5));
        assert!(!c.is_empty());
        assert_eq!(c.weights().len(), c.nodes().len());
    }

    #[test]
    fn dyadic_levels_floor() {
        let l = DyadicLevels::default_for_grid(32);
        let scales: Vec<f64> = l.scales().collect();
        assert_eq!(scales[0], 1.0);
        assert!(scales.last().unwrap() >= &(1.0 / 64.0));
        assert!(scales.last().unwrap() < &(1.0 / 32.0 + 1e-15));
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(ScaleGrid::new(0.0, 1.0, 8).is_err());
        assert!(ScaleGrid::new(2.0, 1.0, 8).is_err());
        assert!(ScaleGrid::new(0.1, 1.0, 1).is_err());
    }
}

//! Gauss-Hermite nodes for averages over a normal distribution.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;

use crate::error::{Error, Result};

/// Nodes and probability weights for `N(mean, std²)`, ascending in position.
/// The weights sum to one.
pub fn normal_nodes(n: usize, mean: f64, std: f64) -> Result<Vec<(f64, f64)>> {
    let n = NonZeroUsize::new(n)
        .ok_or_else(|| Error::arg("n", "Gauss-Hermite rule needs at least one node"))?;
    let norm = std::f64::consts::PI.sqrt();
    let mut nodes: Vec<(f64, f64)> = GaussHermite::new(n)
        .iter()
        .map(|(x, w)| (mean + std::f64::consts::SQRT_2 * std * x, w / norm))
        .collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_one() {
        for n in [1, 2, 5, 16, 32, 64] {
            let total: f64 = normal_nodes(n, 0.0, 1.0).unwrap().iter().map(|p| p.1).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn moments_of_a_normal() {
        let nodes = normal_nodes(16, 10.0, 2.0).unwrap();
        let mean: f64 = nodes.iter().map(|n| n.0 * n.1).sum();
        let var: f64 = nodes.iter().map(|n| (n.0 - 10.0).powi(2) * n.1).sum();
        let fourth: f64 = nodes.iter().map(|n| (n.0 - 10.0).powi(4) * n.1).sum();
        assert_abs_diff_eq!(mean, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(var, 4.0, epsilon = 1e-11);
        // oracle: E[(x-μ)⁴] = 3σ⁴
        assert_abs_diff_eq!(fourth, 48.0, epsilon = 1e-9);
    }

    #[test]
    fn characteristic_function() {
        // oracle: E[cos(k x)] = e^{-k²σ²/2} for x ~ N(0, σ²)
        let nodes = normal_nodes(32, 0.0, 1.5).unwrap();
        let c: f64 = nodes.iter().map(|n| n.0.cos() * n.1).sum();
        assert_abs_diff_eq!(c, (-1.125f64).exp(), epsilon = 1e-13);
    }

    #[test]
    fn sorted_and_symmetric() {
        let nodes = normal_nodes(7, 0.0, 1.0).unwrap();
        assert!(nodes.windows(2).all(|p| p[0].0 < p[1].0));
        for i in 0..7 {
            assert_abs_diff_eq!(nodes[i].0, -nodes[6 - i].0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(normal_nodes(0, 0.0, 1.0).is_err());
    }
}

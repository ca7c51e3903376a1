use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::normal_nodes;
use crate::wavepacket::Species;

/// Default Gauss-Hermite node count for continuous spectra.
pub const DEFAULT_NODES: usize = 32;
/// Tolerance on the weight normalization of discrete spectra.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;
/// Largest `Δm / m̄` accepted.
pub const MAX_RELATIVE_SPREAD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpectrumKind {
    Discrete { masses: Vec<f64>, weights: Vec<f64> },
    Gaussian { mean: f64, std: f64 },
    /// `n` harmonic degrees of freedom at temperature `kt` on top of the
    /// ground-state mass `m0`: Gaussian with mean `m0 + n kt` and standard
    /// deviation `kt √n`.
    Thermal { m0: f64, n: f64, kt: f64 },
}

/// Internal-state mass distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassSpectrum {
    kind: SpectrumKind,
    nodes: usize,
}

impl MassSpectrum {
    pub fn new(kind: SpectrumKind, nodes: usize) -> Result<Self> {
        match &kind {
            SpectrumKind::Discrete { masses, weights } => {
                if masses.is_empty() {
                    return Err(Error::InvalidSpectrum("no masses".into()));
                }
                if masses.len() != weights.len() {
                    return Err(Error::InvalidSpectrum(format!(
                        "{} masses but {} weights",
                        masses.len(),
                        weights.len()
                    )));
                }
                if let Some(m) = masses.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
                    return Err(Error::arg("masses", format!("{m} must be positive")));
                }
                if let Some(p) = weights.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    return Err(Error::arg("weights", format!("{p} not in [0, 1]")));
                }
                let sum: f64 = weights.iter().sum();
                if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                    return Err(Error::InvalidSpectrum(format!(
                        "weights must sum to 1 (sum = {sum})"
                    )));
                }
            }
            SpectrumKind::Gaussian { mean, std } => {
                if !(*mean > 0.0 && mean.is_finite()) {
                    return Err(Error::arg("mean", format!("{mean} must be positive")));
                }
                if !(*std >= 0.0 && std.is_finite()) {
                    return Err(Error::arg("std", format!("{std} must be non-negative")));
                }
            }
            SpectrumKind::Thermal { m0, n, kt } => {
                for (name, v) in [("m0", *m0), ("n", *n), ("kt", *kt)] {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(Error::arg(name, format!("{v} must be positive")));
                    }
                }
            }
        }
        if nodes == 0 {
            return Err(Error::arg("nodes", "at least one quadrature node"));
        }
        let s = Self { kind, nodes };
        let ratio = s.std() / s.mean();
        if !(ratio < MAX_RELATIVE_SPREAD) {
            return Err(Error::InvalidSpectrum(format!(
                "relative spread {ratio:.4} must be below {MAX_RELATIVE_SPREAD}"
            )));
        }
        Ok(s)
    }

    pub fn discrete(pairs: &[(f64, f64)]) -> Result<Self> {
        let (masses, weights) = pairs.iter().copied().unzip();
        Self::new(SpectrumKind::Discrete { masses, weights }, DEFAULT_NODES)
    }

    pub fn single(mass: f64) -> Result<Self> {
        Self::discrete(&[(mass, 1.0)])
    }

    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        Self::new(SpectrumKind::Gaussian { mean, std }, DEFAULT_NODES)
    }

    pub fn thermal(m0: f64, n: f64, kt: f64) -> Result<Self> {
        Self::new(SpectrumKind::Thermal { m0, n, kt }, DEFAULT_NODES)
    }

    pub fn with_nodes(self, nodes: usize) -> Result<Self> {
        Self::new(self.kind, nodes)
    }

    pub fn kind(&self) -> &SpectrumKind {
        &self.kind
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.kind, SpectrumKind::Discrete { .. })
    }

    pub fn mean(&self) -> f64 {
        match &self.kind {
            SpectrumKind::Discrete { masses, weights } => {
                masses.iter().zip(weights).map(|(m, p)| m * p).sum()
            }
            SpectrumKind::Gaussian { mean, .. } => *mean,
            SpectrumKind::Thermal { m0, n, kt } => m0 + n * kt,
        }
    }

    pub fn std(&self) -> f64 {
        match &self.kind {
            SpectrumKind::Discrete { masses, weights } => {
                let mean = self.mean();
                masses
                    .iter()
                    .zip(weights)
                    .map(|(m, p)| p * (m - mean).powi(2))
                    .sum::<f64>()
                    .sqrt()
            }
            SpectrumKind::Gaussian { std, .. } => *std,
            SpectrumKind::Thermal { n, kt, .. } => kt * n.sqrt(),
        }
    }

    /// Masses and weights used for every average over the spectrum: the
    /// discrete entries, or Gauss-Hermite nodes of the Gaussian.
    pub fn species(&self) -> Vec<Species> {
        match &self.kind {
            SpectrumKind::Discrete { masses, weights } => masses
                .iter()
                .zip(weights)
                .map(|(&mass, &weight)| Species { mass, weight })
                .collect(),
            _ => {
                let (mean, std) = (self.mean(), self.std());
                if std == 0.0 {
                    return vec![Species {
                        mass: mean,
                        weight: 1.0,
                    }];
                }
                normal_nodes(self.nodes, mean, std)
                    .expect("node count validated")
                    .into_iter()
                    .map(|(mass, weight)| Species { mass, weight })
                    .collect()
            }
        }
    }

    pub fn masses(&self) -> Vec<f64> {
        self.species().iter().map(|s| s.mass).collect()
    }
}

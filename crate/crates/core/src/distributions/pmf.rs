use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A law on ℤ₊ stored on a contiguous window `offset..offset + weights.len()`.
///
/// Mass beyond the window is not stored; `tail_mass` bounds it and
/// `tail_excess` bounds `E[(Z − last)⁺]` where `last` is the final stored
/// index. Both are zero for laws with finite support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    pub offset: u64,
    pub weights: Vec<f64>,
    pub tail_mass: f64,
    pub tail_excess: f64,
}

const NORMALIZATION_TOL: f64 = 1e-12;

impl Pmf {
    pub fn new(offset: u64, weights: Vec<f64>, tail_mass: f64, tail_excess: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(domain("pmf needs at least one stored weight"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(domain("pmf weights must be finite and non-negative"));
        }
        if !(tail_mass >= 0.0) || !(tail_excess >= 0.0) {
            return Err(domain("tail quantities must be non-negative"));
        }
        let total: f64 = weights.iter().sum::<f64>() + tail_mass;
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(domain(format!("pmf mass is {total}, expected 1")));
        }
        Ok(Self {
            offset,
            weights,
            tail_mass,
            tail_excess,
        })
    }

    /// Point mass at `k`.
    pub fn delta(k: u64) -> Self {
        Self {
            offset: k,
            weights: vec![1.0],
            tail_mass: 0.0,
            tail_excess: 0.0,
        }
    }

    /// One past the last stored index.
    pub fn end(&self) -> u64 {
        self.offset + self.weights.len() as u64
    }

    pub fn prob(&self, k: u64) -> f64 {
        if k < self.offset || k >= self.end() {
            return 0.0;
        }
        self.weights[(k - self.offset) as usize]
    }

    /// Stored mass plus tail mass.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.tail_mass
    }

    /// Mean of the stored part plus the certified tail contribution.
    pub fn mean(&self) -> f64 {
        let stored: f64 = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| (self.offset + i as u64) as f64 * w)
            .sum();
        let last = (self.end() - 1) as f64;
        stored + last * self.tail_mass + self.tail_excess
    }

    /// CDF using the stored weights; beyond the window it is `1 − tail_mass`.
    pub fn cdf(&self, k: i64) -> f64 {
        if k < self.offset as i64 {
            return 0.0;
        }
        let upto = ((k as u64 - self.offset) as usize + 1).min(self.weights.len());
        self.weights[..upto].iter().sum()
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A 1-Lipschitz function on ℤ₊, stored as `f(0)`, the increments
/// `d_k = f(k+1) − f(k)` for `k < increments.len()`, and a constant slope
/// beyond that.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzFn {
    f0: f64,
    increments: Vec<f64>,
    tail_slope: f64,
}

fn check_slope(d: f64) -> bool {
    d.is_finite() && d.abs() <= 1.0
}

impl LipschitzFn {
    pub fn new(f0: f64, increments: Vec<f64>, tail_slope: f64) -> Result<Self> {
        if !f0.is_finite() {
            return Err(domain(format!("f(0) must be finite, got {f0}")));
        }
        if let Some((k, d)) = increments.iter().enumerate().find(|(_, d)| !check_slope(**d)) {
            return Err(domain(format!("increment d_{k} = {d} is not in [-1, 1]")));
        }
        if !check_slope(tail_slope) {
            return Err(domain(format!("tail slope {tail_slope} is not in [-1, 1]")));
        }
        Ok(Self {
            f0,
            increments,
            tail_slope,
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(c, Vec::new(), 0.0)
    }

    /// `f(x) = f0 + slope·x`.
    pub fn linear(f0: f64, slope: f64) -> Result<Self> {
        Self::new(f0, Vec::new(), slope)
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn tail_slope(&self) -> f64 {
        self.tail_slope
    }

    /// Number of explicitly stored increments.
    pub fn n_f(&self) -> usize {
        self.increments.len()
    }

    /// Increment `f(k+1) − f(k)`.
    pub fn increment(&self, k: u64) -> f64 {
        self.increments
            .get(k as usize)
            .copied()
            .unwrap_or(self.tail_slope)
    }

    pub fn eval(&self, k: u64) -> f64 {
        let stored = (k as usize).min(self.increments.len());
        let head: f64 = self.increments[..stored].iter().sum();
        self.f0 + head + self.tail_slope * (k as usize - stored) as f64
    }

    /// `f(0), …, f(last)` by cumulative summation.
    pub fn values(&self, last: u64) -> Vec<f64> {
        let mut out = Vec::with_capacity(last as usize + 1);
        let mut v = self.f0;
        out.push(v);
        for k in 0..last {
            v += self.increment(k);
            out.push(v);
        }
        out
    }

    /// Largest absolute increment.
    pub fn lipschitz_constant(&self) -> f64 {
        self.increments
            .iter()
            .fold(self.tail_slope.abs(), |m, d| m.max(d.abs()))
    }

    /// `αf + βh`, provided the result stays 1-Lipschitz.
    pub fn combine(alpha: f64, f: &LipschitzFn, beta: f64, h: &LipschitzFn) -> Result<Self> {
        let n = f.n_f().max(h.n_f());
        let inc = (0..n as u64)
            .map(|k| alpha * f.increment(k) + beta * h.increment(k))
            .collect();
        Self::new(
            alpha * f.f0 + beta * h.f0,
            inc,
            alpha * f.tail_slope + beta * h.tail_slope,
        )
    }

    /// `f + c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            f0: self.f0 + c,
            ..self.clone()
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            f0: -self.f0,
            increments: self.increments.iter().map(|d| -d).collect(),
            tail_slope: -self.tail_slope,
        }
    }
}

/// The maximizer of `Δg_f(i)` over the Lipschitz class: `f_i(j) = −|j − i|`.
pub fn extremal_f(i: u64) -> LipschitzFn {
    LipschitzFn {
        f0: -(i as f64),
        increments: vec![1.0; i as usize],
        tail_slope: -1.0,
    }
}

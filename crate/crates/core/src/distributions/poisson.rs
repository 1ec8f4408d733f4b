use super::negbin::sum_tail;
use super::pmf::Pmf;
use super::sampling::sample_poisson;
use super::truncation_index;
use crate::error::{domain, Result};
use crate::numerics::{ln_factorial, RngStream};

/// Poisson(λ) with λ > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poisson {
    lambda: f64,
}

impl Poisson {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(domain(format!("Poisson mean must be finite and > 0, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn log_pmf(&self, k: u64) -> f64 {
        let kf = k as f64;
        let tail = if k == 0 { 0.0 } else { kf * self.lambda.ln() };
        -self.lambda + tail - ln_factorial(k)
    }

    pub fn pmf(&self, k: u64) -> f64 {
        self.log_pmf(k).exp()
    }

    pub fn truncation(&self) -> u64 {
        truncation_index(self.lambda, self.lambda.sqrt())
    }

    pub fn to_pmf(&self) -> Pmf {
        let last = self.truncation();
        let ratio = |k: u64| self.lambda / (k as f64 + 1.0);
        let mut weights = Vec::with_capacity(last as usize + 1);
        let mut log_term = -self.lambda;
        weights.push(log_term.exp());
        for j in 0..last {
            log_term += ratio(j).ln();
            weights.push(log_term.exp());
        }
        let (tail_mass, tail_excess) = sum_tail(last, log_term, ratio, 0.0);
        Pmf {
            offset: 0,
            weights,
            tail_mass,
            tail_excess,
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> u64 {
        sample_poisson(rng, self.lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_and_matches_direct_formula() {
        for lambda in [0.1, 1.0, 5.0, 20.0, 100.0] {
            let d = Poisson::new(lambda).unwrap();
            let pmf = d.to_pmf();
            assert!((pmf.total_mass() - 1.0).abs() < 1e-12);
            assert!((pmf.mean() - lambda).abs() < 1e-10 * lambda.max(1.0));
            let k = lambda as u64;
            assert!(((pmf.prob(k) - d.pmf(k)) / d.pmf(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_positive_mean() {
        assert!(Poisson::new(0.0).is_err());
        assert!(Poisson::new(-1.0).is_err());
    }
}

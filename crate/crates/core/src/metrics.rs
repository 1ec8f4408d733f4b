//! Wasserstein-1 and total-variation distances between laws on ℤ₊.
//!
//! On the integers W1 has the closed form `Σ_k |F_μ(k) − F_ν(k)|`, so no
//! transport problem is solved. Laws stored as [`Pmf`] may carry an
//! unstored tail; its effect is bounded and reported as `err_bound`.

use serde::{Deserialize, Serialize};

use crate::distributions::Pmf;
use crate::error::{Error, Result};

/// Counting measure of a sample on ℤ₊; `counts[k]` is the number of draws
/// equal to `k`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalDist {
    counts: Vec<u64>,
    n: u64,
}

impl EmpiricalDist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_samples(samples: &[u64]) -> Self {
        let mut e = Self::new();
        for &s in samples {
            e.add(s);
        }
        e
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        let n = counts.iter().sum();
        let mut e = Self { counts, n };
        e.trim();
        e
    }

    pub fn add(&mut self, k: u64) {
        let k = k as usize;
        if k >= self.counts.len() {
            self.counts.resize(k + 1, 0);
        }
        self.counts[k] += 1;
        self.n += 1;
    }

    /// Pool two samples. Counting is commutative, so merge order is irrelevant.
    pub fn merge(mut self, other: &EmpiricalDist) -> Self {
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.n += other.n;
        self
    }

    fn trim(&mut self) {
        while self.counts.last() == Some(&0) {
            self.counts.pop();
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, k: u64) -> u64 {
        self.counts.get(k as usize).copied().unwrap_or(0)
    }

    pub fn freq(&self, k: u64) -> f64 {
        self.count(k) as f64 / self.n as f64
    }

    pub fn mean(&self) -> f64 {
        let s: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(k, &c)| k as f64 * c as f64)
            .sum();
        s / self.n as f64
    }

    /// Raw moment `E[X^order]`.
    pub fn moment(&self, order: i32) -> f64 {
        let s: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(k, &c)| (k as f64).powi(order) * c as f64)
            .sum();
        s / self.n as f64
    }

    /// Largest observed value.
    pub fn max_value(&self) -> Option<u64> {
        self.counts.iter().rposition(|&c| c > 0).map(|k| k as u64)
    }

    /// The empirical law as a [`Pmf`] with no tail.
    pub fn to_pmf(&self) -> Result<Pmf> {
        if self.n == 0 {
            return Err(Error::Precision("empirical law of an empty sample".into()));
        }
        let n = self.n as f64;
        let weights: Vec<f64> = self.counts.iter().map(|&c| c as f64 / n).collect();
        Ok(Pmf {
            offset: 0,
            weights,
            tail_mass: 0.0,
            tail_excess: 0.0,
        })
    }
}

/// A distance together with a bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distance {
    pub value: f64,
    pub err_bound: f64,
}

/// Truncation error allowed before W1 refuses to answer.
pub const W1_CERTIFY_TOL: f64 = 1e-10;

/// Error contributed by a law's unstored tail when its CDF is frozen at
/// `1 − tail_mass` from its last stored index up to `window_end`.
fn tail_error(pmf: &Pmf, window_end: u64) -> f64 {
    let extra_cells = (window_end - pmf.end() + 1) as f64;
    extra_cells * pmf.tail_mass + pmf.tail_excess
}

/// W1 distance `Σ_k |F_μ(k) − F_ν(k)|`.
///
/// Fails with an accuracy error when the unstored tails could move the
/// result by more than [`W1_CERTIFY_TOL`].
pub fn wasserstein_pmf(mu: &Pmf, nu: &Pmf) -> Result<Distance> {
    let d = wasserstein_uncertified(mu, nu);
    if d.err_bound > W1_CERTIFY_TOL {
        return Err(Error::Accuracy {
            what: "unstored tail mass too heavy to certify the Wasserstein distance".into(),
            estimate: d.value,
            err_est: d.err_bound,
        });
    }
    Ok(d)
}

fn wasserstein_uncertified(mu: &Pmf, nu: &Pmf) -> Distance {
    let lo = mu.offset.min(nu.offset);
    let hi = mu.end().max(nu.end());
    let (mut fm, mut fn_) = (0.0, 0.0);
    let mut value = 0.0;
    for k in lo..hi {
        fm += mu.prob(k);
        fn_ += nu.prob(k);
        value += (fm - fn_).abs();
    }
    // The final cell k = hi − 1 contributes |tail_ν − tail_μ| up to rounding,
    // which is already inside `value`.
    Distance {
        value,
        err_bound: tail_error(mu, hi) + tail_error(nu, hi),
    }
}

/// W1 distance between an empirical law and a model law.
pub fn wasserstein_empirical(sample: &EmpiricalDist, nu: &Pmf) -> Result<f64> {
    let emp = sample.to_pmf()?;
    Ok(wasserstein_uncertified(&emp, nu).value)
}

/// W1 distance between two empirical laws.
pub fn wasserstein_two_sample(a: &EmpiricalDist, b: &EmpiricalDist) -> Result<f64> {
    if a.n == 0 || b.n == 0 {
        return Err(Error::Precision("empirical law of an empty sample".into()));
    }
    let (na, nb) = (a.n as f64, b.n as f64);
    let len = a.counts.len().max(b.counts.len());
    let (mut ca, mut cb) = (0u64, 0u64);
    let mut value = 0.0;
    for k in 0..len {
        ca += a.counts.get(k).copied().unwrap_or(0);
        cb += b.counts.get(k).copied().unwrap_or(0);
        value += (ca as f64 / na - cb as f64 / nb).abs();
    }
    Ok(value)
}

/// Total variation `½ Σ_k |μ(k) − ν(k)|`, plus half of each unstored tail.
pub fn tv_distance(mu: &Pmf, nu: &Pmf) -> f64 {
    let lo = mu.offset.min(nu.offset);
    let hi = mu.end().max(nu.end());
    let stored: f64 = (lo..hi).map(|k| (mu.prob(k) - nu.prob(k)).abs()).sum();
    0.5 * (stored + mu.tail_mass + nu.tail_mass)
}

/// Total variation between two empirical laws.
pub fn tv_two_sample(a: &EmpiricalDist, b: &EmpiricalDist) -> Result<f64> {
    if a.n == 0 || b.n == 0 {
        return Err(Error::Precision("empirical law of an empty sample".into()));
    }
    let (na, nb) = (a.n as f64, b.n as f64);
    let len = a.counts.len().max(b.counts.len());
    let s: f64 = (0..len)
        .map(|k| (a.count(k as u64) as f64 / na - b.count(k as u64) as f64 / nb).abs())
        .sum();
    Ok(0.5 * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::NegBinParams;

    fn nb(r: f64, p: f64) -> Pmf {
        NegBinParams::new(r, p).unwrap().to_pmf()
    }

    #[test]
    fn identical_laws_are_at_distance_zero() {
        let a = nb(2.0, 0.5);
        assert_eq!(wasserstein_pmf(&a, &a).unwrap().value, 0.0);
        assert_eq!(tv_distance(&Pmf::delta(4), &Pmf::delta(4)), 0.0);
    }

    #[test]
    fn unit_transport_between_points() {
        let d = wasserstein_pmf(&Pmf::delta(0), &Pmf::delta(3)).unwrap();
        assert_eq!(d.value, 3.0);
        assert_eq!(d.err_bound, 0.0);
        assert_eq!(tv_distance(&Pmf::delta(0), &Pmf::delta(1)), 1.0);
    }

    #[test]
    fn nested_negative_binomials() {
        // NB(2, p) is NB(1, p) plus an independent NB(1, p), so the laws are
        // stochastically ordered and W1 is the mean gap.
        let d = wasserstein_pmf(&nb(1.0, 0.5), &nb(2.0, 0.5)).unwrap();
        assert!((d.value - 1.0).abs() < 1e-12, "{}", d.value);
    }

    #[test]
    fn empirical_against_point_mass() {
        let s = EmpiricalDist::from_samples(&[0, 0, 2, 2]);
        assert!((wasserstein_empirical(&s, &Pmf::delta(1)).unwrap() - 1.0).abs() < 1e-15);
        let s = EmpiricalDist::from_samples(&[5]);
        assert_eq!(wasserstein_empirical(&s, &Pmf::delta(5)).unwrap(), 0.0);
    }

    #[test]
    fn tv_geometric_vs_nb_by_looped_scan() {
        let geo = nb(1.0, 0.5);
        let nb2 = nb(2.0, 0.5);
        // Direct 2000-term half-sum from closed-form pmfs.
        let mut acc = 0.0;
        for k in 0..2000i32 {
            let g = 0.5f64.powi(k + 1);
            let n = (k + 1) as f64 * 0.25 * 0.5f64.powi(k);
            acc += (g - n).abs();
        }
        let oracle = 0.5 * acc;
        assert!((tv_distance(&geo, &nb2) - oracle).abs() < 1e-12);
    }

    #[test]
    fn heavy_unstored_tail_is_refused() {
        let truncated = Pmf::new(0, vec![0.5, 0.3], 0.2, 5.0).unwrap();
        assert!(matches!(
            wasserstein_pmf(&truncated, &Pmf::delta(0)),
            Err(Error::Accuracy { .. })
        ));
    }

    #[test]
    fn two_sample_helpers() {
        let a = EmpiricalDist::from_samples(&[0, 1, 1, 3]);
        let b = EmpiricalDist::from_samples(&[1, 1, 1, 1]);
        assert!((tv_two_sample(&a, &b).unwrap() - 0.5).abs() < 1e-15);
        // CDF gaps: k=0: .25, k=1: .25, k=2: .25.
        assert!((wasserstein_two_sample(&a, &b).unwrap() - 0.75).abs() < 1e-15);
        assert!(tv_two_sample(&EmpiricalDist::new(), &b).is_err());
    }

    #[test]
    fn merge_is_commutative() {
        let a = EmpiricalDist::from_samples(&[0, 4, 4]);
        let b = EmpiricalDist::from_samples(&[1, 2]);
        assert_eq!(a.clone().merge(&b), b.clone().merge(&a));
        assert_eq!(a.merge(&b).n(), 5);
    }
}

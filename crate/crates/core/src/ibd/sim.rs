use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::metrics::EmpiricalDist;
use crate::numerics::RngStream;

/// Replicates abort once the population exceeds this size.
pub const POPULATION_CAP: u64 = 10_000_000;

/// A bounded, time-dependent immigration rate `s ↦ a_s`.
pub type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Immigration {
    Constant(f64),
    /// Simulated by thinning a rate-`a_max` Poisson stream.
    Varying { rate: RateFn, a_max: f64 },
}

impl fmt::Debug for Immigration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Immigration::Constant(a) => f.debug_tuple("Constant").field(a).finish(),
            Immigration::Varying { a_max, .. } => f
                .debug_struct("Varying")
                .field("a_max", a_max)
                .finish_non_exhaustive(),
        }
    }
}

/// An immigration–birth–death process with per-capita birth rate `b` and
/// unit per-capita death rate.
#[derive(Debug, Clone)]
pub struct IBDParams {
    immigration: Immigration,
    birth: f64,
    z0: u64,
}

fn check_birth(b: f64) -> Result<()> {
    if !b.is_finite() || b < 0.0 {
        return Err(domain(format!("birth rate must be finite and >= 0, got {b}")));
    }
    Ok(())
}

impl IBDParams {
    pub fn constant(a: f64, b: f64, z0: u64) -> Result<Self> {
        if !a.is_finite() || a < 0.0 {
            return Err(domain(format!("immigration rate must be finite and >= 0, got {a}")));
        }
        check_birth(b)?;
        Ok(Self {
            immigration: Immigration::Constant(a),
            birth: b,
            z0,
        })
    }

    /// Time-varying immigration; `a_max` must bound `rate` on the horizon.
    pub fn varying(rate: RateFn, a_max: f64, b: f64, z0: u64) -> Result<Self> {
        if !a_max.is_finite() || a_max < 0.0 {
            return Err(domain(format!("rate bound a_max must be finite and >= 0, got {a_max}")));
        }
        check_birth(b)?;
        Ok(Self {
            immigration: Immigration::Varying { rate, a_max },
            birth: b,
            z0,
        })
    }

    pub fn immigration(&self) -> &Immigration {
        &self.immigration
    }

    pub fn birth(&self) -> f64 {
        self.birth
    }

    pub fn z0(&self) -> u64 {
        self.z0
    }
}

/// Population at `t_end`, by exact event-driven simulation.
///
/// In state `n` all events fire at total rate `ā + n(b + 1)`, where `ā` is
/// the immigration rate or its bound `a_max`; an immigration candidate at
/// time `s` is kept with probability `a_s/a_max`.
pub fn simulate_ibd(params: &IBDParams, t_end: f64, rng: &mut RngStream) -> Result<u64> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(domain(format!("t_end must be finite and > 0, got {t_end}")));
    }
    let (a_bound, rate) = match &params.immigration {
        Immigration::Constant(a) => (*a, None),
        Immigration::Varying { rate, a_max } => (*a_max, Some(rate)),
    };
    let b = params.birth;
    let mut n = params.z0;
    let mut s = 0.0;
    loop {
        let nf = n as f64;
        let total = a_bound + nf * (b + 1.0);
        if total <= 0.0 {
            return Ok(n);
        }
        s += rng.exponential(total);
        if s > t_end {
            return Ok(n);
        }
        let u = rng.uniform() * total;
        if u < a_bound {
            let accept = match rate {
                None => true,
                Some(rate) => {
                    let a = rate(s);
                    if !(0.0..=a_bound * (1.0 + 1e-12)).contains(&a) {
                        return Err(domain(format!(
                            "immigration rate {a} at time {s} is outside [0, a_max = {a_bound}]"
                        )));
                    }
                    rng.uniform() * a_bound < a
                }
            };
            if accept {
                n += 1;
            }
        } else if u < a_bound + nf * b {
            n += 1;
        } else {
            n -= 1;
        }
        if n > POPULATION_CAP {
            return Err(Error::SupercriticalGrowth {
                cap: POPULATION_CAP,
                time: s,
            });
        }
    }
}

const CHUNK: u64 = 4096;

/// Run `n` independent replicates of `draw`, replicate `i` on stream
/// `(seed, base_stream + i)`, and count the results.
///
/// Runs on the current rayon pool. Because streams are tied to replicate
/// indices and counts commute, the result does not depend on the number
/// of worker threads.
pub fn run_replicates<F>(n: u64, seed: u64, base_stream: u64, draw: F) -> Result<EmpiricalDist>
where
    F: Fn(&mut RngStream) -> Result<u64> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Result<EmpiricalDist>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut emp = EmpiricalDist::new();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let mut rng = RngStream::new(seed, base_stream.wrapping_add(i));
                emp.add(draw(&mut rng)?);
            }
            Ok(emp)
        })
        .collect();
    parts
        .into_iter()
        .try_fold(EmpiricalDist::new(), |acc, part| Ok(acc.merge(&part?)))
}

/// `n` endpoints of the process at `t_end`.
pub fn simulate_replicates(
    params: &IBDParams,
    t_end: f64,
    n: u64,
    seed: u64,
    base_stream: u64,
) -> Result<EmpiricalDist> {
    run_replicates(n, seed, base_stream, |rng| simulate_ibd(params, t_end, rng))
}

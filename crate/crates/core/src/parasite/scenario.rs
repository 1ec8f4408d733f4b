use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Parasite ingestion rate `s ↦ a_s` as a function of host age.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IngestionRate {
    Constant {
        abar: f64,
    },
    /// `abar·(1 + amp·sin(2πs/period + phase))`.
    Sinusoid {
        abar: f64,
        amp: f64,
        period: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `levels[i]` on the i-th interval cut out by the increasing breakpoints.
    Piecewise {
        breakpoints: Vec<f64>,
        levels: Vec<f64>,
    },
    /// Linear interpolation through `(knots[i], values[i])`, constant
    /// outside the knots.
    Table {
        knots: Vec<f64>,
        values: Vec<f64>,
    },
}

fn finite_nonneg(x: f64, what: &str) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Input(format!("{what} must be finite and >= 0, got {x}")));
    }
    Ok(())
}

fn strictly_increasing(xs: &[f64], what: &str) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input(format!("{what} must be finite and strictly increasing")));
    }
    Ok(())
}

impl IngestionRate {
    pub fn validate(&self) -> Result<()> {
        match self {
            IngestionRate::Constant { abar } => finite_nonneg(*abar, "abar"),
            IngestionRate::Sinusoid {
                abar,
                amp,
                period,
                phase,
            } => {
                finite_nonneg(*abar, "abar")?;
                if !(amp.abs() <= 1.0) {
                    return Err(Error::Input(format!("sinusoid amplitude must satisfy |amp| <= 1, got {amp}")));
                }
                if !(*period > 0.0) || !period.is_finite() {
                    return Err(Error::Input(format!("period must be finite and > 0, got {period}")));
                }
                if !phase.is_finite() {
                    return Err(Error::Input("phase must be finite".into()));
                }
                Ok(())
            }
            IngestionRate::Piecewise { breakpoints, levels } => {
                strictly_increasing(breakpoints, "breakpoints")?;
                if levels.len() != breakpoints.len() + 1 {
                    return Err(Error::Input(format!(
                        "piecewise rate needs {} levels for {} breakpoints, got {}",
                        breakpoints.len() + 1,
                        breakpoints.len(),
                        levels.len()
                    )));
                }
                levels.iter().try_for_each(|&l| finite_nonneg(l, "level"))
            }
            IngestionRate::Table { knots, values } => {
                if knots.is_empty() || knots.len() != values.len() {
                    return Err(Error::Input("table needs equally many (>= 1) knots and values".into()));
                }
                strictly_increasing(knots, "knots")?;
                values.iter().try_for_each(|&v| finite_nonneg(v, "table value"))
            }
        }
    }

    /// `a_s`, with no range check on `s`.
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            IngestionRate::Constant { abar } => *abar,
            IngestionRate::Sinusoid {
                abar,
                amp,
                period,
                phase,
            } => {
                let x = std::f64::consts::TAU * s / period + phase;
                (abar * (1.0 + amp * x.sin())).max(0.0)
            }
            IngestionRate::Piecewise { breakpoints, levels } => {
                levels[breakpoints.partition_point(|&b| b <= s)]
            }
            IngestionRate::Table { knots, values } => {
                let i = knots.partition_point(|&k| k <= s);
                if i == 0 {
                    values[0]
                } else if i == knots.len() {
                    values[knots.len() - 1]
                } else {
                    let w = (s - knots[i - 1]) / (knots[i] - knots[i - 1]);
                    values[i - 1] + w * (values[i] - values[i - 1])
                }
            }
        }
    }

    /// An upper bound on `a_s` over all `s`.
    pub fn a_max(&self) -> f64 {
        match self {
            IngestionRate::Constant { abar } => *abar,
            IngestionRate::Sinusoid { abar, amp, .. } => abar * (1.0 + amp.abs()),
            IngestionRate::Piecewise { levels, .. } => levels.iter().copied().fold(0.0, f64::max),
            IngestionRate::Table { values, .. } => values.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Points in (0, T) where the rate has a jump or a kink.
    pub fn breaks(&self, horizon: f64) -> Vec<f64> {
        let pts: &[f64] = match self {
            IngestionRate::Piecewise { breakpoints, .. } => breakpoints,
            IngestionRate::Table { knots, .. } => knots,
            _ => &[],
        };
        pts.iter().copied().filter(|&x| x > 0.0 && x < horizon).collect()
    }

    /// The rate's own reference level: the constant or sinusoid base, and
    /// the time average over `[0, T]` otherwise.
    fn natural_abar(&self, horizon: f64) -> f64 {
        match self {
            IngestionRate::Constant { abar } | IngestionRate::Sinusoid { abar, .. } => *abar,
            _ => {
                let mut edges = vec![0.0];
                edges.extend(self.breaks(horizon));
                edges.push(horizon);
                // Piecewise linear between edges, so the trapezoid rule is exact.
                let area: f64 = edges
                    .windows(2)
                    .map(|w| {
                        let (l, r) = (w[0], w[1]);
                        // Right limit at l, left limit at r.
                        let eps = 1e-12 * (r - l);
                        0.5 * (r - l) * (self.eval(l + eps) + self.eval(r - eps))
                    })
                    .sum();
                area / horizon
            }
        }
    }
}

/// A host-age scenario: ingestion rate, reference rate `ā`, parasite
/// birth rate `b` and host age `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario", into = "RawScenario")]
pub struct ScenarioParams {
    pub rate: IngestionRate,
    pub abar: f64,
    pub b: f64,
    pub t: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    rate: IngestionRate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    abar: Option<f64>,
    b: f64,
    #[serde(rename = "T")]
    t: f64,
}

impl TryFrom<RawScenario> for ScenarioParams {
    type Error = Error;

    fn try_from(raw: RawScenario) -> Result<Self> {
        if !(raw.t > 0.0) || !raw.t.is_finite() {
            return Err(Error::Input(format!("T must be finite and > 0, got {}", raw.t)));
        }
        raw.rate.validate()?;
        let abar = raw.abar.unwrap_or_else(|| raw.rate.natural_abar(raw.t));
        ScenarioParams::new(raw.rate, abar, raw.b, raw.t)
    }
}

impl From<ScenarioParams> for RawScenario {
    fn from(s: ScenarioParams) -> Self {
        RawScenario {
            rate: s.rate,
            abar: Some(s.abar),
            b: s.b,
            t: s.t,
        }
    }
}

impl ScenarioParams {
    pub fn new(rate: IngestionRate, abar: f64, b: f64, t: f64) -> Result<Self> {
        rate.validate()?;
        if !(abar > 0.0) || !abar.is_finite() {
            return Err(Error::Input(format!("abar must be finite and > 0, got {abar}")));
        }
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::Input(format!("b must lie in (0, 1), got {b}")));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Input(format!("T must be finite and > 0, got {t}")));
        }
        Ok(Self { rate, abar, b, t })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))
    }

    /// `a_s` for `0 ≤ s ≤ T`.
    pub fn rate_eval(&self, s: f64) -> Result<f64> {
        if !(0.0..=self.t).contains(&s) {
            return Err(domain(format!("age {s} is outside [0, T = {}]", self.t)));
        }
        Ok(self.rate.eval(s))
    }

    pub fn a_max(&self) -> f64 {
        self.rate.a_max()
    }
}

/// A named battery member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryEntry {
    pub name: String,
    pub scenario: ScenarioParams,
}

/// A versioned set of scenarios with the Monte Carlo settings used to
/// validate them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Battery {
    pub version: u32,
    pub seed: u64,
    pub samples: u64,
    pub scenarios: Vec<BatteryEntry>,
}

impl Battery {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))
    }
}

/// The built-in battery, `data/battery_v1.json`.
pub fn battery_v1() -> Battery {
    Battery::from_json(include_str!("../../data/battery_v1.json")).expect("built-in battery is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_evaluation() {
        assert_eq!(IngestionRate::Constant { abar: 2.0 }.eval(3.3), 2.0);
        let s = IngestionRate::Sinusoid {
            abar: 2.0,
            amp: 0.5,
            period: 1.0,
            phase: 0.0,
        };
        assert_eq!(s.eval(0.0), 2.0);
        assert!((s.eval(0.25) - 3.0).abs() < 1e-15);
        let t = IngestionRate::Table {
            knots: vec![0.0, 1.0],
            values: vec![2.0, 4.0],
        };
        assert_eq!(t.eval(0.5), 3.0);
        assert_eq!(t.eval(-1.0), 2.0);
        assert_eq!(t.eval(9.0), 4.0);
        let p = IngestionRate::Piecewise {
            breakpoints: vec![1.0, 2.0],
            levels: vec![3.0, 1.0, 5.0],
        };
        assert_eq!((p.eval(0.5), p.eval(1.0), p.eval(2.5)), (3.0, 1.0, 5.0));
    }

    #[test]
    fn rate_eval_range() {
        let sc = ScenarioParams::new(IngestionRate::Constant { abar: 2.0 }, 2.0, 0.5, 4.0).unwrap();
        assert!(sc.rate_eval(-0.1).is_err());
        assert!(sc.rate_eval(4.1).is_err());
        assert_eq!(sc.rate_eval(4.0).unwrap(), 2.0);
    }

    #[test]
    fn json_round_trip_and_strictness() {
        let text = r#"{"rate": {"kind": "sinusoid", "abar": 2.0, "amp": 0.5, "period": 1.0, "phase": 0.0}, "b": 0.5, "T": 4.0}"#;
        let sc = ScenarioParams::from_json(text).unwrap();
        assert_eq!(sc.abar, 2.0);
        assert_eq!(sc.t, 4.0);
        let back = ScenarioParams::from_json(&serde_json::to_string(&sc).unwrap()).unwrap();
        assert_eq!(back, sc);
        let extra = r#"{"rate": {"kind": "constant", "abar": 2.0}, "b": 0.5, "T": 4.0, "x": 1}"#;
        assert!(ScenarioParams::from_json(extra).is_err());
        let extra_in_rate = r#"{"rate": {"kind": "constant", "abar": 2.0, "amp": 1}, "b": 0.5, "T": 4.0}"#;
        assert!(ScenarioParams::from_json(extra_in_rate).is_err());
        let bad_amp = r#"{"rate": {"kind": "sinusoid", "abar": 2.0, "amp": 1.5, "period": 1.0}, "b": 0.5, "T": 4.0}"#;
        assert!(ScenarioParams::from_json(bad_amp).is_err());
        let bad_b = r#"{"rate": {"kind": "constant", "abar": 2.0}, "b": 1.5, "T": 4.0}"#;
        assert!(ScenarioParams::from_json(bad_b).is_err());
    }

    #[test]
    fn default_reference_is_time_average() {
        let text = r#"{"rate": {"kind": "piecewise", "breakpoints": [1.0], "levels": [3.0, 1.0]}, "b": 0.5, "T": 4.0}"#;
        let sc = ScenarioParams::from_json(text).unwrap();
        assert!((sc.abar - 1.5).abs() < 1e-9);
        let text = r#"{"rate": {"kind": "table", "knots": [0.0, 2.0], "values": [1.0, 3.0]}, "b": 0.5, "T": 4.0}"#;
        // (1 + 3)/2·2 + 3·2 = 10 over T = 4.
        assert!((ScenarioParams::from_json(text).unwrap().abar - 2.5).abs() < 1e-9);
    }

    #[test]
    fn builtin_battery_loads() {
        let b = battery_v1();
        assert_eq!(b.version, 1);
        assert!(b.scenarios.len() >= 6);
    }
}

//! Beta schedules: the rule assigning `(alpha_i, beta_i)` to each position.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Rule producing the Beta parameters of the latent reinforcement `W_i`.
///
/// Positions are 1-based, matching the usual statement of the model:
/// `ThetaLinear` sets `alpha_i = i + theta - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BetaSchedule {
    /// `W_i ~ Beta(a, b)` for every `i`.
    Constant { a: f64, b: f64 },
    /// `W_i ~ Beta(i + theta - 1, beta)`.
    ThetaLinear { theta: f64, beta: f64 },
    /// One `(alpha_i, beta_i)` pair per position.
    Explicit { params: Vec<(f64, f64)> },
    /// Degenerate weights `W_i = (theta + i - 1) / (theta + i)`; reproduces the
    /// Blackwell-MacQueen urn of a Dirichlet process with mass `theta`.
    DpDeterministic { theta: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        domain(format!("{name} must be positive and finite, got {v}"))
    }
}

impl BetaSchedule {
    pub fn constant(a: f64, b: f64) -> Result<Self> {
        let s = Self::Constant { a, b };
        s.validate()?;
        Ok(s)
    }

    pub fn theta_linear(theta: f64, beta: f64) -> Result<Self> {
        let s = Self::ThetaLinear { theta, beta };
        s.validate()?;
        Ok(s)
    }

    pub fn explicit(params: Vec<(f64, f64)>) -> Result<Self> {
        let s = Self::Explicit { params };
        s.validate()?;
        Ok(s)
    }

    pub fn dp(theta: f64) -> Result<Self> {
        let s = Self::DpDeterministic { theta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { a, b } => {
                positive("a", *a)?;
                positive("b", *b)
            }
            Self::ThetaLinear { theta, beta } => {
                positive("theta", *theta)?;
                if beta.is_finite() && *beta >= 1.0 {
                    Ok(())
                } else {
                    domain(format!("beta must be >= 1, got {beta}"))
                }
            }
            Self::Explicit { params } => params.iter().try_for_each(|(a, b)| {
                positive("alpha_i", *a)?;
                positive("beta_i", *b)
            }),
            Self::DpDeterministic { theta } => positive("theta", *theta),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, Self::DpDeterministic { .. })
    }

    /// Beta parameters for 1-based position `i`.
    ///
    /// The deterministic DP schedule has no Beta law and returns a domain error.
    pub fn params(&self, i: usize) -> Result<(f64, f64)> {
        if i == 0 {
            return domain("positions are 1-based");
        }
        match self {
            Self::Constant { a, b } => Ok((*a, *b)),
            Self::ThetaLinear { theta, beta } => Ok((i as f64 + theta - 1.0, *beta)),
            Self::Explicit { params } => params
                .get(i - 1)
                .copied()
                .ok_or(Error::OutOfRange { index: i, len: params.len() }),
            Self::DpDeterministic { .. } => {
                domain("deterministic DP schedule has no Beta parameters")
            }
        }
    }

    /// `E[W_i^k]` for 1-based position `i`.
    pub fn weight_moment(&self, i: usize, k: u32) -> Result<f64> {
        if let Self::DpDeterministic { theta } = self {
            if i == 0 {
                return domain("positions are 1-based");
            }
            return Ok(dp_weight(*theta, i).powi(k as i32));
        }
        let (a, b) = self.params(i)?;
        Ok((0..k).map(|t| (a + t as f64) / (a + b + t as f64)).product())
    }

    /// Draw `W_i` for 1-based position `i`.
    pub fn sample_weight<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Result<f64> {
        if let Self::DpDeterministic { theta } = self {
            if i == 0 {
                return domain("positions are 1-based");
            }
            return Ok(dp_weight(*theta, i));
        }
        let (a, b) = self.params(i)?;
        Ok(sample_beta(a, b, rng))
    }
}

pub(crate) fn dp_weight(theta: f64, i: usize) -> f64 {
    (theta + i as f64 - 1.0) / (theta + i as f64)
}

/// Draw from `Beta(a, b)` clamped into the open unit interval.
pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let w = if b == 1.0 {
        // Beta(a, 1) has cdf w^a.
        let u: f64 = 1.0 - rng.random::<f64>();
        (u.ln() / a).exp()
    } else {
        Beta::new(a, b).expect("validated Beta parameters").sample(rng)
    };
    w.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

impl fmt::Display for BetaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { a, b } => write!(f, "const:{a},{b}"),
            Self::ThetaLinear { theta, beta } if *beta == 1.0 => write!(f, "theta:{theta}"),
            Self::ThetaLinear { theta, beta } => write!(f, "theta:{theta},{beta}"),
            Self::Explicit { params } => write!(f, "explicit:{}", params.len()),
            Self::DpDeterministic { theta } => write!(f, "dp:{theta}"),
        }
    }
}

impl FromStr for BetaSchedule {
    type Err = Error;

    /// Parses `theta:T`, `theta:T,BETA`, `const:A,B` or `dp:THETA`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unrecognised schedule `{s}`"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let nums = rest
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        match (kind.trim(), nums.as_slice()) {
            ("theta", [t]) => Self::theta_linear(*t, 1.0),
            ("theta", [t, b]) => Self::theta_linear(*t, *b),
            ("const", [a, b]) => Self::constant(*a, *b),
            ("dp", [t]) => Self::dp(*t),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_follow_family_rules() {
        let s = BetaSchedule::theta_linear(1.0, 1.0).unwrap();
        assert_eq!(s.params(5).unwrap(), (5.0, 1.0));
        let s = BetaSchedule::constant(2.0, 3.0).unwrap();
        assert_eq!(s.params(99).unwrap(), (2.0, 3.0));
        let s = BetaSchedule::theta_linear(2.0, 1.0).unwrap();
        assert_eq!(s.params(1).unwrap(), (2.0, 1.0));
    }

    #[test]
    fn explicit_out_of_range() {
        let s = BetaSchedule::explicit(vec![(1.0, 2.0), (3.0, 4.0)]).unwrap();
        assert_eq!(s.params(2).unwrap(), (3.0, 4.0));
        assert_eq!(s.params(3), Err(Error::OutOfRange { index: 3, len: 2 }));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(BetaSchedule::constant(0.0, 1.0).is_err());
        assert!(BetaSchedule::constant(1.0, -1.0).is_err());
        assert!(BetaSchedule::theta_linear(1.0, 0.5).is_err());
        assert!(BetaSchedule::theta_linear(-1.0, 1.0).is_err());
        assert!(BetaSchedule::dp(0.0).is_err());
        assert!(BetaSchedule::explicit(vec![(1.0, 0.0)]).is_err());
    }

    #[test]
    fn dp_weights_are_degenerate_and_inside_unit_interval() {
        let s = BetaSchedule::dp(1.0).unwrap();
        let mut rng = crate::rng::Seeder::new(0).rng();
        let w: Vec<f64> = (1..=3).map(|i| s.sample_weight(i, &mut rng).unwrap()).collect();
        assert_eq!(w, vec![0.5, 2.0 / 3.0, 0.75]);
        assert!(s.params(1).is_err());
        assert_eq!(s.weight_moment(2, 2).unwrap(), 4.0 / 9.0);
    }

    #[test]
    fn beta_power_moments() {
        let s = BetaSchedule::constant(1.0, 1.0).unwrap();
        assert!((s.weight_moment(1, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.weight_moment(1, 0).unwrap(), 1.0);
    }

    #[test]
    fn parse_round_trip() {
        for text in ["theta:1", "theta:2,3", "const:1,1", "dp:0.5"] {
            let s: BetaSchedule = text.parse().unwrap();
            assert_eq!(s.to_string(), text);
        }
        assert!("beta:1".parse::<BetaSchedule>().is_err());
        assert!("const:1".parse::<BetaSchedule>().is_err());
        assert!("theta:x".parse::<BetaSchedule>().is_err());
    }
}

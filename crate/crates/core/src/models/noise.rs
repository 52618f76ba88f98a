use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::seeding::open01;

/// Innovation law used for the `Z`, `ε` or `Y` sequences of the models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum NoiseSpec {
    /// `P(Y > y) = p (y/scale)^{−α}` and `P(Y < −y) = q (y/scale)^{−α}` for `y ≥ scale`.
    TwoSidedPareto { alpha: f64, p: f64, q: f64, scale: f64 },
    /// Student t with `dof` degrees of freedom (not rescaled).
    StudentT { dof: f64 },
    StandardNormal,
    /// Two-sided Pareto with `p = q = 1/2`.
    SymmetrizedPareto { alpha: f64, scale: f64 },
}

impl NoiseSpec {
    pub fn pareto(alpha: f64, p: f64, scale: f64) -> Self {
        NoiseSpec::TwoSidedPareto {
            alpha,
            p,
            q: 1.0 - p,
            scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::TwoSidedPareto { alpha, p, q, scale } => {
                positive("pareto alpha", alpha)?;
                positive("pareto scale", scale)?;
                if !(p >= 0.0 && q >= 0.0) || (p + q - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidModel(format!(
                        "tail balance needs p, q >= 0 and p + q = 1, got p={p}, q={q}"
                    )));
                }
                Ok(())
            }
            NoiseSpec::StudentT { dof } => positive("student t dof", dof),
            NoiseSpec::StandardNormal => Ok(()),
            NoiseSpec::SymmetrizedPareto { alpha, scale } => {
                positive("pareto alpha", alpha)?;
                positive("pareto scale", scale)
            }
        }
    }

    /// Tail index of `|Y|`, `None` for light tails.
    pub fn tail_index(&self) -> Option<f64> {
        match *self {
            NoiseSpec::TwoSidedPareto { alpha, .. } | NoiseSpec::SymmetrizedPareto { alpha, .. } => {
                Some(alpha)
            }
            NoiseSpec::StudentT { dof } => Some(dof),
            NoiseSpec::StandardNormal => None,
        }
    }

    /// Tail balance `(p, q)` of a heavy-tailed law.
    pub fn tail_balance(&self) -> Option<(f64, f64)> {
        match *self {
            NoiseSpec::TwoSidedPareto { p, q, .. } => Some((p, q)),
            NoiseSpec::StudentT { .. } | NoiseSpec::SymmetrizedPareto { .. } => Some((0.5, 0.5)),
            NoiseSpec::StandardNormal => None,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match *self {
            NoiseSpec::TwoSidedPareto { p, q, .. } => p == q,
            _ => true,
        }
    }

    /// Constant `C` with `P(|Y| > y) = C y^{−α}` exactly in the tail, for the
    /// Pareto laws.
    pub fn exact_abs_tail_constant(&self) -> Option<f64> {
        match *self {
            NoiseSpec::TwoSidedPareto { alpha, scale, .. }
            | NoiseSpec::SymmetrizedPareto { alpha, scale } => Some(scale.powf(alpha)),
            _ => None,
        }
    }

    /// `E|Y|^r`, when finite.
    pub fn abs_moment(&self, r: f64) -> Option<f64> {
        if r == 0.0 {
            return Some(1.0);
        }
        match *self {
            NoiseSpec::TwoSidedPareto { alpha, scale, .. }
            | NoiseSpec::SymmetrizedPareto { alpha, scale } => {
                (r < alpha).then(|| scale.powf(r) * alpha / (alpha - r))
            }
            NoiseSpec::StandardNormal => {
                (r > -1.0).then(|| 2f64.powf(r / 2.0) * gamma((r + 1.0) / 2.0) / PI.sqrt())
            }
            NoiseSpec::StudentT { dof } => (r > -1.0 && r < dof).then(|| {
                (r / 2.0 * dof.ln() + ln_gamma((r + 1.0) / 2.0) + ln_gamma((dof - r) / 2.0)
                    - ln_gamma(dof / 2.0))
                    .exp()
                    / PI.sqrt()
            }),
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match *self {
            NoiseSpec::TwoSidedPareto { alpha, p, q, scale } => {
                (alpha > 1.0).then(|| (p - q) * scale * alpha / (alpha - 1.0))
            }
            NoiseSpec::SymmetrizedPareto { alpha, .. } => (alpha > 1.0).then_some(0.0),
            NoiseSpec::StudentT { dof } => (dof > 1.0).then_some(0.0),
            NoiseSpec::StandardNormal => Some(0.0),
        }
    }

    /// 32-bit words consumed per draw when that number is fixed.
    pub fn words_per_draw(&self) -> Option<u64> {
        match self {
            NoiseSpec::TwoSidedPareto { .. } | NoiseSpec::SymmetrizedPareto { .. } => Some(2),
            _ => None,
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseSpec::TwoSidedPareto { alpha, p, q, scale } => {
                let u = open01(rng);
                if u < p {
                    scale * (u / p).powf(-1.0 / alpha)
                } else {
                    -scale * ((u - p) / q).powf(-1.0 / alpha)
                }
            }
            NoiseSpec::SymmetrizedPareto { alpha, scale } => {
                let u = open01(rng);
                if u < 0.5 {
                    scale * (2.0 * u).powf(-1.0 / alpha)
                } else {
                    -scale * (2.0 * u - 1.0).powf(-1.0 / alpha)
                }
            }
            NoiseSpec::StudentT { dof } => {
                StudentT::new(dof).expect("validated dof").sample(rng)
            }
            NoiseSpec::StandardNormal => StandardNormal.sample(rng),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Law of the non-negative multiplier `A` or additive term `B` of a
/// stochastic recurrence `X_t = A_t X_{t−1} + B_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum PositiveLaw {
    Constant { value: f64 },
    /// `exp(N(mu, sigma2))`.
    LogNormal { mu: f64, sigma2: f64 },
    Uniform { lo: f64, hi: f64 },
    /// `scale · Z² + shift` with `Z` drawn from `noise`.
    AffineSquare { scale: f64, shift: f64, noise: NoiseSpec },
}

impl PositiveLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            PositiveLaw::Constant { value } => {
                if *value >= 0.0 && value.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidModel(format!("constant must be >= 0, got {value}")))
                }
            }
            PositiveLaw::LogNormal { mu, sigma2 } => {
                if mu.is_finite() && *sigma2 > 0.0 && sigma2.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidModel(format!(
                        "lognormal needs finite mu and sigma2 > 0, got mu={mu}, sigma2={sigma2}"
                    )))
                }
            }
            PositiveLaw::Uniform { lo, hi } => {
                if *lo >= 0.0 && hi > lo && hi.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidModel(format!("uniform needs 0 <= lo < hi, got [{lo}, {hi}]")))
                }
            }
            PositiveLaw::AffineSquare { scale, shift, noise } => {
                noise.validate()?;
                if *scale >= 0.0 && *shift >= 0.0 && scale.is_finite() && shift.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidModel(format!(
                        "affine square needs scale, shift >= 0, got scale={scale}, shift={shift}"
                    )))
                }
            }
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            PositiveLaw::Constant { value } => *value,
            PositiveLaw::LogNormal { mu, sigma2 } => {
                let z: f64 = StandardNormal.sample(rng);
                (mu + sigma2.sqrt() * z).exp()
            }
            PositiveLaw::Uniform { lo, hi } => lo + (hi - lo) * open01(rng),
            PositiveLaw::AffineSquare { scale, shift, noise } => {
                let z = noise.sample(rng);
                scale * z * z + shift
            }
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match self {
            PositiveLaw::Constant { value } => Some(*value),
            PositiveLaw::LogNormal { mu, sigma2 } => Some((mu + sigma2 / 2.0).exp()),
            PositiveLaw::Uniform { lo, hi } => Some((lo + hi) / 2.0),
            PositiveLaw::AffineSquare { scale, shift, noise } => {
                if *scale == 0.0 {
                    return Some(*shift);
                }
                noise.abs_moment(2.0).map(|m2| scale * m2 + shift)
            }
        }
    }

    /// `E A^κ` in closed form when available.
    pub fn moment(&self, kappa: f64) -> Option<f64> {
        match self {
            PositiveLaw::Constant { value } => Some(value.powf(kappa)),
            PositiveLaw::LogNormal { mu, sigma2 } => Some((kappa * mu + kappa * kappa * sigma2 / 2.0).exp()),
            PositiveLaw::Uniform { lo, hi } => {
                Some((hi.powf(kappa + 1.0) - lo.powf(kappa + 1.0)) / ((kappa + 1.0) * (hi - lo)))
            }
            PositiveLaw::AffineSquare { scale, shift, noise } => {
                if *shift == 0.0 {
                    noise.abs_moment(2.0 * kappa).map(|m| scale.powf(kappa) * m)
                } else if *scale == 0.0 {
                    Some(shift.powf(kappa))
                } else {
                    None
                }
            }
        }
    }

    /// `E log A` in closed form when available (`−∞` allowed).
    pub fn log_mean(&self) -> Option<f64> {
        match self {
            PositiveLaw::Constant { value } => Some(value.ln()),
            PositiveLaw::LogNormal { mu, .. } => Some(*mu),
            PositiveLaw::AffineSquare { scale, shift, .. } if *scale == 0.0 => Some(shift.ln()),
            _ => None,
        }
    }

    pub fn is_degenerate_zero(&self) -> bool {
        matches!(self, PositiveLaw::Constant { value } if *value == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;

    #[test]
    fn pareto_tail_is_exact() {
        let noise = NoiseSpec::pareto(1.5, 0.7, 2.0);
        let mut rng = rng_from_seed(4);
        let n = 400_000;
        let draws: Vec<f64> = (0..n).map(|_| noise.sample(&mut rng)).collect();
        assert!(draws.iter().all(|x| x.abs() >= 2.0));
        let y = 6.0;
        let right = draws.iter().filter(|&&x| x > y).count() as f64 / n as f64;
        let left = draws.iter().filter(|&&x| x < -y).count() as f64 / n as f64;
        let tail = (y / 2.0f64).powf(-1.5);
        assert!((right - 0.7 * tail).abs() < 4.0 * (0.7 * tail / n as f64).sqrt());
        assert!((left - 0.3 * tail).abs() < 4.0 * (0.3 * tail / n as f64).sqrt());
    }

    #[test]
    fn one_sided_pareto_support() {
        let noise = NoiseSpec::pareto(1.0, 1.0, 1.0);
        let mut rng = rng_from_seed(1);
        assert!((0..10_000).all(|_| noise.sample(&mut rng) >= 1.0));
    }

    #[test]
    fn validation() {
        assert!(NoiseSpec::TwoSidedPareto { alpha: 1.0, p: 0.6, q: 0.6, scale: 1.0 }.validate().is_err());
        assert!(NoiseSpec::pareto(-1.0, 0.5, 1.0).validate().is_err());
        assert!(NoiseSpec::StudentT { dof: 0.0 }.validate().is_err());
        assert!(PositiveLaw::Uniform { lo: 1.0, hi: 0.5 }.validate().is_err());
        assert!(PositiveLaw::Constant { value: 0.0 }.validate().is_ok());
    }

    #[test]
    fn closed_form_moments() {
        // E Z² = 1, E |Z| = sqrt(2/π)
        let n = NoiseSpec::StandardNormal;
        assert!((n.abs_moment(2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((n.abs_moment(1.0).unwrap() - (2.0 / PI).sqrt()).abs() < 1e-14);
        assert!((n.abs_moment(4.0).unwrap() - 3.0).abs() < 1e-13);
        // t with 5 dof: variance 5/3
        let t = NoiseSpec::StudentT { dof: 5.0 };
        assert!((t.abs_moment(2.0).unwrap() - 5.0 / 3.0).abs() < 1e-12);
        assert!(t.abs_moment(5.0).is_none());
        let ln = PositiveLaw::LogNormal { mu: -0.5, sigma2: 1.0 };
        assert!((ln.moment(1.0).unwrap() - 1.0).abs() < 1e-15);
        let arch = PositiveLaw::AffineSquare { scale: 1.0, shift: 0.0, noise: NoiseSpec::StandardNormal };
        assert!((arch.moment(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((arch.mean().unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn monte_carlo_moment_agrees_with_closed_form() {
        let law = PositiveLaw::Uniform { lo: 0.2, hi: 1.4 };
        let mut rng = rng_from_seed(9);
        let n = 200_000;
        let mc = (0..n).map(|_| law.sample(&mut rng).powf(1.7)).sum::<f64>() / n as f64;
        assert!((mc - law.moment(1.7).unwrap()).abs() < 5e-3);
    }
}

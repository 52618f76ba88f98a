//! The α-stable limit law parametrized by its tail index and Lévy-tail
//! constants `(α, c₊, c₋)`.
//!
//! The characteristic function is `ψ(x) = exp(−|x|^α χ_α(x; c₊, c₋))` with
//!
//! ```text
//! α ≠ 1:  χ = Γ(2−α)/(1−α) · [(c₊+c₋) cos(πα/2) − i sign(x) (c₊−c₋) sin(πα/2)]
//! α = 1:  χ = π/2 (c₊+c₋) + i sign(x) (c₊−c₋) log|x|
//! ```
//!
//! and the Lévy measure has tails `ν(x,∞) = c₊ x^{−α}`, `ν(−∞,−x] = c₋ x^{−α}`.
//! Sampling goes through the conventional 1-parametrization `(α, σ, β, μ)`
//! and the Chambers–Mallows–Stuck transformation.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::seeding::{fill_counter_stream, open01};

/// 32-bit words consumed per stable draw: one uniform angle and one exponential.
const WORDS_PER_DRAW: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableLimitParams {
    alpha: f64,
    c_plus: f64,
    c_minus: f64,
}

impl StableLimitParams {
    pub fn new(alpha: f64, c_plus: f64, c_minus: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(c_plus >= 0.0 && c_plus.is_finite()) || !(c_minus >= 0.0 && c_minus.is_finite()) {
            return Err(Error::Domain(format!(
                "Lévy constants must be finite and non-negative, got c+={c_plus}, c-={c_minus}"
            )));
        }
        Ok(Self {
            alpha,
            c_plus,
            c_minus,
        })
    }

    /// Symmetric law with `c₊ = c₋ = c`.
    pub fn symmetric(alpha: f64, c: f64) -> Result<Self> {
        Self::new(alpha, c, c)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c_plus(&self) -> f64 {
        self.c_plus
    }

    pub fn c_minus(&self) -> f64 {
        self.c_minus
    }

    /// `c₊ + c₋ = 0`: the limit is the point mass at zero.
    pub fn is_degenerate(&self) -> bool {
        self.c_plus + self.c_minus == 0.0
    }

    /// Law of `λ·Y` for `Y` with these parameters and `λ > 0` (α ≠ 1, or
    /// the symmetric α = 1 case): Lévy constants scale by `λ^α`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("scale factor must be positive, got {lambda}")));
        }
        let f = lambda.powf(self.alpha);
        Self::new(self.alpha, self.c_plus * f, self.c_minus * f)
    }

    pub fn cf(&self, x: f64) -> Complex64 {
        stable_cf(self, x)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in (0,2), got {alpha}")))
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The exponent function `χ_α(x; c₊, c₋)`. Undefined at `(α = 1, x = 0)`
/// because of the `log|x|` term.
pub fn chi(alpha: f64, x: f64, c_plus: f64, c_minus: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    if alpha == 1.0 {
        if x == 0.0 {
            return Err(Error::Domain("chi is undefined at alpha = 1, x = 0".into()));
        }
        Ok(Complex64::new(
            FRAC_PI_2 * (c_plus + c_minus),
            sign(x) * (c_plus - c_minus) * x.abs().ln(),
        ))
    } else {
        let k = gamma(2.0 - alpha) / (1.0 - alpha);
        let (s, c) = (PI * alpha / 2.0).sin_cos();
        Ok(Complex64::new(
            k * (c_plus + c_minus) * c,
            -k * sign(x) * (c_plus - c_minus) * s,
        ))
    }
}

/// `ψ_α(x) = exp(−|x|^α χ_α(x; c₊, c₋))`, with `ψ_α(0) = 1`.
pub fn stable_cf(params: &StableLimitParams, x: f64) -> Complex64 {
    if x == 0.0 || params.is_degenerate() {
        return Complex64::new(1.0, 0.0);
    }
    let chi = chi(params.alpha, x, params.c_plus, params.c_minus)
        .expect("alpha validated at construction and x != 0");
    (-(x.abs().powf(params.alpha)) * chi).exp()
}

/// Lévy-measure tail masses `(ν(x,∞), ν(−∞,−x])`.
pub fn levy_tail(params: &StableLimitParams, x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("Lévy tail needs x > 0, got {x}")));
    }
    let t = x.powf(-params.alpha);
    Ok((params.c_plus * t, params.c_minus * t))
}

/// Stable law in the 1-parametrization: CF
/// `exp(−σ^α|x|^α (1 − iβ sign(x) tan(πα/2)) + iμx)` for α ≠ 1 and
/// `exp(−σ|x| (1 + iβ (2/π) sign(x) log|x|) + iμx)` for α = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardStableParams {
    pub alpha: f64,
    pub sigma: f64,
    pub beta: f64,
    pub mu: f64,
}

impl StandardStableParams {
    pub fn cf(&self, x: f64) -> Complex64 {
        if x == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let a = self.alpha;
        let drift = Complex64::new(0.0, self.mu * x);
        let exponent = if a == 1.0 {
            -self.sigma
                * x.abs()
                * Complex64::new(1.0, self.beta * (2.0 / PI) * sign(x) * x.abs().ln())
        } else {
            -(self.sigma.powf(a))
                * x.abs().powf(a)
                * Complex64::new(1.0, -self.beta * sign(x) * (PI * a / 2.0).tan())
        };
        (exponent + drift).exp()
    }
}

/// Matches `ψ_α` against the 1-parametrization: `β = (c₊−c₋)/(c₊+c₋)`,
/// `σ^α = (c₊+c₋) Γ(2−α) cos(πα/2)/(1−α)` for α ≠ 1 and `σ = π/2 (c₊+c₋)`
/// for α = 1. The degenerate law maps to `σ = 0, β = 0`.
pub fn to_standard_params(params: &StableLimitParams) -> StandardStableParams {
    let a = params.alpha;
    let total = params.c_plus + params.c_minus;
    if total == 0.0 {
        return StandardStableParams {
            alpha: a,
            sigma: 0.0,
            beta: 0.0,
            mu: 0.0,
        };
    }
    let beta = (params.c_plus - params.c_minus) / total;
    let sigma = if a == 1.0 {
        FRAC_PI_2 * total
    } else {
        // for α ∈ (1,2) both Γ(2−α)/(1−α) and cos(πα/2) are negative
        let sigma_pow = total * gamma(2.0 - a) * (PI * a / 2.0).cos() / (1.0 - a);
        sigma_pow.powf(1.0 / a)
    };
    StandardStableParams {
        alpha: a,
        sigma,
        beta,
        mu: 0.0,
    }
}

/// One Chambers–Mallows–Stuck draw from `S_1(α, β, σ = 1)` given an angle
/// `v ∈ (−π/2, π/2)` and a unit exponential `w`.
fn cms_unit(alpha: f64, beta: f64, v: f64, w: f64) -> f64 {
    if alpha == 1.0 {
        let b = FRAC_PI_2 + beta * v;
        (b * v.tan() - beta * (FRAC_PI_2 * w * v.cos() / b).ln()) / FRAC_PI_2
    } else {
        let zeta = -beta * (PI * alpha / 2.0).tan();
        let xi = (-zeta).atan() / alpha;
        let scale = (1.0 + zeta * zeta).powf(0.5 / alpha);
        let av = alpha * (v + xi);
        scale * av.sin() / v.cos().powf(1.0 / alpha)
            * ((v - av).cos() / w).powf((1.0 - alpha) / alpha)
    }
}

/// A single draw using exactly two `u64` from `rng`.
#[inline]
pub fn draw_standard<R: rand::Rng + ?Sized>(p: &StandardStableParams, rng: &mut R) -> f64 {
    let v = PI * (open01(rng) - 0.5);
    let w = -open01(rng).ln();
    if p.sigma == 0.0 {
        return p.mu;
    }
    let x = cms_unit(p.alpha, p.beta, v, w);
    if p.alpha == 1.0 {
        p.sigma * x + (2.0 / PI) * p.beta * p.sigma * p.sigma.ln() + p.mu
    } else {
        p.sigma * x + p.mu
    }
}

/// `n` draws from the limit law. Draw `i` depends only on `(seed, i)`.
pub fn sample_stable(params: &StableLimitParams, n: usize, seed: u64) -> Vec<f64> {
    sample_stable_range(params, seed, 0, n)
}

/// Draws `offset..offset + n` of the stream identified by `seed`.
pub fn sample_stable_range(params: &StableLimitParams, seed: u64, offset: u64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if params.is_degenerate() {
        return out;
    }
    let std = to_standard_params(params);
    fill_counter_stream(seed, offset, WORDS_PER_DRAW, &mut out, |rng| draw_standard(&std, rng));
    out
}

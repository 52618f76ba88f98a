//! Seeded generators for the stationary heavy-tailed sequences.
//!
//! Every generator is a pure function of `(spec, n, seed)`. Recursive models
//! (SRE, GARCH, stochastic volatility) start from a heuristic point and
//! discard `burn_in` observations; the others are exactly stationary from
//! the first draw.

mod noise;

use std::io::{self, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use noise::{NoiseSpec, PositiveLaw};

use crate::error::{Error, Result};
use crate::seeding::{derive_seed, fill_counter_stream, rng_from_seed, MeanAccumulator};
use crate::stable::{draw_standard, to_standard_params, StableLimitParams, StandardStableParams};

/// Default number of discarded observations for the recursive models.
pub const DEFAULT_BURN_IN: usize = 10_000;

/// Monte Carlo draws used by the stationarity certificates.
pub const CERTIFICATE_DRAWS: usize = 100_000;

const CERTIFICATE_SEED: u64 = 0x5eed_ce27;
const VOLATILITY_STREAM: u64 = 0x766f_6c;

/// Which series a GARCH(1,1) model emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GarchSeries {
    /// `X_t = σ_t Z_t`, tail index `2α`.
    Returns,
    /// `X_t²`, tail index `α`.
    #[default]
    Squared,
    /// `σ_t²`, tail index `α`.
    Volatility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    IidRv {
        noise: NoiseSpec,
    },
    /// `X_t = Y_t − Y_{t−1}` for iid `Y`.
    Differenced {
        noise: NoiseSpec,
    },
    /// Finite moving average `X_t = Σ_j coeffs[j] Y_{t−j}`.
    MDependent {
        noise: NoiseSpec,
        coeffs: Vec<f64>,
    },
    /// `X_t = A_t X_{t−1} + B_t` with independent `A_t`, `B_t`.
    Sre {
        a: PositiveLaw,
        b: PositiveLaw,
    },
    /// `σ_t² = α₀ + (α₁ Z_{t−1}² + β₁) σ_{t−1}²`, `X_t = σ_t Z_t`.
    Garch11 {
        alpha0: f64,
        alpha1: f64,
        beta1: f64,
        noise: NoiseSpec,
        #[serde(default)]
        series: GarchSeries,
    },
    /// `X_t = σ_t Z_t` with Gaussian ARMA `log σ_t` driven by N(0,1) shocks.
    StochVol {
        #[serde(default)]
        ar: Vec<f64>,
        #[serde(default)]
        ma: Vec<f64>,
        noise: NoiseSpec,
    },
    /// Finite moving average of iid symmetric α-stable innovations with
    /// Lévy constants `c₊ = c₋ = 1/2`.
    SasMa {
        coeffs: Vec<f64>,
        alpha: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub kind: ModelKind,
    /// Discarded initial observations; defaults to [`DEFAULT_BURN_IN`] for
    /// recursive models and 0 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
}

impl From<ModelKind> for ModelSpec {
    fn from(kind: ModelKind) -> Self {
        ModelSpec { kind, burn_in: None }
    }
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        kind.into()
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = Some(burn_in);
        self
    }

    pub fn is_recursive(&self) -> bool {
        matches!(
            self.kind,
            ModelKind::Sre { .. } | ModelKind::Garch11 { .. } | ModelKind::StochVol { .. }
        )
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
            .unwrap_or(if self.is_recursive() { DEFAULT_BURN_IN } else { 0 })
    }

    /// Short machine name of the model family.
    pub fn label(&self) -> &'static str {
        match self.kind {
            ModelKind::IidRv { .. } => "iid_rv",
            ModelKind::Differenced { .. } => "differenced",
            ModelKind::MDependent { .. } => "m_dependent",
            ModelKind::Sre { .. } => "sre",
            ModelKind::Garch11 { .. } => "garch11",
            ModelKind::StochVol { .. } => "stoch_vol",
            ModelKind::SasMa { .. } => "sas_ma",
        }
    }

    /// Checks every parameter constraint, including the Monte Carlo
    /// stationarity certificates. No simulation of paths happens here.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            ModelKind::IidRv { noise } | ModelKind::Differenced { noise } => heavy_noise(noise),
            ModelKind::MDependent { noise, coeffs } => {
                heavy_noise(noise)?;
                coefficient_vector("moving-average coeffs", coeffs)
            }
            ModelKind::Sre { a, b } => {
                a.validate()?;
                b.validate()?;
                certify_log_moment(a, "E log A")?;
                Ok(())
            }
            ModelKind::Garch11 {
                alpha0,
                alpha1,
                beta1,
                noise,
                ..
            } => {
                if !(*alpha0 > 0.0 && alpha0.is_finite()) {
                    return Err(Error::InvalidModel(format!("alpha0 must be > 0, got {alpha0}")));
                }
                if !(*alpha1 >= 0.0 && alpha1.is_finite()) {
                    return Err(Error::InvalidModel(format!("alpha1 must be >= 0, got {alpha1}")));
                }
                if !(*beta1 >= 0.0 && *beta1 < 1.0) {
                    return Err(Error::InvalidModel(format!(
                        "beta1 must lie in [0,1), got {beta1}"
                    )));
                }
                noise.validate()?;
                if !noise.is_symmetric() {
                    return Err(Error::InvalidModel("GARCH noise must be symmetric".into()));
                }
                if let Some(m2) = noise.abs_moment(2.0) {
                    if (m2 - 1.0).abs() > 1e-9 {
                        return Err(Error::InvalidModel(format!(
                            "GARCH noise must have unit variance, got E Z^2 = {m2}"
                        )));
                    }
                }
                certify_log_moment(&garch_multiplier(*alpha1, *beta1, noise), "E log(alpha1 Z^2 + beta1)")?;
                Ok(())
            }
            ModelKind::StochVol { ar, ma, noise } => {
                heavy_noise(noise)?;
                if ar.iter().chain(ma).any(|c| !c.is_finite()) {
                    return Err(Error::InvalidModel("ARMA coefficients must be finite".into()));
                }
                if !schur_stable(ar.iter().map(|c| -c)) {
                    return Err(Error::InvalidModel(format!(
                        "AR polynomial {ar:?} is not causal (a root lies on or inside the unit circle)"
                    )));
                }
                if !schur_stable(ma.iter().copied()) {
                    return Err(Error::InvalidModel(format!(
                        "MA polynomial {ma:?} is not invertible (a root lies on or inside the unit circle)"
                    )));
                }
                Ok(())
            }
            ModelKind::SasMa { coeffs, alpha } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return Err(Error::InvalidModel(format!("alpha must lie in (0,2), got {alpha}")));
                }
                coefficient_vector("sas coeffs", coeffs)
            }
        }
    }

    /// A generator positioned after the burn-in. Call [`ModelSpec::validate`] first.
    pub fn sampler(&self, seed: u64) -> PathSampler {
        let mut rng = rng_from_seed(seed);
        let state = match &self.kind {
            ModelKind::IidRv { noise } => State::Iid { noise: noise.clone() },
            ModelKind::Differenced { noise } => {
                let prev = noise.sample(&mut rng);
                State::Differenced {
                    noise: noise.clone(),
                    prev,
                }
            }
            ModelKind::MDependent { noise, coeffs } => {
                let ring = Ring::history(coeffs.len(), || noise.sample(&mut rng));
                State::MovingAverage {
                    noise: noise.clone(),
                    coeffs: coeffs.clone(),
                    ring,
                }
            }
            ModelKind::Sre { a, b } => {
                let ea = a.mean().unwrap_or(f64::INFINITY).min(0.99);
                let x = b.sample(&mut rng) / (1.0 - ea);
                State::Sre {
                    a: a.clone(),
                    b: b.clone(),
                    x,
                }
            }
            ModelKind::Garch11 {
                alpha0,
                alpha1,
                beta1,
                noise,
                series,
            } => {
                let persistence = (alpha1 * noise.abs_moment(2.0).unwrap_or(f64::INFINITY) + beta1).min(0.99);
                State::Garch {
                    alpha0: *alpha0,
                    alpha1: *alpha1,
                    beta1: *beta1,
                    noise: noise.clone(),
                    series: *series,
                    sigma2: alpha0 / (1.0 - persistence),
                }
            }
            ModelKind::StochVol { ar, ma, noise } => State::StochVol {
                ar: ar.clone(),
                ma: ma.clone(),
                noise: noise.clone(),
                eta_rng: rng_from_seed(derive_seed(seed, VOLATILITY_STREAM)),
                log_sigma: Ring::zeros(ar.len()),
                shocks: Ring::zeros(ma.len()),
            },
            ModelKind::SasMa { coeffs, alpha } => {
                let std = sas_innovation_params(*alpha);
                let ring = Ring::history(coeffs.len(), || draw_standard(&std, &mut rng));
                State::SasMa {
                    std,
                    coeffs: coeffs.clone(),
                    ring,
                }
            }
        };
        let mut sampler = PathSampler { rng, state };
        for _ in 0..self.burn_in() {
            sampler.step();
        }
        sampler
    }

    /// A path of length `n`.
    pub fn simulate(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(self.simulate_unchecked(n, seed))
    }

    pub(crate) fn simulate_unchecked(&self, n: usize, seed: u64) -> Vec<f64> {
        if let ModelKind::IidRv { noise } = &self.kind {
            if let Some(words) = noise.words_per_draw() {
                let mut out = vec![0.0; n];
                fill_counter_stream(seed, 0, words, &mut out, |rng| noise.sample(rng));
                return out;
            }
        }
        let mut s = self.sampler(seed);
        (0..n).map(|_| s.step()).collect()
    }

    /// Exact stationary mean when it is available in closed form.
    pub fn exact_mean(&self) -> Option<f64> {
        match &self.kind {
            ModelKind::IidRv { noise } => noise.mean(),
            ModelKind::Differenced { .. } => Some(0.0),
            ModelKind::MDependent { noise, coeffs } => noise.mean().map(|m| m * coeffs.iter().sum::<f64>()),
            ModelKind::Sre { a, b } => {
                let ea = a.mean()?;
                (ea < 1.0).then_some(b.mean()? / (1.0 - ea))
            }
            ModelKind::Garch11 {
                alpha0,
                alpha1,
                beta1,
                noise,
                series,
            } => {
                let m2 = noise.abs_moment(2.0)?;
                let persistence = alpha1 * m2 + beta1;
                match series {
                    GarchSeries::Returns => noise.mean(),
                    GarchSeries::Squared => (persistence < 1.0).then_some(alpha0 * m2 / (1.0 - persistence)),
                    GarchSeries::Volatility => (persistence < 1.0).then_some(alpha0 / (1.0 - persistence)),
                }
            }
            ModelKind::StochVol { ar, ma, noise } => {
                let m = noise.mean()?;
                if m == 0.0 {
                    return Some(0.0);
                }
                // E σ = exp(var(log σ)/2) for Gaussian log-volatility
                Some(m * (arma_variance(ar, ma) / 2.0).exp())
            }
            ModelKind::SasMa { alpha, .. } => (*alpha > 1.0).then_some(0.0),
        }
    }

    /// Stationary mean by Monte Carlo over `draws` values of a single path.
    pub fn monte_carlo_mean(&self, draws: usize, seed: u64) -> (f64, f64) {
        let chunks = 64usize;
        let per = draws.div_ceil(chunks);
        let parts = crate::seeding::par_chunks(chunks, |c| {
            let mut s = self.sampler(derive_seed(seed, c as u64));
            let mut acc = MeanAccumulator::new();
            for _ in 0..per {
                acc.push(s.step());
            }
            acc
        });
        let acc = MeanAccumulator::merged(&parts);
        let se = crate::seeding::batch_means_se(&parts).unwrap_or(acc.std_error());
        (acc.mean(), se)
    }

    /// Writes a path as single-column CSV whose header names the model and seed.
    pub fn write_path_csv<W: Write>(&self, out: &mut W, seed: u64, path: &[f64]) -> io::Result<()> {
        writeln!(out, "{}_seed_{}", self.label(), seed)?;
        for v in path {
            writeln!(out, "{v:e}")?;
        }
        Ok(())
    }
}

fn heavy_noise(noise: &NoiseSpec) -> Result<()> {
    noise.validate()?;
    match noise.tail_index() {
        Some(a) if a > 0.0 && a < 2.0 => Ok(()),
        Some(a) => Err(Error::InvalidModel(format!(
            "noise tail index must lie in (0,2), got {a}"
        ))),
        None => Err(Error::InvalidModel(
            "noise has no tail index (a regularly varying law is required)".into(),
        )),
    }
}

fn coefficient_vector(name: &str, coeffs: &[f64]) -> Result<()> {
    if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) || coeffs.iter().all(|&c| c == 0.0) {
        return Err(Error::InvalidModel(format!(
            "{name} must be a finite, non-empty, not-all-zero list, got {coeffs:?}"
        )));
    }
    Ok(())
}

/// The multiplier `α₁ Z² + β₁` of the squared-volatility recursion.
pub fn garch_multiplier(alpha1: f64, beta1: f64, noise: &NoiseSpec) -> PositiveLaw {
    PositiveLaw::AffineSquare {
        scale: alpha1,
        shift: beta1,
        noise: noise.clone(),
    }
}

/// Innovation law of the sαs moving average.
pub fn sas_innovation_params(alpha: f64) -> StandardStableParams {
    to_standard_params(&sas_innovation_limit(alpha))
}

pub fn sas_innovation_limit(alpha: f64) -> StableLimitParams {
    StableLimitParams::symmetric(alpha, 0.5).expect("alpha validated")
}

/// Certifies `E log A < 0`: closed form when available, otherwise the Monte
/// Carlo estimate plus three standard errors must be negative. A positive
/// mass at zero makes the expectation `−∞`.
pub fn certify_log_moment(law: &PositiveLaw, what: &str) -> Result<(f64, f64)> {
    if let Some(m) = law.log_mean() {
        return if m < 0.0 {
            Ok((m, 0.0))
        } else {
            Err(Error::NotStationary {
                what: what.into(),
                estimate: m,
                se: 0.0,
            })
        };
    }
    let mut rng = rng_from_seed(CERTIFICATE_SEED);
    let mut acc = MeanAccumulator::new();
    for _ in 0..CERTIFICATE_DRAWS {
        let a = law.sample(&mut rng);
        if a == 0.0 {
            return Ok((f64::NEG_INFINITY, 0.0));
        }
        acc.push(a.ln());
    }
    let (m, se) = (acc.mean(), acc.std_error());
    if m + 3.0 * se < 0.0 {
        Ok((m, se))
    } else {
        Err(Error::NotStationary {
            what: what.into(),
            estimate: m,
            se,
        })
    }
}

/// Schur–Cohn step-down test: true iff every root of
/// `z^p + c₁ z^{p−1} + … + c_p` lies strictly inside the unit disc.
fn schur_stable(coeffs: impl Iterator<Item = f64>) -> bool {
    let mut c: Vec<f64> = std::iter::once(1.0).chain(coeffs).collect();
    while c.len() > 1 {
        let p = c.len() - 1;
        let k = c[p];
        if k.abs() >= 1.0 {
            return false;
        }
        let denom = 1.0 - k * k;
        c = (0..p).map(|i| (c[i] - k * c[p - i]) / denom).collect();
    }
    true
}

/// Variance of a causal ARMA process with unit-variance shocks, from its
/// ψ-weights (truncated once they are negligible).
pub fn arma_variance(ar: &[f64], ma: &[f64]) -> f64 {
    let mut psi: Vec<f64> = Vec::with_capacity(1024);
    let mut total = 0.0;
    for j in 0..100_000 {
        let mut v = if j == 0 { 1.0 } else { ma.get(j - 1).copied().unwrap_or(0.0) };
        for (i, phi) in ar.iter().enumerate() {
            if j > i {
                v += phi * psi[j - 1 - i];
            }
        }
        psi.push(v);
        total += v * v;
        if j > ar.len() + ma.len() && v.abs() < 1e-12 && psi[j - 1].abs() < 1e-12 {
            break;
        }
    }
    total
}

/// Fixed-capacity history buffer, newest value first at index 0.
#[derive(Debug, Clone)]
struct Ring {
    buf: Vec<f64>,
    head: usize,
}

impl Ring {
    fn zeros(len: usize) -> Self {
        Ring {
            buf: vec![0.0; len],
            head: len.saturating_sub(1),
        }
    }

    /// Capacity `len` with the `len − 1` oldest slots drawn from `f`, so the
    /// next [`Ring::push`] completes the first window.
    fn history(len: usize, mut f: impl FnMut() -> f64) -> Self {
        let mut buf = vec![0.0; len];
        for v in buf.iter_mut().take(len.saturating_sub(1)) {
            *v = f();
        }
        Ring {
            buf,
            head: len.saturating_sub(2),
        }
    }

    fn push(&mut self, v: f64) {
        if self.buf.is_empty() {
            return;
        }
        self.head = (self.head + 1) % self.buf.len();
        self.buf[self.head] = v;
    }

    /// Value `lag` steps back (0 = newest).
    #[inline]
    fn get(&self, lag: usize) -> f64 {
        let n = self.buf.len();
        self.buf[(self.head + n - lag) % n]
    }
}

#[derive(Debug, Clone)]
enum State {
    Iid {
        noise: NoiseSpec,
    },
    Differenced {
        noise: NoiseSpec,
        prev: f64,
    },
    MovingAverage {
        noise: NoiseSpec,
        coeffs: Vec<f64>,
        ring: Ring,
    },
    Sre {
        a: PositiveLaw,
        b: PositiveLaw,
        x: f64,
    },
    Garch {
        alpha0: f64,
        alpha1: f64,
        beta1: f64,
        noise: NoiseSpec,
        series: GarchSeries,
        /// σ² of the observation about to be emitted
        sigma2: f64,
    },
    StochVol {
        ar: Vec<f64>,
        ma: Vec<f64>,
        noise: NoiseSpec,
        eta_rng: ChaCha8Rng,
        log_sigma: Ring,
        shocks: Ring,
    },
    SasMa {
        std: StandardStableParams,
        coeffs: Vec<f64>,
        ring: Ring,
    },
}

/// Stateful generator of one path; see [`ModelSpec::sampler`].
#[derive(Debug, Clone)]
pub struct PathSampler {
    rng: ChaCha8Rng,
    state: State,
}

impl PathSampler {
    /// Next observation of the configured series.
    #[inline]
    pub fn step(&mut self) -> f64 {
        let rng = &mut self.rng;
        match &mut self.state {
            State::Iid { noise } => noise.sample(rng),
            State::Differenced { noise, prev } => {
                let y = noise.sample(rng);
                let x = y - *prev;
                *prev = y;
                x
            }
            State::MovingAverage { noise, coeffs, ring } => {
                ring.push(noise.sample(rng));
                coeffs.iter().enumerate().map(|(j, c)| c * ring.get(j)).sum()
            }
            State::Sre { a, b, x } => {
                let av = a.sample(rng);
                let bv = b.sample(rng);
                *x = av * *x + bv;
                *x
            }
            State::Garch { series, .. } => {
                let series = *series;
                let (x, sigma2) = self.garch_step();
                match series {
                    GarchSeries::Returns => x,
                    GarchSeries::Squared => x * x,
                    GarchSeries::Volatility => sigma2,
                }
            }
            State::StochVol {
                ar,
                ma,
                noise,
                eta_rng,
                log_sigma,
                shocks,
            } => {
                let eta: f64 = StandardNormal.sample(eta_rng);
                let mut ls = eta;
                for (j, theta) in ma.iter().enumerate() {
                    ls += theta * shocks.get(j);
                }
                for (i, phi) in ar.iter().enumerate() {
                    ls += phi * log_sigma.get(i);
                }
                shocks.push(eta);
                log_sigma.push(ls);
                ls.exp() * noise.sample(rng)
            }
            State::SasMa { std, coeffs, ring } => {
                ring.push(draw_standard(std, rng));
                coeffs.iter().enumerate().map(|(j, c)| c * ring.get(j)).sum()
            }
        }
    }

    /// One GARCH step returning `(X_t, σ_t²)`. Panics for other models.
    pub fn garch_step(&mut self) -> (f64, f64) {
        let State::Garch {
            alpha0,
            alpha1,
            beta1,
            noise,
            sigma2,
            ..
        } = &mut self.state
        else {
            panic!("garch_step called on a non-GARCH sampler");
        };
        let z = noise.sample(&mut self.rng);
        let s2 = *sigma2;
        let x = s2.sqrt() * z;
        *sigma2 = *alpha0 + (*alpha1 * z * z + *beta1) * s2;
        (x, s2)
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.step();
        }
    }

    pub fn rng(&mut self) -> &mut impl Rng {
        &mut self.rng
    }
}

/// iid draws from a heavy-tailed noise law.
pub fn gen_iid_rv(noise: &NoiseSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    ModelSpec::new(ModelKind::IidRv { noise: noise.clone() }).simulate(n, seed)
}

/// `Y_t − Y_{t−1}` for one iid stream `Y`.
pub fn gen_differenced(noise: &NoiseSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    ModelSpec::new(ModelKind::Differenced { noise: noise.clone() }).simulate(n, seed)
}

/// `Σ_j coeffs[j] Y_{t−j}`: an `(coeffs.len() − 1)`-dependent sequence.
pub fn gen_m_dependent(noise: &NoiseSpec, ma_coeffs: &[f64], n: usize, seed: u64) -> Result<Vec<f64>> {
    ModelSpec::new(ModelKind::MDependent {
        noise: noise.clone(),
        coeffs: ma_coeffs.to_vec(),
    })
    .simulate(n, seed)
}

pub fn gen_sre(dist_a: &PositiveLaw, dist_b: &PositiveLaw, n: usize, burn_in: usize, seed: u64) -> Result<Vec<f64>> {
    ModelSpec::new(ModelKind::Sre {
        a: dist_a.clone(),
        b: dist_b.clone(),
    })
    .with_burn_in(burn_in)
    .simulate(n, seed)
}

/// Returns `(X_t, σ_t²)`.
pub fn gen_garch11(
    alpha0: f64,
    alpha1: f64,
    beta1: f64,
    noise: &NoiseSpec,
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let spec = ModelSpec::new(ModelKind::Garch11 {
        alpha0,
        alpha1,
        beta1,
        noise: noise.clone(),
        series: GarchSeries::Returns,
    })
    .with_burn_in(burn_in);
    spec.validate()?;
    let mut s = spec.sampler(seed);
    Ok((0..n).map(|_| s.garch_step()).unzip())
}

pub fn gen_sv(ar: &[f64], ma: &[f64], noise: &NoiseSpec, n: usize, burn_in: usize, seed: u64) -> Result<Vec<f64>> {
    ModelSpec::new(ModelKind::StochVol {
        ar: ar.to_vec(),
        ma: ma.to_vec(),
        noise: noise.clone(),
    })
    .with_burn_in(burn_in)
    .simulate(n, seed)
}

pub fn gen_sas_ma(coeffs: &[f64], alpha: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    ModelSpec::new(ModelKind::SasMa {
        coeffs: coeffs.to_vec(),
        alpha,
    })
    .simulate(n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stable::sample_stable;

    fn pareto(alpha: f64, p: f64) -> NoiseSpec {
        NoiseSpec::pareto(alpha, p, 1.0)
    }

    #[test]
    fn iid_support_and_empty_path() {
        let x = gen_iid_rv(&pareto(1.0, 1.0), 10_000, 3).unwrap();
        assert!(x.iter().all(|&v| v >= 1.0));
        assert!(gen_iid_rv(&pareto(1.0, 1.0), 0, 3).unwrap().is_empty());
        assert!(gen_iid_rv(&NoiseSpec::StandardNormal, 10, 3).is_err());
    }

    #[test]
    fn iid_tail_count_matches_normalization() {
        // a_n = n² for the α = 1/2 law; P(|X| > n²) = 1/n exactly
        let n_norm = 100.0f64;
        let draws = 1_000_000;
        let x = gen_iid_rv(&pareto(0.5, 0.5), draws, 17).unwrap();
        let count = x.iter().filter(|v| v.abs() > n_norm * n_norm).count() as f64;
        let level = n_norm * count / draws as f64;
        // binomial se of n·P̂ is sqrt(n/draws) = 0.01
        assert!((level - 1.0).abs() < 0.04, "{level}");
    }

    #[test]
    fn iid_sequential_matches_counter_fill() {
        let spec = ModelSpec::new(ModelKind::IidRv { noise: pareto(1.3, 0.4) });
        let filled = spec.simulate(30_000, 8).unwrap();
        let mut s = spec.sampler(8);
        let seq: Vec<f64> = (0..30_000).map(|_| s.step()).collect();
        assert_eq!(filled, seq);
    }

    #[test]
    fn m_dependent_single_coefficient_is_iid() {
        let a = gen_m_dependent(&pareto(0.8, 0.7), &[1.0], 1000, 5).unwrap();
        let b = gen_iid_rv(&pareto(0.8, 0.7), 1000, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn m_dependent_matches_direct_convolution() {
        let noise = pareto(1.2, 0.6);
        let coeffs = [1.0, -0.5, 2.0];
        let x = gen_m_dependent(&noise, &coeffs, 50, 21).unwrap();
        let y = gen_iid_rv(&noise, 52, 21).unwrap();
        for t in 0..50 {
            let direct = coeffs[0] * y[t + 2] + coeffs[1] * y[t + 1] + coeffs[2] * y[t];
            assert!((x[t] - direct).abs() < 1e-9 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn differenced_partial_sums_telescope() {
        let noise = pareto(0.9, 0.5);
        let x = gen_differenced(&noise, 100, 2).unwrap();
        let y = gen_iid_rv(&noise, 101, 2).unwrap();
        let s: f64 = x[..40].iter().sum();
        assert!((s - (y[40] - y[0])).abs() < 1e-9 * y[40].abs().max(y[0].abs()).max(1.0));
    }

    #[test]
    fn sre_with_zero_multiplier_is_iid_b() {
        let b = PositiveLaw::Uniform { lo: 1.0, hi: 3.0 };
        let x = gen_sre(&PositiveLaw::Constant { value: 0.0 }, &b, 1000, 0, 4).unwrap();
        assert!(x.iter().all(|&v| (1.0..3.0).contains(&v)));
    }

    #[test]
    fn sre_states_are_positive() {
        let a = PositiveLaw::LogNormal { mu: -0.5, sigma2: 1.0 };
        let x = gen_sre(&a, &PositiveLaw::Constant { value: 1.0 }, 100_000, 1000, 6).unwrap();
        assert!(x.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn sre_rejects_explosive_multiplier() {
        let a = PositiveLaw::LogNormal { mu: 0.1, sigma2: 1.0 };
        let spec = ModelSpec::new(ModelKind::Sre { a, b: PositiveLaw::Constant { value: 1.0 } });
        assert!(matches!(spec.validate(), Err(Error::NotStationary { .. })));
        let a = PositiveLaw::Uniform { lo: 0.5, hi: 2.0 }; // E log A > 0
        let spec = ModelSpec::new(ModelKind::Sre { a, b: PositiveLaw::Constant { value: 1.0 } });
        assert!(matches!(spec.validate(), Err(Error::NotStationary { .. })));
    }

    #[test]
    fn garch_degenerate_and_lower_bound() {
        let noise = NoiseSpec::StandardNormal;
        let (x, s2) = gen_garch11(2.0, 0.0, 0.0, &noise, 1000, 10, 3).unwrap();
        assert!(s2.iter().all(|&v| v == 2.0));
        // X_t = √α₀ Z_t for an iid normal stream
        let mut rng = rng_from_seed(3);
        for _ in 0..10 {
            let _: f64 = StandardNormal.sample(&mut rng);
        }
        for &xv in &x[..20] {
            let z: f64 = StandardNormal.sample(&mut rng);
            assert!((xv - 2f64.sqrt() * z).abs() < 1e-12);
        }

        let (_, s2) = gen_garch11(0.5, 0.3, 0.6, &noise, 100_000, 1000, 9).unwrap();
        assert!(s2.iter().all(|&v| v >= 0.5));
    }

    #[test]
    fn garch_validation_messages() {
        let spec = ModelSpec::new(ModelKind::Garch11 {
            alpha0: 1.0,
            alpha1: 0.1,
            beta1: 1.2,
            noise: NoiseSpec::StandardNormal,
            series: GarchSeries::Squared,
        });
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("beta1 must lie in [0,1)"), "{err}");

        let explosive = ModelSpec::new(ModelKind::Garch11 {
            alpha0: 1.0,
            alpha1: 3.0,
            beta1: 0.5,
            noise: NoiseSpec::StandardNormal,
            series: GarchSeries::Squared,
        });
        assert!(matches!(explosive.validate(), Err(Error::NotStationary { .. })));

        let t = ModelSpec::new(ModelKind::Garch11 {
            alpha0: 1.0,
            alpha1: 0.1,
            beta1: 0.5,
            noise: NoiseSpec::StudentT { dof: 5.0 },
            series: GarchSeries::Squared,
        });
        assert!(t.validate().is_err());
    }

    #[test]
    fn stochvol_causality() {
        let noise = pareto(1.5, 0.7);
        assert!(gen_sv(&[0.9], &[], &noise, 10, 10, 1).is_ok());
        assert!(gen_sv(&[1.1], &[], &noise, 10, 10, 1).is_err());
        assert!(gen_sv(&[0.5, 0.6], &[], &noise, 10, 10, 1).is_err());
        assert!(gen_sv(&[1.2, -0.5], &[], &noise, 10, 10, 1).is_ok());
        assert!(gen_sv(&[], &[1.5], &noise, 10, 10, 1).is_err());
    }

    #[test]
    fn arma_variance_closed_forms() {
        assert!((arma_variance(&[0.9], &[]) - 1.0 / (1.0 - 0.81)).abs() < 1e-9);
        assert!((arma_variance(&[], &[0.5]) - 1.25).abs() < 1e-12);
        assert_eq!(arma_variance(&[], &[]), 1.0);
    }

    #[test]
    fn sas_ma_uses_the_stable_stream() {
        let x = gen_sas_ma(&[1.0], 1.2, 1000, 77).unwrap();
        let eps = sample_stable(&sas_innovation_limit(1.2), 1001, 77);
        assert_eq!(&x[..], &eps[..1000]);
        let y = gen_sas_ma(&[1.0, -1.0], 1.2, 100, 77).unwrap();
        for t in 0..100 {
            assert!((y[t] - (eps[t + 1] - eps[t])).abs() < 1e-12 * eps[t].abs().max(1.0) * 10.0);
        }
    }

    #[test]
    fn determinism() {
        let spec = ModelSpec::new(ModelKind::Garch11 {
            alpha0: 1.0,
            alpha1: 0.5,
            beta1: 0.3,
            noise: NoiseSpec::StandardNormal,
            series: GarchSeries::Squared,
        });
        assert_eq!(spec.simulate(5000, 1).unwrap(), spec.simulate(5000, 1).unwrap());
        assert_ne!(spec.simulate(50, 1).unwrap(), spec.simulate(50, 2).unwrap());
    }

    #[test]
    fn csv_export_header() {
        let spec = ModelSpec::new(ModelKind::IidRv { noise: pareto(1.0, 1.0) });
        let mut buf = Vec::new();
        spec.write_path_csv(&mut buf, 42, &[1.5, 2.0]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("iid_rv_seed_42"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn exact_means() {
        let spec = ModelSpec::new(ModelKind::Sre {
            a: PositiveLaw::Uniform { lo: 0.0, hi: 1.0 },
            b: PositiveLaw::Constant { value: 1.0 },
        });
        assert_eq!(spec.exact_mean(), Some(2.0));
        let (mc, se) = spec.monte_carlo_mean(400_000, 3);
        assert!((mc - 2.0).abs() < 4.0 * se, "{mc} ± {se}");
        let g = ModelSpec::new(ModelKind::Garch11 {
            alpha0: 1.0,
            alpha1: 0.5,
            beta1: 0.3,
            noise: NoiseSpec::StandardNormal,
            series: GarchSeries::Squared,
        });
        assert!((g.exact_mean().unwrap() - 5.0).abs() < 1e-12);
    }
}

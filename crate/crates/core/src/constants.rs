//! Theory-side limit parameters: the Kesten index, Goldie's constant, the
//! `T_∞` functionals giving `c₊` for SRE and GARCH models, and the exact
//! `b₊(d)` of sαs moving averages.
//!
//! Constants are labelled by the process they normalize: `c0` is the tail
//! constant of the observed SRE state `X`, `c1` the one of the GARCH
//! volatility `σ²`.

use std::fmt::{self, Display};

use crate::error::{Error, Result};
use crate::models::{garch_multiplier, GarchSeries, ModelKind, ModelSpec, NoiseSpec, PositiveLaw};
use crate::seeding::{derive_seed, par_chunks, ratio_se, rng_from_seed, CompensatedSum, MeanAccumulator};
use crate::stable::StableLimitParams;

const MC_CHUNKS: usize = 64;

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TextRecord {
    title: String,
    fields: Vec<(String, String)>,
}

impl TextRecord {
    pub fn new(title: impl Into<String>) -> Self {
        TextRecord {
            title: title.into(),
            fields: Vec::new(),
        }
    }

    pub fn field(mut self, key: &str, value: impl Display) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.fields.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

impl Display for TextRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}]", self.title)?;
        for (k, v) in &self.fields {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// `(B + A x)^α − (A x)^α` without cancellation for large `A x`.
#[inline]
fn pinched(b: f64, ax: f64, alpha: f64) -> f64 {
    if ax > 0.0 {
        ax.powf(alpha) * (alpha * (b / ax).ln_1p()).exp_m1()
    } else {
        b.powf(alpha)
    }
}

/// `|z + y|^γ − |y|^γ`, computed relative to `|y|^γ`.
#[inline]
fn signed_pinched(z: f64, y: f64, gamma: f64) -> f64 {
    if y == 0.0 {
        return z.abs().powf(gamma);
    }
    let u = z / y;
    let log_ratio = if u > -1.0 { u.ln_1p() } else { (-1.0 - u).ln() };
    y.abs().powf(gamma) * (gamma * log_ratio).exp_m1()
}

/// Mean of `f` over `draws` values, drawn in fixed chunks; returns `(mean, se)`.
fn mc_mean<F>(draws: usize, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    let per = draws.div_ceil(MC_CHUNKS);
    let parts = par_chunks(MC_CHUNKS, |c| {
        let mut rng = rng_from_seed(derive_seed(seed, c as u64));
        let mut acc = MeanAccumulator::new();
        for _ in 0..per {
            acc.push(f(&mut rng));
        }
        acc
    });
    let acc = MeanAccumulator::merged(&parts);
    (acc.mean(), acc.std_error())
}

/// `E A^κ`: closed form when available, otherwise quadrature for affine
/// squares of a normal variable, otherwise Monte Carlo.
pub fn law_moment(law: &PositiveLaw, kappa: f64, draws: usize, seed: u64) -> f64 {
    if let Some(m) = law.moment(kappa) {
        return m;
    }
    if let PositiveLaw::AffineSquare {
        scale,
        shift,
        noise: NoiseSpec::StandardNormal,
    } = law
    {
        return normal_expectation(|z| (scale * z * z + shift).powf(kappa));
    }
    mc_mean(draws, seed, |rng| law.sample(rng).powf(kappa)).0
}

/// `E f(Z)` for standard normal `Z` and even `f`, by composite Simpson on `[0, 14]`.
fn normal_expectation(f: impl Fn(f64) -> f64) -> f64 {
    let m = 20_000usize;
    let h = 14.0 / m as f64;
    let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = CompensatedSum::new();
    for i in 0..=m {
        let z = i as f64 * h;
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc.add(w * f(z) * phi(z));
    }
    2.0 * acc.value() * h / 3.0
}

/// `E|Z|^r`: closed form or Monte Carlo.
pub fn noise_abs_moment(noise: &NoiseSpec, r: f64, draws: usize, seed: u64) -> Result<f64> {
    if let Some(m) = noise.abs_moment(r) {
        return Ok(m);
    }
    if noise.tail_index().is_some_and(|a| r >= a) {
        return Err(Error::Hypothesis(format!("E|Z|^{r} is infinite")));
    }
    Ok(mc_mean(draws, seed, |rng| noise.sample(rng).abs().powf(r)).0)
}

/// Values of `g(κ) = E A^κ` at `α̂/2, α̂, 3α̂/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convexity {
    pub kappas: [f64; 3],
    pub values: [f64; 3],
    /// Second difference is non-negative up to three standard errors.
    pub convex: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KestenIndex {
    pub alpha: f64,
    /// `|ĝ(α̂) − 1|`.
    pub residual: f64,
    /// Monte Carlo standard error of `ĝ(α̂)`; zero for closed forms.
    pub g_se: f64,
    pub closed_form: bool,
    pub draws: usize,
    pub convexity: Convexity,
}

impl KestenIndex {
    pub fn record(&self) -> TextRecord {
        TextRecord::new("kesten_index")
            .field("alpha", format!("{:.12}", self.alpha))
            .field("residual", format!("{:.3e}", self.residual))
            .field("g_se", format!("{:.3e}", self.g_se))
            .field("method", if self.closed_form { "closed_form" } else { "monte_carlo" })
            .field("draws", self.draws)
            .field("convex", self.convexity.convex)
    }
}

/// Log-draws of `A` with the `g(κ)` evaluations used by the bisection.
struct LogSample {
    chunks: Vec<Vec<f64>>,
    len: usize,
}

impl LogSample {
    fn draw(law: &PositiveLaw, draws: usize, seed: u64) -> Result<Self> {
        let per = draws.div_ceil(MC_CHUNKS);
        let chunks = par_chunks(MC_CHUNKS, |c| {
            let mut rng = rng_from_seed(derive_seed(seed, c as u64));
            (0..per).map(|_| law.sample(&mut rng)).collect::<Vec<f64>>()
        });
        if chunks.iter().flatten().any(|&a| !(a > 0.0)) {
            return Err(Error::Domain("the multiplier A produced non-positive draws".into()));
        }
        let chunks: Vec<Vec<f64>> = chunks.into_iter().map(|v| v.into_iter().map(f64::ln).collect()).collect();
        Ok(LogSample { chunks, len: per * MC_CHUNKS })
    }

    fn mean_log(&self) -> f64 {
        let mut s = CompensatedSum::new();
        self.chunks.iter().flatten().for_each(|&l| s.add(l));
        s.value() / self.len as f64
    }

    /// `(ĝ(κ), se)`.
    fn g(&self, kappa: f64) -> (f64, f64) {
        let parts = par_chunks(self.chunks.len(), |c| {
            let mut acc = MeanAccumulator::new();
            for &l in &self.chunks[c] {
                acc.push((kappa * l).exp());
            }
            acc
        });
        let acc = MeanAccumulator::merged(&parts);
        (acc.mean(), acc.std_error())
    }
}

fn convexity(g: impl Fn(f64) -> (f64, f64), alpha: f64) -> Convexity {
    let kappas = [alpha / 2.0, alpha, 1.5 * alpha];
    let ev: Vec<(f64, f64)> = kappas.iter().map(|&k| g(k)).collect();
    let second = ev[0].0 + ev[2].0 - 2.0 * ev[1].0;
    let se = (ev[0].1.powi(2) + ev[2].1.powi(2) + 4.0 * ev[1].1.powi(2)).sqrt();
    Convexity {
        kappas,
        values: [ev[0].0, ev[1].0, ev[2].0],
        convex: second >= -3.0 * se,
    }
}

/// Bisection for the positive root of `g(κ) = 1` given `g(κ) < 1` just
/// right of zero. `tolerance` bounds the final bracket width.
fn solve_unit_moment(g: impl Fn(f64) -> (f64, f64), tolerance: f64, what: &str) -> Result<f64> {
    let mut hi = 0.25;
    while g(hi).0 <= 1.0 {
        hi *= 2.0;
        if hi > 512.0 {
            let c = convexity(&g, 1.0);
            return Err(Error::NoBracket(format!(
                "{what}: E A^k stays below 1 up to k = 512 (g at {:?} = {:?})",
                c.kappas, c.values
            )));
        }
    }
    let mut lo = hi / 2.0;
    while g(lo).0 >= 1.0 {
        lo /= 2.0;
        if lo < 1e-12 {
            return Err(Error::NoBracket(format!("{what}: E A^k >= 1 arbitrarily close to 0")));
        }
    }
    for _ in 0..200 {
        if hi - lo <= tolerance.max(4.0 * f64::EPSILON * hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid).0 < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The Kesten index: the positive root of `E A^κ = 1`.
///
/// Lognormal and constant multipliers use their closed forms. Otherwise
/// `mc_draws` values of `A` are drawn once and reused for every `κ`, so the
/// bisection runs on a deterministic smooth function.
pub fn kesten_index(law: &PositiveLaw, mc_draws: usize, tolerance: f64, seed: u64) -> Result<KestenIndex> {
    law.validate()?;
    match *law {
        PositiveLaw::LogNormal { mu, sigma2 } => {
            if mu >= 0.0 {
                return Err(Error::NoBracket(format!(
                    "lognormal multiplier with mu = {mu} >= 0 has E A^k > 1 for all k > 0"
                )));
            }
            let alpha = -2.0 * mu / sigma2;
            let g = |k: f64| (law.moment(k).unwrap(), 0.0);
            Ok(KestenIndex {
                alpha,
                residual: (g(alpha).0 - 1.0).abs(),
                g_se: 0.0,
                closed_form: true,
                draws: 0,
                convexity: convexity(g, alpha),
            })
        }
        PositiveLaw::Constant { value } => Err(Error::NoBracket(format!(
            "constant multiplier {value}: E A^k = {value}^k never crosses 1"
        ))),
        _ => kesten_index_mc(law, mc_draws, tolerance, seed),
    }
}

/// The Kesten index by simulation only, for any multiplier law, with common
/// random numbers across `κ`.
pub fn kesten_index_mc(law: &PositiveLaw, mc_draws: usize, tolerance: f64, seed: u64) -> Result<KestenIndex> {
    law.validate()?;
    let sample = LogSample::draw(law, mc_draws, seed)?;
    let m = sample.mean_log();
    if !(m < 0.0) {
        return Err(Error::NoBracket(format!("sample mean of log A is {m:.4e} >= 0")));
    }
    let g = |k: f64| sample.g(k);
    let alpha = solve_unit_moment(g, tolerance, "kesten_index")?;
    let (ga, se) = g(alpha);
    Ok(KestenIndex {
        alpha,
        residual: (ga - 1.0).abs(),
        g_se: se,
        closed_form: false,
        draws: sample.len,
        convexity: convexity(g, alpha),
    })
}

/// The Kesten index from exact moments (closed form or normal quadrature).
/// Fails when the law has neither.
pub fn kesten_index_exact(law: &PositiveLaw, tolerance: f64) -> Result<KestenIndex> {
    law.validate()?;
    let has_exact = law.moment(1.0).is_some()
        || matches!(law, PositiveLaw::AffineSquare { noise: NoiseSpec::StandardNormal, .. });
    if !has_exact {
        return Err(Error::Domain("no exact moments for this multiplier law".into()));
    }
    if let PositiveLaw::LogNormal { .. } | PositiveLaw::Constant { .. } = law {
        return kesten_index(law, 0, tolerance, 0);
    }
    let g = |k: f64| (law_moment(law, k, 0, 0), 0.0);
    let alpha = solve_unit_moment(g, tolerance, "kesten_index_exact")?;
    Ok(KestenIndex {
        alpha,
        residual: (g(alpha).0 - 1.0).abs(),
        g_se: 0.0,
        closed_form: true,
        draws: 0,
        convexity: convexity(g, alpha),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldieC0 {
    pub c0: f64,
    pub se: f64,
    pub numerator: f64,
    pub numerator_se: f64,
    pub denominator: f64,
    pub denominator_se: f64,
}

/// Goldie's constant `c₀ = E[(B + A X₀)^α − (A X₀)^α] / (α E[A^α log A])`
/// with `P(X > x) ∼ c₀ x^{−α}`.
///
/// `X₀` values come from 64 burned-in SRE chains; each is paired with a fresh
/// independent `(A, B)`. The standard error is the ratio-estimator error
/// over the chains (delta method with chain-level batches).
pub fn goldie_c0(
    a: &PositiveLaw,
    b: &PositiveLaw,
    alpha: f64,
    mc_draws: usize,
    burn_in: usize,
    seed: u64,
) -> Result<GoldieC0> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be > 0, got {alpha}")));
    }
    let spec = ModelSpec::new(ModelKind::Sre { a: a.clone(), b: b.clone() }).with_burn_in(burn_in);
    spec.validate()?;
    let per = mc_draws.div_ceil(MC_CHUNKS);
    let parts = par_chunks(MC_CHUNKS, |c| {
        let mut chain = spec.sampler(derive_seed(seed, 2 * c as u64));
        let mut rng = rng_from_seed(derive_seed(seed, 2 * c as u64 + 1));
        let (mut num, mut den) = (MeanAccumulator::new(), MeanAccumulator::new());
        for _ in 0..per {
            let x = chain.step();
            let av = a.sample(&mut rng);
            let bv = b.sample(&mut rng);
            num.push(pinched(bv, av * x, alpha));
            den.push(if av > 0.0 { av.powf(alpha) * av.ln() } else { 0.0 });
        }
        (num, den)
    });
    let nums: Vec<MeanAccumulator> = parts.iter().map(|p| p.0).collect();
    let dens: Vec<MeanAccumulator> = parts.iter().map(|p| p.1).collect();
    let (num, den) = (MeanAccumulator::merged(&nums), MeanAccumulator::merged(&dens));
    let num_se = crate::seeding::batch_means_se(&nums).unwrap_or(0.0).max(num.std_error());
    let den_se = den.std_error();
    if den.mean().abs() <= 3.0 * den_se {
        return Err(Error::Hypothesis(format!(
            "E[A^alpha log A] = {:.4e} is within 3 se ({:.2e}) of zero",
            den.mean(),
            den_se
        )));
    }
    let c0 = num.mean() / (alpha * den.mean());
    let num_sums: Vec<f64> = nums.iter().map(|p| p.sum()).collect();
    let den_sums: Vec<f64> = dens.iter().map(|p| alpha * p.sum()).collect();
    let delta = c0.abs() * ((num_se / num.mean()).powi(2) + (den_se / den.mean()).powi(2)).sqrt();
    let se = if num.mean() == 0.0 {
        0.0
    } else {
        ratio_se(&num_sums, &den_sums).max(delta)
    };
    Ok(GoldieC0 {
        c0,
        se,
        numerator: num.mean(),
        numerator_se: num_se,
        denominator: den.mean(),
        denominator_se: den_se,
    })
}

/// How the `T_∞` series is truncated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// Fixed cutoff; when `None` the smallest cutoff meeting `tolerance` is used.
    pub cutoff: Option<usize>,
    /// Upper limit on the analytic bound of the discarded tail's effect.
    pub tolerance: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            cutoff: None,
            tolerance: 1e-4,
        }
    }
}

const MAX_CUTOFF: usize = 100_000;

impl Truncation {
    /// Resolves the cutoff for the bound `factor · ρ^{N+shift} / (1 − ρ)`.
    fn resolve(&self, factor: f64, rho: f64, shift: i32) -> Result<(usize, f64)> {
        if !(rho < 1.0) {
            return Err(Error::Hypothesis(format!(
                "geometric rate {rho:.6} of the T series is not below 1"
            )));
        }
        let bound = |n: usize| factor * rho.powi(n as i32 + shift) / (1.0 - rho);
        let n = match self.cutoff {
            Some(n) => n,
            None => {
                let mut n = 1usize;
                while bound(n) > self.tolerance && n < MAX_CUTOFF {
                    n += 1;
                }
                n
            }
        };
        let b = bound(n);
        if b > self.tolerance {
            return Err(Error::Truncation {
                bound: b,
                tolerance: self.tolerance,
                cutoff: n,
            });
        }
        Ok((n, b))
    }
}

/// A Monte Carlo `T_∞` functional.
#[derive(Debug, Clone, PartialEq)]
pub struct TInfinityEstimate {
    /// The constant (`c₊`) after any normalizing denominator.
    pub mean_functional: f64,
    pub se: f64,
    /// Series cutoff `N`.
    pub truncation: usize,
    /// Bound on `|E f(T_∞) − E f(T_N)|` after normalization.
    pub truncation_bound: f64,
    pub draws: usize,
    /// Moment order used for the bound.
    pub kappa: f64,
}

impl TInfinityEstimate {
    pub fn record(&self, title: &str) -> TextRecord {
        TextRecord::new(title)
            .field("estimate", format!("{:.10e}", self.mean_functional))
            .field("se", format!("{:.4e}", self.se))
            .field("truncation", self.truncation)
            .field("truncation_bound", format!("{:.4e}", self.truncation_bound))
            .field("kappa", format!("{:.6}", self.kappa))
            .field("draws", self.draws)
    }
}

/// Bound on `E|f(a + T) − f(a + T_N)|` for `f(T) = (a + T)^α − T^α`, given
/// a bound on `E R^κ` (`α ≤ 1`) or `E R` (`α > 1`) for the remainder `R`.
///
/// For `α ≤ 1`, `|Δ| ≤ min(a^α, 2R^α) ≤ 2^{κ/α} a^{α−κ} R^κ`.
/// For `α > 1`, `f` is Lipschitz with constant `α a^{α−1}`.
fn pinched_kappa(alpha: f64) -> f64 {
    if alpha <= 1.0 {
        0.9 * alpha
    } else {
        1.0
    }
}

/// `c₊ = E[(1 + T_∞)^α − T_∞^α]` with `T_∞ = Σ_{i≥1} A_1⋯A_i`.
///
/// Requires `E A^α = 1` for the supplied `α`. Every sampled functional lies
/// in `[0, 1]` when `α ≤ 1`.
pub fn c_plus_sre(a: &PositiveLaw, alpha: f64, mc_draws: usize, truncation: Truncation, seed: u64) -> Result<TInfinityEstimate> {
    a.validate()?;
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be > 0, got {alpha}")));
    }
    if a.is_degenerate_zero() {
        return Ok(TInfinityEstimate {
            mean_functional: 1.0,
            se: 0.0,
            truncation: 0,
            truncation_bound: 0.0,
            draws: 0,
            kappa: pinched_kappa(alpha),
        });
    }
    let kappa = pinched_kappa(alpha);
    let rho = law_moment(a, kappa, 1_000_000, derive_seed(seed, u64::MAX));
    let factor = if alpha <= 1.0 { 2f64.powf(kappa / alpha) } else { alpha };
    let (n, bound) = truncation.resolve(factor, rho, 1)?;
    let (mean, se) = mc_mean(mc_draws, seed, |rng| {
        let (mut p, mut t) = (1.0, 0.0);
        for _ in 0..n {
            p *= a.sample(rng);
            t += p;
        }
        pinched(1.0, t, alpha)
    });
    Ok(TInfinityEstimate {
        mean_functional: mean,
        se,
        truncation: n,
        truncation_bound: bound,
        draws: mc_draws.div_ceil(MC_CHUNKS) * MC_CHUNKS,
        kappa,
    })
}

fn garch_inputs(alpha1: f64, beta1: f64, noise: &NoiseSpec) -> Result<PositiveLaw> {
    noise.validate()?;
    if !(alpha1 >= 0.0 && (0.0..1.0).contains(&beta1)) {
        return Err(Error::InvalidModel(format!(
            "need alpha1 >= 0 and beta1 in [0,1), got {alpha1}, {beta1}"
        )));
    }
    Ok(garch_multiplier(alpha1, beta1, noise))
}

/// `c₊` of the squared GARCH(1,1) process:
/// `E[(Z₀² + A₀T_∞)^α − (A₀T_∞)^α] / E|Z|^{2α}` with `A₀ = α₁Z₀² + β₁` and
/// `T_∞ = Σ_{t≥1} Z_t² Π_{i<t} (α₁Z_i² + β₁)`, the square analogue of
/// [`c_plus_garch`]. With `β₁ = 0` it equals [`c_plus_sre`] for `A = α₁Z²`.
#[allow(clippy::too_many_arguments)]
pub fn c_plus_garch_sq(
    alpha0: f64,
    alpha1: f64,
    beta1: f64,
    noise: &NoiseSpec,
    alpha: f64,
    mc_draws: usize,
    truncation: Truncation,
    seed: u64,
) -> Result<TInfinityEstimate> {
    if !(alpha0 > 0.0) {
        return Err(Error::InvalidModel(format!("alpha0 must be > 0, got {alpha0}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be > 0, got {alpha}")));
    }
    let law = garch_inputs(alpha1, beta1, noise)?;
    let aux = derive_seed(seed, u64::MAX);
    let m = |r: f64| noise_abs_moment(noise, r, 1_000_000, aux);
    let denom = m(2.0 * alpha)?;
    let kappa = pinched_kappa(alpha);
    // E[Z₀^{2s} A₀^r] ≤ α₁^r E|Z|^{2(s+r)} + β₁^r E|Z|^{2s} for r ≤ 1
    let mixed = |s: f64, r: f64| -> Result<f64> { Ok(alpha1.powf(r) * m(2.0 * (s + r))? + beta1.powf(r) * m(2.0 * s)?) };
    let (factor, rho) = if alpha <= 1.0 {
        (
            2f64.powf(kappa / alpha) * mixed(alpha - kappa, kappa)? * m(2.0 * kappa)?,
            law_moment(&law, kappa, 1_000_000, aux),
        )
    } else {
        (alpha * mixed(alpha - 1.0, 1.0)? * m(2.0)?, law_moment(&law, 1.0, 1_000_000, aux))
    };
    let (n, bound) = truncation.resolve(factor / denom, rho, 0)?;
    let (mean, se) = mc_mean(mc_draws, seed, |rng| {
        let z0 = noise.sample(rng);
        let a0 = alpha1 * z0 * z0 + beta1;
        let (mut p, mut t) = (1.0, 0.0);
        for _ in 0..n {
            let z = noise.sample(rng);
            t += z * z * p;
            p *= alpha1 * z * z + beta1;
        }
        pinched(z0 * z0, a0 * t, alpha)
    });
    Ok(TInfinityEstimate {
        mean_functional: mean / denom,
        se: se / denom,
        truncation: n,
        truncation_bound: bound,
        draws: mc_draws.div_ceil(MC_CHUNKS) * MC_CHUNKS,
        kappa,
    })
}

/// `c₊ = c₋` of the GARCH(1,1) returns (tail index `2α`):
/// `E[|Z₀ + A₀^{1/2} T_∞|^{2α} − |A₀^{1/2} T_∞|^{2α}] / (2 E|Z|^{2α})` with
/// `A₀ = α₁Z₀² + β₁` and `T_∞ = Σ_{t≥1} Z_t Π_{i<t} (α₁Z_i² + β₁)^{1/2}`.
#[allow(clippy::too_many_arguments)]
pub fn c_plus_garch(
    alpha0: f64,
    alpha1: f64,
    beta1: f64,
    noise: &NoiseSpec,
    alpha: f64,
    mc_draws: usize,
    truncation: Truncation,
    seed: u64,
) -> Result<TInfinityEstimate> {
    if !(alpha0 > 0.0) {
        return Err(Error::InvalidModel(format!("alpha0 must be > 0, got {alpha0}")));
    }
    if !noise.is_symmetric() {
        return Err(Error::Hypothesis("c_plus_garch requires symmetric noise".into()));
    }
    let gamma = 2.0 * alpha;
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::Domain(format!(
            "the returns' tail index 2 alpha = {gamma} must lie in (0,2)"
        )));
    }
    let law = garch_inputs(alpha1, beta1, noise)?;
    let aux = derive_seed(seed, u64::MAX);
    let m = |r: f64| noise_abs_moment(noise, r, 1_000_000, aux);
    let denom = 2.0 * m(gamma)?;
    // bound on E|Δ| via E[|Z₀|^s A₀^{r/2}] ≤ α₁^{r/2} E|Z|^{s+r} + β₁^{r/2} E|Z|^s
    let mixed = |s: f64, r: f64| -> Result<f64> {
        Ok(alpha1.powf(r / 2.0) * m(s + r)? + beta1.powf(r / 2.0) * m(s)?)
    };
    let (kappa, factor, rho) = if gamma <= 1.0 {
        let kappa = 0.9 * gamma;
        (
            kappa,
            2.0 * mixed(gamma - kappa, kappa)? * m(kappa)?,
            law_moment(&law, kappa / 2.0, 1_000_000, aux),
        )
    } else {
        (
            1.0,
            gamma * 2f64.powf(2.0 - gamma) * mixed(gamma - 1.0, 1.0)? * m(1.0)?,
            law_moment(&law, 0.5, 1_000_000, aux),
        )
    };
    let (n, bound) = truncation.resolve(factor / denom, rho, 0)?;
    let (mean, se) = mc_mean(mc_draws, seed, |rng| {
        let z0 = noise.sample(rng);
        let root_a0 = (alpha1 * z0 * z0 + beta1).sqrt();
        let (mut p, mut t) = (1.0, 0.0);
        for _ in 0..n {
            let z = noise.sample(rng);
            t += z * p;
            p *= (alpha1 * z * z + beta1).sqrt();
        }
        signed_pinched(z0, root_a0 * t, gamma)
    });
    Ok(TInfinityEstimate {
        mean_functional: mean / denom,
        se: se / denom,
        truncation: n,
        truncation_bound: bound,
        draws: mc_draws.div_ceil(MC_CHUNKS) * MC_CHUNKS,
        kappa,
    })
}

/// `(c₊, c₋) = (p̃, q̃)` for stochastic volatility, read off the noise law.
pub fn c_sv(noise: &NoiseSpec) -> Result<(f64, f64)> {
    noise
        .tail_balance()
        .ok_or_else(|| Error::Hypothesis("noise law has no tail-balance parameters".into()))
}

/// Exact `Σ_j |s_j(d)|^α / Σ_j |c_j|^α`, where `s_j(d)` are the sums of the
/// coefficients seen by a window of `d` consecutive observations.
///
/// Under `n P(|X| > a_n) → 1` this ratio equals `b₊(d) + b₋(d)`; each of
/// the two is half of it by symmetry.
pub fn b_plus_sas(coeffs: &[f64], alpha: f64, d: usize) -> Result<f64> {
    if coeffs.is_empty() || coeffs.iter().all(|&c| c == 0.0) {
        return Err(Error::Domain("sas coefficients are all zero".into()));
    }
    if d == 0 {
        return Err(Error::Domain("d must be >= 1".into()));
    }
    let q = coeffs.len();
    let den: f64 = coeffs.iter().map(|c| c.abs().powf(alpha)).sum();
    let num: f64 = (0..q + d - 1)
        .map(|j| {
            let lo = j.saturating_sub(d - 1);
            let hi = j.min(q - 1);
            let s: f64 = coeffs[lo..=hi].iter().sum();
            s.abs().powf(alpha)
        })
        .sum();
    Ok(num / den)
}

/// Monte Carlo sizes for [`theory_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryOptions {
    pub mc_draws: usize,
    pub kesten_draws: usize,
    pub truncation: Truncation,
    pub seed: u64,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        TheoryOptions {
            mc_draws: 1_000_000,
            kesten_draws: 1_000_000,
            truncation: Truncation::default(),
            seed: 0,
        }
    }
}

/// Predicted limit law of `a_n^{-1}(S_n − b_n)` for a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Theory {
    pub params: StableLimitParams,
    pub se_plus: f64,
    pub se_minus: f64,
    pub kesten: Option<KestenIndex>,
    pub t_infinity: Option<TInfinityEstimate>,
    /// Set when the limit theorem does not cover the model (e.g. `α = 1`
    /// for SRE/GARCH).
    pub excluded: Option<String>,
}

impl Theory {
    fn closed(params: StableLimitParams) -> Self {
        Theory {
            params,
            se_plus: 0.0,
            se_minus: 0.0,
            kesten: None,
            t_infinity: None,
            excluded: None,
        }
    }

    pub fn record(&self) -> TextRecord {
        let mut r = TextRecord::new("theory")
            .field("alpha", format!("{:.10}", self.params.alpha()))
            .field("c_plus", format!("{:.10e}", self.params.c_plus()))
            .field("c_minus", format!("{:.10e}", self.params.c_minus()))
            .field("se_plus", format!("{:.4e}", self.se_plus))
            .field("se_minus", format!("{:.4e}", self.se_minus));
        if let Some(k) = &self.kesten {
            r.push("kesten_residual", format!("{:.3e}", k.residual));
            r.push("kesten_method", if k.closed_form { "closed_form" } else { "monte_carlo" });
        }
        if let Some(t) = &self.t_infinity {
            r.push("truncation", t.truncation);
            r.push("truncation_bound", format!("{:.4e}", t.truncation_bound));
        }
        if let Some(e) = &self.excluded {
            r.push("excluded", e);
        }
        r
    }
}

/// Half-width of the band around `α = 1` treated as `α ≈ 1`.
pub const ALPHA_ONE_BAND: f64 = 0.05;

fn excluded_alpha_one(alpha: f64) -> Option<String> {
    ((alpha - 1.0).abs() < ALPHA_ONE_BAND).then(|| {
        format!("alpha = {alpha:.4} is within {ALPHA_ONE_BAND} of 1, where the SRE/GARCH limit theorem is not stated")
    })
}

fn kesten_for(law: &PositiveLaw, opts: &TheoryOptions) -> Result<KestenIndex> {
    kesten_index_exact(law, 1e-12).or_else(|_| kesten_index(law, opts.kesten_draws, 1e-10, derive_seed(opts.seed, 1)))
}

/// Tail index of the series a model emits, solving the Kesten equation for
/// the recursive families with the same streams as [`theory_params`].
pub fn tail_index(model: &ModelSpec, opts: &TheoryOptions) -> Result<f64> {
    let noise_alpha = |noise: &NoiseSpec| {
        noise
            .tail_index()
            .ok_or_else(|| Error::Hypothesis("noise has no tail index".into()))
    };
    match &model.kind {
        ModelKind::IidRv { noise }
        | ModelKind::Differenced { noise }
        | ModelKind::MDependent { noise, .. }
        | ModelKind::StochVol { noise, .. } => noise_alpha(noise),
        ModelKind::SasMa { alpha, .. } => Ok(*alpha),
        ModelKind::Sre { a, .. } => Ok(kesten_for(a, opts)?.alpha),
        ModelKind::Garch11 {
            alpha1,
            beta1,
            noise,
            series,
            ..
        } => {
            let k = kesten_for(&garch_multiplier(*alpha1, *beta1, noise), opts)?.alpha;
            Ok(if *series == GarchSeries::Returns { 2.0 * k } else { k })
        }
    }
}

/// Theory-side `(α, c₊, c₋)` for a model under `n P(|X| > a_n) → 1`.
pub fn theory_params(model: &ModelSpec, opts: &TheoryOptions) -> Result<Theory> {
    model.validate()?;
    let noise_alpha = |noise: &NoiseSpec| {
        noise
            .tail_index()
            .ok_or_else(|| Error::Hypothesis("noise has no tail index".into()))
    };
    let balance = |noise: &NoiseSpec| c_sv(noise);
    match &model.kind {
        ModelKind::IidRv { noise } | ModelKind::StochVol { noise, .. } => {
            let (p, q) = balance(noise)?;
            Ok(Theory::closed(StableLimitParams::new(noise_alpha(noise)?, p, q)?))
        }
        ModelKind::Differenced { noise } => Ok(Theory::closed(StableLimitParams::new(noise_alpha(noise)?, 0.0, 0.0)?)),
        ModelKind::MDependent { noise, coeffs } => {
            let alpha = noise_alpha(noise)?;
            let (p, q) = balance(noise)?;
            let total: f64 = coeffs.iter().sum();
            let norm: f64 = coeffs.iter().map(|c| c.abs().powf(alpha)).sum();
            let pos = total.max(0.0).powf(alpha);
            let neg = (-total).max(0.0).powf(alpha);
            Ok(Theory::closed(StableLimitParams::new(
                alpha,
                (p * pos + q * neg) / norm,
                (q * pos + p * neg) / norm,
            )?))
        }
        ModelKind::SasMa { coeffs, alpha } => {
            let total: f64 = coeffs.iter().sum::<f64>().abs().powf(*alpha);
            let norm: f64 = coeffs.iter().map(|c| c.abs().powf(*alpha)).sum();
            Ok(Theory::closed(StableLimitParams::symmetric(*alpha, 0.5 * total / norm)?))
        }
        ModelKind::Sre { a, .. } => {
            let k = kesten_for(a, opts)?;
            let t = c_plus_sre(a, k.alpha, opts.mc_draws, opts.truncation, derive_seed(opts.seed, 2))?;
            sre_like(k, t)
        }
        ModelKind::Garch11 {
            alpha0,
            alpha1,
            beta1,
            noise,
            series,
        } => {
            let law = garch_multiplier(*alpha1, *beta1, noise);
            let k = kesten_for(&law, opts)?;
            let seed = derive_seed(opts.seed, 2);
            match series {
                GarchSeries::Squared => {
                    let t = c_plus_garch_sq(*alpha0, *alpha1, *beta1, noise, k.alpha, opts.mc_draws, opts.truncation, seed)?;
                    sre_like(k, t)
                }
                GarchSeries::Volatility => {
                    let t = c_plus_sre(&law, k.alpha, opts.mc_draws, opts.truncation, seed)?;
                    sre_like(k, t)
                }
                GarchSeries::Returns => {
                    let t = c_plus_garch(*alpha0, *alpha1, *beta1, noise, k.alpha, opts.mc_draws, opts.truncation, seed)?;
                    let c = t.mean_functional.max(0.0);
                    Ok(Theory {
                        params: StableLimitParams::new(2.0 * k.alpha, c, c)?,
                        se_plus: t.se,
                        se_minus: t.se,
                        excluded: excluded_alpha_one(2.0 * k.alpha),
                        kesten: Some(k),
                        t_infinity: Some(t),
                    })
                }
            }
        }
    }
}

fn sre_like(k: KestenIndex, t: TInfinityEstimate) -> Result<Theory> {
    if k.alpha >= 2.0 {
        return Err(Error::Hypothesis(format!(
            "tail index {:.4} >= 2: the partial sums have a Gaussian limit",
            k.alpha
        )));
    }
    Ok(Theory {
        params: StableLimitParams::new(k.alpha, t.mean_functional.max(0.0), 0.0)?,
        se_plus: t.se,
        se_minus: 0.0,
        excluded: excluded_alpha_one(k.alpha),
        kesten: Some(k),
        t_infinity: Some(t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kesten_closed_forms() {
        let ln = PositiveLaw::LogNormal { mu: -0.5, sigma2: 1.0 };
        let k = kesten_index(&ln, 0, 1e-12, 0).unwrap();
        assert!((k.alpha - 1.0).abs() < 1e-12);
        assert!(k.closed_form && k.convexity.convex);
        assert!(matches!(
            kesten_index(&PositiveLaw::Constant { value: 0.5 }, 1000, 1e-6, 0),
            Err(Error::NoBracket(_))
        ));
    }

    #[test]
    fn kesten_exact_garch() {
        let law = garch_multiplier(0.5, 0.3, &NoiseSpec::StandardNormal);
        let k = kesten_index_exact(&law, 1e-13).unwrap();
        // mpmath quadrature of E(0.5 Z² + 0.3)^κ = 1
        assert!((k.alpha - 1.772_380_777_803_64).abs() < 1e-9, "{}", k.alpha);
        let arch = garch_multiplier(1.0, 0.0, &NoiseSpec::StandardNormal);
        assert!((kesten_index_exact(&arch, 1e-13).unwrap().alpha - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let v = normal_expectation(|z| z * z);
        assert!((v - 1.0).abs() < 1e-13);
        let v = normal_expectation(|z| z.abs().powf(3.0));
        assert!((v - NoiseSpec::StandardNormal.abs_moment(3.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn b_plus_sas_examples() {
        for d in 1..6 {
            assert!((b_plus_sas(&[1.0], 1.3, d).unwrap() - d as f64).abs() < 1e-12);
            assert!((b_plus_sas(&[1.0, -1.0], 0.7, d).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((b_plus_sas(&[1.0, 1.0], 1.0, 3).unwrap() - 3.0).abs() < 1e-12);
        assert!(b_plus_sas(&[0.0, 0.0], 1.0, 3).is_err());
    }

    #[test]
    fn b_plus_sas_brute_force() {
        // window sums by explicit enumeration of the coefficient array
        let coeffs = [0.5, -1.5, 2.0];
        for d in 1..=5 {
            let len = coeffs.len() + d - 1;
            let mut s = vec![0.0; len];
            for start in 0..d {
                for (j, c) in coeffs.iter().enumerate() {
                    s[start + j] += c;
                }
            }
            let alpha = 1.4;
            let num: f64 = s.iter().map(|v: &f64| v.abs().powf(alpha)).sum();
            let den: f64 = coeffs.iter().map(|v: &f64| v.abs().powf(alpha)).sum();
            assert!((b_plus_sas(&coeffs, alpha, d).unwrap() - num / den).abs() < 1e-12);
        }
    }

    #[test]
    fn c_sv_balance() {
        assert_eq!(c_sv(&NoiseSpec::pareto(1.5, 0.7, 1.0)).unwrap().0, 0.7);
        assert_eq!(c_sv(&NoiseSpec::StudentT { dof: 1.5 }).unwrap(), (0.5, 0.5));
        assert!(c_sv(&NoiseSpec::StandardNormal).is_err());
    }

    #[test]
    fn degenerate_sre_constant() {
        let t = c_plus_sre(&PositiveLaw::Constant { value: 0.0 }, 0.7, 100, Truncation::default(), 1).unwrap();
        assert_eq!(t.mean_functional, 1.0);
    }

    #[test]
    fn garch_returns_iid_limit() {
        // α₁ = β₁ = 0: c₊ = E|Z₀|^{2α} / (2 E|Z|^{2α}) = 1/2
        let t = c_plus_garch(1.0, 0.0, 0.0, &NoiseSpec::StandardNormal, 0.8, 10_000, Truncation::default(), 1).unwrap();
        assert!((t.mean_functional - 0.5).abs() < 0.03, "{}", t.mean_functional);
        assert!(c_plus_garch(1.0, 0.1, 0.1, &NoiseSpec::pareto(1.5, 0.7, 1.0), 0.5, 10, Truncation::default(), 1).is_err());
    }

    #[test]
    fn truncation_errors_when_bound_is_too_large() {
        let rule = Truncation {
            cutoff: Some(1),
            tolerance: 1e-8,
        };
        let ln = PositiveLaw::LogNormal { mu: -0.5, sigma2: 1.0 };
        assert!(matches!(c_plus_sre(&ln, 1.0, 10, rule, 1), Err(Error::Truncation { .. })));
    }

    #[test]
    fn text_record_format() {
        let r = TextRecord::new("x").field("a", 1).field("b", "two");
        assert_eq!(r.to_string(), "[x]\na = 1\nb = two\n");
        assert_eq!(r.get("b"), Some("two"));
    }
}

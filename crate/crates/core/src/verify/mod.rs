//! Convergence checks for normalized partial sums: empirical characteristic
//! functions, two-sample Kolmogorov–Smirnov, and diagnostics for
//! anti-clustering, block mixing and the large-deviation relation.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{TextRecord, ALPHA_ONE_BAND};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::seeding::{derive_seed, par_chunks, ratio_se, CompensatedSum};
use crate::stable::{sample_stable, stable_cf, StableLimitParams};
use crate::tail::{BlockSource, Normalization};

/// Fixed number of streams used by the block diagnostics.
const DIAG_CHUNKS: usize = 64;
const KS_REFERENCE_STREAM: u64 = 0x6b73_7265;
const MEAN_STREAM: u64 = 0x6d65_616e;

/// Default level of the Kolmogorov–Smirnov check.
pub const KS_LEVEL: f64 = 1e-3;
/// Floor of the characteristic-function threshold.
pub const CF_FLOOR: f64 = 0.02;
/// Multiple of the Monte Carlo standard error allowed by the CF threshold.
pub const CF_SE_MULTIPLE: f64 = 5.0;
/// Default draws for a Monte Carlo centering constant.
pub const CENTERING_DRAWS: usize = 10_000_000;

/// `{±0.25, ±0.5, ±1, ±2, ±4}`.
pub fn default_grid() -> Vec<f64> {
    let pos = [0.25, 0.5, 1.0, 2.0, 4.0];
    pos.iter().copied().chain(pos.iter().map(|x| -x)).collect()
}

/// How `b_n` in `a_n^{-1}(S_n − b_n)` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    #[default]
    None,
    /// `b_n = n E X`, exact when available, else by simulation.
    Mean,
    /// `b_n = n a_n E sin(X / a_n)`, for `α ≈ 1`.
    SineEmpirical,
}

/// A partial-sum experiment: `replicates` independent paths of length `n`.
#[derive(Debug, Clone)]
pub struct SumExperiment {
    pub model: ModelSpec,
    pub n: usize,
    pub replicates: usize,
    pub centering: Centering,
    pub normalization: Normalization,
    /// Draws used when a centering constant has to be simulated.
    pub centering_draws: usize,
}

impl SumExperiment {
    pub fn new(model: ModelSpec, n: usize, replicates: usize, normalization: Normalization) -> Self {
        SumExperiment {
            model,
            n,
            replicates,
            centering: Centering::None,
            normalization,
            centering_draws: CENTERING_DRAWS,
        }
    }

    pub fn with_centering(mut self, centering: Centering) -> Self {
        self.centering = centering;
        self
    }
}

/// Normalized partial sums together with the constants that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSums {
    pub values: Vec<f64>,
    pub a_n: f64,
    pub b_n: f64,
    /// `exact`, `monte_carlo`, `sine_empirical` or `none`.
    pub centering_source: &'static str,
    /// Standard error of `b_n / a_n` when it was simulated.
    pub centering_se: f64,
}

impl PartialSums {
    /// Empirical `q`-quantile of `|value|`.
    pub fn abs_quantile(&self, q: f64) -> f64 {
        abs_quantile(&self.values, q)
    }
}

/// Empirical `q`-quantile of `|x|` (lower order statistic).
pub fn abs_quantile(samples: &[f64], q: f64) -> f64 {
    if samples.is_empty() {
        return f64::NAN;
    }
    let mut abs: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    let k = (((abs.len() as f64) * q).ceil() as usize).clamp(1, abs.len()) - 1;
    *abs.select_nth_unstable_by(k, f64::total_cmp).1
}

/// `a_n^{-1}(S_n − b_n)` over independent replicate paths, replicate `r`
/// driven by `derive_seed(seed, r)`. `alpha` is the tail index used to check
/// that the centering is admissible.
pub fn partial_sum_sample(exp: &SumExperiment, alpha: f64, seed: u64) -> Result<PartialSums> {
    exp.model.validate()?;
    if exp.n == 0 || exp.replicates == 0 {
        return Err(Error::Domain("partial sums need n >= 1 and replicates >= 1".into()));
    }
    let a_n = exp.normalization.a_n(exp.n)?;
    let nf = exp.n as f64;
    let (b_n, source, se) = match exp.centering {
        Centering::None => {
            if alpha > 1.0 && exp.model.exact_mean() != Some(0.0) {
                return Err(Error::Hypothesis(format!(
                    "alpha = {alpha:.4} > 1 needs a centered model or mean centering"
                )));
            }
            (0.0, "none", 0.0)
        }
        Centering::Mean => {
            if alpha <= 1.0 {
                return Err(Error::Hypothesis(format!(
                    "mean centering needs alpha > 1, got {alpha:.4}"
                )));
            }
            match exp.model.exact_mean() {
                Some(m) => (nf * m, "exact", 0.0),
                None => {
                    let (m, se) = exp.model.monte_carlo_mean(exp.centering_draws, derive_seed(seed, MEAN_STREAM));
                    (nf * m, "monte_carlo", nf * se / a_n)
                }
            }
        }
        Centering::SineEmpirical => {
            if (alpha - 1.0).abs() >= ALPHA_ONE_BAND {
                return Err(Error::Hypothesis(format!(
                    "sine centering is for alpha within {ALPHA_ONE_BAND} of 1, got {alpha:.4}"
                )));
            }
            let (e, se) = sine_mean(&exp.model, a_n, exp.centering_draws, derive_seed(seed, MEAN_STREAM));
            (nf * a_n * e, "sine_empirical", nf * se)
        }
    };
    let model = &exp.model;
    let n = exp.n;
    let values = (0..exp.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut s = model.sampler(derive_seed(seed, r));
            let mut sum = 0.0;
            for _ in 0..n {
                sum += s.step();
            }
            (sum - b_n) / a_n
        })
        .collect();
    Ok(PartialSums {
        values,
        a_n,
        b_n,
        centering_source: source,
        centering_se: se,
    })
}

/// `E sin(X / a)` over `draws` stationary values, with a between-chunk error.
fn sine_mean(model: &ModelSpec, a: f64, draws: usize, seed: u64) -> (f64, f64) {
    let per = draws.div_ceil(DIAG_CHUNKS);
    let parts = par_chunks(DIAG_CHUNKS, |c| {
        let mut s = model.sampler(derive_seed(seed, c as u64));
        let mut acc = CompensatedSum::new();
        for _ in 0..per {
            acc.add((s.step() / a).sin());
        }
        acc.value()
    });
    let counts = vec![per as f64; DIAG_CHUNKS];
    let total: f64 = parts.iter().sum();
    (total / (per * DIAG_CHUNKS) as f64, ratio_se(&parts, &counts))
}

/// `mean(exp(i x s))` at every grid point. Negative points reuse the
/// conjugate of the positive one, so the result is exactly Hermitian.
pub fn empirical_cf(samples: &[f64], grid: &[f64]) -> Vec<Complex64> {
    let m = samples.len() as f64;
    grid.iter()
        .map(|&x| {
            let t = x.abs();
            let (mut re, mut im) = (CompensatedSum::new(), CompensatedSum::new());
            for s in samples {
                let (sin, cos) = (t * s).sin_cos();
                re.add(cos);
                im.add(sin);
            }
            let v = Complex64::new(re.value() / m, im.value() / m);
            if x < 0.0 {
                v.conj()
            } else {
                v
            }
        })
        .collect()
}

/// One grid point of a CF comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfPoint {
    pub x: f64,
    pub empirical: Complex64,
    pub theory: Complex64,
    pub gap: f64,
    /// `sqrt((1 − |ψ(x)|²)/R)`, the standard error of the empirical CF.
    pub se: f64,
}

/// Sup-distance between an empirical CF and a stable CF.
#[derive(Debug, Clone, PartialEq)]
pub struct CfDistance {
    pub distance: f64,
    pub points: Vec<CfPoint>,
    /// Largest pointwise standard error on the grid.
    pub mc_se: f64,
    /// `max(0.02, 5 · mc_se)`.
    pub threshold: f64,
}

impl CfDistance {
    pub fn passes(&self) -> bool {
        self.distance < self.threshold
    }

    pub fn write_csv(&self, out: &mut String) {
        out.push_str("x,empirical_re,empirical_im,theory_re,theory_im,gap,se\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
                p.x, p.empirical.re, p.empirical.im, p.theory.re, p.theory.im, p.gap, p.se
            );
        }
    }
}

/// `sup_x |φ̂(x) − ψ(x)|` over `grid`.
pub fn cf_distance(samples: &[f64], params: &StableLimitParams, grid: &[f64]) -> CfDistance {
    let r = samples.len() as f64;
    let emp = empirical_cf(samples, grid);
    let points: Vec<CfPoint> = grid
        .iter()
        .zip(emp)
        .map(|(&x, e)| {
            let th = stable_cf(params, x);
            CfPoint {
                x,
                empirical: e,
                theory: th,
                gap: (e - th).norm(),
                se: ((1.0 - th.norm_sqr()).max(0.0) / r).sqrt(),
            }
        })
        .collect();
    let distance = points.iter().map(|p| p.gap).fold(0.0, f64::max);
    let mc_se = points.iter().map(|p| p.se).fold(0.0, f64::max);
    CfDistance {
        distance,
        points,
        mc_se,
        threshold: CF_FLOOR.max(CF_SE_MULTIPLE * mc_se),
    }
}

/// A Kolmogorov–Smirnov comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    /// Asymptotic critical value at [`KS_LEVEL`].
    pub critical: f64,
    pub n: usize,
    pub n_ref: usize,
    /// The limit is the point mass at zero; `statistic` is then the Lévy
    /// distance to it and `critical` the one-sample value.
    pub degenerate: bool,
}

impl KsResult {
    pub fn passes(&self) -> bool {
        self.statistic <= self.critical
    }
}

/// `sqrt(−ln(level/2)/2)`, the asymptotic Kolmogorov quantile.
pub fn ks_quantile(level: f64) -> f64 {
    (-(level / 2.0).ln() / 2.0).sqrt()
}

/// Two-sample KS statistic between sorted samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// KS statistic of `samples` against `n_ref` draws of the stable law, drawn
/// from a stream independent of any `sample_stable(params, _, seed)` call.
pub fn ks_distance(samples: &[f64], params: &StableLimitParams, n_ref: usize, seed: u64) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::Domain("KS needs a nonempty sample".into()));
    }
    let n = samples.len();
    if params.is_degenerate() {
        return Ok(KsResult {
            statistic: levy_distance_to_zero(samples),
            critical: ks_quantile(KS_LEVEL) / (n as f64).sqrt(),
            n,
            n_ref: 0,
            degenerate: true,
        });
    }
    if n_ref == 0 {
        return Err(Error::Domain("KS needs n_ref >= 1".into()));
    }
    let reference = sample_stable(params, n_ref, derive_seed(seed, KS_REFERENCE_STREAM));
    let (nf, mf) = (n as f64, n_ref as f64);
    Ok(KsResult {
        statistic: ks_two_sample(samples, &reference),
        critical: ks_quantile(KS_LEVEL) * ((nf + mf) / (nf * mf)).sqrt(),
        n,
        n_ref,
        degenerate: false,
    })
}

/// Lévy distance between the empirical law and the point mass at zero:
/// the least `ε` with `P̂(X < −ε) ≤ ε` and `P̂(X > ε) ≤ ε`.
fn levy_distance_to_zero(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    let m = s.len() as f64;
    let excess = |e: f64| {
        let below = s.partition_point(|v| *v < -e) as f64;
        let above = (s.len() - s.partition_point(|v| *v <= e)) as f64;
        below.max(above) / m
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if excess(0.0) <= 0.0 {
        return 0.0;
    }
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) <= mid {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Sums of `count` consecutive blocks of length `len`, from fixed streams.
fn block_sums<S: BlockSource + ?Sized>(source: &S, len: usize, count: usize, scale: f64, seed: u64) -> Vec<f64> {
    let per = count.div_ceil(DIAG_CHUNKS);
    par_chunks(DIAG_CHUNKS, |c| {
        let mut out = Vec::with_capacity(per);
        source.for_each_block(derive_seed(seed, c as u64), len, per, &mut |b| {
            out.push(b.iter().sum::<f64>() / scale);
        });
        out
    })
    .concat()
}

/// Conditional exceedance frequency `P(max_{d≤i≤m}|X_i| > x a_n | |X_0| > x a_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnticlusterPoint {
    pub d: usize,
    pub m: usize,
    pub x: f64,
    pub probability: f64,
    pub se: f64,
    /// Conditioning exceedances found.
    pub events: u64,
    pub hits: u64,
}

/// Scans `replicates` stationary segments of length `n + m` for anchors
/// `|X_t| > x a_n`, `t < n`, and records whether the window `t+d ..= t+m`
/// holds another exceedance.
#[allow(clippy::too_many_arguments)]
pub fn anticluster_diag<S: BlockSource + ?Sized>(
    source: &S,
    norm: &Normalization,
    d: usize,
    m: usize,
    x: f64,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<AnticlusterPoint> {
    if d == 0 || d > m || m >= n {
        return Err(Error::Domain(format!("anticlustering needs 1 <= d <= m < n, got d={d}, m={m}, n={n}")));
    }
    let u = x * norm.a_n(n)?;
    let per = replicates.div_ceil(DIAG_CHUNKS);
    let parts = par_chunks(DIAG_CHUNKS, |c| {
        let (mut events, mut hits) = (0u64, 0u64);
        source.for_each_block(derive_seed(seed, c as u64), n + m, per, &mut |path| {
            for t in 0..n {
                if path[t].abs() > u {
                    events += 1;
                    hits += path[t + d..=t + m].iter().any(|v| v.abs() > u) as u64;
                }
            }
        });
        (events, hits)
    });
    let events: u64 = parts.iter().map(|p| p.0).sum();
    let hits: u64 = parts.iter().map(|p| p.1).sum();
    if events == 0 {
        return Err(Error::NoEvents(format!(
            "no |X| > {u:.4e} in {replicates} segments of length {n}"
        )));
    }
    let ev: Vec<f64> = parts.iter().map(|p| p.0 as f64).collect();
    let hi: Vec<f64> = parts.iter().map(|p| p.1 as f64).collect();
    let p = hits as f64 / events as f64;
    let binom = (p * (1.0 - p) / events as f64).sqrt();
    let batch = ratio_se(&hi, &ev);
    Ok(AnticlusterPoint {
        d,
        m,
        x,
        probability: p,
        se: if batch.is_finite() { binom.max(batch) } else { binom },
        events,
        hits,
    })
}

/// Block-mixing gap at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingPoint {
    pub m: usize,
    pub x: f64,
    pub phi_n: Complex64,
    pub phi_m_pow: Complex64,
    pub gap: f64,
    pub se: f64,
}

/// `|φ̂_n(x) − φ̂_{nm}(x)^{k_n}|` with `k_n = ⌊n/m⌋`, where `φ̂_n` and `φ̂_{nm}`
/// are the empirical CFs of `a_n^{-1} S_n` and `a_n^{-1} S_m` from
/// independent block sets of size `replicates`.
#[allow(clippy::too_many_arguments)]
pub fn mixing_block_diag<S: BlockSource + ?Sized>(
    source: &S,
    norm: &Normalization,
    n: usize,
    m: usize,
    x_grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<Vec<MixingPoint>> {
    if m == 0 || m >= n {
        return Err(Error::Domain(format!("mixing gap needs 1 <= m < n, got m={m}, n={n}")));
    }
    let a_n = norm.a_n(n)?;
    let k = (n / m) as i32;
    let full = block_sums(source, n, replicates, a_n, derive_seed(seed, 0));
    let short = block_sums(source, m, replicates, a_n, derive_seed(seed, 1));
    let (rf, rs) = (full.len() as f64, short.len() as f64);
    let pn = empirical_cf(&full, x_grid);
    let pm = empirical_cf(&short, x_grid);
    Ok(x_grid
        .iter()
        .zip(pn.into_iter().zip(pm))
        .map(|(&x, (a, b))| {
            let pow = b.powi(k);
            let se_n = ((1.0 - a.norm_sqr()).max(0.0) / rf).sqrt();
            let se_m = ((1.0 - b.norm_sqr()).max(0.0) / rs).sqrt();
            let slope = k as f64 * b.norm().powi(k - 1);
            MixingPoint {
                m,
                x,
                phi_n: a,
                phi_m_pow: pow,
                gap: (a - pow).norm(),
                se: (se_n * se_n + (slope * se_m).powi(2)).sqrt(),
            }
        })
        .collect())
}

/// One threshold of the large-deviation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyTailRow {
    pub x: f64,
    pub empirical: f64,
    pub se: f64,
    pub theory: f64,
    pub theory_se: f64,
    pub hits: u64,
    /// `|empirical − theory| ≤ 3 · combined se`; `None` without exceedances.
    pub within: Option<bool>,
}

/// `(n/m) P̂(S_m > x a_n)` against `c₊ x^{−α}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyTailTable {
    pub m: usize,
    pub n: usize,
    pub rows: Vec<LevyTailRow>,
}

impl LevyTailTable {
    /// All rows with exceedances agree with the theory curve.
    pub fn passes(&self) -> bool {
        let used: Vec<bool> = self.rows.iter().filter_map(|r| r.within).collect();
        !used.is_empty() && used.iter().all(|&w| w)
    }
}

/// Large-deviation check `k_n P(S_m > x a_n) → c₊ x^{−α}` over `replicates`
/// blocks of length `m`. With an exact normalization the level is
/// `(n/m) P̂(S_m > x a_n)` with a binomial error; otherwise it is
/// self-normalized as `#{S_m > x a_n} / #{|X_t| > a_n}` over the same blocks,
/// which replaces `1/n` by `P̂(|X| > a_n)`.
#[allow(clippy::too_many_arguments)]
pub fn levy_tail_check<S: BlockSource + ?Sized>(
    source: &S,
    norm: &Normalization,
    theory: (f64, f64),
    alpha: f64,
    m: usize,
    n: usize,
    x_grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<LevyTailTable> {
    if m == 0 || m >= n || x_grid.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::Domain(format!(
            "large-deviation check needs 1 <= m < n and positive thresholds, got m={m}, n={n}"
        )));
    }
    let a_n = norm.a_n(n)?;
    let per = replicates.div_ceil(DIAG_CHUNKS);
    let parts = par_chunks(DIAG_CHUNKS, |c| {
        let mut hits = vec![0u64; x_grid.len()];
        let (mut blocks, mut marginal) = (0u64, 0u64);
        source.for_each_block(derive_seed(seed, c as u64), m, per, &mut |b| {
            let s: f64 = b.iter().sum();
            blocks += 1;
            marginal += b.iter().filter(|v| v.abs() > a_n).count() as u64;
            for (h, x) in hits.iter_mut().zip(x_grid) {
                *h += (s > x * a_n) as u64;
            }
        });
        (blocks, marginal, hits)
    });
    let blocks: u64 = parts.iter().map(|p| p.0).sum();
    let marginal: u64 = parts.iter().map(|p| p.1).sum();
    let den: Vec<f64> = parts.iter().map(|p| p.1 as f64).collect();
    let k_n = n as f64 / m as f64;
    let (c_plus, c_se) = theory;
    let rows = x_grid
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let h: u64 = parts.iter().map(|p| p.2[i]).sum();
            let (emp, se) = if norm.is_exact() {
                let p = h as f64 / blocks as f64;
                (k_n * p, k_n * (p * (1.0 - p) / blocks as f64).sqrt())
            } else if marginal == 0 {
                (0.0, f64::INFINITY)
            } else {
                let num: Vec<f64> = parts.iter().map(|p| p.2[i] as f64).collect();
                (h as f64 / marginal as f64, ratio_se(&num, &den))
            };
            let scale = x.powf(-alpha);
            let theory = c_plus * scale;
            let theory_se = c_se * scale;
            let within = (h > 0).then(|| (emp - theory).abs() <= 3.0 * (se * se + theory_se * theory_se).sqrt());
            LevyTailRow {
                x,
                empirical: emp,
                se,
                theory,
                theory_se,
                hits: h,
                within,
            }
        })
        .collect();
    Ok(LevyTailTable { m, n, rows })
}

/// Pass/fail outcome of a convergence check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub cf_pass: bool,
    pub ks_pass: bool,
    pub degenerate: bool,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.cf_pass && self.ks_pass
    }

    pub fn label(&self) -> &'static str {
        match (self.degenerate, self.passed()) {
            (true, true) => "degenerate limit confirmed",
            (true, false) => "degenerate limit rejected",
            (false, true) => "stable limit confirmed",
            (false, false) => "stable limit rejected",
        }
    }
}

/// Optional curves attached to a [`ConvergenceReport`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub anticluster: Vec<AnticlusterPoint>,
    pub mixing: Vec<MixingPoint>,
    pub levy: Option<LevyTailTable>,
}

impl Diagnostics {
    /// Named CSV tables for every curve present.
    pub fn csv_tables(&self) -> Vec<(String, String)> {
        let mut tables = Vec::new();
        let d = self;
        if !d.anticluster.is_empty() {
            let mut s = String::from("d,m,x,probability,se,events,hits\n");
            for p in &d.anticluster {
                let _ = writeln!(s, "{},{},{},{:.10e},{:.10e},{},{}", p.d, p.m, p.x, p.probability, p.se, p.events, p.hits);
            }
            tables.push(("anticluster".to_string(), s));
        }
        if !d.mixing.is_empty() {
            let mut s = String::from("m,x,gap,se\n");
            for p in &d.mixing {
                let _ = writeln!(s, "{},{},{:.10e},{:.10e}", p.m, p.x, p.gap, p.se);
            }
            tables.push(("mixing".to_string(), s));
        }
        if let Some(l) = &d.levy {
            let mut s = String::from("x,empirical,se,theory,theory_se,hits,within\n");
            for r in &l.rows {
                let w = match r.within {
                    Some(true) => "yes",
                    Some(false) => "no",
                    None => "excluded",
                };
                let _ = writeln!(
                    s,
                    "{},{:.10e},{:.10e},{:.10e},{:.10e},{},{}",
                    r.x, r.empirical, r.se, r.theory, r.theory_se, r.hits, w
                );
            }
            tables.push(("levy_tail".to_string(), s));
        }
        tables
    }
}

/// Outcome of comparing normalized sums with a predicted stable limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub params: StableLimitParams,
    pub n: usize,
    pub replicates: usize,
    pub a_n: f64,
    pub b_n: f64,
    pub centering_source: &'static str,
    pub cf: CfDistance,
    pub ks: KsResult,
    pub abs_q99: f64,
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
}

impl ConvergenceReport {
    /// Compares `sums` with `params` by CF distance on `grid` and by KS
    /// against `n_ref` reference draws.
    pub fn evaluate(
        sums: &PartialSums,
        params: &StableLimitParams,
        grid: &[f64],
        n_ref: usize,
        n: usize,
        seed: u64,
    ) -> Result<Self> {
        let cf = cf_distance(&sums.values, params, grid);
        let ks = ks_distance(&sums.values, params, n_ref, seed)?;
        let verdict = Verdict {
            cf_pass: cf.passes(),
            ks_pass: ks.passes(),
            degenerate: params.is_degenerate(),
        };
        Ok(ConvergenceReport {
            params: *params,
            n,
            replicates: sums.values.len(),
            a_n: sums.a_n,
            b_n: sums.b_n,
            centering_source: sums.centering_source,
            abs_q99: sums.abs_quantile(0.99),
            cf,
            ks,
            verdict,
            diagnostics: Diagnostics::default(),
        })
    }

    pub fn record(&self) -> TextRecord {
        let mut r = TextRecord::new("convergence")
            .field("verdict", self.verdict.label())
            .field("alpha", format!("{:.10}", self.params.alpha()))
            .field("c_plus", format!("{:.10e}", self.params.c_plus()))
            .field("c_minus", format!("{:.10e}", self.params.c_minus()))
            .field("n", self.n)
            .field("replicates", self.replicates)
            .field("a_n", format!("{:.10e}", self.a_n))
            .field("b_n", format!("{:.10e}", self.b_n))
            .field("centering", self.centering_source)
            .field("cf_distance", format!("{:.6e}", self.cf.distance))
            .field("cf_threshold", format!("{:.6e}", self.cf.threshold))
            .field("ks_statistic", format!("{:.6e}", self.ks.statistic))
            .field("ks_critical", format!("{:.6e}", self.ks.critical))
            .field("abs_q99", format!("{:.6e}", self.abs_q99));
        if let Some(l) = &self.diagnostics.levy {
            r.push("levy_tail", if l.passes() { "pass" } else { "fail" });
        }
        r
    }

    /// Named CSV tables: the CF comparison and every diagnostic curve present.
    pub fn csv_tables(&self) -> Vec<(String, String)> {
        let mut tables = Vec::new();
        let mut cf = String::new();
        self.cf.write_csv(&mut cf);
        tables.push(("cf".to_string(), cf));
        tables.extend(self.diagnostics.csv_tables());
        tables
    }
}

/// `m` values `⌊n^{0.3}⌋, ⌊n^{0.5}⌋, ⌊n^{0.7}⌋` used when sweeping block sizes.
pub fn default_m_grid(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = [0.3, 0.5, 0.7]
        .iter()
        .map(|e| ((n as f64).powf(*e).floor() as usize).max(1))
        .collect();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ModelKind, NoiseSpec};
    use crate::tail::FullyDependent;

    #[test]
    fn cf_trivial_cases() {
        let g = default_grid();
        for v in empirical_cf(&[0.0, 0.0, 0.0], &g) {
            assert_eq!(v, Complex64::new(1.0, 0.0));
        }
        let c = 0.7;
        for (x, v) in g.iter().zip(empirical_cf(&[c, -c], &g)) {
            assert!((v.re - (c * x).cos()).abs() < 1e-15 && v.im == 0.0);
        }
        let p = StableLimitParams::new(1.2, 0.0, 0.0).unwrap();
        assert_eq!(cf_distance(&[0.0; 10], &p, &g).distance, 0.0);
    }

    #[test]
    fn hermitian_by_construction() {
        let s = [0.3, -1.2, 4.0, 0.01];
        let v = empirical_cf(&s, &[1.7, -1.7]);
        assert_eq!(v[0], v[1].conj());
    }

    #[test]
    fn ks_statistic_small_cases() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 1.0], &[2.0, 3.0]), 1.0);
        assert!((ks_two_sample(&[0.0, 2.0], &[1.0, 3.0]) - 0.5).abs() < 1e-15);
        assert!((ks_quantile(0.05) - 1.358_101_515_7).abs() < 1e-9);
    }

    #[test]
    fn levy_distance_of_small_values() {
        assert_eq!(levy_distance_to_zero(&[0.0; 5]), 0.0);
        // 1 in 4 above 0.5: the least eps is 0.25
        let d = levy_distance_to_zero(&[0.0, 0.0, 0.0, 0.5]);
        assert!((d - 0.25).abs() < 1e-12, "{d}");
    }

    #[test]
    fn abs_quantile_order_statistic() {
        let v: Vec<f64> = (1..=100).map(|i| -(i as f64)).collect();
        assert_eq!(abs_quantile(&v, 0.99), 99.0);
        assert_eq!(abs_quantile(&v, 1.0), 100.0);
    }

    #[test]
    fn centering_rules() {
        let m = ModelSpec::new(ModelKind::IidRv {
            noise: NoiseSpec::pareto(1.5, 1.0, 1.0),
        });
        let norm = Normalization::closed_form(&m).unwrap();
        let e = SumExperiment::new(m.clone(), 10, 5, norm.clone());
        assert!(matches!(partial_sum_sample(&e, 1.5, 1), Err(Error::Hypothesis(_))));
        let e = e.with_centering(Centering::Mean);
        let s = partial_sum_sample(&e, 1.5, 1).unwrap();
        assert_eq!(s.centering_source, "exact");
        assert!((s.b_n - 30.0).abs() < 1e-12);
        assert!(partial_sum_sample(&e, 0.9, 1).is_err());
        let e = e.with_centering(Centering::SineEmpirical);
        assert!(partial_sum_sample(&e, 1.5, 1).is_err());
    }

    #[test]
    fn replicates_do_not_depend_on_count() {
        let m = ModelSpec::new(ModelKind::IidRv {
            noise: NoiseSpec::pareto(0.8, 0.7, 1.0),
        });
        let norm = Normalization::closed_form(&m).unwrap();
        let a = partial_sum_sample(&SumExperiment::new(m.clone(), 50, 10, norm.clone()), 0.8, 4).unwrap();
        let b = partial_sum_sample(&SumExperiment::new(m, 50, 20, norm), 0.8, 4).unwrap();
        assert_eq!(a.values[..], b.values[..10]);
    }

    #[test]
    fn fully_dependent_always_clusters() {
        let noise = NoiseSpec::pareto(1.0, 1.0, 1.0);
        let norm = Normalization::power_law(1.0, 1.0, true);
        let p = anticluster_diag(&FullyDependent(noise), &norm, 1, 5, 1.0, 100, 2000, 3).unwrap();
        assert_eq!(p.probability, 1.0);
        assert!(p.events > 0);
    }

    #[test]
    fn m_grid_values() {
        assert_eq!(default_m_grid(10_000), vec![15, 100, 630]);
    }
}

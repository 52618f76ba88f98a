//! Empirical tail quantities: normalizing constants `a_n`, the Hill tail
//! index, tail balance, the block-sum limits `b±(d)` and the Lévy constants
//! `c± = lim b±(d)/d`.

use std::io::{self, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelSpec, NoiseSpec};
use crate::seeding::{derive_seed, par_chunks, ratio_se, rng_from_seed};

/// Number of independent streams a block estimate is split into. Fixed so the
/// result does not depend on the thread count.
pub const BLOCK_CHUNKS: usize = 128;

/// Reference draws per unit of `n` for an empirical `a_n`.
pub const REFERENCE_FACTOR: usize = 100;

/// A stationary sequence that can be cut into blocks.
pub trait BlockSource: Sync {
    /// Calls `f` on `count` consecutive blocks of length `d` taken from the
    /// stream identified by `seed`.
    fn for_each_block(&self, seed: u64, d: usize, count: usize, f: &mut dyn FnMut(&[f64]));
}

impl BlockSource for ModelSpec {
    fn for_each_block(&self, seed: u64, d: usize, count: usize, f: &mut dyn FnMut(&[f64])) {
        let mut s = self.sampler(seed);
        let mut buf = vec![0.0; d];
        for _ in 0..count {
            s.fill(&mut buf);
            f(&buf);
        }
    }
}

/// A source shifted by a constant, `X_t − mean`.
#[derive(Debug, Clone)]
pub struct Centered<S> {
    pub source: S,
    pub mean: f64,
}

impl<S: BlockSource> BlockSource for Centered<S> {
    fn for_each_block(&self, seed: u64, d: usize, count: usize, f: &mut dyn FnMut(&[f64])) {
        let mut buf = vec![0.0; d];
        self.source.for_each_block(seed, d, count, &mut |block| {
            for (b, x) in buf.iter_mut().zip(block) {
                *b = x - self.mean;
            }
            f(&buf);
        });
    }
}

/// The benchmark `X_i = X` for all `i`: every block repeats one fresh draw.
#[derive(Debug, Clone)]
pub struct FullyDependent(pub NoiseSpec);

impl BlockSource for FullyDependent {
    fn for_each_block(&self, seed: u64, d: usize, count: usize, f: &mut dyn FnMut(&[f64])) {
        let mut rng = rng_from_seed(seed);
        let mut buf = vec![0.0; d];
        for _ in 0..count {
            let x = self.0.sample(&mut rng);
            buf.fill(x);
            f(&buf);
        }
    }
}

/// The map `n ↦ a_n` with `n P(|X| > a_n) → 1`.
#[derive(Debug, Clone)]
pub enum Normalization {
    /// `a_n = (constant · n)^{1/alpha}`; `exact` when `P(|X| > a_n) = 1/n` holds
    /// for every `n`, not only asymptotically.
    PowerLaw { constant: f64, alpha: f64, exact: bool },
    /// Empirical `(1 − 1/n)`-quantile of `|X|`: the largest reference values
    /// in descending order, out of `total` draws.
    Empirical { top: Arc<Vec<f64>>, total: usize },
}

impl Normalization {
    pub fn power_law(constant: f64, alpha: f64, exact: bool) -> Self {
        Normalization::PowerLaw { constant, alpha, exact }
    }

    /// Exact closed form for iid Pareto noise, `None` for every other model.
    pub fn closed_form(model: &ModelSpec) -> Option<Self> {
        match &model.kind {
            ModelKind::IidRv { noise } => Some(Self::power_law(
                noise.exact_abs_tail_constant()?,
                noise.tail_index()?,
                true,
            )),
            _ => None,
        }
    }

    /// Empirical quantiles from `draws` reference values of `model`, valid for
    /// every `n` in `[n_min, draws/100]`. The draws come from fixed chunks so
    /// the table does not depend on the thread count; only the values needed
    /// for `n ≥ n_min` are kept.
    pub fn empirical(model: &ModelSpec, n_min: usize, draws: usize, seed: u64) -> Result<Self> {
        model.validate()?;
        let n_min = n_min.max(2);
        let chunks = 64usize;
        let per = draws.div_ceil(chunks);
        let total = per * chunks;
        let keep = total / n_min + 1;
        let parts = par_chunks(chunks, |c| {
            let mut s = model.sampler(derive_seed(seed, c as u64));
            let mut kept: Vec<f64> = Vec::new();
            let mut buf = vec![0.0; (1usize << 16).min(per.max(1))];
            let mut left = per;
            while left > 0 {
                let m = left.min(buf.len());
                s.fill(&mut buf[..m]);
                kept.extend(buf[..m].iter().map(|x| x.abs()));
                left -= m;
                if kept.len() > 2 * keep {
                    top_in_place(&mut kept, keep);
                }
            }
            top_in_place(&mut kept, keep);
            kept
        });
        let mut all = parts.concat();
        top_in_place(&mut all, keep);
        all.sort_unstable_by(|a, b| b.total_cmp(a));
        Ok(Normalization::Empirical {
            top: Arc::new(all),
            total,
        })
    }

    pub fn from_reference(mut values: Vec<f64>) -> Self {
        for v in values.iter_mut() {
            *v = v.abs();
        }
        values.sort_unstable_by(|a, b| b.total_cmp(a));
        Normalization::Empirical {
            total: values.len(),
            top: Arc::new(values),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Normalization::PowerLaw { exact: true, .. })
    }

    pub fn a_n(&self, n: usize) -> Result<f64> {
        select_a_n(self, n)
    }
}

/// Keeps the `k` largest values (unordered).
fn top_in_place(v: &mut Vec<f64>, k: usize) {
    if v.len() > k {
        let cut = v.len() - k;
        v.select_nth_unstable_by(cut, f64::total_cmp);
        v.drain(..cut);
    }
}

/// `a_n` from a normalization: closed form, or the empirical
/// `(1 − 1/n)`-quantile of `|X|`, which needs `n ≥ 2` and at least `100 n`
/// reference draws.
pub fn select_a_n(norm: &Normalization, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("a_n needs n >= 1".into()));
    }
    match norm {
        Normalization::PowerLaw { constant, alpha, .. } => Ok((constant * n as f64).powf(1.0 / alpha)),
        Normalization::Empirical { top, total } => {
            if n < 2 {
                return Err(Error::Domain(format!("empirical a_n needs n >= 2, got {n}")));
            }
            let need = REFERENCE_FACTOR * n;
            if *total < need {
                return Err(Error::InsufficientReference { have: *total, need });
            }
            // total/n reference values lie above the returned point
            top.get(total / n).copied().ok_or_else(|| {
                Error::Domain(format!("reference table kept only {} values; n = {n} needs more", top.len()))
            })
        }
    }
}

/// Hill estimate from the top `k` order statistics of `|X|`; returns
/// `(alpha_hat, alpha_hat/√k)`.
pub fn hill_alpha(sample: &[f64], k: usize) -> Result<(f64, f64)> {
    if k == 0 || k >= sample.len() {
        return Err(Error::Domain(format!(
            "Hill needs 0 < k < sample length, got k = {k}, length {}",
            sample.len()
        )));
    }
    let mut abs: Vec<f64> = sample.iter().map(|x| x.abs()).collect();
    let len = abs.len();
    abs.select_nth_unstable_by(len - k - 1, f64::total_cmp);
    let threshold = abs[len - k - 1];
    if !(threshold > 0.0) {
        return Err(Error::DegenerateSample(format!(
            "fewer than {} positive absolute values",
            k + 1
        )));
    }
    let lt = threshold.ln();
    let mean_log: f64 = abs[len - k..].iter().map(|x| x.ln() - lt).sum::<f64>() / k as f64;
    if !(mean_log > 0.0) {
        return Err(Error::DegenerateSample("top order statistics are all equal".into()));
    }
    let alpha = 1.0 / mean_log;
    Ok((alpha, alpha / (k as f64).sqrt()))
}

/// Default Hill exceedance count `n^{2/3}`.
pub fn default_hill_k(n: usize) -> usize {
    ((n as f64).powf(2.0 / 3.0).round() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// Empirical tail summary of one sample.
#[derive(Debug, Clone)]
pub struct TailProfile {
    pub alpha_hat: f64,
    pub alpha_se: f64,
    pub p_hat: f64,
    pub q_hat: f64,
    /// Binomial standard error of `p_hat`.
    pub balance_se: f64,
    pub k: usize,
    pub normalization: Normalization,
}

impl TailProfile {
    /// Hill index and tail balance from the top `k` values of `|X|`
    /// (default `n^{2/3}`); `a_n` from the sample itself unless a closed
    /// form is supplied.
    pub fn estimate(sample: &[f64], k: Option<usize>, closed_form: Option<Normalization>) -> Result<Self> {
        let k = k.unwrap_or_else(|| default_hill_k(sample.len()));
        let (alpha_hat, alpha_se) = hill_alpha(sample, k)?;
        let mut order: Vec<f64> = sample.to_vec();
        let len = order.len();
        order.select_nth_unstable_by(len - k, |a, b| a.abs().total_cmp(&b.abs()));
        let positives = order[len - k..].iter().filter(|&&x| x > 0.0).count();
        let p_hat = positives as f64 / k as f64;
        Ok(TailProfile {
            alpha_hat,
            alpha_se,
            p_hat,
            q_hat: 1.0 - p_hat,
            balance_se: (p_hat * (1.0 - p_hat) / k as f64).sqrt(),
            k,
            normalization: closed_form.unwrap_or_else(|| Normalization::from_reference(sample.to_vec())),
        })
    }

    pub fn a_n(&self, n: usize) -> Result<f64> {
        select_a_n(&self.normalization, n)
    }
}

/// One row of a [`BTable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BRow {
    pub d: usize,
    pub b_plus: f64,
    pub b_minus: f64,
    pub se_plus: f64,
    pub se_minus: f64,
    pub replicates: usize,
    /// Exceedance counts of `S_d` above and below the threshold.
    pub hits_plus: u64,
    pub hits_minus: u64,
    /// True when either count is zero; the estimate is then 0 and the
    /// standard error is the one-sided rule-of-three bound.
    pub zero_exceedances: bool,
}

impl BRow {
    /// The larger of the two standard errors.
    pub fn se(&self) -> f64 {
        self.se_plus.max(self.se_minus)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BTable {
    pub rows: Vec<BRow>,
    /// Normalization index used for every row.
    pub n: usize,
    pub x: f64,
}

impl BTable {
    pub fn row(&self, d: usize) -> Option<&BRow> {
        self.rows.iter().find(|r| r.d == d)
    }

    pub fn d_max(&self) -> Option<usize> {
        self.rows.iter().map(|r| r.d).max()
    }

    /// CSV with columns `d,b_plus,b_minus,se,replicates`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "d,b_plus,b_minus,se,replicates")?;
        for r in &self.rows {
            writeln!(out, "{},{:.10e},{:.10e},{:.10e},{}", r.d, r.b_plus, r.b_minus, r.se(), r.replicates)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BlockCounts {
    blocks: u64,
    plus: u64,
    minus: u64,
    /// single-observation exceedances `|X_t| > u` over all block entries
    marginal: u64,
}

fn count_blocks<S: BlockSource + ?Sized>(
    source: &S,
    d: usize,
    u: f64,
    replicates: usize,
    seed: u64,
) -> Vec<BlockCounts> {
    let per = replicates.div_ceil(BLOCK_CHUNKS);
    par_chunks(BLOCK_CHUNKS, |c| {
        let mut acc = BlockCounts::default();
        source.for_each_block(derive_seed(seed, c as u64), d, per, &mut |block| {
            let s: f64 = block.iter().sum();
            acc.blocks += 1;
            acc.plus += (s > u) as u64;
            acc.minus += (s < -u) as u64;
            acc.marginal += block.iter().filter(|v| v.abs() > u).count() as u64;
        });
        acc
    })
}

/// Estimates `b±(d) = lim n P(±S_d > a_n)` from `replicates` blocks.
///
/// With an exact normalization the estimate is `n · P̂(±S_d > x a_n) · x^α`.
/// Otherwise `a_n` is only approximate, and the estimate is the
/// self-normalized ratio `P̂(±S_d > u) / P̂(|X| > u)` with `u = x a_n`, both
/// probabilities counted on the same blocks, with a between-chunk
/// ratio-estimator standard error. In the exact case the standard error is
/// the larger of the binomial and the between-chunk error.
pub fn estimate_b<S: BlockSource + ?Sized>(
    source: &S,
    norm: &Normalization,
    d: usize,
    n: usize,
    x: f64,
    replicates: usize,
    seed: u64,
) -> Result<BRow> {
    if d == 0 {
        return Err(Error::Domain("block length d must be >= 1".into()));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!("threshold multiplier must be > 0, got {x}")));
    }
    let a_n = select_a_n(norm, n)?;
    let u = x * a_n;
    let parts = count_blocks(source, d, u, replicates, seed);
    let blocks: u64 = parts.iter().map(|p| p.blocks).sum();
    let plus: u64 = parts.iter().map(|p| p.plus).sum();
    let minus: u64 = parts.iter().map(|p| p.minus).sum();
    let marginal: u64 = parts.iter().map(|p| p.marginal).sum();
    let bf = blocks as f64;
    let blocks_per: Vec<f64> = parts.iter().map(|p| p.blocks as f64).collect();

    let (b_plus, b_minus, se_plus, se_minus) = match norm {
        Normalization::PowerLaw {
            alpha, exact: true, ..
        } => {
            let scale = n as f64 * x.powf(*alpha);
            let est = |hits: u64, per: &dyn Fn(&BlockCounts) -> u64| {
                let p = hits as f64 / bf;
                let binom = (p * (1.0 - p) / bf).sqrt();
                let hits_per: Vec<f64> = parts.iter().map(|c| per(c) as f64).collect();
                let batch = ratio_se(&hits_per, &blocks_per);
                let se = if hits == 0 { 3.0 / bf } else { binom.max(batch) };
                (scale * p, scale * se)
            };
            let (bp, sp) = est(plus, &|c| c.plus);
            let (bm, sm) = est(minus, &|c| c.minus);
            (bp, bm, sp, sm)
        }
        _ => {
            if marginal == 0 {
                return Err(Error::NoEvents(format!(
                    "no |X| exceedances of {u:.4e} in {blocks} blocks of length {d}"
                )));
            }
            // P̂(|X| > u) per observation; its reciprocal plays the role of n x^α
            let pm = marginal as f64 / (bf * d as f64);
            let marginal_per: Vec<f64> = parts.iter().map(|c| c.marginal as f64 / d as f64).collect();
            let est = |hits: u64, per: &dyn Fn(&BlockCounts) -> u64| {
                let p = hits as f64 / bf;
                let b = p / pm;
                let hits_per: Vec<f64> = parts.iter().map(|c| per(c) as f64).collect();
                let se = if hits == 0 {
                    3.0 / bf / pm
                } else {
                    ratio_se(&hits_per, &marginal_per)
                };
                (b, se)
            };
            let (bp, sp) = est(plus, &|c| c.plus);
            let (bm, sm) = est(minus, &|c| c.minus);
            (bp, bm, sp, sm)
        }
    };
    Ok(BRow {
        d,
        b_plus,
        b_minus,
        se_plus,
        se_minus,
        replicates: blocks as usize,
        hits_plus: plus,
        hits_minus: minus,
        zero_exceedances: plus == 0 || minus == 0,
    })
}

/// [`estimate_b`] for each `d` in `ds`, with per-row seeds derived from `seed`.
pub fn b_table<S: BlockSource + ?Sized>(
    source: &S,
    norm: &Normalization,
    ds: &[usize],
    n: usize,
    x: f64,
    replicates: usize,
    seed: u64,
) -> Result<BTable> {
    let rows = ds
        .iter()
        .map(|&d| estimate_b(source, norm, d, n, x, replicates, derive_seed(seed, d as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BTable { rows, n, x })
}

/// The Lévy constants extracted from a [`BTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct CEstimate {
    pub c_plus: f64,
    pub c_minus: f64,
    pub se_plus: f64,
    pub se_minus: f64,
    pub d_max: usize,
    /// `(d, b̂₊(d) − b̂₊(d−1), se)` for consecutive rows.
    pub differences: Vec<(usize, f64, f64)>,
    /// The last three differences agree within twice their standard error.
    pub converged: bool,
    /// Some `b̂₊(d)` decreases by more than three standard errors.
    pub non_monotone: bool,
}

impl CEstimate {
    pub fn se(&self) -> f64 {
        self.se_plus.max(self.se_minus)
    }
}

/// `c± ≈ b̂±(d_max)/d_max`, with successive differences as a diagnostic.
pub fn estimate_c(table: &BTable) -> Result<CEstimate> {
    let mut rows = table.rows.clone();
    rows.sort_by_key(|r| r.d);
    let last = *rows
        .last()
        .ok_or_else(|| Error::Domain("empty b table".into()))?;
    if last.d < 8 {
        return Err(Error::Domain(format!("estimate_c needs d_max >= 8, got {}", last.d)));
    }
    let dm = last.d as f64;
    let mut differences = Vec::new();
    let mut non_monotone = false;
    for w in rows.windows(2) {
        let se = (w[0].se_plus.powi(2) + w[1].se_plus.powi(2)).sqrt();
        let diff = w[1].b_plus - w[0].b_plus;
        if w[1].d == w[0].d + 1 {
            differences.push((w[1].d, diff, se));
        }
        if diff < -3.0 * se {
            non_monotone = true;
        }
    }
    let converged = differences.len() >= 3 && {
        let tail = &differences[differences.len() - 3..];
        tail.iter().all(|a| tail.iter().all(|b| (a.1 - b.1).abs() <= 2.0 * a.2.max(b.2)))
    };
    Ok(CEstimate {
        c_plus: last.b_plus / dm,
        c_minus: last.b_minus / dm,
        se_plus: last.se_plus / dm,
        se_minus: last.se_minus / dm,
        d_max: last.d,
        differences,
        converged,
        non_monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_a_n() {
        let one = Normalization::power_law(1.0, 1.0, true);
        assert!((select_a_n(&one, 1000).unwrap() - 1000.0).abs() < 1e-9);
        let half = Normalization::power_law(1.0, 0.5, true);
        assert!((select_a_n(&half, 100).unwrap() - 1e4).abs() < 1e-7);
        let model = ModelSpec::new(ModelKind::IidRv {
            noise: NoiseSpec::pareto(0.5, 0.3, 2.0),
        });
        let n = Normalization::closed_form(&model).unwrap();
        // P(|X| > a_n) = (a_n/2)^{-1/2} = 1/n
        assert!((n.a_n(50).unwrap() - 2.0 * 2500.0).abs() < 1e-8);
        assert!((n.a_n(1).unwrap() - 2.0).abs() < 1e-12);
        assert!(select_a_n(&n, 0).is_err());
    }

    #[test]
    fn empirical_a_n_needs_reference() {
        let norm = Normalization::from_reference((1..=1000).map(|i| i as f64).collect());
        assert!(matches!(
            select_a_n(&norm, 11),
            Err(Error::InsufficientReference { have: 1000, need: 1100 })
        ));
        // ten values exceed a_10
        assert_eq!(select_a_n(&norm, 10).unwrap(), 900.0);
        assert!(select_a_n(&norm, 5).unwrap() <= select_a_n(&norm, 10).unwrap());
    }

    #[test]
    fn hill_on_pareto_quantiles() {
        let n = 100_000;
        let q: Vec<f64> = (1..=n).map(|i| (1.0 - (i as f64 - 0.5) / n as f64).powf(-0.5)).collect();
        let (a, se) = hill_alpha(&q, 1000).unwrap();
        assert!((a - 2.0).abs() < 0.01, "{a}");
        assert!((se - a / 1000f64.sqrt()).abs() < 1e-12);
        assert!(hill_alpha(&vec![3.0; 100], 10).is_err());
        assert!(hill_alpha(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn fully_dependent_blocks_repeat() {
        let src = FullyDependent(NoiseSpec::pareto(0.5, 1.0, 1.0));
        let mut seen = 0;
        src.for_each_block(1, 4, 3, &mut |b| {
            assert!(b.iter().all(|&v| v == b[0]));
            seen += 1;
        });
        assert_eq!(seen, 3);
    }

    #[test]
    fn estimate_c_constant_table() {
        let rows = [1usize, 2, 4, 8, 16]
            .iter()
            .map(|&d| BRow {
                d,
                b_plus: 0.5,
                b_minus: 0.5,
                se_plus: 0.01,
                se_minus: 0.01,
                replicates: 100,
                hits_plus: 10,
                hits_minus: 10,
                zero_exceedances: false,
            })
            .collect();
        let c = estimate_c(&BTable { rows, n: 10, x: 1.0 }).unwrap();
        assert_eq!(c.c_plus, 0.5 / 16.0);
        assert_eq!(c.d_max, 16);
        assert!(!c.non_monotone);
        assert!(estimate_c(&BTable::default()).is_err());
    }

    #[test]
    fn btable_csv_columns() {
        let t = BTable {
            rows: vec![BRow {
                d: 1,
                b_plus: 0.7,
                b_minus: 0.3,
                se_plus: 0.01,
                se_minus: 0.02,
                replicates: 10,
                hits_plus: 7,
                hits_minus: 3,
                zero_exceedances: false,
            }],
            n: 10,
            x: 1.0,
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("d,b_plus,b_minus,se,replicates"));
        assert!(lines.next().unwrap().starts_with("1,7.0000000000e-1,3.0000000000e-1,2.0000000000e-2,10"));
    }
}

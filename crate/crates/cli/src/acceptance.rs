//! The acceptance suite: eleven end-to-end checks with pinned sizes and
//! tolerances, shared by `stablim selftest` and the `acceptance` test target.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;
use std::time::Instant;

use stablim::constants::{
    b_plus_sas, c_plus_garch_sq, c_plus_sre, kesten_index, kesten_index_exact, kesten_index_mc, Truncation,
};
use stablim::models::{garch_multiplier, sas_innovation_limit};
use stablim::stable::{sample_stable, StableLimitParams};
use stablim::tail::{estimate_b, BRow, Centered, Normalization};
use stablim::verify::{
    cf_distance, default_grid, ks_distance, levy_tail_check, partial_sum_sample, Centering, ConvergenceReport,
    PartialSums, SumExperiment,
};
use stablim::{GarchSeries, ModelKind, ModelSpec, NoiseSpec, PositiveLaw};

use crate::run::{run_file, RunOptions};

/// Agreement band in standard errors used by every "within 3·se" check.
pub const SIGMA_BAND: f64 = 3.0;

pub const C1_CASES: [(f64, f64, f64); 4] = [(0.5, 1.0, 0.0), (0.8, 0.5, 0.5), (1.0, 0.5, 0.5), (1.5, 1.0, 0.3)];
pub const C1_DRAWS: usize = 1_000_000;
pub const C1_CF_MAX: f64 = 0.01;
pub const C1_CASE_SECONDS: f64 = 10.0;

pub const C2_ALPHAS: [f64; 2] = [0.5, 1.5];
pub const C2_BALANCE: (f64, f64) = (0.7, 0.3);
pub const C2_TERMS: usize = 10;
pub const C2_REPLICATES: usize = 100_000;

pub const C3_DRAWS: usize = 1_000_000;
pub const C3_MC_TOL: f64 = 1e-2;
pub const C3_CLOSED_TOL: f64 = 1e-10;

pub const C4_ALPHA: f64 = 0.8;
pub const C4_P: f64 = 0.7;
pub const C4_DEPTHS: [usize; 4] = [1, 2, 4, 8];
pub const C4_SUM_N: usize = 100_000;
pub const C4_SUM_REPLICATES: usize = 10_000;

pub const C5_DEPTHS: [usize; 3] = [1, 4, 16];
pub const C5_SUM_REPLICATES: usize = 2_000;
pub const C5_Q99_MAX: f64 = 0.05;

pub const C6_ALPHA: f64 = 0.8;
pub const C6_BLOCKS: usize = 10_000_000;

pub const C7_D_MAX: usize = 16;
pub const C7_LEVY_X: [f64; 3] = [1.0, 2.0, 4.0];

pub const C8_PARAMS: (f64, f64, f64) = (1.0, 0.5, 0.3);
pub const C8_ALPHA_BAND: (f64, f64) = (0.95, 1.05);
/// Step by which `α₁` is lowered (raising the index) when the solved index
/// falls in the excluded band.
pub const C8_ALPHA1_STEP: f64 = 0.05;
pub const C8_N: usize = 100_000;
pub const C8_REPLICATES: usize = 10_000;
pub const C8_REFERENCE_DRAWS: usize = 100_000_000;
pub const C8_DEPTHS: [usize; 5] = [1, 2, 4, 8, 16];

pub const C9_ALPHA: f64 = 1.2;
pub const C9_DEPTHS: [usize; 3] = [1, 2, 4];
pub const C9_SUM_NS: [usize; 3] = [1, 10, 100];
pub const C9_REPLICATES: usize = 20_000;

pub const C10_WRONG_ALPHA: f64 = 1.1;

pub const C11_REL_TOL: f64 = 1e-10;
pub const C11_THREADS: (usize, usize) = (1, 8);

/// Normalization index of the block estimates.
pub const BLOCK_N: usize = 10_000;
/// Blocks per row of a b table.
pub const BLOCKS: usize = 1_000_000;

/// Title and runtime budget of each criterion.
pub const CRITERIA: [(u8, &str, f64); 11] = [
    (1, "stable-law self-consistency", 40.0),
    (2, "strict stability", 30.0),
    (3, "Kesten solver", 20.0),
    (4, "iid benchmark", 300.0),
    (5, "degenerate limit", 120.0),
    (6, "m0-dependent identity", 180.0),
    (7, "SRE cross-validation", 300.0),
    (8, "GARCH(1,1) squared sums", 600.0),
    (9, "sas exact law", 120.0),
    (10, "known-failure detection", 120.0),
    (11, "reproducibility", 300.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {} ({:.1} s, budget {:.0} s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

type Check = Result<(bool, String), String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Runs one criterion; the outcome fails when the check fails, errors, or
/// exceeds its runtime budget.
pub fn run_criterion(id: u8) -> Outcome {
    let &(_, title, budget) = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .unwrap_or_else(|| panic!("no criterion {id}"));
    let start = Instant::now();
    let result = match id {
        1 => c1(),
        2 => c2(),
        3 => c3(),
        4 => c4(),
        5 => c5(),
        6 => c6(),
        7 => c7(),
        8 => c8(),
        9 => c9(),
        10 => c10(),
        _ => c11(),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (ok, mut detail) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if seconds > budget {
        detail.push_str("; over the runtime budget");
    }
    Outcome {
        id,
        title,
        passed: ok && seconds <= budget,
        detail,
        seconds,
        budget_seconds: budget,
    }
}

/// Runs the listed criteria (all when `only` is empty) in order, calling
/// `report` as each finishes.
pub fn run_selected(only: &[u8], mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    CRITERIA
        .iter()
        .map(|c| c.0)
        .filter(|id| only.is_empty() || only.contains(id))
        .map(|id| {
            let o = run_criterion(id);
            report(&o);
            o
        })
        .collect()
}

fn within(est: f64, target: f64, se: f64) -> bool {
    (est - target).abs() <= SIGMA_BAND * se
}

fn c1() -> Check {
    let grid = default_grid();
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, &(a, cp, cm)) in C1_CASES.iter().enumerate() {
        let t = Instant::now();
        let p = StableLimitParams::new(a, cp, cm).map_err(err)?;
        let d = cf_distance(&sample_stable(&p, C1_DRAWS, 100 + i as u64), &p, &grid).distance;
        let secs = t.elapsed().as_secs_f64();
        ok &= d < C1_CF_MAX && secs < C1_CASE_SECONDS;
        detail.push(format!("({a},{cp},{cm}) cf {d:.2e} in {secs:.1} s"));
    }
    Ok((ok, detail.join("; ")))
}

fn c2() -> Check {
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, &a) in C2_ALPHAS.iter().enumerate() {
        let p = StableLimitParams::new(a, C2_BALANCE.0, C2_BALANCE.1).map_err(err)?;
        let draws = sample_stable(&p, C2_REPLICATES * C2_TERMS, 200 + i as u64);
        let scale = (C2_TERMS as f64).powf(-1.0 / a);
        let sums: Vec<f64> = draws.chunks(C2_TERMS).map(|c| c.iter().sum::<f64>() * scale).collect();
        let ks = ks_distance(&sums, &p, C2_REPLICATES, 210 + i as u64).map_err(err)?;
        ok &= ks.passes();
        detail.push(format!("alpha {a}: ks {:.2e} < {:.2e}", ks.statistic, ks.critical));
    }
    Ok((ok, detail.join("; ")))
}

fn c3() -> Check {
    let ln = PositiveLaw::LogNormal { mu: -0.5, sigma2: 1.0 };
    let mc = kesten_index_mc(&ln, C3_DRAWS, 1e-12, 301).map_err(err)?;
    let closed = kesten_index(&ln, C3_DRAWS, 1e-12, 302).map_err(err)?;
    let arch = kesten_index(&garch_multiplier(1.0, 0.0, &NoiseSpec::StandardNormal), C3_DRAWS, 1e-12, 303).map_err(err)?;
    let ok = (mc.alpha - 1.0).abs() < C3_MC_TOL
        && closed.closed_form
        && (closed.alpha - 1.0).abs() < C3_CLOSED_TOL
        && !arch.closed_form
        && (arch.alpha - 1.0).abs() < C3_MC_TOL;
    Ok((
        ok,
        format!(
            "lognormal MC {:.5}, closed form {:.12}, ARCH(1) MC {:.5}",
            mc.alpha, closed.alpha, arch.alpha
        ),
    ))
}

fn c4_model() -> ModelSpec {
    ModelSpec::new(ModelKind::IidRv {
        noise: NoiseSpec::pareto(C4_ALPHA, C4_P, 1.0),
    })
}

/// Normalized iid Pareto sums shared by criteria 4 and 10.
fn c4_sums() -> Result<&'static PartialSums, String> {
    static SUMS: OnceLock<Result<PartialSums, String>> = OnceLock::new();
    SUMS.get_or_init(|| {
        let m = c4_model();
        let norm = Normalization::closed_form(&m).ok_or("no closed-form normalization")?;
        partial_sum_sample(&SumExperiment::new(m, C4_SUM_N, C4_SUM_REPLICATES, norm), C4_ALPHA, 401).map_err(err)
    })
    .as_ref()
    .map_err(Clone::clone)
}

fn c4_params() -> Result<StableLimitParams, String> {
    StableLimitParams::new(C4_ALPHA, C4_P, 1.0 - C4_P).map_err(err)
}

fn c4() -> Check {
    let m = c4_model();
    let norm = Normalization::closed_form(&m).ok_or("no closed-form normalization")?;
    let mut ok = true;
    let mut detail = Vec::new();
    for &d in &C4_DEPTHS {
        let r = estimate_b(&m, &norm, d, BLOCK_N, 1.0, BLOCKS, 410 + d as u64).map_err(err)?;
        let (c, se) = (r.b_plus / d as f64, r.se_plus / d as f64);
        ok &= within(c, C4_P, se);
        detail.push(format!("b+({d})/{d} = {c:.4} se {se:.4}"));
    }
    let cf = cf_distance(&c4_sums()?.values, &c4_params()?, &default_grid());
    ok &= cf.passes();
    detail.push(format!("cf {:.4} < threshold {:.4}", cf.distance, cf.threshold));
    Ok((ok, detail.join("; ")))
}

fn c5() -> Check {
    let m = ModelSpec::new(ModelKind::Differenced {
        noise: NoiseSpec::pareto(C4_ALPHA, C4_P, 1.0),
    });
    let norm = Normalization::empirical(&m, BLOCK_N, 100 * C4_SUM_N * 10, 501).map_err(err)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for &d in &C5_DEPTHS {
        let r = estimate_b(&m, &norm, d, BLOCK_N, 1.0, BLOCKS, 510 + d as u64).map_err(err)?;
        ok &= within(r.b_plus, 0.5, r.se_plus);
        detail.push(format!("b+({d}) = {:.4} se {:.4}", r.b_plus, r.se_plus));
    }
    let sums = partial_sum_sample(&SumExperiment::new(m, C4_SUM_N, C5_SUM_REPLICATES, norm), C4_ALPHA, 520)
        .map_err(err)?;
    let q = sums.abs_quantile(0.99);
    ok &= q < C5_Q99_MAX;
    let zero = StableLimitParams::new(C4_ALPHA, 0.0, 0.0).map_err(err)?;
    let rep = ConvergenceReport::evaluate(&sums, &zero, &default_grid(), 0, C4_SUM_N, 521).map_err(err)?;
    detail.push(format!("q99 |S_n/a_n| = {q:.2e}, {}", rep.verdict.label()));
    Ok((ok, detail.join("; ")))
}

fn c6() -> Check {
    let m = ModelSpec::new(ModelKind::MDependent {
        noise: NoiseSpec::pareto(C6_ALPHA, 1.0, 1.0),
        coeffs: vec![1.0, 1.0],
    });
    let norm = Normalization::empirical(&m, BLOCK_N, 100 * BLOCK_N * 10, 601).map_err(err)?;
    let rows: Vec<BRow> = (1..=3)
        .map(|d| estimate_b(&m, &norm, d, BLOCK_N, 1.0, C6_BLOCKS, 610 + d as u64))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let oracle = 2f64.powf(C6_ALPHA - 1.0);
    let c = rows[1].b_plus - rows[0].b_plus;
    let c_se = rows[1].se_plus.hypot(rows[0].se_plus);
    let c3 = rows[2].b_plus - rows[1].b_plus;
    let dd_se = (rows[0].se_plus.powi(2) + 4.0 * rows[1].se_plus.powi(2) + rows[2].se_plus.powi(2)).sqrt();
    let ok = within(c, oracle, c_se) && within(c3 - c, 0.0, dd_se);
    Ok((
        ok,
        format!(
            "c+ = b+(2) - b+(1) = {c:.4} se {c_se:.4} vs {oracle:.4}; b+(3) - b+(2) = {c3:.4}, gap se {dd_se:.4}"
        ),
    ))
}

fn c7() -> Check {
    let a = PositiveLaw::LogNormal { mu: -0.5, sigma2: 1.0 };
    let m = ModelSpec::new(ModelKind::Sre {
        a: a.clone(),
        b: PositiveLaw::Constant { value: 1.0 },
    });
    let alpha = kesten_index(&a, 0, 1e-12, 0).map_err(err)?.alpha;
    let th = c_plus_sre(&a, alpha, 1_000_000, Truncation::default(), 701).map_err(err)?;
    let norm = Normalization::empirical(&m, BLOCK_N, 100 * BLOCK_N * 100, 702).map_err(err)?;
    let r = estimate_b(&m, &norm, C7_D_MAX, BLOCK_N, 1.0, BLOCKS, 703).map_err(err)?;
    let (c, c_se) = (r.b_plus / C7_D_MAX as f64, r.se_plus / C7_D_MAX as f64);
    let agree = within(c, th.mean_functional, th.se.hypot(c_se));
    let levy = levy_tail_check(
        &m,
        &norm,
        (th.mean_functional, th.se),
        alpha,
        C7_D_MAX,
        BLOCK_N,
        &C7_LEVY_X,
        BLOCKS,
        704,
    )
    .map_err(err)?;
    let mut detail = format!(
        "c+ theory {:.4} se {:.1e} vs b+({C7_D_MAX})/{C7_D_MAX} = {c:.4} se {c_se:.4}; levy tail",
        th.mean_functional, th.se
    );
    for row in &levy.rows {
        let _ = write!(detail, " x={}: {:.4} se {:.4}", row.x, row.empirical, row.se);
    }
    Ok((agree && levy.passes(), detail))
}

fn c8() -> Check {
    let noise = NoiseSpec::StandardNormal;
    let (alpha0, mut alpha1, beta1) = C8_PARAMS;
    let mut alpha = kesten_index_exact(&garch_multiplier(alpha1, beta1, &noise), 1e-12)
        .map_err(err)?
        .alpha;
    while (C8_ALPHA_BAND.0..=C8_ALPHA_BAND.1).contains(&alpha) {
        alpha1 -= C8_ALPHA1_STEP;
        if alpha1 <= 0.0 {
            return Err("no admissible alpha1 outside the excluded band".into());
        }
        alpha = kesten_index_exact(&garch_multiplier(alpha1, beta1, &noise), 1e-12)
            .map_err(err)?
            .alpha;
    }
    let th = c_plus_garch_sq(alpha0, alpha1, beta1, &noise, alpha, 1_000_000, Truncation::default(), 801)
        .map_err(err)?;
    let m = ModelSpec::new(ModelKind::Garch11 {
        alpha0,
        alpha1,
        beta1,
        noise,
        series: GarchSeries::Squared,
    });
    let norm = Normalization::empirical(&m, C8_N, C8_REFERENCE_DRAWS, 802).map_err(err)?;
    let mean = m.exact_mean().ok_or("no closed-form GARCH mean")?;
    let src = Centered {
        source: m.clone(),
        mean,
    };
    let d_max = *C8_DEPTHS.last().expect("depths");
    let r = estimate_b(&src, &norm, d_max, C8_N, 1.0, BLOCKS, 803).map_err(err)?;
    let (c, c_se) = (r.b_plus / d_max as f64, r.se_plus / d_max as f64);
    let agree = within(c, th.mean_functional, th.se.hypot(c_se));
    let exp = SumExperiment::new(m, C8_N, C8_REPLICATES, norm).with_centering(Centering::Mean);
    let sums = partial_sum_sample(&exp, alpha, 804).map_err(err)?;
    let params = StableLimitParams::new(alpha, th.mean_functional, 0.0).map_err(err)?;
    let rep = ConvergenceReport::evaluate(&sums, &params, &default_grid(), 10 * C8_REPLICATES, C8_N, 805)
        .map_err(err)?;
    Ok((
        agree && rep.verdict.passed(),
        format!(
            "alpha1 {alpha1}, alpha {alpha:.6}; c+ theory {:.4} se {:.4} vs b+({d_max})/{d_max} = {c:.4} se {c_se:.4}; {}: cf {:.4} (threshold {:.4}), ks {:.4} (critical {:.4})",
            th.mean_functional,
            th.se,
            rep.verdict.label(),
            rep.cf.distance,
            rep.cf.threshold,
            rep.ks.statistic,
            rep.ks.critical
        ),
    ))
}

fn c9() -> Check {
    let coeffs = vec![1.0, 1.0];
    let m = ModelSpec::new(ModelKind::SasMa {
        coeffs: coeffs.clone(),
        alpha: C9_ALPHA,
    });
    let norm = Normalization::empirical(&m, BLOCK_N, 400 * BLOCK_N, 901).map_err(err)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for &d in &C9_DEPTHS {
        let r = estimate_b(&m, &norm, d, BLOCK_N, 1.0, BLOCKS, 910 + d as u64).map_err(err)?;
        let exact = b_plus_sas(&coeffs, C9_ALPHA, d).map_err(err)?;
        let se = r.se_plus.hypot(r.se_minus);
        ok &= within(r.b_plus + r.b_minus, exact, se);
        detail.push(format!("b({d}) = {:.4} se {se:.4} vs {exact:.4}", r.b_plus + r.b_minus));
    }
    let law = sas_innovation_limit(C9_ALPHA);
    for &n in &C9_SUM_NS {
        // S_n = Y_0 + 2(Y_1 + … + Y_{n−1}) + Y_n has scale^α = 2 + 2^α (n − 1)
        let scale_alpha = 2.0 + 2f64.powf(C9_ALPHA) * (n as f64 - 1.0);
        let exact = Normalization::power_law(scale_alpha / n as f64, C9_ALPHA, false);
        let sums = partial_sum_sample(&SumExperiment::new(m.clone(), n, C9_REPLICATES, exact), C9_ALPHA, 920 + n as u64)
            .map_err(err)?;
        let ks = ks_distance(&sums.values, &law, C9_REPLICATES, 930 + n as u64).map_err(err)?;
        ok &= ks.passes();
        detail.push(format!("n = {n}: ks {:.2e} < {:.2e}", ks.statistic, ks.critical));
    }
    Ok((ok, detail.join("; ")))
}

fn c10() -> Check {
    let sums = c4_sums()?;
    let right = c4_params()?;
    let shifted = StableLimitParams::new(C10_WRONG_ALPHA, right.c_plus(), right.c_minus()).map_err(err)?;
    let swapped = StableLimitParams::new(C4_ALPHA, right.c_minus(), right.c_plus()).map_err(err)?;
    let grid = default_grid();
    let a = cf_distance(&sums.values, &shifted, &grid);
    let b = cf_distance(&sums.values, &swapped, &grid);
    Ok((
        !a.passes() && !b.passes(),
        format!(
            "alpha {C10_WRONG_ALPHA}: cf {:.4} vs threshold {:.4}; swapped: cf {:.4} vs threshold {:.4}",
            a.distance, a.threshold, b.distance, b.threshold
        ),
    ))
}

/// Small GARCH study exercising every task.
pub const C11_CONFIG: &str = r#"seed = 20240611
output = "reports"
tasks = ["all"]

[model]
kind = "garch11"
alpha0 = 1.0
alpha1 = 0.5
beta1 = 0.3
series = "squared"

[model.noise]
law = "standard_normal"

[sizes]
n = 2000
replicates = 400
d_max = 8
m_grid = [4, 40]

[options]
blocks = 100000
theory_draws = 100000
profile_length = 100000
diag_replicates = 100
"#;

fn scratch_dir() -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    std::env::temp_dir().join(format!(
        "stablim-selftest-{}-{}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ))
}

/// Token-wise comparison: integers must match exactly, other numbers within
/// `rel` relative error, everything else byte for byte.
pub fn compare_reports(a: &str, b: &str, rel: f64) -> Result<(), String> {
    let split = |s: &str| -> Vec<String> {
        s.split(|c: char| c.is_whitespace() || matches!(c, ',' | '=' | '(' | ')' | '[' | ']'))
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    };
    let (ta, tb) = (split(a), split(b));
    if ta.len() != tb.len() {
        return Err(format!("token counts differ: {} vs {}", ta.len(), tb.len()));
    }
    for (x, y) in ta.iter().zip(&tb) {
        if x == y {
            continue;
        }
        if x.parse::<i64>().is_ok() || y.parse::<i64>().is_ok() {
            return Err(format!("count {x} vs {y}"));
        }
        match (x.parse::<f64>(), y.parse::<f64>()) {
            (Ok(u), Ok(v)) if (u - v).abs() <= rel * u.abs().max(v.abs()) => {}
            _ => return Err(format!("{x} vs {y}")),
        }
    }
    Ok(())
}

fn read(dir: &Path, name: &str) -> Result<String, String> {
    std::fs::read_to_string(dir.join(name)).map_err(|e| format!("{name}: {e}"))
}

fn c11() -> Check {
    let dir = scratch_dir();
    std::fs::create_dir_all(&dir).map_err(err)?;
    let result = c11_in(&dir);
    let _ = std::fs::remove_dir_all(&dir);
    result
}

fn c11_in(dir: &Path) -> Check {
    let cfg = dir.join("config.toml");
    std::fs::write(&cfg, C11_CONFIG).map_err(err)?;
    let run = |threads: usize, sub: &str| {
        run_file(
            &cfg,
            &RunOptions {
                out: Some(dir.join(sub)),
                threads: Some(threads),
                seed: None,
            },
        )
        .map_err(err)
    };
    let (lo, hi) = C11_THREADS;
    let first = run(lo, "first")?;
    let second = run(lo, "second")?;
    let wide = run(hi, "wide")?;
    let mut identical = first.files == second.files && first.files == wide.files;
    let mut problems = Vec::new();
    for name in &first.files {
        let a = read(&first.out_dir, name)?;
        if a != read(&second.out_dir, name)? {
            identical = false;
            problems.push(format!("{name} differs between repeated runs"));
        }
        if let Err(e) = compare_reports(&a, &read(&wide.out_dir, name)?, C11_REL_TOL) {
            identical = false;
            problems.push(format!("{name} at {hi} threads: {e}"));
        }
    }
    let detail = if problems.is_empty() {
        format!(
            "{} report files identical across repeats and within {C11_REL_TOL:e} at {lo} vs {hi} threads",
            first.files.len()
        )
    } else {
        problems.join("; ")
    };
    Ok((identical, detail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_comparison_rules() {
        assert!(compare_reports("a = 1.0e0\nn,7", "a = 1.00000000000001e0\nn,7", 1e-10).is_ok());
        assert!(compare_reports("a = 1.0e0", "a = 1.1e0", 1e-10).is_err());
        assert!(compare_reports("hits 7", "hits 8", 1.0).is_err());
        assert!(compare_reports("x", "x y", 1.0).is_err());
    }

    #[test]
    fn every_criterion_has_a_budget() {
        let ids: Vec<u8> = CRITERIA.iter().map(|c| c.0).collect();
        assert_eq!(ids, (1..=11).collect::<Vec<_>>());
    }

    #[test]
    fn selftest_config_is_valid() {
        let c = crate::ExperimentConfig::parse(C11_CONFIG).unwrap();
        c.validate().unwrap();
        assert_eq!(c.task_set().len(), 5);
    }
}

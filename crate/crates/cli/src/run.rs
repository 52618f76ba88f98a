//! Executes a configuration and writes its reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use stablim::constants::{tail_index, TextRecord, Theory, TheoryOptions, ALPHA_ONE_BAND};
use stablim::seeding::derive_seed;
use stablim::tail::{b_table, estimate_c, BTable, BlockSource, CEstimate, Centered, Normalization, TailProfile};
use stablim::verify::{
    anticluster_diag, default_grid, levy_tail_check, mixing_block_diag, partial_sum_sample, Centering,
    ConvergenceReport, Diagnostics, SumExperiment, CENTERING_DRAWS,
};
use stablim::ModelKind;

use crate::config::{ExperimentConfig, Task};
use crate::CliError;

const STREAM_PROFILE: u64 = 1;
const STREAM_NORMALIZATION: u64 = 2;
const STREAM_MEAN: u64 = 3;
const STREAM_B_TABLE: u64 = 4;
const STREAM_THEORY: u64 = 5;
const STREAM_SUMS: u64 = 6;
const STREAM_KS: u64 = 7;
const STREAM_ANTICLUSTER: u64 = 8;
const STREAM_MIXING: u64 = 9;
const STREAM_LEVY: u64 = 10;

/// Grid of the block-mixing diagnostic.
pub const MIXING_GRID: [f64; 3] = [0.5, 1.0, 2.0];

/// Command-line and environment overrides of a configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunOptions {
    /// Fills unset output directory and thread count from `STABLIM_OUT` and
    /// `STABLIM_THREADS`; explicit flags win.
    pub fn with_env(mut self) -> Result<Self, CliError> {
        if self.out.is_none() {
            self.out = std::env::var_os("STABLIM_OUT").map(PathBuf::from);
        }
        if self.threads.is_none() {
            if let Ok(v) = std::env::var("STABLIM_THREADS") {
                let k = v
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("STABLIM_THREADS must be a positive integer, got {v:?}")))?;
                self.threads = Some(k);
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::Usage("thread count must be positive".into()));
        }
        Ok(self)
    }
}

/// One pass/fail judgement of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct VerdictLine {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub config_sha256: String,
    pub verdicts: Vec<VerdictLine>,
    /// Report files written, relative to `out_dir`.
    pub files: Vec<String>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    /// 0 when every verdict passes, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Hex SHA-256 of the raw configuration bytes.
pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses, validates and runs the configuration at `path`.
pub fn run_file(path: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let bytes = fs::read(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Parse(format!("{}: not UTF-8: {e}", path.display())))?;
    let cfg = ExperimentConfig::parse(text).map_err(|e| match e {
        CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })?;
    run_config(&cfg, &config_hash(&bytes), opts)
}

/// Runs a parsed configuration. `hash` identifies the configuration in every
/// report.
pub fn run_config(cfg: &ExperimentConfig, hash: &str, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    match opts.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {k} threads: {e}")))?
            .install(|| execute(cfg, hash, opts)),
        None => execute(cfg, hash, opts),
    }
}

/// Everything fixed before the first simulation.
struct Plan {
    seed: u64,
    alpha: f64,
    centering: Centering,
    theory_opts: TheoryOptions,
}

fn plan(cfg: &ExperimentConfig, seed: u64) -> Result<Plan, CliError> {
    cfg.validate()?;
    let model = &cfg.model;
    model.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    let theory_opts = TheoryOptions {
        mc_draws: cfg.options.theory_draws,
        kesten_draws: cfg.options.theory_draws,
        seed: derive_seed(seed, STREAM_THEORY),
        ..TheoryOptions::default()
    };
    let alpha = tail_index(model, &theory_opts).map_err(|e| CliError::Validation(e.to_string()))?;
    let needs_limit = [Task::BTable, Task::TheoryConstants, Task::Convergence, Task::Diagnostics]
        .iter()
        .any(|t| cfg.wants(*t));
    if needs_limit && !(alpha > 0.0 && alpha < 2.0) {
        return Err(CliError::Validation(format!(
            "tail index {alpha:.4} lies outside (0,2): the partial sums have no stable limit"
        )));
    }
    let recursive = matches!(model.kind, ModelKind::Sre { .. } | ModelKind::Garch11 { .. });
    let near_one = (alpha - 1.0).abs() < ALPHA_ONE_BAND;
    if recursive && near_one && (cfg.wants(Task::Convergence) || cfg.wants(Task::Diagnostics)) {
        return Err(CliError::Validation(format!(
            "tail index {alpha:.4} is within {ALPHA_ONE_BAND} of 1; the limit theorem for {} excludes alpha = 1",
            model.label()
        )));
    }
    let centering = if near_one {
        Centering::SineEmpirical
    } else if alpha > 1.0 {
        Centering::Mean
    } else {
        Centering::None
    };
    Ok(Plan {
        seed,
        alpha,
        centering,
        theory_opts,
    })
}

/// Writes report files with the seed and config hash embedded.
struct Reports {
    dir: PathBuf,
    seed: u64,
    hash: String,
    files: Vec<String>,
}

impl Reports {
    fn write(&mut self, name: &str, contents: String) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Write { path, source })?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, records: &[TextRecord]) -> Result<(), CliError> {
        let mut s = self.header().to_string();
        for r in records {
            s.push('\n');
            s.push_str(&r.to_string());
        }
        self.write(name, s)
    }

    fn csv(&mut self, name: &str, table: &str) -> Result<(), CliError> {
        let s = stamp_csv(table, self.seed, &self.hash);
        self.write(name, s)
    }

    fn header(&self) -> TextRecord {
        TextRecord::new("run")
            .field("seed", self.seed)
            .field("config_sha256", &self.hash)
    }
}

/// Appends `seed` and `config_sha256` columns to every line of a CSV table.
pub fn stamp_csv(table: &str, seed: u64, hash: &str) -> String {
    let mut out = String::with_capacity(table.len() + 100);
    for (i, line) in table.lines().enumerate() {
        if i == 0 {
            let _ = writeln!(out, "{line},seed,config_sha256");
        } else {
            let _ = writeln!(out, "{line},{seed},{hash}");
        }
    }
    out
}

fn task_err(task: Task) -> impl Fn(stablim::Error) -> CliError {
    move |source| CliError::Task {
        task: task.name(),
        source,
    }
}

fn normalization(cfg: &ExperimentConfig, seed: u64) -> Result<(Normalization, String), stablim::Error> {
    if let Some(n) = Normalization::closed_form(&cfg.model) {
        return Ok((n, "closed_form".into()));
    }
    let draws = cfg.reference_draws();
    let n_min = cfg.sizes.n.min(cfg.b_table_n());
    let n = Normalization::empirical(&cfg.model, n_min, draws, derive_seed(seed, STREAM_NORMALIZATION))?;
    Ok((n, format!("empirical ({draws} reference draws)")))
}

fn b_table_record(t: &BTable) -> TextRecord {
    let mut r = TextRecord::new("b_table").field("n", t.n).field("x", t.x);
    for row in &t.rows {
        r.push(
            &format!("b({})", row.d),
            format!(
                "plus {:.10e} minus {:.10e} se_plus {:.4e} se_minus {:.4e}",
                row.b_plus, row.b_minus, row.se_plus, row.se_minus
            ),
        );
    }
    r
}

fn c_record(c: &CEstimate) -> TextRecord {
    let mut r = TextRecord::new("c_estimate")
        .field("c_plus", format!("{:.10e}", c.c_plus))
        .field("c_minus", format!("{:.10e}", c.c_minus))
        .field("se_plus", format!("{:.4e}", c.se_plus))
        .field("se_minus", format!("{:.4e}", c.se_minus))
        .field("d_max", c.d_max)
        .field("converged", c.converged)
        .field("non_monotone", c.non_monotone);
    for (d, diff, se) in &c.differences {
        r.push(&format!("increment({d})"), format!("{diff:.10e} se {se:.4e}"));
    }
    r
}

fn theory_records(t: &Theory) -> Vec<TextRecord> {
    let mut v = vec![t.record()];
    if let Some(k) = &t.kesten {
        v.push(k.record());
    }
    if let Some(ti) = &t.t_infinity {
        v.push(ti.record("t_infinity"));
    }
    v
}

fn execute(cfg: &ExperimentConfig, hash: &str, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let seed = opts.seed.unwrap_or(cfg.seed);
    let plan = plan(cfg, seed)?;
    let dir = opts.out.clone().unwrap_or_else(|| cfg.output.clone());
    fs::create_dir_all(&dir).map_err(|source| CliError::Write {
        path: dir.clone(),
        source,
    })?;
    let mut reports = Reports {
        dir: dir.clone(),
        seed,
        hash: hash.to_string(),
        files: Vec::new(),
    };
    let tasks = cfg.task_set();
    let model = &cfg.model;
    let sizes = &cfg.sizes;
    let mut summary = vec![reports
        .header()
        .field("model", model.label())
        .field("tasks", tasks.iter().map(|t| t.name()).collect::<Vec<_>>().join(","))
        .field("tail_index", format!("{:.10}", plan.alpha))
        .field("n", sizes.n)
        .field("replicates", sizes.replicates)];
    let mut verdicts = Vec::new();

    let needs_norm = tasks.iter().any(|t| *t != Task::TheoryConstants);
    let norm = if needs_norm {
        Some(normalization(cfg, plan.seed).map_err(task_err(tasks[0]))?)
    } else {
        None
    };
    let needs_source = tasks
        .iter()
        .any(|t| matches!(t, Task::BTable | Task::Diagnostics));
    let source: Option<Box<dyn BlockSource>> = if !needs_source {
        None
    } else if plan.alpha > 1.0 {
        let mean = model.exact_mean().unwrap_or_else(|| {
            model
                .monte_carlo_mean(CENTERING_DRAWS, derive_seed(plan.seed, STREAM_MEAN))
                .0
        });
        summary[0].push("block_centering", format!("{mean:.10e}"));
        Some(Box::new(Centered {
            source: model.clone(),
            mean,
        }))
    } else {
        Some(Box::new(model.clone()))
    };
    let theory = if tasks
        .iter()
        .any(|t| matches!(t, Task::TheoryConstants | Task::Convergence | Task::Diagnostics))
    {
        Some(stablim::constants::theory_params(model, &plan.theory_opts).map_err(task_err(Task::TheoryConstants))?)
    } else {
        None
    };

    let mut c_estimate = None;
    for &task in &tasks {
        let err = task_err(task);
        match task {
            Task::TailProfile => {
                let (norm, norm_source) = norm.as_ref().expect("normalization");
                let path = model
                    .simulate(cfg.options.profile_length, derive_seed(plan.seed, STREAM_PROFILE))
                    .map_err(&err)?;
                let p = TailProfile::estimate(&path, None, None).map_err(&err)?;
                let rec = TextRecord::new("tail_profile")
                    .field("path_length", path.len())
                    .field("k", p.k)
                    .field("alpha_hat", format!("{:.10}", p.alpha_hat))
                    .field("alpha_se", format!("{:.4e}", p.alpha_se))
                    .field("p_hat", format!("{:.10}", p.p_hat))
                    .field("q_hat", format!("{:.10}", p.q_hat))
                    .field("balance_se", format!("{:.4e}", p.balance_se))
                    .field("normalization", norm_source);
                let mut table = String::from("n,a_n\n");
                for n in normalization_grid(sizes.n.min(cfg.b_table_n()), sizes.n.max(cfg.b_table_n())) {
                    let _ = writeln!(table, "{n},{:.10e}", norm.a_n(n).map_err(&err)?);
                }
                reports.text("tail_profile.txt", std::slice::from_ref(&rec))?;
                reports.csv("normalization.csv", &table)?;
                summary.push(rec);
            }
            Task::BTable => {
                let (norm, _) = norm.as_ref().expect("normalization");
                let src = source.as_deref().expect("block source");
                let t = b_table(
                    src,
                    norm,
                    &cfg.d_grid(),
                    cfg.b_table_n(),
                    cfg.options.x,
                    cfg.options.blocks,
                    derive_seed(plan.seed, STREAM_B_TABLE),
                )
                .map_err(&err)?;
                let mut csv = Vec::new();
                t.write_csv(&mut csv).expect("in-memory write");
                reports.csv("b_table.csv", &String::from_utf8(csv).expect("utf-8 table"))?;
                let mut recs = vec![b_table_record(&t)];
                if t.d_max().unwrap_or(0) >= 8 {
                    let c = estimate_c(&t).map_err(&err)?;
                    recs.push(c_record(&c));
                    c_estimate = Some(c);
                }
                reports.text("b_table.txt", &recs)?;
                summary.extend(recs);
            }
            Task::TheoryConstants => {
                let th = theory.as_ref().expect("theory");
                let recs = theory_records(th);
                reports.text("theory.txt", &recs)?;
                summary.extend(recs);
            }
            Task::Convergence => {
                let (norm, _) = norm.as_ref().expect("normalization");
                let th = theory.as_ref().expect("theory");
                let exp = SumExperiment::new(model.clone(), sizes.n, sizes.replicates, norm.clone())
                    .with_centering(plan.centering);
                let sums = partial_sum_sample(&exp, plan.alpha, derive_seed(plan.seed, STREAM_SUMS)).map_err(&err)?;
                let rep = ConvergenceReport::evaluate(
                    &sums,
                    &th.params,
                    &default_grid(),
                    cfg.ks_reference(),
                    sizes.n,
                    derive_seed(plan.seed, STREAM_KS),
                )
                .map_err(&err)?;
                let rec = rep.record();
                reports.text("convergence.txt", std::slice::from_ref(&rec))?;
                for (name, table) in rep.csv_tables() {
                    reports.csv(&format!("{name}.csv"), &table)?;
                }
                verdicts.push(VerdictLine {
                    name: "convergence",
                    passed: rep.verdict.passed(),
                    detail: format!(
                        "{}: cf {:.4e} (threshold {:.4e}), ks {:.4e} (critical {:.4e})",
                        rep.verdict.label(),
                        rep.cf.distance,
                        rep.cf.threshold,
                        rep.ks.statistic,
                        rep.ks.critical
                    ),
                });
                summary.push(rec);
            }
            Task::Diagnostics => {
                let (norm, _) = norm.as_ref().expect("normalization");
                let th = theory.as_ref().expect("theory");
                let src = source.as_deref().expect("block source");
                let reps = cfg.options.diag_replicates;
                let m_grid = cfg.m_grid();
                let mut d = Diagnostics::default();
                for &m in &m_grid {
                    let s = derive_seed(derive_seed(plan.seed, STREAM_ANTICLUSTER), m as u64);
                    d.anticluster
                        .push(anticluster_diag(src, norm, 1, m, cfg.options.x, sizes.n, reps, s).map_err(&err)?);
                    let s = derive_seed(derive_seed(plan.seed, STREAM_MIXING), m as u64);
                    d.mixing
                        .extend(mixing_block_diag(src, norm, sizes.n, m, &MIXING_GRID, reps, s).map_err(&err)?);
                }
                let levy = levy_tail_check(
                    src,
                    norm,
                    (th.params.c_plus(), th.se_plus),
                    plan.alpha,
                    m_grid[0],
                    sizes.n,
                    &cfg.options.levy_x,
                    cfg.options.blocks,
                    derive_seed(plan.seed, STREAM_LEVY),
                )
                .map_err(&err)?;
                let mut rec = TextRecord::new("diagnostics").field("levy_tail_m", levy.m);
                for p in &d.anticluster {
                    rec.push(
                        &format!("anticluster(m={})", p.m),
                        format!("{:.6e} se {:.2e} events {}", p.probability, p.se, p.events),
                    );
                }
                for p in &d.mixing {
                    rec.push(
                        &format!("mixing_gap(m={},x={})", p.m, p.x),
                        format!("{:.6e} se {:.2e}", p.gap, p.se),
                    );
                }
                for r in &levy.rows {
                    rec.push(
                        &format!("levy_tail(x={})", r.x),
                        format!("{:.6e} se {:.2e} theory {:.6e}", r.empirical, r.se, r.theory),
                    );
                }
                let passed = levy.passes();
                rec.push("levy_tail", if passed { "pass" } else { "fail" });
                verdicts.push(VerdictLine {
                    name: "levy_tail",
                    passed,
                    detail: format!("large-deviation level at m = {} against c+ = {:.4e}", levy.m, th.params.c_plus()),
                });
                d.levy = Some(levy);
                for (name, table) in d.csv_tables() {
                    reports.csv(&format!("{name}.csv"), &table)?;
                }
                reports.text("diagnostics.txt", std::slice::from_ref(&rec))?;
                summary.push(rec);
            }
            Task::All => unreachable!("expanded by task_set"),
        }
    }

    if let (true, Some(th), Some(c)) = (cfg.wants(Task::TheoryConstants), &theory, &c_estimate) {
        if th.excluded.is_none() {
            let se = (th.se_plus.powi(2) + c.se_plus.powi(2)).sqrt();
            let gap = (th.params.c_plus() - c.c_plus).abs();
            verdicts.push(VerdictLine {
                name: "c_plus_agreement",
                passed: gap <= 3.0 * se,
                detail: format!(
                    "theory {:.4e} vs empirical {:.4e}, gap {:.3e}, 3 se {:.3e}",
                    th.params.c_plus(),
                    c.c_plus,
                    gap,
                    3.0 * se
                ),
            });
        }
    }

    let mut v = TextRecord::new("verdicts");
    for line in &verdicts {
        v.push(line.name, format!("{} ({})", if line.passed { "pass" } else { "fail" }, line.detail));
    }
    v.push("overall", if verdicts.iter().all(|l| l.passed) { "pass" } else { "fail" });
    summary.push(v);
    let body: Vec<TextRecord> = summary.split_off(1);
    let mut text = summary[0].to_string();
    for r in &body {
        text.push('\n');
        text.push_str(&r.to_string());
    }
    reports.write("summary.txt", text)?;

    Ok(RunOutcome {
        out_dir: dir,
        seed,
        config_sha256: hash.to_string(),
        verdicts,
        files: reports.files,
    })
}

/// `n_min`, the powers of ten strictly between, and `n_max`.
fn normalization_grid(n_min: usize, n_max: usize) -> Vec<usize> {
    let mut v = vec![n_min];
    let mut p = 10usize;
    while p < n_max {
        if p > n_min {
            v.push(p);
        }
        p = p.saturating_mul(10);
    }
    v.push(n_max);
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stamped_csv_adds_two_columns() {
        let s = stamp_csv("a,b\n1,2\n", 7, "ff");
        assert_eq!(s, "a,b,seed,config_sha256\n1,2,7,ff\n");
    }

    #[test]
    fn grid_of_normalization_indices() {
        assert_eq!(normalization_grid(1000, 100_000), vec![1000, 10_000, 100_000]);
        assert_eq!(normalization_grid(500, 500), vec![500]);
        assert_eq!(normalization_grid(50, 2000), vec![50, 100, 1000, 2000]);
    }

    #[test]
    fn hash_is_hex_sha256() {
        assert_eq!(
            config_hash(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}

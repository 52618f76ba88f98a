//! Experiment configuration: one TOML file per study.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use stablim::ModelSpec;

use crate::CliError;

/// A unit of work inside a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    TailProfile,
    BTable,
    TheoryConstants,
    Convergence,
    Diagnostics,
    /// Shorthand for every other task.
    All,
}

impl Task {
    pub const EACH: [Task; 5] = [
        Task::TailProfile,
        Task::BTable,
        Task::TheoryConstants,
        Task::Convergence,
        Task::Diagnostics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::TailProfile => "tail_profile",
            Task::BTable => "b_table",
            Task::TheoryConstants => "theory_constants",
            Task::Convergence => "convergence",
            Task::Diagnostics => "diagnostics",
            Task::All => "all",
        }
    }
}

/// Experiment sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sizes {
    /// Path length of each partial sum, and the normalization index.
    pub n: usize,
    /// Number of independent partial sums.
    pub replicates: usize,
    /// Largest block length in the b table.
    pub d_max: usize,
    /// Block lengths for the diagnostics; empty means `⌊n^0.3⌋, ⌊n^0.5⌋, ⌊n^0.7⌋`.
    #[serde(default)]
    pub m_grid: Vec<usize>,
}

/// Tuning knobs with defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Options {
    /// Blocks per row of the b table and for the Lévy-tail check.
    pub blocks: usize,
    /// Normalization index of the b table (defaults to `sizes.n`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_table_n: Option<usize>,
    /// Block lengths of the b table (defaults to powers of two up to `d_max`, plus `d_max`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_grid: Option<Vec<usize>>,
    /// Threshold multiplier `x` in `P(S_d > x a_n)`.
    pub x: f64,
    /// Reference draws for an empirical `a_n` (defaults to 1000 times the largest index).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_draws: Option<usize>,
    /// Monte Carlo draws for the theory constants.
    pub theory_draws: usize,
    /// Stable reference draws for the KS test (defaults to `10 · replicates`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_reference: Option<usize>,
    /// Path length for the Hill and tail-balance profile.
    pub profile_length: usize,
    /// Segments per anticlustering and mixing point.
    pub diag_replicates: usize,
    /// Thresholds of the Lévy-tail check.
    pub levy_x: Vec<f64>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            blocks: 1_000_000,
            b_table_n: None,
            d_grid: None,
            x: 1.0,
            reference_draws: None,
            theory_draws: 1_000_000,
            ks_reference: None,
            profile_length: 1_000_000,
            diag_replicates: 1000,
            levy_x: vec![1.0, 2.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every random stream is derived from it.
    pub seed: u64,
    /// Report directory.
    pub output: PathBuf,
    pub tasks: Vec<Task>,
    pub model: ModelSpec,
    pub sizes: Sizes,
    #[serde(default)]
    pub options: Options,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Requested tasks in execution order, with `all` expanded.
    pub fn task_set(&self) -> Vec<Task> {
        let mut t: Vec<Task> = if self.tasks.contains(&Task::All) {
            Task::EACH.to_vec()
        } else {
            self.tasks.clone()
        };
        t.sort();
        t.dedup();
        t
    }

    pub fn wants(&self, task: Task) -> bool {
        self.task_set().contains(&task)
    }

    pub fn b_table_n(&self) -> usize {
        self.options.b_table_n.unwrap_or(self.sizes.n)
    }

    pub fn d_grid(&self) -> Vec<usize> {
        if let Some(g) = &self.options.d_grid {
            let mut g = g.clone();
            g.sort_unstable();
            g.dedup();
            return g;
        }
        let mut g: Vec<usize> = (0..)
            .map(|k| 1usize << k)
            .take_while(|d| *d < self.sizes.d_max)
            .collect();
        g.push(self.sizes.d_max);
        g
    }

    pub fn m_grid(&self) -> Vec<usize> {
        if self.sizes.m_grid.is_empty() {
            stablim::verify::default_m_grid(self.sizes.n)
        } else {
            self.sizes.m_grid.clone()
        }
    }

    pub fn reference_draws(&self) -> usize {
        self.options
            .reference_draws
            .unwrap_or(1000 * self.sizes.n.max(self.b_table_n()))
    }

    pub fn ks_reference(&self) -> usize {
        self.options.ks_reference.unwrap_or(10 * self.sizes.replicates)
    }

    /// Structural checks on the configuration itself; model invariants are
    /// checked separately by the runner before any simulation.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Validation(m));
        if self.tasks.is_empty() {
            return fail("tasks must not be empty".into());
        }
        let s = &self.sizes;
        if s.n < 2 {
            return fail(format!("sizes.n must be >= 2, got {}", s.n));
        }
        if s.replicates == 0 {
            return fail("sizes.replicates must be positive".into());
        }
        if s.d_max == 0 {
            return fail("sizes.d_max must be positive".into());
        }
        if let Some(m) = self.m_grid().iter().find(|m| **m == 0 || **m >= s.n) {
            return fail(format!("sizes.m_grid entries must lie in [1, n), got {m}"));
        }
        let o = &self.options;
        if o.blocks == 0 || o.theory_draws == 0 || o.diag_replicates == 0 {
            return fail("options.blocks, options.theory_draws and options.diag_replicates must be positive".into());
        }
        if self.b_table_n() < 2 {
            return fail("options.b_table_n must be >= 2".into());
        }
        if self.d_grid().first() == Some(&0) {
            return fail("options.d_grid entries must be positive".into());
        }
        if !(o.x > 0.0 && o.x.is_finite()) {
            return fail(format!("options.x must be positive, got {}", o.x));
        }
        if o.levy_x.is_empty() || o.levy_x.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return fail("options.levy_x must be a non-empty list of positive thresholds".into());
        }
        if o.profile_length < 100 {
            return fail("options.profile_length must be >= 100".into());
        }
        if self.options.reference_draws == Some(0) || self.options.ks_reference == Some(0) {
            return fail("options.reference_draws and options.ks_reference must be positive".into());
        }
        Ok(())
    }
}

use std::path::{Path, PathBuf};
use std::process::Command;

use stablim_cli::{catalog, run_file, CliError, ExperimentConfig, RunOptions, Task, EXIT_USAGE};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stablim"))
}

const GARCH_BAD_BETA: &str = r#"seed = 1
output = "unused"
tasks = ["convergence"]

[model]
kind = "garch11"
alpha0 = 1.0
alpha1 = 0.1
beta1 = 1.2

[model.noise]
law = "standard_normal"

[sizes]
n = 1000
replicates = 100
d_max = 8
"#;

#[test]
fn shipped_configs_round_trip() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let cfg = ExperimentConfig::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        cfg.validate().unwrap();
        let again = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 4);
}

#[test]
fn options_survive_a_round_trip() {
    let mut cfg = ExperimentConfig::parse(GARCH_BAD_BETA).unwrap();
    cfg.tasks = vec![Task::BTable, Task::Diagnostics];
    cfg.sizes.m_grid = vec![3, 30];
    cfg.options.d_grid = Some(vec![1, 3, 9]);
    cfg.options.reference_draws = Some(123_456);
    cfg.options.levy_x = vec![0.5, 1.5];
    cfg.options.x = 0.75;
    cfg.model = cfg.model.with_burn_in(77);
    let text = cfg.to_toml();
    assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg, "{text}");
}

#[test]
fn structural_validation() {
    let mut cfg = ExperimentConfig::parse(GARCH_BAD_BETA).unwrap();
    cfg.tasks.clear();
    assert!(matches!(cfg.validate(), Err(CliError::Validation(m)) if m.contains("tasks")));
    let mut cfg = ExperimentConfig::parse(GARCH_BAD_BETA).unwrap();
    cfg.sizes.replicates = 0;
    assert!(matches!(cfg.validate(), Err(CliError::Validation(m)) if m.contains("replicates")));
    let mut cfg = ExperimentConfig::parse(GARCH_BAD_BETA).unwrap();
    cfg.sizes.m_grid = vec![1000];
    assert!(cfg.validate().is_err());
}

#[test]
fn all_expands_to_every_task() {
    let mut cfg = ExperimentConfig::parse(GARCH_BAD_BETA).unwrap();
    cfg.tasks = vec![Task::Convergence, Task::All];
    assert_eq!(cfg.task_set(), Task::EACH.to_vec());
    assert_eq!(cfg.d_grid(), vec![1, 2, 4, 8]);
    cfg.sizes.d_max = 12;
    assert_eq!(cfg.d_grid(), vec![1, 2, 4, 8, 12]);
}

#[test]
fn invalid_beta_is_rejected_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, GARCH_BAD_BETA).unwrap();
    let out = dir.path().join("out");
    let e = run_file(
        &cfg,
        &RunOptions {
            out: Some(out.clone()),
            ..RunOptions::default()
        },
    )
    .unwrap_err();
    let msg = e.to_string();
    assert!(msg.contains("beta1") && msg.contains("[0,1)"), "{msg}");
    assert_eq!(e.exit_code(), EXIT_USAGE);
    assert!(!out.exists());

    let status = bin().arg("run").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&status.stderr).contains("beta1"));
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.toml");
    std::fs::write(&cfg, GARCH_BAD_BETA.replace("replicates = 100", "replicate = 100")).unwrap();
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line") && err.contains("replicate"), "{err}");
}

#[test]
fn list_models_prints_seven_families() {
    let out = bin().arg("list-models").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, catalog::list_models());
    assert!(text.contains("GARCH(1,1)") && text.contains("SRE/Kesten"));
    let families = text.lines().filter(|l| !l.starts_with(' ')).count();
    assert_eq!(families, 7);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["run"]).output().unwrap().status.code(), Some(2));
    let missing = bin().args(["run", "/nonexistent/config.toml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let zero = bin()
        .args(["--threads", "0", "run"])
        .arg(configs_dir().join("differenced.toml"))
        .output()
        .unwrap();
    assert_eq!(zero.status.code(), Some(2));
}

#[test]
fn differenced_model_confirms_the_degenerate_limit() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("run")
        .arg(configs_dir().join("differenced.toml"))
        .env("STABLIM_OUT", dir.path())
        .env("STABLIM_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("verdict = degenerate limit confirmed"), "{summary}");
    assert!(summary.contains("overall = pass"));
}

#[test]
fn reports_embed_seed_and_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    let text = std::fs::read_to_string(configs_dir().join("iid_pareto.toml"))
        .unwrap()
        .replace("n = 10000", "n = 1000")
        .replace("replicates = 10000", "replicates = 500")
        .replace("d_max = 16", "d_max = 8\nm_grid = [5, 50]\n\n[options]\nblocks = 50000\nprofile_length = 20000\ndiag_replicates = 100");
    std::fs::write(&cfg, &text).unwrap();
    let hash = stablim_cli::run::config_hash(text.as_bytes());
    let o = run_file(
        &cfg,
        &RunOptions {
            out: Some(dir.path().join("a")),
            seed: Some(99),
            threads: Some(1),
        },
    )
    .unwrap();
    assert_eq!(o.seed, 99);
    assert_eq!(o.config_sha256, hash);
    for name in &o.files {
        let body = std::fs::read_to_string(o.out_dir.join(name)).unwrap();
        if name.ends_with(".csv") {
            let mut lines = body.lines();
            assert!(lines.next().unwrap().ends_with(",seed,config_sha256"), "{name}");
            for l in lines {
                assert!(l.ends_with(&format!(",99,{hash}")), "{name}: {l}");
            }
        } else {
            assert!(body.starts_with(&format!("[run]\nseed = 99\nconfig_sha256 = {hash}\n")), "{name}");
        }
    }
    // a different seed changes the numbers but not the layout
    let p = run_file(
        &cfg,
        &RunOptions {
            out: Some(dir.path().join("b")),
            seed: Some(100),
            threads: Some(1),
        },
    )
    .unwrap();
    assert_eq!(o.files, p.files);
    let a = std::fs::read_to_string(o.out_dir.join("b_table.csv")).unwrap();
    let b = std::fs::read_to_string(p.out_dir.join("b_table.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn alpha_one_is_refused_for_recursive_models() {
    let text = r#"seed = 1
output = "unused"
tasks = ["convergence"]

[model]
kind = "sre"

[model.a]
law = "log_normal"
mu = -0.5
sigma2 = 1.0

[model.b]
law = "constant"
value = 1.0

[sizes]
n = 1000
replicates = 100
d_max = 8
"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sre.toml");
    std::fs::write(&cfg, text).unwrap();
    let e = run_file(&cfg, &RunOptions::default()).unwrap_err();
    assert!(matches!(&e, CliError::Validation(m) if m.contains("alpha = 1")), "{e}");
}

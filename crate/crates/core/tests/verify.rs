use stablim::models::*;
use stablim::stable::{sample_stable, stable_cf, StableLimitParams};
use stablim::tail::{Centered, FullyDependent, Normalization};
use stablim::verify::*;

fn iid(alpha: f64, p: f64) -> ModelSpec {
    ModelSpec::new(ModelKind::IidRv {
        noise: NoiseSpec::pareto(alpha, p, 1.0),
    })
}

#[test]
fn stable_self_test_and_wrong_alpha() {
    let p = StableLimitParams::new(0.5, 1.0, 0.0).unwrap();
    let s = sample_stable(&p, 1_000_000, 2);
    let grid = default_grid();
    let d = cf_distance(&s, &p, &grid);
    assert!(d.distance < 0.01, "{}", d.distance);
    for pt in &d.points {
        assert!(pt.gap < 3.0 / 1000.0 * 2f64.sqrt(), "{pt:?}");
    }
    let wrong = StableLimitParams::new(1.5, 1.0, 0.0).unwrap();
    let analytic = grid
        .iter()
        .map(|&x| (stable_cf(&p, x) - stable_cf(&wrong, x)).norm())
        .fold(0.0, f64::max);
    let d = cf_distance(&s, &wrong, &grid);
    assert!(analytic > 0.1);
    assert!((d.distance - analytic).abs() < 0.01, "{} vs {analytic}", d.distance);
    assert!(!d.passes());
}

#[test]
fn ks_behaviour() {
    let p = StableLimitParams::new(1.3, 0.6, 0.4).unwrap();
    let n = 100_000;
    let s = sample_stable(&p, n, 8);
    // same seed on both sides still compares independent streams
    let r = ks_distance(&s, &p, n, 8).unwrap();
    assert!(r.statistic > 0.0 && r.passes(), "{r:?}");
    let shifted: Vec<f64> = s.iter().map(|v| v + 1.0).collect();
    assert!(!ks_distance(&shifted, &p, n, 9).unwrap().passes());
    let zero = StableLimitParams::new(1.3, 0.0, 0.0).unwrap();
    let r = ks_distance(&vec![1e-9; 1000], &zero, 10, 1).unwrap();
    assert!(r.degenerate && r.passes());
    assert!(!ks_distance(&s, &zero, 10, 1).unwrap().passes());
}

#[test]
fn iid_pareto_half_converges_without_centering() {
    let m = iid(0.5, 1.0);
    let norm = Normalization::closed_form(&m).unwrap();
    let s = partial_sum_sample(&SumExperiment::new(m, 10_000, 10_000, norm), 0.5, 3).unwrap();
    let p = StableLimitParams::new(0.5, 1.0, 0.0).unwrap();
    let r = ConvergenceReport::evaluate(&s, &p, &default_grid(), 100_000, 10_000, 4).unwrap();
    assert!(r.verdict.passed(), "{}", r.record());
}

#[test]
fn differenced_sums_concentrate_at_zero() {
    let m = ModelSpec::new(ModelKind::Differenced {
        noise: NoiseSpec::pareto(0.8, 0.7, 1.0),
    });
    let norm = Normalization::power_law(2.0, 0.8, false);
    let s = partial_sum_sample(&SumExperiment::new(m, 100_000, 2_000, norm), 0.8, 5).unwrap();
    assert!(s.abs_quantile(0.99) < 0.05, "{}", s.abs_quantile(0.99));
    let zero = StableLimitParams::new(0.8, 0.0, 0.0).unwrap();
    let r = ConvergenceReport::evaluate(&s, &zero, &default_grid(), 0, 100_000, 6).unwrap();
    assert_eq!(r.verdict.label(), "degenerate limit confirmed");
}

#[test]
fn sas_sums_are_exactly_stable_for_every_n() {
    let alpha = 1.2;
    let m = ModelSpec::new(ModelKind::SasMa {
        coeffs: vec![1.0],
        alpha,
    });
    let p = sas_innovation_limit(alpha);
    for n in [2usize, 7, 50] {
        let norm = Normalization::power_law(1.0, alpha, false);
        let s = partial_sum_sample(&SumExperiment::new(m.clone(), n, 20_000, norm), alpha, n as u64).unwrap();
        let r = ks_distance(&s.values, &p, 20_000, 1).unwrap();
        assert!(r.passes(), "n = {n}: {r:?}");
    }
}

#[test]
fn anticlustering_for_independent_and_fully_dependent_sequences() {
    let alpha = 1.0;
    let m = iid(alpha, 0.5);
    let norm = Normalization::closed_form(&m).unwrap();
    let (n, d, mm) = (10_000, 1, 100);
    let p = anticluster_diag(&m, &norm, d, mm, 1.0, n, 20_000, 1).unwrap();
    let exact = 1.0 - (1.0 - 1.0 / n as f64).powi((mm - d + 1) as i32);
    assert!((p.probability - exact).abs() < 3.0 * p.se, "{p:?} vs {exact}");
    let fd = anticluster_diag(&FullyDependent(NoiseSpec::pareto(alpha, 0.5, 1.0)), &norm, 1, 20, 1.0, 100, 20_000, 2).unwrap();
    assert_eq!(fd.probability, 1.0);
}

#[test]
fn garch_clusters_fade_with_the_gap() {
    let m = ModelSpec::new(ModelKind::Garch11 {
        alpha0: 1.0,
        alpha1: 0.5,
        beta1: 0.3,
        noise: NoiseSpec::StandardNormal,
        series: GarchSeries::Returns,
    });
    let n = 10_000;
    let norm = Normalization::empirical(&m, n, 4_000_000, 1).unwrap();
    let near = anticluster_diag(&m, &norm, 1, 200, 1.0, n, 2000, 3).unwrap();
    let far = anticluster_diag(&m, &norm, 50, 200, 1.0, n, 2000, 3).unwrap();
    assert!(near.probability > far.probability + 3.0 * (near.se.powi(2) + far.se.powi(2)).sqrt(), "{near:?} {far:?}");
}

#[test]
fn block_mixing_gap() {
    let grid = [0.5, 1.0, 2.0];
    let m = iid(1.5, 0.5);
    let norm = Normalization::closed_form(&m).unwrap();
    let src = Centered { source: m, mean: 0.0 };
    for p in mixing_block_diag(&src, &norm, 1000, 100, &grid, 20_000, 1).unwrap() {
        assert!(p.gap < 3.0 * p.se, "{p:?}");
    }
    let dm = ModelSpec::new(ModelKind::Differenced {
        noise: NoiseSpec::pareto(0.8, 0.5, 1.0),
    });
    let norm = Normalization::power_law(2.0, 0.8, false);
    let g2 = mixing_block_diag(&dm, &norm, 1000, 2, &[1.0], 20_000, 2).unwrap()[0];
    let g50 = mixing_block_diag(&dm, &norm, 1000, 50, &[1.0], 20_000, 2).unwrap()[0];
    assert!(g2.gap > 5.0 * g2.se && g2.gap > g50.gap + 3.0 * g50.se, "{g2:?} {g50:?}");
}

#[test]
fn large_deviation_level_for_iid_pareto() {
    let m = iid(1.0, 1.0);
    let norm = Normalization::closed_form(&m).unwrap();
    let t = levy_tail_check(&m, &norm, (1.0, 0.0), 1.0, 10, 10_000, &[1.0, 2.0], 2_000_000, 3).unwrap();
    assert!(t.passes(), "{t:?}");
    let (a, b) = (t.rows[0], t.rows[1]);
    assert!((a.empirical - 1.0).abs() < 3.0 * a.se);
    let se = ((b.se / a.empirical).powi(2) + (a.se * b.empirical / a.empirical.powi(2)).powi(2)).sqrt();
    assert!((b.empirical / a.empirical - 0.5).abs() < 3.0 * se);
}

#[test]
fn sums_do_not_depend_on_thread_count() {
    let m = iid(0.8, 0.7);
    let norm = Normalization::closed_form(&m).unwrap();
    let exp = SumExperiment::new(m, 500, 300, norm);
    let run = |k| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .unwrap()
            .install(|| partial_sum_sample(&exp, 0.8, 7).unwrap())
    };
    assert_eq!(run(1), run(4));
}

use stablim::stable::{sample_stable, stable_cf, StableLimitParams};
use stablim::verify::{empirical_cf, ks_quantile, ks_two_sample};

fn params(alpha: f64, cp: f64, cm: f64) -> StableLimitParams {
    StableLimitParams::new(alpha, cp, cm).unwrap()
}

#[test]
fn symmetric_sample_matches_cf_pointwise() {
    let p = params(0.5, 0.5, 0.5);
    let n = 1_000_000;
    let s = sample_stable(&p, n, 17);
    let grid = [0.5, 1.0, 2.0];
    for (x, e) in grid.iter().zip(empirical_cf(&s, &grid)) {
        let th = stable_cf(&p, *x);
        assert!((e - th).norm() < 3.0 / (n as f64).sqrt(), "x = {x}: {e} vs {th}");
    }
}

/// `P(X ≤ 0)` by Gil-Pelaez inversion, `1/2 − (1/π) ∫_0^∞ Im ψ(t)/t dt`.
fn cdf_at_zero(p: &StableLimitParams) -> f64 {
    // substitution t = u^4 tames both ends; Simpson on u ∈ [0, 4]
    let f = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        let t = u.powi(4);
        stable_cf(p, t).im / t * 4.0 * u.powi(3)
    };
    let m = 200_000;
    let h = 4.0 / m as f64;
    let mut acc = f(0.0) + f(4.0);
    for i in 1..m {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    0.5 - acc * h / 3.0 / std::f64::consts::PI
}

#[test]
fn totally_skewed_sample_has_the_inverted_median_mass() {
    let p = params(1.5, 1.0, 0.0);
    let n = 1_000_000;
    let s = sample_stable(&p, n, 5);
    let below = s.iter().filter(|v| **v <= 0.0).count() as f64 / n as f64;
    let exact = cdf_at_zero(&p);
    let se = (exact * (1.0 - exact) / n as f64).sqrt();
    assert!((below - exact).abs() < 3.0 * se, "{below} vs {exact}");
    // the location is zero: the sample mean is near 0 up to heavy-tail noise
    let mean = s.iter().sum::<f64>() / n as f64;
    assert!(mean.abs() < 0.1, "{mean}");
}

fn strict_stability(p: &StableLimitParams, k: usize, seed: u64) {
    let reps = 100_000;
    let draws = sample_stable(p, reps * k, seed);
    let scale = (k as f64).powf(-1.0 / p.alpha());
    let sums: Vec<f64> = draws.chunks(k).map(|c| c.iter().sum::<f64>() * scale).collect();
    let single = sample_stable(p, reps, seed.wrapping_add(1));
    let d = ks_two_sample(&sums, &single);
    let crit = ks_quantile(1e-3) * (2.0 / reps as f64).sqrt();
    assert!(d < crit, "alpha {} k {k}: {d} >= {crit}", p.alpha());
}

#[test]
fn sums_of_iid_copies_are_stable() {
    for (i, p) in [params(0.5, 0.7, 0.3), params(1.5, 1.0, 0.3), params(1.0, 0.5, 0.5)]
        .iter()
        .enumerate()
    {
        for k in [2, 10] {
            strict_stability(p, k, 100 + 10 * i as u64 + k as u64);
        }
    }
}

#[test]
fn sampling_is_reproducible() {
    let p = params(0.8, 0.5, 0.5);
    assert_eq!(sample_stable(&p, 1000, 3), sample_stable(&p, 1000, 3));
    assert_ne!(sample_stable(&p, 10, 3), sample_stable(&p, 10, 4));
}

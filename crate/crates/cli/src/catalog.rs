//! Human-readable catalog of the built-in model families.

/// One model family: display name, config `kind`, defining equation and
/// parameter schema.
#[derive(Debug, Clone, Copy)]
pub struct Family {
    pub name: &'static str,
    pub kind: &'static str,
    pub definition: &'static str,
    pub parameters: &'static [(&'static str, &'static str)],
}

const NOISE: &str = "table; law = two_sided_pareto {alpha, p, q, scale} | symmetrized_pareto {alpha, scale} | student_t {dof} | standard_normal";
const POSITIVE: &str = "table; law = constant {value} | log_normal {mu, sigma2} | uniform {lo, hi} | affine_square {scale, shift, noise}";

pub const FAMILIES: [Family; 7] = [
    Family {
        name: "iid regularly varying",
        kind: "iid_rv",
        definition: "X_t iid with P(|X| > x) ~ C x^-alpha, tail balance (p, q)",
        parameters: &[("noise", NOISE)],
    },
    Family {
        name: "Differenced iid",
        kind: "differenced",
        definition: "X_t = Y_t - Y_{t-1}, Y iid; partial sums telescope, degenerate limit",
        parameters: &[("noise", NOISE)],
    },
    Family {
        name: "m-dependent moving average",
        kind: "m_dependent",
        definition: "X_t = sum_j coeffs[j] Y_{t-j}, Y iid",
        parameters: &[("noise", NOISE), ("coeffs", "array of reals, at least one nonzero")],
    },
    Family {
        name: "SRE/Kesten",
        kind: "sre",
        definition: "X_t = A_t X_{t-1} + B_t, (A_t, B_t) iid positive, E log A < 0, tail index solves E A^alpha = 1",
        parameters: &[("a", POSITIVE), ("b", POSITIVE), ("burn_in", "optional integer, default 10000")],
    },
    Family {
        name: "GARCH(1,1)",
        kind: "garch11",
        definition: "X_t = sigma_t Z_t, sigma_t^2 = alpha0 + (alpha1 Z_{t-1}^2 + beta1) sigma_{t-1}^2",
        parameters: &[
            ("alpha0", "real > 0"),
            ("alpha1", "real >= 0"),
            ("beta1", "real in [0,1)"),
            ("noise", "symmetric unit-variance noise table"),
            ("series", "returns | squared | volatility, default squared"),
            ("burn_in", "optional integer, default 10000"),
        ],
    },
    Family {
        name: "Stochastic volatility",
        kind: "stoch_vol",
        definition: "X_t = sigma_t Z_t, log sigma_t a causal Gaussian ARMA independent of Z",
        parameters: &[
            ("ar", "array of reals, causal, default []"),
            ("ma", "array of reals, invertible, default []"),
            ("noise", NOISE),
            ("burn_in", "optional integer, default 10000"),
        ],
    },
    Family {
        name: "Symmetric alpha-stable moving average",
        kind: "sas_ma",
        definition: "X_t = sum_j coeffs[j] Y_{t-j}, Y iid symmetric alpha-stable with c+ = c- = 1/2",
        parameters: &[("coeffs", "array of reals, at least one nonzero"), ("alpha", "real in (0,2)")],
    },
];

/// The catalog printed by `list-models`.
pub fn list_models() -> String {
    let mut out = String::new();
    for f in &FAMILIES {
        out.push_str(&format!("{} (kind = \"{}\")\n  {}\n", f.name, f.kind, f.definition));
        for (k, v) in f.parameters {
            out.push_str(&format!("    {k}: {v}\n"));
        }
    }
    out
}

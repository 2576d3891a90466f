//! Closed-form sample-complexity bounds and the tail and order-statistic
//! helpers behind them.
//!
//! Every bound carries an absolute constant `c1` that the theory leaves
//! unspecified; it defaults to 1, so outputs are order-of-magnitude only.
//! Logarithms are natural.

use std::f64::consts::{FRAC_2_SQRT_PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use libm::erfc;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, param, Error, Result};
use crate::rng;
use crate::sets::{gaussian_vector, Estimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SubspaceGlobal,
    ArbitraryGlobal,
    SubspaceLocal,
    ArbitraryLocal,
    GeneralSharp,
    GeneralSharpLocal,
    StructuredOptimal,
    SketchedGaussian,
    #[serde(rename = "sketched_fjlt")]
    SketchedFjlt,
}

impl Regime {
    pub const ALL: [Regime; 9] = [
        Regime::SubspaceGlobal,
        Regime::ArbitraryGlobal,
        Regime::SubspaceLocal,
        Regime::ArbitraryLocal,
        Regime::GeneralSharp,
        Regime::GeneralSharpLocal,
        Regime::StructuredOptimal,
        Regime::SketchedGaussian,
        Regime::SketchedFjlt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Regime::SubspaceGlobal => "subspace_global",
            Regime::ArbitraryGlobal => "arbitrary_global",
            Regime::SubspaceLocal => "subspace_local",
            Regime::ArbitraryLocal => "arbitrary_local",
            Regime::GeneralSharp => "general_sharp",
            Regime::GeneralSharpLocal => "general_sharp_local",
            Regime::StructuredOptimal => "structured_optimal",
            Regime::SketchedGaussian => "sketched_gaussian",
            Regime::SketchedFjlt => "sketched_fjlt",
        }
    }

    /// The formula evaluated by [`required_samples`], for display.
    pub fn formula(self) -> &'static str {
        match self {
            Regime::SubspaceGlobal => "c1 * omega_sq / delta^2",
            Regime::ArbitraryGlobal => "c1 * omega_sq * delta^-4 * ln(1/delta)",
            Regime::SubspaceLocal => "c1 * omega_sq * delta^-1 * ln(1/delta)",
            Regime::ArbitraryLocal => "c1 * omega_sq * delta^-3 * ln(1/delta)",
            Regime::GeneralSharp => "c1 * max(delta^-2 * log_n_eps, delta^-3 * omega_sq_local)",
            Regime::GeneralSharpLocal => "c1 * max(delta^-1 * log_n_eps, delta^-3 * omega_sq_local)",
            Regime::StructuredOptimal => "c1 * delta^-2 * c_k",
            Regime::SketchedGaussian => "c1 * delta^-2 * m_lin, m_lin = c1 * delta^-2 * omega_sq",
            Regime::SketchedFjlt => "c1 * delta^-2 * m_lin, m_lin = c1 * (1 + eta)^2 * delta^-4 * ln(n)^4 * omega_sq",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Regime::ALL.into_iter().find(|r| r.name() == key).ok_or_else(|| param(format!("unknown regime '{s}'")))
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityQuery {
    pub regime: Regime,
    pub omega_sq: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_n_eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_sq_local: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_k: Option<f64>,
    /// Ambient dimension, used by the FJLT sketch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient_dim: Option<usize>,
    /// FJLT failure-probability exponent; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default = "one")]
    pub c1: f64,
}

impl ComplexityQuery {
    pub fn new(regime: Regime, omega_sq: f64, delta: f64) -> Self {
        Self {
            regime,
            omega_sq,
            delta,
            log_n_eps: None,
            omega_sq_local: None,
            c_k: None,
            ambient_dim: None,
            eta: None,
            c1: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(param(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        let named = [
            ("omega_sq", Some(self.omega_sq)),
            ("log_n_eps", self.log_n_eps),
            ("omega_sq_local", self.omega_sq_local),
            ("c_k", self.c_k),
            ("eta", self.eta),
            ("c1", Some(self.c1)),
        ];
        for (name, value) in named {
            if let Some(v) = value {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(param(format!("{name} must be finite and nonnegative, got {v}")));
                }
            }
        }
        Ok(())
    }

    fn require(value: Option<f64>, name: &str, regime: Regime) -> Result<f64> {
        value.ok_or_else(|| param(format!("regime {regime} needs {name}")))
    }
}

/// Dimension of the intermediate linear sketch for the sketched regimes,
/// `None` for the others.
pub fn sketch_dimension(q: &ComplexityQuery) -> Result<Option<f64>> {
    q.validate()?;
    let d = q.delta;
    Ok(match q.regime {
        Regime::SketchedGaussian => Some(q.c1 * q.omega_sq / d / d),
        Regime::SketchedFjlt => {
            let n = q.ambient_dim.ok_or_else(|| param("regime sketched_fjlt needs ambient_dim"))?;
            if n < 2 {
                return Err(param("ambient_dim must be at least 2"));
            }
            let eta = q.eta.unwrap_or(1.0);
            Some(q.c1 * (1.0 + eta).powi(2) * (n as f64).ln().powi(4) * q.omega_sq / d.powi(4))
        }
        _ => None,
    })
}

/// Number of measurements the regime's bound asks for.
pub fn required_samples(q: &ComplexityQuery) -> Result<f64> {
    q.validate()?;
    let (c1, w, d) = (q.c1, q.omega_sq, q.delta);
    let log_inv = (1.0 / d).ln();
    let m = match q.regime {
        Regime::SubspaceGlobal => c1 * w / d / d,
        Regime::ArbitraryGlobal => c1 * w * log_inv / d.powi(4),
        Regime::SubspaceLocal => c1 * w * log_inv / d,
        Regime::ArbitraryLocal => c1 * w * log_inv / d.powi(3),
        Regime::GeneralSharp | Regime::GeneralSharpLocal => {
            let log_n = ComplexityQuery::require(q.log_n_eps, "log_n_eps", q.regime)?;
            let local = ComplexityQuery::require(q.omega_sq_local, "omega_sq_local", q.regime)?;
            let cover_power = if q.regime == Regime::GeneralSharp { 2 } else { 1 };
            c1 * (log_n / d.powi(cover_power)).max(local / d.powi(3))
        }
        Regime::StructuredOptimal => c1 * ComplexityQuery::require(q.c_k, "c_k", q.regime)? / d / d,
        Regime::SketchedGaussian | Regime::SketchedFjlt => {
            let m_lin = sketch_dimension(q)?.expect("sketched regime");
            c1 * m_lin / d / d
        }
    };
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverKind {
    /// `log N_ε ≤ c·ω²/ε²`, any set.
    Sudakov,
    /// `log N_ε ≤ d·ln(c/ε)` for a `d`-dimensional subspace.
    Subspace,
}

/// Upper bound on the log covering number at scale `eps`.
pub fn cover_bound(kind: CoverKind, omega_sq_or_d: f64, eps: f64, c: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(param(format!("eps must lie in (0, 1], got {eps}")));
    }
    if c.is_nan() || c <= 0.0 {
        return Err(param(format!("c must be positive, got {c}")));
    }
    Ok(match kind {
        CoverKind::Sudakov => c * omega_sq_or_d / (eps * eps),
        CoverKind::Subspace => omega_sq_or_d * (c / eps).ln(),
    })
}

fn sorted_magnitudes(x: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > x.len() {
        return Err(param(format!("k must lie in [1, {}], got {k}", x.len())));
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(mags)
}

/// Sum of the `k` largest magnitudes of `x`.
pub fn k_plus(x: &[f64], k: usize) -> Result<f64> {
    Ok(sorted_magnitudes(x, k)?[..k].iter().sum())
}

/// Sum of the `k` smallest magnitudes of `x`.
pub fn k_minus(x: &[f64], k: usize) -> Result<f64> {
    let mags = sorted_magnitudes(x, k)?;
    Ok(mags[mags.len() - k..].iter().sum())
}

/// Holds iff `k_minus(x, k) > k_plus(y, k)` implies that `sgn(x)` and
/// `sgn(x + y)` differ in fewer than `k` places. It should never be false.
pub fn sign_stability_check(x: &[f64], y: &[f64], k: usize) -> Result<bool> {
    check_dim(x.len(), y.len())?;
    if k_minus(x, k)? <= k_plus(y, k)? {
        return Ok(true);
    }
    let flips = x.iter().zip(y).filter(|&(&a, &b)| (a >= 0.0) != (a + b >= 0.0)).count();
    Ok(flips < k)
}

/// `Q(a) = P(|g| ≥ a) = erfc(a/√2)`.
pub fn q_function(a: f64) -> Result<f64> {
    if a.is_nan() || a < 0.0 {
        return Err(param(format!("Q is defined for a >= 0, got {a}")));
    }
    Ok(erfc(a / SQRT_2))
}

/// The `γ` with `P(|g| ≤ γ) = alpha`, to about 1e-12 absolute.
pub fn gamma_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    // Solve Q(γ) = 1 − α: working with the tail keeps precision near α = 1.
    let target = 1.0 - alpha;
    let f = |g: f64| erfc(g / SQRT_2) - target;
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    let mut g = 0.0;
    for _ in 0..200 {
        let fg = f(g);
        if fg > 0.0 {
            lo = g;
        } else {
            hi = g;
        }
        // Q'(γ) = −√(2/π)·exp(−γ²/2)
        let slope = -FRAC_2_SQRT_PI / SQRT_2 * (-0.5 * g * g).exp();
        let mut next = g - fg / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - g).abs() <= 1e-14 * next.max(1.0) {
            return Ok(next);
        }
        g = next;
    }
    Ok(g)
}

/// Bernoulli KL divergence `D(p‖q)`.
pub fn kl_divergence(p: f64, q: f64) -> Result<f64> {
    for (name, v) in [("p", p), ("q", q)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(param(format!("{name} must lie in (0, 1), got {v}")));
        }
    }
    Ok(p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln())
}

/// `exp(−2δ²m)`: failure probability for a single pair.
pub fn chernoff_envelope(delta: f64, m: usize) -> f64 {
    (-2.0 * delta * delta * m as f64).exp()
}

/// `exp(−ε²n/(4p))`, bounding `P(|mean − q| > ε)` for `n` Bernoulli-`q`
/// variables with `q ≤ p`.
pub fn modified_chernoff(eps: f64, p: f64, n: usize) -> Result<f64> {
    if !(p > 0.0 && p < 1.0 / 3.0) {
        return Err(param(format!("p must lie in (0, 1/3), got {p}")));
    }
    if !(eps > 0.0 && eps <= p / 2.0) {
        return Err(param(format!("eps must lie in (0, p/2], got {eps}")));
    }
    Ok((-eps * eps * n as f64 / (4.0 * p)).exp())
}

/// `2·exp(−ε²m/(4μ))`, bounding the deviation probability of a mean of `m`
/// i.i.d. `{−1, 0, 1}` variables with `P(±1) ≤ μ/2`.
pub fn ternary_concentration_bound(eps: f64, mu: f64, m: usize) -> Result<f64> {
    if !(mu > 0.0 && mu <= 1.0 / 3.0) {
        return Err(param(format!("mu must lie in (0, 1/3], got {mu}")));
    }
    if !(eps > 0.0 && eps <= mu / 2.0) {
        return Err(param(format!("eps must lie in (0, mu/2], got {eps}")));
    }
    Ok(2.0 * (-eps * eps * m as f64 / (4.0 * mu)).exp())
}

fn order_count(delta: f64, len: usize) -> Result<usize> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(param(format!("delta must lie in (0, 1], got {delta}")));
    }
    let k = (delta * len as f64).floor() as usize;
    if k == 0 {
        return Err(param(format!("delta * {len} must be at least 1")));
    }
    Ok(k)
}

/// `1 − exp(−δm/32)`: the claimed lower bound on the success probability
/// in [`k_minus_tail_check`].
pub fn k_minus_tail_bound(delta: f64, m: usize) -> f64 {
    1.0 - (-delta * m as f64 / 32.0).exp()
}

/// Fraction of standard Gaussian `g ∈ R^m` with `k_minus(g, ⌊δm⌋) ≥ mδ²/8`.
pub fn k_minus_tail_check(delta: f64, m: usize, trials: usize, seed: u64) -> Result<Estimate> {
    let k = order_count(delta, m)?;
    if trials == 0 {
        return Err(param("trials must be positive"));
    }
    let threshold = m as f64 * delta * delta / 8.0;
    let hits: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let g = gaussian_vector(m, &mut rng::trial(seed, t));
            f64::from(u8::from(k_minus(&g, k).expect("k in range") >= threshold))
        })
        .collect();
    Ok(Estimate::from_samples(&hits))
}

/// Monte Carlo estimate of `E k_plus(g, k) / (k·√ln(1/δ))` for standard
/// Gaussian `g ∈ R^n` and `k = ⌊δn⌋`: the constant in the top-order
/// statistic bound.
pub fn k_plus_constant(n: usize, delta: f64, trials: usize, seed: u64) -> Result<Estimate> {
    let k = order_count(delta, n)?;
    if delta >= 1.0 {
        return Err(param("delta must be below 1"));
    }
    if trials == 0 {
        return Err(param("trials must be positive"));
    }
    let norm = k as f64 * (1.0 / delta).ln().sqrt();
    let samples: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut g = gaussian_vector(n, &mut rng::trial(seed, t));
            for v in &mut g {
                *v = v.abs();
            }
            g.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
            g[..k].iter().sum::<f64>() / norm
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng as _;
    use rand_distr::{Binomial, Distribution};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn complexity_examples() {
        let q = ComplexityQuery::new(Regime::SubspaceGlobal, 9.0, 0.1);
        assert!(close(required_samples(&q).unwrap(), 900.0, 1e-12));

        let q = ComplexityQuery::new(Regime::ArbitraryGlobal, 1.0, (-1.0f64).exp());
        assert!(close(required_samples(&q).unwrap(), 4.0f64.exp(), 1e-12));

        let mut q = ComplexityQuery::new(Regime::GeneralSharp, 5.0, 0.2);
        q.log_n_eps = Some(0.0);
        q.omega_sq_local = Some(0.0);
        assert_eq!(required_samples(&q).unwrap(), 0.0);

        let mut q = ComplexityQuery::new(Regime::SubspaceLocal, 2.0, 0.5);
        q.c1 = 3.0;
        assert!(close(required_samples(&q).unwrap(), 3.0 * 2.0 * 2.0f64.ln() / 0.5, 1e-12));
    }

    #[test]
    fn sharp_bound_picks_the_larger_term() {
        let mut q = ComplexityQuery::new(Regime::GeneralSharp, 0.0, 0.1);
        q.log_n_eps = Some(10.0);
        q.omega_sq_local = Some(0.5);
        assert!(close(required_samples(&q).unwrap(), 1000.0, 1e-12));
        q.omega_sq_local = Some(2.0);
        assert!(close(required_samples(&q).unwrap(), 2000.0, 1e-12));
        q.regime = Regime::GeneralSharpLocal;
        q.omega_sq_local = Some(0.05);
        assert!(close(required_samples(&q).unwrap(), 100.0, 1e-12));
    }

    #[test]
    fn sketched_regimes() {
        let q = ComplexityQuery::new(Regime::SketchedGaussian, 4.0, 0.5);
        assert!(close(sketch_dimension(&q).unwrap().unwrap(), 16.0, 1e-12));
        assert!(close(required_samples(&q).unwrap(), 64.0, 1e-12));

        let mut q = ComplexityQuery::new(Regime::SketchedFjlt, 1.0, 0.5);
        assert!(required_samples(&q).is_err());
        q.ambient_dim = Some(3);
        let l = 3.0f64.ln().powi(4);
        assert!(close(sketch_dimension(&q).unwrap().unwrap(), 4.0 * 16.0 * l, 1e-12));
        q.eta = Some(0.0);
        assert!(close(required_samples(&q).unwrap(), 4.0 * 16.0 * l, 1e-12));
        assert_eq!(sketch_dimension(&ComplexityQuery::new(Regime::SubspaceGlobal, 1.0, 0.5)).unwrap(), None);
    }

    #[test]
    fn complexity_errors() {
        for r in [Regime::GeneralSharp, Regime::GeneralSharpLocal, Regime::StructuredOptimal] {
            assert!(required_samples(&ComplexityQuery::new(r, 1.0, 0.1)).is_err(), "{r}");
        }
        let mut q = ComplexityQuery::new(Regime::StructuredOptimal, 1.0, 0.1);
        q.c_k = Some(2.0);
        assert!(close(required_samples(&q).unwrap(), 200.0, 1e-12));
        for delta in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(required_samples(&ComplexityQuery::new(Regime::SubspaceGlobal, 1.0, delta)).is_err());
        }
        assert!(required_samples(&ComplexityQuery::new(Regime::SubspaceGlobal, -1.0, 0.1)).is_err());
        q.c1 = -1.0;
        assert!(required_samples(&q).is_err());
    }

    #[test]
    fn required_samples_monotone() {
        for r in Regime::ALL {
            let at = |w: f64, d: f64| {
                let mut q = ComplexityQuery::new(r, w, d);
                q.log_n_eps = Some(w * 2.0);
                q.omega_sq_local = Some(w * 0.1);
                q.c_k = Some(w * 3.0);
                q.ambient_dim = Some(128);
                required_samples(&q).unwrap()
            };
            for i in 1..60 {
                let d = i as f64 / 61.0;
                let d2 = (i + 1) as f64 / 61.0;
                assert!(at(4.0, d2) <= at(4.0, d), "{r} in delta at {d}");
                assert!(at(4.0, d) <= at(5.0, d), "{r} in omega at {d}");
            }
        }
    }

    #[test]
    fn regime_parsing_and_json() {
        assert_eq!("subspace-global".parse::<Regime>().unwrap(), Regime::SubspaceGlobal);
        assert_eq!("Sketched_FJLT".parse::<Regime>().unwrap(), Regime::SketchedFjlt);
        assert!("global".parse::<Regime>().is_err());
        for r in Regime::ALL {
            let json = serde_json::to_string(&r).unwrap();
            assert_eq!(json, format!("\"{}\"", r.name()));
            assert_eq!(serde_json::from_str::<Regime>(&json).unwrap(), r);
        }
        let q: ComplexityQuery =
            serde_json::from_str(r#"{"regime":"subspace_global","omega_sq":9,"delta":0.1}"#).unwrap();
        assert_eq!(q.c1, 1.0);
    }

    #[test]
    fn cover_examples() {
        assert!(close(cover_bound(CoverKind::Sudakov, 4.0, 0.5, 1.0).unwrap(), 16.0, 1e-12));
        assert!(close(cover_bound(CoverKind::Subspace, 3.0, 1.0, std::f64::consts::E).unwrap(), 3.0, 1e-12));
        assert!(cover_bound(CoverKind::Sudakov, 4.0, 0.0, 1.0).is_err());
        assert!(cover_bound(CoverKind::Sudakov, 4.0, 1.5, 1.0).is_err());
        assert!(cover_bound(CoverKind::Subspace, 4.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn k_norm_examples() {
        let x = [3.0, 1.0, -2.0];
        assert_eq!(k_plus(&x, 2).unwrap(), 5.0);
        assert_eq!(k_minus(&x, 2).unwrap(), 3.0);
        assert_eq!(k_plus(&x, 3).unwrap(), 6.0);
        assert_eq!(k_minus(&x, 3).unwrap(), 6.0);
        assert!(k_plus(&x, 0).is_err());
        assert!(k_minus(&x, 4).is_err());
    }

    #[test]
    fn sign_stability_examples() {
        assert!(sign_stability_check(&[5.0, 5.0, 5.0], &[1.0, 1.0, 1.0], 1).unwrap());
        let x = [0.5, -2.0, 1.0];
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!(sign_stability_check(&x, &y, 1).unwrap());
        // Zero maps to +1, so adding a small negative entry can flip it.
        assert!(sign_stability_check(&[0.0, 1.0], &[-0.1, 0.0], 1).unwrap());
        assert!(sign_stability_check(&[1.0], &[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn sign_stability_random_fuzz() {
        let mut rng = rng::stream(17, 0);
        for _ in 0..200_000 {
            let n = rng.random_range(1..=16);
            let k = rng.random_range(1..=n);
            let scale: f64 = rng.random_range(0.01..3.0);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
            assert!(sign_stability_check(&x, &y, k).unwrap(), "{x:?} {y:?} {k}");
        }
    }

    #[test]
    fn q_and_gamma() {
        assert_eq!(q_function(0.0).unwrap(), 1.0);
        assert!(q_function(-0.1).is_err());
        // P(|g| ≥ 1.959963984540054) = 0.05
        assert!((q_function(1.959963984540054).unwrap() - 0.05).abs() < 1e-15);
        assert!((gamma_alpha(0.5).unwrap() - 0.674_489_750_196_081_7).abs() < 1e-12);
        for a in [0.0, 1.0, -0.2, 1.2, f64::NAN] {
            assert!(gamma_alpha(a).is_err());
        }
    }

    /// Plain bisection on `erf`, for cross-checking.
    fn gamma_bisect(alpha: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 40.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 1.0 - erfc(mid / SQRT_2) < alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn gamma_grid() {
        for i in 1..=99 {
            let alpha = i as f64 / 100.0;
            let g = gamma_alpha(alpha).unwrap();
            assert!((q_function(g).unwrap() - (1.0 - alpha)).abs() < 1e-10);
            assert!((g - gamma_bisect(alpha)).abs() < 1e-9, "{alpha}");
            assert!(g >= (std::f64::consts::PI / 2.0).sqrt() * alpha, "{alpha}");
        }
        for alpha in [1e-9, 1e-4, 0.9999, 1.0 - 1e-9] {
            let g = gamma_alpha(alpha).unwrap();
            assert!((q_function(g).unwrap() - (1.0 - alpha)).abs() < 1e-10, "{alpha}");
        }
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(0.3, 0.3).unwrap(), 0.0);
        // 0.5·ln 2 + 0.5·ln(2/3)
        assert!((kl_divergence(0.5, 0.25).unwrap() - 0.143_841_036_225_890_4).abs() < 1e-12);
        for (p, q) in [(0.0, 0.5), (0.5, 1.0), (1.0, 0.5), (0.5, 0.0)] {
            assert!(kl_divergence(p, q).is_err());
        }
    }

    #[test]
    fn kl_shift_monotonicity() {
        // Shifting both arguments toward zero by the same amount increases D.
        let mut rng = rng::stream(3, 0);
        for _ in 0..10_000 {
            let p1 = rng.random_range(1e-3..0.5);
            let p2 = rng.random_range(0.0..p1);
            if p2 <= 0.0 {
                continue;
            }
            let d = rng.random_range(0.0..p2);
            if d <= 0.0 {
                continue;
            }
            let (q1, q2) = (p1 - d, p2 - d);
            let tol = 1e-12;
            assert!(kl_divergence(q1, q2).unwrap() + tol >= kl_divergence(p1, p2).unwrap());
            assert!(kl_divergence(q2, q1).unwrap() + tol >= kl_divergence(p2, p1).unwrap());
        }
    }

    #[test]
    fn chernoff_examples() {
        assert!((chernoff_envelope(0.1, 1000) - (-20.0f64).exp()).abs() < 1e-22);
        assert!((modified_chernoff(0.05, 0.2, 1000).unwrap() - (-3.125f64).exp()).abs() < 1e-15);
        assert!(modified_chernoff(0.2, 0.2, 10).is_err());
        assert!(modified_chernoff(0.05, 0.34, 10).is_err());
        // ε²m/(4μ) = 0.01·400/0.8 = 5
        assert!((ternary_concentration_bound(0.1, 0.2, 400).unwrap() - 2.0 * (-5.0f64).exp()).abs() < 1e-15);
        assert!(ternary_concentration_bound(0.11, 0.2, 400).is_err());
        assert!(ternary_concentration_bound(0.1, 0.34, 400).is_err());
    }

    #[test]
    fn bernoulli_deviations_respect_bound() {
        let (n, p, eps, trials) = (1000u64, 0.2, 0.05, 100_000u64);
        let bound = modified_chernoff(eps, p, n as usize).unwrap();
        let bin = Binomial::new(n, p).unwrap();
        let mut rng = rng::stream(5, 0);
        let hits = (0..trials).filter(|_| (bin.sample(&mut rng) as f64 / n as f64 - p).abs() > eps).count();
        let freq = hits as f64 / trials as f64;
        assert!(freq <= bound, "{freq} > {bound}");
    }

    #[test]
    fn ternary_deviations_respect_bound() {
        let (mu, eps, m, trials) = (0.2, 0.03, 400u64, 100_000u64);
        let bound = ternary_concentration_bound(eps, mu, m as usize).unwrap();
        let nonzero = Binomial::new(m, mu).unwrap();
        let mut rng = rng::stream(6, 0);
        let mut hits = 0;
        for _ in 0..trials {
            // Each nonzero draw is +1 or −1 with equal odds.
            let nz = nonzero.sample(&mut rng);
            let pos = Binomial::new(nz, 0.5).unwrap().sample(&mut rng);
            let mean = (2.0 * pos as f64 - nz as f64) / m as f64;
            hits += usize::from(mean.abs() > eps);
        }
        let freq = hits as f64 / trials as f64;
        assert!(freq <= bound, "{freq} > {bound}");
    }

    #[test]
    fn k_minus_tail_examples() {
        let est = k_minus_tail_check(0.25, 400, 10_000, 1).unwrap();
        let bound = k_minus_tail_bound(0.25, 400);
        assert!((bound - (1.0 - (-3.125f64).exp())).abs() < 1e-15);
        assert!(est.estimate >= bound - 3.0 * est.std_error, "{est:?}");
        assert!(k_minus_tail_check(0.001, 100, 10, 0).is_err());

        // m = 1, δ = 1: the event is |g| ≥ 1/8.
        let est = k_minus_tail_check(1.0, 1, 100_000, 2).unwrap();
        let exact = q_function(0.125).unwrap();
        assert!((est.estimate - exact).abs() <= 4.0 * est.std_error, "{est:?} vs {exact}");
        assert!(est.estimate >= k_minus_tail_bound(1.0, 1));
    }

    #[test]
    fn k_plus_constant_matches_truncated_mean() {
        // For large n the top-k mean of |g| tends to E[|g| | |g| > γ] = 2φ(γ)/δ
        // with γ = gamma_alpha(1 − δ).
        let delta = 1.0 / 16.0;
        let gamma = gamma_alpha(1.0 - delta).unwrap();
        let phi = (-0.5 * gamma * gamma).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let limit = 2.0 * phi / delta / (1.0 / delta).ln().sqrt();
        let est = k_plus_constant(4096, delta, 400, 9).unwrap();
        assert!((est.estimate - limit).abs() < 0.01 * limit, "{est:?} vs {limit}");
        assert!(k_plus_constant(10, 0.05, 10, 0).is_err());
    }

    proptest! {
        #[test]
        fn k_norms_partition_l1(x in prop::collection::vec(-10.0f64..10.0, 2..40), frac in 0.0f64..1.0) {
            let n = x.len();
            let k = 1 + ((n - 1) as f64 * frac) as usize % (n - 1);
            let l1: f64 = x.iter().map(|v| v.abs()).sum();
            prop_assert!((k_plus(&x, k).unwrap() + k_minus(&x, n - k).unwrap() - l1).abs() < 1e-9);
            prop_assert!(k_plus(&x, k).unwrap() >= k_minus(&x, k).unwrap());
            prop_assert!(k_plus(&x, k + 1).unwrap() >= k_plus(&x, k).unwrap());
            prop_assert!(k_minus(&x, k + 1).unwrap() >= k_minus(&x, k).unwrap());
        }
    }
}

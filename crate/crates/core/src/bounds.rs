//! Numeric evaluators for the lower-bound statements: the probability bound
//! on cheap l-covers, its parameter `t`, the minimal `l`, the counting
//! exponent `λ(n, q, ε, l, t)` and the cost floor `(1−ε)n/π`.
//!
//! Every `log` is base 2. The `e^{…}` addend of the probability bound is
//! handled in natural-log space.

use std::f64::consts::{E, LN_2, LOG2_E, PI, SQRT_2};

use crate::error::{Error, Result};

fn check_open(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must lie in (0, 1)")))
    }
}

fn check_probs(p_min: f64, p_max: f64) -> Result<()> {
    check_open("p_min", p_min)?;
    check_open("p_max", p_max)?;
    if p_min > p_max {
        return Err(Error::InvalidParameter(format!("p_min = {p_min} exceeds p_max = {p_max}")));
    }
    Ok(())
}

/// `t = ⌈(100/3)·(log(((1−p_min)/p_min)·(p_max/(1−p_max))) + 1) / (ε(1−δ)p_min)⌉`.
pub fn t_param(epsilon: f64, delta: f64, p_min: f64, p_max: f64) -> Result<u64> {
    check_open("epsilon", epsilon)?;
    check_open("delta", delta)?;
    check_probs(p_min, p_max)?;
    let odds = ((1.0 - p_min) / p_min) * (p_max / (1.0 - p_max));
    let raw = (100.0 / 3.0) * (odds.log2() + 1.0) / (epsilon * (1.0 - delta) * p_min);
    Ok(raw.ceil() as u64)
}

/// `5(1−ε)^{1/6} / (ε(1−δ)p_min)`; independent of `n`.
pub fn min_l_threshold(epsilon: f64, delta: f64, p_min: f64) -> f64 {
    5.0 * (1.0 - epsilon).powf(1.0 / 6.0) / (epsilon * (1.0 - delta) * p_min)
}

/// `(1−ε)·n/π`.
pub fn cover_cost_floor(n: u64, epsilon: f64) -> f64 {
    (1.0 - epsilon) * n as f64 / PI
}

/// Inputs of the probability bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub n: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub l: f64,
    pub t: u64,
}

impl BoundParams {
    pub fn new(n: u64, epsilon: f64, delta: f64, p_min: f64, p_max: f64, l: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let t = t_param(epsilon, delta, p_min, p_max)?;
        Ok(BoundParams { n, epsilon, delta, p_min, p_max, l, t })
    }

    /// Same parameters at another `n`.
    pub fn with_n(&self, n: u64) -> Self {
        BoundParams { n, ..self.clone() }
    }

    /// Base-2 exponent of the first addend:
    /// `−(1/100)(1−δ)ε p_min n + log(4n) + t`.
    pub fn first_exponent_log2(&self) -> f64 {
        let n = self.n as f64;
        -(1.0 - self.delta) * self.epsilon * self.p_min * n / 100.0 + (4.0 * n).log2() + self.t as f64
    }

    /// Natural exponent of the second addend: `−(δ²/2) p_min ⌊n/t⌋ + t`.
    pub fn second_exponent_ln(&self) -> f64 {
        let blocks = (self.n / self.t) as f64;
        -(self.delta * self.delta / 2.0) * self.p_min * blocks + self.t as f64
    }

    /// Below this `n` the first exponent still increases with `n`.
    pub fn monotone_from(&self) -> f64 {
        100.0 / ((1.0 - self.delta) * self.epsilon * self.p_min * LN_2)
    }
}

/// Value of the probability bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    /// The sum of both addends (may underflow to 0 or exceed 1).
    pub value: f64,
    /// Natural log of `value`, exact even when `value` underflows.
    pub ln_value: f64,
    pub first_log2: f64,
    pub second_ln: f64,
    /// Set when `n` is too small for the bound to say anything: either the
    /// value is at least 1 or `n` is still in the range where the bound
    /// grows with `n`.
    pub small_n: bool,
}

fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Upper bound on the probability that the random set has an l-cover of
/// cost at most `(1−ε)n/π`:
/// `2^{−(1/100)(1−δ)ε p_min n + log(4n) + t} + e^{−(δ²/2) p_min ⌊n/t⌋ + t}`.
pub fn theorem2_bound(params: &BoundParams) -> Result<BoundValue> {
    let threshold = min_l_threshold(params.epsilon, params.delta, params.p_min);
    if params.l < threshold {
        return Err(Error::ThresholdViolated { l: params.l, threshold });
    }
    let first_log2 = params.first_exponent_log2();
    let second_ln = params.second_exponent_ln();
    let ln_value = ln_add_exp(first_log2 * LN_2, second_ln);
    let value = ln_value.exp();
    let small_n = ln_value >= 0.0 || (params.n as f64) < params.monotone_from();
    Ok(BoundValue { value, ln_value, first_log2, second_ln, small_n })
}

/// The counting exponent
/// `(−q log e·(1 − (1−ε)(1 + 1/(2l²) + 1/(√2 l))²) + ((1−ε)/(πl²))·log(64eπl⁶/(1−ε)))·n + log(4n) + t`.
pub fn lambda_exponent(n: u64, q: f64, epsilon: f64, l: f64, t: u64) -> Result<f64> {
    if l < E.sqrt() {
        return Err(Error::InvalidParameter(format!("l = {l} is below √e")));
    }
    Ok(lambda_coefficient(q, epsilon, l) * n as f64 + (4.0 * n as f64).log2() + t as f64)
}

/// The coefficient of `n` in [`lambda_exponent`].
pub fn lambda_coefficient(q: f64, epsilon: f64, l: f64) -> f64 {
    let inner = 1.0 + 1.0 / (2.0 * l * l) + 1.0 / (SQRT_2 * l);
    let density = -q * LOG2_E * (1.0 - (1.0 - epsilon) * inner * inner);
    let centers = (1.0 - epsilon) / (PI * l * l) * (64.0 * E * PI * l.powi(6) / (1.0 - epsilon)).log2();
    density + centers
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_param_examples() {
        assert_eq!(t_param(0.5, 0.5, 0.5, 0.5).unwrap(), 267);
        // equal probabilities cancel inside the log
        for p in [0.1, 0.3, 0.9] {
            let expect = ((100.0f64 / 3.0) / (0.2 * 0.5 * p)).ceil() as u64;
            assert_eq!(t_param(0.2, 0.5, p, p).unwrap(), expect);
        }
        assert!(t_param(0.1, 0.5, 0.3, 0.6).unwrap() > t_param(0.2, 0.5, 0.3, 0.6).unwrap());
        assert!(t_param(0.5, 0.5, 0.6, 0.3).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert!((min_l_threshold(0.5, 0.5, 0.5) - 35.635_948_725_613_58).abs() < 1e-9);
        assert!(min_l_threshold(1.0 - 1e-15, 0.5, 0.5) < 0.1);
        assert!(min_l_threshold(0.99, 0.5, 0.5) < min_l_threshold(0.9, 0.5, 0.5));
    }

    #[test]
    fn floor_examples() {
        assert!((cover_cost_floor(169, 0.1) - 48.414_933_688_554_56).abs() < 1e-9);
        assert_eq!(cover_cost_floor(1000, 1.0), 0.0);
        assert!((cover_cost_floor(314, 0.0) - 314.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn small_n_is_flagged_but_computed() {
        let p = BoundParams::new(100, 0.5, 0.5, 0.5, 0.5, 40.0).unwrap();
        let b = theorem2_bound(&p).unwrap();
        assert!(b.small_n);
        assert!(b.value > 1.0);
    }

    #[test]
    fn threshold_is_enforced() {
        let p = BoundParams::new(1_000_000, 0.5, 0.5, 0.5, 0.5, 10.0).unwrap();
        assert!(matches!(theorem2_bound(&p), Err(Error::ThresholdViolated { .. })));
    }

    #[test]
    fn log_space_matches_naive() {
        for n in [1_000u64, 10_000, 100_000, 1_000_000] {
            let p = BoundParams::new(n, 0.5, 0.5, 0.5, 0.5, 40.0).unwrap();
            let b = theorem2_bound(&p).unwrap();
            let naive = 2f64.powf(b.first_log2) + b.second_ln.exp();
            if naive.is_finite() && naive > 0.0 {
                assert!(((b.value - naive) / naive).abs() < 1e-9, "n={n}");
            }
        }
    }

    #[test]
    fn lambda_examples() {
        assert!(lambda_exponent(100, 0.5, 0.5, 1.0, 3).is_err());
        let (q, eps, l, t) = (0.3, 0.2, 4.0, 11);
        for n in [50u64, 1000, 123_456] {
            let d = lambda_exponent(2 * n, q, eps, l, t).unwrap() - lambda_exponent(n, q, eps, l, t).unwrap();
            let want = lambda_coefficient(q, eps, l) * n as f64 + 1.0;
            assert!((d - want).abs() < 1e-6 * want.abs().max(1.0));
        }
    }

    #[test]
    fn lambda_coefficient_changes_sign() {
        // Positive for l near √e, negative once l is large: bracket a root.
        let eps = 0.3;
        let lo = lambda_coefficient(0.5, eps, E.sqrt());
        let hi = lambda_coefficient(0.5, eps, 200.0);
        assert!(lo > 0.0 && hi < 0.0, "{lo} {hi}");
    }
}

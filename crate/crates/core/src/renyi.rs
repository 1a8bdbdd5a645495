//! Rényi entropy functions η_κ and the area-law coefficient they induce.

use serde::{Deserialize, Serialize};

use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Below this distance from 1 the von Neumann branch is used.
pub const VON_NEUMANN_THRESHOLD: f64 = 1e-12;

/// Order κ > 0 of a Rényi entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenyiOrder {
    kappa: f64,
}

impl RenyiOrder {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::invalid(format!("Rényi order must be positive, got {kappa}")));
        }
        Ok(RenyiOrder { kappa })
    }

    /// The von Neumann order κ = 1.
    pub fn von_neumann() -> Self {
        RenyiOrder { kappa: 1.0 }
    }

    pub fn kappa(self) -> f64 {
        self.kappa
    }

    pub fn is_von_neumann(self) -> bool {
        (self.kappa - 1.0).abs() < VON_NEUMANN_THRESHOLD
    }
}

/// η_κ(t); zero outside (0, 1).
pub fn eta(order: RenyiOrder, t: f64) -> f64 {
    if !(t > 0.0 && t < 1.0) {
        return 0.0;
    }
    // η_κ(t) = η_κ(1 - t); work with the smaller of the two.
    let s = if t > 0.5 { 1.0 - t } else { t };
    if s < 1e-300 {
        return 0.0;
    }
    let ln_rest = (-s).ln_1p();
    let value = if order.is_von_neumann() {
        -s * s.ln() - (1.0 - s) * ln_rest
    } else {
        // ln(s^κ + (1-s)^κ) = κ ln(1-s) + ln(1 + (s/(1-s))^κ), no cancellation.
        let k = order.kappa;
        let ratio = (s / (1.0 - s)).powf(k);
        (k * ln_rest + ratio.ln_1p()) / (1.0 - k)
    };
    value.max(0.0)
}

/// [η, η', η''] at t ∈ (0, 1) from the closed-form derivatives.
pub fn eta_derivatives(order: RenyiOrder, t: f64) -> [f64; 3] {
    if !(t > 0.0 && t < 1.0) {
        return [0.0; 3];
    }
    let (s, sign) = if t > 0.5 { (1.0 - t, -1.0) } else { (t, 1.0) };
    let value = eta(order, t);
    let (d1, d2) = if order.is_von_neumann() {
        ((-s).ln_1p() - s.ln(), -1.0 / (s * (1.0 - s)))
    } else {
        let k = order.kappa;
        let r = s / (1.0 - s);
        let denom = 1.0 + r.powf(k);
        let g1 = k * (r.powf(k - 1.0) - 1.0) / ((1.0 - s) * denom);
        let g2 = k * (k - 1.0) * (r.powf(k - 2.0) + 1.0) / ((1.0 - s).powi(2) * denom);
        (g1 / (1.0 - k), (g2 - g1 * g1) / (1.0 - k))
    };
    [value, sign * d1, d2]
}

/// Area-law coefficient (κ + 1) / (6κ).
pub fn theoretical_slope(order: RenyiOrder) -> f64 {
    (order.kappa + 1.0) / (6.0 * order.kappa)
}

/// (1/π²) ∫₀¹ η_κ(t) / (t(1-t)) dt by endpoint-graded Gauss–Legendre.
///
/// The integrand is symmetric about 1/2; on (0, 1/2] the substitution
/// t = s² removes most of the endpoint singularity and dyadic panels in s
/// resolve what is left.
pub fn entropy_integral(order: RenyiOrder, rel_tol: f64) -> Result<f64> {
    if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
        return Err(Error::invalid(format!("rel_tol must lie in (0, 1e-3], got {rel_tol}")));
    }
    let rule = GaussLegendre::cached(32);
    let integrand = |s: f64| {
        let t = s * s;
        2.0 * eta(order, t) / (s * (1.0 - t))
    };
    let top = std::f64::consts::FRAC_1_SQRT_2;
    const STEP: usize = 4;
    const MAX_LEVELS: usize = 480;

    let mut total = 0.0;
    let mut previous = f64::NAN;
    let mut upper = top;
    let mut levels = 0;
    while levels < MAX_LEVELS {
        for _ in 0..STEP {
            let lower = 0.5 * upper;
            total += rule.integrate(lower, upper, integrand);
            upper = lower;
        }
        levels += STEP;
        if (total - previous).abs() < 0.1 * rel_tol * total.abs() {
            return Ok(2.0 * total / std::f64::consts::PI.powi(2));
        }
        previous = total;
    }
    Err(Error::NonConvergence(format!(
        "entropy integral for κ = {} did not settle within {MAX_LEVELS} dyadic levels",
        order.kappa
    )))
}

/// Boundary regularity of η_κ near one of its singular points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionFParams {
    pub gamma: f64,
    pub radius_r: f64,
    pub t0: f64,
    /// max over k ≤ 2 of sup |f^(k)(t)| |t - t0|^(k - γ) over the probe samples.
    pub seminorm_bound: f64,
}

/// Estimates the Hölder-type exponent γ of η_κ at t0 ∈ {0, 1}.
///
/// For each derivative order k the log-log slope of |η^(k)| against the
/// distance to t0 is fitted over a log-spaced sample approaching t0; the
/// estimate is min_k (slope_k + k), capped at 1.
pub fn probe_condition_f(order: RenyiOrder, t0: f64, samples: usize) -> Result<ConditionFParams> {
    if t0 != 0.0 && t0 != 1.0 {
        return Err(Error::invalid(format!("singular point must be 0 or 1, got {t0}")));
    }
    if samples < 100 {
        return Err(Error::invalid(format!("need at least 100 samples, got {samples}")));
    }
    let (log_lo, log_hi) = (-10.0f64, -4.0f64);
    let distances: Vec<f64> = (0..samples)
        .map(|i| 10f64.powf(log_lo + (log_hi - log_lo) * i as f64 / (samples - 1) as f64))
        .collect();
    let at = |d: f64| if t0 == 0.0 { d } else { 1.0 - d };

    let mut gamma = 1.0f64;
    for k in 0..3 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = distances
            .iter()
            .filter_map(|&d| {
                let v = eta_derivatives(order, at(d))[k].abs();
                (v > 0.0 && v.is_finite()).then(|| (d.ln(), v.ln()))
            })
            .unzip();
        if xs.len() < 2 {
            continue;
        }
        let slope = least_squares_slope(&xs, &ys);
        gamma = gamma.min(slope + k as f64);
    }
    if !(gamma > 0.0) {
        return Err(Error::NonConvergence(format!(
            "fitted boundary exponent {gamma} is not positive for κ = {}",
            order.kappa
        )));
    }

    // Seminorm over the whole half interval adjacent to t0.
    let mut seminorm = 0.0f64;
    for i in 0..samples {
        let d = 10f64.powf(log_lo + (0.5f64.log10() - log_lo) * i as f64 / (samples - 1) as f64);
        let derivs = eta_derivatives(order, at(d));
        for (k, v) in derivs.iter().enumerate() {
            seminorm = seminorm.max(v.abs() * d.powf(k as f64 - gamma));
        }
    }

    Ok(ConditionFParams { gamma, radius_r: 1.0, t0, seminorm_bound: seminorm })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(k: f64) -> RenyiOrder {
        RenyiOrder::new(k).unwrap()
    }

    #[test]
    fn eta_examples() {
        let ln2 = std::f64::consts::LN_2;
        assert!((eta(order(1.0), 0.5) - ln2).abs() < 1e-15);
        assert_eq!(eta(order(2.0), 0.0), 0.0);
        // (1/(1-2)) ln(1/4 + 1/4) = ln 2
        assert!((eta(order(2.0), 0.5) - ln2).abs() < 1e-15);
    }

    #[test]
    fn eta_outside_unit_interval_vanishes() {
        for t in [-3.0, -1e-300, 1.0, 1.0 + 1e-15, 7.0, f64::NAN] {
            assert_eq!(eta(order(0.5), t), 0.0);
        }
        assert_eq!(eta(order(1.0), 1e-301), 0.0);
    }

    #[test]
    fn eta_matches_naive_formula_in_the_bulk() {
        for &k in &[0.3, 0.5, 2.0, 3.0, 5.0] {
            for i in 1..20 {
                let t = i as f64 / 20.0;
                let naive = (t.powf(k) + (1.0 - t).powf(k)).ln() / (1.0 - k);
                assert!((eta(order(k), t) - naive).abs() < 1e-13, "κ={k} t={t}");
            }
        }
    }

    #[test]
    fn large_order_is_stable_near_half() {
        // ln(2 · 2^-50) / (1 - 50)
        let exact = (49.0 * std::f64::consts::LN_2) / 49.0;
        assert!((eta(order(50.0), 0.5) - exact).abs() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for &k in &[0.5, 1.0, 2.0, 3.5] {
            for &t in &[0.1, 0.37, 0.5, 0.8] {
                let h = 1e-5;
                let d = eta_derivatives(order(k), t);
                let fd1 = (eta(order(k), t + h) - eta(order(k), t - h)) / (2.0 * h);
                let fd2 = (eta_derivatives(order(k), t + h)[1]
                    - eta_derivatives(order(k), t - h)[1])
                    / (2.0 * h);
                assert!((d[1] - fd1).abs() < 1e-7, "η' κ={k} t={t}: {} vs {fd1}", d[1]);
                assert!((d[2] - fd2).abs() < 1e-5, "η'' κ={k} t={t}: {} vs {fd2}", d[2]);
            }
        }
    }

    #[test]
    fn slope_examples() {
        assert!((theoretical_slope(order(1.0)) - 1.0 / 3.0).abs() < 1e-15);
        assert!((theoretical_slope(order(2.0)) - 0.25).abs() < 1e-15);
        assert!((theoretical_slope(order(1e12)) - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn integral_reproduces_closed_form() {
        for &k in &[0.5, 1.0, 2.0, 3.0, 5.0] {
            let v = entropy_integral(order(k), 1e-8).unwrap();
            let expect = theoretical_slope(order(k));
            assert!(((v - expect) / expect).abs() < 1e-8, "κ={k}: {v} vs {expect}");
        }
    }

    #[test]
    fn integral_rejects_loose_tolerance() {
        assert!(entropy_integral(order(1.0), 0.1).is_err());
        assert!(entropy_integral(order(1.0), 0.0).is_err());
    }

    #[test]
    fn boundary_exponents() {
        let half = probe_condition_f(order(0.5), 0.0, 200).unwrap();
        assert!((half.gamma - 0.5).abs() < 0.05, "{half:?}");
        let two = probe_condition_f(order(2.0), 1.0, 200).unwrap();
        assert!((two.gamma - 1.0).abs() < 0.05, "{two:?}");
        let vn = probe_condition_f(order(1.0), 0.0, 200).unwrap();
        assert!(vn.gamma < 1.0, "{vn:?}");
        assert!(vn.seminorm_bound.is_finite());
        for &k in &[0.25, 0.5, 0.75, 1.5, 2.0, 4.0] {
            let p = probe_condition_f(order(k), 0.0, 100).unwrap();
            assert!(p.gamma <= k.min(1.0) + 1e-9 + 0.05, "κ={k}: {p:?}");
        }
    }

    #[test]
    fn probe_rejects_bad_input() {
        assert!(probe_condition_f(order(1.0), 0.5, 200).is_err());
        assert!(probe_condition_f(order(1.0), 0.0, 10).is_err());
    }

    #[test]
    fn order_validation() {
        assert!(RenyiOrder::new(0.0).is_err());
        assert!(RenyiOrder::new(-1.0).is_err());
        assert!(RenyiOrder::new(f64::INFINITY).is_err());
        assert!(order(1.0 + 1e-13).is_von_neumann());
        assert!(!order(1.0 + 1e-9).is_von_neumann());
    }
}

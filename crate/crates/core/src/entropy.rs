//! Rényi entanglement entropy of the interval,
//!
//!   S_κ = tr η_κ(χ_Λ Π χ_Λ) − tr χ_Λ η_κ(Π) χ_Λ.
//!
//! The first term comes from the Nyström spectrum, the second from a
//! one-dimensional momentum integral of the symbol's eigenvalue e^{−εω(k)}.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::discretization::{assemble_operator, build_grid, DiscretizedOperator, QuadratureRule, TOL_DISC};
use crate::kernel::{QuadratureSpec, DEFAULT_TAIL_TOL};
use crate::quadrature::{dyadic_breakpoints, GaussLegendre};
use crate::renyi::{eta, RenyiOrder};
use crate::symbols::PhysicalParams;
use crate::{Error, Result};

/// Relative change under n-doubling accepted as converged.
pub const CONVERGENCE_REL_CHANGE: f64 = 5e-3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ClampReport {
    /// Eigenvalues moved into [0, 1] before applying η.
    pub count: usize,
    pub max_distance: f64,
}

/// Σ η_κ(clip(λ_i)) after checking every λ_i lies in [−tol, 1 + tol].
pub fn entropy_of_spectrum(eigenvalues: &[f64], order: RenyiOrder, tol: f64) -> Result<(f64, ClampReport)> {
    crate::discretization::check_spectrum(eigenvalues, tol)?;
    let mut report = ClampReport::default();
    let mut sum = 0.0;
    for &x in eigenvalues {
        let c = x.clamp(0.0, 1.0);
        if c != x {
            report.count += 1;
            report.max_distance = report.max_distance.max((c - x).abs());
        }
        sum += eta(order, c);
    }
    Ok((sum, report))
}

pub fn truncated_entropy_trace(op: &DiscretizedOperator, order: RenyiOrder) -> Result<(f64, ClampReport)> {
    entropy_of_spectrum(&op.eigenvalues()?, order, TOL_DISC)
}

/// (λ/2π) ∫ η_κ(e^{−εω(k)}) dk, computed as (λ/πε) ∫₀^∞ η_κ(e^{−√(s² + (εm)²)}) ds.
pub fn subtraction_trace(params: &PhysicalParams, order: RenyiOrder, rel_tol: f64) -> Result<f64> {
    params.validate()?;
    if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
        return Err(Error::invalid(format!("rel_tol must lie in (0, 1e-3], got {rel_tol}")));
    }
    let mu = params.epsilon * params.mass;
    let f = |s: f64| eta(order, (-s.hypot(mu)).exp());
    // η_κ(t) decays like t^min(κ,1) (times a log at κ = 1) as t → 0.
    let rate = order.kappa().min(1.0);
    let s_max = (((1e3 / rel_tol).ln() + 40.0) / rate).max(4.0);
    let coarse = GaussLegendre::cached(16);
    let fine = GaussLegendre::cached(32);
    let mut width = 1.0;
    let mut levels = 40;
    let mut last: Option<f64> = None;
    for _ in 0..8 {
        let mut pts = dyadic_breakpoints(width, levels);
        let mut a = width;
        while a < s_max {
            a += width;
            pts.push(a);
        }
        let (mut lo, mut hi) = (0.0, 0.0);
        for w in pts.windows(2) {
            lo += coarse.integrate(w[0], w[1], f);
            hi += fine.integrate(w[0], w[1], f);
        }
        let diff = (hi - lo).abs();
        if diff <= 0.1 * rel_tol * hi.abs() || hi == 0.0 {
            return Ok(params.lambda / (PI * params.epsilon) * hi);
        }
        if let Some(prev) = last {
            if (hi - prev).abs() <= 0.1 * rel_tol * hi.abs() {
                return Ok(params.lambda / (PI * params.epsilon) * hi);
            }
        }
        last = Some(hi);
        width *= 0.5;
        levels += 10;
    }
    Err(Error::NonConvergence("subtraction integral did not settle".into()))
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyResult {
    pub params: PhysicalParams,
    pub kappa: f64,
    pub n: usize,
    pub rule: QuadratureRule,
    pub truncated_trace: f64,
    pub subtraction_trace: f64,
    pub entropy: f64,
    pub clamp_count: usize,
    pub max_clamp: f64,
    pub converged: bool,
    /// |S(n) − S(n/2)| / |S(n)|, when the smaller grid was evaluated.
    pub relative_change: Option<f64>,
    /// Sum of the eigenvalues beyond the n/2 largest.
    pub tail_mass: f64,
}

/// Doubling schedule for the grid size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergencePolicy {
    pub n_start: usize,
    pub n_max: usize,
    pub rel_change: f64,
    pub rule: QuadratureRule,
}

impl Default for ConvergencePolicy {
    fn default() -> Self {
        ConvergencePolicy {
            n_start: 128,
            n_max: 4096,
            rel_change: CONVERGENCE_REL_CHANGE,
            rule: QuadratureRule::GaussLegendre,
        }
    }
}

impl ConvergencePolicy {
    pub fn validate(&self) -> Result<()> {
        if self.n_start < 2 || self.n_max < self.n_start {
            return Err(Error::invalid(format!(
                "policy needs 2 <= n_start <= n_max, got {} and {}",
                self.n_start, self.n_max
            )));
        }
        if !(self.rel_change > 0.0) {
            return Err(Error::invalid("policy rel_change must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct SpectrumKey {
    mass: u64,
    epsilon: u64,
    lambda: u64,
    start: u64,
    n: usize,
    rule: QuadratureRule,
}

/// Cached eigenvalue spectra, shared across Rényi orders.
#[derive(Debug, Default)]
pub struct EntropyEngine {
    cache: Mutex<HashMap<SpectrumKey, Arc<Vec<f64>>>>,
    tail_tol: Option<f64>,
}

impl EntropyEngine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_tail_tol(tail_tol: f64) -> Self {
        EntropyEngine { tail_tol: Some(tail_tol), ..Self::default() }
    }

    fn spec(&self, params: &PhysicalParams) -> Result<QuadratureSpec> {
        QuadratureSpec::for_params(params, self.tail_tol.unwrap_or(DEFAULT_TAIL_TOL))
    }

    /// Ascending eigenvalues of the n-node operator on (start, start + λ).
    pub fn spectrum_at(&self, params: &PhysicalParams, start: f64, n: usize, rule: QuadratureRule) -> Result<Arc<Vec<f64>>> {
        let key = SpectrumKey {
            mass: params.mass.to_bits(),
            epsilon: params.epsilon.to_bits(),
            lambda: params.lambda.to_bits(),
            start: start.to_bits(),
            n,
            rule,
        };
        if let Some(ev) = self.cache.lock().expect("spectrum cache poisoned").get(&key) {
            return Ok(Arc::clone(ev));
        }
        let grid = if start == 0.0 {
            build_grid(n, params.lambda, rule)?
        } else {
            crate::discretization::Grid::on_interval(n, start, start + params.lambda, rule)?
        };
        let op = assemble_operator(params, &grid, &self.spec(params)?)?;
        let ev = Arc::new(op.eigenvalues()?);
        self.cache.lock().expect("spectrum cache poisoned").insert(key, Arc::clone(&ev));
        Ok(ev)
    }

    pub fn spectrum(&self, params: &PhysicalParams, n: usize, rule: QuadratureRule) -> Result<Arc<Vec<f64>>> {
        self.spectrum_at(params, 0.0, n, rule)
    }

    /// Entropy at a fixed grid size, without a convergence comparison.
    pub fn entropy_at(&self, params: &PhysicalParams, order: RenyiOrder, n: usize, rule: QuadratureRule) -> Result<EntropyResult> {
        self.entropy_on(params, 0.0, order, n, rule)
    }

    /// As [`Self::entropy_at`] on the shifted interval (start, start + λ).
    pub fn entropy_on(
        &self,
        params: &PhysicalParams,
        start: f64,
        order: RenyiOrder,
        n: usize,
        rule: QuadratureRule,
    ) -> Result<EntropyResult> {
        let ev = self.spectrum_at(params, start, n, rule)?;
        let (truncated, clamp) = entropy_of_spectrum(&ev, order, TOL_DISC)?;
        let subtraction = subtraction_trace(params, order, 1e-9)?;
        let tail_mass = ev.iter().rev().skip(n / 2).map(|x| x.max(0.0)).sum();
        Ok(EntropyResult {
            params: *params,
            kappa: order.kappa(),
            n,
            rule,
            truncated_trace: truncated,
            subtraction_trace: subtraction,
            entropy: truncated - subtraction,
            clamp_count: clamp.count,
            max_clamp: clamp.max_distance,
            converged: false,
            relative_change: None,
            tail_mass,
        })
    }

    /// Entropy at n, flagged converged if it moved by less than 0.5% from n/2.
    pub fn entanglement_entropy(&self, params: &PhysicalParams, order: RenyiOrder, n: usize, rule: QuadratureRule) -> Result<EntropyResult> {
        if n < 64 {
            return Err(Error::invalid(format!("grid size must be >= 64, got {n}")));
        }
        let mut r = self.entropy_at(params, order, n, rule)?;
        let change = match self.entropy_at(params, order, n / 2, rule) {
            Ok(half) => Some(relative_change(r.entropy, half.entropy)),
            Err(Error::SpectrumOutOfRange { .. }) => None,
            Err(e) => return Err(e),
        };
        r.relative_change = change;
        r.converged = change.is_some_and(|c| c < CONVERGENCE_REL_CHANGE);
        Ok(r)
    }

    /// Doubles n from `policy.n_start` until S changes by less than
    /// `policy.rel_change`. A spectrum leaving [0, 1] below n_max counts as
    /// unresolved and doubling continues.
    pub fn converged_entropy(&self, params: &PhysicalParams, order: RenyiOrder, policy: &ConvergencePolicy) -> Result<EntropyResult> {
        policy.validate()?;
        let mut n = policy.n_start;
        let mut prev: Option<f64> = None;
        loop {
            let at_max = n >= policy.n_max;
            match self.entropy_at(params, order, n, policy.rule) {
                Ok(mut r) => {
                    if let Some(p) = prev {
                        let c = relative_change(r.entropy, p);
                        r.relative_change = Some(c);
                        r.converged = c < policy.rel_change;
                    }
                    if r.converged || at_max {
                        return Ok(r);
                    }
                    prev = Some(r.entropy);
                }
                Err(e @ Error::SpectrumOutOfRange { .. }) => {
                    if at_max {
                        return Err(e);
                    }
                    prev = None;
                }
                Err(e) => return Err(e),
            }
            n = (2 * n).min(policy.n_max);
        }
    }
}

fn relative_change(new: f64, old: f64) -> f64 {
    (new - old).abs() / new.abs().max(f64::MIN_POSITIVE)
}

/// One-shot entropy at grid size n with the Gauss–Legendre rule.
pub fn entanglement_entropy(params: &PhysicalParams, order: RenyiOrder, n: usize, spec: &QuadratureSpec) -> Result<EntropyResult> {
    let engine = EntropyEngine::with_tail_tol(spec.tail_tol);
    engine.entanglement_entropy(params, order, n, QuadratureRule::GaussLegendre)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn von_neumann() -> RenyiOrder {
        RenyiOrder::von_neumann()
    }

    #[test]
    fn spectrum_examples() {
        let (s, c) = entropy_of_spectrum(&[0.0, 1.0, 1.0, 0.0], von_neumann(), 1e-6).unwrap();
        assert_eq!(s, 0.0);
        assert_eq!(c.count, 0);
        let (s, _) = entropy_of_spectrum(&[0.5], von_neumann(), 1e-6).unwrap();
        assert!((s - 2f64.ln()).abs() < 1e-15);
        let (s, c) = entropy_of_spectrum(&[-5e-7, 1.0 + 2e-7, 0.5], von_neumann(), 1e-6).unwrap();
        assert!((s - 2f64.ln()).abs() < 1e-15);
        assert_eq!(c.count, 2);
        assert!((c.max_distance - 5e-7).abs() < 1e-20);
        assert!(entropy_of_spectrum(&[1.1], von_neumann(), 1e-6).is_err());
    }

    #[test]
    fn subtraction_massless_von_neumann() {
        for &eps in &[0.5, 0.1, 0.02] {
            let p = PhysicalParams::new(0.0, eps, 1.0).unwrap();
            let v = subtraction_trace(&p, von_neumann(), 1e-9).unwrap();
            let exact = PI / (6.0 * eps);
            assert!((v / exact - 1.0).abs() < 1e-9, "eps={eps}: {v} vs {exact}");
        }
        let p = PhysicalParams::new(0.0, 0.1, 1.0).unwrap();
        assert!((subtraction_trace(&p, von_neumann(), 1e-6).unwrap() - 5.235_987_8).abs() < 1e-6);
    }

    #[test]
    fn subtraction_other_orders_against_direct_quadrature() {
        // Plain composite GL in k, no substitution.
        for &(m, kappa, eps) in &[(1.0, 2.0, 0.05), (0.0, 0.5, 0.2), (3.0, 3.0, 0.1)] {
            let order = RenyiOrder::new(kappa).unwrap();
            let p = PhysicalParams::new(m, eps, 2.0).unwrap();
            let rule = GaussLegendre::new(20);
            let k_max = 80.0 / eps / kappa.min(1.0);
            let mut direct = 0.0;
            let pts = dyadic_breakpoints(k_max, 80);
            for w in pts.windows(2) {
                let panels = 64;
                let h = (w[1] - w[0]) / panels as f64;
                for i in 0..panels {
                    let a = w[0] + i as f64 * h;
                    direct += rule.integrate(a, a + h, |k| eta(order, (-eps * k.hypot(m)).exp()));
                }
            }
            direct *= 2.0 * p.lambda / (2.0 * PI);
            let v = subtraction_trace(&p, order, 1e-8).unwrap();
            assert!((v / direct - 1.0).abs() < 1e-8, "{v} vs {direct}");
        }
    }

    #[test]
    fn subtraction_vanishes_for_heavy_damping() {
        let p = PhysicalParams::new(1.0, 800.0, 1.0).unwrap();
        assert!(subtraction_trace(&p, RenyiOrder::new(2.0).unwrap(), 1e-6).unwrap() < 1e-300);
        assert!(subtraction_trace(&p, von_neumann(), 0.0).is_err());
    }

    #[test]
    fn subtraction_self_convergence() {
        let p = PhysicalParams::new(1.0, 0.05, 1.0).unwrap();
        let o = RenyiOrder::new(2.0).unwrap();
        let a = subtraction_trace(&p, o, 1e-4).unwrap();
        let b = subtraction_trace(&p, o, 1e-9).unwrap();
        assert!((a / b - 1.0).abs() < 1e-4);
    }

    #[test]
    fn massless_entropy_at_moderate_cutoff() {
        let p = PhysicalParams::new(0.0, 0.1, 1.0).unwrap();
        let engine = EntropyEngine::new();
        let r = engine.converged_entropy(&p, von_neumann(), &ConvergencePolicy::default()).unwrap();
        assert!(r.converged);
        // Reference from an independent dense complex eigensolve at n = 4096.
        assert!((r.entropy - 1.027_821_183_6).abs() < 1e-8, "{}", r.entropy);
        let mid = engine.entropy_at(&p, von_neumann(), r.n, QuadratureRule::Midpoint).unwrap();
        assert!((mid.entropy / r.entropy - 1.0).abs() < 0.03);
        let shifted = engine.entropy_on(&p, 5.0, von_neumann(), r.n, QuadratureRule::GaussLegendre).unwrap();
        assert!((shifted.entropy - r.entropy).abs() < 1e-10);
    }

    #[test]
    fn fixed_n_entropy_reports_change() {
        let p = PhysicalParams::new(0.0, 0.1, 1.0).unwrap();
        let spec = QuadratureSpec::for_params(&p, DEFAULT_TAIL_TOL).unwrap();
        let r = entanglement_entropy(&p, von_neumann(), 256, &spec).unwrap();
        assert!(r.converged);
        assert!(r.relative_change.unwrap() < 5e-3);
        assert!(entanglement_entropy(&p, von_neumann(), 32, &spec).is_err());
    }

    #[test]
    fn entropy_decreases_with_order() {
        let p = PhysicalParams::new(0.5, 0.05, 1.0).unwrap();
        let engine = EntropyEngine::new();
        let values: Vec<f64> = [0.5, 1.0, 2.0, 3.0]
            .iter()
            .map(|&k| engine.entropy_at(&p, RenyiOrder::new(k).unwrap(), 256, QuadratureRule::GaussLegendre).unwrap().entropy)
            .collect();
        assert!(values.iter().all(|&s| s > 0.0));
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    }

    #[test]
    fn under_resolved_grid_keeps_doubling() {
        let p = PhysicalParams::new(0.0, 0.002, 1.0).unwrap();
        let engine = EntropyEngine::new();
        let policy = ConvergencePolicy { n_start: 64, n_max: 1024, ..ConvergencePolicy::default() };
        for n in [64, 128, 256] {
            assert!(matches!(
                engine.entropy_at(&p, von_neumann(), n, QuadratureRule::GaussLegendre),
                Err(Error::SpectrumOutOfRange { .. })
            ));
        }
        let r = engine.converged_entropy(&p, von_neumann(), &policy).unwrap();
        assert_eq!(r.n, 1024);
        assert!(r.relative_change.is_some());
    }
}

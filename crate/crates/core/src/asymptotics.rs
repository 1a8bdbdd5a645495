//! ε-sweeps with a least-squares fit of S against ln(1/ε), and the
//! diagnostics behind the mass-independence of the leading coefficient.
//!
//! The diagnostics are parameterized by α = 1/ε.

use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::{assemble_offdiagonal_truncation, ConstantSymbol, ExpDampedSymbol, ScalarSymbol};
use crate::entropy::{ConvergencePolicy, EntropyEngine};
use crate::renyi::{theoretical_slope, RenyiOrder};
use crate::schatten::singular_values;
use crate::symbols::{split_symbol, PhysicalParams};
use crate::{Error, Result};

/// Minimum r² for a fit to count as reportable.
pub const MIN_R_SQUARED: f64 = 0.98;
/// Minimum number of converged sweep points.
pub const MIN_CONVERGED: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub ln_inv_eps: f64,
    pub entropy: f64,
    pub n: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares y ≈ slope·x + intercept.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("least squares needs at least two (x, y) pairs"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("least squares needs distinct x values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(LinearFit { slope, intercept, r_squared })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub params_base: PhysicalParams,
    pub kappa: f64,
    /// Sorted by decreasing ε.
    pub points: Vec<SweepPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub theory_slope: f64,
    pub rel_error: f64,
}

impl SweepResult {
    pub fn reportable(&self) -> bool {
        self.r_squared >= MIN_R_SQUARED
    }

    fn converged_xy(&self) -> (Vec<f64>, Vec<f64>) {
        self.points.iter().filter(|p| p.converged).map(|p| (p.ln_inv_eps, p.entropy)).unzip()
    }

    /// Fit residuals over the converged points, in point order.
    pub fn residuals(&self) -> Vec<f64> {
        let (x, y) = self.converged_xy();
        x.iter().zip(y).map(|(x, y)| y - (self.slope * x + self.intercept)).collect()
    }

    /// Slope of the fit without the largest-ε converged point.
    pub fn slope_without_largest_eps(&self) -> Result<f64> {
        let (x, y) = self.converged_xy();
        Ok(least_squares(&x[1..], &y[1..])?.slope)
    }
}

/// `count` log-spaced values from `start` to `stop`, both included.
pub fn log_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0 && start.is_finite() && stop.is_finite()) {
        return Err(Error::invalid(format!("log grid ends must be positive, got {start}, {stop}")));
    }
    if count < 2 {
        return Err(Error::invalid(format!("log grid needs at least two points, got {count}")));
    }
    let (a, b) = (start.ln(), stop.ln());
    Ok((0..count)
        .map(|i| match i {
            0 => start,
            i if i == count - 1 => stop,
            i => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect())
}

fn check_eps_grid(eps: &[f64]) -> Result<()> {
    if eps.len() < 6 {
        return Err(Error::invalid(format!("eps grid needs at least 6 points, got {}", eps.len())));
    }
    if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::invalid("eps grid values must be positive"));
    }
    let mut sorted = eps.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let steps: Vec<f64> = sorted.windows(2).map(|w| (w[0] / w[1]).ln()).collect();
    if steps.iter().any(|&s| s <= 0.0) {
        return Err(Error::invalid("eps grid values must be distinct"));
    }
    let mean = steps.iter().sum::<f64>() / steps.len() as f64;
    if steps.iter().any(|s| (s - mean).abs() > 1e-6 * mean) {
        return Err(Error::invalid("eps grid must be log-spaced"));
    }
    let ratio = sorted[0] / sorted[sorted.len() - 1];
    if ratio < 30.0 {
        return Err(Error::invalid(format!("eps grid must span a ratio of at least 30, got {ratio}")));
    }
    Ok(())
}

/// Converged entropy at every ε and the OLS fit of S against ln(1/ε) over the
/// converged points.
pub fn sweep(
    engine: &EntropyEngine,
    params_base: &PhysicalParams,
    order: RenyiOrder,
    eps_grid: &[f64],
    policy: &ConvergencePolicy,
) -> Result<SweepResult> {
    check_eps_grid(eps_grid)?;
    policy.validate()?;
    let mut eps = eps_grid.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let points = eps
        .par_iter()
        .map(|&e| {
            let params = PhysicalParams::new(params_base.mass, e, params_base.lambda)?;
            let r = engine.converged_entropy(&params, order, policy)?;
            Ok(SweepPoint { epsilon: e, ln_inv_eps: -e.ln(), entropy: r.entropy, n: r.n, converged: r.converged })
        })
        .collect::<Result<Vec<_>>>()?;
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().filter(|p| p.converged).map(|p| (p.ln_inv_eps, p.entropy)).unzip();
    if x.len() < MIN_CONVERGED {
        return Err(Error::NonConvergence(format!(
            "only {} of {} sweep points converged, need {MIN_CONVERGED}",
            x.len(),
            points.len()
        )));
    }
    let fit = least_squares(&x, &y)?;
    let theory_slope = theoretical_slope(order);
    Ok(SweepResult {
        params_base: *params_base,
        kappa: order.kappa(),
        points,
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        theory_slope,
        rel_error: (fit.slope - theory_slope).abs() / theory_slope,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MassEntry {
    pub mass: f64,
    pub sweep: SweepResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct MassIndependenceReport {
    pub lambda: f64,
    pub kappa: f64,
    pub theory_slope: f64,
    pub entries: Vec<MassEntry>,
    /// max − min of the fitted slopes.
    pub slope_spread: f64,
}

impl MassIndependenceReport {
    pub fn slope(&self, mass: f64) -> Option<f64> {
        self.entries.iter().find(|e| e.mass == mass).map(|e| e.sweep.slope)
    }
}

/// One sweep per mass on a shared ε grid.
pub fn mass_independence_check(
    engine: &EntropyEngine,
    lambda: f64,
    order: RenyiOrder,
    masses: &[f64],
    eps_grid: &[f64],
    policy: &ConvergencePolicy,
) -> Result<MassIndependenceReport> {
    if !masses.contains(&0.0) {
        return Err(Error::invalid("mass list must include 0"));
    }
    let entries = masses
        .iter()
        .map(|&mass| {
            let base = PhysicalParams::new(mass, eps_grid.first().copied().unwrap_or(1.0), lambda)?;
            Ok(MassEntry { mass, sweep: sweep(engine, &base, order, eps_grid, policy)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let slopes = entries.iter().map(|e| e.sweep.slope);
    let spread = slopes.clone().fold(f64::NEG_INFINITY, f64::max) - slopes.fold(f64::INFINITY, f64::min);
    Ok(MassIndependenceReport { lambda, kappa: order.kappa(), theory_slope: theoretical_slope(order), entries, slope_spread: spread })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiagnosticsResult {
    pub alpha_grid: Vec<f64>,
    /// |S_m − S_0| / ln α.
    pub offdiag_ratios: Vec<f64>,
    /// sup |A^> − A_∞| over |ξ| ≥ ln α.
    pub sup_deviations: Vec<f64>,
    /// ‖χ_I Op₁(a_α)(1 − χ_I)‖_q^q.
    pub logq_norms: Vec<f64>,
    /// Grid size used per α.
    pub grid_sizes: Vec<usize>,
    /// Fit of `logq_norms` against ln α; absent when every norm vanishes.
    pub log_fit: Option<LinearFit>,
}

impl DiagnosticsResult {
    /// logq_norms[i] / ln α_i.
    pub fn norm_over_log(&self) -> Vec<f64> {
        self.alpha_grid.iter().zip(&self.logq_norms).map(|(a, v)| v / a.ln()).collect()
    }

    /// Whether the ratios are non-increasing over the last half of the grid.
    pub fn offdiag_trend_ok(&self) -> bool {
        let r = &self.offdiag_ratios;
        r[r.len() / 2..].windows(2).all(|w| w[1] <= w[0])
    }
}

fn check_alpha_grid(alpha_grid: &[f64], min: f64) -> Result<()> {
    if alpha_grid.is_empty() {
        return Err(Error::invalid("alpha grid is empty"));
    }
    if alpha_grid[0] <= min || alpha_grid.iter().any(|a| !a.is_finite()) {
        return Err(Error::invalid(format!("alpha grid values must be finite and exceed {min}")));
    }
    if alpha_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("alpha grid must be increasing"));
    }
    Ok(())
}

/// Largest |ξ| probed for the sup deviation.
const SUP_XI_MAX: f64 = 100.0;
const SUP_SAMPLES: usize = 400;

/// |S_κ(m) − S_κ(0)| / ln α at ε = 1/α, with both entropies taken at the
/// same grid size (the larger of the two converged sizes), together with
/// the sup deviation of the high-frequency symbol from its limit.
pub fn offdiagonal_diagnostic(
    engine: &EntropyEngine,
    lambda: f64,
    order: RenyiOrder,
    mass: f64,
    alpha_grid: &[f64],
    policy: &ConvergencePolicy,
) -> Result<DiagnosticsResult> {
    check_alpha_grid(alpha_grid, std::f64::consts::E.powi(2))?;
    if !(mass.is_finite() && mass >= 0.0) {
        return Err(Error::invalid(format!("mass must be >= 0, got {mass}")));
    }
    let mut out = DiagnosticsResult { alpha_grid: alpha_grid.to_vec(), ..Default::default() };
    for &alpha in alpha_grid {
        let eps = 1.0 / alpha;
        let massive = PhysicalParams::new(mass, eps, lambda)?;
        let massless = PhysicalParams::new(0.0, eps, lambda)?;
        let ratio = if mass == 0.0 {
            out.grid_sizes.push(engine.converged_entropy(&massless, order, policy)?.n);
            0.0
        } else {
            let n = engine
                .converged_entropy(&massive, order, policy)?
                .n
                .max(engine.converged_entropy(&massless, order, policy)?.n);
            let sm = engine.entropy_at(&massive, order, n, policy.rule)?.entropy;
            let s0 = engine.entropy_at(&massless, order, n, policy.rule)?.entropy;
            out.grid_sizes.push(n);
            (sm - s0).abs() / alpha.ln()
        };
        out.offdiag_ratios.push(ratio);
        out.sup_deviations.push(split_symbol(alpha, mass)?.sup_deviation(SUP_XI_MAX, SUP_SAMPLES));
    }
    Ok(out)
}

/// Interval and truncation box for the log-growth diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogGrowthBox {
    pub lambda: f64,
    /// Damping length l₀ in a_α(k) = exp(−(l₀/α) ω(k)).
    pub l0: f64,
    pub mass: f64,
    /// Box half-width outside the interval, in units of λ.
    pub box_factor: f64,
    /// Total node budget.
    pub n: usize,
}

impl Default for LogGrowthBox {
    fn default() -> Self {
        LogGrowthBox { lambda: 1.0, l0: 1.0, mass: 1.0, box_factor: 8.0, n: 2048 }
    }
}

fn check_q(q: f64) -> Result<()> {
    let l = (1.0 / q).round();
    if !(2.0..=4.0).contains(&l) || (q * l - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("q must be 1/l for l in {{2, 3, 4}}, got {q}")));
    }
    Ok(())
}

/// ‖χ_I Op₁(a_α)(1 − χ_I)‖_q^q for a_α(k) = exp(−(l₀/α) ω(k)).
pub fn log_growth_diagnostic(q: f64, alpha_grid: &[f64], bx: &LogGrowthBox) -> Result<DiagnosticsResult> {
    log_growth_with(q, alpha_grid, bx, |alpha| Box::new(ExpDampedSymbol { scale: bx.l0 / alpha, mass: bx.mass }))
}

/// As [`log_growth_diagnostic`] with the constant symbol 1, whose
/// truncation vanishes identically.
pub fn log_growth_constant(q: f64, alpha_grid: &[f64], bx: &LogGrowthBox) -> Result<DiagnosticsResult> {
    log_growth_with(q, alpha_grid, bx, |_| Box::new(ConstantSymbol(1.0)))
}

fn log_growth_with<F>(q: f64, alpha_grid: &[f64], bx: &LogGrowthBox, symbol: F) -> Result<DiagnosticsResult>
where
    F: Fn(f64) -> Box<dyn ScalarSymbol>,
{
    check_q(q)?;
    check_alpha_grid(alpha_grid, 1.0)?;
    if alpha_grid[alpha_grid.len() - 1] / alpha_grid[0] < 100.0 {
        return Err(Error::invalid("alpha grid must span at least two decades"));
    }
    let mut out = DiagnosticsResult { alpha_grid: alpha_grid.to_vec(), ..Default::default() };
    for &alpha in alpha_grid {
        let a = symbol(alpha);
        let t = assemble_offdiagonal_truncation(a.as_ref(), bx.lambda, bx.box_factor * bx.lambda, bx.n)?;
        let s = singular_values(t.matrix.as_ref())?;
        out.logq_norms.push(s.norm_pow(q));
        out.grid_sizes.push(t.inside_nodes.len() + t.outside_nodes.len());
    }
    if out.logq_norms.iter().any(|&v| v > 0.0) {
        let x: Vec<f64> = alpha_grid.iter().map(|a| a.ln()).collect();
        out.log_fit = Some(least_squares(&x, &out.logq_norms)?);
    }
    Ok(out)
}

//! Browser bindings for the entropy library. Each export returns a flat
//! `Float64Array` so the page can plot it without further decoding.

use diamond_entropy::discretization::{assemble_operator, build_grid, QuadratureRule};
use diamond_entropy::entropy::{entropy_of_spectrum, subtraction_trace};
use diamond_entropy::kernel::{Kernel, KernelMethod, QuadratureSpec, DEFAULT_TAIL_TOL};
use diamond_entropy::renyi::{eta, RenyiOrder};
use diamond_entropy::symbols::PhysicalParams;
use diamond_entropy::{Error, Result};
use wasm_bindgen::prelude::*;

/// Largest interval grid the page may request; dense eigensolves beyond this
/// stall the main thread.
pub const MAX_DEMO_NODES: usize = 256;

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// η_κ at `samples` evenly spaced points of [0, 1].
pub fn eta_curve_native(kappa: f64, samples: usize) -> Result<Vec<f64>> {
    let order = RenyiOrder::new(kappa)?;
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    Ok((0..samples).map(|i| eta(order, i as f64 / (samples - 1) as f64)).collect())
}

/// Rows of (u, |K₁₁(u)|, |K₁₂(u)|) for u evenly spaced in [−u_max, u_max].
pub fn kernel_profile_native(mass: f64, epsilon: f64, u_max: f64, points: usize) -> Result<Vec<f64>> {
    let params = PhysicalParams::new(mass, epsilon, 1.0)?;
    if points < 2 || !(u_max > 0.0 && u_max.is_finite()) {
        return Err(Error::InvalidParameter("need points >= 2 and u_max > 0".into()));
    }
    let spec = QuadratureSpec::for_params(&params, DEFAULT_TAIL_TOL)?;
    let kernel = Kernel::new(&params, &spec, KernelMethod::Auto)?;
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let u = -u_max + 2.0 * u_max * i as f64 / (points - 1) as f64;
        let k = kernel.eval(u)?;
        out.extend([u, k.get(0, 0).norm(), k.get(0, 1).norm()]);
    }
    Ok(out)
}

/// Descending eigenvalues of the n-node operator on (0, λ).
pub fn interval_spectrum_native(mass: f64, epsilon: f64, lambda: f64, n: usize) -> Result<Vec<f64>> {
    if n > MAX_DEMO_NODES {
        return Err(Error::InvalidParameter(format!("the demo allows at most {MAX_DEMO_NODES} nodes")));
    }
    let params = PhysicalParams::new(mass, epsilon, lambda)?;
    let grid = build_grid(n, lambda, QuadratureRule::GaussLegendre)?;
    let op = assemble_operator(&params, &grid, &QuadratureSpec::for_params(&params, DEFAULT_TAIL_TOL)?)?;
    let mut ev = op.eigenvalues()?;
    ev.reverse();
    Ok(ev)
}

/// S_κ from a spectrum returned by [`interval_spectrum_native`].
pub fn interval_entropy_native(spectrum: &[f64], kappa: f64, mass: f64, epsilon: f64, lambda: f64) -> Result<f64> {
    let order = RenyiOrder::new(kappa)?;
    let params = PhysicalParams::new(mass, epsilon, lambda)?;
    let (trace, _) = entropy_of_spectrum(spectrum, order, 1e-6)?;
    Ok(trace - subtraction_trace(&params, order, 1e-9)?)
}

#[wasm_bindgen]
pub fn eta_curve(kappa: f64, samples: usize) -> std::result::Result<Vec<f64>, JsError> {
    eta_curve_native(kappa, samples).map_err(js)
}

#[wasm_bindgen]
pub fn kernel_profile(mass: f64, epsilon: f64, u_max: f64, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    kernel_profile_native(mass, epsilon, u_max, points).map_err(js)
}

#[wasm_bindgen]
pub fn interval_spectrum(mass: f64, epsilon: f64, lambda: f64, n: usize) -> std::result::Result<Vec<f64>, JsError> {
    interval_spectrum_native(mass, epsilon, lambda, n).map_err(js)
}

#[wasm_bindgen]
pub fn interval_entropy(spectrum: Vec<f64>, kappa: f64, mass: f64, epsilon: f64, lambda: f64) -> std::result::Result<f64, JsError> {
    interval_entropy_native(&spectrum, kappa, mass, epsilon, lambda).map_err(js)
}

//! Position-space kernel of the regularized vacuum projector,
//!
//! K(u) = (1/4π) ∫ e^{−εω(k)} (1 − Ĥ(k)/ω(k)) e^{iku} dk,   u = x − y.
//!
//! Direct quadrature is the reference; the massless closed form and the
//! Bessel representation for m > 0 are faster paths checked against it.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::bessel::bessel_k01_scaled;
use crate::mat2::Mat2;
use crate::quadrature::GaussLegendre;
use crate::symbols::{regularized_symbol, PhysicalParams};
use crate::{c64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub u: f64,
    pub matrix: Mat2,
}

/// Momentum quadrature settings for [`kernel_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub k_max: f64,
    pub panels: usize,
    pub nodes_per_panel: usize,
    pub tail_tol: f64,
    /// Upper bound on the total number of panels.
    pub panel_budget: usize,
}

pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

impl QuadratureSpec {
    /// Cutoff with e^{−εω(k_max)} = tail_tol.
    pub fn for_params(params: &PhysicalParams, tail_tol: f64) -> Result<Self> {
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::invalid(format!("tail_tol must lie in (0, 1), got {tail_tol}")));
        }
        let reach = (1.0 / tail_tol).ln() / params.epsilon;
        let k_max = if reach > params.mass {
            (reach * reach - params.mass * params.mass).sqrt()
        } else {
            reach
        };
        Ok(QuadratureSpec { k_max, panels: 64, nodes_per_panel: 16, tail_tol, panel_budget: 200_000 })
    }

    pub fn validate(&self, params: &PhysicalParams) -> Result<()> {
        if self.panels == 0 || self.nodes_per_panel == 0 || !(self.k_max > 0.0) {
            return Err(Error::invalid("quadrature spec needs k_max > 0 and nonzero panel counts"));
        }
        let tail = (-params.epsilon * params.mass.hypot(self.k_max)).exp();
        if tail > self.tail_tol * (1.0 + 1e-9) {
            return Err(Error::invalid(format!(
                "k_max = {} leaves a tail e^(-eps*omega) = {tail:e} above tail_tol = {:e}",
                self.k_max, self.tail_tol
            )));
        }
        Ok(())
    }
}

/// Panel breakpoints on [0, k_max]: uniform width `h`, with the first panel
/// split dyadically down to about m/8 when 0 < m < h.
fn half_line_breakpoints(k_max: f64, h: f64, mass: f64, budget: usize) -> Result<Vec<f64>> {
    let uniform = (k_max / h).ceil().max(1.0);
    let levels = if mass > 0.0 && mass < h {
        ((8.0 * h / mass).log2().ceil() as usize).min(60)
    } else {
        0
    };
    let required = 2 * (uniform as usize + levels);
    if !uniform.is_finite() || required > budget {
        return Err(Error::PanelBudget { required: required.max(uniform as usize), budget });
    }
    let n = uniform as usize;
    let width = k_max / n as f64;
    let mut pts = Vec::with_capacity(n + levels + 1);
    pts.push(0.0);
    for j in (1..=levels).rev() {
        pts.push(width * 0.5f64.powi(j as i32));
    }
    pts.extend((1..=n).map(|i| if i == n { k_max } else { i as f64 * width }));
    Ok(pts)
}

/// Reference evaluation by composite Gauss–Legendre in momentum space.
pub fn kernel_quadrature(params: &PhysicalParams, u: f64, spec: &QuadratureSpec) -> Result<KernelValue> {
    params.validate()?;
    spec.validate(params)?;
    let mut h = spec.k_max / spec.panels as f64;
    if u != 0.0 {
        h = h.min(PI / u.abs());
    }
    let pts = half_line_breakpoints(spec.k_max, h, params.mass, spec.panel_budget)?;
    let rule = GaussLegendre::cached(spec.nodes_per_panel);
    let mut acc = [[c64::new(0.0, 0.0); 2]; 2];
    for w in pts.windows(2) {
        for (k, wt) in rule.mapped(w[0], w[1]) {
            // k and −k together
            for kk in [k, -k] {
                let a = regularized_symbol(params, kk).entries;
                let phase = c64::new(0.0, kk * u).exp() * wt;
                for (i, row) in acc.iter_mut().enumerate() {
                    for (j, e) in row.iter_mut().enumerate() {
                        *e += a.get(i, j) * phase;
                    }
                }
            }
        }
    }
    // (1/4π)·2E_− = E_−/(2π)
    Ok(KernelValue { u, matrix: Mat2(acc).scale(1.0 / (2.0 * PI)) })
}

/// m = 0: diag(1/(2π(ε − iu)), 1/(2π(ε + iu))).
pub fn kernel_massless_closed(epsilon: f64, u: f64) -> Result<KernelValue> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be > 0, got {epsilon}")));
    }
    Ok(KernelValue { u, matrix: massless_matrix(epsilon, u) })
}

#[inline]
fn massless_matrix(epsilon: f64, u: f64) -> Mat2 {
    let two_pi = 2.0 * PI;
    let a = c64::new(epsilon, -u) * two_pi;
    let b = c64::new(epsilon, u) * two_pi;
    let zero = c64::new(0.0, 0.0);
    Mat2([[a.inv(), zero], [zero, b.inv()]])
}

/// m > 0 via K₀, K₁ at m·r, r = √(ε² + u²).
pub fn kernel_massive_bessel(params: &PhysicalParams, u: f64) -> Result<KernelValue> {
    params.validate()?;
    if params.mass <= 0.0 {
        return Err(Error::invalid("the Bessel kernel needs mass > 0"));
    }
    Ok(KernelValue { u, matrix: massive_matrix(params.mass, params.epsilon, u)? })
}

#[inline]
fn massive_matrix(m: f64, epsilon: f64, u: f64) -> Result<Mat2> {
    let r = epsilon.hypot(u);
    let z = m * r;
    let (k0s, k1s) = bessel_k01_scaled(z)?;
    let damp = (-z).exp();
    let (k0, k1) = (k0s * damp, k1s * damp);
    let f0 = 2.0 * m * epsilon * k1 / r;
    let f1 = 2.0 * m * u * k1 / r; // F₁ = i·f1
    let fm = 2.0 * m * k0;
    let s = 1.0 / (4.0 * PI);
    // (1/4π)[F₀ I − F₁ diag(−1, 1) − F_m offdiag(1, 1)]
    Ok(Mat2([
        [c64::new(f0 * s, f1 * s), c64::new(-fm * s, 0.0)],
        [c64::new(-fm * s, 0.0), c64::new(f0 * s, -f1 * s)],
    ]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMethod {
    /// Closed form for m = 0, Bessel form for m > 0 after a spot-check.
    Auto,
    Closed,
    Bessel,
    Quadrature,
}

/// Kernel evaluator bound to fixed parameters.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    params: PhysicalParams,
    spec: QuadratureSpec,
    resolved: KernelMethod,
}

impl Kernel {
    pub fn new(params: &PhysicalParams, spec: &QuadratureSpec, method: KernelMethod) -> Result<Self> {
        params.validate()?;
        let resolved = match method {
            KernelMethod::Auto if params.mass == 0.0 => KernelMethod::Closed,
            KernelMethod::Auto => {
                spot_check_bessel(params, spec)?;
                KernelMethod::Bessel
            }
            KernelMethod::Closed if params.mass != 0.0 => {
                return Err(Error::invalid("closed-form kernel requires mass = 0"))
            }
            KernelMethod::Bessel if params.mass == 0.0 => {
                return Err(Error::invalid("Bessel kernel requires mass > 0"))
            }
            m => m,
        };
        if resolved == KernelMethod::Quadrature {
            spec.validate(params)?;
        }
        Ok(Kernel { params: *params, spec: *spec, resolved })
    }

    pub fn method(&self) -> KernelMethod {
        self.resolved
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn eval(&self, u: f64) -> Result<Mat2> {
        match self.resolved {
            KernelMethod::Closed => Ok(massless_matrix(self.params.epsilon, u)),
            KernelMethod::Bessel => massive_matrix(self.params.mass, self.params.epsilon, u),
            _ => Ok(kernel_quadrature(&self.params, u, &self.spec)?.matrix),
        }
    }
}

/// Compares the Bessel path with quadrature at a few separations before it
/// is trusted for assembly.
fn spot_check_bessel(params: &PhysicalParams, spec: &QuadratureSpec) -> Result<()> {
    let eps = params.epsilon;
    for u in [0.0, eps, 0.5 * params.lambda, params.lambda] {
        let fast = massive_matrix(params.mass, eps, u)?;
        let slow = kernel_quadrature(params, u, spec)?.matrix;
        let err = (fast - slow).max_abs();
        if err > 1e-9 * slow.max_abs().max(1.0) {
            return Err(Error::NonConvergence(format!(
                "Bessel kernel disagrees with quadrature by {err:e} at u = {u}"
            )));
        }
    }
    Ok(())
}

/// CSV of u and the real/imaginary parts of the four entries, 17 significant digits.
pub fn write_kernel_csv<W: Write>(out: &mut W, values: &[KernelValue]) -> Result<()> {
    writeln!(out, "u,re11,im11,re12,im12,re21,im21,re22,im22")?;
    for v in values {
        write!(out, "{:.16e}", v.u)?;
        for i in 0..2 {
            for j in 0..2 {
                let z = v.matrix.get(i, j);
                write!(out, ",{:.16e},{:.16e}", z.re, z.im)?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m: f64, eps: f64) -> PhysicalParams {
        PhysicalParams::new(m, eps, 1.0).unwrap()
    }

    fn quad(m: f64, eps: f64, u: f64) -> Mat2 {
        let p = params(m, eps);
        let spec = QuadratureSpec::for_params(&p, DEFAULT_TAIL_TOL).unwrap();
        kernel_quadrature(&p, u, &spec).unwrap().matrix
    }

    #[test]
    fn spec_cutoff_meets_tail() {
        let p = params(2.0, 0.3);
        let s = QuadratureSpec::for_params(&p, 1e-12).unwrap();
        assert!(((-0.3 * 2f64.hypot(s.k_max)).exp() / 1e-12 - 1.0).abs() < 1e-9);
        s.validate(&p).unwrap();
        let short = QuadratureSpec { k_max: 1.0, ..s };
        assert!(short.validate(&p).is_err());
    }

    #[test]
    fn massless_at_origin() {
        let k = quad(0.0, 1.0, 0.0);
        let v = 1.0 / (2.0 * PI);
        assert!((k.get(0, 0).re - v).abs() < 1e-12 && (k.get(1, 1).re - v).abs() < 1e-12);
        assert!((v - 0.159_154_9).abs() < 1e-7);
    }

    #[test]
    fn massless_offdiagonal_vanishes() {
        for &(eps, u) in &[(1.0, 0.7), (0.1, -2.0), (0.05, 3.3)] {
            let k = quad(0.0, eps, u);
            assert!(k.get(0, 1).norm() < 1e-12 && k.get(1, 0).norm() < 1e-12);
        }
    }

    #[test]
    fn closed_form_examples() {
        let k = kernel_massless_closed(1.0, 0.0).unwrap().matrix;
        assert_eq!(k, Mat2::diag(1.0 / (2.0 * PI), 1.0 / (2.0 * PI)));
        let k = kernel_massless_closed(1.0, 1.0).unwrap().matrix;
        let want = c64::new(1.0, 1.0) / (4.0 * PI);
        assert!((k.get(0, 0) - want).norm() < 1e-16);
        let a = kernel_massless_closed(0.3, 2.2).unwrap().matrix;
        let b = kernel_massless_closed(0.3, -2.2).unwrap().matrix;
        assert_eq!(a.adjoint(), b);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for &eps in &[1.0, 0.1] {
            for i in -10..=10 {
                let u = 0.5 * i as f64;
                let err = (quad(0.0, eps, u) - massless_matrix(eps, u)).max_abs();
                assert!(err < 1e-10, "eps={eps} u={u}: {err:e}");
            }
        }
    }

    #[test]
    fn bessel_identities_against_quadrature() {
        // scalar part at u = 0: (1/4π)·2mεK₁(mε)/ε
        let k = quad(1.0, 0.5, 0.0);
        let (_, k1) = crate::bessel::bessel_k01(0.5).unwrap();
        assert!((k.get(0, 0).re - 2.0 * 0.5 * k1 / 0.5 / (4.0 * PI)).abs() < 1e-11);

        let b = kernel_massive_bessel(&params(1.0, 1.0), 0.0).unwrap().matrix;
        let (k0, _) = crate::bessel::bessel_k01(1.0).unwrap();
        assert!((b.get(0, 1).re + 2.0 * k0 / (4.0 * PI)).abs() < 1e-15);
        assert!((k0 - 0.421_024_438_2).abs() < 1e-10);
        assert_eq!(b.get(0, 0).im, 0.0);

        let err = (kernel_massive_bessel(&params(2.0, 0.4), 0.7).unwrap().matrix - quad(2.0, 0.4, 0.7)).max_abs();
        assert!(err < 1e-9, "{err:e}");
    }

    #[test]
    fn massless_limit_of_quadrature() {
        let closed = massless_matrix(0.2, 0.6);
        let e3 = (quad(1e-3, 0.2, 0.6) - closed).max_abs();
        let e5 = (quad(1e-5, 0.2, 0.6) - closed).max_abs();
        assert!(e5 < e3 && e5 < 1e-4, "{e3:e} {e5:e}");
    }

    #[test]
    fn hermitian_pair_symmetry_and_decay() {
        let p = params(0.7, 0.2);
        let kern = Kernel::new(&p, &QuadratureSpec::for_params(&p, 1e-12).unwrap(), KernelMethod::Auto).unwrap();
        assert_eq!(kern.method(), KernelMethod::Bessel);
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let u = 0.25 + 0.2 * i as f64;
            let a = kern.eval(u).unwrap();
            let b = kern.eval(-u).unwrap();
            assert!((a - b.adjoint()).max_abs() < 1e-15);
            let norm = a.max_abs();
            assert!(norm <= prev);
            assert!(norm * u <= 0.5);
            prev = norm;
        }
    }

    #[test]
    fn scaling_covariance() {
        for &s in &[0.5, 3.0] {
            let a = massless_matrix(0.3, 1.1);
            let b = massless_matrix(0.3 / s, 1.1 / s).scale(1.0 / s);
            assert!((a - b).max_abs() < 1e-15);
            let qa = quad(0.0, 0.3, 1.1);
            let qb = quad(0.0, 0.3 / s, 1.1 / s).scale(1.0 / s);
            assert!((qa - qb).max_abs() < 1e-10);
        }
    }

    #[test]
    fn panel_budget_is_enforced() {
        let p = params(0.0, 0.01);
        let mut spec = QuadratureSpec::for_params(&p, 1e-12).unwrap();
        spec.panel_budget = 100;
        assert!(matches!(kernel_quadrature(&p, 50.0, &spec), Err(Error::PanelBudget { .. })));
    }

    #[test]
    fn csv_layout() {
        let v = kernel_massless_closed(1.0, 0.5).unwrap();
        let mut buf = Vec::new();
        write_kernel_csv(&mut buf, &[v]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split(',').count(), 9);
        let re11: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(re11, v.matrix.get(0, 0).re);
    }
}

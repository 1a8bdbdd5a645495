//! Momentum-space symbols of the one-dimensional Dirac Hamiltonian.
//!
//! Ĥ(k) = [[−k, m], [m, k]] with eigenvalues ±ω(k), ω(k) = √(k² + m²).
//! The regularized vacuum has symbol e^{−εω(k)} E_−(k) with
//! E_− = ½ − Ĥ/(2ω), so all its eigenvalues lie in [0, 1].

use serde::{Deserialize, Serialize};

use crate::mat2::Mat2;
use crate::{Error, Result};

/// Mass m, ultraviolet cutoff ε and interval length λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mass: f64,
    pub epsilon: f64,
    pub lambda: f64,
}

impl PhysicalParams {
    pub fn new(mass: f64, epsilon: f64, lambda: f64) -> Result<Self> {
        let p = PhysicalParams { mass, epsilon, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass >= 0.0) {
            return Err(Error::invalid(format!("mass must be finite and >= 0, got {}", self.mass)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be finite and > 0, got {}", self.epsilon)));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::invalid(format!("lambda must be finite and > 0, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// A 2×2 matrix-valued symbol evaluated at one momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Symbol2x2 {
    pub momentum: f64,
    pub entries: Mat2,
}

impl Symbol2x2 {
    pub fn eigenvalues(&self) -> [f64; 2] {
        self.entries.hermitian_eigenvalues()
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        (self.entries - self.entries.adjoint()).max_abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

pub fn omega(k: f64, mass: f64) -> f64 {
    k.hypot(mass)
}

pub fn hamiltonian_symbol(k: f64, mass: f64) -> Symbol2x2 {
    Symbol2x2 { momentum: k, entries: Mat2::real([[-k, mass], [mass, k]]) }
}

/// E_±(k) = ½ ± Ĥ(k)/(2ω(k)).
pub fn spectral_projection(k: f64, mass: f64, sign: Sign) -> Result<Symbol2x2> {
    if k == 0.0 && mass == 0.0 {
        return Err(Error::DegenerateMomentum);
    }
    let minus = projector_minus(k, mass);
    let entries = match sign {
        Sign::Minus => minus,
        Sign::Plus => Mat2::IDENTITY - minus,
    };
    Ok(Symbol2x2 { momentum: k, entries })
}

/// E_−(k), with the diagonal entries 1 ± k/ω evaluated without cancellation.
/// At k = m = 0 returns diag(½, ½).
fn projector_minus(k: f64, mass: f64) -> Mat2 {
    let w = omega(k, mass);
    if w == 0.0 {
        return Mat2::diag(0.5, 0.5);
    }
    // 1 − |k|/ω = m² / (ω(ω + |k|))
    let small = mass * mass / (w * (w + k.abs()));
    let large = 1.0 + k.abs() / w;
    let (top, bottom) = if k >= 0.0 { (large, small) } else { (small, large) };
    let off = -mass / w;
    Mat2::real([[top, off], [off, bottom]]).scale(0.5)
}

/// e^{−εω(k)} E_−(k). For m = 0 the value at k = 0 is diag(½, ½).
pub fn regularized_symbol(params: &PhysicalParams, k: f64) -> Symbol2x2 {
    damped_projector(params.epsilon, params.mass, k)
}

fn damped_projector(epsilon: f64, mass: f64, k: f64) -> Symbol2x2 {
    let damp = (-epsilon * omega(k, mass)).exp();
    Symbol2x2 { momentum: k, entries: projector_minus(k, mass).scale(damp) }
}

/// A_α(ξ) = ½ e^{−√(ξ² + (m/α)²)} (1 − Ĥ_{m/α}(ξ)/ω_{m/α}(ξ)).
pub fn rescaled_symbol(alpha: f64, mass: f64, xi: f64) -> Result<Symbol2x2> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be > 0, got {alpha}")));
    }
    Ok(damped_projector(1.0, mass / alpha, xi))
}

/// A_∞(ξ) = e^{−|ξ|} diag(χ_{ξ>0}, χ_{ξ<0}), diag(½, ½) at ξ = 0.
pub fn limit_symbol(xi: f64) -> Symbol2x2 {
    let d = (-xi.abs()).exp();
    let entries = if xi > 0.0 {
        Mat2::diag(d, 0.0)
    } else if xi < 0.0 {
        Mat2::diag(0.0, d)
    } else {
        Mat2::diag(0.5, 0.5)
    };
    Symbol2x2 { momentum: xi, entries }
}

/// High/low frequency split of A_α at |ξ| = ln α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolSplit {
    pub alpha: f64,
    pub mass: f64,
    pub threshold: f64,
}

impl SymbolSplit {
    /// A^>: A_α on |ξ| ≥ ln α, A_∞ below.
    pub fn high_part(&self, xi: f64) -> Symbol2x2 {
        if xi.abs() >= self.threshold {
            damped_projector(1.0, self.mass / self.alpha, xi)
        } else {
            limit_symbol(xi)
        }
    }

    /// A^<: (A_α − A_∞) on |ξ| < ln α, zero above.
    pub fn low_part(&self, xi: f64) -> Symbol2x2 {
        let entries = if xi.abs() >= self.threshold {
            Mat2::ZERO
        } else {
            damped_projector(1.0, self.mass / self.alpha, xi).entries - limit_symbol(xi).entries
        };
        Symbol2x2 { momentum: xi, entries }
    }

    /// max |A^>(ξ) − A_∞(ξ)| (entrywise) over `samples` log-spaced |ξ| in
    /// [ln α, xi_max], both signs.
    pub fn sup_deviation(&self, xi_max: f64, samples: usize) -> f64 {
        let lo = self.threshold.ln();
        let hi = xi_max.max(self.threshold * 1.000_001).ln();
        let samples = samples.max(2);
        (0..samples)
            .flat_map(|i| {
                let r = (lo + (hi - lo) * i as f64 / (samples - 1) as f64).exp();
                [r, -r]
            })
            .map(|xi| (self.high_part(xi).entries - limit_symbol(xi).entries).max_abs())
            .fold(0.0, f64::max)
    }
}

/// Requires α > e so that the threshold ln α exceeds 1.
pub fn split_symbol(alpha: f64, mass: f64) -> Result<SymbolSplit> {
    if !(alpha.is_finite() && alpha > std::f64::consts::E) {
        return Err(Error::invalid(format!("split needs alpha > e, got {alpha}")));
    }
    if !(mass.is_finite() && mass >= 0.0) {
        return Err(Error::invalid(format!("mass must be >= 0, got {mass}")));
    }
    Ok(SymbolSplit { alpha, mass, threshold: alpha.ln() })
}

//! Modified Bessel functions of the second kind, orders 0 and 1.
//!
//! Power series for z ≤ 2, Steed's continued fraction (Temme's form) above.
//! Both return K₀ and K₁ together; the massive kernel needs the pair.

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;

/// (K₀(z), K₁(z)) for z > 0.
pub fn bessel_k01(z: f64) -> Result<(f64, f64)> {
    let (k0, k1) = bessel_k01_scaled(z)?;
    let damp = (-z).exp();
    Ok((k0 * damp, k1 * damp))
}

/// (e^z K₀(z), e^z K₁(z)) for z > 0; finite for every positive z.
pub fn bessel_k01_scaled(z: f64) -> Result<(f64, f64)> {
    if !(z.is_finite() && z >= f64::MIN_POSITIVE) {
        return Err(Error::BesselDomain(z));
    }
    if z <= SERIES_LIMIT {
        let (k0, k1) = series(z);
        let grow = z.exp();
        Ok((k0 * grow, k1 * grow))
    } else {
        steed(z)
    }
}

pub fn bessel_k0(z: f64) -> Result<f64> {
    Ok(bessel_k01(z)?.0)
}

pub fn bessel_k1(z: f64) -> Result<f64> {
    Ok(bessel_k01(z)?.1)
}

fn series(z: f64) -> (f64, f64) {
    let q = 0.25 * z * z;
    let log_half = (0.5 * z).ln();

    // K₀ = -(ln(z/2) + γ) I₀ + Σ_{k≥1} H_k q^k / (k!)²
    // K₁ = 1/z + ln(z/2) I₁ - (z/4) Σ_{k≥0} (ψ(k+1) + ψ(k+2)) q^k / (k!(k+1)!)
    let mut term0 = 1.0; // q^k / (k!)²
    let mut term1 = 1.0; // q^k / (k!(k+1)!)
    let mut harmonic = 0.0; // H_k
    let mut i0 = 1.0;
    let mut i1_sum = 1.0;
    let mut k0_sum = 0.0;
    let mut k1_sum = 2.0 * (-EULER_GAMMA) + 1.0; // ψ(1) + ψ(2)
    for k in 1..60 {
        let kf = k as f64;
        term0 *= q / (kf * kf);
        term1 *= q / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        i0 += term0;
        i1_sum += term1;
        k0_sum += harmonic * term0;
        // ψ(k+1) + ψ(k+2) = -2γ + 2H_k + 1/(k+1)
        k1_sum += (-2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (kf + 1.0)) * term1;
        if term0 < 1e-18 * i0 && term1 < 1e-18 * i1_sum {
            break;
        }
    }
    let i1 = 0.5 * z * i1_sum;
    let k0 = -(log_half + EULER_GAMMA) * i0 + k0_sum;
    let k1 = 1.0 / z + log_half * i1 - 0.25 * z * k1_sum;
    (k0, k1)
}

/// Scaled (K₀, K₁) from the Steed continued fraction, valid for z ≳ 2.
fn steed(z: f64) -> Result<(f64, f64)> {
    const EPS: f64 = 1e-17;
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + z);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut converged = false;
    for i in 2..20_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!("Bessel continued fraction at z = {z}")));
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * z)).sqrt() / s;
    let k1 = k0 * (z + 0.5 - h) / z;
    Ok((k0, k1))
}

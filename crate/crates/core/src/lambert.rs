//! Principal branch of the Lambert W function on `[0, ∞)`.
//!
//! Every argument produced by the association-radius and dominant-radius
//! expressions is nonnegative, so only `W₀` restricted to the well-conditioned
//! half line is provided.

use std::f64::consts::E;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 64;
const STEP_TOLERANCE: f64 = 1e-14;

/// Solves `w·eʷ = z` for `w ≥ 0`.
///
/// Halley iteration seeded by the power series for small `z`, a log1p form
/// up to `e`, and the asymptotic expansion `L₁ − L₂ + L₂/L₁` above `e`.
pub fn lambert_w0(z: f64) -> Result<f64> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::domain("lambert_w0", format!("argument {z} is not in [0, ∞)")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(f64::INFINITY);
    }

    let mut w = initial_guess(z);
    for _ in 0..MAX_ITERATIONS {
        let step = halley_step(w, z);
        w -= step;
        if step.abs() <= STEP_TOLERANCE * w.abs() {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(z: f64) -> f64 {
    if z < 0.25 {
        // W(z) = z − z² + 3/2 z³ − 8/3 z⁴ + …
        z * (1.0 - z * (1.0 - z * (1.5 - z * 8.0 / 3.0)))
    } else if z <= E {
        let l = z.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

fn halley_step(w: f64, z: f64) -> f64 {
    if w > 1.0 {
        // Residual in log form keeps eʷ from overflowing for huge z.
        let f = w + w.ln() - z.ln();
        let fp = 1.0 + 1.0 / w;
        let fpp = -1.0 / (w * w);
        f * fp / (fp * fp - 0.5 * f * fpp)
    } else {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
    }
}

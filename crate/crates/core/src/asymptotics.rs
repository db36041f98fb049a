//! Truncated small-ε and small-δ expansions of the control-induced Hopf
//! quantities, plus the log-log regression used to measure empirical
//! convergence orders against the exact numerics.
//!
//! Series are transcribed to the printed order and no further; validators
//! test order bounds rather than extrapolating coefficients. With
//! x = ½πε and α±_{m,j} = 4j + (-1)^m - 2 ∓ 1:
//!
//! ```text
//! Ω⁻ = α⁻ (-x + 2m x²)               Ω⁺ = α⁺ (-x - 2(m+1) x²)
//! ω⁻ = ½π (-1 + 2m α⁻ x)             ω⁺ = ½π (1 - 2(m+1) α⁺ x)
//! B⁻ = (π α⁻/4m)(-x + (4m²-α⁻) x²/2m)
//! B⁺ = (π α⁺/4(m+1))(-x - (4(m+1)²+α⁺) x²/2(m+1))
//! ```
//!
//! and in δ = 1/(2m+1), uniformly over |ω| ≤ π/2 with c = cos ω,
//! s = sin ω:
//!
//! ```text
//! Ω = -(2c/π)(δ - sδ²)               B = -c(δ² - 2sδ³)
//! ε± = (4c/π²)(δ² + (2ω/π ∓ 2 - s)δ³)
//! B⁺01 = -c(δ² + (2ω/π - 2 - s)δ³)   B⁻11 = -c(δ² + (2ω/π + 2 - s)δ³)
//! ```

use crate::scaling::{Parity, ProblemScale, ResonanceIndex};
use crate::twoscale::Branch;
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// One validation sample: a numeric value against its truncated series.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionSample {
    /// quantity label, e.g. "B-[m=1,j=1]" or "Omega(delta,0)"
    pub quantity: String,
    /// the small parameter the series is taken in (ε or δ)
    pub parameter: f64,
    pub numeric: f64,
    pub series: f64,
}

impl ExpansionSample {
    pub fn residual(&self) -> f64 {
        (self.numeric - self.series).abs()
    }
}

/// Truncated ε-series (Ω, ω, B) of the Hopf point (m, j, ±).
///
/// The ω value follows the odd-k convention (even k adds π). The minus
/// branch carries m in denominators and therefore requires m ≥ 1; the
/// plus branch is valid from m = 0.
pub fn eps_expand(m: u64, j: u64, branch: Branch, eps: f64) -> Result<(f64, f64, f64)> {
    if matches!(branch, Branch::Minus) && m == 0 {
        return Err(Error::InvalidParameter(
            "the minus-branch series has m in denominators; m = 0 is excluded".into(),
        ));
    }
    let idx = ResonanceIndex::new(m, j)?;
    let x = 0.5 * PI * eps;
    let mf = m as f64;
    Ok(match branch {
        Branch::Minus => {
            let alpha = idx.alpha_minus;
            let omega_slow = alpha * (-x + 2.0 * mf * x * x);
            let omega = 0.5 * PI * (-1.0 + 2.0 * mf * alpha * x);
            let big_b =
                PI / (4.0 * mf) * alpha * (-x + (4.0 * mf * mf - alpha) / (2.0 * mf) * x * x);
            (omega_slow, omega, big_b)
        }
        Branch::Plus => {
            let alpha = idx.alpha_plus;
            let m1 = mf + 1.0;
            let omega_slow = alpha * (-x - 2.0 * m1 * x * x);
            let omega = 0.5 * PI * (1.0 - 2.0 * m1 * alpha * x);
            let big_b =
                PI / (4.0 * m1) * alpha * (-x - (4.0 * m1 * m1 + alpha) / (2.0 * m1) * x * x);
            (omega_slow, omega, big_b)
        }
    })
}

/// Truncated series of the stabilization-interval boundaries and of the
/// interval-certifying families, all at the Hopf scale ε.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundarySeries {
    pub eps: f64,
    /// physical lower boundary -½π²ε² - ¾π³ε³
    pub b_lower: f64,
    /// physical upper boundary -½π²ε² + ¼π³ε³
    pub b_upper: f64,
    /// scaled B⁺_{0,1} = -(½π)²ε - 3(½π)³ε²
    pub big_b_01_plus: f64,
    /// scaled B⁻_{1,1} = -(½π)²ε + (½π)³ε²
    pub big_b_11_minus: f64,
}

/// Boundary series at the scale of k.
pub fn boundary_expansion(scale: &ProblemScale) -> Result<BoundarySeries> {
    if scale.k == 0 {
        return Err(Error::InvalidParameter(
            "boundary expansions are defined for k >= 1".into(),
        ));
    }
    let e = scale.eps;
    let h = 0.5 * PI;
    Ok(BoundarySeries {
        eps: e,
        b_lower: -0.5 * PI * PI * e * e - 0.75 * PI.powi(3) * e.powi(3),
        b_upper: -0.5 * PI * PI * e * e + 0.25 * PI.powi(3) * e.powi(3),
        big_b_01_plus: -h * h * e - 3.0 * h.powi(3) * e * e,
        big_b_11_minus: -h * h * e + h.powi(3) * e * e,
    })
}

/// Series of the family envelopes at the switch index: B⁻_{m,j_m} and
/// B⁺_{m,j_m+1}.
pub fn family_switch_series(m: u64, eps: f64) -> (f64, f64) {
    let h = 0.5 * PI;
    let mf = m as f64;
    let b_minus = -h * h * eps + (2.0 * mf - 1.0) * h.powi(3) * eps * eps;
    let b_plus = -h * h * eps - (2.0 * mf + 3.0) * h.powi(3) * eps * eps;
    (b_minus, b_plus)
}

/// Truncated δ-series at a fast frequency ω, |ω| ≤ π/2.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeltaExpansion {
    pub delta: f64,
    pub omega: f64,
    pub omega_slow: f64,
    pub big_b: f64,
    pub eps_plus: f64,
    pub eps_minus: f64,
    pub big_b_01_plus_at_eps_plus: f64,
    pub big_b_11_minus_at_eps_minus: f64,
}

/// δ-expansions of the curve, the hashing scale ε±(δ, ω), and the interval
/// boundaries expressed through them.
pub fn delta_expand(delta: f64, omega: f64) -> Result<DeltaExpansion> {
    if omega.abs() > 0.5 * PI + 1e-12 {
        return Err(Error::OutsideDomain(
            "delta expansions hold uniformly only on |omega| <= pi/2".into(),
        ));
    }
    if !(delta > 0.0 && delta <= 1.0 / 3.0 + 1e-12) {
        return Err(Error::InvalidParameter(
            "delta must lie in (0, 1/3] (m >= 1)".into(),
        ));
    }
    let (c, s) = (omega.cos(), omega.sin());
    let d2 = delta * delta;
    let d3 = d2 * delta;
    let two_over_pi = 2.0 / PI;
    let w_norm = omega / (0.5 * PI);
    Ok(DeltaExpansion {
        delta,
        omega,
        omega_slow: -two_over_pi * c * (delta - s * d2),
        big_b: -c * (d2 - 2.0 * s * d3),
        eps_plus: two_over_pi * two_over_pi * c * (d2 + (w_norm - 2.0 - s) * d3),
        eps_minus: two_over_pi * two_over_pi * c * (d2 + (w_norm + 2.0 - s) * d3),
        big_b_01_plus_at_eps_plus: -c * (d2 + (w_norm - 2.0 - s) * d3),
        big_b_11_minus_at_eps_minus: -c * (d2 + (w_norm + 2.0 - s) * d3),
    })
}

/// Leading series of the curve minimum, B_min(δ) = -δ².
pub fn b_min_expansion(delta: f64) -> f64 {
    -delta * delta
}

/// Least-squares slope of log(error) against log(h).
///
/// Requires at least three strictly positive errors; a zero error means
/// exact agreement and is reported as the +∞ sentinel.
pub fn order_fit(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::InvalidParameter(
            "order_fit needs at least 3 samples".into(),
        ));
    }
    if samples.iter().any(|&(_, e)| e == 0.0) {
        return Ok(f64::INFINITY);
    }
    if samples.iter().any(|&(h, e)| h <= 0.0 || e < 0.0) {
        return Err(Error::InvalidParameter(
            "order_fit needs positive step sizes and nonnegative errors".into(),
        ));
    }
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(h, e) in samples {
        let (x, y) = (h.ln(), e.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// Convenience: odd-k fast-frequency window shift for a parity.
pub fn omega_parity_shift(parity: Parity) -> f64 {
    if parity.is_odd() {
        0.0
    } else {
        PI
    }
}

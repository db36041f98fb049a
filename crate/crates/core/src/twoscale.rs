//! The ε-free two-scale characteristic equation for purely imaginary
//! eigenvalues.
//!
//! With Ω̃ = Ω + 1/δ, δ = 1/(2m+1), the equation χ₀ = 0 is equivalent to
//! the real system
//!
//! ```text
//! 0 = H(δ, Ω, ω) = Ω̃ sin(πΩ/2) - (-1)^k cos(ω - πΩ/2),
//! B = (-1)^k sin²(πΩ/2) / cos ω,
//! ```
//!
//! and elimination of ω leaves the quadratic relation
//!
//! ```text
//! 0 = Q(δ, Ω, B) = (Ω̃²-1) B² + Ω̃ sin(πΩ̃) B + cos²(πΩ̃/2)
//! ```
//!
//! whose roots are the control branches B±(Ω). All trigonometric
//! quantities are evaluated in the shifted variable Ω (never at the large
//! argument Ω̃) through sin(πΩ/2) = -(-1)^m cos(πΩ̃/2) and
//! sin(πΩ̃) = -sin(πΩ), which keeps full precision for large m.

use crate::scaling::Parity;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Recover the integer resonance index m from δ = 1/(2m+1).
pub(crate) fn m_of_delta(delta: f64) -> u64 {
    ((1.0 / delta - 1.0) / 2.0).round() as u64
}

/// Which root of the quadratic control relation a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// A solution point of the two-scale system with its control value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TwoScalePoint {
    pub delta: f64,
    pub omega_slow: f64,
    pub omega: f64,
    pub branch: Branch,
    pub big_b: f64,
    pub parity: Parity,
}

/// Boundaries of the Ω-domain of the m-th curve: the two solutions of
/// D = 0 on either side of the resonance Ω_m = 2m+1.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DomainBounds {
    pub m: u64,
    /// Ω̲̃_m ∈ (2m, 2m+1)
    pub omega_lower_tilde: f64,
    /// Ω̃_m^max ∈ (2m+1, 2m+2)
    pub omega_max_tilde: f64,
    /// Ω̲_m = Ω̲̃_m - Ω_m ∈ (-1, 0)
    pub omega_lower: f64,
    /// fast frequency ω̲ = ½π·Ω̲_m at the fold (odd k)
    pub omega_at_min: f64,
}

/// H(δ, Ω, ω) of the two-scale system.
#[inline]
pub fn eval_h(delta: f64, omega_slow: f64, omega: f64, parity: Parity) -> f64 {
    let omega_tilde = omega_slow + 1.0 / delta;
    omega_tilde * (0.5 * PI * omega_slow).sin()
        - parity.sign() * (omega - 0.5 * PI * omega_slow).cos()
}

/// The two fast-frequency branches ω±(Ω) solving H = 0:
/// ω± = πΩ/2 ± arccos(-Ω̃ sin(πΩ/2)), shifted by π for even k.
pub fn omega_branches(delta: f64, omega_slow: f64, parity: Parity) -> Result<(f64, f64)> {
    let omega_tilde = omega_slow + 1.0 / delta;
    let mut arg = -omega_tilde * (0.5 * PI * omega_slow).sin();
    if arg.abs() > 1.0 {
        if arg.abs() > 1.0 + 1e-12 {
            return Err(Error::OutsideDomain(format!(
                "arccos argument {arg} outside [-1, 1] (Omega = {omega_slow}, delta = {delta})"
            )));
        }
        arg = arg.clamp(-1.0, 1.0);
    }
    let acos = arg.acos();
    let shift = if parity.is_odd() { 0.0 } else { PI };
    let base = 0.5 * PI * omega_slow + shift;
    let plus = base + acos;
    let mut minus = base - acos;
    // for m = 0 the raw minus value lies in [-π, -π/2] (odd k); lift it by a
    // full turn so the branch stays connected in [π, 3π/2]
    if m_of_delta(delta) == 0 && parity.is_odd() {
        minus += 2.0 * PI;
    }
    Ok((plus, minus))
}

/// Discriminant D = cos²(πΩ̃/2) (1 - (Ω̃ cos(πΩ̃/2))²) of the quadratic
/// control relation, evaluated through the shifted variable.
#[inline]
pub fn discriminant(delta: f64, omega_slow: f64) -> f64 {
    let omega_tilde = omega_slow + 1.0 / delta;
    let s = (0.5 * PI * omega_slow).sin(); // |s| = |cos(πΩ̃/2)|
    s * s * (1.0 - (omega_tilde * s) * (omega_tilde * s))
}

/// Ω̃² - 1 in the cancellation-free factored form (Ω+2m)(Ω+2m+2).
#[inline]
fn omega_tilde_sq_minus_1(delta: f64, omega_slow: f64) -> f64 {
    let two_m = 1.0 / delta - 1.0;
    (omega_slow + two_m) * (omega_slow + two_m + 2.0)
}

/// Q(δ, Ω, B), using sin(πΩ̃) = -sin(πΩ) and cos²(πΩ̃/2) = sin²(πΩ/2).
#[inline]
pub fn eval_q(delta: f64, omega_slow: f64, big_b: f64) -> f64 {
    let omega_tilde = omega_slow + 1.0 / delta;
    let s = (0.5 * PI * omega_slow).sin();
    omega_tilde_sq_minus_1(delta, omega_slow) * big_b * big_b
        - omega_tilde * (PI * omega_slow).sin() * big_b
        + s * s
}

/// The two control branches (B⁺, B⁻) solving Q = 0.
///
/// The larger-magnitude root is computed from the quadratic formula
/// without cancellation and the other recovered from the product of roots,
/// which keeps full relative accuracy through the removable singularity at
/// Ω̃ = 1 (m = 0), where B⁻ → π/2 and B⁺ → 0.
pub fn b_branches(delta: f64, omega_slow: f64) -> Result<(f64, f64)> {
    let m = m_of_delta(delta);
    let omega_tilde = omega_slow + 1.0 / delta;
    if omega_slow == 0.0 {
        // Hopf-frequency boundary: limit values along the curve
        return Ok(if m == 0 { (0.0, 0.5 * PI) } else { (0.0, 0.0) });
    }
    let d = discriminant(delta, omega_slow);
    if d < -1e-15 {
        return Err(Error::OutsideDomain(format!(
            "negative discriminant D = {d} at Omega = {omega_slow}, delta = {delta}"
        )));
    }
    let sqrt_d = d.max(0.0).sqrt();
    let a = omega_tilde_sq_minus_1(delta, omega_slow);
    let s = (0.5 * PI * omega_slow).sin();
    // u = -½ Ω̃ sin(πΩ̃) = ½ Ω̃ sin(πΩ)
    let u = 0.5 * omega_tilde * (PI * omega_slow).sin();
    let c = s * s;
    let (plus, minus);
    if u <= 0.0 {
        minus = (u - sqrt_d) / a;
        plus = (c / a) / minus;
    } else {
        plus = (u + sqrt_d) / a;
        minus = (c / a) / plus;
    }
    Ok((plus, minus))
}

/// B from the fast-frequency form B = (-1)^k sin²(πΩ/2)/cos ω.
pub fn b_from_omega(_delta: f64, omega_slow: f64, omega: f64, parity: Parity) -> Result<f64> {
    let c = omega.cos();
    if c.abs() < 1e-12 {
        return Err(Error::NearSingular {
            what: "cos(omega) at the Hopf-frequency boundary",
            magnitude: c.abs(),
        });
    }
    let s = (0.5 * PI * omega_slow).sin();
    Ok(parity.sign() * s * s / c)
}

/// The domain boundaries of the m-th curve (m ≥ 1), from bisection of
/// Ω̃ (-1)^m cos(πΩ̃/2) = 1 on either side of the resonance. In the
/// shifted variable the equation reads -Ω̃ sin(πΩ/2) = 1 on the lower
/// side and +Ω̃ sin(πΩ/2) = 1 on the upper side.
pub fn domain_bounds(m: u64) -> Result<DomainBounds> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "domain_bounds requires m >= 1 (the m = 0 curve has no fold)".into(),
        ));
    }
    let delta = 1.0 / (2 * m + 1) as f64;
    let bisect = |sign: f64, mut lo: f64, mut hi: f64| {
        let g = |omega_slow: f64| {
            let omega_tilde = omega_slow + 1.0 / delta;
            sign * omega_tilde * (0.5 * PI * omega_slow).sin() - 1.0
        };
        let mut flo = g(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = g(mid);
            if flo * fm <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
                flo = fm;
            }
            if hi - lo < 1e-17 {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let omega_lower = bisect(-1.0, -1.0 + 1e-9, -1e-9);
    let omega_upper = bisect(1.0, 1e-9, 1.0 - 1e-9);
    let omega_m = (2 * m + 1) as f64;
    Ok(DomainBounds {
        m,
        omega_lower_tilde: omega_m + omega_lower,
        omega_max_tilde: omega_m + omega_upper,
        omega_lower,
        omega_at_min: 0.5 * PI * omega_lower,
    })
}

/// ω⁺ branch in odd-k coordinates (no canonical lifting).
#[inline]
pub(crate) fn omega_plus_odd(delta: f64, omega_slow: f64) -> f64 {
    let omega_tilde = omega_slow + 1.0 / delta;
    let arg = (-omega_tilde * (0.5 * PI * omega_slow).sin()).clamp(-1.0, 1.0);
    0.5 * PI * omega_slow + arg.acos()
}

/// ω⁻ branch in odd-k coordinates (no canonical lifting).
#[inline]
pub(crate) fn omega_minus_odd(delta: f64, omega_slow: f64) -> f64 {
    let omega_tilde = omega_slow + 1.0 / delta;
    let arg = (-omega_tilde * (0.5 * PI * omega_slow).sin()).clamp(-1.0, 1.0);
    0.5 * PI * omega_slow - arg.acos()
}

/// Invert the lower branch: given ω on the strictly decreasing ω⁻ piece
/// (odd-k coordinates), return the slow frequency Ω ∈ [Ω̲_m, 0].
pub(crate) fn omega_slow_on_minus_branch(delta: f64, omega: f64, bounds: &DomainBounds) -> f64 {
    // ω⁻(Ω) decreases from ω̲ at Ω̲_m to -π/2 at Ω = 0
    let (mut lo, mut hi) = (bounds.omega_lower, 0.0);
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if omega_minus_odd(delta, mid) > omega {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Invert the upper branch: given ω on the strictly increasing ω⁺ piece
/// (odd-k coordinates), return the slow frequency Ω ∈ [Ω_floor, 0].
pub(crate) fn omega_slow_on_plus_branch(delta: f64, omega: f64, omega_floor: f64) -> f64 {
    let (mut lo, mut hi) = (omega_floor, 0.0);
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if omega_plus_odd(delta, mid) < omega {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// dΩ/dω along the curve from implicit differentiation of H = 0 (odd k).
pub(crate) fn d_omega_slow_d_omega(delta: f64, omega_slow: f64, omega: f64) -> f64 {
    let omega_tilde = omega_slow + 1.0 / delta;
    let s_cap = (0.5 * PI * omega_slow).sin();
    let c_cap = (0.5 * PI * omega_slow).cos();
    let s = (omega - 0.5 * PI * omega_slow).sin();
    let h_omega_slow = s_cap + 0.5 * PI * omega_tilde * c_cap + 0.5 * PI * s;
    s / h_omega_slow
}

/// Zero-derivative condition d(Ω, ω) = sin²(πΩ/2) sin ω + ½π cos ω sin(ω - πΩ)
/// for critical points of B along a branch.
#[inline]
pub fn critical_condition(omega_slow: f64, omega: f64) -> f64 {
    let s = (0.5 * PI * omega_slow).sin();
    s * s * omega.sin() + 0.5 * PI * omega.cos() * (omega - PI * omega_slow).sin()
}

/// Critical points of B along the ω⁻ branch (m ≥ 1, odd-k coordinates),
/// returned as (Ω*, ω*) pairs. The minimum of B⁻ is among them.
pub fn critical_points_b_minus(delta: f64) -> Result<Vec<(f64, f64)>> {
    let m = m_of_delta(delta);
    if m == 0 {
        return Err(Error::InvalidParameter(
            "critical_points_b_minus requires m >= 1".into(),
        ));
    }
    let bounds = domain_bounds(m)?;
    let n = 4096;
    let w_lo = -0.5 * PI + 1e-9;
    let w_hi = bounds.omega_at_min - 1e-9;
    if w_hi <= w_lo {
        return Ok(Vec::new());
    }
    let d_at = |w: f64| {
        let os = omega_slow_on_minus_branch(delta, w, &bounds);
        critical_condition(os, w)
    };
    let mut out = Vec::new();
    let mut prev_w = w_lo;
    let mut prev_d = d_at(prev_w);
    for i in 1..=n {
        let w = w_lo + (w_hi - w_lo) * i as f64 / n as f64;
        let d = d_at(w);
        if prev_d == 0.0 || prev_d * d < 0.0 {
            let (mut a, mut b) = (prev_w, w);
            let mut fa = prev_d;
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                let fm = d_at(mid);
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            let w_star = 0.5 * (a + b);
            let os_star = omega_slow_on_minus_branch(delta, w_star, &bounds);
            out.push((os_star, w_star));
        }
        prev_w = w;
        prev_d = d;
    }
    Ok(out)
}

/// The minimum of B over the m-th curve, located among the critical
/// points of the ω⁻ branch. Returns (B_min, (Ω*, ω*)).
pub fn b_min_on_curve(delta: f64) -> Result<(f64, (f64, f64))> {
    let crit = critical_points_b_minus(delta)?;
    let mut best: Option<(f64, (f64, f64))> = None;
    for &(os, w) in &crit {
        let b = b_from_omega(delta, os, w, Parity::Odd)?;
        if best.map(|(bb, _)| b < bb).unwrap_or(true) {
            best = Some((b, (os, w)));
        }
    }
    best.ok_or_else(|| Error::OutsideDomain("no critical point of B- found".into()))
}

/// The unique intersection of the line ω = πΩ with the two-scale curve
/// (lower branch, odd-k coordinates), returned as (Ω*, ω*).
pub fn star_intersection(delta: f64) -> Result<(f64, f64)> {
    let m = m_of_delta(delta);
    if m == 0 {
        return Err(Error::InvalidParameter(
            "star_intersection requires m >= 1".into(),
        ));
    }
    let bounds = domain_bounds(m)?;
    // h(ω) = ω - πΩ(ω) runs from negative at ω = -π/2 (where Ω = 0) to
    // positive at ω̲ (where πΩ̲ < ω̲ = πΩ̲/2 < 0)
    let h = |w: f64| w - PI * omega_slow_on_minus_branch(delta, w, &bounds);
    let (mut a, mut b) = (-0.5 * PI + 1e-12, bounds.omega_at_min - 1e-12);
    let mut fa = h(a);
    if fa > 0.0 || h(b) < 0.0 {
        return Err(Error::OutsideDomain(format!(
            "no intersection of omega = pi*Omega with the curve at delta = {delta}"
        )));
    }
    for _ in 0..90 {
        let mid = 0.5 * (a + b);
        let fm = h(mid);
        if fa * fm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    let w_star = 0.5 * (a + b);
    Ok((omega_slow_on_minus_branch(delta, w_star, &bounds), w_star))
}

/// χ₀(δ, ω, Ω, B) = Ω̃ + (-1)^k i e^{iω} - B⁻¹ sin(πΩ/2) e^{iπΩ/2}.
pub fn chi0(delta: f64, omega: f64, omega_slow: f64, big_b: f64, parity: Parity) -> Complex64 {
    let omega_tilde = omega_slow + 1.0 / delta;
    let i = Complex64::I;
    omega_tilde + parity.sign() * i * (i * omega).exp()
        - (0.5 * PI * omega_slow).sin() / big_b * (i * 0.5 * PI * omega_slow).exp()
}

/// One sampled row of a curve export.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurveSample {
    pub delta: f64,
    pub omega_slow: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub b_plus: f64,
    pub b_minus: f64,
    pub discriminant: f64,
}

/// Sample the m-th curve on n points of its Ω-domain (B < 0 side for
/// m ≥ 1, the full window for m = 0).
pub fn sample_curve(m: u64, n: usize, parity: Parity) -> Result<Vec<CurveSample>> {
    if n < 2 {
        return Err(Error::InvalidParameter("sample_curve needs n >= 2".into()));
    }
    let delta = 1.0 / (2 * m + 1) as f64;
    let omega_floor = if m == 0 {
        -1.0 + 1e-9
    } else {
        domain_bounds(m)?.omega_lower + 1e-12
    };
    let grid: Vec<f64> = (0..n)
        .map(|i| omega_floor * (1.0 - i as f64 / (n - 1) as f64) - 1e-12)
        .collect();
    let rows = crate::par::map_slice(&grid, |&omega_slow| -> Result<CurveSample> {
        let (omega_plus, omega_minus) = omega_branches(delta, omega_slow, parity)?;
        let (b_plus, b_minus) = b_branches(delta, omega_slow)?;
        Ok(CurveSample {
            delta,
            omega_slow,
            omega_plus,
            omega_minus,
            b_plus,
            b_minus,
            discriminant: discriminant(delta, omega_slow),
        })
    });
    rows.into_iter().collect()
}

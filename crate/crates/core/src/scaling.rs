//! Parameter vocabulary: Hopf index k, resonance index m, strip index j,
//! and the exact conversions among ε, λ, b, B, δ and the frequency
//! representations (ω̃, Ω̃, Ω, ω).

use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Parity of the Hopf index k; it enters the characteristic equation only
/// through the sign (-1)^k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(k: u64) -> Self {
        if k.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// (-1)^k as a float.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    #[inline]
    pub fn is_odd(self) -> bool {
        matches!(self, Parity::Odd)
    }
}

/// The Hopf branch index k and its derived quantities.
///
/// ω_k = (k+½)π is the Hopf frequency, ε = 1/ω_k the small parameter,
/// λ_k = (-1)^{k+1} ω_k the bifurcation parameter, and p_k = 2π/ω_k =
/// 4/(2k+1) the constant minimal period of the bifurcating branch.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProblemScale {
    pub k: u64,
    pub omega_k: f64,
    pub eps: f64,
    pub lambda_k: f64,
    pub p_k: f64,
}

impl ProblemScale {
    pub fn new(k: u64) -> Self {
        let two_k1 = (2 * k + 1) as f64;
        let omega_k = two_k1 * PI / 2.0;
        let eps = 1.0 / omega_k;
        let lambda_k = -Parity::of(k).sign() * omega_k;
        let p_k = 4.0 / two_k1;
        ProblemScale {
            k,
            omega_k,
            eps,
            lambda_k,
            p_k,
        }
    }

    #[inline]
    pub fn parity(&self) -> Parity {
        Parity::of(self.k)
    }
}

/// Construct the scale for Hopf branch k.
pub fn make_scale(k: u64) -> ProblemScale {
    ProblemScale::new(k)
}

/// A nonzero physical control amplitude b together with its scaled form
/// B = b/(2ε). Both representations are stored at construction so that the
/// round trip b → B → b is exact.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ControlAmplitude {
    b: f64,
    big_b: f64,
}

impl ControlAmplitude {
    pub fn from_physical(b: f64, scale: &ProblemScale) -> Result<Self> {
        if b == 0.0 || !b.is_finite() {
            return Err(Error::InvalidParameter(
                "control amplitude b must be finite and nonzero".into(),
            ));
        }
        Ok(ControlAmplitude {
            b,
            big_b: b / (2.0 * scale.eps),
        })
    }

    pub fn from_scaled(big_b: f64, scale: &ProblemScale) -> Result<Self> {
        if big_b == 0.0 || !big_b.is_finite() {
            return Err(Error::InvalidParameter(
                "scaled control amplitude B must be finite and nonzero".into(),
            ));
        }
        Ok(ControlAmplitude {
            b: 2.0 * scale.eps * big_b,
            big_b,
        })
    }

    #[inline]
    pub fn physical(&self) -> f64 {
        self.b
    }

    #[inline]
    pub fn scaled(&self) -> f64 {
        self.big_b
    }
}

/// Resonance bookkeeping for the family near the odd-integer resonance
/// Ω_m = 2m+1: the strip index j, the switch index j_m = ⌊(m+1)/2⌋, the
/// hashing shift a_{m,j} = 2j-1+½(-1)^m, and the expansion coefficients
/// α±_{m,j} = 4j+(-1)^m-2∓1.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResonanceIndex {
    pub m: u64,
    pub j: u64,
    pub omega_m: f64,
    pub delta: f64,
    pub j_m: u64,
    pub a_mj: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
}

impl ResonanceIndex {
    pub fn new(m: u64, j: u64) -> Result<Self> {
        if j == 0 {
            return Err(Error::InvalidParameter("strip index j must be >= 1".into()));
        }
        let m_sign = Parity::of(m).sign();
        let omega_m = (2 * m + 1) as f64;
        Ok(ResonanceIndex {
            m,
            j,
            omega_m,
            delta: 1.0 / omega_m,
            j_m: m.div_ceil(2),
            a_mj: 2.0 * j as f64 - 1.0 + 0.5 * m_sign,
            alpha_plus: 4.0 * j as f64 + m_sign - 3.0,
            alpha_minus: 4.0 * j as f64 + m_sign - 1.0,
        })
    }
}

/// The frequency entourage of a complex eigenvalue μ = μ_R + iω̃: the slow
/// frequency Ω̃ = εω̃, the resonance index m placing Ω = Ω̃ - Ω_m in the
/// admissible window, and the reduced fast frequency ω ≡ ω̃ (mod 2π) in
/// [-π/2, 3π/2).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FrequencyEntourage {
    pub omega_tilde: f64,
    pub omega_tilde_slow: f64,
    pub m: u64,
    pub omega_slow: f64,
    pub omega: f64,
}

/// Reduce a fast frequency mod 2π into the canonical window [-π/2, 3π/2).
pub fn reduce_omega(omega_tilde: f64) -> f64 {
    let mut w = omega_tilde.rem_euclid(2.0 * PI);
    if w >= 1.5 * PI {
        w -= 2.0 * PI;
    }
    w
}

/// Attach the frequency entourage to a positive imaginary part ω̃.
///
/// The resonance index m is the unique one with Ω = Ω̃ - (2m+1) in the
/// half-open window (-1, 0] for m = 0 and (-2, 0] for m ≥ 1 (boundary
/// Ω = 0 included, the lower end excluded).
pub fn entourage_of(mu_imag: f64, scale: &ProblemScale) -> Result<FrequencyEntourage> {
    if mu_imag <= 0.0 || !mu_imag.is_finite() {
        return Err(Error::InvalidParameter(
            "entourage_of requires a finite positive imaginary part".into(),
        ));
    }
    let omega_tilde_slow = scale.eps * mu_imag;
    let m = if omega_tilde_slow <= 1.0 {
        0u64
    } else {
        // smallest m >= 1 with Omega_tilde <= 2m+1
        ((omega_tilde_slow - 1.0) / 2.0).ceil() as u64
    };
    let omega_slow = omega_tilde_slow - (2 * m + 1) as f64;
    let lower = if m == 0 { -1.0 } else { -2.0 };
    if !(omega_slow > lower && omega_slow <= 0.0) {
        return Err(Error::OutsideDomain(format!(
            "slow frequency Omega = {omega_slow} has no admissible resonance window (m = {m})"
        )));
    }
    Ok(FrequencyEntourage {
        omega_tilde: mu_imag,
        omega_tilde_slow,
        m,
        omega_slow,
        omega: reduce_omega(mu_imag),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ULP4: f64 = 4.0 * f64::EPSILON;

    #[test]
    fn scale_k0_matches_slow_branch() {
        let s = make_scale(0);
        assert!((s.omega_k - PI / 2.0).abs() < ULP4);
        assert!((s.p_k - 4.0).abs() < ULP4);
        assert!((s.lambda_k + PI / 2.0).abs() < ULP4);
    }

    #[test]
    fn scale_k1_and_k10_direct_formulas() {
        let s1 = make_scale(1);
        assert!((s1.p_k - 4.0 / 3.0).abs() < ULP4);
        assert!((s1.lambda_k - 1.5 * PI).abs() < 4.0 * f64::EPSILON * s1.omega_k);

        let s10 = make_scale(10);
        assert!((s10.eps - 1.0 / (10.5 * PI)).abs() < ULP4);
        assert!((s10.lambda_k + 10.5 * PI).abs() < 4.0 * f64::EPSILON * s10.omega_k);
    }

    #[test]
    fn derived_identities_hold_up_to_large_k() {
        for k in [0u64, 1, 2, 7, 100, 12345, 1_000_000] {
            let s = make_scale(k);
            assert!((s.eps * s.omega_k - 1.0).abs() <= ULP4, "k = {k}");
            assert!(
                (s.p_k * (2 * k + 1) as f64 - 4.0).abs() <= 4.0 * ULP4,
                "k = {k}"
            );
            assert_eq!(s.lambda_k.signum(), -Parity::of(k).sign(), "k = {k}");
        }
    }

    #[test]
    fn control_amplitude_round_trips_exactly() {
        let s = make_scale(5);
        for b in [-0.3, 1.7e-4, 2.5, -1e8] {
            let c = ControlAmplitude::from_physical(b, &s).unwrap();
            assert_eq!(c.physical(), b);
            let c2 = ControlAmplitude::from_scaled(c.scaled(), &s).unwrap();
            assert_eq!(c2.scaled(), c.scaled());
        }
        assert!(ControlAmplitude::from_physical(0.0, &s).is_err());
        assert!(ControlAmplitude::from_scaled(0.0, &s).is_err());
    }

    #[test]
    fn resonance_index_identities() {
        for m in 1..=12u64 {
            let jm = m.div_ceil(2);
            let at_jm = ResonanceIndex::new(m, jm).unwrap();
            // a_{m,j_m} = ½ δ⁻¹ - 1
            assert!(
                (at_jm.a_mj - (0.5 / at_jm.delta - 1.0)).abs() < ULP4,
                "m = {m}"
            );
            // α⁻ at j_m is 2m, α⁺ at j_m+1 is 2(m+1)
            assert_eq!(at_jm.alpha_minus, 2.0 * m as f64, "m = {m}");
            let next = ResonanceIndex::new(m, jm + 1).unwrap();
            assert_eq!(next.alpha_plus, 2.0 * (m + 1) as f64, "m = {m}");
            assert!((at_jm.delta * at_jm.omega_m - 1.0).abs() < ULP4);
        }
    }

    #[test]
    fn entourage_trivial_hopf_and_resonances() {
        let s = make_scale(7);
        // trivial Hopf frequency: Omega_tilde = 1, m = 0, Omega = 0
        let e = entourage_of(s.omega_k, &s).unwrap();
        assert_eq!(e.m, 0);
        assert!(e.omega_slow.abs() < 1e-12);
        assert!((e.omega_tilde_slow - 1.0).abs() < 1e-12);

        // exact 3:1 resonance
        let e3 = entourage_of(3.0 / s.eps, &s).unwrap();
        assert_eq!(e3.m, 1);
        assert!(e3.omega_slow.abs() < 1e-9);

        // Omega_tilde = 2.6 -> m = 1, Omega = -0.4
        let e26 = entourage_of(2.6 / s.eps, &s).unwrap();
        assert_eq!(e26.m, 1);
        assert!((e26.omega_slow + 0.4).abs() < 1e-9);
    }

    #[test]
    fn reduced_omega_is_congruent_mod_2pi() {
        let s = make_scale(4);
        for i in 1..200 {
            let wt = 0.37 * i as f64;
            let e = entourage_of(wt, &s).unwrap();
            assert!(e.omega >= -PI / 2.0 - 1e-15 && e.omega < 1.5 * PI);
            let ratio = (wt - e.omega) / (2.0 * PI);
            assert!((ratio - ratio.round()).abs() < 1e-9, "omega_tilde = {wt}");
        }
    }
}

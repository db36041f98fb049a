//! The characteristic function ψ of the controlled linearization, its
//! partial derivatives, Newton refinement of complex roots, the real
//! eigenvalue branch B(μ_R), and the spectrum at vanishing control.
//!
//! Everything here works with the scaled form
//!
//! ```text
//! ψ(μ, ε, B) = -εBμ - (-1)^k B e^{-μ} + ½ (1 + e^{-πεμ}),
//! ```
//!
//! which is -εB times the residual of the unscaled characteristic equation
//! μ = -(-1)^k ε⁻¹ e^{-μ} + b⁻¹ (1 + e^{-πεμ}) at b = 2εB.

use crate::scaling::{entourage_of, FrequencyEntourage, Parity, ProblemScale};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// |ψ| threshold for accepting a refined root.
pub const TOL_ROOT: f64 = 1e-12;

/// A refined characteristic root μ = μ_R + iω̃ with its residual and,
/// for strictly complex roots, the frequency entourage.
#[derive(Debug, Clone, Serialize)]
pub struct Eigenvalue {
    pub mu: (f64, f64),
    pub residual: f64,
    pub entourage: Option<FrequencyEntourage>,
}

impl Eigenvalue {
    fn new(mu: Complex64, residual: f64, scale: &ProblemScale) -> Self {
        // conjugates are never stored; normalize to the upper half plane
        let mu = if mu.im < 0.0 { mu.conj() } else { mu };
        let entourage = if mu.im > 1e-9 {
            entourage_of(mu.im, scale).ok()
        } else {
            None
        };
        Eigenvalue {
            mu: (mu.re, mu.im),
            residual,
            entourage,
        }
    }

    #[inline]
    pub fn mu_complex(&self) -> Complex64 {
        Complex64::new(self.mu.0, self.mu.1)
    }
}

/// ψ(μ, ε, B) for arbitrary ε and parity of k.
#[inline]
pub fn psi(mu: Complex64, eps: f64, big_b: f64, parity: Parity) -> Complex64 {
    let sgn = parity.sign();
    -eps * big_b * mu - sgn * big_b * (-mu).exp() + 0.5 * (1.0 + (-PI * eps * mu).exp())
}

/// ψ at the Hopf scale ε = 1/ω_k of `scale`.
#[inline]
pub fn eval_psi(mu: Complex64, scale: &ProblemScale, big_b: f64) -> Complex64 {
    psi(mu, scale.eps, big_b, scale.parity())
}

/// The partial derivatives (ψ_μ, ψ_ε, ψ_B).
#[derive(Debug, Clone, Copy)]
pub struct PsiDerivatives {
    pub psi_mu: Complex64,
    pub psi_eps: Complex64,
    pub psi_b: Complex64,
}

/// Closed forms of the partial derivatives of ψ.
#[inline]
pub fn psi_derivatives_raw(mu: Complex64, eps: f64, big_b: f64, parity: Parity) -> PsiDerivatives {
    let sgn = parity.sign();
    let em = (-mu).exp();
    let epm = (-PI * eps * mu).exp();
    PsiDerivatives {
        psi_mu: -eps * big_b + sgn * big_b * em - 0.5 * PI * eps * epm,
        psi_eps: -mu * (big_b + 0.5 * PI * epm),
        psi_b: -eps * mu - sgn * em,
    }
}

/// Partial derivatives at the Hopf scale of `scale`.
#[inline]
pub fn psi_derivatives(mu: Complex64, scale: &ProblemScale, big_b: f64) -> PsiDerivatives {
    psi_derivatives_raw(mu, scale.eps, big_b, scale.parity())
}

/// Solve the real characteristic equation for B at a prescribed real
/// eigenvalue μ_R:
///
/// ```text
/// B(μ_R) = ½ (1 + e^{-πεμ_R}) / (εμ_R + (-1)^k e^{-μ_R}).
/// ```
///
/// For odd k the denominator vanishes at the unique positive root of
/// εμ = e^{-μ} (the uncontrolled real eigenvalue); near that point an
/// error is returned instead of a huge value.
pub fn real_eig_b(mu_r: f64, scale: &ProblemScale) -> Result<f64> {
    let eps = scale.eps;
    let denom = eps * mu_r + scale.parity().sign() * (-mu_r).exp();
    if denom.abs() < 1e-8 * (1.0 + (eps * mu_r).abs()) {
        return Err(Error::VanishingDenominator { mu_r });
    }
    Ok(0.5 * (1.0 + (-PI * eps * mu_r).exp()) / denom)
}

/// Global maximum of B(μ_R) over μ_R ∈ ℝ for even k, returned as
/// (B_max, argmax). The bracket [-50, 50] is justified by B → 0 at ±∞;
/// a tail check asserts the endpoints lie below the maximum.
pub fn b_max(scale: &ProblemScale) -> Result<(f64, f64)> {
    if scale.parity().is_odd() {
        return Err(Error::InvalidParameter(
            "b_max is defined for even k only".into(),
        ));
    }
    let eval = |mu: f64| real_eig_b(mu, scale).expect("even k denominator is positive");
    let (lo, hi) = (-50.0, 50.0);
    let n = 4001;
    let mut best_i: usize = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let mu = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let v = eval(mu);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let step = (hi - lo) / (n - 1) as f64;
    let a = lo + step * (best_i.saturating_sub(1)) as f64;
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    let (arg, val) = golden_max(eval, a, b, 1e-13);
    if eval(lo) >= val || eval(hi) >= val {
        return Err(Error::OutsideDomain(
            "B(mu_R) does not decay inside the search bracket".into(),
        ));
    }
    Ok((val, arg))
}

/// Golden-section maximization on [a, b] for a unimodal-near-peak function.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Magnitude of the terms of ψ at μ; the acceptance tolerance scales with
/// it so that huge |B| (vanishing-control proxies) stay reachable.
fn psi_scale(mu: Complex64, eps: f64, big_b: f64) -> f64 {
    1.0 + (eps * big_b * mu).norm() + big_b.abs() * (-mu.re).exp().min(1e6)
}

/// Damped Newton refinement of a root of ψ from `guess`.
///
/// Steps are halved up to 20 times until |ψ| decreases; convergence is
/// |ψ| ≤ `TOL_ROOT` relative to the magnitude of ψ's terms, failure after
/// 60 iterations or on a near-singular derivative.
pub fn newton_root(guess: Complex64, scale: &ProblemScale, big_b: f64) -> Result<Eigenvalue> {
    if big_b == 0.0 {
        return Err(Error::InvalidParameter(
            "newton_root requires B != 0".into(),
        ));
    }
    let mut mu = guess;
    let mut r = eval_psi(mu, scale, big_b);
    let mut rn = r.norm();
    for it in 0..60 {
        if rn <= TOL_ROOT * psi_scale(mu, scale.eps, big_b) {
            return Ok(Eigenvalue::new(
                mu,
                rn / psi_scale(mu, scale.eps, big_b),
                scale,
            ));
        }
        let d = psi_derivatives(mu, scale, big_b).psi_mu;
        let dn = d.norm();
        if dn < 1e-14 * (1.0 + big_b.abs()) {
            return Err(Error::NearSingular {
                what: "psi_mu in Newton iteration",
                magnitude: dn,
            });
        }
        let mut step = r / d;
        let mut accepted = false;
        for _ in 0..20 {
            let cand = mu - step;
            let rc = eval_psi(cand, scale, big_b);
            if rc.norm() < rn {
                mu = cand;
                r = rc;
                rn = rc.norm();
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::Convergence {
                what: "Newton refinement of psi root",
                iterations: it,
                residual: rn,
            });
        }
    }
    let sc = psi_scale(mu, scale.eps, big_b);
    if rn <= TOL_ROOT * sc {
        Ok(Eigenvalue::new(mu, rn / sc, scale))
    } else {
        Err(Error::Convergence {
            what: "Newton refinement of psi root",
            iterations: 60,
            residual: rn,
        })
    }
}

/// Residual of the uncontrolled characteristic equation εμ + (-1)^k e^{-μ}.
#[inline]
pub fn uncontrolled_residual(mu: Complex64, scale: &ProblemScale) -> Complex64 {
    scale.eps * mu + scale.parity().sign() * (-mu).exp()
}

fn newton_uncontrolled(guess: Complex64, scale: &ProblemScale) -> Option<Complex64> {
    let sgn = scale.parity().sign();
    let mut mu = guess;
    for _ in 0..80 {
        let g = scale.eps * mu + sgn * (-mu).exp();
        if g.norm() < 1e-14 {
            return Some(mu);
        }
        let dg = scale.eps - sgn * (-mu).exp();
        if dg.norm() < 1e-300 {
            return None;
        }
        mu -= g / dg;
    }
    None
}

/// Spectrum at vanishing control B = ±∞ with nonnegative real part: the
/// trivial eigenvalue iω_k, one simple unstable complex root per strip
/// (ω_k - 2jπ, ω_k - 2jπ + π/2) for j = 1..⌊k/2⌋, and for odd k the
/// positive real root of εμ = e^{-μ}.
pub fn uncontrolled_spectrum(scale: &ProblemScale) -> Vec<Eigenvalue> {
    let mut out = Vec::new();
    let trivial = Complex64::new(0.0, scale.omega_k);
    out.push(Eigenvalue::new(
        trivial,
        uncontrolled_residual(trivial, scale).norm(),
        scale,
    ));

    for j in 1..=(scale.k / 2) {
        let y_lo = scale.omega_k - 2.0 * PI * j as f64;
        let y_c = y_lo + 0.25 * PI;
        let x0 = -(scale.eps * y_c).ln();
        let guess = Complex64::new(x0.max(0.05), y_c);
        let root = newton_uncontrolled(guess, scale)
            .filter(|mu| mu.re > 0.0 && mu.im > y_lo && mu.im < y_lo + 0.5 * PI)
            .unwrap_or_else(|| {
                grid_refine_min(
                    |mu| uncontrolled_residual(mu, scale).norm(),
                    0.0,
                    (-(scale.eps * y_lo).ln()).max(1.0) + 3.0,
                    y_lo,
                    y_lo + 0.5 * PI,
                )
            });
        out.push(Eigenvalue::new(
            root,
            uncontrolled_residual(root, scale).norm(),
            scale,
        ));
    }

    if scale.parity().is_odd() {
        // unique positive solution of εμ = e^{-μ}
        let f = |mu: f64| scale.eps * mu - (-mu).exp();
        let (mut a, mut b) = (0.0, 2.0 * (1.0 / scale.eps).ln() + 5.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let mu = Complex64::new(0.5 * (a + b), 0.0);
        out.push(Eigenvalue::new(
            mu,
            uncontrolled_residual(mu, scale).norm(),
            scale,
        ));
    }
    out
}

/// Locate the minimum of |f| on a rectangle by repeated grid refinement.
/// Independent of any Newton path; also used as a test oracle.
pub fn grid_refine_min(
    f: impl Fn(Complex64) -> f64,
    mut x_lo: f64,
    mut x_hi: f64,
    mut y_lo: f64,
    mut y_hi: f64,
) -> Complex64 {
    let n = 24;
    let mut best = Complex64::new(0.5 * (x_lo + x_hi), 0.5 * (y_lo + y_hi));
    for _ in 0..60 {
        let mut best_v = f64::INFINITY;
        for i in 0..=n {
            for jj in 0..=n {
                let z = Complex64::new(
                    x_lo + (x_hi - x_lo) * i as f64 / n as f64,
                    y_lo + (y_hi - y_lo) * jj as f64 / n as f64,
                );
                let v = f(z);
                if v < best_v {
                    best_v = v;
                    best = z;
                }
            }
        }
        let dx = (x_hi - x_lo) / n as f64;
        let dy = (y_hi - y_lo) / n as f64;
        x_lo = best.re - 1.5 * dx;
        x_hi = best.re + 1.5 * dx;
        y_lo = best.im - 1.5 * dy;
        y_hi = best.im + 1.5 * dy;
        if dx.max(dy) < 1e-15 * (1.0 + best.norm()) {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::make_scale;
    use proptest::prelude::*;

    #[test]
    fn zero_eigenvalue_on_the_zero_line() {
        // mu = 0 is a root exactly at B = (-1)^k
        for k in 1..=8u64 {
            let s = make_scale(k);
            let b0 = s.parity().sign();
            let v = eval_psi(Complex64::new(0.0, 0.0), &s, b0);
            assert_eq!(v.norm(), 0.0, "k = {k}");
        }
    }

    #[test]
    fn trivial_hopf_pair_is_a_root_for_any_b() {
        for k in [0u64, 1, 3, 10, 49] {
            let s = make_scale(k);
            for b in [-2.0, -0.3, 0.7, 5.0] {
                let v = eval_psi(Complex64::new(0.0, s.omega_k), &s, b);
                assert!(
                    v.norm() < 1e-12 * (1.0 + b.abs()) * (1.0 + s.omega_k * f64::EPSILON / 1e-16),
                    "k = {k}, B = {b}, |psi| = {}",
                    v.norm()
                );
            }
        }
    }

    #[test]
    fn psi_is_scaled_residual_of_the_unscaled_equation() {
        // psi = -eps*B * (mu - RHS of the unscaled characteristic equation)
        let s = make_scale(3);
        let big_b = -0.5;
        let b = 2.0 * s.eps * big_b;
        let mu = Complex64::new(0.3, 2.0);
        let rhs = -s.parity().sign() / s.eps * (-mu).exp() + (1.0 + (-PI * s.eps * mu).exp()) / b;
        let oracle = -s.eps * big_b * (mu - rhs);
        let v = eval_psi(mu, &s, big_b);
        assert!(v.norm() > 0.1, "test point should be far from a root");
        assert!((v - oracle).norm() < 1e-13 * (1.0 + oracle.norm()));
    }

    proptest! {
        #[test]
        fn conjugation_symmetry(re in -3.0f64..3.0, im in -40.0f64..40.0,
                                b in -5.0f64..5.0, k in 0u64..12) {
            prop_assume!(b.abs() > 1e-3);
            let s = make_scale(k);
            let mu = Complex64::new(re, im);
            let lhs = eval_psi(mu.conj(), &s, b);
            let rhs = eval_psi(mu, &s, b).conj();
            prop_assert!((lhs - rhs).norm() <= 4.0 * f64::EPSILON * (1.0 + rhs.norm()));
        }

        #[test]
        fn scaled_residual_identity_on_random_samples(
            re in -2.0f64..2.0, im in -30.0f64..30.0,
            b in -4.0f64..4.0, k in 1u64..10,
        ) {
            prop_assume!(b.abs() > 1e-2);
            let s = make_scale(k);
            let mu = Complex64::new(re, im);
            let bb = 2.0 * s.eps * b;
            let rhs = -s.parity().sign() / s.eps * (-mu).exp()
                + (1.0 + (-PI * s.eps * mu).exp()) / bb;
            let oracle = -s.eps * b * (mu - rhs);
            let v = eval_psi(mu, &s, b);
            let scale_mag = 1.0 + v.norm() + (s.eps * b * mu).norm() + b.abs();
            prop_assert!((v - oracle).norm() <= 1e-13 * scale_mag);
        }
    }

    #[test]
    fn derivatives_match_centered_differences() {
        let s = make_scale(5);
        let big_b = -0.7;
        let h = 1e-6;
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng_state = rng_state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let mu = Complex64::new(4.0 * next() - 2.0, 30.0 * next() - 15.0);
            let d = psi_derivatives(mu, &s, big_b);

            let dmu_fd = (psi(mu + h, s.eps, big_b, s.parity())
                - psi(mu - h, s.eps, big_b, s.parity()))
                / (2.0 * h);
            assert!((d.psi_mu - dmu_fd).norm() < 1e-6 * (1.0 + d.psi_mu.norm()));

            let deps_fd = (psi(mu, s.eps + h, big_b, s.parity())
                - psi(mu, s.eps - h, big_b, s.parity()))
                / (2.0 * h);
            assert!((d.psi_eps - deps_fd).norm() < 1e-6 * (1.0 + d.psi_eps.norm()));

            let db_fd = (psi(mu, s.eps, big_b + h, s.parity())
                - psi(mu, s.eps, big_b - h, s.parity()))
                / (2.0 * h);
            assert!((d.psi_b - db_fd).norm() < 1e-6 * (1.0 + d.psi_b.norm()));
        }
    }

    #[test]
    fn b_psi_b_identity_at_roots() {
        // at any root, B psi_B = -½(1 + e^{-πεμ})
        let s = make_scale(4);
        let big_b = -0.8;
        let root = newton_root(Complex64::new(0.1, s.omega_k - 2.0 * PI + 0.4), &s, big_b);
        if let Ok(ev) = root {
            let mu = ev.mu_complex();
            let d = psi_derivatives(mu, &s, big_b);
            let rhs = -0.5 * (1.0 + (-PI * s.eps * mu).exp());
            assert!((big_b * d.psi_b - rhs).norm() < 1e-9);
        }
    }

    #[test]
    fn real_eig_b_zero_line_and_decay() {
        let s_even = make_scale(2);
        assert!((real_eig_b(0.0, &s_even).unwrap() - 1.0).abs() < 1e-14);
        let s_odd = make_scale(3);
        assert!((real_eig_b(0.0, &s_odd).unwrap() + 1.0).abs() < 1e-14);
        // B -> 0 for mu_R -> ±inf (decay like 1/(2 eps mu_R) on the right)
        for s in [&s_even, &s_odd] {
            let far = real_eig_b(2000.0, s).unwrap().abs();
            assert!(far < 0.01, "B(2000) = {far}");
            assert!(far < real_eig_b(200.0, s).unwrap().abs());
            assert!(real_eig_b(-200.0, s).unwrap().abs() < 1e-10);
        }
        // odd k: vanishing denominator at the uncontrolled real eigenvalue
        let spec = uncontrolled_spectrum(&s_odd);
        let real_root = spec.iter().find(|e| e.mu.1 == 0.0).unwrap().mu.0;
        assert!(matches!(
            real_eig_b(real_root, &s_odd),
            Err(Error::VanishingDenominator { .. })
        ));
    }

    #[test]
    fn b_max_exceeds_one_and_is_stationary() {
        for k in [2u64, 4, 10] {
            let s = make_scale(k);
            let (bm, arg) = b_max(&s).unwrap();
            assert!(bm > 1.0, "k = {k}: B_max = {bm}");
            let h = 1e-5;
            let d =
                (real_eig_b(arg + h, &s).unwrap() - real_eig_b(arg - h, &s).unwrap()) / (2.0 * h);
            assert!(d.abs() < 1e-6, "k = {k}: dB/dmu at argmax = {d}");
        }
        assert!(b_max(&make_scale(3)).is_err());
    }

    #[test]
    fn b_max_k10_frozen_value() {
        // frozen from an independent golden-section search over the closed
        // form of B(mu_R) on [-50, 50] (the oracle below)
        let s = make_scale(10);
        let oracle_b =
            |mu: f64| 0.5 * (1.0 + (-PI * s.eps * mu).exp()) / (s.eps * mu + (-mu).exp());
        let mut best = (0.0, f64::NEG_INFINITY);
        for i in 0..200_000 {
            let mu = -50.0 + 100.0 * i as f64 / 199_999.0;
            let v = oracle_b(mu);
            if v > best.1 {
                best = (mu, v);
            }
        }
        let (arg, val) = golden_max(oracle_b, best.0 - 0.01, best.0 + 0.01, 1e-13);
        let (bm, am) = b_max(&s).unwrap();
        assert!((bm - val).abs() < 1e-10);
        assert!((am - arg).abs() < 1e-6);
        // frozen values computed with the oracle above
        assert!((bm - 6.319_259_890_399_794).abs() < 1e-9, "B_max = {bm}");
        assert!((am - 3.329_724_898_292_6).abs() < 1e-6, "argmax = {am}");
    }

    #[test]
    fn newton_from_exact_guesses() {
        let s = make_scale(6);
        let ev = newton_root(Complex64::new(0.0, s.omega_k), &s, -1.3).unwrap();
        assert!((ev.mu_complex() - Complex64::new(0.0, s.omega_k)).norm() < 1e-10);

        let s3 = make_scale(3);
        let ev0 = newton_root(Complex64::new(0.0, 0.0), &s3, s3.parity().sign()).unwrap();
        assert!(ev0.mu_complex().norm() < 1e-12);
    }

    #[test]
    fn newton_near_vanishing_control_matches_uncontrolled_oracle() {
        // B = -1e6 is a proxy for vanishing control; the strip roots must be
        // close to the roots of the uncontrolled equation.
        let s = make_scale(5);
        let y_lo = s.omega_k - 2.0 * PI;
        let oracle = grid_refine_min(
            |mu| uncontrolled_residual(mu, &s).norm(),
            0.0,
            5.0,
            y_lo,
            y_lo + 0.5 * PI,
        );
        let guess = Complex64::new(oracle.re + 0.05, oracle.im - 0.03);
        let ev = newton_root(guess, &s, -1e6).unwrap();
        assert!(
            (ev.mu_complex() - oracle).norm() < 1e-5,
            "root {:?} vs oracle {oracle}",
            ev.mu
        );
    }

    #[test]
    fn uncontrolled_spectrum_counts() {
        // k = 0: stable slowly oscillating branch, no unstable roots
        let s0 = make_scale(0);
        let spec0 = uncontrolled_spectrum(&s0);
        assert_eq!(spec0.len(), 1); // trivial only
        assert!(spec0[0].mu.0.abs() < 1e-14);

        // k = 1: exactly one unstable root, real
        let s1 = make_scale(1);
        let spec1 = uncontrolled_spectrum(&s1);
        let unstable: Vec<_> = spec1.iter().filter(|e| e.mu.0 > 1e-9).collect();
        assert_eq!(unstable.len(), 1);
        assert_eq!(unstable[0].mu.1, 0.0);

        // k = 4: two unstable conjugate pairs, one per strip, cross-checked
        // against the grid-refinement oracle
        let s4 = make_scale(4);
        let spec4 = uncontrolled_spectrum(&s4);
        let unstable: Vec<_> = spec4.iter().filter(|e| e.mu.0 > 1e-9).collect();
        assert_eq!(unstable.len(), 2);
        for (j, ev) in unstable.iter().enumerate() {
            let y_lo = s4.omega_k - 2.0 * PI * (j + 1) as f64;
            assert!(ev.mu.1 > y_lo && ev.mu.1 < y_lo + 0.5 * PI, "strip {j}");
            let oracle = grid_refine_min(
                |mu| uncontrolled_residual(mu, &s4).norm(),
                0.0,
                6.0,
                y_lo,
                y_lo + 0.5 * PI,
            );
            assert!((ev.mu_complex() - oracle).norm() < 1e-7);
            assert!(ev.residual < 1e-10);
        }
    }

    #[test]
    fn simplicity_of_zero_eigenvalue_on_zero_line() {
        // |psi_mu| at mu = 0, B = (-1)^k stays away from zero
        for k in 1..=8u64 {
            let s = make_scale(k);
            let d = psi_derivatives(Complex64::new(0.0, 0.0), &s, s.parity().sign());
            assert!(d.psi_mu.norm() > 0.5, "k = {k}");
        }
    }
}

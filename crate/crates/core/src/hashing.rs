//! The hashing relation tying the slow frequency Ω to the reduced fast
//! frequency ω at fixed ε, and the enumeration of control-induced Hopf
//! points B±_{m,j} as intersections of hashing lines with the two-scale
//! curves.
//!
//! The relation reads
//!
//! ```text
//! Ω = ε (ω + ½π (1 - (-1)^k - (-1)^m) - 2πj),   ω ∈ [-π/2, 3π/2),
//! ```
//!
//! and the full fast frequency is recovered by
//!
//! ```text
//! ω̃ = ω + 2π (km + ⌊(k+1)/2⌋ + ⌊(m+1)/2⌋ - j).
//! ```
//!
//! In odd-k branch coordinates both parities share the same line
//! Ω = ε(ω - π a_{m,j}) with a_{m,j} = 2j - 1 + ½(-1)^m; the parity
//! corrections cancel against the π-shift of the branches.

use crate::charpoly::{eval_psi, psi_derivatives};
use crate::scaling::{reduce_omega, Parity, ProblemScale};
use crate::twoscale::{
    b_from_omega, chi0, d_omega_slow_d_omega, domain_bounds, omega_slow_on_minus_branch,
    omega_slow_on_plus_branch, Branch, DomainBounds,
};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Grid resolution for bracketing intersections on each monotone piece.
const BRACKET_GRID: usize = 2048;

/// An enumerated control-induced Hopf bifurcation.
#[derive(Debug, Clone, Serialize)]
pub struct HopfPoint {
    pub k: u64,
    pub m: u64,
    pub j: u64,
    pub branch: Branch,
    /// reduced fast frequency in [-π/2, 3π/2)
    pub omega: f64,
    /// slow frequency Ω = Ω̃ - (2m+1)
    pub omega_slow: f64,
    /// full fast frequency ω̃ = Ω̃/ε
    pub omega_tilde: f64,
    /// scaled control value at the crossing
    pub big_b: f64,
    pub eps: f64,
    /// sign of d Re μ / dB at the crossing (+1 destabilizing, -1
    /// stabilizing, 0 at a flagged tangency)
    pub crossing_sign: i8,
    /// set when the hashing line is tangent to the branch or meets it in
    /// several nearby points
    pub multiplicity_note: bool,
}

/// Phase offset ½π (1 - (-1)^k - (-1)^m) of the hashing relation.
#[inline]
pub fn hash_phase(parity_k: Parity, m: u64) -> f64 {
    0.5 * PI * (1.0 - parity_k.sign() - Parity::of(m).sign())
}

/// Residual Ω - ε(ω + phase - 2πj) of the hashing relation.
#[inline]
pub fn hash_residual(
    eps: f64,
    parity_k: Parity,
    m: u64,
    j: u64,
    omega: f64,
    omega_slow: f64,
) -> f64 {
    omega_slow - eps * (omega + hash_phase(parity_k, m) - 2.0 * PI * j as f64)
}

/// Recover the full fast frequency from its window representative.
pub fn unwrap_omega(omega: f64, k: u64, m: u64, j: u64) -> Result<f64> {
    let turns = (k as i64) * (m as i64) + k.div_ceil(2) as i64 + m.div_ceil(2) as i64 - j as i64;
    let omega_tilde = omega + 2.0 * PI * turns as f64;
    if omega_tilde <= 0.0 {
        return Err(Error::OutsideDomain(format!(
            "unwrapped frequency {omega_tilde} is not positive (k={k}, m={m}, j={j})"
        )));
    }
    Ok(omega_tilde)
}

/// One monotone piece of the two-scale curve, parametrized by the odd-k
/// fast frequency.
struct Piece {
    branch: Branch,
    w_lo: f64,
    w_hi: f64,
    delta: f64,
    omega_floor: f64,
    bounds: Option<DomainBounds>,
}

impl Piece {
    fn omega_slow_at(&self, w: f64) -> f64 {
        match self.branch {
            Branch::Minus => {
                omega_slow_on_minus_branch(self.delta, w, self.bounds.as_ref().unwrap())
            }
            Branch::Plus => omega_slow_on_plus_branch(self.delta, w, self.omega_floor),
        }
    }
}

fn pieces_for(m: u64) -> Result<(f64, f64, Vec<Piece>)> {
    let delta = 1.0 / (2 * m + 1) as f64;
    if m == 0 {
        // only the negative-control branch is enumerated; for m = 0 that is
        // the fast ω⁺ piece over ω ∈ [0, π/2]
        Ok((
            delta,
            -1.0,
            vec![Piece {
                branch: Branch::Plus,
                w_lo: 1e-12,
                w_hi: 0.5 * PI - 1e-12,
                delta,
                omega_floor: -1.0 + 1e-12,
                bounds: None,
            }],
        ))
    } else {
        let bounds = domain_bounds(m)?;
        let w_fold = bounds.omega_at_min;
        Ok((
            delta,
            bounds.omega_lower,
            vec![
                Piece {
                    branch: Branch::Minus,
                    w_lo: -0.5 * PI + 1e-12,
                    w_hi: w_fold - 1e-12,
                    delta,
                    omega_floor: bounds.omega_lower,
                    bounds: Some(bounds),
                },
                Piece {
                    branch: Branch::Plus,
                    w_lo: w_fold + 1e-12,
                    w_hi: 0.5 * PI - 1e-12,
                    delta,
                    omega_floor: bounds.omega_lower,
                    bounds: Some(bounds),
                },
            ],
        ))
    }
}

/// Enumerate the Hopf points of resonance family m at the scale's ε.
///
/// For m = 0 these are the stabilizing points B⁺_{0,j} < 0; for m ≥ 1
/// both branches of the negative-control curve are intersected. The strip
/// index runs upward until the hashing line drops below the curve domain.
/// Multiple ω⁺ intersections of one line are all returned and flagged.
pub fn hopf_points(scale: &ProblemScale, m: u64) -> Result<Vec<HopfPoint>> {
    let eps = scale.eps;
    let parity = scale.parity();
    let (delta, omega_floor, pieces) = pieces_for(m)?;
    // a_{m,j} = 2j - 1 + ½(-1)^m
    let a_of = |j: u64| 2.0 * j as f64 - 1.0 + 0.5 * Parity::of(m).sign();

    // cache each piece's curve samples once; the same grid serves every j
    let grids: Vec<Vec<(f64, f64)>> = pieces
        .iter()
        .map(|piece| {
            (0..=BRACKET_GRID)
                .map(|i| {
                    let w = piece.w_lo + (piece.w_hi - piece.w_lo) * i as f64 / BRACKET_GRID as f64;
                    (w, piece.omega_slow_at(w))
                })
                .collect()
        })
        .collect();

    let mut out = Vec::new();
    let mut j = 1u64;
    loop {
        let a = a_of(j);
        // highest slow frequency the line reaches over the branch window
        let line_top = eps * (0.5 * PI - PI * a);
        if line_top < omega_floor {
            break;
        }
        for (piece, grid) in pieces.iter().zip(&grids) {
            let g = |w: f64| piece.omega_slow_at(w) - eps * (w - PI * a);
            let mut roots = Vec::new();
            for win in grid.windows(2) {
                let (w0, os0) = win[0];
                let (w1, os1) = win[1];
                let g0 = os0 - eps * (w0 - PI * a);
                let g1 = os1 - eps * (w1 - PI * a);
                if g0 == 0.0 || g0 * g1 < 0.0 {
                    let (mut lo, mut hi, mut flo) = (w0, w1, g0);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        let fm = g(mid);
                        if flo * fm <= 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                            flo = fm;
                        }
                    }
                    roots.push(0.5 * (lo + hi));
                }
            }
            let multiple = roots.len() > 1;
            for w_odd in roots {
                let omega_slow = piece.omega_slow_at(w_odd);
                // actual window representative for this parity
                let omega_act = if parity.is_odd() {
                    reduce_omega(w_odd)
                } else {
                    reduce_omega(w_odd + PI)
                };
                // integer strip index consistent with the representative
                let j_exact = (omega_act + hash_phase(parity, m) - omega_slow / eps) / (2.0 * PI);
                let j_round = j_exact.round();
                if j_round < 1.0 {
                    continue;
                }
                let j_act = j_round as u64;
                let big_b = b_from_omega(delta, omega_slow, omega_act, parity)?;
                let omega_tilde = unwrap_omega(omega_act, scale.k, m, j_act)?;
                let slope = d_omega_slow_d_omega(delta, omega_slow, w_odd);
                let tangent = (slope - eps).abs() < 1e-8 * eps.max(slope.abs());
                let crossing_sign = if tangent {
                    0
                } else {
                    crossing_direction_at(Complex64::new(0.0, omega_tilde), scale, big_b)
                };
                out.push(HopfPoint {
                    k: scale.k,
                    m,
                    j: j_act,
                    branch: piece.branch,
                    omega: omega_act,
                    omega_slow,
                    omega_tilde,
                    big_b,
                    eps,
                    crossing_sign,
                    multiplicity_note: multiple || tangent,
                });
            }
        }
        j += 1;
        if j > 100_000 {
            break;
        }
    }
    out.sort_by(|p, q| {
        p.j.cmp(&q.j).then_with(|| {
            let pb = matches!(p.branch, Branch::Plus) as u8;
            let qb = matches!(q.branch, Branch::Plus) as u8;
            pb.cmp(&qb)
        })
    });
    Ok(out)
}

/// Sign of d Re μ / dB = Re(-ψ_B/ψ_μ) at an eigenvalue μ; 0 at a
/// near-zero transversality.
pub fn crossing_direction_at(mu: Complex64, scale: &ProblemScale, big_b: f64) -> i8 {
    let d = psi_derivatives(mu, scale, big_b);
    let ratio = -d.psi_b / d.psi_mu;
    if ratio.re.abs() < 1e-8 * (1.0 + ratio.norm()) {
        0
    } else if ratio.re > 0.0 {
        1
    } else {
        -1
    }
}

/// Crossing direction of an enumerated Hopf point.
pub fn crossing_direction(hp: &HopfPoint, scale: &ProblemScale) -> i8 {
    crossing_direction_at(Complex64::new(0.0, hp.omega_tilde), scale, hp.big_b)
}

/// Residuals of an emitted point: the hashing residual, |χ₀|, and a
/// magnitude-normalized |ψ(iω̃)|.
pub fn hopf_point_residuals(hp: &HopfPoint, scale: &ProblemScale) -> (f64, f64, f64) {
    let hash = hash_residual(hp.eps, scale.parity(), hp.m, hp.j, hp.omega, hp.omega_slow);
    let delta = 1.0 / (2 * hp.m + 1) as f64;
    let chi = chi0(delta, hp.omega, hp.omega_slow, hp.big_b, scale.parity()).norm();
    let psi_mag = eval_psi(Complex64::new(0.0, hp.omega_tilde), scale, hp.big_b).norm();
    (
        hash,
        chi,
        psi_mag / (1.0 + hp.big_b.abs() * (1.0 + hp.omega_slow.abs())),
    )
}

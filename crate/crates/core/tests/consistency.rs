//! Cross-module consistency: the enumerated Hopf points, the argument
//! principle counts, and the direct simulations must describe the same
//! spectrum.

use delaylab_core::charpoly::{eval_psi, psi_derivatives};
use delaylab_core::dde::{integrate, Grid, HistorySegment, Nonlinearity};
use delaylab_core::hashing::hopf_points;
use delaylab_core::scaling::make_scale;
use delaylab_core::spectrum::{count_unstable, count_unstable_opts, pyragas_interval};
use delaylab_core::twoscale::Branch;
use num_complex::Complex64;
use std::f64::consts::PI;

#[test]
fn jacobian_identity_at_hopf_points() {
    // -B Im(conj(ψ_ε) ψ_B) = ω̃ (B + π/2) cos²(πΩ̃/2) at imaginary roots
    for (k, m) in [(9u64, 1u64), (10, 1), (23, 2), (23, 0)] {
        let s = make_scale(k);
        for hp in hopf_points(&s, m).unwrap() {
            let mu = Complex64::new(0.0, hp.omega_tilde);
            let d = psi_derivatives(mu, &s, hp.big_b);
            let lhs = -hp.big_b * (d.psi_eps.conj() * d.psi_b).im;
            let cos_sq = (0.5 * PI * hp.omega_slow).sin().powi(2);
            let rhs = hp.omega_tilde * (hp.big_b + 0.5 * PI) * cos_sq;
            assert!(
                (lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()) * s.omega_k,
                "k={k} m={m} j={}: {lhs} vs {rhs}",
                hp.j
            );
        }
    }
}

#[test]
fn count_jumps_by_two_across_hopf_and_one_across_zero_line() {
    let s = make_scale(5);
    // the first stabilizing m = 0 point: E drops by 2 crossing it upward
    let b01 = hopf_points(&s, 0).unwrap()[0].big_b;
    let before = count_unstable_opts(&s, b01 - 0.02, false).unwrap().unstable;
    let after = count_unstable_opts(&s, b01 + 0.02, false).unwrap().unstable;
    assert_eq!(before, after + 2, "across B+_(0,1) = {b01}");

    // zero line B0 = (-1)^k: E changes by exactly 1
    let s4 = make_scale(4);
    let lo = count_unstable_opts(&s4, 0.9, false).unwrap().unstable;
    let hi = count_unstable_opts(&s4, 1.1, false).unwrap().unstable;
    assert_eq!((lo as i64 - hi as i64).abs(), 1, "across the zero line");
}

#[test]
fn no_stabilization_for_positive_control() {
    // odd k keeps a positive real root; even k keeps a complex pair
    let s3 = make_scale(3);
    for b in [0.4, 2.0, 30.0] {
        let rep = count_unstable_opts(&s3, b, false).unwrap();
        assert!(rep.unstable >= 1, "k=3 B={b}: E = {}", rep.unstable);
        assert!(
            rep.roots.iter().any(|r| r.im.abs() < 1e-9),
            "real root expected"
        );
    }
    let s4 = make_scale(4);
    for b in [0.4, 2.0, 8.0, 50.0] {
        let rep = count_unstable_opts(&s4, b, false).unwrap();
        assert!(rep.unstable >= 1, "k=4 B={b}: E = {}", rep.unstable);
    }
}

#[test]
fn unstable_between_upper_end_and_zero() {
    // for B between B-_{1,1} and 0 the m = 1 family keeps E >= 2
    let s = make_scale(9);
    let b11 = hopf_points(&s, 1)
        .unwrap()
        .iter()
        .find(|p| p.j == 1 && matches!(p.branch, Branch::Minus))
        .unwrap()
        .big_b;
    for t in [0.3, 0.7] {
        let b = b11 * (1.0 - t); // between b11 and 0
        let rep = count_unstable_opts(&s, b, false).unwrap();
        assert!(rep.unstable >= 2, "B = {b}: E = {}", rep.unstable);
    }
}

#[test]
fn linear_regime_growth_matches_dominant_root() {
    // at λ = λ_k with b outside the stabilization interval, a tiny history
    // grows like exp(Re μ t) of the dominant characteristic root
    let s = make_scale(3);
    let p = pyragas_interval(&s).unwrap();
    let b_out = 1.5 * p.b_lower;
    let big_b_out = b_out / (2.0 * s.eps);
    let rep = count_unstable(&s, big_b_out).unwrap();
    assert!(rep.unstable > 0);
    let dominant = &rep.roots[0];

    let f = Nonlinearity::sine();
    let grid = Grid::new(&s, 48).unwrap();
    // seed along the dominant eigenfunction to suppress slower transients
    let (re, im) = (dominant.re, dominant.im);
    let hist = HistorySegment::sample(grid, |t| {
        let e = (re * t).exp() * 1e-6;
        (
            e * (im * t).cos(),
            e * (re * (im * t).cos() - im * (im * t).sin()),
        )
    });
    let t_end = 14.0;
    let traj = integrate(&s, s.lambda_k, b_out, &f, &hist, t_end).unwrap();
    // growth rate per unit time from a regression of the log-RMS envelope;
    // the sliding window averages out the oscillation phase
    let rms = |t0: f64| -> f64 {
        let i0 = traj.index_of(t0);
        let i1 = traj.index_of(t0 + 2.0);
        let sum: f64 = traj.x[i0..=i1].iter().map(|v| v * v).sum();
        (sum / (i1 - i0 + 1) as f64).sqrt()
    };
    let pts: Vec<(f64, f64)> = (0..40)
        .map(|i| {
            let t = 8.0 + 4.0 * i as f64 / 39.0;
            (t, rms(t).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (sxx, sxy): (f64, f64) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0 * p.0, a.1 + p.0 * p.1));
    let rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    assert!(
        (rate - dominant.re).abs() < 0.01 * dominant.re.abs().max(0.05),
        "measured {rate} vs Re mu = {}",
        dominant.re
    );
}

/// Phase-tracking winding oracle: walk the rectangle boundary with
/// adaptive steps keeping each argument increment below π/2 and count
/// full turns of arg ψ. Independent of the quadrature-based counter.
fn winding_by_phase_tracking(
    scale: &delaylab_core::scaling::ProblemScale,
    big_b: f64,
    eta: f64,
    r_real: f64,
    r_imag: f64,
) -> f64 {
    let corners = [
        Complex64::new(eta, -r_imag),
        Complex64::new(r_real, -r_imag),
        Complex64::new(r_real, r_imag),
        Complex64::new(eta, r_imag),
        Complex64::new(eta, -r_imag),
    ];
    let mut total = 0.0;
    let mut prev = eval_psi(corners[0], scale, big_b);
    for seg in 0..4 {
        let (z0, z1) = (corners[seg], corners[seg + 1]);
        let mut t = 0.0f64;
        let mut dt = 1e-3;
        while t < 1.0 {
            let t_next = (t + dt).min(1.0);
            let z = z0 + (z1 - z0) * t_next;
            let cur = eval_psi(z, scale, big_b);
            let dphi = (cur / prev).arg();
            if dphi.abs() > 0.5 * std::f64::consts::FRAC_PI_2 && dt > 1e-12 {
                dt *= 0.5;
                continue;
            }
            total += dphi;
            prev = cur;
            t = t_next;
            dt = (dt * 1.6).min(2e-3);
        }
    }
    total / (2.0 * PI)
}

#[test]
fn quadrature_count_matches_phase_tracking_oracle() {
    // the quadrature-based E plus the deflated on-axis roots must equal
    // the raw winding of ψ measured by continuous phase tracking
    for (k, big_b) in [(3u64, -0.9), (4, -0.7), (4, 2.5), (5, -1e8), (3, 0.4)] {
        let s = make_scale(k);
        let rep = count_unstable_opts(&s, big_b, false).unwrap();
        let on_axis = if (big_b - s.parity().sign()).abs() < 1e-12 {
            3.0 // trivial pair plus the zero eigenvalue
        } else {
            2.0
        };
        let w = winding_by_phase_tracking(
            &s,
            big_b,
            rep.contour.eta,
            rep.contour.r_real,
            rep.contour.r_imag,
        );
        assert!(
            (w - (rep.unstable as f64 + on_axis)).abs() < 0.05,
            "k={k} B={big_b}: phase tracking {w} vs E={} plus {on_axis} on-axis",
            rep.unstable
        );
    }
}

#[test]
fn psi_root_of_every_emitted_report_root() {
    let s = make_scale(4);
    let rep = count_unstable_opts(&s, -0.7, false).unwrap();
    for r in &rep.roots {
        let v = eval_psi(Complex64::new(r.re, r.im), &s, -0.7).norm();
        assert!(v < 1e-9, "|psi| = {v} at {r:?}");
    }
}

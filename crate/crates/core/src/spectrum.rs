//! Argument-principle counting of unstable eigenvalues, trapping scans,
//! instability intervals, and the Pyragas stabilization interval.
//!
//! The unstable dimension E(B) is the winding number of ψ along a
//! rectangle [η, R_real] × [-R_imag, R_imag] with η = -10⁻⁹. The trivial
//! pair ±iω_k (and μ = 0 on the zero line B = (-1)^k) always sits on the
//! imaginary axis and therefore inside the contour; their poles are
//! subtracted analytically from ψ'/ψ, which both removes them from the
//! count — E requires strictly positive real part — and keeps the
//! integrand smooth where the contour passes within 10⁻⁹ of a root.

use crate::charpoly::{
    eval_psi, newton_root, psi_derivatives, real_eig_b, uncontrolled_spectrum, Eigenvalue,
};
use crate::hashing::hopf_points;
use crate::par;
use crate::scaling::ProblemScale;
use crate::twoscale::Branch;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// 15-point Gauss-Legendre abscissas (positive half) and weights.
const GL_X: [f64; 8] = [
    0.0,
    0.201_194_093_997_434_5,
    0.394_151_347_077_563_4,
    0.570_972_172_608_538_8,
    0.724_417_731_360_170_1,
    0.848_206_583_410_427_2,
    0.937_273_392_400_706,
    0.987_992_518_020_485_4,
];
const GL_W: [f64; 8] = [
    0.202_578_241_925_561_3,
    0.198_431_485_327_111_6,
    0.186_161_000_015_562_2,
    0.166_269_205_816_993_9,
    0.139_570_677_926_154_3,
    0.107_159_220_467_171_9,
    0.070_366_047_488_108_1,
    0.030_753_241_996_117_3,
];

/// Rectangle contour parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Contour {
    pub eta: f64,
    pub r_real: f64,
    pub r_imag: f64,
}

/// Result of one unstable-dimension count.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub k: u64,
    #[serde(rename = "B")]
    pub big_b: f64,
    #[serde(rename = "E")]
    pub unstable: u32,
    pub winding_residual: f64,
    pub roots: Vec<RootEntry>,
    pub contour: Contour,
    /// set when the refined root inventory does not account for every
    /// counted eigenvalue (the winding count E stays authoritative)
    pub inventory_complete: bool,
}

/// One refined root in a report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RootEntry {
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

/// Outcome of a trapping-line scan.
#[derive(Debug, Clone, Serialize)]
pub struct TrappingReport {
    pub k: u64,
    pub big_b: f64,
    pub lines_checked: usize,
    pub min_value: f64,
    pub min_location: (f64, f64),
}

/// An instability interval I_{m,j} = (B⁻_{m,j}, max B⁺_{m,j}) and how it
/// relates to its successor.
#[derive(Debug, Clone, Serialize)]
pub struct InstabilityInterval {
    pub m: u64,
    pub j: u64,
    pub lower: f64,
    pub upper: f64,
    /// None for the last enumerated j
    pub gap_to_next: Option<GapKind>,
}

/// Whether a stability window opens between I_{m,j+1} and I_{m,j}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapKind {
    Gap,
    Overlap,
}

/// Status of the interval inequalities that certify the Pyragas region.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    /// max_m B⁺_{m,j_m+1} < B⁺_{0,1}
    pub upper_family_below: bool,
    /// B⁺_{0,1} < B⁻_{1,1} < 0
    pub boundaries_ordered: bool,
    /// B⁻_{1,1} ≤ B⁻_{m,j} for j ≤ j_m
    pub lower_family_above: bool,
    pub m_checked: u64,
    pub violations: Vec<String>,
}

/// The stabilization interval of scaled and physical control amplitudes.
#[derive(Debug, Clone, Serialize)]
pub struct PyragasInterval {
    pub k: u64,
    pub eps: f64,
    pub b_lower: f64,
    pub b_upper: f64,
    pub big_b_lower: f64,
    pub big_b_upper: f64,
    pub verified: bool,
    pub midpoint_unstable: u32,
    pub outside_unstable: (u32, u32),
    pub inequality_report: InequalityReport,
}

/// Magnitude scale of ψ's terms along a contour point (for on-root checks).
fn psi_term_scale(mu: Complex64, eps: f64, big_b: f64) -> f64 {
    1.0 + (eps * big_b * mu).norm() + big_b.abs() * (-mu.re).exp().min(1e300)
}

/// Deflated logarithmic derivative ψ'/ψ - Σ 1/(z - p).
fn deflated_logderiv(
    z: Complex64,
    scale: &ProblemScale,
    big_b: f64,
    poles: &[Complex64],
) -> Complex64 {
    let v = eval_psi(z, scale, big_b);
    let d = psi_derivatives(z, scale, big_b).psi_mu;
    let mut out = d / v;
    for p in poles {
        out -= 1.0 / (z - p);
    }
    out
}

fn gl15_panel(
    z0: Complex64,
    z1: Complex64,
    scale: &ProblemScale,
    big_b: f64,
    poles: &[Complex64],
) -> Complex64 {
    let mid = 0.5 * (z0 + z1);
    let half = 0.5 * (z1 - z0);
    let mut acc = GL_W[0] * deflated_logderiv(mid, scale, big_b, poles);
    for i in 1..8 {
        let dz = half * GL_X[i];
        acc += GL_W[i]
            * (deflated_logderiv(mid + dz, scale, big_b, poles)
                + deflated_logderiv(mid - dz, scale, big_b, poles));
    }
    acc * half
}

fn adaptive_edge(
    z0: Complex64,
    z1: Complex64,
    scale: &ProblemScale,
    big_b: f64,
    poles: &[Complex64],
    tol: f64,
    depth: u32,
) -> Complex64 {
    let whole = gl15_panel(z0, z1, scale, big_b, poles);
    let mid = 0.5 * (z0 + z1);
    let split = gl15_panel(z0, mid, scale, big_b, poles) + gl15_panel(mid, z1, scale, big_b, poles);
    if (whole - split).norm() < tol || depth >= 48 {
        split
    } else {
        adaptive_edge(z0, mid, scale, big_b, poles, 0.5 * tol, depth + 1)
            + adaptive_edge(mid, z1, scale, big_b, poles, 0.5 * tol, depth + 1)
    }
}

/// Winding number of the deflated ψ along the rectangle, counterclockwise.
fn winding(scale: &ProblemScale, big_b: f64, contour: Contour, poles: &[Complex64]) -> Result<f64> {
    let Contour {
        eta,
        r_real,
        r_imag,
    } = contour;
    let corners = [
        Complex64::new(eta, -r_imag),
        Complex64::new(r_real, -r_imag),
        Complex64::new(r_real, r_imag),
        Complex64::new(eta, r_imag),
    ];
    // reject contours passing through a root
    for seg in 0..4 {
        let (z0, z1) = (corners[seg], corners[(seg + 1) % 4]);
        for t in 0..64 {
            let z = z0 + (z1 - z0) * (t as f64 / 63.0);
            let v = eval_psi(z, scale, big_b).norm();
            if v < 1e-13 * psi_term_scale(z, scale.eps, big_b)
                && poles.iter().all(|p| (z - p).norm() > 1e-6)
            {
                return Err(Error::NonIntegralWinding {
                    winding: f64::NAN,
                    residual: v,
                });
            }
        }
    }
    let edges: Vec<(Complex64, Complex64)> =
        (0..4).map(|i| (corners[i], corners[(i + 1) % 4])).collect();
    // subdivide long edges into base panels before adapting
    let mut panels: Vec<(Complex64, Complex64)> = Vec::new();
    for (z0, z1) in edges {
        let len = (z1 - z0).norm();
        let n = (len / 2.0).ceil().max(1.0) as usize;
        for i in 0..n {
            let a = z0 + (z1 - z0) * (i as f64 / n as f64);
            let b = z0 + (z1 - z0) * ((i + 1) as f64 / n as f64);
            panels.push((a, b));
        }
    }
    let tol_per_panel = 2.0 * PI * 1e-5 / panels.len() as f64 * 4.0;
    let parts = par::map_slice(&panels, |&(a, b)| {
        adaptive_edge(a, b, scale, big_b, poles, tol_per_panel, 0)
    });
    let total: Complex64 = parts.into_iter().sum();
    Ok((total / (2.0 * PI * Complex64::I)).re)
}

/// Choose the contour for a control value B: the imaginary cap covers
/// every resonance family that can carry unstable eigenvalues at this B
/// (families with |B| ≳ δ_m² stay quiet) and snaps to a trapping line
/// Im μ = (ℓ+½)π, which no unstable eigenvalue can touch.
fn choose_contour(scale: &ProblemScale, big_b: f64) -> Result<Contour> {
    let ab = big_b.abs();
    if ab < 1e-9 {
        return Err(Error::InvalidParameter(
            "count_unstable requires |B| >= 1e-9".into(),
        ));
    }
    // families with B_min(δ_m) ≈ -δ_m² below B are the only candidates;
    // a factor-2 margin keeps the bound conservative
    let m_top_quadratic = ((2.0 / ab).sqrt() - 1.0) / 2.0;
    // first-destabilization bound |B⁻_{m,1}| ≈ π²ε α/(8m) ≤ π²ε/(2m)
    let m_top_linear = PI * PI * scale.eps / (2.0 * ab);
    let m_top = m_top_quadratic.max(m_top_linear).max(0.0).ceil() as u64;
    let r_imag_raw = (m_top as f64 + 2.0) / scale.eps;
    let ell = (r_imag_raw / PI - 0.5)
        .round()
        .max((2 * scale.k + 2) as f64);
    let r_imag = (ell + 0.5) * PI;
    let mut r_real = 25.0f64.max((1.0 / scale.eps).ln() + 10.0);
    if big_b > 0.0 {
        // a real root near 1/(2εB) exists for weak positive feedback
        r_real = r_real.max(1.2 / (2.0 * scale.eps * big_b) + 10.0);
    }
    Ok(Contour {
        eta: -1e-9,
        r_real,
        r_imag,
    })
}

/// Poles to deflate: the trivial pair ±iω_k, and μ = 0 on the zero line.
fn deflation_poles(scale: &ProblemScale, big_b: f64) -> Vec<Complex64> {
    let mut poles = vec![
        Complex64::new(0.0, scale.omega_k),
        Complex64::new(0.0, -scale.omega_k),
    ];
    let at_zero = eval_psi(Complex64::new(0.0, 0.0), scale, big_b).norm();
    if at_zero < 1e-12 * (1.0 + big_b.abs()) {
        poles.push(Complex64::new(0.0, 0.0));
    }
    poles
}

/// Count eigenvalues with strictly positive real part at control B.
pub fn count_unstable(scale: &ProblemScale, big_b: f64) -> Result<SpectrumReport> {
    count_unstable_opts(scale, big_b, true)
}

/// Sweep a control grid, dispatching independent cells to the worker pool.
pub fn count_unstable_grid(
    scale: &ProblemScale,
    grid: &[f64],
    double_check: bool,
) -> Vec<Result<SpectrumReport>> {
    par::map_slice(grid, |&b| count_unstable_opts(scale, b, double_check))
}

/// As [`count_unstable`], optionally skipping the cap-doubling recount.
pub fn count_unstable_opts(
    scale: &ProblemScale,
    big_b: f64,
    double_check: bool,
) -> Result<SpectrumReport> {
    if big_b == 0.0 {
        return Err(Error::InvalidParameter("B must be nonzero".into()));
    }
    let poles = deflation_poles(scale, big_b);
    let mut contour = choose_contour(scale, big_b)?;
    let mut last_err = None;
    for attempt in 0..4 {
        match winding(scale, big_b, contour, &poles) {
            Ok(w) => {
                let rounded = w.round();
                let residual = (w - rounded).abs();
                if residual > 1e-3 || rounded < -0.5 {
                    last_err = Some(Error::NonIntegralWinding {
                        winding: w,
                        residual,
                    });
                } else {
                    if double_check {
                        let bigger = Contour {
                            eta: contour.eta,
                            r_real: contour.r_real + 7.0,
                            r_imag: {
                                let ell2 = (2.0 * contour.r_imag / PI - 0.5).round();
                                (ell2 + 0.5) * PI
                            },
                        };
                        let w2 = winding(scale, big_b, bigger, &poles)?;
                        if (w2.round() - rounded).abs() > 0.1 {
                            return Err(Error::NonIntegralWinding {
                                winding: w2,
                                residual: (w2 - rounded).abs(),
                            });
                        }
                    }
                    let e = rounded as u32;
                    let (roots, complete) = root_inventory(scale, big_b, e);
                    return Ok(SpectrumReport {
                        k: scale.k,
                        big_b,
                        unstable: e,
                        winding_residual: residual,
                        roots,
                        contour,
                        inventory_complete: complete,
                    });
                }
            }
            Err(e) => last_err = Some(e),
        }
        // nudge away from a suspected near-root configuration
        contour = Contour {
            eta: contour.eta,
            r_real: contour.r_real + 0.371,
            r_imag: contour.r_imag + PI * (attempt + 1) as f64,
        };
    }
    Err(last_err.unwrap_or(Error::NonIntegralWinding {
        winding: f64::NAN,
        residual: f64::NAN,
    }))
}

/// Refined inventory of the unstable roots behind a count. Returns the
/// roots with Re μ > 0 and whether their multiplicities add up to E.
fn root_inventory(scale: &ProblemScale, big_b: f64, e: u32) -> (Vec<RootEntry>, bool) {
    let mut found: Vec<Eigenvalue> = Vec::new();
    let push = |ev: Eigenvalue, found: &mut Vec<Eigenvalue>| {
        if ev.mu.0 <= 1e-12 {
            return;
        }
        let mu = ev.mu_complex();
        if found
            .iter()
            .all(|f| (f.mu_complex() - mu).norm() > 1e-7 * (1.0 + mu.norm()))
        {
            found.push(ev);
        }
    };

    // real roots: solve B(μ_R) = B by bisection between scan nodes
    let n = 4000;
    let r_hi = 30.0f64
        .max(2.0 * (1.0 / scale.eps).ln() + 10.0)
        .max(if big_b > 0.0 {
            1.5 / (2.0 * scale.eps * big_b) + 10.0
        } else {
            0.0
        });
    let vals: Vec<Option<f64>> = (0..=n)
        .map(|i| real_eig_b(1e-9 + r_hi * i as f64 / n as f64, scale).ok())
        .collect();
    for i in 0..n {
        if let (Some(a), Some(b)) = (vals[i], vals[i + 1]) {
            if (a - big_b) * (b - big_b) <= 0.0 && (a - big_b != 0.0 || b - big_b != 0.0) {
                let (mut lo, mut hi) = (
                    1e-9 + r_hi * i as f64 / n as f64,
                    1e-9 + r_hi * (i + 1) as f64 / n as f64,
                );
                let mut flo = a - big_b;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let fm = match real_eig_b(mid, scale) {
                        Ok(v) => v - big_b,
                        Err(_) => break,
                    };
                    if flo * fm <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                let mu = Complex64::new(0.5 * (lo + hi), 0.0);
                if let Ok(ev) = newton_root(mu, scale, big_b) {
                    push(ev, &mut found);
                }
            }
        }
    }

    // inherited complex roots: continue the uncontrolled strip roots to B
    for ev in uncontrolled_spectrum(scale) {
        if ev.mu.1 > 1e-9 && (ev.mu.1 - scale.omega_k).abs() > 1e-9 {
            if let Ok(r) = newton_root(ev.mu_complex(), scale, big_b) {
                push(r, &mut found);
            }
        }
    }

    // Hopf-induced roots: seed from enumerated points of the families that
    // can be active at this B
    let ab = big_b.abs();
    let m_top = (((2.0 / ab).sqrt() - 1.0) / 2.0).max(0.0).ceil() as u64;
    for m in 1..=m_top {
        if let Ok(pts) = hopf_points(scale, m) {
            let j_max = pts.iter().map(|p| p.j).max().unwrap_or(0);
            for j in 1..=j_max {
                let minus = pts
                    .iter()
                    .find(|p| p.j == j && matches!(p.branch, Branch::Minus));
                let upper = pts
                    .iter()
                    .filter(|p| p.j == j && matches!(p.branch, Branch::Plus))
                    .map(|p| p.big_b)
                    .fold(f64::NEG_INFINITY, f64::max);
                let upper = if upper.is_finite() {
                    upper
                } else if m % 2 == 1 && j == 1 {
                    0.0
                } else {
                    continue;
                };
                if let Some(mn) = minus {
                    if big_b > mn.big_b && big_b < upper {
                        let guess = Complex64::new(0.02, mn.omega_tilde);
                        if let Ok(r) = newton_root(guess, scale, big_b) {
                            push(r, &mut found);
                        }
                    }
                }
            }
        }
    }

    found.sort_by(|a, b| b.mu.0.partial_cmp(&a.mu.0).unwrap());
    let mult: u32 = found
        .iter()
        .map(|ev| if ev.mu.1 > 1e-9 { 2 } else { 1 })
        .sum();
    let entries = found
        .iter()
        .map(|ev| RootEntry {
            re: ev.mu.0,
            im: ev.mu.1,
            residual: ev.residual,
        })
        .collect();
    (entries, mult == e)
}

/// Scan |ψ| along the trapping lines Im μ = (ℓ+½)π, μ_R ∈ [0, r_max],
/// excluding a unit-diameter disk around the trivial root iω_k. The
/// minimum over all lines is reported; a value below 1e-8 would violate
/// the trapping property and is returned as an error.
pub fn trapping_check(
    scale: &ProblemScale,
    big_b: f64,
    r_max: f64,
    im_cap: f64,
) -> Result<TrappingReport> {
    if big_b >= 0.0 {
        return Err(Error::InvalidParameter(
            "trapping_check applies to B < 0".into(),
        ));
    }
    let n_lines = (im_cap / PI).floor() as usize;
    let line_ids: Vec<usize> = (0..n_lines).collect();
    let minima = par::map_slice(&line_ids, |&ell| {
        let y = (ell as f64 + 0.5) * PI;
        let mut best = (f64::INFINITY, (0.0, y));
        let n = 2000;
        for i in 0..=n {
            let x = r_max * i as f64 / n as f64;
            let mu = Complex64::new(x, y);
            if (mu - Complex64::new(0.0, scale.omega_k)).norm() < 0.5 {
                continue;
            }
            let v = eval_psi(mu, scale, big_b).norm();
            if v < best.0 {
                best = (v, (x, y));
            }
        }
        best
    });
    let mut min_value = f64::INFINITY;
    let mut min_location = (0.0, 0.0);
    for (v, loc) in minima {
        if v < min_value {
            min_value = v;
            min_location = loc;
        }
    }
    if min_value < 1e-8 {
        return Err(Error::NearSingular {
            what: "trapping line passes through an eigenvalue",
            magnitude: min_value,
        });
    }
    Ok(TrappingReport {
        k: scale.k,
        big_b,
        lines_checked: n_lines,
        min_value,
        min_location,
    })
}

/// Instability intervals I_{m,j} of family m with the gap/overlap
/// classification against the next interval. For odd m the j = 1 interval
/// extends to B = 0 (stabilization never occurs at finite amplitude).
pub fn instability_intervals(scale: &ProblemScale, m: u64) -> Result<Vec<InstabilityInterval>> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "instability intervals are indexed by m >= 1".into(),
        ));
    }
    let pts = hopf_points(scale, m)?;
    let j_max = pts.iter().map(|p| p.j).max().unwrap_or(0);
    let mut raw = Vec::new();
    for j in 1..=j_max {
        let minus = pts
            .iter()
            .find(|p| p.j == j && matches!(p.branch, Branch::Minus));
        let plus_max = pts
            .iter()
            .filter(|p| p.j == j && matches!(p.branch, Branch::Plus))
            .map(|p| p.big_b)
            .fold(f64::NEG_INFINITY, f64::max);
        if let Some(mn) = minus {
            let upper = if plus_max.is_finite() {
                plus_max
            } else if m % 2 == 1 && j == 1 {
                0.0
            } else {
                continue;
            };
            raw.push((j, mn.big_b, upper));
        }
    }
    let mut out = Vec::new();
    for idx in 0..raw.len() {
        let (j, lower, upper) = raw[idx];
        let gap_to_next = raw.get(idx + 1).map(|&(_, lower_next, upper_next)| {
            // stability window between I_{m,j+1} and I_{m,j} iff the next
            // interval tops out below this one's start
            let _ = lower_next;
            if upper_next < lower {
                GapKind::Gap
            } else {
                GapKind::Overlap
            }
        });
        out.push(InstabilityInterval {
            m,
            j,
            lower,
            upper,
            gap_to_next,
        });
    }
    Ok(out)
}

/// Locate the Pyragas interval (B⁺_{0,1}, B⁻_{1,1}), check the interval
/// inequalities over every reachable resonance family, and certify the
/// count E = 0 at the midpoint with E > 0 just outside both ends.
pub fn pyragas_interval(scale: &ProblemScale) -> Result<PyragasInterval> {
    if scale.k == 0 {
        return Err(Error::InvalidParameter(
            "the Pyragas interval is defined for k >= 1".into(),
        ));
    }
    let m0 = hopf_points(scale, 0)?;
    let b01 = m0.iter().find(|p| p.j == 1).ok_or_else(|| {
        Error::OutsideDomain(format!(
            "no stabilizing m = 0 Hopf point at k = {}: the branch carries no \
             inherited complex pairs, so the lower interval boundary is not \
             enumerable (stability below is bounded by the zero line b = -2eps)",
            scale.k
        ))
    })?;
    let m1 = hopf_points(scale, 1)?;
    let b11 = m1
        .iter()
        .find(|p| p.j == 1 && matches!(p.branch, Branch::Minus))
        .ok_or_else(|| {
            Error::OutsideDomain(format!(
                "no destabilizing point of the first resonance family at k = {}: \
                 its curve lies below every hashing line at this eps, so no upper \
                 interval boundary exists (E stays 0 up to b = 0-)",
                scale.k
            ))
        })?;
    let (bl, bu) = (b01.big_b, b11.big_b);

    // inequality checks over all families whose fold lies below 1/ε
    let m_cap = ((scale.omega_k - 1.0) / 2.0).floor().max(1.0) as u64;
    let ms: Vec<u64> = (1..=m_cap).collect();
    let family_checks = par::map_slice(&ms, |&m| -> Result<Vec<String>> {
        let mut violations = Vec::new();
        let pts = hopf_points(scale, m)?;
        if pts.is_empty() {
            return Ok(violations);
        }
        let j_m = m.div_ceil(2);
        let j_max = pts.iter().map(|p| p.j).max().unwrap();
        // first interval inequality: the plus point of strip j_m+1 lies below B+_{0,1}
        let plus_next: Vec<_> = pts
            .iter()
            .filter(|p| p.j == j_m + 1 && matches!(p.branch, Branch::Plus))
            .collect();
        if let Some(max_plus) = plus_next
            .iter()
            .map(|p| p.big_b)
            .fold(None::<f64>, |acc, v| Some(acc.map_or(v, |a| a.max(v))))
        {
            if max_plus >= bl {
                violations.push(format!(
                    "m={m}: B+_(m,j_m+1) = {max_plus} not below B+_(0,1) = {bl}"
                ));
            }
        }
        // check 3: every minus point with j <= j_m stays above B-_{1,1}
        for j in 1..=j_m.min(j_max) {
            if let Some(mn) = pts
                .iter()
                .find(|p| p.j == j && matches!(p.branch, Branch::Minus))
            {
                if mn.big_b < bu - 1e-14 {
                    violations.push(format!(
                        "m={m} j={j}: B- = {} below B-_(1,1) = {bu}",
                        mn.big_b
                    ));
                }
            }
        }
        Ok(violations)
    });
    let mut violations = Vec::new();
    let mut upper_ok = true;
    let mut lower_ok = true;
    for res in family_checks {
        for v in res? {
            if v.contains("B+") {
                upper_ok = false;
            } else {
                lower_ok = false;
            }
            violations.push(v);
        }
    }
    let ordered = bl < bu && bu < 0.0;
    if !ordered {
        violations.push(format!("boundaries not ordered: {bl} !< {bu} !< 0"));
    }

    // spectral certification
    let mid = 0.5 * (bl + bu);
    let mid_report = count_unstable(scale, mid)?;
    let below = count_unstable(scale, bl - 0.01 * bl.abs())?;
    let above = count_unstable(scale, bu + 0.01 * bu.abs())?;
    let verified = ordered
        && upper_ok
        && lower_ok
        && mid_report.unstable == 0
        && below.unstable > 0
        && above.unstable > 0;

    Ok(PyragasInterval {
        k: scale.k,
        eps: scale.eps,
        b_lower: 2.0 * scale.eps * bl,
        b_upper: 2.0 * scale.eps * bu,
        big_b_lower: bl,
        big_b_upper: bu,
        verified,
        midpoint_unstable: mid_report.unstable,
        outside_unstable: (below.unstable, above.unstable),
        inequality_report: InequalityReport {
            upper_family_below: upper_ok,
            boundaries_ordered: ordered,
            lower_family_above: lower_ok,
            m_checked: m_cap,
            violations,
        },
    })
}

//! Direct simulation of the controlled nonlinear delay equation
//!
//! ```text
//! x'(t) = λ f(x(t-1)) + b⁻¹ (x(t) + x(t - p/2)),
//! ```
//!
//! construction of the half-period antisymmetric periodic orbits, and
//! Floquet multipliers of their linearization.
//!
//! The integrator is a two-derivative one-step scheme (trapezoidal
//! Hermite, fourth order): with f = ẋ and g = ẍ,
//!
//! ```text
//! x_{n+1} = x_n + ½h (f_n + f_{n+1}) + h²/12 (g_n - g_{n+1}),
//! ```
//!
//! where both delayed reads of x and ẋ fall exactly on grid nodes because
//! the step h = 1/(N(2k+1)) divides the delays 1 and p/2 = 2/(2k+1). The
//! end-of-step values are linear in x_{n+1} (the only implicit dependence
//! enters through the undelayed control term), so each step is a closed
//! scalar solve and no interpolation is ever needed. The derivative jump
//! of a generic history at t = 0 propagates to second-derivative jumps at
//! t = p/2 and t = 1 only; one-sided reads at those three nodes keep the
//! formal order.

use crate::par;
use crate::scaling::ProblemScale;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Overflow guard for trajectories.
const BLOW_UP: f64 = 1e8;

/// A nonlinearity f with its derivative, certified at construction to be
/// odd with f'(0) = 1 and f'''(0) < 0 (soft spring).
pub struct Nonlinearity {
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    df: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Nonlinearity {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        // oddness on samples
        for i in 1..=64 {
            let x = 1.5 * i as f64 / 64.0;
            if (f(-x) + f(x)).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "nonlinearity is not odd at x = {x}"
                )));
            }
        }
        // normalization f'(0) = 1 by centered difference
        let h = 1e-5;
        let d1 = (f(h) - f(-h)) / (2.0 * h);
        if (d1 - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "nonlinearity has f'(0) = {d1}, expected 1"
            )));
        }
        // soft spring: f'''(0) < 0 by centered difference
        let h3 = 1e-2;
        let d3 = (f(2.0 * h3) - 2.0 * f(h3) + 2.0 * f(-h3) - f(-2.0 * h3)) / (2.0 * h3.powi(3));
        if d3 >= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "nonlinearity has f'''(0) = {d3}, expected negative"
            )));
        }
        // derivative consistency
        let dd = (f(0.3 + h) - f(0.3 - h)) / (2.0 * h);
        if (dd - df(0.3)).abs() > 1e-6 * (1.0 + dd.abs()) {
            return Err(Error::InvalidParameter(
                "provided derivative disagrees with finite differences".into(),
            ));
        }
        Ok(Nonlinearity {
            f: Box::new(f),
            df: Box::new(df),
        })
    }

    /// The default soft-spring nonlinearity f = sin.
    pub fn sine() -> Self {
        Nonlinearity {
            f: Box::new(f64::sin),
            df: Box::new(f64::cos),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        (self.df)(x)
    }
}

/// Grid geometry shared by histories, trajectories and monodromy maps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Grid {
    /// step h = 1/(N(2k+1))
    pub h: f64,
    /// nodes per unit delay, 1/h
    pub n_unit: usize,
    /// nodes per half period, (p/2)/h
    pub n_half: usize,
    /// nodes in the history span max(1, p/2)
    pub n_hist: usize,
}

impl Grid {
    /// Build the aligned grid for branch k with N subdivisions per
    /// smallest delay unit; both delays are exact node multiples.
    pub fn new(scale: &ProblemScale, n_per: usize) -> Result<Grid> {
        if n_per < 2 {
            return Err(Error::Misaligned("need at least 2 nodes per unit".into()));
        }
        let odd = (2 * scale.k + 1) as usize;
        let n_unit = n_per * odd;
        let n_half = 2 * n_per;
        Ok(Grid {
            h: 1.0 / n_unit as f64,
            n_unit,
            n_half,
            n_hist: n_unit.max(n_half),
        })
    }
}

/// A history segment on [-τ, 0], τ = max(1, p/2): values and derivatives
/// on the aligned grid.
#[derive(Debug, Clone)]
pub struct HistorySegment {
    pub grid: Grid,
    /// x at t = (i - n_hist) h for i = 0..=n_hist
    pub values: Vec<f64>,
    /// history derivative at the same nodes; the entry at t = 0 is the
    /// left limit (the equation supplies the right limit)
    pub derivs: Vec<f64>,
}

impl HistorySegment {
    /// Sample a C¹ history given as (value, derivative) closures of t ≤ 0.
    pub fn sample(grid: Grid, f: impl Fn(f64) -> (f64, f64)) -> HistorySegment {
        let mut values = Vec::with_capacity(grid.n_hist + 1);
        let mut derivs = Vec::with_capacity(grid.n_hist + 1);
        for i in 0..=grid.n_hist {
            let t = (i as f64 - grid.n_hist as f64) * grid.h;
            let (x, xd) = f(t);
            values.push(x);
            derivs.push(xd);
        }
        HistorySegment {
            grid,
            values,
            derivs,
        }
    }

    pub fn zero(grid: Grid) -> HistorySegment {
        HistorySegment {
            grid,
            values: vec![0.0; grid.n_hist + 1],
            derivs: vec![0.0; grid.n_hist + 1],
        }
    }
}

/// A computed trajectory: nodes run from t = -τ (index 0) through
/// t = T (index n_hist + steps).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid,
    pub x: Vec<f64>,
    pub xd: Vec<f64>,
}

impl Trajectory {
    /// Index of the node at time t ≥ -τ (t must be on-grid).
    pub fn index_of(&self, t: f64) -> usize {
        ((t / self.grid.h).round() as i64 + self.grid.n_hist as i64) as usize
    }

    pub fn at(&self, t: f64) -> f64 {
        self.x[self.index_of(t)]
    }
}

struct Stepper<'a> {
    lambda: f64,
    inv_b: f64,
    f: &'a Nonlinearity,
    n_unit: usize,
    n_half: usize,
    /// node index of t = 0
    i0: usize,
    /// left-limit derivative at t = 0 (history side)
    xd0_left: f64,
}

impl<'a> Stepper<'a> {
    /// ẋ components that do not involve x at the evaluation node.
    #[inline]
    fn a_coeff(&self, x: &[f64], i: usize) -> f64 {
        self.lambda * self.f.eval(x[i - self.n_unit]) + self.inv_b * x[i - self.n_half]
    }

    /// delayed ẋ read, honoring the left limit at the t = 0 kink
    #[inline]
    fn xd_read(&self, xd: &[f64], i: usize, left: bool) -> f64 {
        if left && i == self.i0 {
            self.xd0_left
        } else {
            xd[i]
        }
    }

    /// ẍ components free of the evaluation node's x; `left` selects the
    /// one-sided delayed derivative reads for end-of-step values.
    #[inline]
    fn c_coeff(&self, x: &[f64], xd: &[f64], i: usize, left: bool) -> f64 {
        self.lambda * self.f.deriv(x[i - self.n_unit]) * self.xd_read(xd, i - self.n_unit, left)
            + self.inv_b * self.xd_read(xd, i - self.n_half, left)
    }
}

/// Integrate the controlled equation from a history up to time `t_end`.
///
/// `b` may be ±∞ (vanishing control). The step is fixed by the history's
/// grid; `t_end` is rounded up to a whole node.
pub fn integrate(
    scale: &ProblemScale,
    lambda: f64,
    b: f64,
    f: &Nonlinearity,
    history: &HistorySegment,
    t_end: f64,
) -> Result<Trajectory> {
    if b == 0.0 || b.is_nan() {
        return Err(Error::InvalidParameter(
            "b must be nonzero (±inf allowed)".into(),
        ));
    }
    let grid = history.grid;
    let steps = (t_end / grid.h).ceil() as usize;
    let n_total = grid.n_hist + steps;
    let inv_b = if b.is_infinite() { 0.0 } else { 1.0 / b };
    let _ = scale;

    let mut x = Vec::with_capacity(n_total + 1);
    let mut xd = Vec::with_capacity(n_total + 1);
    x.extend_from_slice(&history.values);
    xd.extend_from_slice(&history.derivs);

    let st = Stepper {
        lambda,
        inv_b,
        f,
        n_unit: grid.n_unit,
        n_half: grid.n_half,
        i0: grid.n_hist,
        xd0_left: history.derivs[grid.n_hist],
    };

    // replace the stored derivative at t = 0 by the equation value
    let i0 = grid.n_hist;
    xd[i0] = st.a_coeff(&x, i0) + inv_b * x[i0];

    let h = grid.h;
    let c_implicit = 1.0 - 0.5 * h * inv_b + h * h / 12.0 * inv_b * inv_b;
    for i in i0..n_total {
        let xd_n = xd[i];
        let xdd_n = st.c_coeff(&x, &xd, i, false) + inv_b * xd_n;
        let a_next = st.a_coeff(&x, i + 1);
        let c_next = st.c_coeff(&x, &xd, i + 1, true);
        let rhs =
            x[i] + 0.5 * h * (xd_n + a_next) + h * h / 12.0 * (xdd_n - c_next - a_next * inv_b);
        let x_next = rhs / c_implicit;
        if !x_next.is_finite() || x_next.abs() > BLOW_UP {
            return Err(Error::BlowUp {
                t: (i + 1 - i0) as f64 * h,
                x: x_next,
            });
        }
        x.push(x_next);
        xd.push(a_next + inv_b * x_next);
    }
    Ok(Trajectory { grid, x, xd })
}

/// A converged half-period antisymmetric periodic orbit.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicOrbit {
    pub k: u64,
    pub lambda: f64,
    pub b: f64,
    pub period: f64,
    pub grid: Grid,
    /// one period of samples, x(i h) for i = 0..=2 n_half
    pub samples: Vec<f64>,
    /// matching derivative samples ẋ(i h)
    pub deriv_samples: Vec<f64>,
    pub amplitude: f64,
    /// sup |x(t + p/2) + x(t)| over one period
    pub symmetry_residual: f64,
}

impl PeriodicOrbit {
    /// Orbit value at node index i (periodic extension).
    #[inline]
    pub fn sample_periodic(&self, i: i64) -> f64 {
        let n = (self.samples.len() - 1) as i64;
        self.samples[(i.rem_euclid(n)) as usize]
    }

    /// Noninvasiveness: sup |x(t) + x(t - p/2)| over one period — the
    /// control signal is b⁻¹ times this.
    pub fn noninvasiveness_residual(&self) -> f64 {
        let n_half = self.grid.n_half as i64;
        let n = (self.samples.len() - 1) as i64;
        (0..n)
            .map(|i| (self.sample_periodic(i) + self.sample_periodic(i - n_half)).abs())
            .fold(0.0, f64::max)
    }
}

/// Reconstruct the full history on [-τ, 0] from a half-period state by
/// antisymmetric folding x(t - p/2) = -x(t); derivatives come from the
/// equation itself evaluated through folded reads.
fn expand_state(
    u: &[f64],
    grid: Grid,
    lambda: f64,
    inv_b: f64,
    f: &Nonlinearity,
) -> HistorySegment {
    let n_half = grid.n_half;
    // value at node offset i >= 0 back from t = 0: x(-i h)
    let back = |i: usize| -> f64 {
        let folds = i / n_half;
        let r = i % n_half;
        let sign = if folds.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * u[n_half - r]
    };
    let mut values = vec![0.0; grid.n_hist + 1];
    let mut derivs = vec![0.0; grid.n_hist + 1];
    for idx in 0..=grid.n_hist {
        let i = grid.n_hist - idx; // nodes back from zero
        values[idx] = back(i);
        derivs[idx] = lambda * f.eval(back(i + grid.n_unit)) + inv_b * (back(i) + back(i + n_half));
    }
    HistorySegment {
        grid,
        values,
        derivs,
    }
}

/// Advance a half-period state once: integrate over [0, p/2] and read the
/// new state x(p/2 + s), s ∈ [-p/2, 0].
fn half_period_map(
    u: &[f64],
    grid: Grid,
    scale: &ProblemScale,
    lambda: f64,
    b: f64,
    inv_b: f64,
    f: &Nonlinearity,
) -> Result<Vec<f64>> {
    let hist = expand_state(u, grid, lambda, inv_b, f);
    let traj = integrate(scale, lambda, b, f, &hist, grid.n_half as f64 * grid.h)?;
    let i0 = grid.n_hist;
    Ok((0..=grid.n_half).map(|i| traj.x[i0 + i]).collect())
}

/// Find the periodic orbit of constant period p_k near the Hopf point by
/// damped Gauss-Newton shooting on the half-period antisymmetry
/// x(t + p/2) = -x(t), with the phase fixed by x(0) = 0.
pub fn find_orbit(
    scale: &ProblemScale,
    lambda: f64,
    b: f64,
    f: &Nonlinearity,
    n_per: usize,
) -> Result<PeriodicOrbit> {
    if lambda.abs() <= scale.omega_k {
        return Err(Error::InvalidParameter(
            "lambda must lie beyond the Hopf point (|lambda| > omega_k)".into(),
        ));
    }
    let grid = Grid::new(scale, n_per)?;
    let inv_b = if b.is_infinite() { 0.0 } else { 1.0 / b };
    let n = grid.n_half + 1;

    // sinusoidal seed with the pendulum-style amplitude estimate
    let amp0 = 4.0 * (1.0 - scale.omega_k / lambda.abs()).sqrt();
    let mut u: Vec<f64> = (0..n)
        .map(|i| {
            let t = (i as f64 - grid.n_half as f64) * grid.h;
            amp0 * (scale.omega_k * t).sin()
        })
        .collect();

    let residual = |u: &[f64]| -> Result<DVector<f64>> {
        let v = half_period_map(u, grid, scale, lambda, b, inv_b, f)?;
        let mut r = DVector::zeros(n + 1);
        for i in 0..n {
            r[i] = v[i] + u[i];
        }
        r[n] = u[n - 1]; // phase: x(0) = 0
        Ok(r)
    };

    let mut r = residual(&u)?;
    let mut rn = r.norm();
    let tol = 1e-11 * (1.0 + amp0) * (n as f64).sqrt();
    let mut converged = rn < tol;
    for _ in 0..40 {
        if converged {
            break;
        }
        // finite-difference Jacobian, column-parallel
        let step = 1e-7 * (1.0 + amp0);
        let cols = par::map_range(n, |col| {
            let mut up = u.clone();
            up[col] += step;
            residual(&up).map(|rp| (rp - &r) / step)
        });
        let mut jac = DMatrix::zeros(n + 1, n);
        for (c, colres) in cols.into_iter().enumerate() {
            jac.set_column(c, &colres?);
        }
        let delta = jac
            .svd(true, true)
            .solve(&r, 1e-12)
            .map_err(|_| Error::NearSingular {
                what: "shooting Jacobian",
                magnitude: 0.0,
            })?;
        // damped update
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..15 {
            let cand: Vec<f64> = u
                .iter()
                .zip(delta.iter())
                .map(|(ui, di)| ui - alpha * di)
                .collect();
            if let Ok(rc) = residual(&cand) {
                let rcn = rc.norm();
                if rcn < rn {
                    u = cand;
                    r = rc;
                    rn = rcn;
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
        converged = rn < tol;
    }
    if !converged {
        return Err(Error::Convergence {
            what: "half-period shooting",
            iterations: 40,
            residual: rn,
        });
    }

    // assemble one full period from the converged state
    let hist = expand_state(&u, grid, lambda, inv_b, f);
    let n_period = 2 * grid.n_half;
    let traj = integrate(scale, lambda, b, f, &hist, n_period as f64 * grid.h)?;
    let i0 = grid.n_hist;
    let samples: Vec<f64> = (0..=n_period).map(|i| traj.x[i0 + i]).collect();
    let deriv_samples: Vec<f64> = (0..=n_period).map(|i| traj.xd[i0 + i]).collect();
    let amplitude = samples.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let symmetry_residual = (0..=grid.n_half)
        .map(|i| (samples[i + grid.n_half] + samples[i]).abs())
        .fold(0.0, f64::max);
    Ok(PeriodicOrbit {
        k: scale.k,
        lambda,
        b,
        period: scale.p_k,
        grid,
        samples,
        deriv_samples,
        amplitude,
        symmetry_residual,
    })
}

/// Floquet multipliers of the linearization about a periodic orbit.
#[derive(Debug, Clone, Serialize)]
pub struct FloquetReport {
    /// eigenvalues of the discretized period map, sorted by modulus
    /// (largest first)
    pub multipliers: Vec<(f64, f64)>,
    /// distance of the closest multiplier to 1
    pub trivial_error: f64,
    /// count of multipliers with |ρ| > 1 + 1e-4
    pub unstable_count: usize,
}

/// The variational right-hand side a(t) y(t-1) + b⁻¹(y(t) + y(t-p/2)) as
/// a discrete linear map over one period, with a(t) = λ f'(x(t-1)) read
/// from the orbit.
struct Monodromy {
    n_state: usize,
    n_period: usize,
    n_unit: usize,
    n_half: usize,
    h: f64,
    inv_b: f64,
    /// a(t_i) for i = 0..n_period (periodic)
    coeff: Vec<f64>,
}

impl Monodromy {
    fn build(orbit: &PeriodicOrbit, lambda: f64, inv_b: f64, f: &Nonlinearity) -> Monodromy {
        let grid = orbit.grid;
        let n_period = 2 * grid.n_half;
        let coeff: Vec<f64> = (0..=n_period)
            .map(|i| lambda * f.deriv(orbit.sample_periodic(i as i64 - grid.n_unit as i64)))
            .collect();
        Monodromy {
            n_state: grid.n_hist + 1,
            n_period,
            n_unit: grid.n_unit,
            n_half: grid.n_half,
            h: grid.h,
            inv_b,
            coeff,
        }
    }

    /// cubic Lagrange interpolation of the history vector at fractional
    /// node position (used only by the three starter steps)
    fn interp(y: &[f64], pos: f64) -> f64 {
        let n = y.len() - 1;
        let i1 = (pos.floor() as usize).clamp(1, n.saturating_sub(2));
        let t = pos - i1 as f64;
        let (a, b, c, d) = (y[i1 - 1], y[i1], y[i1 + 1], y[(i1 + 2).min(n)]);
        // Lagrange basis on nodes -1, 0, 1, 2
        let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        a * w0 + b * w1 + c * w2 + d * w3
    }

    /// evolve one history column through a full period
    fn advance_column(&self, col: &[f64]) -> Vec<f64> {
        let n_state = self.n_state;
        let total = n_state + self.n_period;
        let mut y = Vec::with_capacity(total);
        y.extend_from_slice(col);
        let i0 = n_state - 1; // node of t = 0
        let rhs = |y: &[f64], i: usize, yi: f64| -> f64 {
            self.coeff[i - i0] * y[i - self.n_unit] + self.inv_b * (yi + y[i - self.n_half])
        };
        // value-read at a possibly fractional node (history region only)
        let read = |y: &[f64], pos: f64| -> f64 {
            let r = pos.round();
            if (pos - r).abs() < 1e-9 {
                y[r as usize]
            } else {
                Self::interp(y, pos)
            }
        };
        // three RK4 starter steps (coefficient frozen mid-step to its
        // midpoint value keeps fourth order on the smooth coefficient)
        let mut fs: Vec<f64> = Vec::with_capacity(total);
        for step in 0..3.min(self.n_period) {
            let i = i0 + step;
            let yi = y[i];
            let a0 = self.coeff[step];
            let a_half = 0.5 * (self.coeff[step] + self.coeff[step + 1]);
            let a1 = self.coeff[step + 1];
            let if64 = i as f64;
            let k1 = a0 * y[i - self.n_unit] + self.inv_b * (yi + y[i - self.n_half]);
            let yd1 = read(&y, if64 + 0.5 - self.n_unit as f64);
            let yd2 = read(&y, if64 + 0.5 - self.n_half as f64);
            let k2 = a_half * yd1 + self.inv_b * (yi + 0.5 * self.h * k1 + yd2);
            let k3 = a_half * yd1 + self.inv_b * (yi + 0.5 * self.h * k2 + yd2);
            let yd1e = y[i + 1 - self.n_unit];
            let yd2e = y[i + 1 - self.n_half];
            let k4 = a1 * yd1e + self.inv_b * (yi + self.h * k3 + yd2e);
            y.push(yi + self.h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
            fs.push(k1);
        }
        // fill f-history for the multistep corrector
        while fs.len() < 3 {
            fs.push(0.0);
        }
        // 3-step Adams-Moulton main loop, implicit only through the
        // undelayed control term
        let am_den = 1.0 - 9.0 / 24.0 * self.h * self.inv_b;
        for step in 3..self.n_period {
            let i = i0 + step;
            let f_n = rhs(&y, i, y[i]);
            let explicit =
                self.coeff[step + 1] * y[i + 1 - self.n_unit] + self.inv_b * y[i + 1 - self.n_half];
            let sum = y[i]
                + self.h / 24.0 * (9.0 * explicit + 19.0 * f_n - 5.0 * fs[step - 1] + fs[step - 2]);
            let y_next = sum / am_den;
            fs.push(f_n);
            y.push(y_next);
        }
        y[y.len() - n_state..].to_vec()
    }

    fn matrix(&self) -> DMatrix<f64> {
        let n = self.n_state;
        let cols = par::map_range(n, |j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            self.advance_column(&e)
        });
        let mut m = DMatrix::zeros(n, n);
        for (j, col) in cols.into_iter().enumerate() {
            for (i, v) in col.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Compute the Floquet multipliers of an orbit's linearization.
///
/// The period map of ẏ(t) = λ f'(x(t-1)) y(t-1) + b⁻¹(y(t) + y(t-p/2))
/// is discretized on the history grid (dimension τ/h + 1) and its
/// eigenvalues returned sorted by modulus. The trivial multiplier must be
/// reproduced to 1e-3; otherwise the grid is refined once.
pub fn floquet(
    orbit: &PeriodicOrbit,
    scale: &ProblemScale,
    b: f64,
    f: &Nonlinearity,
) -> Result<FloquetReport> {
    let inv_b = if b.is_infinite() { 0.0 } else { 1.0 / b };
    let report = floquet_once(orbit, inv_b, f)?;
    if report.trivial_error <= 1e-3 {
        return Ok(report);
    }
    // refine once: rebuild the orbit with doubled resolution (n_half = 2N)
    let refined = find_orbit(scale, orbit.lambda, b, f, orbit.grid.n_half)?;
    let report2 = floquet_once(&refined, inv_b, f)?;
    if report2.trivial_error <= 1e-3 {
        Ok(report2)
    } else {
        Err(Error::Convergence {
            what: "Floquet trivial multiplier",
            iterations: 2,
            residual: report2.trivial_error,
        })
    }
}

fn floquet_once(orbit: &PeriodicOrbit, inv_b: f64, f: &Nonlinearity) -> Result<FloquetReport> {
    let mono = Monodromy::build(orbit, orbit.lambda, inv_b, f);
    if mono.n_state > 4096 {
        return Err(Error::InvalidParameter(
            "monodromy dimension exceeds the dense-eigensolve cap".into(),
        ));
    }
    let m = mono.matrix();
    let eig = m.complex_eigenvalues();
    let mut multipliers: Vec<(f64, f64)> = eig.iter().map(|c| (c.re, c.im)).collect();
    multipliers.sort_by(|a, b| {
        let (na, nb) = (a.0.hypot(a.1), b.0.hypot(b.1));
        nb.partial_cmp(&na).unwrap()
    });
    let trivial_error = multipliers
        .iter()
        .map(|&(re, im)| (re - 1.0).hypot(im))
        .fold(f64::INFINITY, f64::min);
    let unstable_count = multipliers
        .iter()
        .filter(|&&(re, im)| re.hypot(im) > 1.0 + 1e-4)
        .count();
    multipliers.truncate(32);
    Ok(FloquetReport {
        multipliers,
        trivial_error,
        unstable_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::make_scale;

    #[test]
    fn nonlinearity_certification() {
        assert!(Nonlinearity::new(f64::sin, f64::cos).is_ok());
        // not odd
        assert!(Nonlinearity::new(|x| x + 0.01 * x * x, |x| 1.0 + 0.02 * x).is_err());
        // wrong normalization
        assert!(Nonlinearity::new(|x| 2.0 * x - x.powi(3), |x| 2.0 - 3.0 * x * x).is_err());
        // hard spring rejected
        assert!(Nonlinearity::new(|x| x + x.powi(3), |x| 1.0 + 3.0 * x * x).is_err());
    }

    #[test]
    fn zero_history_stays_zero() {
        let s = make_scale(2);
        let grid = Grid::new(&s, 16).unwrap();
        let f = Nonlinearity::sine();
        let traj = integrate(&s, s.lambda_k, -0.05, &f, &HistorySegment::zero(grid), 5.0).unwrap();
        assert!(traj.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn integrator_self_convergence_order() {
        // smooth history, generic parameters; error against a fine
        // reference halves by ~2^4 per step halving
        let s = make_scale(2);
        let f = Nonlinearity::sine();
        let lambda = s.lambda_k * 1.02;
        let b = -0.12;
        let hist_fn = |t: f64| {
            (
                0.4 * (s.omega_k * t).sin() + 0.1 * (2.3 * t).cos(),
                0.4 * s.omega_k * (s.omega_k * t).cos() - 0.23 * (2.3 * t).sin(),
            )
        };
        let t_end = 2.0;
        let reference = {
            let grid = Grid::new(&s, 256).unwrap();
            let h = HistorySegment::sample(grid, hist_fn);
            integrate(&s, lambda, b, &f, &h, t_end).unwrap()
        };
        let mut samples = Vec::new();
        for n_per in [16usize, 32, 64] {
            let grid = Grid::new(&s, n_per).unwrap();
            let h = HistorySegment::sample(grid, hist_fn);
            let traj = integrate(&s, lambda, b, &f, &h, t_end).unwrap();
            let err = (traj.at(t_end) - reference.at(t_end)).abs();
            samples.push((grid.h, err));
        }
        let order = crate::asymptotics::order_fit(&samples).unwrap();
        assert!(order >= 3.8, "observed order {order}, errors {samples:?}");
    }

    #[test]
    fn symmetric_history_propagates_symmetry() {
        // started on a converged orbit, the half-period antisymmetry
        // persists over ten periods
        let s = make_scale(2);
        let f = Nonlinearity::sine();
        let lambda = s.lambda_k * 1.05;
        let orbit = find_orbit(&s, lambda, f64::INFINITY, &f, 24).unwrap();
        let grid = orbit.grid;
        let hist = {
            let samples = orbit.samples.clone();
            let derivs = orbit.deriv_samples.clone();
            let n = (samples.len() - 1) as i64;
            HistorySegment::sample(grid, move |t| {
                let i = ((t / grid.h).round() as i64).rem_euclid(n) as usize;
                (samples[i], derivs[i])
            })
        };
        let t_end = 10.0 * s.p_k;
        let traj = integrate(&s, lambda, orbit.b, &f, &hist, t_end).unwrap();
        let n_half = grid.n_half;
        let i_last = traj.x.len() - 1;
        let mut worst = 0.0f64;
        for i in (i_last - 2 * n_half)..(i_last - n_half) {
            worst = worst.max((traj.x[i + n_half] + traj.x[i]).abs());
        }
        assert!(worst < 1e-6, "symmetry residual {worst}");
    }

    #[test]
    fn orbit_amplitude_scales_as_sqrt_supercriticality() {
        let s = make_scale(2);
        let f = Nonlinearity::sine();
        let amp = |offset: f64| {
            find_orbit(&s, s.lambda_k * (1.0 + offset), f64::INFINITY, &f, 24)
                .unwrap()
                .amplitude
        };
        let (a1, a2, a4) = (amp(0.025), amp(0.05), amp(0.1));
        assert!((a2 / a1 - 2.0f64.sqrt()).abs() < 0.1 * 2.0f64.sqrt());
        assert!((a4 / a1 - 2.0).abs() < 0.2);
    }

    #[test]
    fn k0_slow_orbit_matches_long_time_integration() {
        // k = 0, vanishing control: the period-4 slowly oscillating orbit
        // is stable; long-time integration from a generic history must
        // approach the shooting orbit
        let s = make_scale(0);
        let f = Nonlinearity::sine();
        let lambda = 1.1 * s.lambda_k;
        let orbit = find_orbit(&s, lambda, f64::INFINITY, &f, 24).unwrap();
        assert!((orbit.period - 4.0).abs() < 1e-12);
        assert!(orbit.symmetry_residual < 1e-8);

        let grid = Grid::new(&s, 24).unwrap();
        let hist = HistorySegment::sample(grid, |t| (0.5 + 0.1 * t, 0.1));
        let traj = integrate(&s, lambda, f64::INFINITY, &f, &hist, 240.0).unwrap();
        // late-time periodicity with period 4
        let n4 = (4.0 / grid.h).round() as usize;
        let i_last = traj.x.len() - 1;
        let mut drift = 0.0f64;
        for i in (i_last - n4)..i_last {
            drift = drift.max((traj.x[i] - traj.x[i - n4]).abs());
        }
        assert!(drift < 1e-5, "period-4 drift {drift}");
        let late_amp = traj.x[i_last - n4..]
            .iter()
            .fold(0.0f64, |a, &v| a.max(v.abs()));
        assert!(
            (late_amp - orbit.amplitude).abs() < 0.01 * orbit.amplitude,
            "late amplitude {late_amp} vs orbit {}",
            orbit.amplitude
        );
    }

    #[test]
    fn half_period_residual_equals_full_period_residual() {
        // for a converged orbit the antisymmetric half-period closure and
        // the full-period fixed-point residual agree
        let s = make_scale(2);
        let f = Nonlinearity::sine();
        let orbit = find_orbit(&s, 1.05 * s.lambda_k, f64::INFINITY, &f, 24).unwrap();
        let grid = orbit.grid;
        let hist = {
            let samples = orbit.samples.clone();
            let derivs = orbit.deriv_samples.clone();
            let n = (samples.len() - 1) as i64;
            HistorySegment::sample(grid, move |t| {
                let i = ((t / grid.h).round() as i64).rem_euclid(n) as usize;
                (samples[i], derivs[i])
            })
        };
        let n_period = 2 * grid.n_half;
        let traj = integrate(&s, orbit.lambda, orbit.b, &f, &hist, s.p_k).unwrap();
        let i0 = grid.n_hist;
        let fixed_point_res = (0..=n_period)
            .map(|i| (traj.x[i0 + i] - orbit.samples[i]).abs())
            .fold(0.0f64, f64::max);
        assert!(
            (fixed_point_res - orbit.symmetry_residual).abs() < 1e-8,
            "fixed-point residual {fixed_point_res} vs symmetry {}",
            orbit.symmetry_residual
        );
    }

    #[test]
    fn uncontrolled_orbit_floquet_counts_match_k() {
        let f = Nonlinearity::sine();
        // k = 0: stable orbit, no multipliers outside the unit circle
        let s0 = make_scale(0);
        let orbit0 = find_orbit(&s0, 1.05 * s0.lambda_k, f64::INFINITY, &f, 24).unwrap();
        let rep0 = floquet(&orbit0, &s0, f64::INFINITY, &f).unwrap();
        assert!(rep0.trivial_error < 1e-3);
        assert_eq!(
            rep0.unstable_count,
            0,
            "multipliers: {:?}",
            &rep0.multipliers[..4]
        );

        // k = 2: rapidly oscillating orbit inherits unstable dimension 2
        let s2 = make_scale(2);
        let orbit2 = find_orbit(&s2, 1.05 * s2.lambda_k, f64::INFINITY, &f, 24).unwrap();
        let rep2 = floquet(&orbit2, &s2, f64::INFINITY, &f).unwrap();
        assert!(
            rep2.trivial_error < 1e-3,
            "trivial error {}",
            rep2.trivial_error
        );
        assert_eq!(
            rep2.unstable_count,
            2,
            "multipliers: {:?}",
            &rep2.multipliers[..5]
        );
    }

    #[test]
    fn trivial_equilibrium_floquet_matches_characteristic_roots() {
        // linearization about x ≡ 0 has constant coefficients; multipliers
        // must match exp(μ p) for the leading characteristic roots
        let s = make_scale(2);
        let f = Nonlinearity::sine();
        let b = -0.4;
        let grid = Grid::new(&s, 32).unwrap();
        let fake_orbit = PeriodicOrbit {
            k: s.k,
            lambda: s.lambda_k,
            b,
            period: s.p_k,
            grid,
            samples: vec![0.0; 2 * grid.n_half + 1],
            deriv_samples: vec![0.0; 2 * grid.n_half + 1],
            amplitude: 0.0,
            symmetry_residual: 0.0,
        };
        let rep = floquet_once(&fake_orbit, 1.0 / b, &f).unwrap();
        // compare the largest multipliers against exp(mu p) for the
        // refined characteristic roots
        let report = crate::spectrum::count_unstable(&s, b).unwrap();
        for root in report.roots.iter().take(2) {
            let target = (num_complex::Complex64::new(root.re, root.im) * s.p_k).exp();
            let found = rep
                .multipliers
                .iter()
                .map(|&(re, im)| (re - target.re).hypot(im - target.im))
                .fold(f64::INFINITY, f64::min)
                .min(
                    rep.multipliers
                        .iter()
                        .map(|&(re, im)| (re - target.re).hypot(im + target.im))
                        .fold(f64::INFINITY, f64::min),
                );
            assert!(
                found < 0.02 * target.norm().max(1.0),
                "multiplier for root {root:?} missed by {found}"
            );
        }
    }
}

//! delaylab — numerical laboratory for Pyragas-controlled delay equations.
//!
//! Subcommands compute unstable-dimension counts over control grids, emit
//! figure-ready datasets of the two-scale curves and their control-induced
//! Hopf points, locate and certify the stabilization interval, validate
//! the small-parameter expansions, and simulate the controlled system with
//! Floquet analysis.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 numerical failure.

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use delaylab_core::asymptotics::{
    b_min_expansion, boundary_expansion, eps_expand, order_fit, ExpansionSample,
};
use delaylab_core::dde::{find_orbit, floquet, integrate, HistorySegment, Nonlinearity};
use delaylab_core::hashing::hopf_points;
use delaylab_core::scaling::{make_scale, Parity};
use delaylab_core::spectrum::{
    count_unstable_grid, instability_intervals, pyragas_interval, SpectrumReport,
};
use delaylab_core::twoscale::{b_min_on_curve, domain_bounds, eval_h, sample_curve, Branch};
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Opaque build identifier embedded in every output file.
fn build_id() -> String {
    format!("delaylab-{}", env!("CARGO_PKG_VERSION"))
}

#[derive(Parser)]
#[command(name = "delaylab", version, about)]
struct Cli {
    /// Worker threads for grid sweeps (default: DELAYLAB_JOBS or all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Random seed recorded in outputs (all pipelines are deterministic)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count unstable eigenvalues at one control value or over a grid
    Spectrum(SpectrumArgs),
    /// Emit two-scale curves, Hopf points and instability intervals
    Hopf(HopfArgs),
    /// Locate and certify the stabilization interval of control amplitudes
    Pyragas(PyragasArgs),
    /// Validate the small-parameter expansions by convergence-order fits
    Expansions(ExpansionArgs),
    /// Find the periodic orbit, run Floquet analysis and a long simulation
    Simulate(SimulateArgs),
    /// Export sampled two-scale curves as CSV
    Curves(CurvesArgs),
}

#[derive(Args, Serialize)]
struct SpectrumArgs {
    /// Hopf branch index
    #[arg(long)]
    k: u64,
    /// single scaled control value B
    #[arg(long = "B", allow_hyphen_values = true)]
    big_b: Option<f64>,
    /// control grid lo:hi:n (scaled B values)
    #[arg(long = "B-grid", allow_hyphen_values = true)]
    b_grid: Option<String>,
    /// output path (JSON); defaults to spectrum_k<k>.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct HopfArgs {
    #[arg(long)]
    k: u64,
    /// resonance families, e.g. 0..4 or a single m
    #[arg(long, default_value = "0..3")]
    m: String,
    /// curve samples per family
    #[arg(long, default_value_t = 512)]
    samples: usize,
    /// output prefix; writes <prefix>_curves.csv, _points.json, _intervals.json
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Serialize)]
struct PyragasArgs {
    #[arg(long)]
    k: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ExpansionArgs {
    /// which family of expansions to validate: eps | boundary | delta
    #[arg(long)]
    check: String,
    /// resonance families for --check eps, e.g. 1..3
    #[arg(long, default_value = "1..3")]
    m: String,
    /// comma-separated Hopf indices, e.g. 19,39,79
    #[arg(long, default_value = "19,39,79")]
    k: String,
    /// resonance indices for --check delta, e.g. 10,20,40
    #[arg(long, default_value = "10,20,40")]
    m_delta: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    k: u64,
    /// supercriticality offset: lambda = (1 + offset) lambda_k
    #[arg(long, default_value_t = 0.05)]
    lambda_offset: f64,
    /// physical control amplitude, or inside | below | above (relative to
    /// the computed stabilization interval)
    #[arg(long, allow_hyphen_values = true, default_value = "inside")]
    b: String,
    /// how many periods to integrate for the drift report
    #[arg(long, default_value_t = 200)]
    periods: usize,
    /// grid nodes per smallest delay unit
    #[arg(long, default_value_t = 64)]
    n_per: usize,
    /// output prefix; writes <prefix>_orbit.csv, _floquet.json
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Serialize)]
struct CurvesArgs {
    /// resonance families, e.g. 0..5
    #[arg(long, default_value = "0..3")]
    m: String,
    #[arg(long, default_value_t = 512)]
    samples: usize,
    /// parity of k entering the fast-frequency shift: odd | even
    #[arg(long, default_value = "odd")]
    parity: String,
    /// output path (CSV); defaults to curves.csv
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Outcome classes mapped to exit codes.
enum Outcome {
    Success,
    VerificationFailure(String),
}

/// Unwrap an argument-parsing result, exiting with the usage code on error.
fn usage<T>(r: anyhow::Result<T>) -> T {
    match r {
        Ok(v) => v,
        Err(e) => clap::Error::raw(clap::error::ErrorKind::InvalidValue, format!("{e:#}\n")).exit(),
    }
}

fn parse_range(text: &str) -> anyhow::Result<Vec<u64>> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo.trim().parse().context("range start")?;
        let hi: u64 = hi.trim().parse().context("range end")?;
        anyhow::ensure!(lo <= hi, "empty range {text}");
        Ok((lo..=hi).collect())
    } else if text.contains(',') {
        text.split(',')
            .map(|t| t.trim().parse::<u64>().context("list entry"))
            .collect()
    } else {
        Ok(vec![text.trim().parse().context("single value")?])
    }
}

fn parse_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    anyhow::ensure!(parts.len() == 3, "grid must be lo:hi:n, got {text}");
    let lo: f64 = parts[0].parse().context("grid lo")?;
    let hi: f64 = parts[1].parse().context("grid hi")?;
    let n: usize = parts[2].parse().context("grid n")?;
    anyhow::ensure!(n >= 1, "grid must be nonempty");
    Ok((0..n)
        .map(|i| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect())
}

/// 17-significant-digit CSV field (round-trip exact for doubles).
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_json<T: Serialize>(path: &PathBuf, value: &T) -> anyhow::Result<()> {
    let mut file =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

#[derive(Serialize)]
struct ConfigEcho<T: Serialize> {
    subcommand: &'static str,
    build: String,
    seed: u64,
    args: T,
}

fn cmd_spectrum(args: &SpectrumArgs, seed: u64) -> anyhow::Result<Outcome> {
    let grid: Vec<f64> = match (&args.big_b, &args.b_grid) {
        (Some(b), None) => vec![*b],
        (None, Some(g)) => usage(parse_grid(g)),
        _ => {
            clap::Error::raw(
                clap::error::ErrorKind::ArgumentConflict,
                "exactly one of --B and --B-grid is required\n",
            )
            .exit();
        }
    };
    if grid.contains(&0.0) {
        clap::Error::raw(
            clap::error::ErrorKind::InvalidValue,
            "B = 0 is forbidden (vanishing control is the limit |B| -> inf)\n",
        )
        .exit();
    }
    let scale = make_scale(args.k);
    let reports: Vec<delaylab_core::Result<SpectrumReport>> =
        count_unstable_grid(&scale, &grid, true);
    let mut ok_reports = Vec::new();
    for r in reports {
        ok_reports.push(r?);
    }
    #[derive(Serialize)]
    struct Out<'a> {
        config: ConfigEcho<&'a SpectrumArgs>,
        k: u64,
        reports: Vec<SpectrumReport>,
    }
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("spectrum_k{}.json", args.k)));
    write_json(
        &path,
        &Out {
            config: ConfigEcho {
                subcommand: "spectrum",
                build: build_id(),
                seed,
                args,
            },
            k: args.k,
            reports: ok_reports,
        },
    )?;
    println!("wrote {}", path.display());
    Ok(Outcome::Success)
}

fn cmd_hopf(args: &HopfArgs, seed: u64) -> anyhow::Result<Outcome> {
    let scale = make_scale(args.k);
    let ms = usage(parse_range(&args.m));
    let prefix = args
        .out
        .clone()
        .unwrap_or_else(|| format!("hopf_k{}", args.k));

    // curves CSV
    let curve_path = PathBuf::from(format!("{prefix}_curves.csv"));
    {
        let mut f = std::fs::File::create(&curve_path)?;
        writeln!(
            f,
            "# delaylab hopf k={} m={} samples={} seed={seed} build={}",
            args.k,
            args.m,
            args.samples,
            build_id()
        )?;
        writeln!(f, "m,delta,Omega,omega_plus,omega_minus,B_plus,B_minus,D")?;
        for &m in &ms {
            for row in sample_curve(m, args.samples, scale.parity())? {
                writeln!(
                    f,
                    "{m},{},{},{},{},{},{},{}",
                    fmt(row.delta),
                    fmt(row.omega_slow),
                    fmt(row.omega_plus),
                    fmt(row.omega_minus),
                    fmt(row.b_plus),
                    fmt(row.b_minus),
                    fmt(row.discriminant)
                )?;
            }
        }
    }

    // Hopf points JSON (hashing-line parameters are reconstructible from
    // k, m, j; the eps field pins the slope)
    let mut all_points = Vec::new();
    for &m in &ms {
        all_points.extend(hopf_points(&scale, m)?);
    }
    #[derive(Serialize)]
    struct PointsOut<'a> {
        config: ConfigEcho<&'a HopfArgs>,
        k: u64,
        points: Vec<delaylab_core::hashing::HopfPoint>,
    }
    let points_path = PathBuf::from(format!("{prefix}_points.json"));
    write_json(
        &points_path,
        &PointsOut {
            config: ConfigEcho {
                subcommand: "hopf",
                build: build_id(),
                seed,
                args,
            },
            k: args.k,
            points: all_points,
        },
    )?;

    // instability intervals JSON
    let mut intervals = Vec::new();
    for &m in ms.iter().filter(|&&m| m >= 1) {
        intervals.extend(instability_intervals(&scale, m)?);
    }
    #[derive(Serialize)]
    struct IntervalsOut<'a> {
        config: ConfigEcho<&'a HopfArgs>,
        k: u64,
        intervals: Vec<delaylab_core::spectrum::InstabilityInterval>,
    }
    let intervals_path = PathBuf::from(format!("{prefix}_intervals.json"));
    write_json(
        &intervals_path,
        &IntervalsOut {
            config: ConfigEcho {
                subcommand: "hopf",
                build: build_id(),
                seed,
                args,
            },
            k: args.k,
            intervals,
        },
    )?;
    println!(
        "wrote {} {} {}",
        curve_path.display(),
        points_path.display(),
        intervals_path.display()
    );
    Ok(Outcome::Success)
}

fn cmd_pyragas(args: &PyragasArgs, seed: u64) -> anyhow::Result<Outcome> {
    let scale = make_scale(args.k);
    let interval = pyragas_interval(&scale)?;
    let series = boundary_expansion(&scale)?;
    #[derive(Serialize)]
    struct Out<'a> {
        config: ConfigEcho<&'a PyragasArgs>,
        interval: &'a delaylab_core::spectrum::PyragasInterval,
        series_b_lower: f64,
        series_b_upper: f64,
        residual_lower: f64,
        residual_upper: f64,
    }
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("pyragas_k{}.json", args.k)));
    write_json(
        &path,
        &Out {
            config: ConfigEcho {
                subcommand: "pyragas",
                build: build_id(),
                seed,
                args,
            },
            interval: &interval,
            series_b_lower: series.b_lower,
            series_b_upper: series.b_upper,
            residual_lower: (interval.b_lower - series.b_lower).abs(),
            residual_upper: (interval.b_upper - series.b_upper).abs(),
        },
    )?;
    println!(
        "wrote {} (b in ({:.6e}, {:.6e}), verified: {})",
        path.display(),
        interval.b_lower,
        interval.b_upper,
        interval.verified
    );
    if interval.verified {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::VerificationFailure(format!(
            "interval inequalities or spectral certification failed at k = {}: {:?}",
            args.k, interval.inequality_report.violations
        )))
    }
}

#[derive(Serialize)]
struct OrderRow {
    quantity: String,
    fitted_order: f64,
    threshold: f64,
    samples: Vec<(f64, f64)>,
}

/// Fold validation samples into per-quantity order fits.
fn fit_orders(samples: &[ExpansionSample], threshold: f64) -> anyhow::Result<Vec<OrderRow>> {
    let mut names: Vec<&str> = samples.iter().map(|s| s.quantity.as_str()).collect();
    names.dedup();
    let mut rows = Vec::new();
    for name in names {
        let pairs: Vec<(f64, f64)> = samples
            .iter()
            .filter(|s| s.quantity == name)
            .map(|s| (s.parameter, s.residual()))
            .collect();
        if pairs.len() < 3 {
            continue;
        }
        rows.push(OrderRow {
            quantity: name.to_string(),
            fitted_order: order_fit(&pairs)?,
            threshold,
            samples: pairs,
        });
    }
    Ok(rows)
}

fn expansion_samples_eps(ms: &[u64], ks: &[u64]) -> anyhow::Result<Vec<ExpansionSample>> {
    let extra = [159u64, 319];
    let mut out = Vec::new();
    for &m in ms {
        let j_m = m.div_ceil(2);
        for j in 1..=j_m + 1 {
            for branch in [Branch::Minus, Branch::Plus] {
                if branch == Branch::Plus && m % 2 == 1 && j == 1 {
                    continue;
                }
                let mut n_found = 0;
                for &k in ks.iter().chain(extra.iter()) {
                    if n_found >= 3 && n_found >= ks.len() {
                        break;
                    }
                    let s = make_scale(k);
                    let pts = hopf_points(&s, m)?;
                    if let Some(p) = pts.iter().find(|p| p.j == j && p.branch == branch) {
                        let (_, _, series) = eps_expand(m, j, branch, s.eps)?;
                        out.push(ExpansionSample {
                            quantity: format!(
                                "B{}[m={m},j={j}]",
                                if branch == Branch::Plus { "+" } else { "-" }
                            ),
                            parameter: s.eps,
                            numeric: p.big_b,
                            series,
                        });
                        n_found += 1;
                    }
                }
            }
        }
    }
    Ok(out)
}

fn expansion_samples_boundary(ks: &[u64]) -> anyhow::Result<Vec<ExpansionSample>> {
    let mut out = Vec::new();
    for &k in ks {
        let s = make_scale(k);
        let series = boundary_expansion(&s)?;
        let b01 = hopf_points(&s, 0)?
            .into_iter()
            .find(|p| p.j == 1)
            .context("first stabilizing point")?;
        let b11 = hopf_points(&s, 1)?
            .into_iter()
            .find(|p| p.j == 1 && p.branch == Branch::Minus)
            .context("first destabilizing point")?;
        out.push(ExpansionSample {
            quantity: "b_lower".into(),
            parameter: s.eps,
            numeric: 2.0 * s.eps * b01.big_b,
            series: series.b_lower,
        });
        out.push(ExpansionSample {
            quantity: "b_upper".into(),
            parameter: s.eps,
            numeric: 2.0 * s.eps * b11.big_b,
            series: series.b_upper,
        });
    }
    out.sort_by(|a, b| a.quantity.cmp(&b.quantity));
    Ok(out)
}

fn expansion_samples_delta(ms: &[u64]) -> anyhow::Result<Vec<ExpansionSample>> {
    let mut out = Vec::new();
    for &m in ms {
        let delta = 1.0 / (2 * m + 1) as f64;
        let bounds = domain_bounds(m)?;
        let (mut lo, mut hi) = (bounds.omega_lower + 1e-12, -1e-15);
        let mut flo = eval_h(delta, lo, 0.0, Parity::Odd);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = eval_h(delta, mid, 0.0, Parity::Odd);
            if flo * fm <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
                flo = fm;
            }
        }
        out.push(ExpansionSample {
            quantity: "Omega(delta,0)".into(),
            parameter: delta,
            numeric: 0.5 * (lo + hi),
            series: -2.0 / PI * delta,
        });
        let (bmin, _) = b_min_on_curve(delta)?;
        out.push(ExpansionSample {
            quantity: "B_min(delta)".into(),
            parameter: delta,
            numeric: bmin,
            series: b_min_expansion(delta),
        });
    }
    out.sort_by(|a, b| a.quantity.cmp(&b.quantity));
    Ok(out)
}

fn cmd_expansions(args: &ExpansionArgs, seed: u64) -> anyhow::Result<Outcome> {
    let (samples, threshold) = match args.check.as_str() {
        "eps" => (
            expansion_samples_eps(&usage(parse_range(&args.m)), &usage(parse_range(&args.k)))?,
            2.7,
        ),
        "boundary" => (
            expansion_samples_boundary(&usage(parse_range(&args.k)))?,
            3.7,
        ),
        "delta" => (
            expansion_samples_delta(&usage(parse_range(&args.m_delta)))?,
            2.7,
        ),
        other => {
            clap::Error::raw(
                clap::error::ErrorKind::InvalidValue,
                format!("unknown --check {other}; expected eps | boundary | delta\n"),
            )
            .exit();
        }
    };
    let mut rows = fit_orders(&samples, threshold)?;
    if args.check.as_str() == "delta" {
        for r in &mut rows {
            if r.quantity.starts_with("B_min") {
                r.threshold = 3.7;
            }
        }
    }
    #[derive(Serialize)]
    struct Out<'a> {
        config: ConfigEcho<&'a ExpansionArgs>,
        orders: &'a [OrderRow],
    }
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("expansions_{}.json", args.check)));
    // CSV companion with the raw validation rows
    let csv_path = path.with_extension("csv");
    {
        let mut fcsv = std::fs::File::create(&csv_path)?;
        writeln!(
            fcsv,
            "# delaylab expansions check={} seed={seed} build={}",
            args.check,
            build_id()
        )?;
        writeln!(fcsv, "parameter,quantity,numeric,series,residual")?;
        for sample in &samples {
            writeln!(
                fcsv,
                "{},{},{},{},{}",
                fmt(sample.parameter),
                sample.quantity,
                fmt(sample.numeric),
                fmt(sample.series),
                fmt(sample.residual())
            )?;
        }
    }
    write_json(
        &path,
        &Out {
            config: ConfigEcho {
                subcommand: "expansions",
                build: build_id(),
                seed,
                args,
            },
            orders: &rows,
        },
    )?;
    let failing: Vec<&OrderRow> = rows
        .iter()
        .filter(|r| r.fitted_order < r.threshold)
        .collect();
    for r in &rows {
        println!(
            "{}: fitted order {:.2} (threshold {})",
            r.quantity, r.fitted_order, r.threshold
        );
    }
    println!("wrote {} and {}", path.display(), csv_path.display());
    if failing.is_empty() {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::VerificationFailure(format!(
            "{} expansion orders below threshold",
            failing.len()
        )))
    }
}

fn cmd_simulate(args: &SimulateArgs, seed: u64) -> anyhow::Result<Outcome> {
    let scale = make_scale(args.k);
    let f = Nonlinearity::sine();
    let lambda = (1.0 + args.lambda_offset) * scale.lambda_k;
    let b = match args.b.as_str() {
        "inside" | "below" | "above" => {
            let p = pyragas_interval(&scale)?;
            match args.b.as_str() {
                "inside" => 0.5 * (p.b_lower + p.b_upper),
                "below" => 1.5 * p.b_lower,
                _ => 0.5 * p.b_upper,
            }
        }
        text => usage(text.parse::<f64>().context("parsing --b")),
    };
    if b == 0.0 {
        clap::Error::raw(clap::error::ErrorKind::InvalidValue, "b = 0 is forbidden\n").exit();
    }

    let orbit = find_orbit(&scale, lambda, b, &f, args.n_per)?;
    let flq = floquet(&orbit, &scale, b, &f)?;

    // long integration from the orbit for the symmetry-drift report
    let hist = {
        let grid = orbit.grid;
        let samples = orbit.samples.clone();
        let derivs = orbit.deriv_samples.clone();
        let n = (samples.len() - 1) as i64;
        HistorySegment::sample(grid, move |t| {
            let i = ((t / grid.h).round() as i64).rem_euclid(n) as usize;
            (samples[i], derivs[i])
        })
    };
    let t_end = args.periods as f64 * scale.p_k;
    let traj = integrate(&scale, lambda, b, &f, &hist, t_end)?;
    let n_half = orbit.grid.n_half;
    let i_last = traj.x.len() - 1;
    let mut drift = 0.0f64;
    for i in (i_last - 2 * n_half)..(i_last - n_half) {
        drift = drift.max((traj.x[i + n_half] + traj.x[i]).abs());
    }

    let prefix = args
        .out
        .clone()
        .unwrap_or_else(|| format!("simulate_k{}", args.k));
    let orbit_path = PathBuf::from(format!("{prefix}_orbit.csv"));
    {
        let mut fcsv = std::fs::File::create(&orbit_path)?;
        writeln!(
            fcsv,
            "# delaylab simulate k={} lambda={} b={} periods={} seed={seed} build={}",
            args.k,
            fmt(lambda),
            fmt(b),
            args.periods,
            build_id()
        )?;
        writeln!(fcsv, "t,x")?;
        for (i, v) in orbit.samples.iter().enumerate() {
            writeln!(fcsv, "{},{}", fmt(i as f64 * orbit.grid.h), fmt(*v))?;
        }
    }
    #[derive(Serialize)]
    struct Out<'a> {
        config: ConfigEcho<&'a SimulateArgs>,
        k: u64,
        lambda: f64,
        b: f64,
        amplitude: f64,
        symmetry_residual: f64,
        noninvasiveness_residual: f64,
        late_symmetry_drift: f64,
        floquet: &'a delaylab_core::dde::FloquetReport,
    }
    let f_path = PathBuf::from(format!("{prefix}_floquet.json"));
    write_json(
        &f_path,
        &Out {
            config: ConfigEcho {
                subcommand: "simulate",
                build: build_id(),
                seed,
                args,
            },
            k: args.k,
            lambda,
            b,
            amplitude: orbit.amplitude,
            symmetry_residual: orbit.symmetry_residual,
            noninvasiveness_residual: orbit.noninvasiveness_residual(),
            late_symmetry_drift: drift,
            floquet: &flq,
        },
    )?;
    println!(
        "wrote {} {} (unstable multipliers: {}, trivial error {:.2e})",
        orbit_path.display(),
        f_path.display(),
        flq.unstable_count,
        flq.trivial_error
    );
    let residuals_ok = orbit.symmetry_residual < 1e-6
        && orbit.noninvasiveness_residual() < 1e-6 * orbit.amplitude
        && flq.trivial_error < 1e-3;
    if residuals_ok {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::VerificationFailure(format!(
            "orbit residuals out of tolerance: symmetry {:.2e}, noninvasive {:.2e}, trivial {:.2e}",
            orbit.symmetry_residual,
            orbit.noninvasiveness_residual(),
            flq.trivial_error
        )))
    }
}

fn cmd_curves(args: &CurvesArgs, seed: u64) -> anyhow::Result<Outcome> {
    let parity = match args.parity.as_str() {
        "odd" => Parity::Odd,
        "even" => Parity::Even,
        other => {
            clap::Error::raw(
                clap::error::ErrorKind::InvalidValue,
                format!("unknown parity {other}; expected odd | even\n"),
            )
            .exit();
        }
    };
    let ms = usage(parse_range(&args.m));
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("curves.csv"));
    let mut f = std::fs::File::create(&path)?;
    writeln!(
        f,
        "# delaylab curves m={} samples={} parity={} seed={seed} build={}",
        args.m,
        args.samples,
        args.parity,
        build_id()
    )?;
    writeln!(f, "m,delta,Omega,omega_plus,omega_minus,B_plus,B_minus,D")?;
    for &m in &ms {
        for row in sample_curve(m, args.samples, parity)? {
            writeln!(
                f,
                "{m},{},{},{},{},{},{},{}",
                fmt(row.delta),
                fmt(row.omega_slow),
                fmt(row.omega_plus),
                fmt(row.omega_minus),
                fmt(row.b_plus),
                fmt(row.b_minus),
                fmt(row.discriminant)
            )?;
        }
    }
    println!("wrote {}", path.display());
    Ok(Outcome::Success)
}

fn configure_pool(jobs: Option<usize>) {
    let jobs = jobs.or_else(|| {
        std::env::var("DELAYLAB_JOBS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_pool(cli.jobs);
    let seed = cli.seed;
    let result = match &cli.command {
        Command::Spectrum(args) => cmd_spectrum(args, seed),
        Command::Hopf(args) => cmd_hopf(args, seed),
        Command::Pyragas(args) => cmd_pyragas(args, seed),
        Command::Expansions(args) => cmd_expansions(args, seed),
        Command::Simulate(args) => cmd_simulate(args, seed),
        Command::Curves(args) => cmd_curves(args, seed),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailure(msg)) => {
            eprintln!("verification failure: {msg}");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("numerical failure: {err:#}");
            ExitCode::from(3)
        }
    }
}

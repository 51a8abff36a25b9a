//! Command-line front end: packet and schedule parsing, run
//! orchestration, CSV emission, and figure-reproduction presets.
//!
//! Exit codes: 0 success, 1 a requested check failed, 2 bad usage or
//! malformed input, 3 numerical inadequacy (aliasing, norm drift).

// negated comparisons are deliberate: !(b > a) also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use freewave::num_complex::Complex64 as C64;
use freewave::packet::{FamilyPacket, GridPacket, Interval, WavePacket, SOFT_FAMILY_ORDER};
use freewave::{analysis, asymptotics, observables, propagator, quad};

#[derive(Parser)]
#[command(
    name = "freewave",
    version,
    about = "Long-time evolution of free one-dimensional wave packets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate survival and nonescape probabilities over a time schedule
    Observe(ObserveArgs),
    /// Evaluate the closed-form leading power laws over a time schedule
    Asymptote(AsymptoteArgs),
    /// Dump the evolved complex field on a position grid, one file per time
    Field(FieldArgs),
    /// Fit a power law to a column of an existing CSV series
    Fit(FitArgs),
    /// Re-run a published decay scenario and check the fitted exponents
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct ObserveArgs {
    /// Packet spec: family:m=..,a0=..,k0=..,x0=..  or  grid:<csv path>
    #[arg(long)]
    packet: String,
    /// Escape interval as lo,hi in units of a0
    #[arg(long, default_value = "-2,2", allow_hyphen_values = true)]
    interval: String,
    /// Reduced-time schedule: log:lo,hi,n | lin:lo,hi,n | list:v1,v2,...
    #[arg(long, default_value = "log:0.1,1000,80")]
    times: String,
    /// Output directory
    #[arg(long, default_value = "out")]
    outdir: PathBuf,
}

#[derive(Args)]
struct AsymptoteArgs {
    #[arg(long)]
    packet: String,
    #[arg(long, default_value = "-2,2", allow_hyphen_values = true)]
    interval: String,
    /// Reduced times; the leading laws need every entry positive
    #[arg(long, default_value = "log:0.1,1000,80")]
    times: String,
    #[arg(long, default_value = "out")]
    outdir: PathBuf,
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long)]
    packet: String,
    /// Reduced times; one output file per entry
    #[arg(long, default_value = "list:0,1,10")]
    times: String,
    /// Position grid as lo,hi,n
    #[arg(long, default_value = "-8,8,401", allow_hyphen_values = true)]
    xgrid: String,
    #[arg(long, default_value = "out")]
    outdir: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// CSV file holding the series (# comment lines are skipped)
    #[arg(long)]
    input: PathBuf,
    /// Header name of the time column
    #[arg(long, default_value = "T")]
    time_column: String,
    /// Header name of the value column to fit
    #[arg(long)]
    column: String,
    /// Fit window as lo,hi in the time column's units
    #[arg(long, allow_hyphen_values = true)]
    window: String,
    /// Expected exponent; when set, deviations beyond --tolerance exit 1
    #[arg(long, allow_negative_numbers = true)]
    expect: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    tolerance: f64,
    #[arg(long, default_value = "out")]
    outdir: PathBuf,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Published scenario to re-run
    #[arg(value_enum)]
    figure: Figure,
    #[arg(long, default_value = "out")]
    outdir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig1a,
    Fig1b,
    Fig2,
}

struct Preset {
    name: &'static str,
    order: usize,
    expect_s: f64,
    expect_p: f64,
    tol_s: f64,
    tol_p: f64,
}

impl Figure {
    fn preset(self) -> Preset {
        match self {
            Figure::Fig1a => Preset {
                name: "fig1a",
                order: 0,
                expect_s: -1.0,
                expect_p: -1.0,
                tol_s: 0.05,
                tol_p: 0.05,
            },
            Figure::Fig1b => Preset {
                name: "fig1b",
                order: 1,
                expect_s: -3.0,
                expect_p: -3.0,
                tol_s: 0.1,
                tol_p: 0.1,
            },
            Figure::Fig2 => Preset {
                name: "fig2",
                order: 2,
                expect_s: -5.0,
                expect_p: -3.0,
                tol_s: 0.15,
                tol_p: 0.1,
            },
        }
    }
}

#[derive(Debug)]
enum Failure {
    Check(String),
    Usage(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(s) | Failure::Usage(s) | Failure::Numeric(s) => s,
        }
    }
}

impl From<freewave::Error> for Failure {
    fn from(e: freewave::Error) -> Self {
        match &e {
            freewave::Error::InvalidParameter(_) | freewave::Error::Domain(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn run(command: &Command) -> Result<(), Failure> {
    match command {
        Command::Observe(args) => cmd_observe(args),
        Command::Asymptote(args) => cmd_asymptote(args),
        Command::Field(args) => cmd_field(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Reproduce(args) => cmd_reproduce(args),
    }
}

/// 12 significant digits, locale-free, stable across runs
fn sig(x: f64) -> String {
    format!("{x:.11e}")
}

fn sig_c(z: C64) -> String {
    let sign = if z.im < 0.0 { "-" } else { "+" };
    format!("{}{}{}i", sig(z.re), sign, sig(z.im.abs()))
}

fn config_block(entries: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (key, value) in entries {
        writeln!(s, "# {key}: {value}").unwrap();
    }
    s
}

fn write_out(outdir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(outdir)
        .map_err(|e| usage(format!("cannot create {}: {e}", outdir.display())))?;
    let path = outdir.join(name);
    fs::write(&path, contents)
        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn parse_packet(spec: &str) -> Result<WavePacket, Failure> {
    if let Some(rest) = spec.strip_prefix("family:") {
        let mut m = None;
        let mut a0 = None;
        let mut k0 = None;
        let mut x0 = None;
        for part in rest.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| usage(format!("packet field `{part}` is not key=value")))?;
            match key.trim() {
                "m" => {
                    m = Some(value.trim().parse::<usize>().map_err(|_| {
                        usage(format!(
                            "packet field m must be a nonnegative integer, got `{value}`"
                        ))
                    })?)
                }
                "a0" => a0 = Some(parse_packet_float("a0", value)?),
                "k0" => k0 = Some(parse_packet_float("k0", value)?),
                "x0" => x0 = Some(parse_packet_float("x0", value)?),
                other => return Err(usage(format!("unknown packet field `{other}`"))),
            }
        }
        let m = m.ok_or_else(|| usage("packet spec missing field m"))?;
        let a0 = a0.ok_or_else(|| usage("packet spec missing field a0"))?;
        let k0 = k0.ok_or_else(|| usage("packet spec missing field k0"))?;
        let x0 = x0.ok_or_else(|| usage("packet spec missing field x0"))?;
        if m > SOFT_FAMILY_ORDER {
            eprintln!(
                "warning: family order {m} exceeds {SOFT_FAMILY_ORDER}; quadrature windows \
                 and derivative tables lose accuracy at high order"
            );
        }
        Ok(WavePacket::from(FamilyPacket::new(m, a0, k0, x0)?))
    } else if let Some(path) = spec.strip_prefix("grid:") {
        Ok(WavePacket::from(load_grid(Path::new(path))?))
    } else {
        Err(usage(
            "packet spec must start with `family:` or `grid:` (e.g. family:m=0,a0=1,k0=0,x0=0)",
        ))
    }
}

fn parse_packet_float(field: &str, value: &str) -> Result<f64, Failure> {
    value.trim().parse::<f64>().map_err(|_| {
        usage(format!(
            "packet field {field} must be a number, got `{value}`"
        ))
    })
}

/// Reads momentum samples from a `k,re,im` CSV, checks uniform ascending
/// spacing, and normalizes before wrapping.
fn load_grid(path: &Path) -> Result<GridPacket, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read grid file {}: {e}", path.display())))?;
    let mut ks: Vec<f64> = Vec::new();
    let mut samples: Vec<C64> = Vec::new();
    let mut first_data_line = true;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = if fields.len() == 3 {
            fields.iter().map(|f| f.parse::<f64>().ok()).collect()
        } else {
            None
        };
        match parsed {
            Some(row) => {
                ks.push(row[0]);
                samples.push(C64::new(row[1], row[2]));
            }
            None if first_data_line => {} // header row
            None => {
                return Err(usage(format!(
                    "grid file {} line {}: expected `k,re,im`, got `{line}`",
                    path.display(),
                    idx + 1
                )))
            }
        }
        first_data_line = false;
    }
    if ks.len() < 2 {
        return Err(usage(format!(
            "grid file {} holds {} samples; a usable grid needs many more",
            path.display(),
            ks.len()
        )));
    }
    let dk = (ks[ks.len() - 1] - ks[0]) / (ks.len() - 1) as f64;
    if !(dk > 0.0) {
        return Err(usage("grid momentum column must be strictly ascending"));
    }
    for (i, pair) in ks.windows(2).enumerate() {
        if (pair[1] - pair[0] - dk).abs() > 1e-9 * dk {
            return Err(usage(format!(
                "grid momentum column must be uniformly spaced (row {} breaks the pattern)",
                i + 2
            )));
        }
    }
    let abs2: Vec<f64> = samples.iter().map(|c| c.norm_sqr()).collect();
    let norm2 = quad::trapezoid(&abs2, dk);
    if !(norm2 > 0.0) {
        return Err(usage("grid amplitudes are identically zero"));
    }
    let scale = 1.0 / norm2.sqrt();
    let scaled: Vec<C64> = samples.into_iter().map(|c| c * scale).collect();
    Ok(GridPacket::new(ks[0], ks[ks.len() - 1], scaled)?)
}

fn parse_interval(spec: &str) -> Result<Interval, Failure> {
    let (a, b) = spec
        .split_once(',')
        .ok_or_else(|| usage(format!("interval must be lo,hi, got `{spec}`")))?;
    let a: f64 = a
        .trim()
        .parse()
        .map_err(|_| usage(format!("interval endpoint `{a}` is not a number")))?;
    let b: f64 = b
        .trim()
        .parse()
        .map_err(|_| usage(format!("interval endpoint `{b}` is not a number")))?;
    Ok(Interval::new(a, b)?)
}

fn parse_times(spec: &str) -> Result<Vec<f64>, Failure> {
    if let Some(rest) = spec.strip_prefix("log:") {
        let (lo, hi, n) = parse_schedule(rest)?;
        Ok(observables::log_spaced_times(lo, hi, n)?)
    } else if let Some(rest) = spec.strip_prefix("lin:") {
        let (lo, hi, n) = parse_schedule(rest)?;
        Ok(observables::linear_spaced_times(lo, hi, n)?)
    } else if let Some(rest) = spec.strip_prefix("list:") {
        let times: Result<Vec<f64>, _> = rest.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let times = times.map_err(|_| usage(format!("time list holds a non-number: `{rest}`")))?;
        if times.is_empty() {
            return Err(usage("time list is empty"));
        }
        for pair in times.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(usage("time list must be strictly increasing"));
            }
        }
        if !times.iter().all(|t| t.is_finite() && *t >= 0.0) {
            return Err(usage("times must be finite and nonnegative"));
        }
        Ok(times)
    } else {
        Err(usage(format!(
            "time spec must start with log:, lin:, or list:, got `{spec}`"
        )))
    }
}

fn parse_schedule(rest: &str) -> Result<(f64, f64, usize), Failure> {
    let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(usage(format!(
            "time schedule must be lo,hi,n, got `{rest}`"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| usage(format!("schedule bound `{}` is not a number", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| usage(format!("schedule bound `{}` is not a number", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| usage(format!("schedule count `{}` is not an integer", parts[2])))?;
    Ok((lo, hi, n))
}

fn parse_xgrid(spec: &str) -> Result<Vec<f64>, Failure> {
    let (lo, hi, n) = parse_schedule(spec)?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || n < 2 {
        return Err(usage(format!(
            "position grid must satisfy lo < hi with n >= 2, got `{spec}`"
        )));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|i| lo + step * i as f64).collect())
}

fn parse_window(spec: &str) -> Result<(f64, f64), Failure> {
    let (lo, hi) = spec
        .split_once(',')
        .ok_or_else(|| usage(format!("window must be lo,hi, got `{spec}`")))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| usage(format!("window bound `{lo}` is not a number")))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| usage(format!("window bound `{hi}` is not a number")))?;
    Ok((lo, hi))
}

fn cmd_observe(args: &ObserveArgs) -> Result<(), Failure> {
    let packet = parse_packet(&args.packet)?;
    let interval = parse_interval(&args.interval)?;
    let times = parse_times(&args.times)?;
    let series = observables::observable_series(&packet, &times, &interval)?;
    let mut out = config_block(&[
        ("command", "observe".to_string()),
        ("packet", args.packet.clone()),
        ("interval", args.interval.clone()),
        ("times", args.times.clone()),
    ]);
    out.push_str("T,S,P\n");
    for i in 0..series.times.len() {
        writeln!(
            out,
            "{},{},{}",
            sig(series.times[i]),
            sig(series.survival[i]),
            sig(series.nonescape[i])
        )
        .unwrap();
    }
    let path = write_out(&args.outdir, "observe.csv", &out)?;
    println!("wrote {} ({} rows)", path.display(), series.times.len());
    Ok(())
}

fn cmd_asymptote(args: &AsymptoteArgs) -> Result<(), Failure> {
    let packet = parse_packet(&args.packet)?;
    let interval = parse_interval(&args.interval)?;
    let times = parse_times(&args.times)?;
    let profile = asymptotics::asymptotic_profile(&packet, &interval)?;
    let xi0 = profile.xi0.map(sig).unwrap_or_else(|| "none".to_string());
    let mut out = config_block(&[
        ("command", "asymptote".to_string()),
        ("packet", args.packet.clone()),
        ("interval", args.interval.clone()),
        ("times", args.times.clone()),
        ("m", profile.m.to_string()),
        ("m_bar", profile.m_bar.to_string()),
        (
            "deriv_at_zero",
            sig_c(profile.deriv_table().value(profile.m)),
        ),
        ("xi0", xi0),
        ("s_coefficient", sig(profile.s_coefficient)),
        ("p_coefficient", sig(profile.p_coefficient)),
    ]);
    out.push_str("T,S_lead,P_lead\n");
    for &t in &times {
        writeln!(
            out,
            "{},{},{}",
            sig(t),
            sig(asymptotics::leading_survival(&profile, t)?),
            sig(asymptotics::leading_nonescape(&profile, t)?)
        )
        .unwrap();
    }
    let path = write_out(&args.outdir, "asymptote.csv", &out)?;
    println!("wrote {} ({} rows)", path.display(), times.len());
    Ok(())
}

fn cmd_field(args: &FieldArgs) -> Result<(), Failure> {
    let packet = parse_packet(&args.packet)?;
    let times = parse_times(&args.times)?;
    let xs = parse_xgrid(&args.xgrid)?;
    for (i, &reduced) in times.iter().enumerate() {
        let t = packet.default_units().physical_time(reduced);
        let field = match &packet {
            WavePacket::Family(p) => propagator::evolve_family(p, t, &xs),
            WavePacket::Grid(g) => propagator::evolve_grid(g, t, &xs)?,
        };
        let mut out = config_block(&[
            ("command", "field".to_string()),
            ("packet", args.packet.clone()),
            ("xgrid", args.xgrid.clone()),
            ("reduced_time", sig(reduced)),
        ]);
        out.push_str("x,re,im,abs2\n");
        for (x, value) in field.x_grid.iter().zip(&field.values) {
            writeln!(
                out,
                "{},{},{},{}",
                sig(*x),
                sig(value.re),
                sig(value.im),
                sig(value.norm_sqr())
            )
            .unwrap();
        }
        write_out(&args.outdir, &format!("field_{i:03}.csv"), &out)?;
    }
    println!(
        "wrote {} field files to {}",
        times.len(),
        args.outdir.display()
    );
    Ok(())
}

fn read_csv_columns(
    path: &Path,
    time_column: &str,
    value_column: &str,
) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| usage(format!("{} holds no data", path.display())))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let t_idx = names
        .iter()
        .position(|n| *n == time_column)
        .ok_or_else(|| {
            usage(format!(
                "column `{time_column}` not found in {} (have: {})",
                path.display(),
                names.join(", ")
            ))
        })?;
    let v_idx = names
        .iter()
        .position(|n| *n == value_column)
        .ok_or_else(|| {
            usage(format!(
                "column `{value_column}` not found in {} (have: {})",
                path.display(),
                names.join(", ")
            ))
        })?;
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != names.len() {
            return Err(usage(format!(
                "{} row {}: {} fields, header has {}",
                path.display(),
                row + 1,
                fields.len(),
                names.len()
            )));
        }
        let parse = |field: &str| -> Result<f64, Failure> {
            field.parse::<f64>().map_err(|_| {
                usage(format!(
                    "{} row {}: `{field}` is not a number",
                    path.display(),
                    row + 1
                ))
            })
        };
        ts.push(parse(fields[t_idx])?);
        vs.push(parse(fields[v_idx])?);
    }
    Ok((ts, vs))
}

fn cmd_fit(args: &FitArgs) -> Result<(), Failure> {
    let (ts, vs) = read_csv_columns(&args.input, &args.time_column, &args.column)?;
    let window = parse_window(&args.window)?;
    let fit = analysis::fit_power_law(&ts, &vs, window)?;
    println!(
        "fit of column {} from {}",
        args.column,
        args.input.display()
    );
    println!(
        "  window [{}, {}] keeps {} points",
        sig(fit.window.0),
        sig(fit.window.1),
        fit.n_points
    );
    println!("  exponent:  {}", sig(fit.exponent));
    println!("  amplitude: {}", sig(fit.amplitude));
    println!("  rms residual (log10): {}", sig(fit.rms_residual));
    let mut out = config_block(&[
        ("command", "fit".to_string()),
        ("input", args.input.display().to_string()),
        ("column", args.column.clone()),
        ("window", args.window.clone()),
    ]);
    out.push_str("column,window_lo,window_hi,n_points,exponent,amplitude,rms_residual\n");
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        args.column,
        sig(fit.window.0),
        sig(fit.window.1),
        fit.n_points,
        sig(fit.exponent),
        sig(fit.amplitude),
        sig(fit.rms_residual)
    )
    .unwrap();
    write_out(&args.outdir, "fit.csv", &out)?;
    if let Some(expect) = args.expect {
        let deviation = (fit.exponent - expect).abs();
        if deviation > args.tolerance {
            return Err(Failure::Check(format!(
                "fitted exponent {} deviates from {expect} by {deviation:.3e} (tolerance {})",
                sig(fit.exponent),
                args.tolerance
            )));
        }
        println!("PASS: exponent within {} of {expect}", args.tolerance);
    }
    Ok(())
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<(), Failure> {
    let preset = args.figure.preset();
    let packet_spec = format!("family:m={},a0=1,k0=0,x0=0", preset.order);
    let interval_spec = "-2,2".to_string();
    let times_spec = "log:0.1,1000,80".to_string();
    let packet = parse_packet(&packet_spec)?;
    let interval = parse_interval(&interval_spec)?;
    let times = parse_times(&times_spec)?;
    let series = observables::observable_series(&packet, &times, &interval)?;
    let report = analysis::compare_series(&packet, &series)?;
    let config = [
        ("command", "reproduce".to_string()),
        ("figure", preset.name.to_string()),
        ("packet", packet_spec.clone()),
        ("interval", interval_spec.clone()),
        ("times", times_spec.clone()),
    ];

    let mut observed = config_block(&config);
    observed.push_str("T,S,P\n");
    for i in 0..series.times.len() {
        writeln!(
            observed,
            "{},{},{}",
            sig(series.times[i]),
            sig(series.survival[i]),
            sig(series.nonescape[i])
        )
        .unwrap();
    }
    write_out(
        &args.outdir,
        &format!("{}_observed.csv", preset.name),
        &observed,
    )?;

    let mut asymptote = config_block(&config);
    asymptote.push_str("T,S_lead,P_lead\n");
    for &t in &series.times {
        writeln!(
            asymptote,
            "{},{},{}",
            sig(t),
            sig(asymptotics::leading_survival(&report.profile, t)?),
            sig(asymptotics::leading_nonescape(&report.profile, t)?)
        )
        .unwrap();
    }
    write_out(
        &args.outdir,
        &format!("{}_asymptote.csv", preset.name),
        &asymptote,
    )?;

    let mut summary = config_block(&config);
    summary.push_str(
        "figure,m,m_bar,predicted_exponent_s,fitted_exponent_s,predicted_exponent_p,\
         fitted_exponent_p,coefficient_ratio_s,coefficient_ratio_p,rms_residual_s,\
         rms_residual_p,window_lo,window_hi,n_points\n",
    );
    writeln!(
        summary,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        preset.name,
        report.profile.m,
        report.profile.m_bar,
        sig(report.predicted_exponent_s),
        sig(report.fitted_s.exponent),
        sig(report.predicted_exponent_p),
        sig(report.fitted_p.exponent),
        sig(report.coefficient_ratio_s),
        sig(report.coefficient_ratio_p),
        sig(report.fitted_s.rms_residual),
        sig(report.fitted_p.rms_residual),
        sig(report.fitted_s.window.0),
        sig(report.fitted_s.window.1),
        report.fitted_s.n_points
    )
    .unwrap();
    write_out(
        &args.outdir,
        &format!("{}_report.csv", preset.name),
        &summary,
    )?;

    println!(
        "reproduce {}: family order m = {} on [-2, 2]",
        preset.name, preset.order
    );
    println!(
        "  survival:  fitted exponent {:.4} (predicted {}), coefficient ratio {:.4}",
        report.fitted_s.exponent, report.predicted_exponent_s, report.coefficient_ratio_s
    );
    println!(
        "  nonescape: fitted exponent {:.4} (predicted {}), coefficient ratio {:.4}",
        report.fitted_p.exponent, report.predicted_exponent_p, report.coefficient_ratio_p
    );
    println!(
        "  fit window [{}, {}] with {} points",
        report.fitted_s.window.0, report.fitted_s.window.1, report.fitted_s.n_points
    );

    let dev_s = (report.fitted_s.exponent - preset.expect_s).abs();
    let dev_p = (report.fitted_p.exponent - preset.expect_p).abs();
    if dev_s > preset.tol_s || dev_p > preset.tol_p {
        return Err(Failure::Check(format!(
            "{}: fitted exponents ({:.4}, {:.4}) miss ({}, {}) beyond tolerance ({}, {})",
            preset.name,
            report.fitted_s.exponent,
            report.fitted_p.exponent,
            preset.expect_s,
            preset.expect_p,
            preset.tol_s,
            preset.tol_p
        )));
    }
    println!(
        "PASS: both exponents within tolerance ({}, {})",
        preset.tol_s, preset.tol_p
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_spec_round_trips() {
        let packet = parse_packet("family:m=2,a0=1.5,k0=-0.3,x0=0.25").expect("parses");
        match packet {
            WavePacket::Family(p) => {
                assert_eq!(p.order(), 2);
                assert!((p.width() - 1.5).abs() < 1e-15);
                assert!((p.momentum_center() + 0.3).abs() < 1e-15);
                assert!((p.position_center() - 0.25).abs() < 1e-15);
            }
            WavePacket::Grid(_) => panic!("expected family packet"),
        }
    }

    #[test]
    fn malformed_specs_name_the_problem() {
        let missing = parse_packet("family:m=0,a0=1,k0=0").unwrap_err();
        assert!(missing.message().contains("x0"), "{}", missing.message());
        let unknown = parse_packet("family:m=0,a0=1,k0=0,x0=0,q=1").unwrap_err();
        assert!(unknown.message().contains('q'), "{}", unknown.message());
        let prefix = parse_packet("plane:m=0").unwrap_err();
        assert!(prefix.code() == 2);
    }

    #[test]
    fn schedules_parse_and_validate() {
        let log = parse_times("log:0.1,1000,5").expect("log schedule");
        assert_eq!(log.len(), 5);
        assert!((log[0] - 0.1).abs() < 1e-12 && (log[4] - 1000.0).abs() < 1e-9);
        let lin = parse_times("lin:0,2,5").expect("lin schedule");
        assert_eq!(lin, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let list = parse_times("list:0.5,1,7").expect("list schedule");
        assert_eq!(list, vec![0.5, 1.0, 7.0]);
        assert_eq!(parse_times("list:-1,2").unwrap_err().code(), 2);
        assert_eq!(parse_times("list:2,1").unwrap_err().code(), 2);
        assert_eq!(parse_times("every:1,2,3").unwrap_err().code(), 2);
    }

    #[test]
    fn intervals_and_windows_parse() {
        let i = parse_interval("-2,2").expect("interval");
        assert_eq!((i.a(), i.b()), (-2.0, 2.0));
        assert_eq!(parse_interval("2,-2").unwrap_err().code(), 2);
        assert_eq!(parse_window("10,100").expect("window"), (10.0, 100.0));
        let xs = parse_xgrid("-1,1,5").expect("xgrid");
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn significant_digit_format_is_stable() {
        assert_eq!(sig(1.0), "1.00000000000e0");
        assert_eq!(sig(-0.25), "-2.50000000000e-1");
        assert_eq!(
            sig_c(C64::new(0.5, -2.0)),
            "5.00000000000e-1-2.00000000000e0i"
        );
    }
}

//! Command-line interface.
//!
//! Five subcommands cover the library surface: `chart` traces the tuning
//! curve families, `tune` solves one controller for one plant, `table1`
//! reproduces the reference tuning table with per-cell deviations,
//! `simulate` samples a closed-loop response, and `margins` reports the
//! stability quantities for given gains.
//!
//! Output is CSV by default (`--format svg` renders a small standalone
//! chart for `chart` and `simulate`); every float is printed with nine
//! significant digits so repeated runs are byte-identical. Results go to
//! stdout or to `--out PATH`. Exit codes: 0 success, 1 I/O failure,
//! 2 invalid usage or arguments, 3 infeasible request (or `table1
//! --strict` with out-of-tolerance cells), 4 numerical failure.

use crate::error::{Error, Result};
use crate::indices::SampledTrace;
use crate::model::ControllerGains;
use crate::proposed::proposed_response;
use crate::smith::sp_response;
use crate::stability::{hi_stability_bounds, phase_margin, stabilizable_h_sup, ultimate_gain};
use crate::steps::pi_step_response;
use crate::tuning::{
    curve_set, reproduce_table1, trace_curve, tune_pi, tune_proposed, tune_sp, ChartCurve,
    ControllerKind, TunedPoint, TuningPresets,
};
use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

/// Parses the arguments, runs one command, and returns the process exit
/// code. The first argument is the program name, as in `std::env::args_os`.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { 0 } else { 2 };
        }
    };
    init_thread_pool();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("delayloop: {e}");
            exit_code(&e)
        }
    }
}

/// Builds the global rayon pool once, honoring `DELAYLOOP_THREADS`.
/// An unusable value or an already-built pool falls back silently.
fn init_thread_pool() {
    static INIT: OnceLock<()> = OnceLock::new();
    INIT.get_or_init(|| {
        if let Some(n) = std::env::var("DELAYLOOP_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n >= 1)
        {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    });
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 1,
        Error::InvalidPlant(_)
        | Error::InvalidGains(_)
        | Error::InvalidInput(_)
        | Error::OutOfRange { .. } => 2,
        Error::Infeasible(_)
        | Error::NoStableIntegralGain { .. }
        | Error::Overdamped { .. } => 3,
        Error::UnsupportedTimeConstant { .. }
        | Error::IllConditioned { .. }
        | Error::Diverged { .. } => 4,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "delayloop",
    version,
    about = "Tuning and simulation for first-order loops with transport delay"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trace the tuning-chart curve families for one controller.
    Chart(ChartArgs),
    /// Tune one controller for a normalized plant.
    Tune(TuneArgs),
    /// Reproduce the reference tuning table with per-cell deviations.
    Table1(Table1Args),
    /// Sample the closed-loop response to the settled-to-zero step.
    Simulate(SimulateArgs),
    /// Report stability bounds and the phase margin for given gains.
    Margins(MarginsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ControllerArg {
    /// Proportional-integral controller.
    Pi,
    /// Smith-predictor compensated controller.
    Sp,
    /// Two-mode variable-structure controller.
    Proposed,
}

impl From<ControllerArg> for ControllerKind {
    fn from(value: ControllerArg) -> Self {
        match value {
            ControllerArg::Pi => ControllerKind::Pi,
            ControllerArg::Sp => ControllerKind::SmithPredictor,
            ControllerArg::Proposed => ControllerKind::Proposed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    /// Comma-separated values.
    Csv,
    /// Standalone vector image.
    Svg,
}

#[derive(Debug, clap::Args)]
struct PresetArgs {
    /// Response-overshoot target.
    #[arg(long = "poy", default_value_t = 0.0105)]
    po_y: f64,
    /// Output-overshoot bound.
    #[arg(long = "pov", default_value_t = 0.10)]
    po_v: f64,
    /// Switching band of the two-mode controller.
    #[arg(long = "bs", default_value_t = 0.02)]
    b_s: f64,
    /// Index horizon in delay units.
    #[arg(long = "ts", default_value_t = 7.0)]
    t_s: f64,
}

impl PresetArgs {
    fn presets(&self) -> TuningPresets {
        TuningPresets { po_y: self.po_y, po_v: self.po_v, b_s: self.b_s, t_s: self.t_s }
    }
}

#[derive(Debug, clap::Args)]
struct ChartArgs {
    /// Controller whose chart to trace.
    #[arg(long, value_enum)]
    controller: ControllerArg,
    /// Plant time constant (PI chart only; the other charts are
    /// time-constant free).
    #[arg(long = "tp", default_value_t = 1.0)]
    t_p: f64,
    /// Number of sweep points per curve.
    #[arg(long, default_value_t = 25)]
    grid: usize,
    #[command(flatten)]
    presets: PresetArgs,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct TuneArgs {
    /// Controller to tune.
    #[arg(long, value_enum)]
    controller: ControllerArg,
    /// Plant time constant.
    #[arg(long = "tp")]
    t_p: f64,
    #[command(flatten)]
    presets: PresetArgs,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct Table1Args {
    /// Exit nonzero when any cell misses its acceptance tolerance.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    presets: PresetArgs,
    /// Output format (the table is CSV-only).
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    /// Controller to simulate.
    #[arg(long, value_enum)]
    controller: ControllerArg,
    /// Plant time constant.
    #[arg(long = "tp")]
    t_p: f64,
    /// Proportional gain (PI and predictor loops).
    #[arg(long = "h")]
    h: Option<f64>,
    /// Integral gain.
    #[arg(long = "hi")]
    h_i: f64,
    /// Switching band (two-mode controller only).
    #[arg(long = "bs", default_value_t = 0.02)]
    b_s: f64,
    /// Simulation horizon in delay units.
    #[arg(long = "ts", default_value_t = 7.0)]
    t_s: f64,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct MarginsArgs {
    /// Plant time constant.
    #[arg(long = "tp")]
    t_p: f64,
    /// Proportional gain.
    #[arg(long = "h", default_value_t = 0.0)]
    h: f64,
    /// Integral gain.
    #[arg(long = "hi", default_value_t = 0.0)]
    h_i: f64,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Chart(a) => {
            let text = chart_output(&a)?;
            emit(a.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Tune(a) => {
            let text = tune_output(&a)?;
            emit(a.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Table1(a) => {
            if a.format == OutputFormat::Svg {
                return Err(Error::InvalidInput(
                    "the table is CSV-only; drop --format svg".into(),
                ));
            }
            let (text, all_ok) = table1_output(&a.presets.presets())?;
            emit(a.out.as_deref(), &text)?;
            if a.strict && !all_ok {
                eprintln!("delayloop: at least one table cell misses its acceptance tolerance");
                return Ok(3);
            }
            Ok(0)
        }
        Command::Simulate(a) => {
            let text = simulate_output(&a)?;
            emit(a.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Margins(a) => {
            let text = margins_output(&a)?;
            emit(a.out.as_deref(), &text)?;
            Ok(0)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Nine-significant-digit float formatting (stable CSV output).
// ---------------------------------------------------------------------------

fn trim_decimal(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Formats a float with nine significant digits, trimming trailing zeros;
/// magnitudes outside a moderate window switch to scientific notation.
fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exponent) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exponent.parse().expect("exponent digits");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_decimal(format!("{x:.decimals$}"))
    } else {
        let mantissa = trim_decimal(mantissa.to_string());
        format!("{mantissa}e{exp}")
    }
}

// ---------------------------------------------------------------------------
// Subcommand bodies.
// ---------------------------------------------------------------------------

fn chart_output(a: &ChartArgs) -> Result<String> {
    let presets = a.presets.presets();
    let controller: ControllerKind = a.controller.into();
    let curves: Vec<ChartCurve> = curve_set(controller)
        .iter()
        .map(|&kind| trace_curve(controller, kind, a.t_p, &presets, a.grid))
        .collect::<Result<_>>()?;
    match a.format {
        OutputFormat::Csv => {
            let mut s = String::from("curve,x,y\n");
            for curve in &curves {
                for &(x, y) in &curve.points {
                    s.push_str(curve.kind.label());
                    s.push(',');
                    s.push_str(&fmt_sig(x));
                    s.push(',');
                    s.push_str(&fmt_sig(y));
                    s.push('\n');
                }
            }
            Ok(s)
        }
        OutputFormat::Svg => {
            let (title, x_label, y_label) = match controller {
                ControllerKind::Pi => ("PI tuning chart", "h", "h_i"),
                ControllerKind::SmithPredictor => {
                    ("predictor tuning chart", "h", "h_i*t_p")
                }
                ControllerKind::Proposed => ("two-mode tuning chart", "t_p", "h_i"),
            };
            let series: Vec<(String, Vec<(f64, f64)>)> = curves
                .iter()
                .map(|c| (c.kind.label().to_string(), c.points.clone()))
                .collect();
            Ok(svg_document(title, x_label, y_label, &series))
        }
    }
}

fn tune_output(a: &TuneArgs) -> Result<String> {
    let presets = a.presets.presets();
    let tuned: TunedPoint = match a.controller {
        ControllerArg::Pi => tune_pi(a.t_p, &presets)?,
        ControllerArg::Sp => tune_sp(a.t_p, &presets)?,
        ControllerArg::Proposed => tune_proposed(a.t_p, &presets)?,
    };
    let mut s = String::from("quantity,value\n");
    s.push_str(&format!("h,{}\n", fmt_sig(tuned.h)));
    s.push_str(&format!("h_i,{}\n", fmt_sig(tuned.h_i)));
    s.push_str(&format!("po_y,{}\n", fmt_sig(tuned.indices.po_y)));
    s.push_str(&format!("po_v,{}\n", fmt_sig(tuned.indices.po_v)));
    if let Some(po_b) = tuned.indices.po_b {
        s.push_str(&format!("po_b,{}\n", fmt_sig(po_b)));
    }
    s.push_str(&format!("ise,{}\n", fmt_sig(tuned.indices.ise)));
    Ok(s)
}

fn table1_output(presets: &TuningPresets) -> Result<(String, bool)> {
    let rows = reproduce_table1(presets)?;
    let mut s = String::from(
        "t_p,pi_h,pi_h_dev,pi_hi,pi_hi_dev,pi_ise,pi_ise_dev,\
         sp_h,sp_h_dev,sp_hi,sp_hi_dev,sp_ise,sp_ise_dev,\
         prop_hi,prop_hi_dev,prop_ise,prop_ise_dev\n",
    );
    let mut all_ok = true;
    for row in &rows {
        let r = &row.reference;
        all_ok &= row.within_tolerances();
        let cells = [
            r.t_p,
            row.pi.h,
            row.pi.h - r.pi_h,
            row.pi.h_i,
            row.pi.h_i - r.pi_h_i,
            row.pi_ise_at_reference,
            row.pi_ise_at_reference - r.pi_ise,
            row.sp.h,
            row.sp.h - r.sp_h,
            row.sp.h_i,
            row.sp.h_i - r.sp_h_i,
            row.sp_ise_at_tuned,
            row.sp_ise_at_tuned - r.sp_ise,
            row.proposed.h_i,
            row.proposed.h_i - r.proposed_h_i,
            row.proposed_ise_at_reference,
            row.proposed_ise_at_reference - r.proposed_ise,
        ];
        let line: Vec<String> = cells.iter().map(|&v| fmt_sig(v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    Ok((s, all_ok))
}

fn sample_rows(
    y_at: impl Fn(f64) -> Result<f64>,
    v_at: impl Fn(f64) -> Result<f64>,
    t_s: f64,
) -> Result<Vec<(f64, f64, f64)>> {
    if !t_s.is_finite() || t_s <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "the horizon must be positive, got {t_s}"
        )));
    }
    let n = SampledTrace::standard_count(t_s);
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        let t = t_s * k as f64 / (n - 1) as f64;
        rows.push((t, y_at(t)?, v_at(t)?));
    }
    Ok(rows)
}

fn simulate_output(a: &SimulateArgs) -> Result<String> {
    let require_h = || {
        a.h.ok_or_else(|| {
            Error::InvalidGains("this controller needs a proportional gain; pass --h".into())
        })
    };
    let rows = match a.controller {
        ControllerArg::Pi => {
            let gains = ControllerGains::new(require_h()?, a.h_i)?;
            let resp = pi_step_response(a.t_p, gains, a.t_s + 1.0)?;
            sample_rows(|t| resp.eval(t), |t| resp.control_output(t), a.t_s)?
        }
        ControllerArg::Sp => {
            let gains = ControllerGains::new(require_h()?, a.h_i)?;
            let resp = sp_response(gains, a.t_p)?;
            sample_rows(|t| resp.eval(t), |t| resp.control_output(t), a.t_s)?
        }
        ControllerArg::Proposed => {
            if a.h.is_some_and(|h| h != 0.0) {
                return Err(Error::InvalidGains(
                    "the two-mode controller has no proportional gain; omit --h".into(),
                ));
            }
            let resp = proposed_response(a.t_p, a.h_i, a.b_s, a.t_s)?;
            sample_rows(|t| resp.eval(t), |t| resp.control_output(t), a.t_s)?
        }
    };
    match a.format {
        OutputFormat::Csv => {
            let mut s = String::from("t,y,v\n");
            for &(t, y, v) in &rows {
                s.push_str(&fmt_sig(t));
                s.push(',');
                s.push_str(&fmt_sig(y));
                s.push(',');
                s.push_str(&fmt_sig(v));
                s.push('\n');
            }
            Ok(s)
        }
        OutputFormat::Svg => {
            let y_series: Vec<(f64, f64)> = rows.iter().map(|&(t, y, _)| (t, y)).collect();
            let v_series: Vec<(f64, f64)> = rows.iter().map(|&(t, _, v)| (t, v)).collect();
            Ok(svg_document(
                "closed-loop step response",
                "t",
                "y, v",
                &[("y".to_string(), y_series), ("v".to_string(), v_series)],
            ))
        }
    }
}

fn margins_output(a: &MarginsArgs) -> Result<String> {
    let mut s = String::from("quantity,value\n");
    let (z_a, h_u) = ultimate_gain(a.t_p)?;
    s.push_str(&format!("z_a,{}\n", fmt_sig(z_a)));
    s.push_str(&format!("h_ultimate,{}\n", fmt_sig(h_u)));
    s.push_str(&format!(
        "h_stabilizable_sup,{}\n",
        fmt_sig(stabilizable_h_sup(a.t_p)?)
    ));
    let bounds = hi_stability_bounds(a.h, a.t_p)?;
    s.push_str(&format!("z_1,{}\n", fmt_sig(bounds.z1)));
    s.push_str(&format!("z_2,{}\n", fmt_sig(bounds.z2)));
    s.push_str(&format!("h_i_max,{}\n", fmt_sig(bounds.h_i_max)));
    if a.h_i > 0.0 {
        let margin = phase_margin(&ControllerGains::new(a.h, a.h_i)?, a.t_p)?;
        s.push_str(&format!("z_crossover,{}\n", fmt_sig(margin.z_b)));
        s.push_str(&format!("phase_margin_rad,{}\n", fmt_sig(margin.pm)));
        s.push_str(&format!(
            "phase_margin_deg,{}\n",
            fmt_sig(margin.pm.to_degrees())
        ));
    }
    Ok(s)
}

// ---------------------------------------------------------------------------
// Minimal standalone SVG rendering.
// ---------------------------------------------------------------------------

const SVG_WIDTH: f64 = 760.0;
const SVG_HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn svg_document(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
) -> String {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, points) in series {
        for &(x, y) in points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if !x_min.is_finite() {
        (x_min, x_max, y_min, y_max) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |lo: &mut f64, hi: &mut f64| {
        let span = *hi - *lo;
        if span <= 0.0 {
            *lo -= 0.5;
            *hi += 0.5;
        } else {
            *lo -= 0.05 * span;
            *hi += 0.05 * span;
        }
    };
    pad(&mut x_min, &mut x_max);
    pad(&mut y_min, &mut y_max);

    let plot_w = SVG_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = SVG_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| SVG_HEIGHT - MARGIN_BOTTOM - (y - y_min) / (y_max - y_min) * plot_h;

    let mut s = String::with_capacity(16 * 1024);
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" \
         viewBox=\"0 0 {SVG_WIDTH} {SVG_HEIGHT}\" font-family=\"sans-serif\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        SVG_WIDTH / 2.0
    ));

    // Axes.
    let x0 = MARGIN_LEFT;
    let x1 = SVG_WIDTH - MARGIN_RIGHT;
    let y0 = SVG_HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    s.push_str(&format!(
        "<line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x1:.1}\" y2=\"{y0:.1}\" stroke=\"#333333\"/>\n"
    ));
    s.push_str(&format!(
        "<line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x0:.1}\" y2=\"{y1:.1}\" stroke=\"#333333\"/>\n"
    ));

    // Ticks and labels.
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x_min + f * (x_max - x_min);
        let xp = sx(xv);
        s.push_str(&format!(
            "<line x1=\"{xp:.1}\" y1=\"{y0:.1}\" x2=\"{xp:.1}\" y2=\"{:.1}\" stroke=\"#333333\"/>\n",
            y0 + 5.0
        ));
        s.push_str(&format!(
            "<text x=\"{xp:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
            y0 + 18.0,
            fmt_tick(xv)
        ));
        let yv = y_min + f * (y_max - y_min);
        let yp = sy(yv);
        s.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{yp:.1}\" x2=\"{x0:.1}\" y2=\"{yp:.1}\" stroke=\"#333333\"/>\n",
            x0 - 5.0
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
            x0 - 8.0,
            yp + 4.0,
            fmt_tick(yv)
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\">{x_label}</text>\n",
        (x0 + x1) / 2.0,
        SVG_HEIGHT - 12.0
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\" \
         transform=\"rotate(-90 16 {:.1})\">{y_label}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    ));

    // Curves.
    for (i, (_, points)) in series.iter().enumerate() {
        if points.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> =
            points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            coords.join(" ")
        ));
    }

    // Legend.
    for (i, (label, _)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let ly = MARGIN_TOP + 14.0 + 16.0 * i as f64;
        s.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n",
            x1 - 120.0,
            ly - 4.0,
            x1 - 96.0,
            ly - 4.0
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{ly:.1}\" font-size=\"12\">{label}</text>\n",
            x1 - 90.0
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if !(1e-3..1e4).contains(&a) {
        return format!("{x:.2e}");
    }
    trim_decimal(format!("{x:.3}"))
}

//! Command-line front end: `fidelity`, `simulate`, `sweep`, `optimize` and
//! `verify`.
//!
//! Exit codes: 0 on success, 1 on invalid input or I/O failure, 2 when the
//! verification suite reports a failing property.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use teleclone_core::analysis::{
    maximize_fidelity, sweep_markers, sweep_x0, DEFAULT_POINTS, DEFAULT_RESTARTS, DEFAULT_SEED,
};
use teleclone_core::cloning::{econ_fidelity_analytic, opt_fidelity_analytic, PhaseVector};
use teleclone_core::qudit::QuditDim;
use teleclone_core::telecloning::{
    channel_entropy, fidelity_analytic, optimal_amplitudes, run_protocol, BellOutcome, ChannelAmplitudes,
};
use teleclone_core::verify::{run_verify, VerifyConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PROPERTY_FAILURE: i32 = 2;

/// Largest d accepted by `simulate` (dense d⁴ amplitudes).
const MAX_SIMULATE_D: usize = 32;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] teleclone_core::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "teleclone", version, about = "Ancilla-free phase-covariant telecloning of qudits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Output {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ChannelArgs {
    /// `uniform`, `optimal`, or `custom:<x0>,<x1>,...`
    #[arg(long, default_value = "optimal")]
    pub channel: ChannelSpec,
    /// Rescale a custom channel onto the unit sphere instead of rejecting it.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form fidelities for one dimension and channel.
    Fidelity {
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Simulate every Bell outcome of the protocol.
    Simulate {
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Comma-separated phases in radians, or `random:<seed>`; zeros when omitted.
        #[arg(long)]
        theta: Option<ThetaSpec>,
        /// Additionally sample this many outcomes (demonstration only).
        #[arg(long)]
        shots: Option<usize>,
        /// Seed for `--shots`.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Entropy and fidelity along the symmetric channel family.
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2, 3, 5, 9])]
        d: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Numerically maximize the telecloned fidelity.
    Optimize {
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Run the property suite for d = 2..=max-d.
    Verify {
        #[arg(long, default_value_t = 6)]
        max_d: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Report file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Uniform,
    Optimal,
    Custom(Vec<f64>),
}

impl FromStr for ChannelSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "optimal" => Ok(Self::Optimal),
            _ => match s.strip_prefix("custom:") {
                Some(list) => parse_list(list).map(Self::Custom),
                None => Err(format!("unknown channel `{s}` (expected uniform, optimal or custom:<list>)")),
            },
        }
    }
}

impl ChannelSpec {
    fn label(&self) -> String {
        match self {
            Self::Uniform => "uniform".into(),
            Self::Optimal => "optimal".into(),
            Self::Custom(_) => "custom".into(),
        }
    }

    fn resolve(&self, d: QuditDim, normalize: bool) -> Result<ChannelAmplitudes> {
        match self {
            Self::Uniform => Ok(ChannelAmplitudes::uniform(d)),
            Self::Optimal => Ok(optimal_amplitudes(d)),
            Self::Custom(x) => {
                if x.len() != d.get() {
                    return Err(CliError::Invalid(format!(
                        "custom channel has {} amplitudes but d = {d}",
                        x.len()
                    )));
                }
                let x = x.clone();
                Ok(if normalize {
                    ChannelAmplitudes::normalize(x)?
                } else {
                    ChannelAmplitudes::new(x)?
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaSpec {
    Literal(Vec<f64>),
    Random(u64),
}

impl FromStr for ThetaSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.strip_prefix("random:") {
            Some(seed) => seed
                .trim()
                .parse()
                .map(Self::Random)
                .map_err(|e| format!("bad theta seed `{seed}`: {e}")),
            None => parse_list(s).map(Self::Literal),
        }
    }
}

impl ThetaSpec {
    fn resolve(&self, d: QuditDim) -> Result<PhaseVector> {
        match self {
            Self::Literal(t) => {
                if t.len() != d.get() {
                    return Err(CliError::Invalid(format!("theta has {} entries but d = {d}", t.len())));
                }
                Ok(PhaseVector::new(t.clone())?)
            }
            Self::Random(seed) => Ok(PhaseVector::random(d, &mut ChaCha8Rng::seed_from_u64(*seed))),
        }
    }

    fn label(&self) -> String {
        match self {
            Self::Literal(_) => "literal".into(),
            Self::Random(seed) => format!("random:{seed}"),
        }
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number `{v}`: {e}"))
                .and_then(|x| if x.is_finite() { Ok(x) } else { Err(format!("non-finite number `{v}`")) })
        })
        .collect()
}

/// Full double precision: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(";")
}

fn dim(d: usize) -> Result<QuditDim> {
    Ok(QuditDim::new(d)?)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct FidelityReport {
    d: usize,
    channel: String,
    x: Vec<f64>,
    f_econ: f64,
    f_opt: f64,
    f_telecloned: f64,
    channel_entropy_bits: f64,
}

fn cmd_fidelity(d: usize, channel: &ChannelArgs, format: Format) -> Result<String> {
    let d = dim(d)?;
    let x = channel.channel.resolve(d, channel.normalize)?;
    let r = FidelityReport {
        d: d.get(),
        channel: channel.channel.label(),
        x: x.as_slice().to_vec(),
        f_econ: econ_fidelity_analytic(d),
        f_opt: opt_fidelity_analytic(d),
        f_telecloned: fidelity_analytic(&x),
        channel_entropy_bits: channel_entropy(&x),
    };
    Ok(match format {
        Format::Json => to_json(&r),
        Format::Csv => {
            let mut s = String::new();
            let _ = writeln!(s, "# teleclone {VERSION} fidelity");
            let _ = writeln!(s, "# channel={} x={}", r.channel, fmt_list(&r.x));
            let _ = writeln!(s, "d,f_econ,f_opt,f_telecloned,channel_entropy_bits");
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.d,
                fmt_f64(r.f_econ),
                fmt_f64(r.f_opt),
                fmt_f64(r.f_telecloned),
                fmt_f64(r.channel_entropy_bits)
            );
            s
        }
    })
}

#[derive(Serialize)]
struct OutcomeRow {
    l: usize,
    k: usize,
    probability: f64,
    fidelity_b: f64,
    fidelity_c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<usize>,
}

#[derive(Serialize)]
struct SimulateReport {
    d: usize,
    channel: String,
    x: Vec<f64>,
    theta_source: String,
    theta: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample_seed: Option<u64>,
    outcomes: Vec<OutcomeRow>,
    mean_fidelity: f64,
    fidelity_analytic: f64,
    max_deviation: f64,
}

fn cmd_simulate(
    d: usize,
    channel: &ChannelArgs,
    theta: Option<&ThetaSpec>,
    shots: Option<usize>,
    seed: u64,
    format: Format,
) -> Result<String> {
    let d = dim(d)?;
    if d.get() > MAX_SIMULATE_D {
        return Err(CliError::Invalid(format!("simulate supports d <= {MAX_SIMULATE_D}, got {d}")));
    }
    let x = channel.channel.resolve(d, channel.normalize)?;
    let (theta, theta_source) = match theta {
        Some(t) => (t.resolve(d)?, t.label()),
        None => (PhaseVector::zeros(d), "zeros".to_string()),
    };
    let run = run_protocol(&theta, &x)?;
    let analytic = fidelity_analytic(&x);

    let counts = shots.map(|n| {
        let sampled = run.sample_outcomes(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut counts = vec![0usize; run.records.len()];
        for o in sampled {
            counts[o.l * d.get() + o.k] += 1;
        }
        counts
    });
    let outcomes = run
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| OutcomeRow {
            l: r.outcome.l,
            k: r.outcome.k,
            probability: r.probability,
            fidelity_b: r.fidelity_b,
            fidelity_c: r.fidelity_c,
            count: counts.as_ref().map(|c| c[i]),
        })
        .collect();
    let report = SimulateReport {
        d: d.get(),
        channel: channel.channel.label(),
        x: x.as_slice().to_vec(),
        theta_source,
        theta: theta.as_slice().to_vec(),
        sample_seed: shots.map(|_| seed),
        outcomes,
        mean_fidelity: run.mean_fidelity,
        fidelity_analytic: analytic,
        max_deviation: run.max_fidelity_deviation(analytic),
    };
    debug_assert_eq!(report.outcomes.len(), BellOutcome::all(d).count());

    Ok(match format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::new();
            let _ = writeln!(s, "# teleclone {VERSION} simulate");
            let _ = writeln!(s, "# d={} channel={} x={}", report.d, report.channel, fmt_list(&report.x));
            let _ = writeln!(s, "# theta_source={} theta={}", report.theta_source, fmt_list(&report.theta));
            if let Some(seed) = report.sample_seed {
                let _ = writeln!(s, "# shots={} sample_seed={seed}", shots.unwrap_or(0));
            }
            let with_counts = counts.is_some();
            let _ = writeln!(
                s,
                "l,k,probability,fidelity_b,fidelity_c{}",
                if with_counts { ",count" } else { "" }
            );
            for r in &report.outcomes {
                let _ = write!(
                    s,
                    "{},{},{},{},{}",
                    r.l,
                    r.k,
                    fmt_f64(r.probability),
                    fmt_f64(r.fidelity_b),
                    fmt_f64(r.fidelity_c)
                );
                if let Some(c) = r.count {
                    let _ = write!(s, ",{c}");
                }
                s.push('\n');
            }
            let _ = writeln!(
                s,
                "# summary mean_fidelity={} fidelity_analytic={} max_deviation={}",
                fmt_f64(report.mean_fidelity),
                fmt_f64(report.fidelity_analytic),
                fmt_f64(report.max_deviation)
            );
            s
        }
    })
}

#[derive(Serialize)]
struct SweepRow {
    x0: f64,
    entropy_bits: f64,
    fidelity: f64,
}

#[derive(Serialize)]
struct SweepCurve {
    d: usize,
    x0_max_entropy: f64,
    x0_max_fidelity: f64,
    points: Vec<SweepRow>,
}

#[derive(Serialize)]
struct SweepReport {
    version: &'static str,
    n_points: usize,
    curves: Vec<SweepCurve>,
}

fn cmd_sweep(ds: &[usize], points: usize, format: Format) -> Result<String> {
    if ds.is_empty() {
        return Err(CliError::Invalid("sweep needs at least one d".into()));
    }
    let mut curves = Vec::with_capacity(ds.len());
    for &d in ds {
        let d = dim(d)?;
        let (s_max, f_max) = sweep_markers(d);
        let pts = sweep_x0(d, points)?;
        curves.push(SweepCurve {
            d: d.get(),
            x0_max_entropy: s_max,
            x0_max_fidelity: f_max,
            points: pts
                .into_iter()
                .map(|p| SweepRow {
                    x0: p.x0,
                    entropy_bits: p.entropy,
                    fidelity: p.fidelity,
                })
                .collect(),
        });
    }
    let report = SweepReport {
        version: VERSION,
        n_points: points,
        curves,
    };
    Ok(match format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::new();
            let _ = writeln!(s, "# teleclone {VERSION} sweep");
            let _ = writeln!(s, "# n_points={}", report.n_points);
            for c in &report.curves {
                let _ = writeln!(
                    s,
                    "# d={} x0_max_entropy={} x0_max_fidelity={}",
                    c.d,
                    fmt_f64(c.x0_max_entropy),
                    fmt_f64(c.x0_max_fidelity)
                );
            }
            let _ = writeln!(s, "d,x0,entropy_bits,fidelity");
            for c in &report.curves {
                for p in &c.points {
                    let _ = writeln!(s, "{},{},{},{}", c.d, fmt_f64(p.x0), fmt_f64(p.entropy_bits), fmt_f64(p.fidelity));
                }
            }
            s
        }
    })
}

#[derive(Serialize)]
struct OptimizeRow {
    d: usize,
    f_star: f64,
    f_opt: f64,
    f_error: f64,
    x_error: f64,
    iterations: usize,
    converged: bool,
    restart: usize,
    x_star: Vec<f64>,
    x_optimal: Vec<f64>,
}

#[derive(Serialize)]
struct OptimizeReport {
    version: &'static str,
    restarts: usize,
    seed: u64,
    results: Vec<OptimizeRow>,
}

fn cmd_optimize(ds: &[usize], restarts: usize, seed: u64, format: Format) -> Result<String> {
    let mut results = Vec::with_capacity(ds.len());
    for &d in ds {
        let d = dim(d)?;
        let r = maximize_fidelity(d, restarts, seed)?;
        let target = optimal_amplitudes(d);
        let x_error = r
            .x_star
            .as_slice()
            .iter()
            .zip(target.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let f_opt = opt_fidelity_analytic(d);
        results.push(OptimizeRow {
            d: d.get(),
            f_star: r.f_star,
            f_opt,
            f_error: (r.f_star - f_opt).abs(),
            x_error,
            iterations: r.iterations,
            converged: r.converged,
            restart: r.restart,
            x_star: r.x_star.as_slice().to_vec(),
            x_optimal: target.as_slice().to_vec(),
        });
    }
    let report = OptimizeReport {
        version: VERSION,
        restarts,
        seed,
        results,
    };
    Ok(match format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::new();
            let _ = writeln!(s, "# teleclone {VERSION} optimize");
            let _ = writeln!(s, "# restarts={} seed={}", report.restarts, report.seed);
            for r in &report.results {
                let _ = writeln!(s, "# d={} x_star={} x_optimal={}", r.d, fmt_list(&r.x_star), fmt_list(&r.x_optimal));
            }
            let _ = writeln!(s, "d,f_star,f_opt,f_error,x_error,iterations,converged,restart");
            for r in &report.results {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    r.d,
                    fmt_f64(r.f_star),
                    fmt_f64(r.f_opt),
                    fmt_f64(r.f_error),
                    fmt_f64(r.x_error),
                    r.iterations,
                    r.converged,
                    r.restart
                );
            }
            s
        }
    })
}

fn write_output(path: Option<&PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

/// Executes a parsed command, returning the process exit code.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Fidelity { d, channel, output } => {
            let text = cmd_fidelity(*d, channel, output.format)?;
            write_output(output.out.as_ref(), &text, stdout)?;
        }
        Command::Simulate {
            d,
            channel,
            theta,
            shots,
            seed,
            output,
        } => {
            let text = cmd_simulate(*d, channel, theta.as_ref(), *shots, *seed, output.format)?;
            write_output(output.out.as_ref(), &text, stdout)?;
        }
        Command::Sweep { d, points, output } => {
            let text = cmd_sweep(d, *points, output.format)?;
            write_output(output.out.as_ref(), &text, stdout)?;
        }
        Command::Optimize {
            d,
            restarts,
            seed,
            output,
        } => {
            let text = cmd_optimize(d, *restarts, *seed, output.format)?;
            write_output(output.out.as_ref(), &text, stdout)?;
        }
        Command::Verify { max_d, seed, out } => {
            let report = run_verify(&VerifyConfig::new(*max_d, *seed)?)?;
            write_output(out.as_ref(), &report.render(), stdout)?;
            if !report.passed() {
                return Ok(EXIT_PROPERTY_FAILURE);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INVALID
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("teleclone").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn csv_rows(text: &str) -> Vec<Vec<String>> {
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn channel_spec_parsing() {
        assert_eq!("uniform".parse::<ChannelSpec>(), Ok(ChannelSpec::Uniform));
        assert_eq!("custom:1,0,0".parse::<ChannelSpec>(), Ok(ChannelSpec::Custom(vec![1.0, 0.0, 0.0])));
        assert!("custom:1,x".parse::<ChannelSpec>().is_err());
        assert!("custom:1,inf".parse::<ChannelSpec>().is_err());
        assert!("bogus".parse::<ChannelSpec>().is_err());
    }

    #[test]
    fn theta_spec_parsing() {
        assert_eq!("random:7".parse::<ThetaSpec>(), Ok(ThetaSpec::Random(7)));
        assert_eq!("0,1.5".parse::<ThetaSpec>(), Ok(ThetaSpec::Literal(vec![0.0, 1.5])));
        assert!("random:x".parse::<ThetaSpec>().is_err());
    }

    #[test]
    fn fidelity_qubit_uniform() {
        let (code, out, _) = run_str(&["fidelity", "--d", "2", "--channel", "uniform"]);
        assert_eq!(code, 0);
        let row = &csv_rows(&out)[0];
        let expect = (4.0 + 2.0 * std::f64::consts::SQRT_2) / 8.0;
        for col in &row[1..4] {
            assert!((col.parse::<f64>().unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_qutrit_optimal_and_custom() {
        let (_, out, _) = run_str(&["fidelity", "--d", "3", "--channel", "optimal"]);
        let row = &csv_rows(&out)[0];
        let f_t: f64 = row[3].parse().unwrap();
        assert!((f_t - (5.0 + 17f64.sqrt()) / 12.0).abs() < 1e-12);
        let (_, out, _) = run_str(&["fidelity", "--d", "3", "--channel", "custom:1,0,0"]);
        let f_t: f64 = csv_rows(&out)[0][3].parse().unwrap();
        assert!((f_t - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn malformed_channels_exit_with_one() {
        for ch in ["custom:1,0", "custom:0.6,0.6,0", "custom:-1,0,0", "custom:a", "nope"] {
            let (code, out, err) = run_str(&["fidelity", "--d", "3", "--channel", ch]);
            assert_eq!(code, EXIT_INVALID, "{ch}");
            assert!(out.is_empty());
            assert!(!err.is_empty());
        }
        let (code, _, _) = run_str(&["fidelity", "--d", "1"]);
        assert_eq!(code, EXIT_INVALID);
    }

    #[test]
    fn normalize_flag_rescales_custom_channel() {
        let (code, out, _) = run_str(&["fidelity", "--d", "2", "--channel", "custom:1,1", "--normalize"]);
        assert_eq!(code, 0);
        let f_t: f64 = csv_rows(&out)[0][3].parse().unwrap();
        assert!((f_t - (4.0 + 2.0 * std::f64::consts::SQRT_2) / 8.0).abs() < 1e-12);
    }

    #[test]
    fn simulate_qubit_uniform() {
        let (code, out, _) = run_str(&["simulate", "--d", "2", "--channel", "uniform", "--theta", "0,0"]);
        assert_eq!(code, 0);
        let rows = csv_rows(&out);
        assert_eq!(rows.len(), 4);
        let expect = (4.0 + 2.0 * std::f64::consts::SQRT_2) / 8.0;
        for r in rows {
            assert!((r[2].parse::<f64>().unwrap() - 0.25).abs() < 1e-12);
            assert!((r[3].parse::<f64>().unwrap() - expect).abs() < 1e-12);
            assert!((r[4].parse::<f64>().unwrap() - expect).abs() < 1e-12);
        }
        assert!(out.contains("# summary mean_fidelity="));
    }

    #[test]
    fn simulate_product_qubit_channel_gives_one_half() {
        let (_, out, _) = run_str(&["simulate", "--d", "2", "--channel", "custom:1,0"]);
        for r in csv_rows(&out) {
            assert!((r[3].parse::<f64>().unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn simulate_qutrit_optimal_deviation() {
        let (_, out, _) = run_str(&["simulate", "--d", "3", "--channel", "optimal", "--theta", "random:5", "--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["outcomes"].as_array().unwrap().len(), 9);
        assert!(v["max_deviation"].as_f64().unwrap() < 1e-9);
        assert_eq!(v["theta_source"], "random:5");
    }

    #[test]
    fn simulate_sampling_counts_sum_to_shots() {
        let (_, out, _) = run_str(&["simulate", "--d", "2", "--shots", "100", "--seed", "3"]);
        let total: usize = csv_rows(&out).iter().map(|r| r[5].parse::<usize>().unwrap()).sum();
        assert_eq!(total, 100);
        assert!(out.contains("sample_seed=3"));
    }

    #[test]
    fn theta_length_must_match() {
        let (code, _, err) = run_str(&["simulate", "--d", "3", "--theta", "0,0"]);
        assert_eq!(code, EXIT_INVALID);
        assert!(err.contains("theta"));
    }

    #[test]
    fn optimize_reports_agreement() {
        let (code, out, _) = run_str(&["optimize", "--d", "2,4", "--format", "json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        for r in v["results"].as_array().unwrap() {
            assert!(r["f_error"].as_f64().unwrap() < 1e-6);
            assert!(r["converged"].as_bool().unwrap());
        }
    }

    #[test]
    fn verify_small_exits_zero() {
        let (code, out, _) = run_str(&["verify", "--max-d", "2"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("cloning/econ_equals_opt"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("sweep"));
        let (code, _, _) = run_str(&["frobnicate"]);
        assert_eq!(code, EXIT_INVALID);
    }
}

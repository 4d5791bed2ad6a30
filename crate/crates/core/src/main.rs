use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use tkl_meanfield::phase::{
    concurrence_threshold, critical_temperature_linearized, critical_temperature_onset,
    saturation_field, zero_temperature_phase, CriticalResult,
};
use tkl_meanfield::sweep::{
    emit, emit_plot_script, format_g12, run_point, run_sweep, Axis, AxisName, Coupling, Figure,
    Format, Observable, ResultRow, Spacing, SweepSpec, DEFAULT_ALPHA,
};
use tkl_meanfield::{Error, ModelParams, SolverConfig, VERSION};

const EXIT_INVALID: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "tkl-meanfield", version, about = "Mean-field thermodynamics and entanglement of the Ising-Heisenberg triangulated kagome lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Observables at a single (T, H) point
    Point(Opts),
    /// One-dimensional sweep over the single ranged parameter
    Sweep(Opts),
    /// Two-dimensional grid over the two ranged parameters
    Grid(Opts),
    /// Critical temperature by onset bisection and by the linearized map
    Tc(Opts),
    /// Temperature above which the concurrence vanishes at fixed H
    Threshold(Opts),
    /// Zero-temperature phase labels
    Phase0(Opts),
    /// Saturation field of the plateau-to-saturation crossing
    Saturation(Opts),
}

#[derive(Args, Debug, Clone, Default)]
struct Opts {
    /// Intra-trimer coupling, value or start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    jaa: Option<String>,
    /// J_ab / |J_aa|, value or start:stop:count
    #[arg(long, conflicts_with = "jab", allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Absolute trimer-monomer coupling
    #[arg(long, allow_hyphen_values = true)]
    jab: Option<f64>,
    /// External field, value or start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    field: Option<String>,
    /// Temperature, value or start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    temp: Option<String>,
    /// Self-consistency tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Mixing weight of the new iterate, in (0, 1]
    #[arg(long)]
    damping: Option<f64>,
    /// Seeds as ma:mb,ma:mb,...
    #[arg(long, allow_hyphen_values = true)]
    seeds: Option<String>,
    /// Seed each sweep point from its predecessor
    #[arg(long)]
    continuation: bool,
    /// Comma-separated subset of m_a,m_b,chi_a,u,c,C,f,gamma_a,gamma_b
    #[arg(long)]
    observables: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write a gnuplot script for this figure next to --output
    #[arg(long)]
    plot: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// linear or log spacing of ranged parameters
    #[arg(long)]
    spacing: Option<String>,
    /// Bisection bracket lo:hi for tc and threshold
    #[arg(long, allow_hyphen_values = true)]
    bracket: Option<String>,
    /// key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self { code: EXIT_INVALID, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Io(_)) { EXIT_IO } else { EXIT_INVALID };
        Self { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self { code: EXIT_IO, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Param {
    Value(f64),
    Range(f64, f64, usize),
}

impl Param {
    fn parse(key: &str, s: &str) -> CliResult<Self> {
        let num = |p: &str| -> CliResult<f64> {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Failure::invalid(format!("--{key}: `{p}` is not a number")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(Param::Value(num(v)?)),
            [a, b, n] => {
                let n = n
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Failure::invalid(format!("--{key}: bad count `{n}`")))?;
                Ok(Param::Range(num(a)?, num(b)?, n))
            }
            _ => Err(Failure::invalid(format!("--{key}: expected f or start:stop:count"))),
        }
    }

    fn value(&self, key: &str) -> CliResult<f64> {
        match self {
            Param::Value(v) => Ok(*v),
            Param::Range(..) => Err(Failure::invalid(format!("--{key} must be a single value here"))),
        }
    }

    fn values(&self, spacing: Spacing) -> CliResult<Vec<f64>> {
        match *self {
            Param::Value(v) => Ok(vec![v]),
            Param::Range(a, b, n) => Ok(Axis::new(AxisName::H, a, b, n, spacing)?.values()),
        }
    }
}

/// Command-line values layered over a key=value file.
struct Settings {
    cli: Opts,
    file: HashMap<String, String>,
}

fn read_config(path: &Path) -> CliResult<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Failure::invalid(format!("{}:{}: expected key=value", path.display(), n + 1)))?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

impl Settings {
    fn new(cli: Opts) -> CliResult<Self> {
        let file = match &cli.config {
            Some(p) => read_config(p)?,
            None => HashMap::new(),
        };
        Ok(Self { cli, file })
    }

    fn raw(&self, cli: &Option<String>, key: &str) -> Option<String> {
        cli.clone().or_else(|| self.file.get(key).cloned())
    }

    fn parsed<T: std::str::FromStr>(&self, cli: Option<T>, key: &str) -> CliResult<Option<T>> {
        if cli.is_some() {
            return Ok(cli);
        }
        self.file
            .get(key)
            .map(|s| {
                s.parse::<T>()
                    .map_err(|_| Failure::invalid(format!("config `{key}`: cannot parse `{s}`")))
            })
            .transpose()
    }

    fn param(&self, cli: &Option<String>, key: &str) -> CliResult<Option<Param>> {
        self.raw(cli, key).map(|s| Param::parse(key, &s)).transpose()
    }

    fn jaa(&self) -> CliResult<Param> {
        Ok(self.param(&self.cli.jaa, "jaa")?.unwrap_or(Param::Value(1.0)))
    }

    fn field(&self) -> CliResult<Param> {
        Ok(self.param(&self.cli.field, "field")?.unwrap_or(Param::Value(0.0)))
    }

    fn temp(&self) -> CliResult<Param> {
        self.param(&self.cli.temp, "temp")?
            .ok_or_else(|| Failure::invalid("--temp is required"))
    }

    /// `Ok(Err(j_ab))` for an absolute coupling, `Ok(Ok(alpha))` otherwise.
    fn coupling(&self) -> CliResult<std::result::Result<Param, f64>> {
        if let Some(j) = self.cli.jab {
            return Ok(Err(j));
        }
        if let Some(a) = &self.cli.alpha {
            return Ok(Ok(Param::parse("alpha", a)?));
        }
        match (self.file.get("alpha"), self.parsed::<f64>(None, "jab")?) {
            (Some(_), Some(_)) => Err(Failure::invalid("config sets both alpha and jab")),
            (Some(a), None) => Ok(Ok(Param::parse("alpha", a)?)),
            (None, Some(j)) => Ok(Err(j)),
            (None, None) => Ok(Ok(Param::Value(DEFAULT_ALPHA))),
        }
    }

    fn j_ab_for(&self, j_aa: f64) -> CliResult<f64> {
        Ok(match self.coupling()? {
            Ok(alpha) => alpha.value("alpha")? * j_aa.abs(),
            Err(j) => j,
        })
    }

    fn spacing(&self) -> CliResult<Spacing> {
        Ok(self
            .raw(&self.cli.spacing, "spacing")
            .map(|s| s.parse::<Spacing>())
            .transpose()?
            .unwrap_or_default())
    }

    fn solver(&self) -> CliResult<SolverConfig> {
        let mut config = SolverConfig::default();
        if let Some(t) = self.parsed(self.cli.tol, "tol")? {
            config.tolerance = t;
        }
        if let Some(n) = self.parsed(self.cli.max_iter, "max_iter")? {
            config.max_iterations = n;
        }
        if let Some(d) = self.parsed(self.cli.damping, "damping")? {
            config.damping = d;
        }
        if let Some(s) = self.raw(&self.cli.seeds, "seeds") {
            config.seeds = parse_seeds(&s)?;
        }
        config.validate()?;
        Ok(config)
    }

    fn continuation(&self) -> CliResult<bool> {
        Ok(self.cli.continuation || self.parsed::<bool>(None, "continuation")?.unwrap_or(false))
    }

    fn observables(&self) -> CliResult<Vec<Observable>> {
        match self.raw(&self.cli.observables, "observables") {
            Some(s) => Ok(Observable::parse_list(&s)?),
            None => Ok(Observable::ALL.to_vec()),
        }
    }

    fn format(&self) -> CliResult<Format> {
        Ok(self
            .raw(&self.cli.format, "format")
            .map(|s| s.parse::<Format>())
            .transpose()?
            .unwrap_or_default())
    }

    fn output(&self) -> Option<PathBuf> {
        self.cli
            .output
            .clone()
            .or_else(|| self.file.get("output").map(PathBuf::from))
    }

    fn plot(&self) -> CliResult<Option<Figure>> {
        Ok(self.raw(&self.cli.plot, "plot").map(|s| s.parse()).transpose()?)
    }

    fn workers(&self) -> CliResult<Option<usize>> {
        if let Some(n) = self.parsed(self.cli.workers, "workers")? {
            return Ok(Some(n));
        }
        match std::env::var("TKL_WORKERS") {
            Ok(s) => s
                .trim()
                .parse::<usize>()
                .map(Some)
                .map_err(|_| Failure::invalid(format!("TKL_WORKERS: `{s}` is not a count"))),
            Err(_) => Ok(None),
        }
    }

    fn bracket(&self) -> CliResult<Option<(f64, f64)>> {
        let Some(s) = self.raw(&self.cli.bracket, "bracket") else {
            return Ok(None);
        };
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Failure::invalid("--bracket expects lo:hi"))?;
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Failure::invalid(format!("--bracket: `{p}` is not a number")))
        };
        Ok(Some((num(a)?, num(b)?)))
    }
}

fn parse_seeds(s: &str) -> CliResult<Vec<(f64, f64)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (a, b) = p
                .split_once(':')
                .ok_or_else(|| Failure::invalid(format!("seed `{p}` must be ma:mb")))?;
            let num = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Failure::invalid(format!("seed `{p}` is not numeric")))
            };
            Ok((num(a)?, num(b)?))
        })
        .collect()
}

fn open_output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_rows(settings: &Settings, rows: &[ResultRow]) -> CliResult<u8> {
    let output = settings.output();
    let mut out = open_output(&output)?;
    emit(rows, settings.format()?, &mut out)?;
    out.flush()?;
    if let Some(figure) = settings.plot()? {
        let data = output
            .as_ref()
            .ok_or_else(|| Failure::invalid("--plot needs --output"))?;
        let script = data.with_extension("gp");
        let name = data
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut w = BufWriter::new(File::create(&script)?);
        emit_plot_script(rows, figure, &name, &mut w)?;
        w.flush()?;
    }
    let failed = rows.iter().filter(|r| !r.converged).count();
    if failed > 0 {
        eprintln!("{failed} of {} points did not converge", rows.len());
        return Ok(EXIT_PARTIAL);
    }
    Ok(0)
}

fn point(settings: &Settings) -> CliResult<u8> {
    let j_aa = settings.jaa()?.value("jaa")?;
    let params = ModelParams::new(j_aa, settings.j_ab_for(j_aa)?, settings.field()?.value("field")?);
    let t = settings.temp()?.value("temp")?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NonPositiveTemperature(t).into());
    }
    let row = run_point(&params, t, &settings.solver()?, &settings.observables()?);
    write_rows(settings, &[row])
}

fn sweep_spec(settings: &Settings, dims: usize) -> CliResult<SweepSpec> {
    let spacing = settings.spacing()?;
    let temp = settings.param(&settings.cli.temp, "temp")?;
    let coupling = settings.coupling()?;
    let candidates = [
        (AxisName::T, temp),
        (AxisName::H, Some(settings.field()?)),
        (AxisName::JAa, Some(settings.jaa()?)),
        (AxisName::Alpha, coupling.ok()),
    ];
    let mut axes = Vec::new();
    for (name, p) in candidates {
        if let Some(Param::Range(a, b, n)) = p {
            axes.push(Axis::new(name, a, b, n, spacing)?);
        }
    }
    if axes.len() != dims {
        return Err(Failure::invalid(format!(
            "expected {dims} ranged parameter(s) (start:stop:count), found {}",
            axes.len()
        )));
    }
    let fixed = |p: Option<Param>, default: f64| match p {
        Some(Param::Value(v)) => v,
        _ => default,
    };
    let t = match temp {
        Some(p) => fixed(Some(p), f64::NAN),
        None => return Err(Failure::invalid("--temp is required")),
    };
    Ok(SweepSpec {
        j_aa: fixed(Some(settings.jaa()?), 1.0),
        coupling: match coupling {
            Ok(alpha) => Coupling::Ratio(fixed(Some(alpha), DEFAULT_ALPHA)),
            Err(j) => Coupling::Absolute(j),
        },
        h: fixed(Some(settings.field()?), 0.0),
        t,
        axis1: axes[0],
        axis2: axes.get(1).copied(),
        observables: settings.observables()?,
        continuation: settings.continuation()?,
        solver: settings.solver()?,
        workers: settings.workers()?,
    })
}

fn sweep(settings: &Settings, dims: usize) -> CliResult<u8> {
    let spec = sweep_spec(settings, dims)?;
    let rows = run_sweep(&spec)?;
    write_rows(settings, &rows)
}

fn write_text(settings: &Settings, text: &str) -> CliResult<u8> {
    let mut out = open_output(&settings.output())?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(0)
}

fn alpha_value(settings: &Settings, j_aa: f64) -> CliResult<f64> {
    Ok(match settings.coupling()? {
        Ok(a) => a.value("alpha")?,
        Err(j) => j / j_aa.abs(),
    })
}

fn tc(settings: &Settings) -> CliResult<u8> {
    let j_aa = settings.jaa()?.value("jaa")?;
    let alpha = alpha_value(settings, j_aa)?;
    let bracket = settings.bracket()?.unwrap_or((1e-4 * j_aa.abs(), j_aa.abs()));
    let onset = critical_temperature_onset(j_aa, alpha, bracket, 1e-10)?;
    let linear = critical_temperature_linearized(j_aa, alpha, 1e-13)?;
    if linear.cubic_negative == Some(false) {
        eprintln!("warning: cubic coefficient is not negative at the linearized root");
    }
    let fmt_row = |r: &CriticalResult| {
        format!(
            "{},{},{},{},{}\n",
            r.method.name(),
            format_g12(r.tc),
            format_g12(r.bracket.0),
            format_g12(r.bracket.1),
            r.cubic_negative.map_or(String::new(), |b| b.to_string())
        )
    };
    let text = match settings.format()? {
        Format::Csv => format!(
            "# tkl-meanfield v{VERSION}\nmethod,Tc,bracket_lo,bracket_hi,cubic_negative\n{}{}",
            fmt_row(&onset),
            fmt_row(&linear)
        ),
        Format::Json => {
            let obj = |r: &CriticalResult| {
                json!({
                    "method": r.method.name(),
                    "Tc": r.tc,
                    "bracket_lo": r.bracket.0,
                    "bracket_hi": r.bracket.1,
                    "cubic_negative": r.cubic_negative,
                })
            };
            format!("{:#}\n", json!([obj(&onset), obj(&linear)]))
        }
    };
    write_text(settings, &text)
}

fn threshold(settings: &Settings) -> CliResult<u8> {
    let j_aa = settings.jaa()?.value("jaa")?;
    let params = ModelParams::new(j_aa, settings.j_ab_for(j_aa)?, settings.field()?.value("field")?);
    let bracket = settings.bracket()?.unwrap_or((1e-4 * j_aa.abs(), 2.0 * j_aa.abs()));
    let t = concurrence_threshold(&params, bracket, 1e-10, &settings.solver()?)?;
    write_text(
        settings,
        &format!("# tkl-meanfield v{VERSION}\nH,T_threshold\n{},{}\n", format_g12(params.h), format_g12(t)),
    )
}

fn phase0(settings: &Settings) -> CliResult<u8> {
    let spacing = settings.spacing()?;
    let mut text = format!("# tkl-meanfield v{VERSION}\nJ_aa,J_ab,H,phase,m_a,m_b,C,energy,degenerate\n");
    for j_aa in settings.jaa()?.values(spacing)? {
        let j_ab = settings.j_ab_for(j_aa)?;
        for h in settings.field()?.values(spacing)? {
            let p = zero_temperature_phase(j_aa, j_ab, h)?;
            text.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                format_g12(j_aa),
                format_g12(j_ab),
                format_g12(h),
                p.label.tag.name(),
                format_g12(p.label.m_a),
                format_g12(p.m_b),
                format_g12(p.label.concurrence),
                format_g12(p.energy_per_site),
                p.degenerate_boundary
            ));
        }
    }
    write_text(settings, &text)
}

fn saturation(settings: &Settings) -> CliResult<u8> {
    let j_aa = settings.jaa()?.value("jaa")?;
    let hs = saturation_field(j_aa, settings.j_ab_for(j_aa)?)?;
    write_text(settings, &format!("{}\n", format_g12(hs)))
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Point(o) => point(&Settings::new(o)?),
        Command::Sweep(o) => sweep(&Settings::new(o)?, 1),
        Command::Grid(o) => sweep(&Settings::new(o)?, 2),
        Command::Tc(o) => tc(&Settings::new(o)?),
        Command::Threshold(o) => threshold(&Settings::new(o)?),
        Command::Phase0(o) => phase0(&Settings::new(o)?),
        Command::Saturation(o) => saturation(&Settings::new(o)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

//! Point evaluation, 1-D sweeps and 2-D grids, CSV/JSON emission and
//! gnuplot script generation.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::entanglement::{concurrence_xstate, reduced_density_matrix};
use crate::error::{check_temperature, Error, Result};
use crate::mean_field::{equilibrium, SelfConsistentState, SolverConfig};
use crate::observables::{
    default_field_step, field_derivative_on, internal_energy_on, specific_heat_on,
    DEFAULT_TEMPERATURE_STEP,
};
use crate::trimer::ModelParams;

/// Default `J_ab / |J_aa|`.
pub const DEFAULT_ALPHA: f64 = 0.025;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisName {
    T,
    H,
    JAa,
    Alpha,
}

impl AxisName {
    pub fn column(&self) -> &'static str {
        match self {
            AxisName::T => "T",
            AxisName::H => "H",
            AxisName::JAa => "J_aa",
            AxisName::Alpha => "alpha",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lin" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            _ => Err(Error::InvalidArgument(format!("unknown spacing `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub name: AxisName,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn new(name: AxisName, start: f64, stop: f64, count: usize, spacing: Spacing) -> Result<Self> {
        let axis = Self { name, start, stop, count, spacing };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::InvalidArgument(format!("axis {}: {why}", self.name.column())));
        if self.count < 2 {
            return bad("count must be >= 2");
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start == self.stop {
            return bad("start and stop must be finite and distinct");
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return bad("log spacing needs positive endpoints");
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count - 1;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == n {
                    return self.stop;
                }
                let s = i as f64 / n as f64;
                match self.spacing {
                    Spacing::Linear => self.start + s * (self.stop - self.start),
                    Spacing::Log => (self.start.ln() + s * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

/// How `J_ab` is fixed when `J_aa` varies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// `alpha = J_ab / |J_aa|`.
    Ratio(f64),
    Absolute(f64),
}

impl Default for Coupling {
    fn default() -> Self {
        Coupling::Ratio(DEFAULT_ALPHA)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observable {
    MA,
    MB,
    ChiA,
    U,
    C,
    Concurrence,
    F,
    GammaA,
    GammaB,
}

impl Observable {
    pub const ALL: [Observable; 9] = [
        Observable::MA,
        Observable::MB,
        Observable::ChiA,
        Observable::U,
        Observable::C,
        Observable::Concurrence,
        Observable::F,
        Observable::GammaA,
        Observable::GammaB,
    ];

    pub fn column(&self) -> &'static str {
        match self {
            Observable::MA => "m_a",
            Observable::MB => "m_b",
            Observable::ChiA => "chi_a",
            Observable::U => "u",
            Observable::C => "c",
            Observable::Concurrence => "C",
            Observable::F => "f",
            Observable::GammaA => "gamma_a",
            Observable::GammaB => "gamma_b",
        }
    }

    /// Parses a comma-separated list, returned in canonical column order
    /// without duplicates.
    pub fn parse_list(s: &str) -> Result<Vec<Observable>> {
        let mut out: Vec<Observable> = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err(Error::InvalidArgument("empty observable list".into()));
        }
        Ok(out)
    }
}

impl FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .into_iter()
            .find(|o| o.column() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown observable `{s}`")))
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub j_aa: f64,
    pub coupling: Coupling,
    pub h: f64,
    pub t: f64,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub observables: Vec<Observable>,
    /// Seed each point from its predecessor along `axis1`.
    pub continuation: bool,
    pub solver: SolverConfig,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.name == self.axis1.name {
                return Err(Error::InvalidArgument("the two axes must differ".into()));
            }
        }
        match self.axes().find(|a| a.name == AxisName::T) {
            Some(a) => {
                check_temperature(a.start)?;
                check_temperature(a.stop)?;
            }
            None => check_temperature(self.t)?,
        }
        if self.observables.is_empty() {
            return Err(Error::InvalidArgument("no observables requested".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidArgument("worker count must be >= 1".into()));
        }
        self.solver.validate()
    }

    fn axes(&self) -> impl Iterator<Item = &Axis> {
        std::iter::once(&self.axis1).chain(self.axis2.iter())
    }

    /// Parameters and temperature with axis values substituted.
    pub fn point(&self, v1: f64, v2: Option<f64>) -> (ModelParams, f64) {
        let (mut j_aa, mut coupling, mut h, mut t) = (self.j_aa, self.coupling, self.h, self.t);
        for (axis, v) in self.axes().zip(std::iter::once(v1).chain(v2)) {
            match axis.name {
                AxisName::T => t = v,
                AxisName::H => h = v,
                AxisName::JAa => j_aa = v,
                AxisName::Alpha => coupling = Coupling::Ratio(v),
            }
        }
        let params = match coupling {
            Coupling::Ratio(alpha) => ModelParams::from_ratio(j_aa, alpha, h),
            Coupling::Absolute(j_ab) => ModelParams::new(j_aa, j_ab, h),
        };
        (params, t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub t: f64,
    pub h: f64,
    pub j_aa: f64,
    pub j_ab: f64,
    pub alpha: f64,
    /// Requested observables in column order; `None` where not available.
    pub values: Vec<(Observable, Option<f64>)>,
    pub converged: bool,
    pub branches: usize,
    /// Selected state, for seeding a successor.
    pub state: Option<SelfConsistentState>,
}

impl ResultRow {
    pub fn get(&self, o: Observable) -> Option<f64> {
        self.values.iter().find(|(k, _)| *k == o).and_then(|(_, v)| *v)
    }
}

fn observable_on(
    o: Observable,
    params: &ModelParams,
    t: f64,
    config: &SolverConfig,
    state: &SelfConsistentState,
) -> Result<f64> {
    Ok(match o {
        Observable::MA => state.m_a,
        Observable::MB => state.m_b,
        Observable::F => state.free_energy_per_site,
        Observable::GammaA => state.fields.gamma_a,
        Observable::GammaB => state.fields.gamma_b,
        Observable::ChiA => field_derivative_on(params, t, default_field_step(params.h), config, state)?.value,
        Observable::U => internal_energy_on(params, t, DEFAULT_TEMPERATURE_STEP, config, state)?,
        Observable::C => specific_heat_on(params, t, DEFAULT_TEMPERATURE_STEP, config, state)?,
        Observable::Concurrence => concurrence_xstate(&reduced_density_matrix(&state.fields, t)?).value,
    })
}

/// Evaluates the requested observables on the selected equilibrium. Solver
/// failures yield a row with `converged = false` and empty values.
pub fn run_point(
    params: &ModelParams,
    t: f64,
    config: &SolverConfig,
    observables: &[Observable],
) -> ResultRow {
    let mut row = ResultRow {
        t,
        h: params.h,
        j_aa: params.j_aa,
        j_ab: params.j_ab,
        alpha: params.alpha(),
        values: observables.iter().map(|&o| (o, None)).collect(),
        converged: false,
        branches: 0,
        state: None,
    };
    let eq = match check_temperature(t).and_then(|_| equilibrium(params, t, config)) {
        Ok(eq) => eq,
        Err(_) => return row,
    };
    row.converged = true;
    row.branches = eq.branch_count();
    for (o, v) in row.values.iter_mut() {
        match observable_on(*o, params, t, config, &eq.state) {
            Ok(x) if x.is_finite() => *v = Some(x),
            _ => row.converged = false,
        }
    }
    row.state = Some(eq.state);
    row
}

/// Evaluates every grid point. Rows come back ordered by axis-2 index, then
/// axis-1 index, independent of the worker count.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = spec.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;

    let xs = spec.axis1.values();
    let lines: Vec<Option<f64>> = match &spec.axis2 {
        Some(a) => a.values().into_iter().map(Some).collect(),
        None => vec![None],
    };

    let rows = pool.install(|| {
        if spec.continuation {
            lines
                .par_iter()
                .flat_map_iter(|&y| {
                    let mut prev: Option<SelfConsistentState> = None;
                    let mut line = Vec::with_capacity(xs.len());
                    for &x in &xs {
                        let (params, t) = spec.point(x, y);
                        let config = match &prev {
                            Some(s) => spec.solver.with_leading_seed((s.m_a, s.m_b)),
                            None => spec.solver.clone(),
                        };
                        let row = run_point(&params, t, &config, &spec.observables);
                        if row.state.is_some() {
                            prev = row.state.clone();
                        }
                        line.push(row);
                    }
                    line
                })
                .collect::<Vec<_>>()
        } else {
            let points: Vec<(f64, Option<f64>)> = lines
                .iter()
                .flat_map(|&y| xs.iter().map(move |&x| (x, y)))
                .collect();
            points
                .par_iter()
                .map(|&(x, y)| {
                    let (params, t) = spec.point(x, y);
                    run_point(&params, t, &spec.solver, &spec.observables)
                })
                .collect()
        }
    });
    Ok(rows)
}

/// `%.12g`-style rendering: 12 significant digits, trailing zeros removed,
/// exponent form outside `[1e-5, 1e12)`.
pub fn format_g12(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-5..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{:.*}", (11 - exp) as usize, x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidArgument(format!("unknown format `{s}`"))),
        }
    }
}

const AXIS_COLUMNS: [&str; 5] = ["T", "H", "J_aa", "J_ab", "alpha"];

/// Column names of the emitted table.
pub fn columns(rows: &[ResultRow]) -> Vec<String> {
    let mut cols: Vec<String> = AXIS_COLUMNS.iter().map(|s| s.to_string()).collect();
    if let Some(first) = rows.first() {
        cols.extend(first.values.iter().map(|(o, _)| o.column().to_string()));
    }
    cols.push("converged".into());
    cols.push("branches".into());
    cols
}

fn axis_values(row: &ResultRow) -> [f64; 5] {
    [row.t, row.h, row.j_aa, row.j_ab, row.alpha]
}

pub fn emit<W: Write>(rows: &[ResultRow], format: Format, out: &mut W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("nothing to emit".into()));
    }
    match format {
        Format::Csv => emit_csv(rows, out),
        Format::Json => emit_json(rows, out),
    }
}

fn emit_csv<W: Write>(rows: &[ResultRow], out: &mut W) -> Result<()> {
    let mut text = format!("# tkl-meanfield v{}\n{}\n", crate::VERSION, columns(rows).join(","));
    for row in rows {
        let mut cells: Vec<String> = axis_values(row).iter().map(|&x| format_g12(x)).collect();
        for (_, v) in &row.values {
            cells.push(match v {
                Some(x) if row.converged => format_g12(*x),
                _ => String::new(),
            });
        }
        cells.push(row.converged.to_string());
        cells.push(row.branches.to_string());
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn json_number(x: f64) -> Value {
    format_g12(x)
        .parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

fn emit_json<W: Write>(rows: &[ResultRow], out: &mut W) -> Result<()> {
    let array: Vec<Value> = rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (name, x) in AXIS_COLUMNS.iter().zip(axis_values(row)) {
                obj.insert(name.to_string(), json_number(x));
            }
            for (o, v) in &row.values {
                let cell = match v {
                    Some(x) if row.converged => json_number(*x),
                    _ => Value::Null,
                };
                obj.insert(o.column().to_string(), cell);
            }
            obj.insert("converged".into(), Value::Bool(row.converged));
            obj.insert("branches".into(), Value::from(row.branches));
            Value::Object(obj)
        })
        .collect();
    let text = serde_json::to_string_pretty(&Value::Array(array))
        .map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4,
    Fig5,
    Fig8,
    Fig9,
    Fig10,
    Fig11,
    Fig12b,
    Fig13,
}

impl Figure {
    pub const ALL: [Figure; 12] = [
        Figure::Fig2a,
        Figure::Fig2b,
        Figure::Fig3a,
        Figure::Fig3b,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig8,
        Figure::Fig9,
        Figure::Fig10,
        Figure::Fig11,
        Figure::Fig12b,
        Figure::Fig13,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
            Figure::Fig10 => "fig10",
            Figure::Fig11 => "fig11",
            Figure::Fig12b => "fig12b",
            Figure::Fig13 => "fig13",
        }
    }
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown figure `{s}`")))
    }
}

enum PlotKind {
    Lines { x: &'static str, ys: Vec<&'static str> },
    HeatMap { x: &'static str, y: &'static str, z: &'static str },
}

fn varies(rows: &[ResultRow], f: impl Fn(&ResultRow) -> f64) -> bool {
    rows.first().is_some_and(|r0| rows.iter().any(|r| f(r) != f(r0)))
}

fn plot_kind(figure: Figure, rows: &[ResultRow]) -> PlotKind {
    let lines = |x, ys: &[&'static str]| PlotKind::Lines { x, ys: ys.to_vec() };
    match figure {
        Figure::Fig2a | Figure::Fig2b => lines("H", &["m_a"]),
        Figure::Fig3a | Figure::Fig3b => lines("T", &["m_a"]),
        Figure::Fig4 => lines("T", &["chi_a"]),
        Figure::Fig5 => {
            if varies(rows, |r| r.h) && !varies(rows, |r| r.t) {
                lines("H", &["chi_a"])
            } else {
                lines("T", &["chi_a"])
            }
        }
        Figure::Fig8 | Figure::Fig9 => lines("T", &["c"]),
        Figure::Fig10 => lines("T", &["C"]),
        Figure::Fig11 => PlotKind::HeatMap { x: "T", y: "H", z: "C" },
        Figure::Fig12b => PlotKind::HeatMap { x: "H", y: "J_aa", z: "C" },
        Figure::Fig13 => lines("H", &["c", "C"]),
    }
}

/// Writes a gnuplot script for `figure` that reads the CSV at `data_path`
/// (relative to the script).
pub fn emit_plot_script<W: Write>(
    rows: &[ResultRow],
    figure: Figure,
    data_path: &str,
    out: &mut W,
) -> Result<()> {
    let cols = columns(rows);
    let index = |name: &str| -> Result<usize> {
        cols.iter()
            .position(|c| c == name)
            .map(|i| i + 1)
            .ok_or_else(|| Error::MissingColumn { figure: figure.id().into(), column: name.into() })
    };
    let id = figure.id();
    let mut s = format!(
        "# {id}: generated by tkl-meanfield v{}\n\
         set datafile separator ','\n\
         set datafile commentschars '#'\n\
         set terminal pngcairo size 900,650\n\
         set output '{id}.png'\n",
        crate::VERSION
    );
    match plot_kind(figure, rows) {
        PlotKind::Lines { x, ys } => {
            let xi = index(x)?;
            let yis = ys.iter().map(|y| index(y)).collect::<Result<Vec<_>>>()?;
            s.push_str(&format!("set xlabel '{x}'\nset ylabel '{}'\n", ys.join(", ")));
            let series: Vec<String> = ys
                .iter()
                .zip(&yis)
                .map(|(y, yi)| format!("'{data_path}' skip 2 using {xi}:{yi} with lines title '{y}'"))
                .collect();
            s.push_str(&format!("plot {}\n", series.join(", \\\n     ")));
        }
        PlotKind::HeatMap { x, y, z } => {
            let (xi, yi, zi) = (index(x)?, index(y)?, index(z)?);
            s.push_str(&format!(
                "set xlabel '{x}'\nset ylabel '{y}'\nset cblabel '{z}'\nset view map\n\
                 plot '{data_path}' skip 2 using {xi}:{yi}:{zi} with image title ''\n"
            ));
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_formatting() {
        assert_eq!(format_g12(0.5), "0.5");
        assert_eq!(format_g12(-0.0), "0");
        assert_eq!(format_g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_g12(1.0 / 6.0), "0.166666666667");
        assert_eq!(format_g12(1234.5), "1234.5");
        assert_eq!(format_g12(1e-7), "1e-07");
        assert_eq!(format_g12(2.5e15), "2.5e+15");
        assert_eq!(format_g12(0.0102062), "0.0102062");
        assert_eq!(format_g12(f64::NAN), "");
    }

    #[test]
    fn axis_values_hit_endpoints() {
        let a = Axis::new(AxisName::T, 0.1, 1.0, 4, Spacing::Log).unwrap();
        let v = a.values();
        assert_eq!((v[0], v[3]), (0.1, 1.0));
        assert!((v[1] / v[0] - v[2] / v[1]).abs() < 1e-12);
        assert!(Axis::new(AxisName::H, 1.0, 1.0, 3, Spacing::Linear).is_err());
        assert!(Axis::new(AxisName::H, 0.0, 1.0, 1, Spacing::Linear).is_err());
        assert!(Axis::new(AxisName::T, -1.0, 1.0, 5, Spacing::Log).is_err());
    }

    #[test]
    fn observable_list_is_canonical() {
        let l = Observable::parse_list("C, m_a,m_a,f").unwrap();
        assert_eq!(l, vec![Observable::MA, Observable::Concurrence, Observable::F]);
        assert!(Observable::parse_list("m_c").is_err());
    }

    #[test]
    fn disordered_point_row() {
        let p = ModelParams::from_ratio(1.0, 0.025, 0.0);
        let row = run_point(&p, 0.02, &SolverConfig::default(), &Observable::ALL);
        assert!(row.converged);
        assert!(row.get(Observable::MA).unwrap().abs() < 1e-10);
        assert_eq!(row.get(Observable::Concurrence), Some(0.0));
    }

    #[test]
    fn failed_point_has_empty_cells() {
        let p = ModelParams::from_ratio(1.0, 0.025, 0.0);
        let row = run_point(&p, -1.0, &SolverConfig::default(), &[Observable::MA]);
        assert!(!row.converged);
        let mut buf = Vec::new();
        emit(std::slice::from_ref(&row), Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(2).unwrap().ends_with(",,false,0"));
        let mut buf = Vec::new();
        emit(&[row], Format::Json, &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v[0]["m_a"], Value::Null);
        assert_eq!(v[0]["converged"], Value::Bool(false));
    }

    #[test]
    fn plot_script_requires_columns() {
        let p = ModelParams::from_ratio(1.0, 0.025, 0.5);
        let rows = vec![run_point(&p, 0.1, &SolverConfig::default(), &[Observable::MA])];
        let mut buf = Vec::new();
        emit_plot_script(&rows, Figure::Fig2b, "fig2b.csv", &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("using 2:6"));
        let err = emit_plot_script(&rows, Figure::Fig8, "x.csv", &mut Vec::new()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn { .. }));
    }
}

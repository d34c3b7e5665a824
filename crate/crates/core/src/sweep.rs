//! Configuration-driven grid runner and its CSV/JSON writers.
//!
//! A sweep evaluates one model over the Cartesian product of a time grid
//! and an inverse-temperature (or polarization) grid. Rows come back
//! ordered by `(t, beta)` whatever the thread count.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::QfiError;
use crate::models::{Axis, LinearModel, LmgModel, OatModel};
use crate::parallel::{try_map_ordered, Parallelism};
use crate::scenario::Scenario;
use crate::spin::Spin;
use crate::thermal::{beta_from_polarization, polarization};

/// Largest accepted `twice_j` (a 201-dimensional Hilbert space).
pub const MAX_TWICE_J: u32 = 200;

pub const CSV_HEADER: [&str; 18] = [
    "model",
    "J",
    "beta",
    "P",
    "t",
    "lambda",
    "f_general",
    "f_thermal",
    "f_sld",
    "variance_bound",
    "seminorm_bound",
    "product_bound",
    "convexity_bound",
    "gap_variance_bound",
    "gap_seminorm_bound",
    "closed_qfi",
    "closed_variance",
    "ordering_ok",
];

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid config at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("numerical failure at t = {t}, beta = {beta}: {source}")]
    Numerical {
        t: f64,
        beta: f64,
        #[source]
        source: QfiError,
    },

    #[error(transparent)]
    Pipeline(#[from] QfiError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV encoding failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON encoding failed: {0}")]
    Json(#[from] serde_json::Error),

    #[error("nothing to write: the sweep produced no rows")]
    Empty,
}

fn config_error(field: impl Into<String>, message: impl Into<String>) -> SweepError {
    SweepError::Config {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Linear,
    Oat,
    Lmg,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Linear => "linear",
            ModelKind::Oat => "oat",
            ModelKind::Lmg => "lmg",
        })
    }
}

/// Columns a sweep may be asked to fill.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    QfiGeneral,
    QfiThermal,
    QfiSld,
    VarianceBound,
    SeminormBound,
    ProductBound,
    GapBounds,
    ClosedForms,
}

impl Output {
    pub const ALL: [Output; 8] = [
        Output::QfiGeneral,
        Output::QfiThermal,
        Output::QfiSld,
        Output::VarianceBound,
        Output::SeminormBound,
        Output::ProductBound,
        Output::GapBounds,
        Output::ClosedForms,
    ];

    fn supported_by(self, model: ModelKind) -> bool {
        !(self == Output::ClosedForms && model == ModelKind::Lmg)
    }
}

/// Declarative description of a sweep, usually read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelKind,
    /// Linear model only; defaults to `x`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    pub twice_j: u32,
    /// LMG model only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    pub t_grid: Vec<f64>,
    /// Every output the model supports when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<Output>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

fn check_grid(
    name: &str,
    grid: &[f64],
    in_range: impl Fn(f64) -> bool,
    range: &str,
) -> Result<(), SweepError> {
    if grid.is_empty() {
        return Err(config_error(name, "grid must not be empty"));
    }
    for (i, &v) in grid.iter().enumerate() {
        if !v.is_finite() || !in_range(v) {
            return Err(config_error(
                format!("{name}[{i}]"),
                format!("{v} is outside {range}"),
            ));
        }
        if i > 0 && v <= grid[i - 1] {
            return Err(config_error(
                format!("{name}[{i}]"),
                format!(
                    "grid must be strictly increasing ({} then {v})",
                    grid[i - 1]
                ),
            ));
        }
    }
    Ok(())
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, SweepError> {
        let config: SweepConfig = toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let field = match e.span() {
                Some(span) => {
                    let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                    format!("line {line}")
                }
                None => "<document>".to_string(),
            };
            config_error(field, message)
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, SweepError> {
        let text = fs::read_to_string(path).map_err(|source| SweepError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("sweep config serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.twice_j == 0 || self.twice_j > MAX_TWICE_J {
            return Err(config_error(
                "twice_j",
                format!("must lie in 1..={MAX_TWICE_J}, got {}", self.twice_j),
            ));
        }
        if self.axis.is_some() && self.model != ModelKind::Linear {
            return Err(config_error(
                "axis",
                format!("only meaningful for the linear model, not {}", self.model),
            ));
        }
        match (self.model, self.lambda) {
            (ModelKind::Lmg, None) => {
                return Err(config_error("lambda", "required for the lmg model"))
            }
            (ModelKind::Lmg, Some(l)) if !l.is_finite() => {
                return Err(config_error("lambda", format!("must be finite, got {l}")))
            }
            (ModelKind::Lmg, Some(_)) => {}
            (model, Some(_)) => {
                return Err(config_error(
                    "lambda",
                    format!("only meaningful for the lmg model, not {model}"),
                ))
            }
            (_, None) => {}
        }
        match (&self.beta_grid, &self.p_grid) {
            (Some(_), Some(_)) => {
                return Err(config_error(
                    "beta_grid",
                    "give exactly one of beta_grid and p_grid",
                ))
            }
            (None, None) => {
                return Err(config_error(
                    "beta_grid",
                    "one of beta_grid and p_grid is required",
                ))
            }
            (Some(g), None) => check_grid("beta_grid", g, |b| b >= 0.0, "[0, inf)")?,
            (None, Some(g)) => check_grid("p_grid", g, |p| (0.0..1.0).contains(&p), "[0, 1)")?,
        }
        check_grid("t_grid", &self.t_grid, |t| t >= 0.0, "[0, inf)")?;
        if let Some(outputs) = &self.outputs {
            if outputs.is_empty() {
                return Err(config_error("outputs", "must list at least one output"));
            }
            for (i, o) in outputs.iter().enumerate() {
                if !o.supported_by(self.model) {
                    return Err(config_error(
                        format!("outputs[{i}]"),
                        format!("{o:?} is not available for the {} model", self.model),
                    ));
                }
            }
        }
        if self.parallelism == Some(0) {
            return Err(config_error("parallelism", "must be a positive integer"));
        }
        Ok(())
    }

    pub fn spin(&self) -> Spin {
        Spin::from_twice_j(self.twice_j).expect("validated twice_j")
    }

    pub fn wants(&self, output: Output) -> bool {
        match &self.outputs {
            Some(list) => list.contains(&output),
            None => output.supported_by(self.model),
        }
    }

    /// `(beta, P)` pairs of the temperature axis, in grid order.
    pub fn temperature_axis(&self) -> Result<Vec<(f64, f64)>, SweepError> {
        if let Some(g) = &self.beta_grid {
            return Ok(g.iter().map(|&b| (b, polarization(b))).collect());
        }
        let g = self.p_grid.as_deref().unwrap_or_default();
        g.iter()
            .enumerate()
            .map(|(i, &p)| {
                beta_from_polarization(p)
                    .map(|b| (b, p))
                    .map_err(|e| config_error(format!("p_grid[{i}]"), e.to_string()))
            })
            .collect()
    }

    /// Grid points ordered by `(t, beta)`.
    pub fn points(&self) -> Result<Vec<GridPoint>, SweepError> {
        let temps = self.temperature_axis()?;
        Ok(self
            .t_grid
            .iter()
            .flat_map(|&t| temps.iter().map(move |&(beta, p)| GridPoint { beta, p, t }))
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub beta: f64,
    pub p: f64,
    pub t: f64,
}

/// One evaluated grid point. Unrequested quantities are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub model: ModelKind,
    pub twice_j: u32,
    #[serde(rename = "J")]
    pub j: f64,
    pub beta: f64,
    #[serde(rename = "P")]
    pub p: f64,
    pub t: f64,
    pub lambda: Option<f64>,
    pub f_general: Option<f64>,
    pub f_thermal: Option<f64>,
    pub f_sld: Option<f64>,
    pub variance_bound: Option<f64>,
    pub seminorm_bound: Option<f64>,
    pub product_bound: Option<f64>,
    pub convexity_bound: Option<f64>,
    pub gap_variance_bound: Option<f64>,
    pub gap_seminorm_bound: Option<f64>,
    pub closed_qfi: Option<f64>,
    pub closed_variance: Option<f64>,
    pub ordering_ok: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failed_checks: Vec<&'static str>,
}

impl SweepRow {
    fn csv_record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        vec![
            self.model.to_string(),
            format_float(self.j),
            format_float(self.beta),
            format_float(self.p),
            format_float(self.t),
            opt(self.lambda),
            opt(self.f_general),
            opt(self.f_thermal),
            opt(self.f_sld),
            opt(self.variance_bound),
            opt(self.seminorm_bound),
            opt(self.product_bound),
            opt(self.convexity_bound),
            opt(self.gap_variance_bound),
            opt(self.gap_seminorm_bound),
            opt(self.closed_qfi),
            opt(self.closed_variance),
            self.ordering_ok.to_string(),
        ]
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn scenario_for(
    config: &SweepConfig,
    point: GridPoint,
) -> Result<(Scenario, Option<(f64, f64)>), QfiError> {
    let spin = config.spin();
    let closed = config.wants(Output::ClosedForms);
    match config.model {
        ModelKind::Linear => {
            let m = LinearModel::new(spin, point.beta, point.t, config.axis.unwrap_or(Axis::X))?;
            Ok((
                m.scenario()?,
                closed.then(|| (m.qfi_closed(), m.variance_closed())),
            ))
        }
        ModelKind::Oat => {
            let m = OatModel::new(spin, point.beta, point.t)?;
            Ok((
                m.scenario()?,
                closed.then(|| (m.qfi_closed(), m.variance_closed())),
            ))
        }
        ModelKind::Lmg => {
            let lambda = config.lambda.expect("validated lambda");
            let m = LmgModel::new(spin, point.beta, point.t, lambda)?;
            Ok((m.scenario()?, None))
        }
    }
}

/// Evaluates a single grid point of `config`.
pub fn evaluate_point(config: &SweepConfig, point: GridPoint) -> Result<SweepRow, SweepError> {
    let numerical = |source| SweepError::Numerical {
        t: point.t,
        beta: point.beta,
        source,
    };
    let (scenario, closed) = scenario_for(config, point).map_err(numerical)?;
    let e = scenario.evaluate().map_err(numerical)?;
    let pick = |o: Output, v: f64| config.wants(o).then_some(v);
    let gaps = config.wants(Output::GapBounds);
    Ok(SweepRow {
        model: config.model,
        twice_j: config.twice_j,
        j: config.spin().j(),
        beta: point.beta,
        p: point.p,
        t: point.t,
        lambda: config.lambda,
        f_general: pick(Output::QfiGeneral, e.qfi.f_general),
        f_thermal: pick(Output::QfiThermal, e.qfi.f_thermal),
        f_sld: pick(Output::QfiSld, e.qfi.f_sld),
        variance_bound: pick(Output::VarianceBound, e.bounds.variance_bound),
        seminorm_bound: pick(Output::SeminormBound, e.bounds.seminorm_bound),
        product_bound: e
            .bounds
            .product_bound
            .filter(|_| config.wants(Output::ProductBound)),
        convexity_bound: gaps.then_some(e.bounds.convexity_bound),
        gap_variance_bound: gaps.then_some(e.bounds.gap_variance_bound),
        gap_seminorm_bound: gaps.then_some(e.bounds.gap_seminorm_bound),
        closed_qfi: closed.map(|c| c.0),
        closed_variance: closed.map(|c| c.1),
        ordering_ok: e.bounds.ordering_ok,
        failed_checks: e.bounds.failed_checks(),
    })
}

/// Evaluates every grid point; `parallelism` overrides the config value.
pub fn run_sweep(
    config: &SweepConfig,
    parallelism: Option<Parallelism>,
) -> Result<Vec<SweepRow>, SweepError> {
    config.validate()?;
    let points = config.points()?;
    let parallelism =
        parallelism.unwrap_or_else(|| Parallelism::new(config.parallelism.unwrap_or(1)));
    log::info!(
        "sweep {} twice_j={} over {} points on {} thread(s)",
        config.model,
        config.twice_j,
        points.len(),
        parallelism.threads()
    );
    try_map_ordered(&points, parallelism, |&p| evaluate_point(config, p))
}

/// First row whose bound ordering failed, if any.
pub fn first_ordering_failure(rows: &[SweepRow]) -> Option<&SweepRow> {
    rows.iter().find(|r| !r.ordering_ok)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<(), SweepError> {
    if rows.is_empty() {
        return Err(SweepError::Empty);
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.csv_record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn csv_string(rows: &[SweepRow]) -> Result<String, SweepError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), SweepError> {
    fs::write(path, contents).map_err(|source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<(), SweepError> {
    write_file(path, csv_string(rows)?.as_bytes())
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    generator: String,
    config: &'a SweepConfig,
    row_count: usize,
    rows: &'a [SweepRow],
}

pub fn json_string(config: &SweepConfig, rows: &[SweepRow]) -> Result<String, SweepError> {
    if rows.is_empty() {
        return Err(SweepError::Empty);
    }
    let doc = JsonDocument {
        generator: format!("thermoqfi {}", env!("CARGO_PKG_VERSION")),
        config,
        row_count: rows.len(),
        rows,
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn emit_json(config: &SweepConfig, rows: &[SweepRow], path: &Path) -> Result<(), SweepError> {
    write_file(path, json_string(config, rows)?.as_bytes())
}

/// Evenly spaced `k / denominator` for `k` in `from..=to`.
fn ratio_grid(from: u32, to: u32, denominator: u32) -> Vec<f64> {
    (from..=to)
        .map(|k| f64::from(k) / f64::from(denominator))
        .collect()
}

/// The canonical plotting sweeps: OAT with its bounds against `P`, the
/// linear and OAT curves for overlay, and LMG against `t` at `beta = 1.1`
/// and against `beta` at `t = 3.14`.
#[allow(clippy::approx_constant)]
pub fn figure_configs() -> Vec<(&'static str, SweepConfig)> {
    let p_note = "artifact defaults, not reference values: twice_j = 10 (J = 5), t = 1";
    let lmg_note = "artifact defaults, not reference values: twice_j = 10 (J = 5), lambda = 1";
    let vs_p = |model: ModelKind, label: &str, outputs: Option<Vec<Output>>| SweepConfig {
        model,
        axis: (model == ModelKind::Linear).then_some(Axis::X),
        twice_j: 10,
        lambda: None,
        beta_grid: None,
        p_grid: Some(ratio_grid(1, 49, 50)),
        t_grid: vec![1.0],
        outputs,
        output_path: Some(PathBuf::from(format!("{label}.csv"))),
        parallelism: None,
        label: Some(label.to_string()),
        notes: Some(p_note.to_string()),
    };
    let lmg = |label: &str, beta_grid: Vec<f64>, t_grid: Vec<f64>| SweepConfig {
        model: ModelKind::Lmg,
        axis: None,
        twice_j: 10,
        lambda: Some(1.0),
        beta_grid: Some(beta_grid),
        p_grid: None,
        t_grid,
        outputs: None,
        output_path: Some(PathBuf::from(format!("{label}.csv"))),
        parallelism: None,
        label: Some(label.to_string()),
        notes: Some(lmg_note.to_string()),
    };
    vec![
        (
            "oat_bounds_vs_p",
            vs_p(ModelKind::Oat, "oat_bounds_vs_p", None),
        ),
        (
            "linear_vs_p",
            vs_p(
                ModelKind::Linear,
                "linear_vs_p",
                Some(vec![Output::QfiGeneral, Output::ClosedForms]),
            ),
        ),
        (
            "oat_vs_p",
            vs_p(
                ModelKind::Oat,
                "oat_vs_p",
                Some(vec![Output::QfiGeneral, Output::ClosedForms]),
            ),
        ),
        (
            "lmg_vs_t",
            lmg("lmg_vs_t", vec![1.1], ratio_grid(0, 200, 20)),
        ),
        (
            "lmg_vs_beta",
            lmg("lmg_vs_beta", ratio_grid(1, 100, 20), vec![3.14]),
        ),
    ]
}

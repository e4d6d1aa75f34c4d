//! Single-point evaluation, parameter sweeps, threshold search and the
//! figure presets.
//!
//! Grid rows are ordered with the second axis outermost, so each value of
//! `axis2` forms one contiguous series over `axis1`.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::lyapunov::{lyapunov_residual, solve_lyapunov};
use crate::measures::{report_keys, CorrelationReport, MeasureValue, ZERO_CLAMP};
use crate::model::{assert_stable, DriftDiffusion, ParamsFile, SystemParams, MODE_LABELS, PARAMETER_KEYS};

/// Environment variable capping the sweep worker count.
pub const THREADS_ENV: &str = "MAGNONSTEER_THREADS";

/// Bisection depth of [`find_threshold`]: the bracket shrinks to `step / 2⁸`.
pub const BISECTION_STEPS: u32 = 8;

/// Steady-state covariance matrix of one parameter point, with modes
/// labelled `c`, `q`, `m`.
pub fn steady_state(params: &SystemParams) -> Result<(CovarianceMatrix, f64)> {
    params.validate()?;
    let dd = DriftDiffusion::from_params(params);
    assert_stable(&dd.drift)?;
    let v = solve_lyapunov(&dd.drift, &dd.diffusion)?;
    let residual = lyapunov_residual(&dd.drift, &dd.diffusion, v.entries());
    let v = CovarianceMatrix::with_labels(v.into_inner(), MODE_LABELS.map(String::from).to_vec())?;
    Ok((v, residual))
}

/// Derive, stabilise, solve and measure one parameter point.
pub fn run_point(params: &SystemParams) -> Result<CorrelationReport> {
    let (v, residual) = steady_state(params)?;
    let mut report = CorrelationReport::from_covariance(&v)?;
    report.lyapunov_residual = Some(residual);
    Ok(report)
}

/// Figure presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetId {
    Fig3a,
    Fig3b,
    Fig2,
    Fig5,
    Fig6,
    Fig10,
    Fig11,
}

impl PresetId {
    pub const ALL: [PresetId; 7] = [
        Self::Fig3a,
        Self::Fig3b,
        Self::Fig2,
        Self::Fig5,
        Self::Fig6,
        Self::Fig10,
        Self::Fig11,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fig3a => "fig3a",
            Self::Fig3b => "fig3b",
            Self::Fig2 => "fig2",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
            Self::Fig10 => "fig10",
            Self::Fig11 => "fig11",
        }
    }
}

impl FromStr for PresetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// One sweep axis, given either as `start`/`stop`/`count` or as an explicit
/// ascending `values` list. Values are in parameter-file units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub parameter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl Axis {
    pub fn linspace(parameter: &str, start: f64, stop: f64, count: usize) -> Self {
        Self {
            parameter: parameter.to_string(),
            start: Some(start),
            stop: Some(stop),
            count: Some(count),
            values: None,
        }
    }

    pub fn list(parameter: &str, values: Vec<f64>) -> Self {
        Self {
            parameter: parameter.to_string(),
            start: None,
            stop: None,
            count: None,
            values: Some(values),
        }
    }

    /// Grid points, after validation.
    pub fn points(&self) -> Result<Vec<f64>> {
        if !PARAMETER_KEYS.contains(&self.parameter.as_str()) {
            return Err(Error::InvalidSpec(format!(
                "unknown axis parameter `{}`",
                self.parameter
            )));
        }
        match (self.start, self.stop, self.count, &self.values) {
            (Some(start), Some(stop), Some(count), None) => {
                if count < 2 {
                    return Err(Error::InvalidSpec(format!("axis count must be ≥ 2, got {count}")));
                }
                if !(start < stop) || !start.is_finite() || !stop.is_finite() {
                    return Err(Error::InvalidSpec(format!(
                        "axis needs finite start < stop, got {start} and {stop}"
                    )));
                }
                let step = (stop - start) / (count - 1) as f64;
                Ok((0..count)
                    .map(|i| if i + 1 == count { stop } else { start + step * i as f64 })
                    .collect())
            }
            (None, None, None, Some(values)) => {
                if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidSpec("axis values must be finite and non-empty".into()));
                }
                if values.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidSpec("axis values must be strictly ascending".into()));
                }
                Ok(values.clone())
            }
            _ => Err(Error::InvalidSpec(
                "axis needs either start/stop/count or values".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSpecFile {
    #[serde(default)]
    base: ParamsFile,
    axis1: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    axis2: Option<Axis>,
    outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    preset_id: Option<PresetId>,
}

/// A 1-D or 2-D sweep over parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: SystemParams,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    /// Report keys to emit, see [`report_keys`].
    pub outputs: Vec<String>,
    pub preset_id: Option<PresetId>,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: SweepSpecFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        let spec = Self {
            base: SystemParams::from_file(&file.base)?,
            axis1: file.axis1,
            axis2: file.axis2,
            outputs: file.outputs,
            preset_id: file.preset_id,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        let file = SweepSpecFile {
            base: self.base.to_file(),
            axis1: self.axis1.clone(),
            axis2: self.axis2.clone(),
            outputs: self.outputs.clone(),
            preset_id: self.preset_id,
        };
        serde_json::to_string_pretty(&file).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.axis1.points()?;
        if let Some(axis2) = &self.axis2 {
            axis2.points()?;
            if axis2.parameter == self.axis1.parameter {
                return Err(Error::InvalidSpec("both axes sweep the same parameter".into()));
            }
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidSpec("no outputs requested".into()));
        }
        let known = report_keys();
        for key in &self.outputs {
            if !known.contains(key) {
                return Err(Error::UnknownMeasure(key.clone()));
            }
        }
        Ok(())
    }

    /// Parameter points in row order.
    pub fn grid(&self) -> Result<Vec<(Vec<f64>, SystemParams)>> {
        let xs = self.axis1.points()?;
        let outer = match &self.axis2 {
            Some(axis2) => axis2.points()?.into_iter().map(Some).collect(),
            None => vec![None],
        };
        let mut grid = Vec::with_capacity(xs.len() * outer.len());
        for y in outer {
            for &x in &xs {
                let mut p = self.base.clone();
                p.set(&self.axis1.parameter, x)?;
                let mut coords = vec![x];
                if let (Some(y), Some(axis2)) = (y, &self.axis2) {
                    p.set(&axis2.parameter, y)?;
                    coords.push(y);
                }
                grid.push((coords, p));
            }
        }
        Ok(grid)
    }
}

/// Outcome of one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    Unstable,
    Invalid,
    Failed,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Unstable => "unstable",
            Self::Invalid => "invalid",
            Self::Failed => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    /// One entry per requested output; empty unless the status is `Ok`.
    pub values: Vec<MeasureValue>,
    pub status: RowStatus,
    /// Full report, kept for property checks.
    pub report: Option<CorrelationReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axes: Vec<String>,
    pub outputs: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub comments: Vec<String>,
}

fn format_number(x: f64) -> String {
    format!("{x:.11e}")
}

impl SweepTable {
    /// Comma-separated text: optional `#` comment lines, a header row,
    /// then one line per grid point with a trailing `status` column.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let header: Vec<&str> = self
            .axes
            .iter()
            .chain(&self.outputs)
            .map(String::as_str)
            .chain(["status"])
            .collect();
        let _ = writeln!(out, "{}", header.join(","));
        for row in &self.rows {
            let mut fields: Vec<String> = row.coords.iter().map(|&x| format_number(x)).collect();
            if row.status == RowStatus::Ok {
                fields.extend(row.values.iter().map(|v| v.to_string()));
            } else {
                fields.extend(std::iter::repeat(String::new()).take(self.outputs.len()));
            }
            fields.push(row.status.as_str().to_string());
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    /// Values of one output column, `None` at non-`Ok` rows.
    pub fn column(&self, key: &str) -> Result<Vec<Option<f64>>> {
        let idx = self
            .outputs
            .iter()
            .position(|k| k == key)
            .ok_or_else(|| Error::UnknownMeasure(key.to_string()))?;
        Ok(self
            .rows
            .iter()
            .map(|r| r.values.get(idx).and_then(|v| v.as_f64()))
            .collect())
    }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn evaluate_row(coords: Vec<f64>, params: &SystemParams, outputs: &[String]) -> SweepRow {
    match run_point(params) {
        Ok(report) => {
            let values = outputs
                .iter()
                .map(|k| report.get(k).expect("outputs validated against report keys"))
                .collect();
            SweepRow {
                coords,
                values,
                status: RowStatus::Ok,
                report: Some(report),
            }
        }
        Err(e) => SweepRow {
            coords,
            values: Vec::new(),
            status: match e {
                Error::UnstableDrift { .. } => RowStatus::Unstable,
                Error::InvalidParameter { .. } => RowStatus::Invalid,
                _ => RowStatus::Failed,
            },
            report: None,
        },
    }
}

/// Evaluates every grid point, in parallel when `threads` allows it.
/// `None` uses [`thread_cap`] or else the rayon default.
pub fn run_sweep_with_threads(spec: &SweepSpec, threads: Option<usize>) -> Result<SweepTable> {
    spec.validate()?;
    let grid = spec.grid()?;
    let eval = || -> Vec<SweepRow> {
        grid.par_iter()
            .map(|(coords, p)| evaluate_row(coords.clone(), p, &spec.outputs))
            .collect()
    };
    let rows = match threads.or_else(thread_cap) {
        Some(1) => grid
            .iter()
            .map(|(coords, p)| evaluate_row(coords.clone(), p, &spec.outputs))
            .collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidSpec(format!("cannot start {n} workers: {e}")))?
            .install(eval),
        None => eval(),
    };
    let mut axes = vec![spec.axis1.parameter.clone()];
    if let Some(axis2) = &spec.axis2 {
        axes.push(axis2.parameter.clone());
    }
    Ok(SweepTable {
        axes,
        outputs: spec.outputs.clone(),
        rows,
        comments: spec_comments(spec),
    })
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    run_sweep_with_threads(spec, None)
}

fn spec_comments(spec: &SweepSpec) -> Vec<String> {
    let Some(id) = spec.preset_id else {
        return Vec::new();
    };
    let swept: Vec<&str> = std::iter::once(spec.axis1.parameter.as_str())
        .chain(spec.axis2.as_ref().map(|a| a.parameter.as_str()))
        .collect();
    let file = spec.base.to_file();
    let mut fixed = Vec::new();
    if !swept.contains(&"epsilon") {
        fixed.push(format!("epsilon={}", file.epsilon.unwrap_or_default()));
    }
    if !swept.contains(&"temperature") {
        fixed.push(format!("temperature={} K", file.temperature.unwrap_or_default()));
    }
    if let Some(r) = file.g_q_ratio {
        fixed.push(format!("g_q_ratio={r}"));
    }
    if let Some(g) = file.g_q {
        fixed.push(format!("g_q={g} Hz"));
    }
    fixed.push(format!("theta={}", file.theta.unwrap_or_default()));
    let mode = match spec.base.diffusion_mode {
        crate::model::DiffusionMode::Paper => "paper",
        crate::model::DiffusionMode::Consistent => "consistent",
    };
    fixed.push(format!("diffusion_mode={mode}"));
    vec![format!("preset {}", id.as_str()), format!("fixed: {}", fixed.join(", "))]
}

/// Which end of the axis the measure vanishes towards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Positive at low axis values, zero above the threshold.
    #[default]
    Falling,
    /// Zero below the threshold, positive above it.
    Rising,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "falling" => Ok(Self::Falling),
            "rising" => Ok(Self::Rising),
            other => Err(Error::InvalidSpec(format!(
                "direction must be `falling` or `rising`, got `{other}`"
            ))),
        }
    }
}

fn measure_at(spec: &SweepSpec, measure: &str, x: f64) -> Result<f64> {
    let mut p = spec.base.clone();
    p.set(&spec.axis1.parameter, x)?;
    run_point(&p)?
        .get(measure)?
        .as_f64()
        .ok_or_else(|| Error::UnknownMeasure(format!("{measure} is not numeric")))
}

/// Axis value where `measure` first reaches zero, refined by bisection
/// between the last positive and the first zero grid point.
///
/// The grid values must decrease monotonically (rising: increase) to zero
/// and stay zero afterwards.
pub fn find_threshold(spec: &SweepSpec, measure: &str, direction: Direction) -> Result<f64> {
    if spec.axis2.is_some() {
        return Err(Error::InvalidSpec("threshold search needs a 1-D spec".into()));
    }
    spec.base.validate()?;
    let mut xs = spec.axis1.points()?;
    let mut ys = Vec::with_capacity(xs.len());
    for &x in &xs {
        ys.push(measure_at(spec, measure, x)?);
    }
    if direction == Direction::Rising {
        xs.reverse();
        ys.reverse();
    }
    let is_zero = |y: f64| y <= ZERO_CLAMP;
    let first_zero = ys.iter().position(|&y| is_zero(y)).ok_or(Error::NoCrossing)?;
    if first_zero == 0 {
        return Err(Error::NoCrossing);
    }
    for i in 1..first_zero {
        if ys[i] > ys[i - 1] * (1.0 + 1e-9) {
            return Err(Error::NonMonotone { at: xs[i] });
        }
    }
    if let Some(i) = (first_zero..ys.len()).find(|&i| !is_zero(ys[i])) {
        return Err(Error::NonMonotone { at: xs[i] });
    }
    let (mut pos, mut zero) = (xs[first_zero - 1], xs[first_zero]);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (pos + zero);
        if is_zero(measure_at(spec, measure, mid)?) {
            zero = mid;
        } else {
            pos = mid;
        }
    }
    Ok(0.5 * (pos + zero))
}

fn ln_pairs() -> Vec<String> {
    ["LN_cm", "LN_cq", "LN_qm"].map(String::from).to_vec()
}

fn pairwise_steering() -> Vec<String> {
    [
        "G_c_to_q", "G_q_to_c", "G_c_to_m", "G_m_to_c", "G_q_to_m", "G_m_to_q",
    ]
    .map(String::from)
    .to_vec()
}

/// Fully populated spec of a figure preset.
///
/// Sweeps use 200 points; the feedback phase is `π` throughout.
pub fn preset(id: PresetId) -> SweepSpec {
    let mut base = SystemParams::default();
    let temperature_axis = |stop: f64| Axis::linspace("temperature", 0.0, stop, 200);
    let epsilon_axis = Axis::linspace("epsilon", 0.0, 0.95, 200);
    let (axis1, axis2, outputs) = match id {
        PresetId::Fig3a => (temperature_axis(0.8), None, ln_pairs()),
        PresetId::Fig3b => {
            base.epsilon = 0.86;
            (temperature_axis(0.8), None, ln_pairs())
        }
        PresetId::Fig2 => {
            base.epsilon = 0.86;
            let mut out = pairwise_steering();
            out.extend(["GA_cq", "GA_cm", "GA_qm"].map(String::from));
            out.extend(["class_cq", "class_cm", "class_qm"].map(String::from));
            out.extend(ln_pairs());
            (temperature_axis(1.0), None, out)
        }
        PresetId::Fig5 => (
            epsilon_axis,
            Some(Axis::list("temperature", vec![1e-4, 1e-2, 3e-2])),
            ["R_c", "R_q", "R_m", "R_min"].map(String::from).to_vec(),
        ),
        PresetId::Fig6 => (epsilon_axis, None, ln_pairs()),
        PresetId::Fig10 | PresetId::Fig11 => {
            base.epsilon = 0.90;
            base.set("g_q_ratio", 1.5).expect("known key");
            let mut out = pairwise_steering();
            out.extend(
                [
                    "G_c_to_qm", "G_q_to_cm", "G_m_to_cq", "G_qm_to_c", "G_cm_to_q", "G_cq_to_m",
                    "mono_out_c", "mono_out_q", "mono_out_m", "mono_in_c", "mono_in_q", "mono_in_m",
                ]
                .map(String::from),
            );
            if id == PresetId::Fig11 {
                out.extend(
                    [
                        "LN_c_qm", "LN_q_cm", "LN_m_cq", "R_c", "R_q", "R_m", "R_min",
                    ]
                    .map(String::from),
                );
                out.extend(ln_pairs());
            }
            (temperature_axis(1.0), None, out)
        }
    };
    SweepSpec {
        base,
        axis1,
        axis2,
        outputs,
        preset_id: Some(id),
    }
}

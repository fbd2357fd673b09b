//! One-dimensional parameter sweeps and their CSV output.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::config::{parse_key_values, ScenarioConfig};
use crate::cost::{expected_loss, CostModel, CostReport};
use crate::error::{Error, Result};
use crate::outage::{run_trials, Mode, OutageEstimate};

/// Column names of the sweep CSV, in order.
pub const CSV_HEADER: [&str; 10] = [
    "axis",
    "p_outage",
    "stderr_outage",
    "p_sec_block",
    "unsecured_fraction",
    "per_consumer_cost",
    "expected_loss",
    "trials",
    "seed",
    "mode",
];

/// Marker written to the `mode` column of points that could not be simulated.
pub const FAILED_MODE: &str = "failed";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    RateTarget,
    MGateways,
    NA,
    NJ,
    Theta,
    KBlocks,
}

impl Axis {
    pub const ALL: [Axis; 6] = [
        Axis::RateTarget,
        Axis::MGateways,
        Axis::NA,
        Axis::NJ,
        Axis::Theta,
        Axis::KBlocks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::RateTarget => "rate_target",
            Axis::MGateways => "m_gateways",
            Axis::NA => "n_a",
            Axis::NJ => "n_j",
            Axis::Theta => "theta",
            Axis::KBlocks => "k_blocks",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, Axis::MGateways | Axis::NA | Axis::NJ | Axis::KBlocks)
    }

    /// Copy of `base` with this axis set to `value`, re-validated.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let text = if self.is_integer() {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(Error::Validation {
                    key: self.name().into(),
                    message: format!("{value} is not a nonnegative integer"),
                });
            }
            format!("{}", value as u64)
        } else {
            value.to_string()
        };
        let mut cfg = base.clone();
        cfg.set(self.name(), &text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Validation {
                key: "axis".into(),
                message: format!(
                    "unknown axis `{s}`, expected one of {}",
                    Axis::ALL.map(Axis::name).join(", ")
                ),
            })
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which estimators a sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeSelection {
    #[default]
    Selection,
    Analytic,
    Both,
}

impl ModeSelection {
    pub fn modes(self) -> &'static [Mode] {
        match self {
            ModeSelection::Selection => &[Mode::Selection],
            ModeSelection::Analytic => &[Mode::Analytic],
            ModeSelection::Both => &[Mode::Selection, Mode::Analytic],
        }
    }
}

impl FromStr for ModeSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "selection" => Ok(Self::Selection),
            "analytic" => Ok(Self::Analytic),
            "both" => Ok(Self::Both),
            other => Err(Error::Validation {
                key: "mode".into(),
                message: format!("expected selection, analytic or both, got `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub base: ScenarioConfig,
    pub modes: ModeSelection,
}

/// Parses a comma-separated list of numbers.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>().map_err(|e| Error::Validation {
                key: "values".into(),
                message: format!("`{s}`: {e}"),
            })
        })
        .collect()
}

/// Contents of a sweep file: `axis`, `values` and optionally `mode`, in the
/// same `key = value` syntax as scenario files.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepFile {
    pub axis: Option<Axis>,
    pub values: Option<Vec<f64>>,
    pub mode: Option<ModeSelection>,
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = SweepFile::default();
        for (_, key, value) in parse_key_values(text)? {
            match key.as_str() {
                "axis" => out.axis = Some(value.parse()?),
                "values" => out.values = Some(parse_values(&value)?),
                "mode" => out.mode = Some(value.parse()?),
                other => {
                    return Err(Error::Validation {
                        key: other.into(),
                        message: "unknown sweep key".into(),
                    })
                }
            }
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// One CSV row: a sweep value under one estimator, or a failed point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub seed: u64,
    pub trials: usize,
    pub outcome: std::result::Result<(OutageEstimate, CostReport), String>,
    pub wall_time: Duration,
}

impl SweepRow {
    pub fn mode_label(&self) -> &'static str {
        match &self.outcome {
            Ok((est, _)) => est.mode.as_str(),
            Err(_) => FAILED_MODE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub axis: Axis,
    pub rows: Vec<SweepRow>,
}

impl SimulationReport {
    pub fn failures(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.outcome.is_err())
    }

    pub fn estimates(&self, mode: Mode) -> Vec<(f64, OutageEstimate, CostReport)> {
        self.rows
            .iter()
            .filter_map(|r| match &r.outcome {
                Ok((est, cost)) if est.mode == mode => Some((r.value, *est, *cost)),
                _ => None,
            })
            .collect()
    }
}

fn simulate_point(cfg: &ScenarioConfig, modes: &[Mode]) -> Result<Vec<(OutageEstimate, CostReport)>> {
    let tally = run_trials(cfg)?;
    let model = CostModel::from_config(cfg);
    modes
        .iter()
        .map(|&mode| {
            let est = tally.estimate(mode);
            let cost = expected_loss(&model, cfg.n_consumers, est.p_outage)?;
            Ok((est, cost))
        })
        .collect()
}

/// Simulates every point of the sweep in order. A failing point yields a
/// failed row and the sweep continues.
pub fn run_sweep(spec: &SweepSpec) -> SimulationReport {
    let modes = spec.modes.modes();
    let mut rows = Vec::new();
    for &value in &spec.values {
        let start = Instant::now();
        let result = spec
            .axis
            .apply(&spec.base, value)
            .and_then(|cfg| simulate_point(&cfg, modes));
        let wall_time = start.elapsed();
        match result {
            Ok(points) => rows.extend(points.into_iter().map(|(est, cost)| SweepRow {
                value,
                seed: spec.base.seed,
                trials: est.trials,
                outcome: Ok((est, cost)),
                wall_time,
            })),
            Err(err) => rows.push(SweepRow {
                value,
                seed: spec.base.seed,
                trials: spec.base.trials,
                outcome: Err(err.to_string()),
                wall_time,
            }),
        }
    }
    SimulationReport {
        axis: spec.axis,
        rows,
    }
}

/// Writes the report as CSV: header, then one row per point and estimator.
pub fn write_csv<W: Write>(report: &SimulationReport, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in &report.rows {
        let record: Vec<String> = match &row.outcome {
            Ok((est, cost)) => vec![
                row.value.to_string(),
                est.p_outage.to_string(),
                est.stderr_outage.to_string(),
                est.p_sec_block.to_string(),
                est.unsecured_fraction.to_string(),
                cost.per_consumer_cost.to_string(),
                cost.expected_loss.to_string(),
                row.trials.to_string(),
                row.seed.to_string(),
                row.mode_label().to_string(),
            ],
            Err(_) => {
                let mut r = vec![row.value.to_string()];
                r.extend(std::iter::repeat_n(String::new(), 6));
                r.extend([row.trials.to_string(), row.seed.to_string(), FAILED_MODE.to_string()]);
                r
            }
        };
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(report: &SimulationReport, path: impl AsRef<Path>) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::Validation {
            key: "report".into(),
            message: "nothing to write".into(),
        });
    }
    let file = std::fs::File::create(path)?;
    write_csv(report, std::io::BufWriter::new(file))
}

//! Empirical checks of the zero-one laws and dimension predictions.
//!
//! Finite-height hit fractions can only be consistent or inconsistent with a predicted
//! law at the heights tested; nothing here certifies "infinitely many" solutions.

mod boxcount;
mod sampling;

use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

pub use boxcount::{
    box_count_dimension, fit_line, slab_box_count, slab_volume, BoxCountPlan, BoxCountPoint,
    BoxDimensionEstimate, LineFit, SlabSelection, UNION_LIMIT,
};
pub use sampling::{
    check_sampling_regime, estimate_hit_fraction, estimate_hit_fractions, first_moment_bound,
    sample_matrix, scan_cost, wilson_interval, HitEstimate, WilsonInterval, DEFAULT_BUDGET, Z_95,
};

use crate::criteria::{classify, Classification, CriterionKind, CriterionSeries};
use crate::domain::{ApproxFunction, ProblemSpec, Variant};
use crate::error::{Error, Result};
use crate::forms::HeightWindow;

/// Version of the run-record layout.
pub const SCHEMA_VERSION: u32 = 1;

fn default_budget() -> u128 {
    DEFAULT_BUDGET
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanMode {
    MeasureTrend,
    DimensionBoxCount(BoxCountPlan),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlanRepr")]
pub struct ExperimentPlan {
    pub spec: ProblemSpec,
    pub seed: u64,
    /// Height windows, strictly increasing in `q_max`.
    pub windows: Vec<HeightWindow>,
    pub samples: u64,
    pub mode: PlanMode,
    pub budget: u128,
}

#[derive(Deserialize)]
struct PlanRepr {
    spec: ProblemSpec,
    seed: u64,
    windows: Vec<HeightWindow>,
    samples: u64,
    mode: PlanMode,
    #[serde(default = "default_budget")]
    budget: u128,
}

impl TryFrom<PlanRepr> for ExperimentPlan {
    type Error = Error;
    fn try_from(r: PlanRepr) -> Result<Self> {
        ExperimentPlan::new(r.spec, r.seed, r.windows, r.samples, r.mode, r.budget)
    }
}

impl ExperimentPlan {
    pub fn new(
        spec: ProblemSpec,
        seed: u64,
        windows: Vec<HeightWindow>,
        samples: u64,
        mode: PlanMode,
        budget: u128,
    ) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidPlan("samples must be at least 1".into()));
        }
        if matches!(mode, PlanMode::MeasureTrend) && windows.is_empty() {
            return Err(Error::InvalidPlan("a measure-trend plan needs at least one window".into()));
        }
        if windows.windows(2).any(|w| w[0].q_max() >= w[1].q_max() || w[0].q_min() > w[1].q_min()) {
            return Err(Error::InvalidPlan("height schedule must be strictly increasing".into()));
        }
        Ok(ExperimentPlan { spec, seed, windows, samples, mode, budget })
    }

    /// Windows `[q_min, Q]` for each `Q` in `tops`.
    pub fn measure_trend(spec: ProblemSpec, seed: u64, q_min: u64, tops: &[u64], samples: u64) -> Result<Self> {
        let windows = tops.iter().map(|&q| HeightWindow::new(q_min, q)).collect::<Result<_>>()?;
        ExperimentPlan::new(spec, seed, windows, samples, PlanMode::MeasureTrend, DEFAULT_BUDGET)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    /// Trend matches the predicted law at the heights tested.
    Consistent,
    /// Trend contradicts the predicted law at the heights tested.
    Inconsistent,
    /// No zero-one prediction to test.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    #[serde(flatten)]
    pub estimate: HitEstimate,
    pub first_moment_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub engine_version: String,
    pub plan: ExperimentPlan,
    pub windows: Vec<WindowResult>,
    pub criterion: CriterionKind,
    pub prediction: Classification,
    pub agreement: Agreement,
    /// Excluded from numeric comparisons.
    pub wall_time_secs: f64,
}

impl RunRecord {
    /// Equality on everything but wall time.
    pub fn same_numerics(&self, other: &RunRecord) -> bool {
        RunRecord { wall_time_secs: 0.0, ..self.clone() } == RunRecord { wall_time_secs: 0.0, ..other.clone() }
    }

    pub fn summary(&self) -> &'static str {
        match self.agreement {
            Agreement::Consistent => "consistent at heights tested",
            Agreement::Inconsistent => "inconsistent at heights tested",
            Agreement::NotApplicable => "no prediction to test",
        }
    }

    /// Rows `q_min,q_max,fraction,ci_low,ci_high`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.to_string());
        out.write_record(["q_min", "q_max", "fraction", "ci_low", "ci_high"]).map_err(io)?;
        for r in &self.windows {
            let e = &r.estimate;
            out.write_record([
                e.window.q_min().to_string(),
                e.window.q_max().to_string(),
                e.fraction.to_string(),
                e.ci.low.to_string(),
                e.ci.high.to_string(),
            ])
            .map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Zero-one series governing the spec's measure.
pub fn predicted_series(spec: &ProblemSpec) -> Result<CriterionSeries> {
    let kind = match (spec.variant(), spec.psi()) {
        (Variant::Classical, _) => CriterionKind::KhintchineGroshev,
        (Variant::Absolute, ApproxFunction::PerCoordinate(_)) => CriterionKind::DifferentRates,
        (Variant::Absolute, _) => CriterionKind::LebesgueAbsolute,
    };
    CriterionSeries::new(kind, spec.m(), spec.n(), spec.psi().clone(), None)
}

/// Divergent: fractions non-decreasing, last at least 1/2. Convergent: non-increasing,
/// last at most 1/2.
pub fn judge_trend(prediction: Classification, fractions: &[f64]) -> Agreement {
    let last = fractions.last().copied().unwrap_or(f64::NAN);
    let pairs = || fractions.windows(2);
    match prediction {
        Classification::Divergent => {
            if pairs().all(|w| w[0] <= w[1]) && last >= 0.5 {
                Agreement::Consistent
            } else {
                Agreement::Inconsistent
            }
        }
        Classification::Convergent => {
            if pairs().all(|w| w[0] >= w[1]) && last <= 0.5 {
                Agreement::Consistent
            } else {
                Agreement::Inconsistent
            }
        }
        Classification::Boundary | Classification::Unknown => Agreement::NotApplicable,
    }
}

/// Hit fractions across the plan's schedule, judged against the predicted zero-one law.
pub fn zero_one_verdict(plan: &ExperimentPlan, jobs: usize) -> Result<RunRecord> {
    if !matches!(plan.mode, PlanMode::MeasureTrend) {
        return Err(Error::InvalidPlan("zero-one verdicts need a measure-trend plan".into()));
    }
    let start = Instant::now();
    check_sampling_regime(&plan.spec)?;
    let series = predicted_series(&plan.spec)?;
    let verdict = classify(&series)?;
    let estimates = estimate_hit_fractions(&plan.spec, &plan.windows, plan.samples, plan.seed, jobs, plan.budget)?;
    let fractions: Vec<f64> = estimates.iter().map(|e| e.fraction).collect();
    let agreement = judge_trend(verdict.classification, &fractions);
    let windows = estimates
        .into_iter()
        .map(|estimate| {
            Ok(WindowResult {
                first_moment_bound: first_moment_bound(&plan.spec, estimate.window)?,
                estimate,
            })
        })
        .collect::<Result<_>>()?;
    Ok(RunRecord {
        schema_version: SCHEMA_VERSION,
        engine_version: crate::ENGINE_VERSION.to_string(),
        plan: plan.clone(),
        windows,
        criterion: verdict.kind,
        prediction: verdict.classification,
        agreement,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

pub fn persist_run(record: &RunRecord, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(record).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

/// Parse errors carry the line and column of the offending input.
pub fn load_run(path: &Path) -> Result<RunRecord> {
    let text = fs::read_to_string(path)?;
    let record: RunRecord = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if record.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "{}: unsupported schema version {}",
            path.display(),
            record.schema_version
        )));
    }
    Ok(record)
}

//! Systemness testing of count series.
//!
//! A series of yearly count vectors is turned into category distributions and
//! the next period is predicted two ways: by ordinary least-squares
//! extrapolation of each category's series (independent historical
//! development) and by the previous period's distribution (Markov property:
//! the current state is the best prediction of the next stage). Both
//! predictions are scored against the observation with the information of
//! the message; Markov winning corroborates the hypothesis that the
//! categories evolve as one system.
//!
//! Since the trend prediction depends on the first year of the fitting
//! window, every admissible start year is evaluated and the best-fitting one
//! is selected, which maximizes the chance of rejecting systemness.

use crate::entropy::{info_of_message, Distribution, EntropyError, InformationValue};
use crate::overlap::{decompose, ConsistencyReport, CountVector, DecomposePolicy, OverlapError};
use thiserror::Error;

/// Floor applied to extrapolated category values before renormalization, so
/// predictions never carry a zero cell into the information measure. Far
/// below any observable share of real count data.
pub const SMOOTHING_FLOOR: f64 = 1e-6;

/// Statistics within this many millibits of zero are indeterminate; matches
/// two-decimal millibit reporting.
pub const VERDICT_TOLERANCE_MBIT: f64 = 0.005;

#[derive(Debug, Error)]
pub enum SystemnessError {
    #[error("series has no years")]
    EmptyFrame,
    #[error("year {0} appears more than once in the series")]
    DuplicateYear(i32),
    #[error("count field {field} for year {year} is not finite")]
    NonFiniteCount { year: i32, field: &'static str },
    #[error("year {0} is not in the series")]
    YearNotInFrame(i32),
    #[error("Markov prediction of {target} needs year {}", target - 1)]
    MissingPreviousYear { target: i32 },
    #[error("fitting window [{start}, {}] is missing year {missing}", target - 1)]
    WindowIncomplete { start: i32, target: i32, missing: i32 },
    #[error("fitting window [{start}, {}] has fewer than 2 points", target - 1)]
    WindowTooShort { start: i32, target: i32 },
    #[error("no admissible start year before target {0}: need at least 2 consecutive preceding years")]
    NoAdmissibleStart(i32),
    #[error("all selected category cells are zero for year {0}")]
    DegenerateDistribution(i32),
    #[error("trend fit needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("trend fit is undefined for constant x values")]
    ConstantX,
    #[error(transparent)]
    Overlap(#[from] OverlapError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

/// Which exclusive cells form the categories under analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CategoryMode {
    /// U, I, G, UI, UG, IG, UIG — the seven occupied patterns.
    #[default]
    Seven,
    /// UI, UG, IG, UIG — bilateral plus trilateral relations.
    Four,
    /// UI, UG, IG — bilateral relations only.
    Three,
}

impl CategoryMode {
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            CategoryMode::Seven => &["U", "I", "G", "UI", "UG", "IG", "UIG"],
            CategoryMode::Four => &["UI", "UG", "IG", "UIG"],
            CategoryMode::Three => &["UI", "UG", "IG"],
        }
    }

    /// Indices into the cube's cell array, in label order.
    fn cell_indices(self) -> &'static [usize] {
        // index = u·4 + i·2 + g
        match self {
            CategoryMode::Seven => &[4, 2, 1, 6, 5, 3, 7],
            CategoryMode::Four => &[6, 5, 3, 7],
            CategoryMode::Three => &[6, 5, 3],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CategoryMode::Seven => "seven",
            CategoryMode::Four => "four",
            CategoryMode::Three => "three",
        }
    }
}

impl std::fmt::Display for CategoryMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A year-indexed ordered sequence of count vectors for one data source.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFrame {
    years: Vec<i32>,
    vectors: Vec<CountVector>,
    pub category_mode: CategoryMode,
}

impl SeriesFrame {
    /// Sorts the entries by year; duplicate years and non-finite counts are
    /// rejected.
    pub fn new(entries: Vec<(i32, CountVector)>, category_mode: CategoryMode) -> Result<Self, SystemnessError> {
        if entries.is_empty() {
            return Err(SystemnessError::EmptyFrame);
        }
        let mut entries = entries;
        entries.sort_by_key(|(year, _)| *year);
        for window in entries.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(SystemnessError::DuplicateYear(window[0].0));
            }
        }
        for (year, v) in &entries {
            let fields = [
                ("u", v.u),
                ("i", v.i),
                ("g", v.g),
                ("ui", v.ui),
                ("ug", v.ug),
                ("ig", v.ig),
                ("uig", v.uig),
                ("total", v.total.unwrap_or(0.0)),
            ];
            for (field, value) in fields {
                if !value.is_finite() {
                    return Err(SystemnessError::NonFiniteCount { year: *year, field });
                }
            }
        }
        let (years, vectors) = entries
            .into_iter()
            .map(|(year, v)| (year, v.with_year(year)))
            .unzip();
        Ok(SeriesFrame { years, vectors, category_mode })
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn get(&self, year: i32) -> Option<&CountVector> {
        self.years.iter().position(|&y| y == year).map(|idx| &self.vectors[idx])
    }

    pub fn entries(&self) -> impl Iterator<Item = (i32, &CountVector)> {
        self.years.iter().copied().zip(self.vectors.iter())
    }

    pub fn with_mode(mut self, mode: CategoryMode) -> Self {
        self.category_mode = mode;
        self
    }

    /// A Boolean-consistent copy of the frame: every vector is decomposed
    /// under the clamp policy and recomposed, and each year's corrections are
    /// returned alongside.
    pub fn clamped(&self) -> Result<(SeriesFrame, Vec<(i32, ConsistencyReport)>), SystemnessError> {
        let mut entries = Vec::with_capacity(self.years.len());
        let mut reports = Vec::new();
        for (year, v) in self.entries() {
            let (cube, report) = decompose(v, DecomposePolicy::Clamp)?;
            if !report.is_consistent() {
                reports.push((year, report));
            }
            entries.push((year, crate::overlap::recompose(&cube)));
        }
        Ok((SeriesFrame::new(entries, self.category_mode)?, reports))
    }
}

/// Exclusive-cell distribution over the frame's categories for one year,
/// normalized over the selected cells only.
pub fn observed_distribution(frame: &SeriesFrame, year: i32) -> Result<Distribution, SystemnessError> {
    let counts = category_counts(frame, year)?;
    if counts.iter().sum::<f64>() <= 0.0 {
        return Err(SystemnessError::DegenerateDistribution(year));
    }
    let labels = frame.category_mode.labels().iter().map(|s| s.to_string()).collect();
    Ok(Distribution::from_counts(&counts, Some(labels))?)
}

fn category_counts(frame: &SeriesFrame, year: i32) -> Result<Vec<f64>, SystemnessError> {
    let vector = frame.get(year).ok_or(SystemnessError::YearNotInFrame(year))?;
    let mut open = vector.clone();
    open.total = None;
    let (cube, _) = decompose(&open, DecomposePolicy::Strict)?;
    Ok(frame
        .category_mode
        .cell_indices()
        .iter()
        .map(|&idx| cube.cells()[idx])
        .collect())
}

/// The previous period's distribution, verbatim.
pub fn predict_markov(frame: &SeriesFrame, target_year: i32) -> Result<Distribution, SystemnessError> {
    if frame.get(target_year - 1).is_none() {
        return Err(SystemnessError::MissingPreviousYear { target: target_year });
    }
    observed_distribution(frame, target_year - 1)
}

/// Extrapolation method for the univariate per-category fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrendMethod {
    /// Ordinary least squares on the raw series.
    #[default]
    Linear,
    /// Ordinary least squares on the logarithm of the series.
    LogLinear,
}

impl TrendMethod {
    pub fn name(self) -> &'static str {
        match self {
            TrendMethod::Linear => "linear",
            TrendMethod::LogLinear => "log-linear",
        }
    }
}

/// What the univariate fits operate on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrendBasis {
    /// Relative frequencies per year.
    #[default]
    Shares,
    /// Raw exclusive-cell counts per year.
    Counts,
}

impl TrendBasis {
    pub fn name(self) -> &'static str {
        match self {
            TrendBasis::Shares => "shares",
            TrendBasis::Counts => "counts",
        }
    }
}

/// Knobs for the univariate time-series prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PredictOptions {
    pub method: TrendMethod,
    pub basis: TrendBasis,
}

fn ols(points: &[(f64, f64)]) -> Result<(f64, f64), SystemnessError> {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(x, _)| x).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() <= f64::EPSILON * sxx.abs().max(1.0) {
        return Err(SystemnessError::ConstantX);
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    Ok((slope, intercept))
}

/// Univariate time-series prediction with default options (linear fit on
/// shares).
pub fn predict_timeseries(frame: &SeriesFrame, target_year: i32, start_year: i32) -> Result<Distribution, SystemnessError> {
    predict_timeseries_with(frame, target_year, start_year, PredictOptions::default())
}

/// Per category, fits the window `[start_year, target_year − 1]` by ordinary
/// least squares and extrapolates to the target year; extrapolations are
/// floored at [`SMOOTHING_FLOOR`] and renormalized to a distribution.
pub fn predict_timeseries_with(
    frame: &SeriesFrame,
    target_year: i32,
    start_year: i32,
    options: PredictOptions,
) -> Result<Distribution, SystemnessError> {
    if start_year > target_year - 2 {
        return Err(SystemnessError::WindowTooShort { start: start_year, target: target_year });
    }
    for year in start_year..target_year {
        if frame.get(year).is_none() {
            return Err(SystemnessError::WindowIncomplete { start: start_year, target: target_year, missing: year });
        }
    }

    let n_categories = frame.category_mode.labels().len();
    let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n_categories];
    for year in start_year..target_year {
        let values = match options.basis {
            TrendBasis::Shares => observed_distribution(frame, year)?.probs().to_vec(),
            TrendBasis::Counts => category_counts(frame, year)?,
        };
        for (k, &v) in values.iter().enumerate() {
            let y = match options.method {
                TrendMethod::Linear => v,
                TrendMethod::LogLinear => v.max(SMOOTHING_FLOOR).ln(),
            };
            series[k].push((year as f64, y));
        }
    }

    let mut predicted = Vec::with_capacity(n_categories);
    for points in &series {
        let (slope, intercept) = ols(points)?;
        let raw = slope * target_year as f64 + intercept;
        let value = match options.method {
            TrendMethod::Linear => raw,
            TrendMethod::LogLinear => raw.exp(),
        };
        predicted.push(value.max(SMOOTHING_FLOOR));
    }
    let labels = frame.category_mode.labels().iter().map(|s| s.to_string()).collect();
    Ok(Distribution::from_counts(&predicted, Some(labels))?)
}

/// Evaluates the time-series prediction for every admissible start year and
/// returns the one that best fits the observed target distribution, ties
/// broken toward the earliest start.
pub fn best_start_prediction(frame: &SeriesFrame, target_year: i32) -> Result<(Distribution, i32), SystemnessError> {
    best_start_prediction_with(frame, target_year, PredictOptions::default())
}

pub fn best_start_prediction_with(
    frame: &SeriesFrame,
    target_year: i32,
    options: PredictOptions,
) -> Result<(Distribution, i32), SystemnessError> {
    let observed = observed_distribution(frame, target_year)?;
    let mut best: Option<(f64, i32, Distribution)> = None;
    for &start in frame.years() {
        if start > target_year - 2 {
            continue;
        }
        let prediction = match predict_timeseries_with(frame, target_year, start, options) {
            Ok(p) => p,
            Err(SystemnessError::WindowIncomplete { .. }) => continue,
            Err(e) => return Err(e),
        };
        let fit = info_of_message(&observed, &prediction)?.bits();
        match best {
            Some((best_fit, _, _)) if fit >= best_fit => {}
            _ => best = Some((fit, start, prediction)),
        }
    }
    match best {
        Some((_, start, prediction)) => Ok((prediction, start)),
        None => Err(SystemnessError::NoAdmissibleStart(target_year)),
    }
}

/// Outcome of the systemness test for one target year.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemnessResult {
    /// Prediction quality of the best univariate time-series extrapolation.
    pub i_timeseries: InformationValue,
    /// Prediction quality of the previous-period (Markov) rule.
    pub i_markov: InformationValue,
    /// `i_timeseries − i_markov`: positive when Markov predicts better.
    pub statistic: InformationValue,
    pub verdict: Verdict,
    pub chosen_start_year: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Corroborated,
    Rejected,
    Indeterminate,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Corroborated => "corroborated",
            Verdict::Rejected => "rejected",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl SystemnessResult {
    /// Forms the statistic and verdict from the two prediction qualities.
    pub fn from_information(i_timeseries: InformationValue, i_markov: InformationValue, chosen_start_year: i32) -> Self {
        let statistic = i_timeseries - i_markov;
        let verdict = if statistic.millibits().abs() < VERDICT_TOLERANCE_MBIT {
            Verdict::Indeterminate
        } else if statistic.millibits() > 0.0 {
            Verdict::Corroborated
        } else {
            Verdict::Rejected
        };
        SystemnessResult { i_timeseries, i_markov, statistic, verdict, chosen_start_year }
    }
}

/// Runs the systemness test with default prediction options.
pub fn systemness_test(frame: &SeriesFrame, target_year: i32) -> Result<SystemnessResult, SystemnessError> {
    systemness_test_with(frame, target_year, PredictOptions::default())
}

pub fn systemness_test_with(
    frame: &SeriesFrame,
    target_year: i32,
    options: PredictOptions,
) -> Result<SystemnessResult, SystemnessError> {
    let observed = observed_distribution(frame, target_year)?;
    let (ts_prediction, chosen_start) = best_start_prediction_with(frame, target_year, options)?;
    let markov_prediction = predict_markov(frame, target_year)?;
    let i_timeseries = info_of_message(&observed, &ts_prediction)?;
    let i_markov = info_of_message(&observed, &markov_prediction)?;
    Ok(SystemnessResult::from_information(i_timeseries, i_markov, chosen_start))
}

/// An ordinary least-squares line with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendFit {
    pub slope: f64,
    pub intercept: f64,
    /// 1 − SS_res/SS_tot; defined as 0 for a constant series.
    pub r_squared: f64,
    pub n_points: usize,
}

/// Fits a line to `(x, y)` pairs, optionally restricted to an inclusive
/// window on x.
pub fn trend_fit(points: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<TrendFit, SystemnessError> {
    let filtered: Vec<(f64, f64)> = match window {
        Some((lo, hi)) => points.iter().copied().filter(|&(x, _)| x >= lo && x <= hi).collect(),
        None => points.to_vec(),
    };
    if filtered.len() < 2 {
        return Err(SystemnessError::TooFewPoints(filtered.len()));
    }
    let (slope, intercept) = ols(&filtered)?;
    let n = filtered.len() as f64;
    let y_bar: f64 = filtered.iter().map(|(_, y)| y).sum::<f64>() / n;
    let ss_res: f64 = filtered.iter().map(|&(x, y)| (y - (slope * x + intercept)).powi(2)).sum();
    let ss_tot: f64 = filtered.iter().map(|&(_, y)| (y - y_bar).powi(2)).sum();
    let r_squared = if ss_tot <= 0.0 { 0.0 } else { 1.0 - ss_res / ss_tot };
    Ok(TrendFit { slope, intercept, r_squared, n_points: filtered.len() })
}

//! Percentile bootstrap limits and formula-vs-bootstrap comparisons.
//!
//! Replicate `r` draws from its own ChaCha stream (`seed`, stream `r`), and
//! every cell is resampled from a sorted snapshot of its counts, so output
//! depends neither on thread scheduling nor on the input article order.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ArticleSet, Corpus, FieldYearKey, WORLD};
use crate::indicators::{evaluate, CellPair, Indicator, IndicatorError};
use crate::seed::derive_seed;
use crate::intervals::{
    check_alpha, formula_interval, FormulaOptions, IntervalError, IntervalEstimate, Method,
};

/// Replicates for mean-based comparisons.
pub const MEAN_ITERATIONS: usize = 1000;
/// Replicates for proportion-based comparisons.
pub const PROPORTION_ITERATIONS: usize = 10_000;
const MIN_ITERATIONS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BootstrapError {
    #[error("need at least {MIN_ITERATIONS} bootstrap iterations, got {0}")]
    TooFewIterations(usize),
    #[error("percentile of an empty replicate list")]
    EmptyReplicates,
    #[error("quantile {0} outside [0, 1]")]
    InvalidQuantile(f64),
    #[error("empty slice: {0}")]
    EmptySlice(String),
    #[error("cell mismatch: {0}")]
    Mismatch(String),
    #[error("bootstrap interval has zero width")]
    ZeroWidth,
    #[error("cannot compare undefined intervals")]
    Undefined,
    #[error("no scenarios to compare")]
    NoScenarios,
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    pub iterations: usize,
    pub seed: u64,
    /// Resample world cells as well as group cells.
    pub resample_world: bool,
    pub alpha: f64,
}

impl BootstrapSpec {
    pub fn new(
        iterations: usize,
        seed: u64,
        resample_world: bool,
        alpha: f64,
    ) -> Result<Self, BootstrapError> {
        let spec = Self {
            iterations,
            seed,
            resample_world,
            alpha,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// 1000 replicates, world resampled.
    pub fn for_means(seed: u64) -> Self {
        Self {
            iterations: MEAN_ITERATIONS,
            seed,
            resample_world: true,
            alpha: 0.05,
        }
    }

    /// 10000 replicates, world resampled.
    pub fn for_proportions(seed: u64) -> Self {
        Self {
            iterations: PROPORTION_ITERATIONS,
            ..Self::for_means(seed)
        }
    }

    /// Default replicate count for an indicator.
    pub fn for_indicator(indicator: Indicator, seed: u64) -> Self {
        match indicator {
            Indicator::Mnlcs | Indicator::Mncs | Indicator::LundbergZ => Self::for_means(seed),
            _ => Self::for_proportions(seed),
        }
    }

    pub fn validate(&self) -> Result<(), BootstrapError> {
        if self.iterations < MIN_ITERATIONS {
            return Err(BootstrapError::TooFewIterations(self.iterations));
        }
        check_alpha(self.alpha)?;
        Ok(())
    }

    fn rng(&self, replicate: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replicate as u64);
        rng
    }
}

/// Group cells paired with their world cells over one scope.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSlice {
    /// Identifies the slice in comparison output.
    pub label: String,
    /// Aggregation key in comparison summaries (a data source, a grid arm).
    pub source: String,
    pairs: Vec<(ArticleSet, ArticleSet)>,
}

impl CorpusSlice {
    pub fn new(
        label: impl Into<String>,
        pairs: Vec<(ArticleSet, ArticleSet)>,
    ) -> Result<Self, BootstrapError> {
        let label = label.into();
        if pairs.is_empty() {
            return Err(BootstrapError::EmptySlice(label));
        }
        for (g, w) in &pairs {
            if g.key() != w.key() || !w.is_world() {
                return Err(BootstrapError::Mismatch(format!(
                    "({}, {}) paired with ({}, {})",
                    g.group(),
                    g.key(),
                    w.group(),
                    w.key()
                )));
            }
        }
        Ok(Self {
            source: label.clone(),
            label,
            pairs,
        })
    }

    /// All cells of `group` (optionally restricted to `keys`) with their world cells.
    pub fn from_corpus(
        corpus: &Corpus,
        group: &str,
        keys: Option<&[FieldYearKey]>,
    ) -> Result<Self, BootstrapError> {
        let pairs = corpus
            .group_cells(group)
            .filter(|c| keys.is_none_or(|k| k.contains(c.key())))
            .filter_map(|c| corpus.world(c.key()).map(|w| (c.clone(), w.clone())))
            .collect();
        Self::new(group, pairs)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn pairs(&self) -> &[(ArticleSet, ArticleSet)] {
        &self.pairs
    }

    pub fn cell_pairs(&self) -> Vec<CellPair<'_>> {
        self.pairs
            .iter()
            .map(|(group, world)| CellPair { group, world })
            .collect()
    }

    /// True when the group cells are the world cells themselves.
    pub fn group_is_world(&self) -> bool {
        self.pairs.iter().all(|(g, _)| g.group() == WORLD)
    }
}

fn sorted(counts: &[u64]) -> Vec<u64> {
    let mut v = counts.to_vec();
    v.sort_unstable();
    v
}

fn resample<T: Copy>(snapshot: &[T], rng: &mut ChaCha8Rng) -> Vec<T> {
    let n = snapshot.len();
    (0..n).map(|_| snapshot[rng.gen_range(0..n)]).collect()
}

/// Nearest-rank percentile of sorted values: the element at index
/// `ceil(q·N) − 1`, clamped to the list.
pub fn percentile(sorted: &[f64], q: f64) -> Result<f64, BootstrapError> {
    if sorted.is_empty() {
        return Err(BootstrapError::EmptyReplicates);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(BootstrapError::InvalidQuantile(q));
    }
    // tolerance absorbs q·N landing a hair above an integer (0.025 · 1000)
    let rank = (q * sorted.len() as f64 - 1e-9).ceil() as isize;
    let idx = (rank - 1).clamp(0, sorted.len() as isize - 1) as usize;
    Ok(sorted[idx])
}

fn interval_from_replicates(
    estimate: f64,
    mut values: Vec<f64>,
    undefined: usize,
    spec: &BootstrapSpec,
) -> Result<IntervalEstimate, BootstrapError> {
    let total = values.len() + undefined;
    let note = format!(
        "percentile=nearest-rank; replicates={total}; undefined={undefined}"
    );
    if undefined as f64 > spec.alpha / 2.0 * total as f64 || values.is_empty() {
        return Ok(IntervalEstimate::undefined(
            estimate,
            spec.alpha,
            Method::BootstrapPercentile,
            format!("too many undefined replicates; {note}"),
        ));
    }
    values.sort_by(f64::total_cmp);
    let lower = percentile(&values, spec.alpha / 2.0)?;
    let upper = percentile(&values, 1.0 - spec.alpha / 2.0)?;
    Ok(
        IntervalEstimate::new(estimate, lower, upper, spec.alpha, Method::BootstrapPercentile)
            .with_note(note),
    )
}

/// Percentile bootstrap limits for the mean of a single list of values.
pub fn bootstrap_mean(values: &[f64], spec: &BootstrapSpec) -> Result<IntervalEstimate, BootstrapError> {
    spec.validate()?;
    if values.is_empty() {
        return Err(BootstrapError::EmptySlice("values".into()));
    }
    let mut snapshot = values.to_vec();
    snapshot.sort_by(f64::total_cmp);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let reps: Vec<f64> = (0..spec.iterations)
        .into_par_iter()
        .map(|r| mean(&resample(&snapshot, &mut spec.rng(r))))
        .collect();
    interval_from_replicates(mean(values), reps, 0, spec)
}

/// Percentile bootstrap limits for one indicator over a slice.
///
/// Each group cell is resampled with replacement at its own size; world
/// cells too when `resample_world` is set, except when the group is the
/// world itself. Undefined replicates are
/// dropped, and the interval is undefined once they exceed `alpha/2` of
/// the total.
pub fn bootstrap_indicator(
    slice: &CorpusSlice,
    indicator: Indicator,
    spec: &BootstrapSpec,
) -> Result<IntervalEstimate, BootstrapError> {
    spec.validate()?;
    let point = evaluate(indicator, &slice.cell_pairs())?;
    if !point.defined {
        return Ok(IntervalEstimate::undefined(
            point.estimate,
            spec.alpha,
            Method::BootstrapPercentile,
            point.note.unwrap_or_default(),
        ));
    }
    let snapshots: Vec<(Vec<u64>, Vec<u64>)> = slice
        .pairs
        .iter()
        .map(|(g, w)| (sorted(g.counts()), sorted(w.counts())))
        .collect();
    let world_is_group = slice.group_is_world();

    let reps: Vec<Option<f64>> = (0..spec.iterations)
        .into_par_iter()
        .map(|r| {
            let mut rng = spec.rng(r);
            let cells: Vec<(ArticleSet, ArticleSet)> = slice
                .pairs
                .iter()
                .zip(&snapshots)
                .map(|((g, w), (gs, ws))| {
                    let group = g.with_counts(resample(gs, &mut rng));
                    // a world row against itself would be identically 1, so
                    // its baseline stays fixed whatever the spec says
                    let world = if spec.resample_world && !world_is_group {
                        w.with_counts(resample(ws, &mut rng))
                    } else {
                        w.clone()
                    };
                    (group, world)
                })
                .collect();
            let pairs: Vec<CellPair<'_>> = cells
                .iter()
                .map(|(group, world)| CellPair { group, world })
                .collect();
            evaluate(indicator, &pairs)
                .ok()
                .and_then(|v| v.value())
                .filter(|v| v.is_finite())
        })
        .collect();

    let undefined = reps.iter().filter(|v| v.is_none()).count();
    let values = reps.into_iter().flatten().collect();
    interval_from_replicates(point.estimate, values, undefined, spec)
}

/// Denominator used by [`compare_ci_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum WidthBasis {
    /// Full bootstrap width for both sides.
    #[default]
    Full,
    /// Each side divided by the matching bootstrap half-width.
    Half,
}

/// Relative half-width differences between a formula and a bootstrap
/// interval. Positive means the formula half is wider than the bootstrap half.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiComparison {
    pub lower_pct_diff: f64,
    pub upper_pct_diff: f64,
    /// Bootstrap full width.
    pub basis: f64,
    pub width_basis: WidthBasis,
}

pub fn compare_ci(
    formula: &IntervalEstimate,
    boot: &IntervalEstimate,
    point: f64,
) -> Result<CiComparison, BootstrapError> {
    compare_ci_with(formula, boot, point, WidthBasis::Full)
}

pub fn compare_ci_with(
    formula: &IntervalEstimate,
    boot: &IntervalEstimate,
    point: f64,
    width_basis: WidthBasis,
) -> Result<CiComparison, BootstrapError> {
    let ((fl, fu), (bl, bu)) = match (formula.limits(), boot.limits()) {
        (Some(f), Some(b)) => (f, b),
        _ => return Err(BootstrapError::Undefined),
    };
    let width = bu - bl;
    if width <= 0.0 {
        return Err(BootstrapError::ZeroWidth);
    }
    let (boot_lo, boot_hi) = (point - bl, bu - point);
    let (lo_den, hi_den) = match width_basis {
        WidthBasis::Full => (width, width),
        WidthBasis::Half => (boot_lo, boot_hi),
    };
    if lo_den <= 0.0 || hi_den <= 0.0 {
        return Err(BootstrapError::ZeroWidth);
    }
    Ok(CiComparison {
        lower_pct_diff: ((point - fl) - boot_lo) / lo_den,
        upper_pct_diff: ((fu - point) - boot_hi) / hi_den,
        basis: width,
        width_basis,
    })
}

/// One scenario × indicator comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub scenario: String,
    pub source: String,
    pub indicator: Indicator,
    pub point: f64,
    pub formula: IntervalEstimate,
    pub boot: IntervalEstimate,
    /// `None` where either interval is undefined or the bootstrap has zero width.
    pub comparison: Option<CiComparison>,
}

/// Signed, absolute and maximum differences per source and indicator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSummary {
    pub source: String,
    pub indicator: Indicator,
    pub count: usize,
    pub gaps: usize,
    pub lower_avg: f64,
    pub upper_avg: f64,
    pub lower_abs: f64,
    pub upper_abs: f64,
    pub lower_max: f64,
    pub upper_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub summaries: Vec<ComparisonSummary>,
}

impl ComparisonTable {
    pub fn from_rows(rows: Vec<ComparisonRow>) -> Self {
        let mut groups: BTreeMap<(String, Indicator), Vec<&ComparisonRow>> = BTreeMap::new();
        for row in &rows {
            groups
                .entry((row.source.clone(), row.indicator))
                .or_default()
                .push(row);
        }
        let summaries = groups
            .into_iter()
            .map(|((source, indicator), rows)| {
                let ok: Vec<&CiComparison> =
                    rows.iter().filter_map(|r| r.comparison.as_ref()).collect();
                let n = ok.len() as f64;
                let avg = |f: &dyn Fn(&CiComparison) -> f64| {
                    if ok.is_empty() {
                        f64::NAN
                    } else {
                        ok.iter().map(|c| f(c)).sum::<f64>() / n
                    }
                };
                let max = |f: &dyn Fn(&CiComparison) -> f64| {
                    ok.iter().map(|c| f(c).abs()).fold(f64::NAN, f64::max)
                };
                ComparisonSummary {
                    count: ok.len(),
                    gaps: rows.len() - ok.len(),
                    lower_avg: avg(&|c| c.lower_pct_diff),
                    upper_avg: avg(&|c| c.upper_pct_diff),
                    lower_abs: avg(&|c| c.lower_pct_diff.abs()),
                    upper_abs: avg(&|c| c.upper_pct_diff.abs()),
                    lower_max: max(&|c| c.lower_pct_diff),
                    upper_max: max(&|c| c.upper_pct_diff),
                    source,
                    indicator,
                }
            })
            .collect();
        Self { rows, summaries }
    }

    pub fn summary(&self, source: &str, indicator: Indicator) -> Option<&ComparisonSummary> {
        self.summaries
            .iter()
            .find(|s| s.source == source && s.indicator == indicator)
    }
}

/// Formula vs bootstrap over every scenario and indicator, with default
/// formula options at `spec.alpha` and full-width denominators. Each
/// scenario × indicator bootstraps from its own seed derived from
/// `spec.seed` and the scenario label.
pub fn comparison_suite(
    scenarios: &[CorpusSlice],
    indicators: &[Indicator],
    spec: &BootstrapSpec,
) -> Result<ComparisonTable, BootstrapError> {
    let opts = FormulaOptions {
        alpha: spec.alpha,
        ..FormulaOptions::default()
    };
    comparison_suite_with(scenarios, indicators, spec, &opts, WidthBasis::Full)
}

pub fn comparison_suite_with(
    scenarios: &[CorpusSlice],
    indicators: &[Indicator],
    spec: &BootstrapSpec,
    opts: &FormulaOptions,
    width_basis: WidthBasis,
) -> Result<ComparisonTable, BootstrapError> {
    if scenarios.is_empty() {
        return Err(BootstrapError::NoScenarios);
    }
    spec.validate()?;
    let mut rows = Vec::with_capacity(scenarios.len() * indicators.len());
    for slice in scenarios {
        let pairs = slice.cell_pairs();
        for &indicator in indicators {
            let value = evaluate(indicator, &pairs)?;
            let formula = formula_interval(indicator, &pairs, opts)?;
            // per-scenario streams: a shared seed would give every scenario
            // the same resampling indices and correlate their errors
            let own = BootstrapSpec {
                seed: derive_seed(spec.seed, &[slice.label.as_bytes(), indicator.tag().as_bytes()]),
                ..*spec
            };
            let boot = bootstrap_indicator(slice, indicator, &own)?;
            let comparison = compare_ci_with(&formula, &boot, value.estimate, width_basis).ok();
            rows.push(ComparisonRow {
                scenario: slice.label.clone(),
                source: slice.source.clone(),
                indicator,
                point: value.estimate,
                formula,
                boot,
                comparison,
            });
        }
    }
    Ok(ComparisonTable::from_rows(rows))
}

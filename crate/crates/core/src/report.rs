//! Per-group, per-scope indicator tables and their CSV form.
//!
//! Scopes are each publication year with all fields combined (`Y<year>`) and
//! everything combined (`ALL`). World rows are included.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use csv::{Terminator, WriterBuilder};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bootstrap::{bootstrap_indicator, BootstrapError, BootstrapSpec, ComparisonTable, CorpusSlice};
use crate::corpus::{apply_exclusion, sample_corpus, ArticleSet, Corpus, CorpusError, ExclusionPolicy, FieldYearKey, SampleSpec, WORLD};
use crate::indicators::{evaluate, CellPair, Indicator};
use crate::intervals::{
    fieller_interval, formula_interval, Continuity, ExpansionMode, FormulaOptions, IntervalError,
    IntervalEstimate, Method,
};
use crate::seed::derive_seed;

pub const CSV_HEADER: [&str; 10] = [
    "group", "scope", "n", "indicator", "estimate", "ci_lower", "ci_upper", "method", "defined", "notes",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Bootstrap(#[from] BootstrapError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

/// Which intervals to attach to each indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMethod {
    /// The analytic interval for each indicator.
    #[default]
    Formula,
    /// Fieller / heuristic expansion for MNLCS; analytic for the rest.
    Fieller,
    Bootstrap,
    /// One row per available method.
    All,
}

impl CiMethod {
    pub fn tag(self) -> &'static str {
        match self {
            CiMethod::Formula => "formula",
            CiMethod::Fieller => "fieller",
            CiMethod::Bootstrap => "bootstrap",
            CiMethod::All => "all",
        }
    }
}

impl std::str::FromStr for CiMethod {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [CiMethod::Formula, CiMethod::Fieller, CiMethod::Bootstrap, CiMethod::All]
            .into_iter()
            .find(|m| m.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ReportError::Config(format!("unknown ci method {s:?}")))
    }
}

/// Everything that determines a report's content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub indicators: Vec<Indicator>,
    pub ci_method: CiMethod,
    pub alpha: f64,
    pub continuity: Continuity,
    pub expansion: ExpansionMode,
    /// Replicates per bootstrap interval; `None` uses 1000 for mean-based
    /// and 10000 for proportion-based indicators.
    pub bootstrap_iters: Option<usize>,
    pub resample_world: bool,
    pub seed: u64,
    /// Sample every cell down to this size before computing.
    pub sample_size: Option<usize>,
    /// Small-field filter for the equalised indicators (EMNPC, EQ_PROP_CITED).
    pub exclusion: ExclusionPolicy,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            indicators: vec![Indicator::Mnlcs],
            ci_method: CiMethod::Formula,
            alpha: 0.05,
            continuity: Continuity::Auto,
            expansion: ExpansionMode::Literal,
            bootstrap_iters: None,
            resample_world: true,
            seed: 1,
            sample_size: None,
            exclusion: ExclusionPolicy::keep_all(),
        }
    }
}

impl ReportConfig {
    pub fn validate(&self) -> Result<(), ReportError> {
        if self.indicators.is_empty() {
            return Err(ReportError::Config("no indicators requested".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(ReportError::Config(format!("alpha {} outside (0, 0.5)", self.alpha)));
        }
        if self.sample_size == Some(0) {
            return Err(ReportError::Config("sample size must be positive".into()));
        }
        self.exclusion.validate()?;
        if let Some(iters) = self.bootstrap_iters {
            BootstrapSpec::new(iters, self.seed, self.resample_world, self.alpha)?;
        }
        Ok(())
    }

    fn formula_options(&self) -> FormulaOptions {
        FormulaOptions {
            alpha: self.alpha,
            continuity: self.continuity,
            expansion: self.expansion,
        }
    }

    fn bootstrap_spec(&self, indicator: Indicator, seed: u64) -> BootstrapSpec {
        let base = BootstrapSpec::for_indicator(indicator, seed);
        BootstrapSpec {
            iterations: self.bootstrap_iters.unwrap_or(base.iterations),
            resample_world: self.resample_world,
            alpha: self.alpha,
            ..base
        }
    }
}

/// Run description stored next to a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool: String,
    pub version: String,
    pub config: ReportConfig,
    pub percentile: String,
    pub float_format: String,
}

impl ReportMetadata {
    pub fn new(config: &ReportConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            percentile: "nearest-rank".into(),
            float_format: "6 significant digits".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub group: String,
    pub scope: String,
    pub n: usize,
    pub indicator: Indicator,
    pub estimate: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub method: Method,
    pub defined: bool,
    pub notes: String,
}

impl ReportRow {
    fn sort_key(&self) -> (&str, &str, &str, &str) {
        (&self.group, &self.scope, self.indicator.tag(), self.method.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorReport {
    pub rows: Vec<ReportRow>,
    pub metadata: ReportMetadata,
}

impl IndicatorReport {
    pub fn empty(config: &ReportConfig) -> Self {
        Self {
            rows: Vec::new(),
            metadata: ReportMetadata::new(config),
        }
    }

    pub fn find(&self, group: &str, scope: &str, indicator: Indicator) -> impl Iterator<Item = &ReportRow> {
        let (group, scope) = (group.to_string(), scope.to_string());
        self.rows
            .iter()
            .filter(move |r| r.group == group && r.scope == scope && r.indicator == indicator)
    }

    /// Groups in row order.
    pub fn groups(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r.group.as_str()).collect();
        set.into_iter().collect()
    }
}

fn scopes(cells: &[&ArticleSet]) -> Vec<(String, Vec<FieldYearKey>)> {
    let years: BTreeSet<u16> = cells.iter().map(|c| c.key().year()).collect();
    let mut out: Vec<(String, Vec<FieldYearKey>)> = years
        .into_iter()
        .map(|y| {
            let keys = cells.iter().filter(|c| c.key().year() == y).map(|c| c.key().clone()).collect();
            (format!("Y{y}"), keys)
        })
        .collect();
    out.push(("ALL".into(), cells.iter().map(|c| c.key().clone()).collect()));
    out
}

fn uses_exclusion(indicator: Indicator) -> bool {
    matches!(indicator, Indicator::Emnpc | Indicator::EqPropCited)
}

fn row(group: &str, scope: &str, n: usize, indicator: Indicator, ci: IntervalEstimate, extra: &[String]) -> ReportRow {
    let mut notes: Vec<String> = extra.to_vec();
    notes.extend(ci.note.clone());
    ReportRow {
        group: group.into(),
        scope: scope.into(),
        n,
        indicator,
        estimate: ci.estimate,
        lower: ci.lower.filter(|_| ci.defined),
        upper: ci.upper.filter(|_| ci.defined),
        method: ci.method,
        defined: ci.defined && ci.estimate.is_finite(),
        notes: notes.join("; "),
    }
}

/// Builds every (group, scope, indicator, method) row.
///
/// Undefined indicators and intervals become rows with `defined = false`;
/// only configuration and corpus errors abort.
pub fn build_report(corpus: &Corpus, config: &ReportConfig) -> Result<IndicatorReport, ReportError> {
    config.validate()?;
    let sampled;
    let corpus = match config.sample_size {
        Some(size) => {
            sampled = sample_corpus(corpus, SampleSpec::new(size, config.seed)?)?;
            &sampled
        }
        None => corpus,
    };
    let opts = config.formula_options();
    let mut groups: Vec<&str> = corpus.groups().into_iter().collect();
    groups.push(WORLD);

    let mut rows = Vec::new();
    for group in groups {
        let cells: Vec<&ArticleSet> = corpus
            .group_cells(group)
            .filter(|c| corpus.world(c.key()).is_some())
            .collect();
        if cells.is_empty() {
            continue;
        }
        let retained = if group == WORLD {
            cells.iter().map(|c| c.key().clone()).collect()
        } else {
            apply_exclusion(corpus, group, &config.exclusion)?
        };
        for (scope, keys) in scopes(&cells) {
            for &indicator in &config.indicators {
                let mut notes = Vec::new();
                let keys: Vec<FieldYearKey> = if uses_exclusion(indicator) {
                    let kept: Vec<FieldYearKey> = keys.iter().filter(|k| retained.contains(k)).cloned().collect();
                    if kept.len() < keys.len() {
                        notes.push(format!("{} small field(s) excluded", keys.len() - kept.len()));
                    }
                    kept
                } else {
                    keys.clone()
                };
                if keys.is_empty() {
                    let ci = IntervalEstimate::undefined(f64::NAN, config.alpha, Method::RiskRatio, "all fields excluded");
                    rows.push(row(group, &scope, 0, indicator, ci, &notes));
                    continue;
                }
                let owned: Vec<(ArticleSet, ArticleSet)> = keys
                    .iter()
                    .map(|k| {
                        let g = corpus.get(group, k).expect("group cell");
                        let w = corpus.world(k).expect("world cell");
                        (g.clone(), w.clone())
                    })
                    .collect();
                let pairs: Vec<CellPair<'_>> = owned.iter().map(|(group, world)| CellPair { group, world }).collect();
                let n = owned.iter().map(|(g, _)| g.len()).sum();

                let mut intervals = Vec::new();
                let analytic = matches!(config.ci_method, CiMethod::Formula | CiMethod::All)
                    || (config.ci_method == CiMethod::Fieller && indicator != Indicator::Mnlcs);
                if analytic {
                    intervals.push(formula_interval(indicator, &pairs, &opts)?);
                }
                if matches!(config.ci_method, CiMethod::Fieller | CiMethod::All) && indicator == Indicator::Mnlcs {
                    intervals.push(fieller_interval(&pairs, &opts)?);
                }
                if matches!(config.ci_method, CiMethod::Bootstrap | CiMethod::All) {
                    let seed = derive_seed(
                        config.seed,
                        &[group.as_bytes(), scope.as_bytes(), indicator.tag().as_bytes()],
                    );
                    let slice = CorpusSlice::new(group, owned.clone())?;
                    intervals.push(bootstrap_indicator(&slice, indicator, &config.bootstrap_spec(indicator, seed))?);
                }
                if intervals.is_empty() {
                    // unreachable with the methods above, kept for safety
                    let value = evaluate(indicator, &pairs).map_err(IntervalError::from)?;
                    intervals.push(IntervalEstimate::undefined(value.estimate, config.alpha, Method::NormalT, "no interval"));
                }
                for ci in intervals {
                    rows.push(row(group, &scope, n, indicator, ci, &notes));
                }
            }
        }
    }
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(IndicatorReport {
        rows,
        metadata: ReportMetadata::new(config),
    })
}

/// Six significant digits, fixed notation; empty for non-finite values.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0.00000".into();
    }
    let sci = format!("{x:.5e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (5 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ReportError + '_ {
    move |source| ReportError::Csv {
        path: path.display().to_string(),
        source,
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, ReportError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err(path))
}

/// Writes the report CSV.
pub fn write_csv(report: &IndicatorReport, path: impl AsRef<Path>) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record(CSV_HEADER).map_err(csv_err(path))?;
    for r in &report.rows {
        w.write_record([
            r.group.clone(),
            r.scope.clone(),
            r.n.to_string(),
            r.indicator.tag().to_string(),
            format_sig(r.estimate),
            opt(r.lower),
            opt(r.upper),
            r.method.tag().to_string(),
            r.defined.to_string(),
            r.notes.clone(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes the run metadata as pretty JSON.
pub fn write_metadata(report: &IndicatorReport, path: impl AsRef<Path>) -> Result<(), ReportError> {
    let path = path.as_ref();
    let json = serde_json::to_string_pretty(&report.metadata).expect("metadata serialises");
    fs::write(path, json + "\n").map_err(io_err(path))
}

/// Reads a CSV written by [`write_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ReportRow>, ReportError> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let parse_err = |message: String| ReportError::Parse {
        path: path.display().to_string(),
        message,
    };
    let num = |s: &str| -> Result<Option<f64>, ReportError> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| parse_err(format!("bad number {s:?}")))
        }
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err(path))?;
        if rec.len() != CSV_HEADER.len() {
            return Err(parse_err(format!("expected {} fields, got {}", CSV_HEADER.len(), rec.len())));
        }
        rows.push(ReportRow {
            group: rec[0].to_string(),
            scope: rec[1].to_string(),
            n: rec[2].parse().map_err(|_| parse_err(format!("bad n {:?}", &rec[2])))?,
            indicator: rec[3].parse().map_err(|e| parse_err(format!("{e}")))?,
            estimate: num(&rec[4])?.unwrap_or(f64::NAN),
            lower: num(&rec[5])?,
            upper: num(&rec[6])?,
            method: rec[7].parse().map_err(|e| parse_err(format!("{e}")))?,
            defined: rec[8] == *"true",
            notes: rec[9].to_string(),
        });
    }
    Ok(rows)
}

/// Writes the per-source summary of a formula-vs-bootstrap comparison.
pub fn write_comparison_csv(table: &ComparisonTable, path: impl AsRef<Path>) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record([
        "source", "indicator", "count", "gaps", "lower_avg", "upper_avg", "lower_abs", "upper_abs", "lower_max",
        "upper_max",
    ])
    .map_err(csv_err(path))?;
    for s in &table.summaries {
        w.write_record([
            s.source.clone(),
            s.indicator.tag().to_string(),
            s.count.to_string(),
            s.gaps.to_string(),
            format_sig(s.lower_avg),
            format_sig(s.upper_avg),
            format_sig(s.lower_abs),
            format_sig(s.upper_abs),
            format_sig(s.lower_max),
            format_sig(s.upper_max),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes one line per scenario × indicator comparison.
pub fn write_comparison_detail_csv(table: &ComparisonTable, path: impl AsRef<Path>) -> Result<(), ReportError> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record([
        "scenario", "source", "indicator", "estimate", "formula_method", "formula_lower", "formula_upper",
        "boot_lower", "boot_upper", "lower_pct_diff", "upper_pct_diff", "notes",
    ])
    .map_err(csv_err(path))?;
    for r in &table.rows {
        let notes: Vec<&str> = [r.formula.note.as_deref(), r.boot.note.as_deref()].into_iter().flatten().collect();
        w.write_record([
            r.scenario.clone(),
            r.source.clone(),
            r.indicator.tag().to_string(),
            format_sig(r.point),
            r.formula.method.tag().to_string(),
            opt(r.formula.limits().map(|l| l.0)),
            opt(r.formula.limits().map(|l| l.1)),
            opt(r.boot.limits().map(|l| l.0)),
            opt(r.boot.limits().map(|l| l.1)),
            opt(r.comparison.map(|c| c.lower_pct_diff)),
            opt(r.comparison.map(|c| c.upper_pct_diff)),
            notes.join(" | "),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

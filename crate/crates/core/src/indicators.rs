//! Point estimates: world baselines, per-article normalised scores and the
//! MNLCS / MNCS / z-score / proportion-cited / EMNPC / MNPC indicators.
//!
//! All logarithms are natural and all means arithmetic. Results keep full
//! floating-point precision; rounding is a presentation concern.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ArticleSet, FieldYearKey};
use crate::stats::{mean, sample_sd};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndicatorError {
    #[error("no input cells")]
    Empty,
    #[error("undefined normalisation: all world counts zero for {0}")]
    ZeroLogMean(FieldYearKey),
    #[error("undefined normalisation: world raw mean is zero for {0}")]
    ZeroRawMean(FieldYearKey),
    #[error("undefined normalisation: zero world proportion cited for {0}")]
    ZeroProportion(FieldYearKey),
    #[error("undefined normalisation: world log standard deviation is zero or undefined for {0}")]
    UndefinedSd(FieldYearKey),
    #[error("baseline key {baseline} does not match cell key {cell}")]
    KeyMismatch {
        cell: FieldYearKey,
        baseline: FieldYearKey,
    },
    #[error("cannot average scores with different transforms")]
    MixedTransforms,
    #[error("expected {expected:?} scores, got {found:?}")]
    WrongTransform {
        expected: Transform,
        found: Transform,
    },
    #[error("field/year {0} appears more than once in one scope")]
    DuplicateKey(FieldYearKey),
    #[error("group and world cells cover different field/years")]
    ScopeMismatch,
    #[error("unknown indicator {0:?}")]
    UnknownIndicator(String),
}

/// The indicators this crate computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Indicator {
    #[serde(rename = "MNLCS")]
    Mnlcs,
    #[serde(rename = "MNCS")]
    Mncs,
    #[serde(rename = "LUNDBERG_Z")]
    LundbergZ,
    #[serde(rename = "EMNPC")]
    Emnpc,
    #[serde(rename = "MNPC")]
    Mnpc,
    #[serde(rename = "PROP_CITED")]
    PropCited,
    #[serde(rename = "EQ_PROP_CITED")]
    EqPropCited,
}

impl Indicator {
    pub const ALL: [Indicator; 7] = [
        Indicator::Mnlcs,
        Indicator::Mncs,
        Indicator::LundbergZ,
        Indicator::Emnpc,
        Indicator::Mnpc,
        Indicator::PropCited,
        Indicator::EqPropCited,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Indicator::Mnlcs => "MNLCS",
            Indicator::Mncs => "MNCS",
            Indicator::LundbergZ => "LUNDBERG_Z",
            Indicator::Emnpc => "EMNPC",
            Indicator::Mnpc => "MNPC",
            Indicator::PropCited => "PROP_CITED",
            Indicator::EqPropCited => "EQ_PROP_CITED",
        }
    }

    /// True for indicators whose world value is 1 by construction.
    pub fn is_ratio(self) -> bool {
        matches!(
            self,
            Indicator::Mnlcs | Indicator::Mncs | Indicator::Emnpc | Indicator::Mnpc
        )
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Indicator {
    type Err = IndicatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let alias = match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "lundberg" => Some(Indicator::LundbergZ),
            "prop" => Some(Indicator::PropCited),
            "eq_prop" => Some(Indicator::EqPropCited),
            _ => None,
        };
        alias
            .or_else(|| {
                Indicator::ALL
                    .into_iter()
                    .find(|i| i.tag().eq_ignore_ascii_case(&s.replace('-', "_")))
            })
            .ok_or_else(|| IndicatorError::UnknownIndicator(s.to_string()))
    }
}

/// World statistics for one field/year that every indicator divides by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationBaseline {
    pub key: FieldYearKey,
    /// Mean of `ln(1 + c)`.
    pub log_mean: f64,
    /// Sample standard deviation of `ln(1 + c)`; `None` for a single article.
    pub log_sd: Option<f64>,
    pub raw_mean: f64,
    pub prop_cited: f64,
    pub n_world: usize,
}

pub fn compute_baseline(world: &ArticleSet) -> NormalizationBaseline {
    let logs: Vec<f64> = world.counts().iter().map(|&c| ln1p(c)).collect();
    let raw_mean = world.counts().iter().map(|&c| c as f64).sum::<f64>() / world.len() as f64;
    NormalizationBaseline {
        key: world.key().clone(),
        log_mean: mean(&logs),
        log_sd: sample_sd(&logs),
        raw_mean,
        prop_cited: world.cited() as f64 / world.len() as f64,
        n_world: world.len(),
    }
}

#[inline]
pub(crate) fn ln1p(c: u64) -> f64 {
    (c as f64).ln_1p()
}

/// How raw counts were turned into per-article scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transform {
    /// `ln(1 + c) / l`, averaged into MNLCS.
    LogRatio,
    /// `c / mean`, averaged into MNCS.
    RawRatio,
    /// `(ln(1 + c) - l) / s`, averaged into the z-score indicator.
    ZScore,
    /// `1 / p_w` for cited articles and 0 otherwise, averaged into MNPC.
    CitedReciprocal,
}

impl Transform {
    pub fn indicator(self) -> Indicator {
        match self {
            Transform::LogRatio => Indicator::Mnlcs,
            Transform::RawRatio => Indicator::Mncs,
            Transform::ZScore => Indicator::LundbergZ,
            Transform::CitedReciprocal => Indicator::Mnpc,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedScores {
    pub group: String,
    pub key: FieldYearKey,
    pub values: Vec<f64>,
    pub transform: Transform,
}

fn check_key(set: &ArticleSet, baseline: &NormalizationBaseline) -> Result<(), IndicatorError> {
    if set.key() != &baseline.key {
        return Err(IndicatorError::KeyMismatch {
            cell: set.key().clone(),
            baseline: baseline.key.clone(),
        });
    }
    Ok(())
}

fn scores(set: &ArticleSet, transform: Transform, f: impl Fn(u64) -> f64) -> NormalizedScores {
    NormalizedScores {
        group: set.group().to_string(),
        key: set.key().clone(),
        values: set.counts().iter().map(|&c| f(c)).collect(),
        transform,
    }
}

pub fn normalize_log(
    set: &ArticleSet,
    baseline: &NormalizationBaseline,
) -> Result<NormalizedScores, IndicatorError> {
    check_key(set, baseline)?;
    if baseline.log_mean <= 0.0 {
        return Err(IndicatorError::ZeroLogMean(baseline.key.clone()));
    }
    let l = baseline.log_mean;
    Ok(scores(set, Transform::LogRatio, |c| ln1p(c) / l))
}

pub fn normalize_lundberg(
    set: &ArticleSet,
    baseline: &NormalizationBaseline,
) -> Result<NormalizedScores, IndicatorError> {
    check_key(set, baseline)?;
    let s = match baseline.log_sd {
        Some(s) if s > 0.0 => s,
        _ => return Err(IndicatorError::UndefinedSd(baseline.key.clone())),
    };
    let l = baseline.log_mean;
    Ok(scores(set, Transform::ZScore, |c| (ln1p(c) - l) / s))
}

pub fn normalize_raw(
    set: &ArticleSet,
    baseline: &NormalizationBaseline,
) -> Result<NormalizedScores, IndicatorError> {
    check_key(set, baseline)?;
    if baseline.raw_mean <= 0.0 {
        return Err(IndicatorError::ZeroRawMean(baseline.key.clone()));
    }
    let m = baseline.raw_mean;
    Ok(scores(set, Transform::RawRatio, |c| c as f64 / m))
}

/// Per-article `r_i`: the reciprocal of the world proportion cited for
/// cited articles, 0 otherwise. Fails when the world proportion is zero.
pub fn normalize_cited_reciprocal(
    set: &ArticleSet,
    baseline: &NormalizationBaseline,
) -> Result<NormalizedScores, IndicatorError> {
    check_key(set, baseline)?;
    if baseline.prop_cited <= 0.0 {
        return Err(IndicatorError::ZeroProportion(baseline.key.clone()));
    }
    let r = 1.0 / baseline.prop_cited;
    Ok(scores(set, Transform::CitedReciprocal, |c| if c > 0 { r } else { 0.0 }))
}

/// An indicator value over a scope of field/years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorValue {
    pub group: String,
    pub scope: Vec<FieldYearKey>,
    pub indicator: Indicator,
    pub estimate: f64,
    /// Articles of the group in scope.
    pub n: usize,
    pub defined: bool,
    pub note: Option<String>,
}

impl IndicatorValue {
    fn undefined(
        group: &str,
        scope: Vec<FieldYearKey>,
        indicator: Indicator,
        n: usize,
        note: impl Into<String>,
    ) -> Self {
        Self {
            group: group.to_string(),
            scope,
            indicator,
            estimate: f64::NAN,
            n,
            defined: false,
            note: Some(note.into()),
        }
    }

    /// The estimate if defined.
    pub fn value(&self) -> Option<f64> {
        self.defined.then_some(self.estimate)
    }
}

fn distinct_keys<'a>(
    keys: impl Iterator<Item = &'a FieldYearKey>,
) -> Result<Vec<FieldYearKey>, IndicatorError> {
    let mut seen = BTreeSet::new();
    for k in keys {
        if !seen.insert(k.clone()) {
            return Err(IndicatorError::DuplicateKey(k.clone()));
        }
    }
    Ok(seen.into_iter().collect())
}

/// Arithmetic mean of all per-article scores over a scope. Log-ratio input
/// gives MNLCS, raw-ratio MNCS, z-scores the z-score average and cited
/// reciprocals MNPC.
pub fn mean_normalized(scores: &[NormalizedScores]) -> Result<IndicatorValue, IndicatorError> {
    let first = scores.first().ok_or(IndicatorError::Empty)?;
    if scores.iter().any(|s| s.transform != first.transform) {
        return Err(IndicatorError::MixedTransforms);
    }
    let scope = distinct_keys(scores.iter().map(|s| &s.key))?;
    let n: usize = scores.iter().map(|s| s.values.len()).sum();
    if n == 0 {
        return Err(IndicatorError::Empty);
    }
    let total: f64 = scores.iter().flat_map(|s| s.values.iter()).sum();
    Ok(IndicatorValue {
        group: first.group.clone(),
        scope,
        indicator: first.transform.indicator(),
        estimate: total / n as f64,
        n,
        defined: true,
        note: None,
    })
}

/// [`mean_normalized`] restricted to log-ratio scores.
pub fn mnlcs(scores: &[NormalizedScores]) -> Result<IndicatorValue, IndicatorError> {
    if let Some(s) = scores.iter().find(|s| s.transform != Transform::LogRatio) {
        return Err(IndicatorError::WrongTransform {
            expected: Transform::LogRatio,
            found: s.transform,
        });
    }
    mean_normalized(scores)
}

/// Cited and total article counts of one cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProportionSummary {
    pub group: String,
    pub key: FieldYearKey,
    pub cited: u64,
    pub total: u64,
}

impl ProportionSummary {
    pub fn new(
        group: impl Into<String>,
        key: FieldYearKey,
        cited: u64,
        total: u64,
    ) -> Result<Self, IndicatorError> {
        if total == 0 || cited > total {
            return Err(IndicatorError::Empty);
        }
        Ok(Self {
            group: group.into(),
            key,
            cited,
            total,
        })
    }

    pub fn from_set(set: &ArticleSet) -> Self {
        Self {
            group: set.group().to_string(),
            key: set.key().clone(),
            cited: set.cited() as u64,
            total: set.len() as u64,
        }
    }

    pub fn proportion(&self) -> f64 {
        self.cited as f64 / self.total as f64
    }
}

/// Overall proportion cited, `sum(cited) / sum(total)`.
pub fn proportion_cited(sets: &[ProportionSummary]) -> Result<IndicatorValue, IndicatorError> {
    let first = sets.first().ok_or(IndicatorError::Empty)?;
    let scope = distinct_keys(sets.iter().map(|s| &s.key))?;
    let cited: u64 = sets.iter().map(|s| s.cited).sum();
    let total: u64 = sets.iter().map(|s| s.total).sum();
    Ok(IndicatorValue {
        group: first.group.clone(),
        scope,
        indicator: Indicator::PropCited,
        estimate: cited as f64 / total as f64,
        n: total as usize,
        defined: true,
        note: None,
    })
}

/// Equalised proportion cited with the equalised per-cell size.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualisedProportion {
    pub value: IndicatorValue,
    /// Mean cell size, `sum(total) / |keys|`.
    pub effective_size: f64,
    /// Number of cells averaged.
    pub cells: usize,
}

impl EqualisedProportion {
    /// Combined sample size `effective_size * cells`, the plain sum of totals.
    pub fn combined_size(&self) -> f64 {
        self.effective_size * self.cells as f64
    }
}

/// Unweighted mean of per-cell proportions: every cell is treated as if it
/// had the group's mean cell size.
pub fn equalised_proportion(
    sets: &[ProportionSummary],
) -> Result<EqualisedProportion, IndicatorError> {
    let first = sets.first().ok_or(IndicatorError::Empty)?;
    let scope = distinct_keys(sets.iter().map(|s| &s.key))?;
    let k = sets.len() as f64;
    let estimate = sets.iter().map(ProportionSummary::proportion).sum::<f64>() / k;
    let total: u64 = sets.iter().map(|s| s.total).sum();
    Ok(EqualisedProportion {
        value: IndicatorValue {
            group: first.group.clone(),
            scope,
            indicator: Indicator::EqPropCited,
            estimate,
            n: total as usize,
            defined: true,
            note: None,
        },
        effective_size: total as f64 / k,
        cells: sets.len(),
    })
}

/// Pairs group and world summaries by key; both sides must cover the same keys.
fn pair_by_key<'a>(
    group: &'a [ProportionSummary],
    world: &'a [ProportionSummary],
) -> Result<Vec<(&'a ProportionSummary, &'a ProportionSummary)>, IndicatorError> {
    if group.is_empty() {
        return Err(IndicatorError::Empty);
    }
    let gkeys = distinct_keys(group.iter().map(|s| &s.key))?;
    let wkeys = distinct_keys(world.iter().map(|s| &s.key))?;
    if gkeys != wkeys {
        return Err(IndicatorError::ScopeMismatch);
    }
    Ok(group
        .iter()
        .map(|g| (g, world.iter().find(|w| w.key == g.key).expect("keys checked")))
        .collect())
}

/// Ratio of the group's equalised proportion to the world's.
pub fn emnpc(
    group: &[ProportionSummary],
    world: &[ProportionSummary],
) -> Result<IndicatorValue, IndicatorError> {
    pair_by_key(group, world)?;
    let g = equalised_proportion(group)?;
    let w = equalised_proportion(world)?;
    let label = group[0].group.as_str();
    if w.value.estimate <= 0.0 {
        return Ok(IndicatorValue::undefined(
            label,
            g.value.scope,
            Indicator::Emnpc,
            g.value.n,
            "zero world proportion cited in every field/year",
        ));
    }
    Ok(IndicatorValue {
        indicator: Indicator::Emnpc,
        estimate: g.value.estimate / w.value.estimate,
        ..g.value
    })
}

/// One field/year term of the MNPC weighted sum.
#[derive(Debug, Clone, PartialEq)]
pub struct MnpcTerm {
    pub group: ProportionSummary,
    pub world: ProportionSummary,
    /// `n_gf / n_g`.
    pub weight: f64,
    /// `p_gf / p_wf`, 1 for 0/0, `None` for k/0.
    pub ratio: Option<f64>,
}

impl MnpcTerm {
    pub fn is_zero_over_zero(&self) -> bool {
        self.group.cited == 0 && self.world.cited == 0
    }
}

pub fn mnpc_terms(
    group: &[ProportionSummary],
    world: &[ProportionSummary],
) -> Result<Vec<MnpcTerm>, IndicatorError> {
    let pairs = pair_by_key(group, world)?;
    let n_g: u64 = group.iter().map(|s| s.total).sum();
    Ok(pairs
        .into_iter()
        .map(|(g, w)| {
            let ratio = match (g.cited, w.cited) {
                (0, 0) => Some(1.0),
                (_, 0) => None,
                _ => Some(g.proportion() / w.proportion()),
            };
            MnpcTerm {
                group: g.clone(),
                world: w.clone(),
                weight: g.total as f64 / n_g as f64,
                ratio,
            }
        })
        .collect())
}

/// Size-weighted sum over field/years of `p_gf / p_wf`.
///
/// A 0/0 field ratio counts as 1 and is noted; a positive group proportion
/// over a zero world proportion leaves the result undefined.
pub fn mnpc(
    group: &[ProportionSummary],
    world: &[ProportionSummary],
) -> Result<IndicatorValue, IndicatorError> {
    let terms = mnpc_terms(group, world)?;
    let scope = distinct_keys(group.iter().map(|s| &s.key))?;
    let n: u64 = group.iter().map(|s| s.total).sum();
    let label = group[0].group.as_str();
    if let Some(t) = terms.iter().find(|t| t.ratio.is_none()) {
        return Ok(IndicatorValue::undefined(
            label,
            scope,
            Indicator::Mnpc,
            n as usize,
            format!("positive numerator over zero world proportion in {}", t.group.key),
        ));
    }
    let zero_zero: Vec<String> = terms
        .iter()
        .filter(|t| t.is_zero_over_zero())
        .map(|t| t.group.key.to_string())
        .collect();
    let estimate = terms
        .iter()
        .map(|t| t.weight * t.ratio.expect("checked"))
        .sum();
    Ok(IndicatorValue {
        group: label.to_string(),
        scope,
        indicator: Indicator::Mnpc,
        estimate,
        n: n as usize,
        defined: true,
        note: (!zero_zero.is_empty())
            .then(|| format!("0/0 field ratio replaced by 1 in {}", zero_zero.join(" "))),
    })
}

/// A group cell and the world cell it is normalised against.
#[derive(Debug, Clone, Copy)]
pub struct CellPair<'a> {
    pub group: &'a ArticleSet,
    pub world: &'a ArticleSet,
}

/// The per-article transform behind a mean-based indicator.
pub fn score_transform(indicator: Indicator) -> Option<Transform> {
    match indicator {
        Indicator::Mnlcs => Some(Transform::LogRatio),
        Indicator::Mncs => Some(Transform::RawRatio),
        Indicator::LundbergZ => Some(Transform::ZScore),
        _ => None,
    }
}

/// Normalises every group cell against its world cell.
pub fn normalized_scores(
    transform: Transform,
    pairs: &[CellPair<'_>],
) -> Result<Vec<NormalizedScores>, IndicatorError> {
    let normalize = match transform {
        Transform::LogRatio => normalize_log,
        Transform::RawRatio => normalize_raw,
        Transform::ZScore => normalize_lundberg,
        Transform::CitedReciprocal => normalize_cited_reciprocal,
    };
    pairs
        .iter()
        .map(|p| normalize(p.group, &compute_baseline(p.world)))
        .collect()
}

/// Computes one indicator over a scope of cell pairs. Normalisation
/// failures (an all-zero world cell, say) give an undefined value rather
/// than an error; structural problems are still errors.
pub fn evaluate(indicator: Indicator, pairs: &[CellPair<'_>]) -> Result<IndicatorValue, IndicatorError> {
    let first = pairs.first().ok_or(IndicatorError::Empty)?;
    for p in pairs {
        if p.group.key() != p.world.key() {
            return Err(IndicatorError::KeyMismatch {
                cell: p.group.key().clone(),
                baseline: p.world.key().clone(),
            });
        }
    }
    if let Some(transform) = score_transform(indicator) {
        return match normalized_scores(transform, pairs) {
            Ok(all) => mean_normalized(&all),
            Err(e @ (IndicatorError::ZeroLogMean(_)
            | IndicatorError::ZeroRawMean(_)
            | IndicatorError::UndefinedSd(_)
            | IndicatorError::ZeroProportion(_))) => {
                let scope = distinct_keys(pairs.iter().map(|p| p.group.key()))?;
                let n = pairs.iter().map(|p| p.group.len()).sum();
                Ok(IndicatorValue::undefined(first.group.group(), scope, indicator, n, e.to_string()))
            }
            Err(e) => Err(e),
        };
    }
    let group: Vec<ProportionSummary> = pairs.iter().map(|p| ProportionSummary::from_set(p.group)).collect();
    let world: Vec<ProportionSummary> = pairs.iter().map(|p| ProportionSummary::from_set(p.world)).collect();
    match indicator {
        Indicator::Emnpc => emnpc(&group, &world),
        Indicator::Mnpc => mnpc(&group, &world),
        Indicator::PropCited => proportion_cited(&group),
        Indicator::EqPropCited => Ok(equalised_proportion(&group)?.value),
        _ => unreachable!(),
    }
}

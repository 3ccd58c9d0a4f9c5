//! Analytic confidence limits.
//!
//! * [`mnlcs_normal_ci`]: Student's t limits for a mean of normalised scores,
//!   treating the world baselines as exact.
//! * [`fieller_ci`]: Fieller limits for the ratio of a group and a world mean
//!   of `ln(1 + c)` within one field/year, when the world is itself a sample.
//! * [`heuristic_expanded_ci`]: widens a multi-cell normal interval by the
//!   size-weighted average per-cell Fieller expansion.
//! * [`wilson_ci`]: Wilson score limits for a proportion.
//! * [`risk_ratio_ci`] and [`mnpc_field_ci`]: log-scale risk-ratio limits for
//!   EMNPC and for single-field MNPC ratios.
//! * [`mnpc_combined_ci`]: size-weighted sum of per-field MNPC limits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::ArticleSet;
use crate::indicators::{
    equalised_proportion, evaluate, mnpc_terms, normalized_scores, score_transform, CellPair, Indicator,
    IndicatorError, ProportionSummary, Transform,
};
use crate::stats::{mean, sample_sd, t_critical, z_critical};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("need at least two values, got {0}")]
    TooFewValues(usize),
    #[error("world mean must be positive, got {0}")]
    NonPositiveWorldMean(f64),
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("field weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("no input cells")]
    Empty,
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error("unknown {kind} {value:?}")]
    Unknown { kind: &'static str, value: String },
}

pub(crate) fn check_alpha(alpha: f64) -> Result<(), IntervalError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(IntervalError::InvalidAlpha(alpha))
    }
}

/// How an interval was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "NORMAL_T")]
    NormalT,
    #[serde(rename = "FIELLER")]
    Fieller,
    #[serde(rename = "HEURISTIC_EXPANSION")]
    HeuristicExpansion,
    #[serde(rename = "WILSON")]
    Wilson,
    #[serde(rename = "RISK_RATIO")]
    RiskRatio,
    #[serde(rename = "MNPC_WEIGHTED")]
    MnpcWeighted,
    #[serde(rename = "BOOTSTRAP_PERCENTILE")]
    BootstrapPercentile,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::NormalT,
        Method::Fieller,
        Method::HeuristicExpansion,
        Method::Wilson,
        Method::RiskRatio,
        Method::MnpcWeighted,
        Method::BootstrapPercentile,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::NormalT => "NORMAL_T",
            Method::Fieller => "FIELLER",
            Method::HeuristicExpansion => "HEURISTIC_EXPANSION",
            Method::Wilson => "WILSON",
            Method::RiskRatio => "RISK_RATIO",
            Method::MnpcWeighted => "MNPC_WEIGHTED",
            Method::BootstrapPercentile => "BOOTSTRAP_PERCENTILE",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = IntervalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| IntervalError::Unknown {
                kind: "method",
                value: s.to_string(),
            })
    }
}

/// A point estimate with confidence limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub estimate: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub alpha: f64,
    pub method: Method,
    pub defined: bool,
    /// Fieller curvature term.
    pub h: Option<f64>,
    pub note: Option<String>,
}

impl IntervalEstimate {
    pub fn new(estimate: f64, lower: f64, upper: f64, alpha: f64, method: Method) -> Self {
        Self {
            estimate,
            lower: Some(lower),
            upper: Some(upper),
            alpha,
            method,
            defined: true,
            h: None,
            note: None,
        }
    }

    pub fn undefined(estimate: f64, alpha: f64, method: Method, note: impl Into<String>) -> Self {
        Self {
            estimate,
            lower: None,
            upper: None,
            alpha,
            method,
            defined: false,
            h: None,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        let note = note.into();
        self.note = Some(match self.note.take() {
            Some(old) => format!("{old}; {note}"),
            None => note,
        });
        self
    }

    /// `(lower, upper)` when the interval is defined.
    pub fn limits(&self) -> Option<(f64, f64)> {
        match (self.defined, self.lower, self.upper) {
            (true, Some(l), Some(u)) => Some((l, u)),
            _ => None,
        }
    }

    pub fn width(&self) -> Option<f64> {
        self.limits().map(|(l, u)| u - l)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.limits().is_some_and(|(l, u)| l <= x && x <= u)
    }
}

/// Mean, sample sd and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleMoments {
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
    pub n: usize,
}

impl SampleMoments {
    pub fn new(mean: f64, sd: f64, n: usize) -> Result<Self, IntervalError> {
        if n < 2 {
            return Err(IntervalError::TooFewValues(n));
        }
        if !(sd >= 0.0) || !mean.is_finite() {
            return Err(IntervalError::InvalidCounts(format!("mean {mean}, sd {sd}")));
        }
        Ok(Self {
            mean,
            sd,
            se: sd / (n as f64).sqrt(),
            n,
        })
    }

    /// Builds moments from a mean, a standard error and `n`.
    pub fn from_se(mean: f64, se: f64, n: usize) -> Result<Self, IntervalError> {
        Self::new(mean, se * (n as f64).sqrt(), n)
    }

    pub fn from_values(values: &[f64]) -> Result<Self, IntervalError> {
        let sd = sample_sd(values).ok_or(IntervalError::TooFewValues(values.len()))?;
        Self::new(mean(values), sd, values.len())
    }
}

/// `mean -+ t(n-1) * s / sqrt(n)`.
pub fn normal_ci(moments: &SampleMoments, alpha: f64) -> Result<IntervalEstimate, IntervalError> {
    check_alpha(alpha)?;
    let half = t_critical(moments.n as u64 - 1, alpha) * moments.se;
    Ok(IntervalEstimate::new(
        moments.mean,
        moments.mean - half,
        moments.mean + half,
        alpha,
        Method::NormalT,
    ))
}

/// Normal-theory limits for the mean of a concatenation of normalised scores.
pub fn mnlcs_normal_ci(values: &[f64], alpha: f64) -> Result<IntervalEstimate, IntervalError> {
    normal_ci(&SampleMoments::from_values(values)?, alpha)
}

/// Fieller limits for `group.mean / world.mean`, where the moments are of
/// the `ln(1 + c)` values of one field/year. Undefined when `h >= 1`.
pub fn fieller_ci(
    group: &SampleMoments,
    world: &SampleMoments,
    alpha: f64,
) -> Result<IntervalEstimate, IntervalError> {
    check_alpha(alpha)?;
    if !(world.mean > 0.0) {
        return Err(IntervalError::NonPositiveWorldMean(world.mean));
    }
    if group.n < 2 || world.n < 2 {
        return Err(IntervalError::TooFewValues(group.n.min(world.n)));
    }
    let t = t_critical((group.n + world.n - 2) as u64, alpha);
    let ratio = group.mean / world.mean;
    let rel_w = world.se / world.mean;
    let h = (t * rel_w).powi(2);
    if h >= 1.0 {
        let mut out = IntervalEstimate::undefined(
            ratio,
            alpha,
            Method::Fieller,
            format!("confidence limits are infinite (h = {h:.4} >= 1)"),
        );
        out.h = Some(h);
        return Ok(out);
    }
    let centre = ratio / (1.0 - h);
    // (ratio / (1-h)) * sqrt((1-h) se_g^2/m_g^2 + se_w^2/m_w^2), rearranged
    // so that a zero group mean stays finite
    let se = ((1.0 - h) * group.se.powi(2) + group.mean.powi(2) * rel_w.powi(2)).sqrt()
        / (world.mean * (1.0 - h));
    let mut out = IntervalEstimate::new(ratio, centre - t * se, centre + t * se, alpha, Method::Fieller);
    out.h = Some(h);
    Ok(out)
}

/// How the combined normal interval is widened by the average expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionMode {
    /// `L - (AveExp + 1)(mean - L)`, as printed; doubles the interval even
    /// when no expansion is needed.
    #[default]
    Literal,
    /// `mean - (AveExp + 1)(mean - L)`; reduces to the plain interval when
    /// the expansion is zero.
    ExpandFromMean,
}

impl ExpansionMode {
    pub fn tag(self) -> &'static str {
        match self {
            ExpansionMode::Literal => "literal",
            ExpansionMode::ExpandFromMean => "expand_from_mean",
        }
    }
}

impl FromStr for ExpansionMode {
    type Err = IntervalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "literal" => Ok(Self::Literal),
            "expand_from_mean" => Ok(Self::ExpandFromMean),
            _ => Err(IntervalError::Unknown {
                kind: "expansion mode",
                value: s.to_string(),
            }),
        }
    }
}

/// Normal and Fieller intervals of one field/year cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellIntervals {
    pub size: usize,
    pub normal: IntervalEstimate,
    pub fieller: IntervalEstimate,
    /// Mean normalised score of the cell.
    pub mean: f64,
}

/// `(numerator / denominator)`, treating 0/0 as no expansion.
fn expansion_rate(numerator: f64, denominator: f64) -> Option<f64> {
    if denominator > 0.0 {
        Some(numerator / denominator)
    } else if numerator.abs() <= 1e-12 {
        Some(0.0)
    } else {
        None
    }
}

/// Widens the combined normal interval by the size-weighted average
/// normal-to-Fieller expansion of the individual cells, separately per side.
pub fn heuristic_expanded_ci(
    per_cell: &[CellIntervals],
    combined: &IntervalEstimate,
    combined_mean: f64,
    mode: ExpansionMode,
) -> Result<IntervalEstimate, IntervalError> {
    if per_cell.is_empty() {
        return Err(IntervalError::Empty);
    }
    let alpha = combined.alpha;
    let undefined = |why: String| {
        IntervalEstimate::undefined(combined_mean, alpha, Method::HeuristicExpansion, why)
            .with_note(format!("mode={}", mode.tag()))
    };
    let Some((lower, upper)) = combined.limits() else {
        return Ok(undefined("combined normal interval undefined".into()));
    };
    let n: usize = per_cell.iter().map(|c| c.size).sum();
    let (mut exp_lower, mut exp_upper) = (0.0, 0.0);
    for (j, cell) in per_cell.iter().enumerate() {
        let (Some((nl, nu)), Some((fl, fu))) = (cell.normal.limits(), cell.fieller.limits()) else {
            return Ok(undefined(format!("cell {j} has an undefined interval")));
        };
        let (Some(el), Some(eu)) = (
            expansion_rate(nl - fl, cell.mean - nl),
            expansion_rate(fu - nu, nu - cell.mean),
        ) else {
            return Ok(undefined(format!("cell {j} has a zero-width normal interval")));
        };
        exp_lower += cell.size as f64 * el;
        exp_upper += cell.size as f64 * eu;
    }
    exp_lower /= n as f64;
    exp_upper /= n as f64;
    let (lo_anchor, up_anchor) = match mode {
        ExpansionMode::Literal => (lower, upper),
        ExpansionMode::ExpandFromMean => (combined_mean, combined_mean),
    };
    let lo = lo_anchor - (exp_lower + 1.0) * (combined_mean - lower);
    let up = up_anchor + (exp_upper + 1.0) * (upper - combined_mean);
    Ok(IntervalEstimate::new(combined_mean, lo, up, alpha, Method::HeuristicExpansion).with_note(
        format!(
            "mode={}; ave_exp_lower={exp_lower:.6}; ave_exp_upper={exp_upper:.6}",
            mode.tag()
        ),
    ))
}

fn wilson_limits(p: f64, n: f64, z: f64) -> (f64, f64) {
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Wilson score interval for `cited / total`.
pub fn wilson_ci(cited: u64, total: u64, alpha: f64) -> Result<IntervalEstimate, IntervalError> {
    check_alpha(alpha)?;
    if total == 0 || cited > total {
        return Err(IntervalError::InvalidCounts(format!("{cited} of {total}")));
    }
    let p = cited as f64 / total as f64;
    let (mut lo, mut up) = wilson_limits(p, total as f64, z_critical(alpha));
    if cited == 0 {
        lo = 0.0;
    }
    if cited == total {
        up = 1.0;
    }
    Ok(IntervalEstimate::new(p, lo, up, alpha, Method::Wilson))
}

/// Wilson interval for an equalised proportion `p_hat` over `combined_size`
/// articles: the cited count is `round(p_hat * combined_size)`.
pub fn equalised_wilson_ci(
    p_hat: f64,
    combined_size: u64,
    alpha: f64,
) -> Result<IntervalEstimate, IntervalError> {
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(IntervalError::InvalidCounts(format!("proportion {p_hat}")));
    }
    let cited = (p_hat * combined_size as f64).round() as u64;
    let mut ci = wilson_ci(cited.min(combined_size), combined_size, alpha)?;
    ci.estimate = p_hat;
    Ok(ci.with_note(format!("equalised counts {cited} of {combined_size}")))
}

/// Cited count out of a total; fractional counts arise from equalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binomial {
    pub cited: f64,
    pub total: f64,
}

impl Binomial {
    pub fn new(cited: f64, total: f64) -> Result<Self, IntervalError> {
        if !(total > 0.0) || !(cited >= 0.0) || cited > total {
            return Err(IntervalError::InvalidCounts(format!("{cited} of {total}")));
        }
        Ok(Self { cited, total })
    }

    pub fn counts(cited: u64, total: u64) -> Result<Self, IntervalError> {
        Self::new(cited as f64, total as f64)
    }

    pub fn proportion(&self) -> f64 {
        self.cited / self.total
    }

    /// `(cited, total)` as used inside the variance term: 0.5 is added to
    /// both the cited and the uncited count when the correction is on.
    fn corrected(&self, continuity: bool) -> (f64, f64) {
        if continuity {
            (self.cited + 0.5, self.total + 1.0)
        } else {
            (self.cited, self.total)
        }
    }
}

/// When to apply the 0.5 continuity correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Continuity {
    /// On when any cited count involved is below 5.
    #[default]
    Auto,
    On,
    Off,
}

impl Continuity {
    pub fn resolve(self, cited: &[f64]) -> bool {
        match self {
            Continuity::On => true,
            Continuity::Off => false,
            Continuity::Auto => cited.iter().any(|&c| c < 5.0),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Continuity::Auto => "auto",
            Continuity::On => "on",
            Continuity::Off => "off",
        }
    }
}

impl FromStr for Continuity {
    type Err = IntervalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Self::Auto),
            "on" => Ok(Self::On),
            "off" => Ok(Self::Off),
            _ => Err(IntervalError::Unknown {
                kind: "continuity setting",
                value: s.to_string(),
            }),
        }
    }
}

fn log_ratio_interval(
    group: Binomial,
    world: Binomial,
    alpha: f64,
    continuity: bool,
    method: Method,
    variance: impl Fn((f64, f64), (f64, f64)) -> f64,
) -> Result<IntervalEstimate, IntervalError> {
    check_alpha(alpha)?;
    let cc = if continuity { "continuity=on" } else { "continuity=off" };
    let ratio = group.proportion() / world.proportion();
    if world.cited <= 0.0 {
        return Ok(IntervalEstimate::undefined(ratio, alpha, method, "zero world cited count").with_note(cc));
    }
    if group.cited <= 0.0 && !continuity {
        return Ok(IntervalEstimate::undefined(ratio, alpha, method, "zero group cited count").with_note(cc));
    }
    let var = variance(group.corrected(continuity), world.corrected(continuity));
    let half = z_critical(alpha) * var.sqrt();
    let centre = ratio.ln();
    Ok(IntervalEstimate::new(ratio, (centre - half).exp(), (centre + half).exp(), alpha, method).with_note(cc))
}

/// Log-scale risk-ratio limits for `p_g / p_w`, each arm contributing
/// `(n - a) / a / n` to the variance.
pub fn risk_ratio_ci(
    group: Binomial,
    world: Binomial,
    alpha: f64,
    continuity: bool,
) -> Result<IntervalEstimate, IntervalError> {
    log_ratio_interval(group, world, alpha, continuity, Method::RiskRatio, |(ag, ng), (aw, nw)| {
        (ng - ag) / ag / ng + (nw - aw) / aw / nw
    })
}

/// Single-field MNPC ratio limits: like [`risk_ratio_ci`] but with the two
/// `(n - a) / a` terms divided by the pooled size `n_g + n_w`.
pub fn mnpc_field_ci(
    group: Binomial,
    world: Binomial,
    alpha: f64,
    continuity: bool,
) -> Result<IntervalEstimate, IntervalError> {
    log_ratio_interval(group, world, alpha, continuity, Method::RiskRatio, |(ag, ng), (aw, nw)| {
        ((ng - ag) / ag + (nw - aw) / aw) / (ng + nw)
    })
}

/// One field of the MNPC weighted sum.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTerm {
    /// `n_gf / n_g`.
    pub weight: f64,
    /// `p_gf / p_wf`.
    pub ratio: f64,
    pub interval: IntervalEstimate,
}

/// MNPC limits as the weighted sum of the per-field lower and upper
/// distances. Undefined when any field interval is.
pub fn mnpc_combined_ci(per_field: &[FieldTerm], mnpc: f64) -> Result<IntervalEstimate, IntervalError> {
    let first = per_field.first().ok_or(IntervalError::Empty)?;
    let alpha = first.interval.alpha;
    let wsum: f64 = per_field.iter().map(|f| f.weight).sum();
    if (wsum - 1.0).abs() > 1e-9 {
        return Err(IntervalError::WeightSum(wsum));
    }
    let (mut down, mut up) = (0.0, 0.0);
    for (j, f) in per_field.iter().enumerate() {
        let Some((l, u)) = f.interval.limits() else {
            return Ok(IntervalEstimate::undefined(
                mnpc,
                alpha,
                Method::MnpcWeighted,
                format!("field {j} interval undefined"),
            ));
        };
        down += f.weight * (f.ratio - l);
        up += f.weight * (u - f.ratio);
    }
    Ok(IntervalEstimate::new(mnpc, mnpc - down, mnpc + up, alpha, Method::MnpcWeighted))
}

/// Options for the indicator-level interval builders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormulaOptions {
    pub alpha: f64,
    pub continuity: Continuity,
    pub expansion: ExpansionMode,
}

impl Default for FormulaOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            continuity: Continuity::Auto,
            expansion: ExpansionMode::Literal,
        }
    }
}

/// The analytic method used for an indicator by [`formula_interval`].
pub fn formula_method(indicator: Indicator) -> Method {
    match indicator {
        Indicator::Mnlcs | Indicator::Mncs | Indicator::LundbergZ => Method::NormalT,
        Indicator::Emnpc => Method::RiskRatio,
        Indicator::Mnpc => Method::MnpcWeighted,
        Indicator::PropCited | Indicator::EqPropCited => Method::Wilson,
    }
}

fn summaries(pairs: &[CellPair<'_>]) -> (Vec<ProportionSummary>, Vec<ProportionSummary>) {
    pairs
        .iter()
        .map(|p| (ProportionSummary::from_set(p.group), ProportionSummary::from_set(p.world)))
        .unzip()
}

/// Analytic interval for one indicator over a scope of cell pairs:
/// Student's t for the mean-based indicators, Wilson for proportions,
/// risk-ratio limits on equalised counts for EMNPC and the weighted
/// per-field sum for MNPC.
pub fn formula_interval(
    indicator: Indicator,
    pairs: &[CellPair<'_>],
    opts: &FormulaOptions,
) -> Result<IntervalEstimate, IntervalError> {
    check_alpha(opts.alpha)?;
    let alpha = opts.alpha;
    let method = formula_method(indicator);
    let value = evaluate(indicator, pairs)?;
    if !value.defined {
        return Ok(IntervalEstimate::undefined(
            value.estimate,
            alpha,
            method,
            value.note.unwrap_or_default(),
        ));
    }
    let (group, world) = summaries(pairs);
    let ci = match indicator {
        Indicator::Mnlcs | Indicator::Mncs | Indicator::LundbergZ => {
            let transform = score_transform(indicator).expect("mean-based indicator");
            let values: Vec<f64> = normalized_scores(transform, pairs)?
                .into_iter()
                .flat_map(|s| s.values)
                .collect();
            if values.len() < 2 {
                IntervalEstimate::undefined(value.estimate, alpha, method, "fewer than two articles")
            } else {
                mnlcs_normal_ci(&values, alpha)?
            }
        }
        Indicator::PropCited => {
            let cited = group.iter().map(|s| s.cited).sum();
            let total = group.iter().map(|s| s.total).sum();
            wilson_ci(cited, total, alpha)?
        }
        Indicator::EqPropCited => {
            let eq = equalised_proportion(&group)?;
            equalised_wilson_ci(eq.value.estimate, eq.combined_size() as u64, alpha)?
        }
        Indicator::Emnpc => {
            let g = equalised_proportion(&group)?;
            let w = equalised_proportion(&world)?;
            let gb = Binomial::new(g.value.estimate * g.combined_size(), g.combined_size())?;
            let wb = Binomial::new(w.value.estimate * w.combined_size(), w.combined_size())?;
            let cc = opts.continuity.resolve(&[gb.cited, wb.cited]);
            let mut ci = risk_ratio_ci(gb, wb, alpha, cc)?;
            ci.estimate = value.estimate;
            ci
        }
        Indicator::Mnpc => {
            let terms = mnpc_terms(&group, &world)?;
            let mut fields = Vec::with_capacity(terms.len());
            for t in &terms {
                let g = Binomial::counts(t.group.cited, t.group.total)?;
                let w = Binomial::counts(t.world.cited, t.world.total)?;
                let cc = opts.continuity.resolve(&[g.cited, w.cited]);
                fields.push(FieldTerm {
                    weight: t.weight,
                    ratio: t.ratio.expect("defined MNPC has finite ratios"),
                    interval: mnpc_field_ci(g, w, alpha, cc)?,
                });
            }
            mnpc_combined_ci(&fields, value.estimate)?
        }
    };
    Ok(match value.note {
        Some(note) => ci.with_note(note),
        None => ci,
    })
}

/// MNLCS limits that allow for sampling error in the world baselines:
/// Fieller for a single field/year, the heuristic expansion otherwise.
pub fn fieller_interval(
    pairs: &[CellPair<'_>],
    opts: &FormulaOptions,
) -> Result<IntervalEstimate, IntervalError> {
    check_alpha(opts.alpha)?;
    let alpha = opts.alpha;
    let method = if pairs.len() == 1 {
        Method::Fieller
    } else {
        Method::HeuristicExpansion
    };
    let value = evaluate(Indicator::Mnlcs, pairs)?;
    if !value.defined {
        return Ok(IntervalEstimate::undefined(
            value.estimate,
            alpha,
            method,
            value.note.unwrap_or_default(),
        ));
    }
    let logs = |s: &ArticleSet| -> Vec<f64> { s.counts().iter().map(|&c| (c as f64).ln_1p()).collect() };
    let scores = normalized_scores(Transform::LogRatio, pairs)?;
    let mut cells = Vec::with_capacity(pairs.len());
    for (p, sc) in pairs.iter().zip(&scores) {
        let (Ok(gm), Ok(wm)) = (
            SampleMoments::from_values(&logs(p.group)),
            SampleMoments::from_values(&logs(p.world)),
        ) else {
            return Ok(IntervalEstimate::undefined(
                value.estimate,
                alpha,
                method,
                format!("fewer than two articles in {}", p.group.key()),
            ));
        };
        let fieller = fieller_ci(&gm, &wm, alpha)?;
        if pairs.len() == 1 {
            return Ok(fieller);
        }
        let normal = mnlcs_normal_ci(&sc.values, alpha)?;
        cells.push(CellIntervals {
            size: sc.values.len(),
            mean: normal.estimate,
            normal,
            fieller,
        });
    }
    let all: Vec<f64> = scores.into_iter().flat_map(|s| s.values).collect();
    let combined = mnlcs_normal_ci(&all, alpha)?;
    heuristic_expanded_ci(&cells, &combined, value.estimate, opts.expansion)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn normal_ci_examples() {
        let c = mnlcs_normal_ci(&[0.7; 5], 0.05).unwrap();
        assert_eq!(c.limits(), Some((0.7, 0.7)));

        let c = mnlcs_normal_ci(&[0.5, 1.5], 0.05).unwrap();
        assert_eq!(c.estimate, 1.0);
        let (l, u) = c.limits().unwrap();
        let half = t_critical(1, 0.05) * 0.5;
        assert!(close(u - 1.0, half, 1e-12) && close(1.0 - l, half, 1e-12));
        assert!(close(half, 6.353, 0.005));

        assert_eq!(mnlcs_normal_ci(&[1.0], 0.05), Err(IntervalError::TooFewValues(1)));
    }

    #[test]
    fn large_sample_normal_ci() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let v: Vec<f64> = (0..10_000)
            .map(|_| 1.0 + Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        let c = mnlcs_normal_ci(&v, 0.05).unwrap();
        let (l, u) = c.limits().unwrap();
        // half-width ~ 1.96 / 100 with sd ~ 1
        assert!(close((u - l) / 2.0, 0.0196, 0.001));
        assert!(close(c.estimate, 1.0, 0.04));
    }

    #[test]
    fn fieller_zero_world_se() {
        let g = SampleMoments::from_se(0.8, 0.05, 100).unwrap();
        let w = SampleMoments::from_se(0.5, 0.0, 100).unwrap();
        let c = fieller_ci(&g, &w, 0.05).unwrap();
        let t = t_critical(198, 0.05);
        let (l, u) = c.limits().unwrap();
        let m = 0.8 / 0.5;
        assert_eq!(c.h, Some(0.0));
        assert!(close(l, m * (1.0 - t * 0.05 / 0.8), 1e-12));
        assert!(close(u, m * (1.0 + t * 0.05 / 0.8), 1e-12));
    }

    #[test]
    fn fieller_undefined_when_h_exceeds_one() {
        let g = SampleMoments::from_se(1.0, 0.1, 50).unwrap();
        let t = t_critical(98, 0.05);
        // t * se_w / mean_w = 1.2
        let w = SampleMoments::from_se(1.0, 1.2 / t, 50).unwrap();
        let c = fieller_ci(&g, &w, 0.05).unwrap();
        assert!(!c.defined);
        assert!(close(c.h.unwrap(), 1.44, 1e-12));
        assert!(c.note.unwrap().contains("infinite"));
        let w0 = SampleMoments::from_se(0.0, 0.1, 50).unwrap();
        assert!(matches!(fieller_ci(&g, &w0, 0.05), Err(IntervalError::NonPositiveWorldMean(_))));
    }

    #[test]
    fn fieller_matches_substitution_and_simulation() {
        let g = SampleMoments::from_se(1.2, 0.02, 500).unwrap();
        let w = SampleMoments::from_se(1.0, 0.02, 500).unwrap();
        let c = fieller_ci(&g, &w, 0.05).unwrap();
        let (l, u) = c.limits().unwrap();
        // frozen from an independent scipy evaluation
        assert!(close(l, 1.1404704583516092, 1e-9));
        assert!(close(u, 1.2632320062548072, 1e-9));
        assert!(close(c.h.unwrap(), 0.0015403173483132452, 1e-12));

        // parametric simulation of the ratio of the two sample means
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let gd = Normal::new(1.2, 0.02).unwrap();
        let wd = Normal::new(1.0, 0.02).unwrap();
        let mut ratios: Vec<f64> = (0..100_000)
            .map(|_| gd.sample(&mut rng) / wd.sample(&mut rng))
            .collect();
        ratios.sort_by(f64::total_cmp);
        // Monte-Carlo sd of a 2.5% quantile here is about 0.0006
        assert!(close(ratios[2_499], l, 0.002), "{} vs {l}", ratios[2_499]);
        assert!(close(ratios[97_499], u, 0.002), "{} vs {u}", ratios[97_499]);
    }

    #[test]
    fn fieller_brackets_centre_with_zero_group_mean() {
        let g = SampleMoments::new(0.0, 0.0, 10).unwrap();
        let w = SampleMoments::from_se(1.0, 0.1, 10).unwrap();
        let c = fieller_ci(&g, &w, 0.05).unwrap();
        assert_eq!(c.limits(), Some((0.0, 0.0)));
    }

    fn cell(size: usize, mean: f64, normal: (f64, f64), fieller: (f64, f64)) -> CellIntervals {
        CellIntervals {
            size,
            normal: IntervalEstimate::new(mean, normal.0, normal.1, 0.05, Method::NormalT),
            fieller: IntervalEstimate::new(mean, fieller.0, fieller.1, 0.05, Method::Fieller),
            mean,
        }
    }

    #[test]
    fn heuristic_zero_expansion() {
        let cells = [cell(10, 1.0, (0.8, 1.2), (0.8, 1.2)), cell(30, 2.0, (1.5, 2.5), (1.5, 2.5))];
        let combined = IntervalEstimate::new(1.5, 1.3, 1.7, 0.05, Method::NormalT);
        let e = heuristic_expanded_ci(&cells, &combined, 1.5, ExpansionMode::ExpandFromMean).unwrap();
        let (l, u) = e.limits().unwrap();
        assert!(close(l, 1.3, 1e-12) && close(u, 1.7, 1e-12));
        assert!(e.note.as_deref().unwrap().contains("mode=expand_from_mean"));

        let e = heuristic_expanded_ci(&cells, &combined, 1.5, ExpansionMode::Literal).unwrap();
        let (l, u) = e.limits().unwrap();
        assert!(close(1.5 - l, 2.0 * 0.2, 1e-12) && close(u - 1.5, 2.0 * 0.2, 1e-12));
        assert!(e.note.as_deref().unwrap().contains("mode=literal"));
    }

    #[test]
    fn heuristic_single_cell_recovers_fieller() {
        let cells = [cell(50, 1.1, (0.9, 1.3), (0.7, 1.6))];
        let combined = IntervalEstimate::new(1.1, 0.9, 1.3, 0.05, Method::NormalT);
        let e = heuristic_expanded_ci(&cells, &combined, 1.1, ExpansionMode::ExpandFromMean).unwrap();
        let (l, u) = e.limits().unwrap();
        assert!(close(l, 0.7, 1e-12) && close(u, 1.6, 1e-12));
    }

    #[test]
    fn heuristic_weighting_by_hand() {
        // cell 1: lower exp (0.8-0.6)/(1.0-0.8)=1, upper (1.5-1.2)/(0.2)=1.5
        // cell 2: lower exp 0, upper exp 0; weights 1/4, 3/4
        let cells = [cell(10, 1.0, (0.8, 1.2), (0.6, 1.5)), cell(30, 2.0, (1.5, 2.5), (1.5, 2.5))];
        let combined = IntervalEstimate::new(1.75, 1.6, 1.9, 0.05, Method::NormalT);
        let e = heuristic_expanded_ci(&cells, &combined, 1.75, ExpansionMode::ExpandFromMean).unwrap();
        let (l, u) = e.limits().unwrap();
        assert!(close(l, 1.75 - 1.25 * 0.15, 1e-12));
        assert!(close(u, 1.75 + 1.375 * 0.15, 1e-12));
    }

    #[test]
    fn heuristic_undefined_cell() {
        let mut c = cell(10, 1.0, (0.8, 1.2), (0.6, 1.5));
        c.fieller = IntervalEstimate::undefined(1.0, 0.05, Method::Fieller, "h>1");
        let combined = IntervalEstimate::new(1.0, 0.8, 1.2, 0.05, Method::NormalT);
        let e = heuristic_expanded_ci(&[c], &combined, 1.0, ExpansionMode::Literal).unwrap();
        assert!(!e.defined);
    }

    #[test]
    fn wilson_examples() {
        let c = wilson_ci(0, 50, 0.05).unwrap();
        assert_eq!(c.lower, Some(0.0));
        let c = wilson_ci(50, 100, 0.05).unwrap();
        let (l, u) = c.limits().unwrap();
        assert!(close(l, 0.404, 0.001) && close(u, 0.596, 0.001));
        assert!(close(l, 0.4038315303659956, 1e-12));
        let c = wilson_ci(100, 100, 0.05).unwrap();
        assert_eq!(c.upper, Some(1.0));
        assert!(wilson_ci(3, 2, 0.05).is_err());
        assert!(wilson_ci(0, 0, 0.05).is_err());
    }

    #[test]
    fn equalised_wilson_uses_rounded_counts() {
        let c = equalised_wilson_ci(0.5, 300, 0.05).unwrap();
        let w = wilson_ci(150, 300, 0.05).unwrap();
        assert_eq!(c.limits(), w.limits());
        assert_eq!(c.estimate, 0.5);
    }

    #[test]
    fn risk_ratio_examples() {
        let same = risk_ratio_ci(Binomial::counts(30, 100).unwrap(), Binomial::counts(30, 100).unwrap(), 0.05, false)
            .unwrap();
        assert!(close(same.estimate, 1.0, 1e-15));
        assert!(same.contains(1.0));

        let c = risk_ratio_ci(Binomial::counts(70, 100).unwrap(), Binomial::counts(50, 100).unwrap(), 0.05, false)
            .unwrap();
        let (l, u) = c.limits().unwrap();
        assert!(close(c.estimate, 1.4, 1e-12));
        assert!(close(l, 1.1076179671320843, 1e-9), "{l}");
        assert!(close(u, 1.7695632051500196, 1e-9), "{u}");
    }

    #[test]
    fn continuity_correction_effects() {
        let g = Binomial::counts(1, 500).unwrap();
        let w = Binomial::counts(5, 500).unwrap();
        let off = risk_ratio_ci(g, w, 0.05, false).unwrap();
        let on = risk_ratio_ci(g, w, 0.05, true).unwrap();
        // adding 0.5 to a small cited count shrinks its (n - a)/a term
        assert!(on.width().unwrap() < off.width().unwrap());
        assert_eq!(on.estimate, off.estimate);
        // log-centre unchanged
        let (l, u) = on.limits().unwrap();
        assert!(close((l * u).sqrt(), on.estimate, 1e-12));

        let zero = Binomial::counts(0, 500).unwrap();
        assert!(!risk_ratio_ci(zero, w, 0.05, false).unwrap().defined);
        let z_on = risk_ratio_ci(zero, w, 0.05, true).unwrap();
        assert!(z_on.defined);
        assert_eq!(z_on.limits(), Some((0.0, 0.0)));
        assert!(!risk_ratio_ci(g, zero, 0.05, true).unwrap().defined);
    }

    #[test]
    fn continuity_auto() {
        assert!(Continuity::Auto.resolve(&[4.0, 100.0]));
        assert!(!Continuity::Auto.resolve(&[5.0, 100.0]));
        assert!(Continuity::On.resolve(&[100.0]));
        assert!(!Continuity::Off.resolve(&[0.0]));
    }

    #[test]
    fn mnpc_field_examples() {
        let same = mnpc_field_ci(Binomial::counts(40, 80).unwrap(), Binomial::counts(40, 80).unwrap(), 0.05, false)
            .unwrap();
        assert!(same.contains(1.0));
        let c = mnpc_field_ci(Binomial::counts(60, 100).unwrap(), Binomial::counts(50, 100).unwrap(), 0.05, false)
            .unwrap();
        let (l, u) = c.limits().unwrap();
        assert!(close(l, 1.003407936277413, 1e-9), "{l}");
        assert!(close(u, 1.4351092391618097, 1e-9), "{u}");

        let full = mnpc_field_ci(Binomial::counts(20, 20).unwrap(), Binomial::counts(10, 20).unwrap(), 0.05, true)
            .unwrap();
        let (l, u) = full.limits().unwrap();
        assert!(l.is_finite() && u.is_finite() && l < u);
        let both_full =
            mnpc_field_ci(Binomial::counts(20, 20).unwrap(), Binomial::counts(20, 20).unwrap(), 0.05, true).unwrap();
        let (l, u) = both_full.limits().unwrap();
        assert!(l.is_finite() && u.is_finite() && l < u);
    }

    #[test]
    fn mnpc_combined_examples() {
        let f = IntervalEstimate::new(1.2, 0.9, 1.6, 0.05, Method::RiskRatio);
        let c = mnpc_combined_ci(&[FieldTerm { weight: 1.0, ratio: 1.2, interval: f }], 1.2).unwrap();
        assert_eq!(c.limits(), Some((0.9, 1.6)));

        let a = IntervalEstimate::new(1.2, 1.2 - 0.1, 1.2 + 0.1, 0.05, Method::RiskRatio);
        let b = IntervalEstimate::new(0.8, 0.8 - 0.1, 0.8 + 0.1, 0.05, Method::RiskRatio);
        let terms = [
            FieldTerm { weight: 0.5, ratio: 1.2, interval: a },
            FieldTerm { weight: 0.5, ratio: 0.8, interval: b },
        ];
        let (l, u) = mnpc_combined_ci(&terms, 1.0).unwrap().limits().unwrap();
        assert!(close(l, 0.9, 1e-12) && close(u, 1.1, 1e-12));

        let bad = [FieldTerm {
            weight: 0.7,
            ratio: 1.0,
            interval: IntervalEstimate::new(1.0, 0.9, 1.1, 0.05, Method::RiskRatio),
        }];
        assert!(matches!(mnpc_combined_ci(&bad, 1.0), Err(IntervalError::WeightSum(_))));
    }

    #[test]
    fn mnpc_combined_worked_example() {
        // fields A (3/5 vs 5/10) and B (4/5 vs 8/10), MNPC = 1.1
        let a = mnpc_field_ci(Binomial::counts(3, 5).unwrap(), Binomial::counts(5, 10).unwrap(), 0.05, false).unwrap();
        let b = mnpc_field_ci(Binomial::counts(4, 5).unwrap(), Binomial::counts(8, 10).unwrap(), 0.05, false).unwrap();
        assert!(close(a.lower.unwrap(), 0.6243777211528436, 1e-9));
        assert!(close(b.upper.unwrap(), 1.4302350891163809, 1e-9));
        let terms = [
            FieldTerm { weight: 0.5, ratio: 1.2, interval: a },
            FieldTerm { weight: 0.5, ratio: 1.0, interval: b },
        ];
        let (l, u) = mnpc_combined_ci(&terms, 1.1).unwrap().limits().unwrap();
        assert!(close(l, 0.6617817378627057, 1e-9));
        assert!(close(u, 1.868265672058, 1e-9));
    }

    #[test]
    fn mnpc_combined_undefined_field() {
        let terms = [FieldTerm {
            weight: 1.0,
            ratio: 1.0,
            interval: IntervalEstimate::undefined(1.0, 0.05, Method::RiskRatio, "zero world"),
        }];
        assert!(!mnpc_combined_ci(&terms, 1.0).unwrap().defined);
    }

    #[test]
    fn tags_parse() {
        for m in Method::ALL {
            assert_eq!(m.tag().parse::<Method>().unwrap(), m);
        }
        assert_eq!("expand-from-mean".parse::<ExpansionMode>().unwrap(), ExpansionMode::ExpandFromMean);
        assert_eq!("off".parse::<Continuity>().unwrap(), Continuity::Off);
    }
}

//! Field- and year-normalised impact indicators for article-level count data.
//!
//! The crate computes four families of indicators over collections of
//! citation counts (or any alternative indicator counts, such as reader or
//! mention counts), each normalised against a world reference set for the
//! same field and publication year:
//!
//! * **MNLCS**, the mean of `ln(1 + c)` scores divided by the world mean of
//!   `ln(1 + c)`, plus the z-score variant that also divides by the world
//!   standard deviation;
//! * **MNCS**, the classic mean of raw counts over the world raw mean;
//! * **EMNPC**, the ratio of equalised proportions cited;
//! * **MNPC**, the size-weighted sum of per-field proportion-cited ratios.
//!
//! Each indicator comes with analytic confidence limits ([`intervals`]) and a
//! percentile bootstrap ([`bootstrap`]) that can be compared against the
//! analytic route. [`synthetic`] generates discretised-lognormal corpora with
//! known parameters for desk-scale validation, and [`report`] assembles
//! everything into a CSV report.
//!
//! ```
//! use fieldnorm::corpus::{ArticleSet, FieldYearKey, WORLD};
//! use fieldnorm::indicators::{compute_baseline, mean_normalized, normalize_log};
//!
//! let key = FieldYearKey::new("A", 2016).unwrap();
//! let world = ArticleSet::new(WORLD, key.clone(), vec![0, 0, 1, 2, 10, 0, 0, 0, 2, 2]).unwrap();
//! let group = ArticleSet::new("GROUP", key, vec![0, 0, 1, 2, 10]).unwrap();
//!
//! let baseline = compute_baseline(&world);
//! let scores = normalize_log(&group, &baseline).unwrap();
//! let mnlcs = mean_normalized(&[scores]).unwrap();
//! assert_eq!(format!("{:.2}", mnlcs.estimate), "1.31");
//! ```

pub mod bootstrap;
pub mod cli;
pub mod corpus;
pub mod indicators;
pub mod intervals;
pub mod report;
mod seed;
pub mod stats;
pub mod synthetic;

pub use corpus::{ArticleSet, Corpus, ExclusionPolicy, FieldYearKey, SampleSpec, WORLD};
pub use indicators::{Indicator, IndicatorValue, NormalizationBaseline};
pub use intervals::{IntervalEstimate, Method};
pub use report::{IndicatorReport, ReportConfig};


//! A full report over a synthetic two-group corpus, written as CSV.
//!
//! cargo run --release --example report [output.csv]

use fieldnorm::indicators::Indicator;
use fieldnorm::report::{build_report, write_csv, CiMethod, ReportConfig};
use fieldnorm::synthetic::{scenario_grid, GridSpec};

fn main() -> anyhow::Result<()> {
    let grid = GridSpec {
        n: vec![400],
        zero_inflation: vec![0.3],
        groups: vec![("UNI".into(), 0.15), ("LAB".into(), -0.1)],
        fields: vec!["BIO".into(), "CHEM".into()],
        years: vec![2015, 2016],
        ..GridSpec::default()
    };
    let corpus = &scenario_grid(&grid)?[0].corpus;
    let config = ReportConfig {
        indicators: vec![Indicator::Mnlcs, Indicator::Emnpc, Indicator::Mnpc],
        ci_method: CiMethod::All,
        bootstrap_iters: Some(1000),
        ..ReportConfig::default()
    };
    let report = build_report(corpus, &config)?;
    for r in report.rows.iter().filter(|r| r.scope == "ALL") {
        let limits = match (r.lower, r.upper) {
            (Some(l), Some(u)) => format!("({l:.3}, {u:.3})"),
            _ => "undefined".into(),
        };
        println!("{:<6} {:<6} {:.3} {:<22} {limits}", r.group, r.indicator.tag(), r.estimate, r.method.tag());
    }
    let path = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("fieldnorm-report.csv").display().to_string());
    write_csv(&report, &path)?;
    println!("{} rows written to {path}", report.rows.len());
    Ok(())
}

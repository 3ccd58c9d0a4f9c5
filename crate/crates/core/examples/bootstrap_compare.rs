//! Formula vs percentile-bootstrap limits on synthetic lognormal cells, for
//! log-transformed (MNLCS) and raw (MNCS) scores, plus a sparse arm.
//!
//! cargo run --release --example bootstrap_compare

use fieldnorm::bootstrap::{comparison_suite, BootstrapSpec, CorpusSlice};
use fieldnorm::corpus::{ArticleSet, FieldYearKey, WORLD};
use fieldnorm::indicators::Indicator;
use fieldnorm::synthetic::LognormalSpec;

fn slice(label: &str, source: &str, mu: f64, zi: f64, n: usize, seed: u64) -> anyhow::Result<CorpusSlice> {
    let key = FieldYearKey::new("SIM", 2016)?;
    let g = LognormalSpec::new(mu, 1.2, zi, n, seed)?.sample_counts();
    let w = LognormalSpec::new(mu, 1.2, zi, n, seed + 1)?.sample_counts();
    Ok(CorpusSlice::new(label, vec![(ArticleSet::new("G", key.clone(), g)?, ArticleSet::new(WORLD, key, w)?)])?
        .with_source(source))
}

fn main() -> anyhow::Result<()> {
    let mut slices = Vec::new();
    for (i, mu) in [0.5, 1.0, 1.5, 2.0].into_iter().enumerate() {
        slices.push(slice(&format!("dense{i}"), "dense", mu, 0.0, 1000, 10 * i as u64)?);
        slices.push(slice(&format!("sparse{i}"), "sparse", mu, 0.97, 500, 100 + 10 * i as u64)?);
    }
    // world held fixed, as in a comparison of the t interval with the bootstrap
    let spec = BootstrapSpec::new(1000, 42, false, 0.05)?;
    let table = comparison_suite(&slices, &[Indicator::Mnlcs, Indicator::Mncs], &spec)?;
    println!("{:<8} {:<6} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}", "source", "ind", "lo avg", "hi avg", "lo abs", "hi abs", "lo max", "hi max");
    for s in &table.summaries {
        let pct = |x: f64| format!("{:+.1}%", 100.0 * x);
        let abs = |x: f64| format!("{:.1}%", 100.0 * x);
        println!(
            "{:<8} {:<6} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
            s.source, s.indicator.tag(), pct(s.lower_avg), pct(s.upper_avg), abs(s.lower_abs), abs(s.upper_abs), abs(s.lower_max), abs(s.upper_max)
        );
    }
    println!("positive = formula half-width wider than the bootstrap's, as a share of the bootstrap width");
    Ok(())
}

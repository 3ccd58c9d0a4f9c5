//! The two-field worked example: every indicator with its analytic limits.
//!
//! cargo run --example worked_example

use fieldnorm::corpus::{worked_example, WORLD};
use fieldnorm::indicators::{compute_baseline, evaluate, CellPair, Indicator};
use fieldnorm::intervals::{fieller_interval, formula_interval, FormulaOptions};

fn main() -> anyhow::Result<()> {
    let corpus = worked_example();
    for key in corpus.keys() {
        let b = compute_baseline(corpus.world(key).unwrap());
        println!(
            "{key}: world log-mean {:.2}, raw mean {:.2}, proportion cited {:.2}",
            b.log_mean, b.raw_mean, b.prop_cited
        );
    }

    let opts = FormulaOptions::default();
    for group in ["GROUP", WORLD] {
        let pairs: Vec<CellPair> = corpus
            .group_cells(group)
            .map(|g| CellPair { group: g, world: corpus.world(g.key()).unwrap() })
            .collect();
        println!("\n{group}");
        for ind in Indicator::ALL {
            let v = evaluate(ind, &pairs)?;
            let ci = formula_interval(ind, &pairs, &opts)?;
            let limits = ci
                .limits()
                .map_or("undefined".to_string(), |(l, u)| format!("({l:.3}, {u:.3})"));
            println!("  {:<14} {:>7.4}  {} {limits}", ind.tag(), v.estimate, ci.method);
        }
        let wide = fieller_interval(&pairs, &opts)?;
        if let Some((l, u)) = wide.limits() {
            println!("  {:<14} {:>7.4}  {} ({l:.3}, {u:.3})", "MNLCS", wide.estimate, wide.method);
        }
    }
    Ok(())
}

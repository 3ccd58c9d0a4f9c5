//! Proportion-cited indicators: why equalisation matters, and how EMNPC and
//! MNPC differ when a group is strong in a highly cited field.
//!
//! cargo run --example proportions

use fieldnorm::corpus::{FieldYearKey, WORLD};
use fieldnorm::indicators::{emnpc, equalised_proportion, mnpc, proportion_cited, ProportionSummary};
use fieldnorm::intervals::{risk_ratio_ci, wilson_ci, Binomial};

fn s(group: &str, field: &str, cited: u64, total: u64) -> ProportionSummary {
    ProportionSummary::new(group, FieldYearKey::new(field, 2016).unwrap(), cited, total).unwrap()
}

fn main() -> anyhow::Result<()> {
    // Same per-field performance, different field mix.
    let a = [s("A", "MED", 160, 200), s("A", "HUM", 20, 100)];
    let b = [s("B", "MED", 80, 100), s("B", "HUM", 40, 200)];
    for (name, g) in [("A", &a), ("B", &b)] {
        println!(
            "group {name}: raw proportion {:.2}, equalised {:.2}",
            proportion_cited(g)?.estimate,
            equalised_proportion(g)?.value.estimate
        );
    }

    // Two groups each one field above and one below world level.
    let w = [s(WORLD, "X", 800, 1000), s(WORLD, "Y", 200, 1000)];
    let x = [s("X", "X", 88, 100), s("X", "Y", 18, 100)];
    let y = [s("Y", "X", 72, 100), s("Y", "Y", 22, 100)];
    for (name, g) in [("X", &x), ("Y", &y)] {
        println!("group {name}: EMNPC {:.2}, MNPC {:.2}", emnpc(g, &w)?.estimate, mnpc(g, &w)?.estimate);
    }

    let wil = wilson_ci(3, 40, 0.05)?;
    println!("\nWilson 3/40: {:?}", wil.limits().unwrap());
    let (g, wd) = (Binomial::counts(3, 40)?, Binomial::counts(60, 500)?);
    for cc in [false, true] {
        let rr = risk_ratio_ci(g, wd, 0.05, cc)?;
        println!("risk ratio 3/40 vs 60/500, continuity {cc}: {:.3} {:?}", rr.estimate, rr.limits().unwrap());
    }
    Ok(())
}

//! Synthetic corpora: a small parameter grid written to disk, and the sparse
//! web-mention preset.
//!
//! cargo run --example simulate [output-dir]

use fieldnorm::synthetic::{scenario_grid, write_scenarios, GridSpec, LognormalSpec};

fn main() -> anyhow::Result<()> {
    let grid = GridSpec {
        mu: vec![0.5, 1.5],
        zero_inflation: vec![0.0, 0.5],
        n: vec![300],
        world_n: Some(1000),
        groups: vec![("UNI".into(), 0.2), ("LAB".into(), -0.2)],
        fields: vec!["BIO".into(), "PHYS".into()],
        years: vec![2015, 2016],
        seed: 3,
        ..GridSpec::default()
    };
    let scenarios = scenario_grid(&grid)?;
    for s in &scenarios {
        println!("{}: mu {} zi {} -> {} cells", s.label, s.params.mu, s.params.zero_inflation, s.corpus.len());
    }
    let dir = std::env::args().nth(1).map(std::path::PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("fieldnorm-sim"));
    write_scenarios(&scenarios, &dir)?;
    println!("written to {}", dir.display());

    let wiki = LognormalSpec::wikipedia_like(20_000, 9);
    let counts = wiki.sample_counts();
    let cited = counts.iter().filter(|&&c| c > 0).count();
    println!(
        "sparse preset: {:.2}% cited (population {:.2}%)",
        100.0 * cited as f64 / counts.len() as f64,
        100.0 * wiki.population_prop_cited()
    );
    Ok(())
}

//! Reference-set sampling and the small-field filter.
//!
//! cargo run --example sampling

use fieldnorm::corpus::{apply_exclusion, sample_corpus, ArticleSet, Corpus, ExclusionPolicy, FieldYearKey, SampleSpec, WORLD};
use fieldnorm::synthetic::LognormalSpec;

fn main() -> anyhow::Result<()> {
    let mut sets = Vec::new();
    for (i, (field, n)) in [("BIG", 4000), ("MID", 900), ("TINY", 60)].into_iter().enumerate() {
        let key = FieldYearKey::new(field, 2016)?;
        let spec = LognormalSpec::new(1.0, 1.0, 0.1, n, i as u64)?;
        sets.push(ArticleSet::new("G", key.clone(), spec.sample_counts())?);
        let world = LognormalSpec::new(1.0, 1.0, 0.1, 10 * n, 100 + i as u64)?;
        sets.push(ArticleSet::new(WORLD, key, world.sample_counts())?);
    }
    let corpus = Corpus::from_sets(sets)?;

    let sampled = sample_corpus(&corpus, SampleSpec::new(500, 7)?)?;
    for cell in sampled.cells() {
        let before = corpus.get(cell.group(), cell.key()).unwrap().len();
        println!("{:<6} {:<10} {before:>6} -> {}", cell.group(), cell.key().to_string(), cell.len());
    }

    let kept = apply_exclusion(&corpus, "G", &ExclusionPolicy::default())?;
    let kept: Vec<String> = kept.iter().map(|k| k.to_string()).collect();
    println!("fields kept for equalised proportions: {kept:?}");
    Ok(())
}

//! Article-count cells keyed by (group, field, year): loading, writing,
//! sampling and the small-cell exclusion rule.
//!
//! On disk a corpus is a directory holding one tab-separated file per cell,
//! named `<group>__<field>__<year>.tsv`, with the header
//! `article_id<TAB>count`. The group label [`WORLD`] is reserved for the
//! reference set every other group is normalised against.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reserved group label of the world reference set.
pub const WORLD: &str = "WORLD";

const HEADER: &str = "article_id\tcount";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed cell filename {0:?}: expected <group>__<field>__<year>.tsv")]
    MalformedFilename(String),
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("duplicate cell ({group}, {key})")]
    Duplicate { group: String, key: FieldYearKey },
    #[error("missing world cell for {key} (needed by group {group})")]
    MissingWorld { group: String, key: FieldYearKey },
    #[error("invalid field/year key: {0}")]
    InvalidKey(String),
    #[error("invalid article set: {0}")]
    InvalidSet(String),
    #[error("unknown group {0:?}")]
    UnknownGroup(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One field/year normalisation cell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FieldYearKey {
    field: String,
    year: u16,
}

impl FieldYearKey {
    pub fn new(field: impl Into<String>, year: u16) -> Result<Self, CorpusError> {
        let field = field.into().trim().to_string();
        if field.is_empty() {
            return Err(CorpusError::InvalidKey("empty field label".into()));
        }
        if !(1000..=9999).contains(&year) {
            return Err(CorpusError::InvalidKey(format!(
                "year {year} is not a 4-digit year"
            )));
        }
        Ok(Self { field, year })
    }

    pub fn field(&self) -> &str {
        &self.field
    }

    pub fn year(&self) -> u16 {
        self.year
    }
}

impl fmt::Display for FieldYearKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.field, self.year)
    }
}

/// The counts of one group in one field/year cell, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleSet {
    group: String,
    key: FieldYearKey,
    counts: Vec<u64>,
    ids: Option<Vec<String>>,
}

impl ArticleSet {
    pub fn new(
        group: impl Into<String>,
        key: FieldYearKey,
        counts: Vec<u64>,
    ) -> Result<Self, CorpusError> {
        Self::with_ids(group, key, counts, None)
    }

    pub fn with_ids(
        group: impl Into<String>,
        key: FieldYearKey,
        counts: Vec<u64>,
        ids: Option<Vec<String>>,
    ) -> Result<Self, CorpusError> {
        let group = group.into();
        if group.trim().is_empty() || group.contains("__") {
            return Err(CorpusError::InvalidSet(format!(
                "invalid group label {group:?}"
            )));
        }
        if counts.is_empty() {
            return Err(CorpusError::InvalidSet(format!(
                "cell ({group}, {key}) has no articles"
            )));
        }
        if let Some(ids) = &ids {
            if ids.len() != counts.len() {
                return Err(CorpusError::InvalidSet(format!(
                    "cell ({group}, {key}) has {} ids for {} counts",
                    ids.len(),
                    counts.len()
                )));
            }
        }
        Ok(Self {
            group,
            key,
            counts,
            ids,
        })
    }

    pub fn group(&self) -> &str {
        &self.group
    }

    pub fn key(&self) -> &FieldYearKey {
        &self.key
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    /// Always false: a set holds at least one article.
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn is_world(&self) -> bool {
        self.group == WORLD
    }

    /// Number of articles with a positive count.
    pub fn cited(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Same cell with new counts, ids dropped. Used for resampled replicates.
    pub(crate) fn with_counts(&self, counts: Vec<u64>) -> Self {
        debug_assert!(!counts.is_empty());
        Self {
            group: self.group.clone(),
            key: self.key.clone(),
            counts,
            ids: None,
        }
    }

    /// Same counts relabelled to another group.
    pub fn relabel(&self, group: impl Into<String>) -> Result<Self, CorpusError> {
        Self::with_ids(group, self.key.clone(), self.counts.clone(), self.ids.clone())
    }

    pub fn file_name(&self) -> String {
        format!("{}__{}__{}.tsv", self.group, self.key.field, self.key.year)
    }

    fn to_tsv(&self) -> String {
        let mut out = String::with_capacity(16 * self.counts.len() + HEADER.len() + 1);
        out.push_str(HEADER);
        out.push('\n');
        for (i, c) in self.counts.iter().enumerate() {
            if let Some(ids) = &self.ids {
                out.push_str(&ids[i]);
            }
            out.push('\t');
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }
}

/// Parses `<group>__<field>__<year>.tsv` into its group label and key.
pub fn parse_cell_filename(name: &str) -> Result<(String, FieldYearKey), CorpusError> {
    let bad = || CorpusError::MalformedFilename(name.to_string());
    let stem = name.strip_suffix(".tsv").ok_or_else(bad)?;
    let parts: Vec<&str> = stem.split("__").collect();
    let [group, field, year] = parts.as_slice() else {
        return Err(bad());
    };
    if group.trim().is_empty() || year.len() != 4 || !year.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let year: u16 = year.parse().map_err(|_| bad())?;
    let key = FieldYearKey::new(*field, year).map_err(|_| bad())?;
    Ok((group.to_string(), key))
}

fn parse_cell_body(
    file: &str,
    text: &str,
) -> Result<(Vec<u64>, Option<Vec<String>>), CorpusError> {
    let perr = |line: usize, message: String| CorpusError::Parse {
        file: file.to_string(),
        line,
        message,
    };
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.split('\n').enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == HEADER => {}
        _ => return Err(perr(1, format!("expected header {HEADER:?}"))),
    }
    let mut counts = Vec::new();
    let mut ids = Vec::new();
    for (i, raw) in lines {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let (id, count) = line
            .split_once('\t')
            .ok_or_else(|| perr(lineno, "expected two tab-separated columns".into()))?;
        if count.contains('\t') {
            return Err(perr(lineno, "expected two tab-separated columns".into()));
        }
        let count = count.trim();
        if !count.bytes().all(|b| b.is_ascii_digit()) || count.is_empty() {
            return Err(perr(
                lineno,
                format!("count {count:?} is not a non-negative integer"),
            ));
        }
        let value: u64 = count
            .parse()
            .map_err(|e| perr(lineno, format!("count {count:?}: {e}")))?;
        counts.push(value);
        ids.push(id.to_string());
    }
    if counts.is_empty() {
        return Err(perr(1, "cell has no articles".into()));
    }
    let ids = if ids.iter().all(String::is_empty) {
        None
    } else {
        Some(ids)
    };
    Ok((counts, ids))
}

/// All group and world cells of one evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    cells: BTreeMap<(String, FieldYearKey), ArticleSet>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate cells and group cells without a
    /// matching world cell.
    pub fn from_sets(sets: impl IntoIterator<Item = ArticleSet>) -> Result<Self, CorpusError> {
        let mut cells = BTreeMap::new();
        for set in sets {
            let id = (set.group.clone(), set.key.clone());
            if cells.contains_key(&id) {
                return Err(CorpusError::Duplicate {
                    group: id.0,
                    key: id.1,
                });
            }
            cells.insert(id, set);
        }
        let corpus = Self { cells };
        corpus.check_world_coverage()?;
        Ok(corpus)
    }

    fn check_world_coverage(&self) -> Result<(), CorpusError> {
        for (group, key) in self.cells.keys() {
            if group != WORLD && !self.cells.contains_key(&(WORLD.to_string(), key.clone())) {
                return Err(CorpusError::MissingWorld {
                    group: group.clone(),
                    key: key.clone(),
                });
            }
        }
        Ok(())
    }

    /// Loads every `*.tsv` cell file in `dir`. Other files and
    /// subdirectories are ignored.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let dir = dir.as_ref();
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io_err(dir))?
            .map(|e| e.map(|e| e.path()).map_err(io_err(dir)))
            .collect::<Result<_, _>>()?;
        paths.sort();
        let mut sets = Vec::new();
        for path in paths {
            if !path.is_file() || path.extension().and_then(|e| e.to_str()) != Some("tsv") {
                continue;
            }
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| CorpusError::MalformedFilename(path.display().to_string()))?;
            let (group, key) = parse_cell_filename(name)?;
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            let (counts, ids) = parse_cell_body(name, &text)?;
            sets.push(ArticleSet::with_ids(group, key, counts, ids)?);
        }
        Self::from_sets(sets)
    }

    /// Writes one file per cell into `dir`, creating it if needed.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<(), CorpusError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for set in self.cells.values() {
            let path = dir.join(set.file_name());
            let mut f = fs::File::create(&path).map_err(io_err(&path))?;
            f.write_all(set.to_tsv().as_bytes()).map_err(io_err(&path))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = &ArticleSet> {
        self.cells.values()
    }

    pub fn get(&self, group: &str, key: &FieldYearKey) -> Option<&ArticleSet> {
        self.cells.get(&(group.to_string(), key.clone()))
    }

    pub fn world(&self, key: &FieldYearKey) -> Option<&ArticleSet> {
        self.get(WORLD, key)
    }

    /// Group labels, excluding [`WORLD`].
    pub fn groups(&self) -> BTreeSet<&str> {
        self.cells
            .keys()
            .map(|(g, _)| g.as_str())
            .filter(|g| *g != WORLD)
            .collect()
    }

    /// Every field/year key present for any group or the world.
    pub fn keys(&self) -> BTreeSet<&FieldYearKey> {
        self.cells.keys().map(|(_, k)| k).collect()
    }

    /// Cells of one group in key order.
    pub fn group_cells<'a>(&'a self, group: &'a str) -> impl Iterator<Item = &'a ArticleSet> + 'a {
        self.cells.values().filter(move |s| s.group == group)
    }

    pub fn has_group(&self, group: &str) -> bool {
        self.group_cells(group).next().is_some()
    }

    /// Applies `f` to every cell, keeping keys and labels.
    pub fn map_cells(
        &self,
        mut f: impl FnMut(&ArticleSet) -> ArticleSet,
    ) -> Result<Self, CorpusError> {
        Self::from_sets(self.cells.values().map(&mut f))
    }
}

/// Size and seed of a random subsample of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub size: usize,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(size: usize, seed: u64) -> Result<Self, CorpusError> {
        if size == 0 {
            return Err(CorpusError::InvalidPolicy("sample size must be at least 1".into()));
        }
        Ok(Self { size, seed })
    }
}

/// Uniform sample without replacement of `spec.size` articles, kept in their
/// original order. Cells no larger than the sample size come back unchanged.
pub fn sample_cell(set: &ArticleSet, spec: SampleSpec) -> ArticleSet {
    assert!(spec.size >= 1, "sample size must be at least 1");
    if spec.size >= set.len() {
        return set.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut picked = index::sample(&mut rng, set.len(), spec.size).into_vec();
    picked.sort_unstable();
    let counts = picked.iter().map(|&i| set.counts[i]).collect();
    let ids = set
        .ids
        .as_ref()
        .map(|ids| picked.iter().map(|&i| ids[i].clone()).collect());
    ArticleSet {
        group: set.group.clone(),
        key: set.key.clone(),
        counts,
        ids,
    }
}

/// Samples every cell of a corpus, deriving a per-cell seed from
/// `spec.seed` and the cell's labels.
pub fn sample_corpus(corpus: &Corpus, spec: SampleSpec) -> Result<Corpus, CorpusError> {
    corpus.map_cells(|set| {
        let seed = crate::seed::derive_seed(
            spec.seed,
            &[
                set.group.as_bytes(),
                set.key.field.as_bytes(),
                &set.key.year.to_le_bytes(),
            ],
        );
        sample_cell(set, SampleSpec { size: spec.size, seed })
    })
}

/// Small-cell exclusion thresholds for equalised proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExclusionPolicy {
    pub min_articles: usize,
    pub min_fraction_of_mean: f64,
}

impl Default for ExclusionPolicy {
    fn default() -> Self {
        Self {
            min_articles: 100,
            min_fraction_of_mean: 0.25,
        }
    }
}

impl ExclusionPolicy {
    pub fn new(min_articles: usize, min_fraction_of_mean: f64) -> Result<Self, CorpusError> {
        let p = Self {
            min_articles,
            min_fraction_of_mean,
        };
        p.validate()?;
        Ok(p)
    }

    /// A policy that retains every cell.
    pub fn keep_all() -> Self {
        Self {
            min_articles: 1,
            min_fraction_of_mean: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.min_articles < 1 {
            return Err(CorpusError::InvalidPolicy("min_articles must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_fraction_of_mean) {
            return Err(CorpusError::InvalidPolicy(
                "min_fraction_of_mean must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Indexes of the retained sizes. The mean is taken over all sizes
    /// before anything is dropped, so this is a single pass.
    pub fn retain(&self, sizes: &[usize]) -> Vec<usize> {
        if sizes.is_empty() {
            return Vec::new();
        }
        let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
        let floor = self.min_fraction_of_mean * mean;
        sizes
            .iter()
            .enumerate()
            .filter(|(_, &n)| n >= self.min_articles && n as f64 >= floor)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Keys of `group` that survive the exclusion policy.
pub fn apply_exclusion(
    corpus: &Corpus,
    group: &str,
    policy: &ExclusionPolicy,
) -> Result<BTreeSet<FieldYearKey>, CorpusError> {
    policy.validate()?;
    let cells: Vec<&ArticleSet> = corpus.group_cells(group).collect();
    if cells.is_empty() {
        return Err(CorpusError::UnknownGroup(group.to_string()));
    }
    let sizes: Vec<usize> = cells.iter().map(|s| s.len()).collect();
    Ok(policy
        .retain(&sizes)
        .into_iter()
        .map(|i| cells[i].key.clone())
        .collect())
}

/// The small two-field worked example used in the docs and examples: a
/// group of five articles in each of fields A and B (2016) against ten world
/// articles per field.
pub fn worked_example() -> Corpus {
    let cell = |group: &str, field: &str, counts: &[u64]| {
        ArticleSet::new(group, FieldYearKey::new(field, 2016).expect("valid key"), counts.to_vec())
            .expect("valid cell")
    };
    Corpus::from_sets([
        cell(WORLD, "A", &[0, 0, 1, 2, 10, 0, 0, 0, 2, 2]),
        cell(WORLD, "B", &[0, 1, 1, 2, 2, 0, 1, 2, 2, 5]),
        cell("GROUP", "A", &[0, 0, 1, 2, 10]),
        cell("GROUP", "B", &[0, 1, 1, 2, 2]),
    ])
    .expect("valid corpus")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(field: &str, year: u16) -> FieldYearKey {
        FieldYearKey::new(field, year).unwrap()
    }

    fn set(group: &str, field: &str, counts: Vec<u64>) -> ArticleSet {
        ArticleSet::new(group, key(field, 2013), counts).unwrap()
    }

    #[test]
    fn key_validation() {
        assert!(FieldYearKey::new("  ", 2013).is_err());
        assert!(FieldYearKey::new("BIOC", 999).is_err());
        assert!(FieldYearKey::new("BIOC", 10000).is_err());
        assert_eq!(FieldYearKey::new(" BIOC ", 2013).unwrap().field(), "BIOC");
    }

    #[test]
    fn set_validation() {
        assert!(ArticleSet::new("G", key("A", 2013), vec![]).is_err());
        assert!(ArticleSet::with_ids("G", key("A", 2013), vec![1, 2], Some(vec!["x".into()])).is_err());
        assert!(ArticleSet::new("A__B", key("A", 2013), vec![1]).is_err());
    }

    #[test]
    fn filenames() {
        let (g, k) = parse_cell_filename("MRC__BIOC__2013.tsv").unwrap();
        assert_eq!(g, "MRC");
        assert_eq!(k, key("BIOC", 2013));
        let (_, k) = parse_cell_filename("WORLD__Social_Sciences__2016.tsv").unwrap();
        assert_eq!(k.field(), "Social_Sciences");
        for bad in [
            "MRC_BIOC_2013.tsv",
            "MRC__BIOC__13.tsv",
            "MRC__BIOC__2013.csv",
            "MRC__BIOC__2013__x.tsv",
            "__BIOC__2013.tsv",
            "MRC__BIOC__20a3.tsv",
        ] {
            assert!(parse_cell_filename(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn body_parsing() {
        let (c, ids) = parse_cell_body("f", "article_id\tcount\r\na1\t3\r\n\t0\r\n").unwrap();
        assert_eq!(c, vec![3, 0]);
        assert_eq!(ids.unwrap(), vec!["a1".to_string(), String::new()]);
        let (_, ids) = parse_cell_body("f", "article_id\tcount\n\t1\n\t2").unwrap();
        assert!(ids.is_none());
        let err = parse_cell_body("f.tsv", "article_id\tcount\n\t1\n\t-1\n").unwrap_err();
        assert_eq!(err.to_string(), "f.tsv:3: count \"-1\" is not a non-negative integer");
        assert!(parse_cell_body("f", "id\tcount\n\t1\n").is_err());
        assert!(parse_cell_body("f", "article_id\tcount\n\t1.5\n").is_err());
        assert!(parse_cell_body("f", "article_id\tcount\n").is_err());
    }

    #[test]
    fn corpus_requires_world_cells() {
        let err = Corpus::from_sets([set("MRC", "BIOC", vec![1])]).unwrap_err();
        assert!(matches!(err, CorpusError::MissingWorld { .. }));
        let err = Corpus::from_sets([
            set(WORLD, "BIOC", vec![1]),
            set(WORLD, "BIOC", vec![2]),
        ])
        .unwrap_err();
        assert!(matches!(err, CorpusError::Duplicate { .. }));
    }

    #[test]
    fn sample_small_cell_unchanged() {
        let s = set("G", "A", vec![1, 2, 3, 4, 5]);
        assert_eq!(sample_cell(&s, SampleSpec::new(10, 1).unwrap()), s);
    }

    #[test]
    fn sample_is_deterministic_and_sized() {
        let s = set("G", "A", (0..1000).collect());
        let spec = SampleSpec::new(500, 42).unwrap();
        let a = sample_cell(&s, spec);
        assert_eq!(a.len(), 500);
        assert_eq!(a, sample_cell(&s, spec));
        assert_ne!(a, sample_cell(&s, SampleSpec::new(500, 43).unwrap()));
    }

    #[test]
    fn sample_keeps_ids_aligned() {
        let counts: Vec<u64> = (0..100).collect();
        let ids: Vec<String> = counts.iter().map(|c| format!("id{c}")).collect();
        let s = ArticleSet::with_ids("G", key("A", 2013), counts, Some(ids)).unwrap();
        let out = sample_cell(&s, SampleSpec::new(10, 3).unwrap());
        for (c, id) in out.counts().iter().zip(out.ids().unwrap()) {
            assert_eq!(id, &format!("id{c}"));
        }
    }

    #[test]
    fn sample_proportion_concentrates() {
        // Hypergeometric draw of 1000 from 5000/5000: sd of the proportion is
        // about 0.015, so +-0.05 is more than three standard deviations.
        let counts: Vec<u64> = (0..10_000).map(|i| (i % 2) as u64).collect();
        let s = set("G", "A", counts);
        for seed in [7u64, 8, 9, 10, 11] {
            let out = sample_cell(&s, SampleSpec::new(1000, seed).unwrap());
            let p = out.cited() as f64 / out.len() as f64;
            assert!((p - 0.5).abs() <= 0.05, "seed {seed}: {p}");
        }
    }

    fn corpus_with_sizes(sizes: &[usize]) -> Corpus {
        let mut sets = Vec::new();
        for (i, &n) in sizes.iter().enumerate() {
            let field = format!("F{i}");
            sets.push(set("G", &field, vec![1; n]));
            sets.push(set(WORLD, &field, vec![1; n]));
        }
        Corpus::from_sets(sets).unwrap()
    }

    #[test]
    fn exclusion_absolute_floor() {
        let c = corpus_with_sizes(&[400, 300, 50]);
        let kept = apply_exclusion(&c, "G", &ExclusionPolicy::default()).unwrap();
        assert_eq!(kept, [key("F0", 2013), key("F1", 2013)].into_iter().collect());
    }

    #[test]
    fn exclusion_relative_floor() {
        // 0.25 * (2000 + 120) / 2 = 265 > 120
        let c = corpus_with_sizes(&[2000, 120]);
        let kept = apply_exclusion(&c, "G", &ExclusionPolicy::default()).unwrap();
        assert_eq!(kept, [key("F0", 2013)].into_iter().collect());
    }

    #[test]
    fn exclusion_symmetric_and_unknown_group() {
        let c = corpus_with_sizes(&[500, 500, 500]);
        assert_eq!(apply_exclusion(&c, "G", &ExclusionPolicy::default()).unwrap().len(), 3);
        assert!(matches!(
            apply_exclusion(&c, "NOPE", &ExclusionPolicy::default()),
            Err(CorpusError::UnknownGroup(_))
        ));
    }

    #[test]
    fn policy_validation() {
        assert!(ExclusionPolicy::new(0, 0.25).is_err());
        assert!(ExclusionPolicy::new(1, 1.5).is_err());
        assert!(ExclusionPolicy::new(1, 1.0).is_ok());
    }
}

//! Command-line front end: `compute`, `sample`, `simulate`, `compare-ci`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bootstrap::{comparison_suite_with, BootstrapSpec, CorpusSlice, WidthBasis};
use crate::corpus::{sample_corpus, Corpus, ExclusionPolicy, SampleSpec, WORLD};
use crate::indicators::Indicator;
use crate::intervals::{Continuity, ExpansionMode, FormulaOptions};
use crate::report::{
    build_report, format_sig, write_comparison_csv, write_comparison_detail_csv, write_csv, write_metadata,
    CiMethod, IndicatorReport, ReportConfig,
};
use crate::synthetic::{scenario_grid, write_scenarios, GridSpec};

#[derive(Debug, Parser)]
#[command(name = "fieldnorm", version, about = "Field-normalised impact indicators with confidence limits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute indicators and intervals for every group in a corpus directory.
    Compute(ComputeArgs),
    /// Randomly sample every cell of a corpus down to a fixed size.
    Sample(SampleArgs),
    /// Write synthetic discretised-lognormal corpora for a parameter grid.
    Simulate(SimulateArgs),
    /// Compare analytic intervals with percentile bootstrap intervals.
    CompareCi(CompareArgs),
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[arg(long)]
    pub input_dir: PathBuf,
    /// Comma-separated: mnlcs, mncs, lundberg, emnpc, mnpc, prop, eq-prop.
    #[arg(long, value_delimiter = ',', default_value = "mnlcs,emnpc,mnpc")]
    pub indicators: Vec<Indicator>,
    #[arg(long = "ci", default_value = "formula")]
    pub ci_method: CiMethod,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Defaults to 1000 for mean-based and 10000 for proportion indicators.
    #[arg(long)]
    pub bootstrap_iters: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub sample_size: Option<usize>,
    #[command(flatten)]
    pub exclusion: ExclusionArgs,
    #[arg(long, default_value = "auto")]
    pub continuity: Continuity,
    #[arg(long, default_value = "literal")]
    pub expansion_mode: ExpansionMode,
    /// Treat world baselines as exact when bootstrapping.
    #[arg(long)]
    pub fixed_world: bool,
    #[arg(long)]
    pub output: PathBuf,
}

/// Small-field filter for EMNPC and equalised proportions. Off unless one
/// of these flags is given; then unset values take 100 and 0.25.
#[derive(Debug, Args)]
pub struct ExclusionArgs {
    #[arg(long)]
    pub exclude_small_fields: bool,
    #[arg(long)]
    pub min_articles: Option<usize>,
    #[arg(long)]
    pub min_fraction_of_mean: Option<f64>,
}

impl ExclusionArgs {
    pub fn policy(&self) -> Result<ExclusionPolicy> {
        if !self.exclude_small_fields && self.min_articles.is_none() && self.min_fraction_of_mean.is_none() {
            return Ok(ExclusionPolicy::keep_all());
        }
        let d = ExclusionPolicy::default();
        Ok(ExclusionPolicy::new(
            self.min_articles.unwrap_or(d.min_articles),
            self.min_fraction_of_mean.unwrap_or(d.min_fraction_of_mean),
        )?)
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub input_dir: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub sample_size: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub mu: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub zero_inflation: Vec<f64>,
    /// Articles per group cell.
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    pub n: Vec<usize>,
    /// Articles per world cell (defaults to n).
    #[arg(long)]
    pub world_n: Option<usize>,
    /// `LABEL:shift` pairs; the shift is added to mu.
    #[arg(long, value_delimiter = ',', default_value = "GROUP:0")]
    pub groups: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "SIM")]
    pub fields: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "2016")]
    pub years: Vec<u16>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl GridArgs {
    pub fn spec(&self) -> Result<GridSpec> {
        let groups = self
            .groups
            .iter()
            .map(|g| match g.split_once(':') {
                Some((label, shift)) => Ok((
                    label.trim().to_string(),
                    shift.trim().parse::<f64>().with_context(|| format!("bad group shift in {g:?}"))?,
                )),
                None => Ok((g.trim().to_string(), 0.0)),
            })
            .collect::<Result<_>>()?;
        Ok(GridSpec {
            mu: self.mu.clone(),
            sigma: self.sigma.clone(),
            zero_inflation: self.zero_inflation.clone(),
            n: self.n.clone(),
            world_n: self.world_n,
            groups,
            fields: self.fields.clone(),
            years: self.years.clone(),
            seed: self.seed,
        })
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BasisArg {
    Full,
    Half,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// A corpus directory, or a directory of scenario subdirectories as
    /// written by `simulate`. Without it the grid flags are used.
    #[arg(long)]
    pub input_dir: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_delimiter = ',', default_value = "mnlcs")]
    pub indicators: Vec<Indicator>,
    #[arg(long)]
    pub bootstrap_iters: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Treat world baselines as exact when bootstrapping.
    #[arg(long)]
    pub fixed_world: bool,
    #[arg(long, default_value = "auto")]
    pub continuity: Continuity,
    #[arg(long, default_value = "literal")]
    pub expansion_mode: ExpansionMode,
    #[arg(long, value_enum, default_value = "full")]
    pub width_basis: BasisArg,
    /// Summary CSV; per-scenario rows go to `<output>.detail.csv`.
    #[arg(long)]
    pub output: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).unwrap_or_else(|e| e.exit());
    execute(cli.command)
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Compute(a) => cmd_compute(&a).map(|_| ()),
        Command::Sample(a) => cmd_sample(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::CompareCi(a) => cmd_compare_ci(&a),
    }
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn cmd_compute(args: &ComputeArgs) -> Result<IndicatorReport> {
    let config = ReportConfig {
        indicators: args.indicators.clone(),
        ci_method: args.ci_method,
        alpha: args.alpha,
        continuity: args.continuity,
        expansion: args.expansion_mode,
        bootstrap_iters: args.bootstrap_iters,
        resample_world: !args.fixed_world,
        seed: args.seed,
        sample_size: args.sample_size,
        exclusion: args.exclusion.policy()?,
    };
    let corpus = Corpus::load(&args.input_dir)?;
    let report = build_report(&corpus, &config)?;
    write_csv(&report, &args.output)?;
    write_metadata(&report, sidecar(&args.output, ".meta.json"))?;
    for group in report.groups() {
        println!("{}", group_summary(&report, group));
    }
    Ok(report)
}

/// `GROUP: MNLCS 1.08952 [0.62, 1.56] ... (k undefined)` over the ALL scope.
pub fn group_summary(report: &IndicatorReport, group: &str) -> String {
    let rows: Vec<_> = report.rows.iter().filter(|r| r.group == group).collect();
    let undefined = rows.iter().filter(|r| !r.defined).count();
    let mut seen = Vec::new();
    let mut parts = Vec::new();
    for r in rows.iter().filter(|r| r.scope == "ALL") {
        if seen.contains(&r.indicator) {
            continue;
        }
        seen.push(r.indicator);
        let limits = match (r.lower, r.upper) {
            (Some(l), Some(u)) => format!(" [{}, {}]", format_sig(l), format_sig(u)),
            _ => " [undefined]".into(),
        };
        let est = if r.estimate.is_finite() { format_sig(r.estimate) } else { "undefined".into() };
        parts.push(format!("{} {est}{limits}", r.indicator));
    }
    let n = rows.iter().find(|r| r.scope == "ALL").map_or(0, |r| r.n);
    format!("{group} (n={n}): {}; {undefined}/{} rows undefined", parts.join(", "), rows.len())
}

pub fn cmd_sample(args: &SampleArgs) -> Result<()> {
    let corpus = Corpus::load(&args.input_dir)?;
    let sampled = sample_corpus(&corpus, SampleSpec::new(args.sample_size, args.seed)?)?;
    sampled.write(&args.output_dir)?;
    println!("sampled {} cells to at most {} articles", sampled.len(), args.sample_size);
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let scenarios = scenario_grid(&args.grid.spec()?)?;
    write_scenarios(&scenarios, &args.output_dir)?;
    println!("wrote {} scenario(s) to {}", scenarios.len(), args.output_dir.display());
    Ok(())
}

fn has_tsv(dir: &Path) -> Result<bool> {
    Ok(fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok())
        .any(|e| e.path().extension().is_some_and(|x| x == "tsv")))
}

fn slices_of(corpus: &Corpus, label: &str) -> Result<Vec<CorpusSlice>> {
    corpus
        .groups()
        .into_iter()
        .filter(|g| *g != WORLD)
        .map(|g| {
            Ok(CorpusSlice::from_corpus(corpus, g, None)?
                .with_source(g)
                .with_label(format!("{label}/{g}")))
        })
        .collect()
}

/// Loads comparison scenarios from a corpus directory, a directory of
/// scenario directories, or the grid flags.
pub fn load_scenarios(args: &CompareArgs) -> Result<Vec<CorpusSlice>> {
    let mut slices = Vec::new();
    match &args.input_dir {
        Some(dir) if has_tsv(dir)? => slices = slices_of(&Corpus::load(dir)?, "input")?,
        Some(dir) => {
            let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_dir())
                .collect();
            subdirs.sort();
            for sub in subdirs {
                let label = sub.file_name().unwrap_or_default().to_string_lossy().into_owned();
                slices.extend(slices_of(&Corpus::load(&sub)?, &label)?);
            }
        }
        None => {
            for s in scenario_grid(&args.grid.spec()?)? {
                slices.extend(slices_of(&s.corpus, &s.label)?);
            }
        }
    }
    if slices.is_empty() {
        bail!("no scenarios found");
    }
    Ok(slices)
}

pub fn cmd_compare_ci(args: &CompareArgs) -> Result<()> {
    let slices = load_scenarios(args)?;
    let opts = FormulaOptions {
        alpha: args.alpha,
        continuity: args.continuity,
        expansion: args.expansion_mode,
    };
    let basis = match args.width_basis {
        BasisArg::Full => WidthBasis::Full,
        BasisArg::Half => WidthBasis::Half,
    };
    let mut rows = Vec::new();
    for &indicator in &args.indicators {
        let base = BootstrapSpec::for_indicator(indicator, args.grid.seed);
        let spec = BootstrapSpec::new(
            args.bootstrap_iters.unwrap_or(base.iterations),
            args.grid.seed,
            !args.fixed_world,
            args.alpha,
        )?;
        rows.extend(comparison_suite_with(&slices, &[indicator], &spec, &opts, basis)?.rows);
    }
    let table = crate::bootstrap::ComparisonTable::from_rows(rows);
    write_comparison_csv(&table, &args.output)?;
    write_comparison_detail_csv(&table, sidecar(&args.output, ".detail.csv"))?;
    for s in &table.summaries {
        println!(
            "{} {}: {} compared, {} gaps; avg {} / {}; abs {} / {}; max {} / {}",
            s.source,
            s.indicator,
            s.count,
            s.gaps,
            format_sig(s.lower_avg),
            format_sig(s.upper_avg),
            format_sig(s.lower_abs),
            format_sig(s.upper_abs),
            format_sig(s.lower_max),
            format_sig(s.upper_max),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_compute_flags() {
        let cli = Cli::try_parse_from([
            "fieldnorm", "compute", "--input-dir", "in", "--indicators", "mnlcs,lundberg,prop",
            "--ci", "all", "--seed", "7", "--continuity", "on", "--expansion-mode", "expand-from-mean",
            "--min-articles", "50", "--output", "out.csv",
        ])
        .unwrap();
        let Command::Compute(a) = cli.command else { panic!("wrong command") };
        assert_eq!(a.indicators, vec![Indicator::Mnlcs, Indicator::LundbergZ, Indicator::PropCited]);
        assert_eq!(a.ci_method, CiMethod::All);
        assert_eq!(a.continuity, Continuity::On);
        assert_eq!(a.expansion_mode, ExpansionMode::ExpandFromMean);
        let p = a.exclusion.policy().unwrap();
        assert_eq!((p.min_articles, p.min_fraction_of_mean), (50, 0.25));
    }

    #[test]
    fn exclusion_off_by_default() {
        let cli = Cli::try_parse_from(["fieldnorm", "compute", "--input-dir", "x", "--output", "y"]).unwrap();
        let Command::Compute(a) = cli.command else { panic!() };
        assert_eq!(a.exclusion.policy().unwrap(), ExclusionPolicy::keep_all());
        assert_eq!(a.indicators, vec![Indicator::Mnlcs, Indicator::Emnpc, Indicator::Mnpc]);
    }

    #[test]
    fn rejects_unknown_indicator() {
        assert!(Cli::try_parse_from(["fieldnorm", "compute", "--input-dir", "x", "--output", "y", "--indicators", "h"]).is_err());
    }

    #[test]
    fn grid_groups_parse() {
        let cli = Cli::try_parse_from(["fieldnorm", "simulate", "--groups", "A:0.5,B", "--output-dir", "o"]).unwrap();
        let Command::Simulate(a) = cli.command else { panic!() };
        let spec = a.grid.spec().unwrap();
        assert_eq!(spec.groups, vec![("A".to_string(), 0.5), ("B".to_string(), 0.0)]);
    }
}

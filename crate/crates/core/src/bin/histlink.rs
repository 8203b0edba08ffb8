use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use histlink_core::eval::{self, AppearanceRange, GenParams, SweepGrid, Truth};
use histlink_core::io::{self, load_corpus, write_quarantine, write_results};
use histlink_core::metrics::SimilarityScore;
use histlink_core::{cluster_corpus, cluster_corpus_explained, Corpus, MatchConfig, NameMetric, RoleRuleSet};

#[derive(Parser)]
#[command(name = "histlink", version, about = "Link person mentions across historical records")]
struct Cli {
    /// Worker threads (default: all cores). Never changes the output.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster the mentions of a corpus into record sets.
    Match(MatchArgs),
    /// Write a synthetic corpus with ground truth.
    Generate(GenerateArgs),
    /// Score record sets against ground truth.
    Evaluate(EvaluateArgs),
    /// Score a grid of matcher settings on one corpus.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    events: PathBuf,
    #[arg(long)]
    persons: PathBuf,
    /// CSV with columns alias,canonical
    #[arg(long)]
    aliases: Option<PathBuf>,
    /// CSV with columns source_label,canonical_role
    #[arg(long)]
    role_map: Option<PathBuf>,
}

#[derive(Args)]
struct ConfigArgs {
    /// Role rule file (JSON); the built-in rules are used otherwise.
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long, default_value_t = histlink_core::model::DEFAULT_WINDOW_YEARS)]
    window_years: u32,
    #[arg(long, default_value_t = histlink_core::model::DEFAULT_NAME_THRESHOLD)]
    name_threshold: f64,
    #[arg(long, default_value_t = histlink_core::model::DEFAULT_LOCATION_THRESHOLD)]
    location_threshold: f64,
    /// Only match mentions whose events share enough named co-participants.
    #[arg(long)]
    require_relationships: bool,
    #[arg(long, default_value_t = histlink_core::model::DEFAULT_MIN_RELATIONSHIP_SUPPORT)]
    min_relationship_support: u32,
    /// jaro_winkler or normalized_edit
    #[arg(long, default_value = "jaro_winkler")]
    name_metric: NameMetric,
    /// Merge index groups with similar name keys.
    #[arg(long)]
    fuzzy_keys: bool,
    /// Treat a missing location as a mismatch instead of a match.
    #[arg(long)]
    strict_locations: bool,
}

impl ConfigArgs {
    fn build(&self) -> Result<MatchConfig> {
        let rules = match &self.rules {
            Some(p) => RoleRuleSet::from_path(p)?,
            None => RoleRuleSet::builtin(),
        };
        let config = MatchConfig {
            name_metric: self.name_metric,
            name_threshold: score_arg("--name-threshold", self.name_threshold)?,
            location_threshold: score_arg("--location-threshold", self.location_threshold)?,
            window_years: self.window_years,
            min_relationship_support: self.min_relationship_support,
            relationship_required: self.require_relationships,
            role_rules: Arc::new(rules),
            missing_location_matches: !self.strict_locations,
            fuzzy_keys: self.fuzzy_keys,
            ..MatchConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

fn score_arg(flag: &str, v: f64) -> Result<SimilarityScore> {
    SimilarityScore::new(v).with_context(|| format!("{flag} must be in [0, 1], got {v}"))
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: PathBuf,
    /// Also write every evaluated pair decision to decisions.csv.
    #[arg(long)]
    explain: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    individuals: usize,
    /// Defaults to a quarter of the individuals.
    #[arg(long)]
    families: Option<usize>,
    #[arg(long, default_value_t = 0)]
    events_min: u32,
    #[arg(long, default_value_t = 2)]
    events_max: u32,
    #[arg(long, default_value_t = 0.0)]
    typo_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    alias_rate: f64,
    #[arg(long, default_value_t = 0)]
    date_jitter: u32,
    #[arg(long, default_value_t = 0.0)]
    duplicate_name_rate: f64,
    #[arg(long, default_value_t = 0.5)]
    death_rate: f64,
    /// Skip marriages of the children.
    #[arg(long)]
    single_generation: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// sets.csv written by `match`
    #[arg(long)]
    sets: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// With --persons, break false matches down by role pair.
    #[arg(long, requires = "persons")]
    events: Option<PathBuf>,
    #[arg(long, requires = "events")]
    persons: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    truth: PathBuf,
    /// Comma-separated values; the base --window-years otherwise.
    #[arg(long, value_delimiter = ',')]
    windows: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    name_thresholds: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    location_thresholds: Vec<f64>,
    /// Comma-separated true/false values for the relationship requirement.
    #[arg(long, value_delimiter = ',')]
    relationships: Vec<bool>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("histlink: {}", describe(&e));
            ExitCode::FAILURE
        }
    }
}

/// The error chain on one line. Library errors already embed their source
/// in their message, so causes that are repeated verbatim are skipped.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = e.to_string();
    for cause in e.chain().skip(1) {
        let c = cause.to_string();
        if !msg.contains(&c) {
            msg.push_str(": ");
            msg.push_str(&c);
        }
    }
    msg
}

fn run(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("starting worker pool")?;
    pool.install(|| match cli.command {
        Command::Match(a) => run_match(a),
        Command::Generate(a) => run_generate(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Sweep(a) => run_sweep(a),
    })
}

fn load(input: &InputArgs) -> Result<(Corpus, io::IngestReport)> {
    let (corpus, report) =
        load_corpus(&input.events, &input.persons, input.aliases.as_deref(), input.role_map.as_deref())?;
    if !report.quarantined.is_empty() {
        eprintln!("{} row(s) quarantined", report.quarantined.len());
    }
    Ok((corpus, report))
}

fn run_match(args: MatchArgs) -> Result<()> {
    let config = args.config.build()?;
    let (corpus, report) = load(&args.input)?;
    let (sets, decisions) = if args.explain {
        let (s, d) = cluster_corpus_explained(&corpus, &config);
        (s, Some(d))
    } else {
        (cluster_corpus(&corpus, &config), None)
    };
    write_results(&args.out, &corpus, &sets, decisions.as_deref(), &config.role_rules)?;
    write_quarantine(&report, &args.out.join("quarantine.csv"))?;
    eprintln!(
        "{} records from {} events linked into {} sets; results in {}",
        report.records_loaded,
        report.events_loaded,
        sets.len(),
        args.out.display()
    );
    Ok(())
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let params = GenParams {
        n_individuals: args.individuals,
        families: args.families.unwrap_or((args.individuals / 4).max(1)),
        events_per_individual: AppearanceRange { min: args.events_min, max: args.events_max },
        typo_rate: args.typo_rate,
        location_alias_rate: args.alias_rate,
        date_jitter_years: args.date_jitter,
        duplicate_name_rate: args.duplicate_name_rate,
        death_rate: args.death_rate,
        second_generation: !args.single_generation,
        seed: args.seed,
    };
    let generated = eval::generate_corpus(&params)?;
    generated.write(&args.out)?;
    eprintln!(
        "{} records in {} events written to {}",
        generated.corpus.len(),
        generated.corpus.events().len(),
        args.out.display()
    );
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let sets = io::read_sets_csv(&args.sets)?;
    let truth = Truth::from_csv_path(&args.truth)?;
    let report = match (&args.events, &args.persons) {
        (Some(e), Some(p)) => {
            let (corpus, _) = load_corpus(e, p, None, None)?;
            eval::score_with_roles(&sets, &truth, &corpus)?
        }
        _ => eval::score(&sets, &truth)?,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{report}");
    }
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let base = args.config.build()?;
    let (corpus, _) = load(&args.input)?;
    let truth = Truth::from_csv_path(&args.truth)?;
    let scores = |flag: &str, v: &[f64]| v.iter().map(|&x| score_arg(flag, x)).collect::<Result<Vec<_>>>();
    let single = SweepGrid::single(&base);
    let grid = SweepGrid {
        window_years: if args.windows.is_empty() { single.window_years.clone() } else { args.windows },
        name_thresholds: if args.name_thresholds.is_empty() {
            single.name_thresholds.clone()
        } else {
            scores("--name-thresholds", &args.name_thresholds)?
        },
        location_thresholds: if args.location_thresholds.is_empty() {
            single.location_thresholds.clone()
        } else {
            scores("--location-thresholds", &args.location_thresholds)?
        },
        relationship_required: if args.relationships.is_empty() {
            single.relationship_required.clone()
        } else {
            args.relationships
        },
        fuzzy_keys: single.fuzzy_keys,
    };
    let rows = eval::sweep(&base, &grid, &corpus, &truth)?;
    match &args.out {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            eval::write_sweep_csv(&rows, BufWriter::new(f))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            eval::write_sweep_csv(&rows, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

//! Command-line surface of the corpus-similarity toolkit.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2
//! for data errors (missing files, bad encodings, insufficient data).
//! Data errors are reported on stderr as a JSON object
//! `{"error":{"kind":...,"message":...}}` so callers can parse them.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use corpsim::experiments::{
    calibrate, cross_validate, distributions_csv, expand_grid, register_matrix, run_experiment,
    run_grid, CorpusSource, ExperimentConfig,
};
use corpsim::{
    draw_samples, feature_overlap, load_corpus, select_features, vectorize, Error, FeatureSpace,
    FeatureType, MeasureId, ProfileRegistry, RegisterLabel, SourceTag, SplitTag,
    RECOMMENDED_MIN_SAMPLE_WORDS,
};

const NORMALIZATION_NOTES: &str = "\
Normalization rules (applied in order, bit-exact):
  1. whitespace-delimited tokens matching the URL patterns
     '<scheme>://...' or 'www....' (case-insensitive) or the email
     pattern 'local@domain.tld' are deleted;
  2. text is lowercased (standard full Unicode lowercasing, non-locale);
  3. only letters (Ll/Lm/Lo) and combining marks (Mn/Mc/Me) are kept:
     punctuation, symbols, digits, and format characters are deleted;
  4. whitespace runs collapse to single spaces;
  5. the token count is recorded;
  6. spaceless languages (zho, jpn, tha, tam) then drop all whitespace.

Randomness: xoshiro256** seeded via splitmix64; bounded draws use
Lemire rejection; shuffles are Fisher-Yates. Sub-seeds derive as
splitmix64(seed XOR fnv1a64(label)). Integer-only state makes every
draw platform-stable; identical seeds give byte-identical outputs.

Relative corpus paths resolve against --data-dir (or $CORPSIM_DATA_DIR)
when set, else against the working directory.";

#[derive(Parser)]
#[command(name = "corpsim", version, about = "Corpus similarity toolkit", after_long_help = NORMALIZATION_NOTES)]
struct Cli {
    /// Worker threads for parallel scoring (default: all cores).
    /// Results are identical at any job count.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Base directory for relative corpus paths (env: CORPSIM_DATA_DIR).
    #[arg(long, global = true, env = "CORPSIM_DATA_DIR")]
    data_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select a feature space from a corpus and write it as JSON.
    BuildFeatures(BuildFeaturesArgs),
    /// Score the similarity of two corpora from one sample each.
    Compare(CompareArgs),
    /// Draw fixed-size samples from a corpus as JSON lines.
    Sample(SampleArgs),
    /// Calibrate T1/T2 thresholds on the training split of a config.
    Calibrate(ConfigArgs),
    /// Run a configured experiment and write the report JSON.
    Evaluate(EvaluateArgs),
    /// Run a grid of experiments over sizes, feature types, and measures.
    Grid(GridArgs),
    /// K-fold cross-validation on the training split of a config.
    Crossval(CrossvalArgs),
    /// Fraction of features shared by two feature-space files.
    Overlap(OverlapArgs),
    /// Export a report's raw scores as tidy CSV for violin plots.
    ExportDist(ExportDistArgs),
}

#[derive(Args)]
struct BuildFeaturesArgs {
    /// Corpus file: UTF-8, one document per line.
    corpus: PathBuf,
    /// ISO-639-3 code from the bundled registry.
    #[arg(long)]
    language: String,
    /// Feature type (w1..w3, c2..c4); defaults to the language's best type.
    #[arg(long)]
    feature_type: Option<FeatureType>,
    #[arg(long, default_value_t = 5000)]
    n_features: usize,
    /// in_domain, out_of_domain, or custom:<name>.
    #[arg(long, default_value = "in_domain")]
    source_tag: String,
    /// Output path for the feature-space JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    corpus_a: PathBuf,
    corpus_b: PathBuf,
    #[arg(long)]
    language: String,
    /// Pre-built feature-space JSON. Mutually exclusive with
    /// --select-from.
    #[arg(long, conflicts_with_all = ["select_from", "feature_type", "n_features"])]
    features: Option<PathBuf>,
    /// Corpus to select features from when no --features file is given.
    #[arg(long)]
    select_from: Option<PathBuf>,
    #[arg(long)]
    feature_type: Option<FeatureType>,
    #[arg(long, default_value_t = 5000)]
    n_features: usize,
    #[arg(long, default_value = "spearman")]
    measure: String,
    #[arg(long, default_value_t = 10_000)]
    sample_size: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SampleArgs {
    corpus: PathBuf,
    #[arg(long)]
    language: String,
    #[arg(long, default_value = "X")]
    register: String,
    #[arg(long, default_value_t = 10_000)]
    size: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output JSONL path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit at most this many samples.
    #[arg(long)]
    max: Option<usize>,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output path for the calibration JSON (default: stdout only).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Report output path.
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    /// Override the feature-selection corpus with an independent one.
    #[arg(long)]
    out_of_domain: Option<PathBuf>,
    /// Also run one-vs-one / one-vs-all summaries (needs 3+ registers)
    /// and write them next to the report.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Also export the score distributions as CSV.
    #[arg(long)]
    export_dist: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated sample sizes in words.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Comma-separated feature types (w1..w3, c2..c4).
    #[arg(long, value_delimiter = ',')]
    feature_types: Vec<FeatureType>,
    /// Comma-separated feature-space sizes.
    #[arg(long, value_delimiter = ',')]
    n_features_list: Vec<usize>,
    /// Comma-separated measures.
    #[arg(long, value_delimiter = ',')]
    measures: Vec<String>,
    #[arg(long, default_value = "grid.json")]
    out: PathBuf,
    /// Optional matrix CSV output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CrossvalArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OverlapArgs {
    space_a: PathBuf,
    space_b: PathBuf,
}

#[derive(Args)]
struct ExportDistArgs {
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    if let Some(jobs) = cli.jobs {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized; --jobs ignored");
        }
    }

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = serde_json::json!({
                "error": { "kind": e.kind(), "message": e.to_string() }
            });
            eprintln!("{payload}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::BuildFeatures(args) => cmd_build_features(cli, args),
        Command::Compare(args) => cmd_compare(cli, args),
        Command::Sample(args) => cmd_sample(cli, args),
        Command::Calibrate(args) => cmd_calibrate(cli, args),
        Command::Evaluate(args) => cmd_evaluate(cli, args),
        Command::Grid(args) => cmd_grid(cli, args),
        Command::Crossval(args) => cmd_crossval(cli, args),
        Command::Overlap(args) => cmd_overlap(cli, args),
        Command::ExportDist(args) => cmd_export_dist(cli, args),
    }
}

impl Cli {
    /// Resolve a user-supplied path against --data-dir when relative.
    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.data_dir {
            Some(base) if path.is_relative() => base.join(path),
            _ => path.to_path_buf(),
        }
    }

    fn rebase_config(&self, config: &mut ExperimentConfig) {
        let Some(base) = &self.data_dir else { return };
        let rebase = |source: &mut CorpusSource| {
            if let CorpusSource::Path(p) = source {
                if p.is_relative() {
                    *p = base.join(&p);
                }
            }
        };
        for reg in &mut config.registers {
            if let Some(s) = reg.train.as_mut() {
                rebase(s);
            }
            if let Some(s) = reg.test.as_mut() {
                rebase(s);
            }
            if let Some(s) = reg.validation.as_mut() {
                rebase(s);
            }
        }
        if let Some(s) = config.out_of_domain.as_mut() {
            rebase(s);
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_config(cli: &Cli, path: &Path) -> Result<ExperimentConfig, Error> {
    let mut config = ExperimentConfig::from_json(&read_to_string(path)?)?;
    cli.rebase_config(&mut config);
    Ok(config)
}

fn parse_measure(s: &str) -> Result<MeasureId, Error> {
    s.parse()
}

fn warn_small_sample(size: usize) {
    if size < RECOMMENDED_MIN_SAMPLE_WORDS {
        eprintln!(
            "warning: sample size {size} is below the recommended minimum of \
             {RECOMMENDED_MIN_SAMPLE_WORDS} words; scores may be unstable"
        );
    }
}

fn cmd_build_features(cli: &Cli, args: &BuildFeaturesArgs) -> Result<(), Error> {
    let registry = ProfileRegistry::bundled();
    let profile = registry.get(&args.language)?;
    let feature_type = args.feature_type.unwrap_or(profile.default_feature);
    let source_tag: SourceTag = args.source_tag.parse()?;
    let corpus = load_corpus(
        &cli.resolve(&args.corpus),
        profile,
        RegisterLabel::new("X")?,
        SplitTag::Unsplit,
    )?;
    let space = select_features(&corpus, profile, feature_type, args.n_features, source_tag)?;
    write_file(&args.out, &space.to_json())?;
    println!(
        "{}",
        serde_json::json!({
            "space_id": space.id(),
            "language": space.language(),
            "feature_type": space.feature_type().to_string(),
            "n_features": space.len(),
            "out": args.out.display().to_string(),
        })
    );
    Ok(())
}

fn cmd_compare(cli: &Cli, args: &CompareArgs) -> Result<(), Error> {
    let registry = ProfileRegistry::bundled();
    let profile = registry.get(&args.language)?;
    let measure = parse_measure(&args.measure)?;
    warn_small_sample(args.sample_size);

    let space = match (&args.features, &args.select_from) {
        (Some(path), _) => FeatureSpace::from_json(&read_to_string(&cli.resolve(path))?)?,
        (None, Some(path)) => {
            let feature_type = args.feature_type.unwrap_or(profile.default_feature);
            let corpus = load_corpus(
                &cli.resolve(path),
                profile,
                RegisterLabel::new("X")?,
                SplitTag::Unsplit,
            )?;
            select_features(
                &corpus,
                profile,
                feature_type,
                args.n_features,
                SourceTag::InDomain,
            )?
        }
        (None, None) => {
            return Err(Error::Config {
                message: "compare needs --features or --select-from".into(),
            })
        }
    };

    let one_sample = |path: &Path, label: &str| -> Result<_, Error> {
        let corpus = load_corpus(
            &cli.resolve(path),
            profile,
            RegisterLabel::new(label)?,
            SplitTag::Unsplit,
        )?;
        let samples = draw_samples(&corpus, args.sample_size, args.seed)?;
        vectorize(&samples[0], &space)
    };
    let va = one_sample(&args.corpus_a, "A")?;
    let vb = one_sample(&args.corpus_b, "B")?;
    let score = corpsim::score(measure, &va, &vb)?;
    println!(
        "{}",
        serde_json::json!({
            "measure": measure.to_string(),
            "score": score.value,
            "n_features": space.len(),
            "sample_size": args.sample_size,
        })
    );
    Ok(())
}

fn cmd_sample(cli: &Cli, args: &SampleArgs) -> Result<(), Error> {
    let registry = ProfileRegistry::bundled();
    let profile = registry.get(&args.language)?;
    warn_small_sample(args.size);
    let corpus = load_corpus(
        &cli.resolve(&args.corpus),
        profile,
        RegisterLabel::new(&args.register)?,
        SplitTag::Unsplit,
    )?;
    let mut samples = draw_samples(&corpus, args.size, args.seed)?;
    if let Some(max) = args.max {
        samples.truncate(max);
    }
    let mut out = String::new();
    for sample in &samples {
        out.push_str(
            &serde_json::json!({
                "id": sample.id,
                "register": sample.register.as_str(),
                "word_count": sample.word_count,
                "text": sample.text,
            })
            .to_string(),
        );
        out.push('\n');
    }
    match &args.out {
        Some(path) => write_file(path, &out)?,
        None => print!("{out}"),
    }
    eprintln!("{} samples of {} words", samples.len(), args.size);
    Ok(())
}

fn cmd_calibrate(cli: &Cli, args: &ConfigArgs) -> Result<(), Error> {
    let config = load_config(cli, &args.config)?;
    let report = calibrate(&config)?;
    if let Some(path) = &args.out {
        write_file(path, &report.to_json())?;
    }
    println!("condition means (training split):");
    for (register, mean) in &report.condition_means.same_register {
        println!("  {register}-{register}  {mean}");
    }
    for (pair, mean) in &report.condition_means.different_register {
        println!("  {pair}  {mean}");
    }
    println!(
        "T1 = {}   T2 = {}   active = {} ({})",
        report.threshold_t1.value,
        report.threshold_t2.value,
        report.threshold.value,
        report.threshold.method,
    );
    Ok(())
}

fn cmd_evaluate(cli: &Cli, args: &EvaluateArgs) -> Result<(), Error> {
    let mut config = load_config(cli, &args.config)?;
    if let Some(path) = &args.out_of_domain {
        config.out_of_domain = Some(CorpusSource::Path(cli.resolve(path)));
    }
    warn_small_sample(config.sample_size_words);

    if let Some(matrix_path) = &args.matrix {
        let (report, matrix) = register_matrix(&config)?;
        write_file(&args.out, &report.to_json())?;
        write_file(matrix_path, &matrix.to_json())?;
        if let Some(dist) = &args.export_dist {
            write_file(dist, &distributions_csv(&report)?)?;
        }
        print_report_table(&report);
        println!("one-vs-one:");
        for (pair, acc) in &matrix.one_vs_one {
            println!("  {pair}  {:.3}", acc);
        }
        println!("one-vs-all:");
        for (register, acc) in &matrix.one_vs_all {
            println!("  {register}  {:.3}", acc);
        }
        return Ok(());
    }

    let report = run_experiment(&config)?;
    write_file(&args.out, &report.to_json())?;
    if let Some(dist) = &args.export_dist {
        write_file(dist, &distributions_csv(&report)?)?;
    }
    print_report_table(&report);
    Ok(())
}

fn print_report_table(report: &corpsim::ExperimentReport) {
    println!("condition  count   mean      stdev     accuracy");
    for (key, stats) in &report.condition_stats {
        println!(
            "{key:<10} {:<7} {:<9.4} {:<9.4} {:.3}",
            stats.count, stats.mean, stats.stdev, stats.accuracy
        );
    }
    if let Some(overlap) = report.feature_overlap {
        println!("feature overlap (in-domain vs out-of-domain): {overlap:.4}");
    }
    println!(
        "threshold {} = {} ({})",
        report.threshold.method, report.threshold.value, report.threshold.measure
    );
    println!("overall accuracy: {}", report.overall_accuracy);
}

fn cmd_grid(cli: &Cli, args: &GridArgs) -> Result<(), Error> {
    let base = load_config(cli, &args.config)?;
    let measures = args
        .measures
        .iter()
        .map(|s| parse_measure(s))
        .collect::<Result<Vec<_>, Error>>()?;
    let configs = expand_grid(
        &base,
        &args.sizes,
        &args.feature_types,
        &args.n_features_list,
        &measures,
    );
    eprintln!("running {} grid cells", configs.len());
    let grid = run_grid(&configs);
    write_file(&args.out, &grid.to_json())?;
    if let Some(csv) = &args.csv {
        write_file(csv, &grid.to_csv())?;
    }
    print!("{}", grid.to_csv());
    Ok(())
}

fn cmd_crossval(cli: &Cli, args: &CrossvalArgs) -> Result<(), Error> {
    let config = load_config(cli, &args.config)?;
    let accuracies = cross_validate(&config, args.folds)?;
    let payload = serde_json::json!({
        "folds": args.folds,
        "accuracies": accuracies,
    });
    if let Some(path) = &args.out {
        write_file(path, &format!("{payload:#}\n"))?;
    }
    println!("{payload}");
    Ok(())
}

fn cmd_overlap(cli: &Cli, args: &OverlapArgs) -> Result<(), Error> {
    let a = FeatureSpace::from_json(&read_to_string(&cli.resolve(&args.space_a))?)?;
    let b = FeatureSpace::from_json(&read_to_string(&cli.resolve(&args.space_b))?)?;
    let overlap = feature_overlap(&a, &b)?;
    println!("{}", serde_json::json!({ "overlap": overlap }));
    Ok(())
}

fn cmd_export_dist(cli: &Cli, args: &ExportDistArgs) -> Result<(), Error> {
    let report = corpsim::ExperimentReport::from_json(&read_to_string(&cli.resolve(&args.report))?)?;
    let csv = distributions_csv(&report)?;
    write_file(&args.out, &csv)?;
    eprintln!("{} rows -> {}", csv.lines().count() - 1, args.out.display());
    Ok(())
}

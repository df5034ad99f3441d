mod config;
mod manifest;
mod report;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use leadlag_core::analysis::{analyze_topics, pair_pipeline, AnalysisInputs, ContentStatus, SubjectRecord};
use leadlag_core::content::{import_projection, PointSource};
use leadlag_core::corpus::{load_documents, load_embeddings, validate, LoadReport};
use leadlag_core::export;
use leadlag_core::hierarchy::{depth_sweep, top_level_lag_summary};
use leadlag_core::signals::{ImpactBasis, LabeledCorpus, Representation};
use leadlag_core::synth::{generate, SynthConfig};
use leadlag_core::{load_taxonomy, CorpusStore, EmbeddingTable, Error, Taxonomy, YearRange};

use config::{CommonArgs, RunConfig};
use manifest::Manifest;

/// A command failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: String) -> Self {
        Failure { code: 1, message }
    }

    pub fn input(message: String) -> Self {
        Failure { code: 2, message }
    }

    fn numerical(message: String) -> Self {
        Failure { code: 3, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::input(e.to_string())
        } else {
            Failure::numerical(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "leadlag", version, about = "Does science lead industry? Lead-lag analytics over two topic-annotated corpora.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check documents against the taxonomy and report rejections
    Validate(CommonArgs),
    /// Frequency and impact signals per topic
    Signals(CommonArgs),
    /// CCAUC ratio, MCC lag and Granger summary per topic
    Trend(CommonArgs),
    /// Granger test results for every lag order
    Granger(CommonArgs),
    /// Content similarity matrices and triangular ratios
    Content(CommonArgs),
    /// Depth-swept and per-root summaries
    Hierarchy(CommonArgs),
    /// Analysis of the most frequent co-occurring topic pairs
    Pairs(CommonArgs),
    /// Generate a synthetic corpus with a planted lag
    Synth(SynthArgs),
    /// Render SVG charts from summary CSVs
    Report(ReportArgs),
    /// Every analysis plus the report in one pass
    Run(CommonArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "synth")]
    out: PathBuf,
    #[arg(long)]
    years: Option<YearRange>,
    #[arg(long, default_value_t = 8)]
    roots: usize,
    #[arg(long, default_value_t = 5)]
    branching: usize,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Cap on the number of topics (breadth-first)
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long, default_value_t = 3)]
    lag: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 4)]
    docs_per_topic_year: usize,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 0.5)]
    drift: f64,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Directory holding top_level.csv and depth_summary.csv
    #[arg(long)]
    from: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            if f.code == 1 {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Synth(args) => return cmd_synth(args),
        Command::Report(args) => return cmd_report(args),
        _ => {}
    }
    let (name, args) = match &command {
        Command::Validate(a) => ("validate", a),
        Command::Signals(a) => ("signals", a),
        Command::Trend(a) => ("trend", a),
        Command::Granger(a) => ("granger", a),
        Command::Content(a) => ("content", a),
        Command::Hierarchy(a) => ("hierarchy", a),
        Command::Pairs(a) => ("pairs", a),
        Command::Run(a) => ("run", a),
        Command::Synth(_) | Command::Report(_) => unreachable!(),
    };
    let cfg = RunConfig::resolve(args)?;
    let docs = cfg.require_docs()?.to_owned();
    let taxonomy = cfg.require_taxonomy()?.to_owned();
    if name == "content" && cfg.embeddings.is_none() && cfg.coords.is_none() {
        return Err(Failure::usage("content needs --embeddings or --coords".into()));
    }
    create_dir(&cfg.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))?;
    let result = pool.install(|| execute(name, &cfg, &docs, &taxonomy));
    if let Err(f) = &result {
        if f.code == 3 {
            write_diagnostic(name, &cfg, &f.message);
        }
    }
    result
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))
}

fn write_diagnostic(command: &str, cfg: &RunConfig, message: &str) {
    let path = cfg.out.join("diagnostic.txt");
    let text = format!(
        "command: {command}\nerror: {message}\nconfig: {}\n",
        serde_json::to_string(cfg).unwrap_or_default()
    );
    if std::fs::write(&path, text).is_ok() {
        eprintln!("diagnostic written to {}", path.display());
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

/// Writes one output file through `f` and records it in the manifest.
fn emit<F>(manifest: &mut Manifest, dir: &Path, name: &str, f: F) -> Result<(), Failure>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), Failure>,
{
    let mut w = create(dir, name)?;
    f(&mut w)?;
    w.flush()
        .map_err(|e| Failure::input(format!("cannot write {name}: {e}")))?;
    manifest.output(name);
    Ok(())
}

struct Loaded {
    store: CorpusStore,
    report: LoadReport,
    taxonomy: Taxonomy,
    embeddings: Option<EmbeddingTable>,
    coords: Option<BTreeMap<String, (f64, f64)>>,
}

fn load(cfg: &RunConfig, docs: &Path, taxonomy: &Path, manifest: &mut Manifest, points: bool) -> Result<Loaded, Failure> {
    let years: YearRange = cfg.analysis.years;
    manifest.stage("load");
    manifest.input(taxonomy);
    let taxonomy = load_taxonomy(taxonomy)?;
    manifest.input(docs);
    let (store, report) = load_documents(docs, years)?;
    let mut embeddings = None;
    let mut coords = None;
    if points {
        // imported coordinates take precedence over embeddings
        if let Some(path) = &cfg.coords {
            manifest.input(path);
            coords = Some(import_projection(path)?);
        } else if let Some(path) = &cfg.embeddings {
            manifest.input(path);
            embeddings = Some(load_embeddings(path, 0, &store)?);
        }
    }
    manifest.count("topics", taxonomy.len());
    manifest.count("science_documents", report.accepted(leadlag_core::Corpus::Science));
    manifest.count("industry_documents", report.accepted(leadlag_core::Corpus::Industry));
    manifest.count("rejected_documents", report.rejections.len());
    Ok(Loaded {
        store,
        report,
        taxonomy,
        embeddings,
        coords,
    })
}

fn write_rejections(loaded: &Loaded, manifest: &mut Manifest, out: &Path) -> Result<(), Failure> {
    emit(manifest, out, "rejections.txt", |w| {
        loaded
            .report
            .write_rejections(w)
            .map_err(|e| Failure::input(format!("cannot write rejections: {e}")))
    })
}

fn points_of(loaded: &Loaded) -> Option<PointSource<'_>> {
    match (&loaded.coords, &loaded.embeddings) {
        (Some(c), _) => Some(PointSource::Coordinates(c)),
        (None, Some(e)) => Some(PointSource::Embeddings(e)),
        (None, None) => None,
    }
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

fn write_matrices(records: &[SubjectRecord], manifest: &mut Manifest, out: &Path, dir: &str) -> Result<(), Failure> {
    for r in records.iter().filter(|r| r.analyzable()) {
        let ContentStatus::Done { matrices, .. } = &r.content else {
            continue;
        };
        for m in matrices {
            let stem = format!("{dir}/{}.{}", file_safe(&r.subject.to_string()), m.metric);
            let io = |e: std::io::Error| Failure::input(format!("cannot write matrix: {e}"));
            emit(manifest, out, &format!("{stem}.csv"), |w| m.write_values_csv(w).map_err(io))?;
            emit(manifest, out, &format!("{stem}.mask.csv"), |w| m.write_mask_csv(w).map_err(io))?;
        }
    }
    Ok(())
}

fn content_counts(records: &[SubjectRecord], manifest: &mut Manifest, prefix: &str) {
    let (mut done, mut skipped, mut missing) = (0usize, 0usize, 0usize);
    for r in records.iter().filter(|r| r.analyzable()) {
        match &r.content {
            ContentStatus::Done { missing_position, .. } => {
                done += 1;
                missing += missing_position;
            }
            ContentStatus::Skipped(_) => skipped += 1,
            ContentStatus::NotRequested => {}
        }
    }
    manifest.count(&format!("{prefix}content_subjects"), done);
    manifest.count(&format!("{prefix}content_skipped"), skipped);
    manifest.count(&format!("{prefix}documents_without_position"), missing);
}

fn execute(name: &str, cfg: &RunConfig, docs: &Path, taxonomy: &Path) -> Result<(), Failure> {
    let mut manifest = Manifest::new(name, cfg);
    let out = cfg.out.as_path();
    let wants_points = matches!(name, "content" | "hierarchy" | "pairs" | "run");
    let loaded = load(cfg, docs, taxonomy, &mut manifest, wants_points)?;
    write_rejections(&loaded, &mut manifest, out)?;

    if name == "validate" {
        return cmd_validate(&loaded, manifest, out);
    }

    let labeled = LabeledCorpus::new(&loaded.store, &loaded.taxonomy);
    manifest.stage("quantize");
    let basis = ImpactBasis::build(&labeled);
    let inputs = AnalysisInputs {
        labeled: &labeled,
        basis: &basis,
        points: if wants_points { points_of(&loaded) } else { None },
    };
    let analysis = &cfg.analysis;
    let csv_err = |e: Error| Failure::from(e);

    if matches!(name, "signals" | "trend" | "granger" | "content" | "hierarchy" | "run") {
        manifest.stage("analyze");
        let records = analyze_topics(inputs, analysis)?;
        let analyzable = records.iter().filter(|r| r.analyzable()).count();
        manifest.count("analyzable_topics", analyzable);
        manifest.count("excluded_topics", records.len() - analyzable);
        manifest.stage("write");
        if matches!(name, "signals" | "run") {
            emit(&mut manifest, out, "signals.csv", |w| export::write_signals(&records, false, w).map_err(csv_err))?;
        }
        if matches!(name, "trend" | "run") {
            emit(&mut manifest, out, "trend.csv", |w| export::write_trend(&records, false, w).map_err(csv_err))?;
        }
        if matches!(name, "granger" | "run") {
            emit(&mut manifest, out, "granger.csv", |w| export::write_granger(&records, false, w).map_err(csv_err))?;
        }
        if inputs.points.is_some() && matches!(name, "content" | "run") {
            content_counts(&records, &mut manifest, "");
            emit(&mut manifest, out, "content.csv", |w| {
                export::write_content(&records, false, &analysis.metrics, w).map_err(csv_err)
            })?;
            write_matrices(&records, &mut manifest, out, "delta")?;
        }
        if matches!(name, "hierarchy" | "run") {
            let depth = depth_sweep(&records, &loaded.taxonomy, analysis)?;
            emit(&mut manifest, out, report::DEPTH_CSV, |w| {
                export::write_depth_summary(&depth, w).map_err(csv_err)
            })?;
            let representation = if analysis.representations.contains(&Representation::Impact) {
                Representation::Impact
            } else {
                analysis.representations[0]
            };
            manifest.count("top_level_representation", representation.as_str());
            let top = top_level_lag_summary(&records, &loaded.taxonomy, representation);
            emit(&mut manifest, out, report::TOP_LEVEL_CSV, |w| export::write_top_level(&top, w).map_err(csv_err))?;
        }
    }

    if matches!(name, "pairs" | "run") {
        manifest.stage("pairs");
        let pairs = pair_pipeline(inputs, analysis)?;
        manifest.count("pairs_analyzed", pairs.records.len());
        manifest.count("pairs_skipped", pairs.skipped.len());
        let records = &pairs.records;
        emit(&mut manifest, out, "pairs.csv", |w| export::write_pair_selection(&pairs, w).map_err(csv_err))?;
        emit(&mut manifest, out, "pairs_signals.csv", |w| export::write_signals(records, true, w).map_err(csv_err))?;
        emit(&mut manifest, out, "pairs_trend.csv", |w| export::write_trend(records, true, w).map_err(csv_err))?;
        emit(&mut manifest, out, "pairs_granger.csv", |w| export::write_granger(records, true, w).map_err(csv_err))?;
        if inputs.points.is_some() {
            content_counts(records, &mut manifest, "pairs_");
            emit(&mut manifest, out, "pairs_content.csv", |w| {
                export::write_content(records, true, &analysis.metrics, w).map_err(csv_err)
            })?;
            write_matrices(records, &mut manifest, out, "pairs_delta")?;
        }
    }

    if name == "run" {
        manifest.stage("report");
        for chart in report::render(out, out)? {
            if let Some(file) = chart.file_name() {
                manifest.output(file.to_string_lossy());
            }
        }
    }
    manifest.write(out)?;
    Ok(())
}

fn cmd_validate(loaded: &Loaded, mut manifest: Manifest, out: &Path) -> Result<(), Failure> {
    manifest.stage("validate");
    let report = validate(&loaded.store, &loaded.taxonomy);
    let csv_io = |e: csv::Error| Failure::input(format!("cannot write validation output: {e}"));
    emit(&mut manifest, out, "validation_years.csv", |w| {
        let mut c = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        c.write_record(["corpus", "year", "documents"]).map_err(csv_io)?;
        for ((corpus, year), n) in &report.year_counts {
            c.write_record([corpus.to_string(), year.to_string(), n.to_string()]).map_err(csv_io)?;
        }
        c.flush().map_err(|e| csv_io(e.into()))
    })?;
    emit(&mut manifest, out, "unknown_topics.csv", |w| {
        let mut c = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        c.write_record(["id", "topic"]).map_err(csv_io)?;
        for (id, topics) in &report.unknown_topics {
            for t in topics {
                c.write_record([id, t]).map_err(csv_io)?;
            }
        }
        c.flush().map_err(|e| csv_io(e.into()))
    })?;
    emit(&mut manifest, out, "topic_coverage.csv", |w| {
        let mut c = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        c.write_record(["topic", "documents"]).map_err(csv_io)?;
        for (topic, n) in &report.topic_coverage {
            c.write_record([topic.clone(), n.to_string()]).map_err(csv_io)?;
        }
        c.flush().map_err(|e| csv_io(e.into()))
    })?;
    let rejected = loaded.report.rejections.len();
    let unknown = report.unknown_topics.len();
    manifest.count("documents_with_unknown_topics", unknown);
    manifest.write(out)?;
    println!(
        "{} documents accepted, {rejected} rejected, {unknown} with unknown topics",
        loaded.store.len()
    );
    if rejected > 0 || unknown > 0 {
        return Err(Failure::input(format!(
            "validation failed: {rejected} rejected documents, {unknown} documents with unknown topics (see {})",
            out.display()
        )));
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Failure> {
    let config = SynthConfig {
        seed: args.seed,
        n_root_topics: args.roots,
        branching: args.branching,
        depth: args.depth,
        n_topics: args.topics,
        years: args.years.unwrap_or_default(),
        planted_lag: args.lag,
        noise_level: args.noise,
        docs_per_topic_year: args.docs_per_topic_year,
        embedding_dim: args.dim,
        cluster_drift: args.drift,
        ..SynthConfig::default()
    };
    config.check().map_err(|e| Failure::usage(e.to_string()))?;
    let mut manifest = Manifest::new("synth", &config);
    manifest.stage("generate");
    let output = generate(&config)?;
    manifest.stage("write");
    output.write(&args.out)?;
    manifest.count("topics", output.manifest.topics);
    manifest.count("science_documents", output.manifest.science_documents);
    manifest.count("industry_documents", output.manifest.industry_documents);
    for f in [
        leadlag_core::synth::TAXONOMY_FILE,
        leadlag_core::synth::DOCUMENTS_FILE,
        leadlag_core::synth::EMBEDDINGS_FILE,
        leadlag_core::synth::MANIFEST_FILE,
    ] {
        manifest.output(f);
    }
    manifest.write(&args.out)?;
    println!(
        "{} topics, {} science and {} industry documents written to {}",
        output.manifest.topics,
        output.manifest.science_documents,
        output.manifest.industry_documents,
        args.out.display()
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), Failure> {
    let from = args.from.clone().unwrap_or_else(|| args.out.clone());
    let charts = report::render(&from, &args.out)?;
    let mut manifest = Manifest::new(
        "report",
        &serde_json::json!({ "from": from, "out": args.out }),
    );
    manifest.input(&from.join(report::TOP_LEVEL_CSV));
    manifest.input(&from.join(report::DEPTH_CSV));
    for c in &charts {
        if let Some(f) = c.file_name() {
            manifest.output(f.to_string_lossy());
        }
    }
    manifest.write(&args.out)?;
    Ok(())
}

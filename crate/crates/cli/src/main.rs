//! `poi`: command-line front end for the spam campaign pipeline.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal
//! error.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use poi_core::classify::{
    apply_combination, cross_validate, read_labels, ClassifierKind, Combination, CvConfig, Dataset,
};
use poi_core::evalmetrics::compare_to_null;
use poi_core::graph::{
    build_graphs, detect_communities, k_core, read_edge_list, Method, Partition,
};
use poi_core::grouping::{group_similar, groups_from_csv, groups_to_csv, GroupInput};
use poi_core::ingest::{
    build_documents, parse_timelines, StopWords, Timeline, TokenMode, Tokenizer,
    DEFAULT_PER_USER_CAP,
};
use poi_core::pipeline::{run_pipeline, PipelineConfig, PipelineRun};
use poi_core::poi::{build_prob_table, read_table_csv};
use poi_core::simulate::{
    attack_curve, default_fractions, run_attack, run_early_detection, AttackKind,
};
use poi_core::synth::{generate, write_dataset, SynthConfig};
use poi_core::topics::{
    community_topics, fit_lda, label_documents, labels_from_csv, labels_to_csv, LdaConfig,
};
use serde_json::json;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] poi_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use poi_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Core(E::Config(_)) => 1,
            CliError::Core(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "poi",
    version,
    about = "Spam campaign detection from parties of interest"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse timelines and write per-user documents.
    Ingest(IngestArgs),
    /// Build the follow graph, take its k-core and detect communities.
    Graph(GraphArgs),
    /// Fit the topic model for one neighborhood and label its documents.
    Topics(TopicsArgs),
    /// Cluster near-duplicate messages.
    Groups(GroupsArgs),
    /// Build the PoI probability table of one neighborhood.
    Poi(PoiArgs),
    /// Cross-validate a classifier on probability tables.
    Train(TrainArgs),
    /// Compare community/topic agreement with a random null grouping.
    #[command(name = "validate-h1")]
    ValidateH1(PipelineArgs),
    /// Sweep the fraction of communities in which spam is observed.
    #[command(name = "simulate-early")]
    SimulateEarly(EarlyArgs),
    /// Poisoning or evasion experiment.
    #[command(name = "simulate-attack")]
    SimulateAttack(AttackArgs),
    /// Generate a synthetic data directory.
    Synth(SynthArgs),
    /// Run every stage over a data directory.
    Run(PipelineArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    timelines: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PER_USER_CAP)]
    cap: usize,
    /// Messages per document.
    #[arg(long = "l", default_value_t = 20)]
    document_length: usize,
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list of one neighborhood.
    #[arg(long)]
    edges: PathBuf,
    /// Output partition CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2)]
    k_core: usize,
    #[arg(long, default_value = "map-equation")]
    method: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TopicsArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    timelines: PathBuf,
    #[arg(long)]
    partition: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    topics: usize,
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    #[arg(long = "l", default_value_t = 20)]
    document_length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GroupsArgs {
    #[arg(long)]
    timelines: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Args)]
struct PoiArgs {
    #[arg(long)]
    timelines: PathBuf,
    #[arg(long)]
    groups: PathBuf,
    #[arg(long)]
    partition: PathBuf,
    #[arg(long)]
    doc_topics: PathBuf,
    #[arg(long, default_value = "nbhd")]
    neighborhood: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// One or more probability tables.
    #[arg(long = "table", required = true)]
    tables: Vec<PathBuf>,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 3)]
    combination: u8,
    #[arg(long, default_value = "linear-svm")]
    classifier: String,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone, Default)]
struct PipelineArgs {
    /// TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory holding `edges/`, `timelines.jsonl` and `labels.csv`.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    timelines: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    neighborhoods: Option<Vec<String>>,
    #[arg(long = "l")]
    document_length: Option<usize>,
    #[arg(long)]
    k_core: Option<usize>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    lda_iterations: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    combination: Option<u8>,
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Reuse intermediates of a previous run with the same settings.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct EarlyArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    kind: String,
    /// Single fraction; without it the full grid is swept.
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    /// TOML file with generator settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    neighborhoods: Option<usize>,
    #[arg(long)]
    communities: Option<usize>,
    #[arg(long)]
    community_size: Option<usize>,
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    docs_per_user: Option<usize>,
    #[arg(long)]
    benign_groups: Option<usize>,
    #[arg(long)]
    spam_groups: Option<usize>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        poi_core::Error::Io {
            path: path.into(),
            source: e,
        }
        .into()
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| poi_core::Error::Io {
            path: dir.into(),
            source: e,
        })?;
    }
    fs::write(path, text).map_err(|e| {
        poi_core::Error::Io {
            path: path.into(),
            source: e,
        }
        .into()
    })
}

fn print_json(value: &serde_json::Value) {
    use std::io::Write;
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(value).expect("json")
    );
}

fn stopwords(path: Option<&Path>) -> Result<StopWords> {
    Ok(match path {
        Some(p) => StopWords::from_lines(&read(p)?),
        None => StopWords::english(),
    })
}

fn timelines(path: &Path, cap: usize) -> Result<BTreeMap<String, Timeline>> {
    let file = fs::File::open(path).map_err(|e| poi_core::Error::Io {
        path: path.into(),
        source: e,
    })?;
    let parsed = parse_timelines(BufReader::new(file), cap)?;
    for e in &parsed.errors {
        eprintln!("warning: {}: {e}", path.display());
    }
    Ok(parsed.timelines)
}

fn load_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    toml::from_str(&read(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl PipelineArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg: PipelineConfig = match &self.config {
            Some(p) => load_toml(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(data) = &self.data {
            let base = PipelineConfig::for_data_dir(data, &cfg.output);
            cfg.edges = base.edges;
            cfg.timelines = base.timelines;
            cfg.labels = base.labels;
            if cfg.stopwords.is_none() {
                cfg.stopwords = base.stopwords;
            }
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    cfg.$field = v.clone();
                }
            )*};
        }
        set!(
            edges,
            timelines,
            labels,
            neighborhoods,
            document_length,
            k_core,
            method,
            topics,
            lda_iterations,
            beta,
            combination,
            classifier,
            folds,
            tau,
            seed,
            workers
        );
        if let Some(out) = &self.out {
            cfg.output = out.clone();
        }
        if self.stopwords.is_some() {
            cfg.stopwords = self.stopwords.clone();
        }
        if self.alpha.is_some() {
            cfg.alpha = self.alpha;
        }
        cfg.resume |= self.resume;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn cmd_ingest(a: &IngestArgs) -> Result<()> {
    let file = fs::File::open(&a.timelines).map_err(|e| poi_core::Error::Io {
        path: a.timelines.clone(),
        source: e,
    })?;
    let parsed = parse_timelines(BufReader::new(file), a.cap)?;
    for e in &parsed.errors {
        eprintln!("warning: {}: {e}", a.timelines.display());
    }
    let tokenizer = Tokenizer::new(stopwords(a.stopwords.as_deref())?, TokenMode::Topic);
    let mut out = String::from("doc_id\tuser\tmessages\ttokens\n");
    let mut docs = 0;
    for t in parsed.timelines.values() {
        for d in build_documents(t, a.document_length, &tokenizer)? {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                d.doc_id,
                d.user,
                d.source_message_ids.len(),
                d.tokens.join()
            ));
            docs += 1;
        }
    }
    write(&a.out.join("documents.tsv"), &out)?;
    print_json(&json!({
        "users": parsed.timelines.len(),
        "messages": parsed.message_count(),
        "documents": docs,
        "malformed_records": parsed.errors.len(),
        "duplicate_records": parsed.duplicates,
        "truncated_messages": parsed.truncated,
    }));
    Ok(())
}

fn cmd_graph(a: &GraphArgs) -> Result<()> {
    let method: Method = a.method.parse()?;
    let file = fs::File::open(&a.edges).map_err(|e| poi_core::Error::Io {
        path: a.edges.clone(),
        source: e,
    })?;
    let graphs = build_graphs(read_edge_list(BufReader::new(file))?);
    let core = k_core(&graphs.directed, a.k_core);
    let partition = detect_communities(&core, method, a.seed)?;
    write(&a.out, &partition.to_csv())?;
    print_json(&json!({
        "vertices": graphs.directed.vertex_count(),
        "edges": graphs.directed.edge_count(),
        "mutual_edges": graphs.undirected.edge_count(),
        "self_loops_dropped": graphs.dropped_self_loops,
        "core_vertices": core.vertex_count(),
        "communities": partition.len(),
    }));
    Ok(())
}

fn cmd_topics(a: &TopicsArgs) -> Result<()> {
    let file = fs::File::open(&a.edges).map_err(|e| poi_core::Error::Io {
        path: a.edges.clone(),
        source: e,
    })?;
    let graphs = build_graphs(read_edge_list(BufReader::new(file))?);
    let all = timelines(&a.timelines, DEFAULT_PER_USER_CAP)?;
    let partition = Partition::from_csv(&read(&a.partition)?)?;
    let tokenizer = Tokenizer::new(stopwords(a.stopwords.as_deref())?, TokenMode::Topic);
    let mut docs = Vec::new();
    for user in graphs.directed.vertices() {
        if let Some(t) = all.get(user) {
            docs.extend(
                build_documents(t, a.document_length, &tokenizer)?
                    .into_iter()
                    .filter(|d| !d.tokens.is_empty()),
            );
        }
    }
    let mut cfg = LdaConfig::new(a.topics, a.seed);
    cfg.iterations = a.iterations;
    let model = fit_lda(&docs, cfg)?;
    let labels = label_documents(&model);
    let owners: HashMap<String, String> = docs
        .iter()
        .map(|d| (d.doc_id.clone(), d.user.clone()))
        .collect();
    let summary = community_topics(&labels, &partition.membership(), &owners);
    let mut ct = String::from("community,topic,documents\n");
    for (c, t) in &summary.communities {
        for (topic, n) in &t.topic_multiset {
            ct.push_str(&format!("{c},{topic},{n}\n"));
        }
    }
    write(&a.out.join("model.txt"), &model.to_dump())?;
    write(&a.out.join("doc_topics.csv"), &labels_to_csv(&labels))?;
    write(&a.out.join("community_topics.csv"), &ct)?;
    print_json(&json!({
        "documents": docs.len(),
        "vocabulary": model.vocabulary.len(),
        "topics": model.topics(),
        "unassigned_documents": summary.unassigned.len(),
    }));
    Ok(())
}

fn message_inputs(
    all: &BTreeMap<String, Timeline>,
    sw: StopWords,
) -> Vec<(String, String, poi_core::ingest::TokenList)> {
    let tokenizer = Tokenizer::new(sw, TokenMode::Grouping);
    all.values()
        .flat_map(|t| t.messages.iter())
        .map(|m| (m.id.clone(), m.author.clone(), tokenizer.tokenize(&m.text)))
        .collect()
}

fn cmd_groups(a: &GroupsArgs) -> Result<()> {
    let all = timelines(&a.timelines, DEFAULT_PER_USER_CAP)?;
    let tokens = message_inputs(&all, stopwords(a.stopwords.as_deref())?);
    let inputs: Vec<GroupInput<'_>> = tokens
        .iter()
        .map(|(id, author, t)| GroupInput {
            message_id: id,
            author,
            tokens: t,
        })
        .collect();
    let groups = group_similar(&inputs)?;
    write(&a.out, &groups_to_csv(&groups))?;
    print_json(&json!({ "messages": inputs.len(), "groups": groups.len() }));
    Ok(())
}

fn cmd_poi(a: &PoiArgs) -> Result<()> {
    let all = timelines(&a.timelines, DEFAULT_PER_USER_CAP)?;
    let author_of: HashMap<String, String> = all
        .values()
        .flat_map(|t| t.messages.iter().map(|m| (m.id.clone(), m.author.clone())))
        .collect();
    let groups = groups_from_csv(&read(&a.groups)?, &author_of)?;
    let partition = Partition::from_csv(&read(&a.partition)?)?;
    let labels = labels_from_csv(&read(&a.doc_topics)?)?;
    let owners: HashMap<String, String> = labels
        .iter()
        .map(|l| {
            (
                l.doc_id.clone(),
                l.doc_id
                    .rsplit_once('#')
                    .map_or(l.doc_id.as_str(), |(u, _)| u)
                    .to_string(),
            )
        })
        .collect();
    let membership = partition.membership();
    let summary = community_topics(&labels, &membership, &owners);
    let (table, _) = build_prob_table(&groups, &summary, &membership, &author_of, &a.neighborhood);
    write(&a.out, &table.to_csv())?;
    print_json(&json!({ "rows": table.rows.len(), "topics": table.topic_axis.len() }));
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let combination = Combination::from_index(a.combination)?;
    let kind: ClassifierKind = a.classifier.parse()?;
    let labels = read_labels(&read(&a.labels)?)?;
    let mut reports = Vec::new();
    for path in &a.tables {
        let (_, rows) = read_table_csv(&read(path)?)?;
        let mut data = Dataset::new(path.display().to_string());
        for (g, f) in rows {
            if let Some(spam) = labels
                .get(&g)
                .and_then(|&l| apply_combination(l, combination))
            {
                data.push(f.to_vec(), spam);
            }
        }
        let cv = CvConfig {
            folds: a.folds,
            kind,
            seed: a.seed,
            ..Default::default()
        };
        let report = cross_validate(&data, &cv)?;
        reports.push(json!({ "table": path.display().to_string(), "evaluation": report }));
    }
    print_json(
        &json!({ "combination": a.combination, "classifier": kind.to_string(), "seed": a.seed, "tables": reports }),
    );
    Ok(())
}

fn pipeline(a: &PipelineArgs) -> Result<(PipelineConfig, PipelineRun)> {
    let cfg = a.resolve()?;
    let run = run_pipeline(&cfg)?;
    Ok((cfg, run))
}

fn cmd_run(a: &PipelineArgs) -> Result<()> {
    let (cfg, run) = pipeline(a)?;
    print_json(&json!({
        "output": cfg.output.display().to_string(),
        "evaluated": run.report.evaluated,
        "neighborhoods": run.report.neighborhoods.len(),
        "average": run.report.average,
    }));
    Ok(())
}

fn cmd_validate(a: &PipelineArgs) -> Result<()> {
    let (cfg, run) = pipeline(a)?;
    let report = compare_to_null(run.h1)?;
    write(&cfg.output.join("validation.csv"), &report.to_csv())?;
    let mut text = serde_json::to_string_pretty(&report).expect("json");
    text.push('\n');
    write(&cfg.output.join("validation.json"), &text)?;
    print_json(&json!({
        "mean_actual": report.mean_actual,
        "mean_null": report.mean_null,
        "homogeneity_test": report.homogeneity_test,
        "completeness_test": report.completeness_test,
    }));
    Ok(())
}

fn cmd_early(a: &EarlyArgs) -> Result<()> {
    let (cfg, run) = pipeline(&a.pipeline)?;
    let fractions = a
        .fractions
        .clone()
        .unwrap_or_else(|| default_fractions()[1..].to_vec());
    let curve = run_early_detection(&run.tables, &fractions, a.reps, &cfg.cv_config()?)?;
    write(&cfg.output.join("early_detection.csv"), &curve.to_csv())?;
    let summary: Vec<_> = curve
        .summary()
        .into_iter()
        .map(|(f, m)| json!({ "fraction": f, "metrics": m }))
        .collect();
    print_json(&json!({ "seed": cfg.seed, "repetitions": a.reps, "summary": summary }));
    Ok(())
}

fn cmd_attack(a: &AttackArgs) -> Result<()> {
    let kind: AttackKind = a.kind.parse()?;
    let (cfg, run) = pipeline(&a.pipeline)?;
    let fractions = match a.fraction {
        Some(f) => vec![f],
        None => default_fractions(),
    };
    let cv = cfg.cv_config()?;
    let results = fractions
        .iter()
        .map(|&f| run_attack(kind, &run.tables, f, a.reps, &cv))
        .collect::<poi_core::Result<Vec<_>>>()?;
    let name = match kind {
        AttackKind::Poisoning => "poisoning",
        AttackKind::Evasion => "evasion",
    };
    write(
        &cfg.output.join(format!("attack_{name}.csv")),
        &attack_curve(&results, cfg.seed).to_csv(),
    )?;
    let summary: Vec<_> = results
        .iter()
        .map(|r| json!({ "fraction": r.fraction, "metrics": r.mean }))
        .collect();
    print_json(
        &json!({ "kind": name, "seed": cfg.seed, "repetitions": a.reps, "results": summary }),
    );
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let mut cfg: SynthConfig = match &a.config {
        Some(p) => load_toml(p)?,
        None => SynthConfig::default(),
    };
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => {$(
            if let Some(v) = a.$flag {
                cfg.$field = v;
            }
        )*};
    }
    set!(seed => seed, neighborhoods => n_neighborhoods, communities => n_communities, community_size => community_size,
        topics => n_topics, docs_per_user => docs_per_user, benign_groups => n_benign_groups, spam_groups => n_spam_groups);
    let data = generate(&cfg)?;
    write_dataset(&data, &a.out)?;
    print_json(&json!({
        "neighborhoods": data.neighborhoods.len(),
        "messages": data.messages.len(),
        "groups": data.labels().len(),
    }));
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Graph(a) => cmd_graph(a),
        Command::Topics(a) => cmd_topics(a),
        Command::Groups(a) => cmd_groups(a),
        Command::Poi(a) => cmd_poi(a),
        Command::Train(a) => cmd_train(a),
        Command::ValidateH1(a) => cmd_validate(a),
        Command::SimulateEarly(a) => cmd_early(a),
        Command::SimulateAttack(a) => cmd_attack(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Run(a) => cmd_run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| dispatch(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(3),
    }
}

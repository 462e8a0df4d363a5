//! `relind`: evaluate, score and inspect relation models over word
//! embeddings.
//!
//! Exit codes: 0 on success, 2 for configuration problems (bad flags,
//! unreadable inputs, invalid settings), 3 for data problems (parse errors,
//! too few pairs, numerical failures).

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use relind::baselines::MarginConfig;
use relind::eval::{evaluate, export_diagnostics, load_dataset, DatasetOrigin, EvalConfig, RelationDataset};
use relind::models::{load_model, save_model, FitOptions};
use relind::{EmbeddingFormat, FittedModel, ModelKind, WordEmbedding, WordPair};

#[derive(Debug, Parser)]
#[command(name = "relind", version, about = "Relation induction over word embeddings")]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cross-validate a model on every relation of a dataset.
    Evaluate(EvaluateArgs),
    /// Score word pairs with a model trained on `--train` or loaded from disk.
    Score(ScoreArgs),
    /// Export principal-component coordinates of a relation's words.
    Diagnostics(DiagnosticsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Translation,
    Regression,
    #[value(name = "3cosavg")]
    ThreeCosAvg,
    Lrcos,
    Margin,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Translation => ModelKind::Translation,
            ModelArg::Regression => ModelKind::Regression,
            ModelArg::ThreeCosAvg => ModelKind::ThreeCosAvg,
            ModelArg::Lrcos => ModelKind::LrCos,
            ModelArg::Margin => ModelKind::Margin,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EmbeddingFormatArg {
    #[value(alias = "glove-text")]
    Glove,
    #[value(alias = "word2vec-text")]
    Word2vec,
}

impl From<EmbeddingFormatArg> for EmbeddingFormat {
    fn from(f: EmbeddingFormatArg) -> Self {
        match f {
            EmbeddingFormatArg::Glove => EmbeddingFormat::GloveText,
            EmbeddingFormatArg::Word2vec => EmbeddingFormat::Word2VecText,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DatasetFormatArg {
    Google,
    Bats,
    Diffvec,
    CustomTsv,
}

impl From<DatasetFormatArg> for DatasetOrigin {
    fn from(f: DatasetFormatArg) -> Self {
        match f {
            DatasetFormatArg::Google => DatasetOrigin::Google,
            DatasetFormatArg::Bats => DatasetOrigin::Bats,
            DatasetFormatArg::Diffvec => DatasetOrigin::DiffVec,
            DatasetFormatArg::CustomTsv => DatasetOrigin::CustomTsv,
        }
    }
}

#[derive(Debug, Args)]
struct EmbeddingArgs {
    #[arg(long)]
    embedding: PathBuf,
    #[arg(long, value_enum, default_value = "glove")]
    embedding_format: EmbeddingFormatArg,
    /// Lowercase embedding and dataset words.
    #[arg(long)]
    case_fold: bool,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    emb: EmbeddingArgs,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value = "custom-tsv")]
    dataset_format: DatasetFormatArg,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// JSON report path.
    #[arg(long)]
    out: PathBuf,
    /// Also write a per-relation TSV table.
    #[arg(long)]
    out_tsv: Option<PathBuf>,
    /// Basis rank for the regression model.
    #[arg(long)]
    k: Option<usize>,
    /// Fixed regularization constant for the margin classifier; tuned on
    /// validation data when absent.
    #[arg(long)]
    c: Option<f64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    emb: EmbeddingArgs,
    /// Pairs to score: one `source target` pair per line, tab or space
    /// separated; blank lines and lines starting with `#` are skipped.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Training pairs, read with `--dataset-format`.
    #[arg(long, conflicts_with = "load_model")]
    train: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "custom-tsv")]
    dataset_format: DatasetFormatArg,
    /// Train on this relation only when the training file holds several.
    #[arg(long)]
    relation: Option<String>,
    #[arg(long)]
    load_model: Option<PathBuf>,
    #[arg(long)]
    save_model: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    /// Output TSV (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiagnosticsArgs {
    #[command(flatten)]
    emb: EmbeddingArgs,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value = "custom-tsv")]
    dataset_format: DatasetFormatArg,
    /// Relation to export; required when the dataset holds several.
    #[arg(long)]
    relation: Option<String>,
    /// Per-word CSV; per-pair coordinates go next to it as `<stem>.pairs.csv`.
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn config(error: anyhow::Error) -> Self {
        Failure { code: 2, error }
    }

    fn data(error: anyhow::Error) -> Self {
        Failure { code: 3, error }
    }
}

impl From<relind::Error> for Failure {
    fn from(e: relind::Error) -> Self {
        let code = if e.is_config() { 2 } else { 3 };
        Failure {
            code,
            error: e.into(),
        }
    }
}

trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, Failure>;
}

impl<T> Context<T> for relind::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, Failure> {
        self.map_err(|e| {
            let mut f = Failure::from(e);
            f.error = f.error.context(what());
            f
        })
    }
}

fn io_data<T>(r: io::Result<T>, path: &Path) -> Result<T, Failure> {
    r.map_err(|e| Failure::data(anyhow!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    let result = match cli.command {
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Score(a) => cmd_score(a),
        Command::Diagnostics(a) => cmd_diagnostics(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn check_input(path: &Path, what: &str) -> Result<(), Failure> {
    std::fs::metadata(path)
        .map(|_| ())
        .map_err(|e| Failure::config(anyhow!("cannot read {what} {}: {e}", path.display())))
}

fn check_output(path: &Path, what: &str) -> Result<(), Failure> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Failure::config(anyhow!(
            "directory for {what} {} does not exist",
            path.display()
        ))),
        _ => Ok(()),
    }
}

fn check_c(c: Option<f64>) -> Result<(), Failure> {
    match c {
        Some(c) if !(c.is_finite() && c > 0.0) => Err(Failure::config(anyhow!("--c must be a positive number, got {c}"))),
        _ => Ok(()),
    }
}

fn load_embedding(a: &EmbeddingArgs) -> Result<WordEmbedding, Failure> {
    info!("loading embedding {}", a.embedding.display());
    let emb = WordEmbedding::load(&a.embedding, a.embedding_format.into(), a.case_fold)
        .context(|| format!("loading embedding {}", a.embedding.display()))?;
    info!("{} words, dimension {}", emb.len(), emb.dim());
    Ok(emb)
}

fn load_relations(path: &Path, format: DatasetFormatArg, case_fold: bool) -> Result<Vec<RelationDataset>, Failure> {
    load_dataset(path, format.into(), case_fold).context(|| format!("loading dataset {}", path.display()))
}

fn pick_relation(relations: Vec<RelationDataset>, name: Option<&str>) -> Result<RelationDataset, Failure> {
    match name {
        Some(n) => relations
            .into_iter()
            .find(|r| r.name == n)
            .ok_or_else(|| Failure::config(anyhow!("no relation named `{n}` in the dataset"))),
        None if relations.len() == 1 => Ok(relations.into_iter().next().expect("one relation")),
        None => {
            let names: Vec<&str> = relations.iter().map(|r| r.name.as_str()).collect();
            Err(Failure::config(anyhow!(
                "the dataset holds {} relations; choose one with --relation ({})",
                names.len(),
                names.join(", ")
            )))
        }
    }
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), Failure> {
    check_input(&a.emb.embedding, "embedding")?;
    check_input(&a.dataset, "dataset")?;
    check_output(&a.out, "report")?;
    if let Some(p) = &a.out_tsv {
        check_output(p, "table")?;
    }
    check_c(a.c)?;

    let emb = load_embedding(&a.emb)?;
    let relations = load_relations(&a.dataset, a.dataset_format, a.emb.case_fold)?;
    let mut config = EvalConfig::new(a.model.into(), a.seed);
    config.workers = a.workers;
    config.k_override = a.k;
    if let Some(c) = a.c {
        config.margin.c = c;
        config.tune_margin_c = false;
    }
    config.embedding_id = a.emb.embedding.display().to_string();
    config.dataset_id = a.dataset.display().to_string();

    let report = evaluate(&relations, &emb, &config).context(|| "evaluation failed".into())?;
    for s in &report.skipped_relations {
        warn!("skipped relation {}: {}", s.name, s.reason);
    }

    let write = |path: &Path, tsv: bool| -> Result<(), Failure> {
        let file = File::create(path).map_err(|e| Failure::config(anyhow!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        if tsv {
            report.write_tsv(&mut w)?;
        } else {
            report.write_json(&mut w)?;
        }
        io_data(w.flush(), path)
    };
    write(&a.out, false)?;
    if let Some(p) = &a.out_tsv {
        write(p, true)?;
    }

    let m = &report.macro_avg;
    let mut table = String::new();
    let _ = writeln!(table, "{:<12} {:>9} {:>9} {:>9} {:>9} {:>9}", "model", "relations", "precision", "recall", "f1", "map");
    let _ = writeln!(
        table,
        "{:<12} {:>9} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
        config.model.name(),
        m.relations,
        m.precision,
        m.recall,
        m.f1,
        m.map
    );
    print!("{table}");
    Ok(())
}

/// Reads `source target` lines, keeping duplicates and input order.
fn read_pair_list(path: &Path, case_fold: bool) -> Result<Vec<WordPair>, Failure> {
    let file = io_data(File::open(path), path)?;
    let mut pairs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = io_data(line, path)?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if line.contains('\t') {
            line.split('\t').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
            return Err(Failure::data(anyhow!(
                "{}:{}: expected two words, found {} fields",
                path.display(),
                i + 1,
                fields.len()
            )));
        }
        let fold = |w: &str| if case_fold { w.to_lowercase() } else { w.to_string() };
        pairs.push(WordPair::new(fold(fields[0]), fold(fields[1])));
    }
    Ok(pairs)
}

fn obtain_model(a: &ScoreArgs, emb: &WordEmbedding) -> Result<FittedModel, Failure> {
    if let Some(path) = &a.load_model {
        let file = io_data(File::open(path), path)?;
        let model = load_model(BufReader::new(file)).context(|| format!("loading model {}", path.display()))?;
        if let Some(kind) = a.model.map(ModelKind::from) {
            if kind != model.kind() {
                return Err(Failure::config(anyhow!(
                    "--model {} does not match the saved {} model",
                    kind.name(),
                    model.kind().name()
                )));
            }
        }
        return Ok(model);
    }
    let train = a
        .train
        .as_ref()
        .ok_or_else(|| Failure::config(anyhow!("score needs either --train or --load-model")))?;
    let kind: ModelKind = a
        .model
        .ok_or_else(|| Failure::config(anyhow!("--model is required with --train")))?
        .into();
    let rel = pick_relation(load_relations(train, a.dataset_format, a.emb.case_fold)?, a.relation.as_deref())?;
    let (known, oov): (Vec<WordPair>, Vec<WordPair>) = rel
        .pairs
        .into_iter()
        .partition(|p| emb.contains(&p.source) && emb.contains(&p.target));
    if !oov.is_empty() {
        warn!("dropped {} training pairs with words missing from the embedding", oov.len());
    }
    let mut opts = FitOptions {
        seed: a.seed,
        k_override: a.k,
        margin: MarginConfig::default(),
    };
    if let Some(c) = a.c {
        opts.margin.c = c;
    }
    info!("fitting {} on {} pairs", kind.name(), known.len());
    FittedModel::fit(kind, emb, &known, &opts).context(|| format!("fitting {} model", kind.name()))
}

fn cmd_score(a: ScoreArgs) -> Result<(), Failure> {
    check_input(&a.emb.embedding, "embedding")?;
    check_input(&a.dataset, "pair list")?;
    if let Some(p) = &a.train {
        check_input(p, "training set")?;
    }
    if let Some(p) = &a.load_model {
        check_input(p, "model")?;
    }
    if a.train.is_none() && a.load_model.is_none() {
        return Err(Failure::config(anyhow!("score needs either --train or --load-model")));
    }
    for p in [&a.save_model, &a.out].into_iter().flatten() {
        check_output(p, "output")?;
    }
    check_c(a.c)?;

    let emb = load_embedding(&a.emb)?;
    let pairs = read_pair_list(&a.dataset, a.emb.case_fold)?;
    let model = obtain_model(&a, &emb)?;

    if let Some(path) = &a.save_model {
        let file = File::create(path).map_err(|e| Failure::config(anyhow!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        save_model(&model, &mut w)?;
        io_data(w.flush(), path)?;
    }

    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(File::create(p).map_err(|e| Failure::config(anyhow!("cannot create {}: {e}", p.display())))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = BufWriter::new(sink);
    let out_path = a.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    let mut emit = |line: String| io_data(writeln!(w, "{line}"), &out_path);
    emit("source\ttarget\ttotal\tsource_type_lbf\ttarget_type_lbf\trelation_lbf\treason".into())?;
    for p in &pairs {
        let missing: Vec<&str> = [p.source.as_str(), p.target.as_str()]
            .into_iter()
            .filter(|w| !emb.contains(w))
            .collect();
        if !missing.is_empty() {
            emit(format!("{}\t{}\tNA\tNA\tNA\tNA\tout of vocabulary: {}", p.source, p.target, missing.join(",")))?;
            continue;
        }
        let s = model.score(&emb, &p.source, &p.target)?;
        let cells = match s.breakdown {
            Some(b) => format!("{}\t{}\t{}", b.source_type_lbf, b.target_type_lbf, b.relation_lbf),
            None => "NA\tNA\tNA".to_string(),
        };
        emit(format!("{}\t{}\t{}\t{cells}\t", p.source, p.target, s.total))?;
    }
    io_data(w.flush(), &out_path)
}

fn cmd_diagnostics(a: DiagnosticsArgs) -> Result<(), Failure> {
    check_input(&a.emb.embedding, "embedding")?;
    check_input(&a.dataset, "dataset")?;
    check_output(&a.out, "output")?;

    let emb = load_embedding(&a.emb)?;
    let rel = pick_relation(load_relations(&a.dataset, a.dataset_format, a.emb.case_fold)?, a.relation.as_deref())?;
    let before = rel.len();
    let pairs: Vec<WordPair> = rel
        .pairs
        .into_iter()
        .filter(|p| emb.contains(&p.source) && emb.contains(&p.target))
        .collect();
    if pairs.len() < before {
        warn!("dropped {} pairs with words missing from the embedding", before - pairs.len());
    }
    let d = export_diagnostics(&pairs, &emb, &a.out).context(|| format!("diagnostics for relation {}", rel.name))?;
    match d.slope() {
        Some(s) => println!("{}\tpairs={}\tslope={s:.6}", rel.name, pairs.len()),
        None => println!("{}\tpairs={}\tslope=NA", rel.name, pairs.len()),
    }
    Ok(())
}

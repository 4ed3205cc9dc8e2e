//! Subcommand implementations.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use contfood_core::baselines::{compare_all, CompareConfig, ModelKind};
use contfood_core::continual::{
    detect_novel, forgetting_report, full_retrain_baseline, increment as apply_increment,
    IncrementConfig, ReplayBuffer, ReplayItem, Strategy,
};
use contfood_core::corpus::{self, Corpus, DishRecord, Format, KeywordRules, VocabProfile};
use contfood_core::metrics::MetricReport;
use contfood_core::nnet::{
    default_grid, grid_search, Checkpoint, CheckpointMeta, EpochRecord, GridRow,
};
use contfood_core::pipeline::{self, PipelineOptions};
use serde::Serialize;

use crate::manifest::{sidecar, timestamp, Recorder};
use crate::render;
use crate::{
    AutolabelArgs, CompareArgs, DedupeArgs, DetectArgs, EvalArgs, GenArgs, IncrementArgs,
    IngestArgs, ModelArg, PipelineFlags, ReportArgs, ServeArgs, SplitArgs, StrategyArg, TrainArgs,
    UsageError,
};

fn read_corpus(path: &Path, format: Option<Format>) -> Result<Corpus> {
    let format = format.unwrap_or_else(|| Format::from_path(path));
    corpus::ingest(path, format).with_context(|| format!("reading {}", path.display()))
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    Ok(())
}

fn write_corpus(corpus: &Corpus, path: &Path, format: Option<Format>) -> Result<()> {
    ensure_parent(path)?;
    let format = format.unwrap_or_else(|| Format::from_path(path));
    corpus::write_corpus(corpus, path, format)
        .with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn load_rules(path: Option<&Path>) -> Result<KeywordRules> {
    match path {
        Some(p) => KeywordRules::load(p).with_context(|| format!("reading rules {}", p.display())),
        None => Ok(KeywordRules::default_rules()),
    }
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::read(path).with_context(|| format!("reading checkpoint {}", path.display()))
}

fn counts_line(c: &Corpus) -> String {
    let k = c.class_counts();
    format!(
        "veg: {}\nnonveg: {}\nunlabeled: {}",
        k.veg, k.nonveg, k.unlabeled
    )
}

pub fn gen(args: GenArgs) -> Result<()> {
    let mut rec = Recorder::new("gen");
    let rules = load_rules(args.rules.as_deref())?;
    let profile: VocabProfile = match &args.profile {
        Some(p) => {
            rec.input(p);
            serde_json::from_slice(
                &fs::read(p).with_context(|| format!("reading {}", p.display()))?,
            )
            .map_err(contfood_core::Error::from)?
        }
        None => VocabProfile::default(),
    };
    if let Some(p) = &args.rules {
        rec.input(p);
    }
    let mut corpus = corpus::generate_synthetic(args.n, args.seed, &rules, &profile)?;
    if !args.labeled {
        for r in &mut corpus.records {
            r.label = None;
        }
    }
    write_corpus(&corpus, &args.out, args.format.map(Into::into))?;
    rec.config(&profile)
        .seed("seed", args.seed)
        .output(&args.out);
    rec.finish(&sidecar(&args.out))?;
    println!("records: {}\nout: {}", corpus.len(), args.out.display());
    Ok(())
}

pub fn ingest(args: IngestArgs) -> Result<()> {
    let mut rec = Recorder::new("ingest");
    let corpus = read_corpus(&args.input, args.format.map(Into::into))?;
    write_corpus(&corpus, &args.out, None)?;
    rec.input(&args.input)
        .output(&args.out)
        .finish(&sidecar(&args.out))?;
    println!("records: {}\n{}", corpus.len(), counts_line(&corpus));
    Ok(())
}

pub fn autolabel(args: AutolabelArgs) -> Result<()> {
    let mut rec = Recorder::new("autolabel");
    let rules = load_rules(args.rules.as_deref())?;
    let input = read_corpus(&args.input, None)?;
    let (labeled, counts) = corpus::autolabel(&input, &rules);
    write_corpus(&labeled, &args.out, None)?;
    rec.config(&counts).input(&args.input).output(&args.out);
    if let Some(p) = &args.rules {
        rec.input(p);
    }
    rec.finish(&sidecar(&args.out))?;
    println!(
        "veg: {}\nnonveg: {}\nunmatched: {}\nalready_labeled: {}",
        counts.veg, counts.nonveg, counts.unmatched, counts.already_labeled
    );
    Ok(())
}

pub fn dedupe(args: DedupeArgs) -> Result<()> {
    let mut rec = Recorder::new("dedupe");
    let input = read_corpus(&args.input, None)?;
    let out = corpus::dedupe(&input);
    write_corpus(&out, &args.out, None)?;
    rec.input(&args.input)
        .output(&args.out)
        .finish(&sidecar(&args.out))?;
    println!("kept: {}\nremoved: {}", out.len(), input.len() - out.len());
    Ok(())
}

pub fn split(args: SplitArgs) -> Result<()> {
    let mut rec = Recorder::new("split");
    let input = read_corpus(&args.input, None)?;
    let (train, test) = corpus::split(&input, args.ratio, args.seed)?;
    write_corpus(&train, &args.train_out, None)?;
    write_corpus(&test, &args.test_out, None)?;
    rec.config(&serde_json::json!({ "ratio": args.ratio }))
        .seed("seed", args.seed)
        .input(&args.input)
        .output(&args.train_out)
        .output(&args.test_out)
        .finish(&sidecar(&args.train_out))?;
    println!("train: {}\ntest: {}", train.len(), test.len());
    Ok(())
}

impl PipelineFlags {
    fn resolve(&self) -> Result<PipelineOptions> {
        let mut opts: PipelineOptions = match &self.config {
            Some(p) => serde_json::from_slice(
                &fs::read(p).with_context(|| format!("reading {}", p.display()))?,
            )
            .map_err(contfood_core::Error::from)
            .with_context(|| format!("parsing config {}", p.display()))?,
            None => PipelineOptions::default(),
        };
        let t = &mut opts.train;
        if let Some(v) = self.seed {
            t.seed = v;
        }
        if let Some(v) = self.max_epochs {
            t.max_epochs = v;
        }
        if let Some(v) = self.batch_size {
            t.batch_size = v;
        }
        if let Some(v) = self.learning_rate {
            t.learning_rate = v;
        }
        if let Some(v) = self.l2_lambda {
            t.l2_lambda = v;
        }
        if let Some(v) = self.patience {
            t.patience = v;
        }
        if let Some(v) = self.validation_fraction {
            t.validation_fraction = v;
        }
        if let Some(v) = self.max_features {
            opts.max_features = v;
        }
        if self.include_ingredients {
            opts.include_ingredients = true;
        }
        if self.no_smote {
            opts.smote = false;
        }
        opts.train
            .validate()
            .map_err(|e| UsageError(e.to_string()))?;
        if opts.max_features == 0 {
            return Err(UsageError("max_features must be >= 1".into()).into());
        }
        Ok(opts)
    }
}

fn write_history_csv(path: &Path, history: &[EpochRecord]) -> Result<()> {
    ensure_parent(path)?;
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record([
        "epoch",
        "train_loss",
        "train_acc",
        "val_loss",
        "val_acc",
        "train_mae",
    ])?;
    for r in history {
        w.write_record([
            r.epoch.to_string(),
            r.train_loss.to_string(),
            r.train_accuracy.to_string(),
            r.val_loss.to_string(),
            r.val_accuracy.to_string(),
            r.train_mae.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_grid_csv(path: &Path, rows: &[GridRow]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record([
        "index",
        "hidden1",
        "hidden2",
        "l2_lambda",
        "seed",
        "best_epoch",
        "stopped_epoch",
        "best_val_loss",
    ])?;
    for r in rows {
        w.write_record([
            r.index.to_string(),
            r.hidden[0].to_string(),
            r.hidden[1].to_string(),
            r.l2_lambda.to_string(),
            r.seed.to_string(),
            r.best_epoch.to_string(),
            r.stopped_epoch.to_string(),
            r.best_val_loss.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Fills a reservoir with the real (pre-SMOTE) training rows.
fn training_buffer(
    checkpoint: &Checkpoint,
    records: &[DishRecord],
    capacity: usize,
    seed: u64,
) -> Result<ReplayBuffer> {
    let mut buffer = ReplayBuffer::new(capacity, seed)?;
    let data = pipeline::vectorize(
        &checkpoint.vectorizer,
        records,
        checkpoint.meta.include_ingredients,
    )?;
    for (record, (x, y)) in records.iter().zip(data.iter()) {
        buffer.add(ReplayItem {
            item_name: record.item_name.clone(),
            label: y,
            vector: x.clone(),
        });
    }
    Ok(buffer)
}

pub fn train(args: TrainArgs) -> Result<()> {
    let mut opts = args.pipeline.resolve()?;
    if args.buffer_capacity == 0 {
        bail!(UsageError("buffer capacity must be >= 1".into()));
    }
    let mut rec = Recorder::new("train");
    let corpus = read_corpus(&args.train, None)?;
    corpus.require_labeled()?;
    let vectorizer =
        pipeline::fit_vectorizer(&corpus.records, opts.include_ingredients, opts.max_features)?;

    let dir = &args.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let (mut checkpoint, outcome) = if args.grid {
        let data = pipeline::training_matrix(&vectorizer, &corpus.records, &opts)?;
        let result = grid_search(
            &data,
            &default_grid(&opts.train),
            opts.train.seed,
            args.jobs as usize,
        )?;
        let grid_json = dir.join("grid.json");
        let grid_csv = dir.join("grid.csv");
        write_json(
            &grid_json,
            &serde_json::json!({ "best_index": result.best_index, "table": result.table }),
        )?;
        write_grid_csv(&grid_csv, &result.table)?;
        rec.output(&grid_json).output(&grid_csv);
        println!("grid_best_index: {}", result.best_index);
        let checkpoint = Checkpoint::new(
            result.best_outcome.params.clone(),
            vectorizer,
            CheckpointMeta {
                include_ingredients: opts.include_ingredients,
                threshold: result.best_config.threshold,
                ..Default::default()
            },
        )?;
        opts.train = result.best_config;
        (checkpoint, result.best_outcome)
    } else {
        let trained = pipeline::train_with_vectorizer(vectorizer, &corpus.records, &opts)?;
        (trained.checkpoint, trained.outcome)
    };
    checkpoint.meta.created_at = timestamp();

    let buffer = training_buffer(
        &checkpoint,
        &corpus.records,
        args.buffer_capacity,
        opts.train.seed,
    )?;
    let paths = [
        dir.join("checkpoint.json"),
        dir.join("history.csv"),
        dir.join("history.json"),
        dir.join("buffer.json"),
    ];
    checkpoint.write(&paths[0])?;
    write_history_csv(&paths[1], &outcome.history)?;
    write_json(&paths[2], &outcome.history)?;
    write_bytes(&paths[3], &buffer.save())?;
    rec.config(&opts)
        .seed("seed", opts.train.seed)
        .input(&args.train);
    for p in &paths {
        rec.output(p);
    }
    rec.finish(&dir.join("manifest.json"))?;

    let last = outcome.history.last().expect("at least one epoch");
    println!("train_size: {}", corpus.len());
    println!("vocab_size: {}", checkpoint.vectorizer.vocab_size());
    println!("best_epoch: {}", outcome.best_epoch);
    println!("stopped_epoch: {}", outcome.stopped_epoch);
    println!("best_val_loss: {}", outcome.best_val_loss);
    println!("final_train_acc: {}", last.train_accuracy);
    println!("checkpoint_hash: {}", checkpoint.content_hash());
    println!("out_dir: {}", dir.display());
    Ok(())
}

fn print_metrics(m: &MetricReport) {
    for (k, v) in m.to_map() {
        println!("{k}: {v}");
    }
    let c = &m.confusion;
    println!("tp: {}\nfp: {}\nfn: {}\ntn: {}", c.tp, c.fp, c.fn_, c.tn);
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let mut rec = Recorder::new("eval");
    let report = match (&args.checkpoint, &args.test, &args.pred, &args.truth) {
        (Some(ckpt), Some(test), None, None) => {
            let checkpoint = load_checkpoint(ckpt)?;
            let test_corpus = read_corpus(test, None)?;
            rec.input(ckpt).input(test);
            pipeline::evaluate_checkpoint(&checkpoint, &test_corpus.records, args.l2_lambda)?
        }
        (None, None, Some(pred), Some(truth)) => {
            let p = read_corpus(pred, None)?;
            let t = read_corpus(truth, None)?;
            if p.len() != t.len() {
                bail!(contfood_core::Error::DimensionMismatch {
                    expected: t.len(),
                    found: p.len(),
                });
            }
            for (i, (a, b)) in p.records.iter().zip(&t.records).enumerate() {
                if corpus::normalize_name(&a.item_name) != corpus::normalize_name(&b.item_name) {
                    bail!(contfood_core::Error::InvalidInput(format!(
                        "row {}: {:?} in predictions vs {:?} in truth",
                        i + 1,
                        a.item_name,
                        b.item_name
                    )));
                }
            }
            let pred_labels = pipeline::labels_of(&p.records)?;
            let truth_labels = pipeline::labels_of(&t.records)?;
            let scores: Vec<f64> = pred_labels.iter().map(|&l| f64::from(l)).collect();
            rec.input(pred).input(truth);
            MetricReport::compute(&pred_labels, &scores, &truth_labels, None)?
        }
        _ => bail!(UsageError(
            "eval needs either --checkpoint with --test, or --pred with --truth".into()
        )),
    };
    write_json(&args.out, &report)?;
    rec.config(&serde_json::json!({ "l2_lambda": args.l2_lambda }))
        .output(&args.out)
        .finish(&sidecar(&args.out))?;
    print_metrics(&report);
    Ok(())
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Logreg => ModelKind::Logreg,
            ModelArg::RandomForest => ModelKind::RandomForest,
            ModelArg::LinearSvm => ModelKind::LinearSvm,
            ModelArg::Knn => ModelKind::Knn,
            ModelArg::Mlp => ModelKind::Mlp,
        }
    }
}

pub fn compare(args: CompareArgs) -> Result<()> {
    let mut config: CompareConfig = match &args.config {
        Some(p) => serde_json::from_slice(
            &fs::read(p).with_context(|| format!("reading {}", p.display()))?,
        )
        .map_err(contfood_core::Error::from)
        .with_context(|| format!("parsing config {}", p.display()))?,
        None => CompareConfig::default(),
    };
    if let Some(r) = args.runs {
        config.runs = r;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if !args.models.is_empty() {
        config.models = args.models.iter().map(|&m| m.into()).collect();
    }
    if config.runs == 0 {
        bail!(UsageError("--runs must be >= 1".into()));
    }
    config
        .mlp
        .validate()
        .map_err(|e| UsageError(e.to_string()))?;

    let mut rec = Recorder::new("compare");
    let train = read_corpus(&args.train, None)?;
    let test = read_corpus(&args.test, None)?;
    let opts = PipelineOptions {
        include_ingredients: args.include_ingredients,
        max_features: args.max_features,
        smote: !args.no_smote,
        train: contfood_core::nnet::TrainConfig {
            seed: config.seed,
            ..config.mlp.clone()
        },
        ..Default::default()
    };
    let vectorizer =
        pipeline::fit_vectorizer(&train.records, opts.include_ingredients, opts.max_features)?;
    let train_m = pipeline::training_matrix(&vectorizer, &train.records, &opts)?;
    let test_m = pipeline::vectorize(&vectorizer, &test.records, opts.include_ingredients)?;
    let table = compare_all(&train_m, &test_m, &config, args.jobs as usize)?;

    let dir = &args.out_dir;
    let csv_path = dir.join("comparison.csv");
    let json_path = dir.join("comparison.json");
    let csv = table.to_csv()?;
    write_bytes(&csv_path, csv.as_bytes())?;
    write_json(&json_path, &table)?;
    rec.config(&serde_json::json!({ "compare": config, "pipeline": opts }))
        .seed("seed", config.seed)
        .input(&args.train)
        .input(&args.test)
        .output(&csv_path)
        .output(&json_path)
        .finish(&dir.join("manifest.json"))?;
    print!("{csv}");
    Ok(())
}

fn strategy_of(s: StrategyArg) -> Strategy {
    match s {
        StrategyArg::Replay => Strategy::Replay,
        StrategyArg::Naive => Strategy::Naive,
        StrategyArg::FullRetrain => Strategy::FullRetrain,
    }
}

pub fn increment(args: IncrementArgs) -> Result<()> {
    let strategy = strategy_of(args.strategy);
    if strategy == Strategy::FullRetrain && args.train.is_none() {
        bail!(UsageError("--strategy full-retrain needs --train".into()));
    }
    let config = IncrementConfig {
        epochs: args.epochs,
        learning_rate: args.learning_rate,
        batch_size: args.batch_size,
        replay_ratio: args.replay_ratio,
        l2_lambda: args.l2_lambda,
        seed: args.seed,
    };
    config.validate().map_err(|e| UsageError(e.to_string()))?;

    let mut rec = Recorder::new("increment");
    let before = load_checkpoint(&args.checkpoint)?;
    let buffer_path = args
        .buffer
        .clone()
        .unwrap_or_else(|| args.checkpoint.with_file_name("buffer.json"));
    let mut buffer = if buffer_path.exists() {
        rec.input(&buffer_path);
        ReplayBuffer::load(&fs::read(&buffer_path)?)
            .with_context(|| format!("reading {}", buffer_path.display()))?
    } else if args.buffer.is_some() {
        bail!(contfood_core::Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} not found", buffer_path.display()),
        )));
    } else {
        eprintln!(
            "warning: no replay buffer at {}; starting empty",
            buffer_path.display()
        );
        ReplayBuffer::new(contfood_core::continual::DEFAULT_CAPACITY, args.seed)?
    };
    let batch = read_corpus(&args.batch, Some(Format::Jsonl))?;
    batch.require_labeled()?;
    let old_test = read_corpus(&args.old_test, None)?;
    rec.input(&args.checkpoint)
        .input(&args.batch)
        .input(&args.old_test);

    let started = Instant::now();
    let (mut after, replayed) = if strategy == Strategy::FullRetrain {
        let train_path = args.train.as_ref().expect("checked above");
        let train = read_corpus(train_path, None)?;
        rec.input(train_path);
        let mut all = train.records;
        all.extend(batch.records.iter().cloned());
        let mut opts = PipelineOptions::default();
        opts.train.seed = args.seed;
        (full_retrain_baseline(&before, &all, &opts)?.checkpoint, 0)
    } else {
        let out = apply_increment(&before, &mut buffer, &batch.records, strategy, &config)?;
        (out.checkpoint, out.replayed_count)
    };
    let runtime_ms = started.elapsed().as_millis() as u64;
    after.meta.created_at = timestamp();

    let mut report = forgetting_report(&before, &after, &old_test.records, strategy, batch.len())?
        .with_new_items(&before, &after, &batch.records)?;
    report.seed = args.seed;
    report.replayed_count = replayed;
    report.runtime_ms = runtime_ms;

    let dir = &args.out_dir;
    let ckpt_path = dir.join("checkpoint.json");
    let buffer_out = dir.join("buffer.json");
    let report_path = dir.join("report.json");
    ensure_parent(&ckpt_path)?;
    fs::create_dir_all(dir)?;
    after.write(&ckpt_path)?;
    write_bytes(&buffer_out, &buffer.save())?;
    write_json(&report_path, &report)?;
    rec.config(&serde_json::json!({ "strategy": strategy, "increment": config }))
        .seed("seed", args.seed)
        .output(&ckpt_path)
        .output(&buffer_out)
        .output(&report_path)
        .finish(&dir.join("manifest.json"))?;

    println!("strategy: {}", strategy.as_str());
    println!("new_items_count: {}", report.new_items_count);
    println!("replayed_count: {}", report.replayed_count);
    println!(
        "old_test_accuracy_before: {}",
        report.old_test_accuracy_before
    );
    println!(
        "old_test_accuracy_after: {}",
        report.old_test_accuracy_after
    );
    println!("accuracy_drop: {}", report.accuracy_drop);
    if let (Some(b), Some(a)) = (
        report.new_items_accuracy_before,
        report.new_items_accuracy_after,
    ) {
        println!("new_items_accuracy_before: {b}");
        println!("new_items_accuracy_after: {a}");
    }
    println!("increments_applied: {}", report.increments_applied);
    println!("runtime_ms: {}", report.runtime_ms);
    Ok(())
}

/// Names from a corpus file, or one per non-blank line of plain text.
fn read_names(path: &Path) -> Result<Vec<String>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("jsonl") | Some("json") => Ok(read_corpus(path, None)?
            .records
            .into_iter()
            .map(|r| r.item_name)
            .collect()),
        _ => {
            let file = fs::File::open(path)
                .map_err(contfood_core::Error::from)
                .with_context(|| format!("reading {}", path.display()))?;
            let mut names = Vec::new();
            for line in BufReader::new(file).lines() {
                let line = line?;
                let name = line.trim();
                if !name.is_empty() {
                    names.push(name.to_string());
                }
            }
            Ok(names)
        }
    }
}

pub fn detect(args: DetectArgs) -> Result<()> {
    let mut rec = Recorder::new("detect");
    let checkpoint = load_checkpoint(&args.checkpoint)?;
    let names = read_names(&args.input)?;
    let mut out = Vec::new();
    let mut flagged = 0usize;
    for name in &names {
        let verdict = detect_novel(&checkpoint, name, args.tau)?;
        flagged += usize::from(verdict.flagged);
        serde_json::to_writer(&mut out, &verdict)?;
        out.push(b'\n');
    }
    match &args.out {
        Some(path) => {
            write_bytes(path, &out)?;
            rec.config(&serde_json::json!({ "tau": args.tau }))
                .input(&args.checkpoint)
                .input(&args.input)
                .output(path)
                .finish(&sidecar(path))?;
        }
        None => std::io::stdout().write_all(&out)?,
    }
    eprintln!("scored: {}\nflagged: {}", names.len(), flagged);
    Ok(())
}

pub fn serve(args: ServeArgs) -> Result<()> {
    let mut config = contfood_service::ServiceConfig::new(&args.data_dir);
    config.addr = args.addr;
    config.checkpoint = args.checkpoint.clone();
    config.tau = args.tau;
    config.static_dir = args.static_dir.clone();
    config.increment_timeout = Duration::from_secs(args.increment_timeout);
    config.increment.epochs = args.increment_epochs;
    config
        .increment
        .validate()
        .map_err(|e| UsageError(e.to_string()))?;
    if let Some(src) = &args.old_test {
        // Normalize to JSONL in the data directory; the service reads it from there.
        let corpus = read_corpus(src, None)?;
        corpus.require_labeled()?;
        let dst: PathBuf = args.data_dir.join(contfood_service::store::OLD_TEST_FILE);
        write_corpus(&corpus, &dst, Some(Format::Jsonl))?;
    }
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(contfood_service::serve(config))?;
    Ok(())
}

pub fn report(args: ReportArgs) -> Result<()> {
    let mut artifacts = Vec::new();
    for path in &args.files {
        let bytes = fs::read(path)
            .map_err(contfood_core::Error::from)
            .with_context(|| format!("reading {}", path.display()))?;
        let value: serde_json::Value = serde_json::from_slice(&bytes)
            .map_err(contfood_core::Error::from)
            .with_context(|| format!("parsing {}", path.display()))?;
        artifacts.push((path.display().to_string(), value));
    }
    let text = render::render(&artifacts);
    match &args.out {
        Some(p) => write_bytes(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context as _, Result};
use chrono::{DateTime, Utc};
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::json;

use tcomqa_core::evaluation::{
    acceptance_rate_sweep, aggregate_votes, answer_similarity_rows, property_report, read_answers,
    read_labeled, read_votes, validator_pr, ReportRow,
};
use tcomqa_core::pipeline::{self, ingest_corpus, read_jsonl, rejects_path, CorpusFormat};
use tcomqa_core::validators::validate;
use tcomqa_core::{
    load_vectors, parse_property, BackendConfig, BackendKind, Context, FailPolicy, MarkerLexicon,
    PipelineConfig, TemporalProperty, ValidationConfig, ValidatorMode,
};

use crate::args::{
    BackendArg, EvaluateArgs, ExtractArgs, FailPolicyArg, FormatArg, ReportArgs, SweepArgs,
    ValidateArgs, ValidatorArg, ValidatorOpts,
};

/// Bad flags or flag combinations; exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn refuse_overwrite(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(usage(format!(
            "{} already exists (use --force to overwrite)",
            path.display()
        )));
    }
    Ok(())
}

fn emit(out: Option<&Path>, force: bool, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            refuse_overwrite(path, force)?;
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_lexicon(path: Option<&Path>) -> Result<Arc<MarkerLexicon>> {
    Ok(Arc::new(match path {
        Some(p) => MarkerLexicon::load(p)?,
        None => MarkerLexicon::default(),
    }))
}

fn validation_config(opts: &ValidatorOpts, verbose: bool) -> Result<ValidationConfig> {
    let mode = match opts.validator {
        ValidatorArg::Lexical => ValidatorMode::Lexical,
        ValidatorArg::Semantic => ValidatorMode::Semantic,
        ValidatorArg::Both => ValidatorMode::Both,
    };
    if !(0.0..=1.0).contains(&opts.theta) {
        return Err(usage(format!("--theta {} is outside [0, 1]", opts.theta)));
    }
    if mode.uses_semantic() && opts.vectors.is_none() {
        return Err(usage(format!(
            "--validator {mode} needs --vectors (or TCOM_VECTORS)"
        )));
    }
    let lexicon = load_lexicon(opts.markers.as_deref())?;
    let store = match (&opts.vectors, mode.uses_semantic()) {
        (Some(p), true) => Some(Arc::new(load_vectors(p)?)),
        _ => None,
    };
    if verbose {
        eprintln!(
            "validator={mode} theta={} markers={} vectors={}",
            opts.theta,
            opts.markers
                .as_ref()
                .map_or("<bundled>".into(), |p| p.display().to_string()),
            opts.vectors
                .as_ref()
                .map_or("<none>".into(), |p| p.display().to_string()),
        );
    }
    ValidationConfig::new(mode, opts.theta, lexicon, store).map_err(|e| usage(e.to_string()))
}

fn parse_properties(raw: &[String]) -> Result<Vec<TemporalProperty>> {
    if raw.is_empty() {
        return Ok(TemporalProperty::ALL.to_vec());
    }
    let mut props = Vec::new();
    for s in raw {
        let p = parse_property(s).map_err(|e| usage(e.to_string()))?;
        if !props.contains(&p) {
            props.push(p);
        }
    }
    Ok(props)
}

pub fn extract(args: ExtractArgs, verbose: bool) -> Result<()> {
    let validation = validation_config(&args.validation, verbose)?;
    let properties = parse_properties(&args.properties)?;
    if !(args.timeout > 0.0 && args.timeout.is_finite()) {
        return Err(usage("--timeout must be a positive number of seconds"));
    }
    let mut backend = match args.backend {
        BackendArg::Mock => BackendConfig::mock(),
        BackendArg::Http => match &args.endpoint {
            Some(url) => BackendConfig::http(url.clone()),
            None => return Err(usage("--backend http needs --endpoint (or TCOM_ENDPOINT)")),
        },
    };
    backend.seed = args.seed;
    backend.max_parallel = args.max_parallel;
    backend.max_retries = args.max_retries;
    backend.timeout = Duration::from_secs_f64(args.timeout);
    backend.check().map_err(|e| usage(e.to_string()))?;

    let created_at = match &args.created_at {
        Some(s) => DateTime::parse_from_rfc3339(s)
            .map_err(|e| usage(format!("--created-at {s:?}: {e}")))?
            .with_timezone(&Utc),
        None if backend.kind == BackendKind::Mock => DateTime::<Utc>::UNIX_EPOCH,
        None => Utc::now(),
    };
    refuse_overwrite(&args.out, args.force)?;
    if args.keep_rejects {
        refuse_overwrite(&rejects_path(&args.out), args.force)?;
    }
    if verbose {
        eprintln!(
            "backend={:?} endpoint={} seed={} max_parallel={} properties={}",
            backend.kind,
            backend.endpoint.as_deref().unwrap_or("<none>"),
            backend.seed,
            backend.max_parallel,
            properties
                .iter()
                .map(|p| p.canonical_form())
                .collect::<Vec<_>>()
                .join(","),
        );
    }

    let format = match args.format {
        FormatArg::Plain => CorpusFormat::PlainLines,
        FormatArg::Jsonl => CorpusFormat::JsonLines,
    };
    let contexts = ingest_corpus(&args.corpus, format)?;
    info!(
        "loaded {} contexts from {}",
        contexts.len(),
        args.corpus.display()
    );
    let cfg = PipelineConfig {
        properties,
        validation,
        backend,
        output_path: args.out.clone(),
        fail_policy: match args.fail_policy {
            FailPolicyArg::Skip => FailPolicy::SkipAndLog,
            FailPolicyArg::Abort => FailPolicy::Abort,
        },
        keep_rejects: args.keep_rejects,
        created_at,
    };
    let report = pipeline::run(contexts, &cfg)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.summary());
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
struct PairRow {
    #[serde(default)]
    id: Option<String>,
    context: String,
    question: String,
    #[serde(default)]
    property: Option<String>,
}

fn read_pairs(path: &Path) -> Result<Vec<(Context, String, Option<String>)>> {
    let rows: Vec<PairRow> = read_jsonl(path)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let id = r.id.unwrap_or_else(|| format!("P{:06}", i + 1));
            let ctx = Context::new(id, r.context, source_name(path))
                .with_context(|| format!("{}: pair {}", path.display(), i + 1))?;
            Ok((ctx, r.question, r.property))
        })
        .collect()
}

fn source_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[derive(Debug, Serialize)]
struct Verdict<'a> {
    id: &'a str,
    question: &'a str,
    property: TemporalProperty,
    lexical: Option<bool>,
    semantic: Option<bool>,
    score: Option<f64>,
    accepted: bool,
}

pub fn validate_pairs(args: ValidateArgs, verbose: bool) -> Result<()> {
    let cfg = validation_config(&args.validation, verbose)?;
    if let Some(out) = &args.out {
        refuse_overwrite(out, args.force)?;
    }
    let pairs = read_pairs(&args.pairs)?;
    let mut text = String::new();
    let mut accepted = 0;
    for (ctx, question, property) in &pairs {
        // The property only labels the output; validators ignore it.
        let property = match property {
            Some(p) => parse_property(p)?,
            None => TemporalProperty::Duration,
        };
        let c = validate(ctx, property, question, &cfg)?;
        accepted += usize::from(c.is_accepted());
        let v = Verdict {
            id: &ctx.id,
            question,
            property,
            lexical: c.lexical_verdict,
            semantic: c.semantic_verdict,
            score: c.semantic_score,
            accepted: c.is_accepted(),
        };
        text.push_str(&serde_json::to_string(&v)?);
        text.push('\n');
    }
    emit(args.out.as_deref(), args.force, &text)?;
    eprintln!("{accepted}/{} accepted", pairs.len());
    Ok(())
}

pub fn sweep(args: SweepArgs, verbose: bool) -> Result<()> {
    let mut thetas = args.thetas.clone();
    if thetas.iter().any(|t| !t.is_finite()) {
        return Err(usage("--thetas must be finite numbers"));
    }
    thetas.sort_by(f64::total_cmp);
    let lexicon = load_lexicon(args.markers.as_deref())?;
    let store = Arc::new(load_vectors(&args.vectors)?);
    let cfg = ValidationConfig::new(
        ValidatorMode::Semantic,
        tcomqa_core::DEFAULT_THETA,
        lexicon,
        Some(store),
    )?;
    let pairs: Vec<(Context, String)> = read_pairs(&args.pairs)?
        .into_iter()
        .map(|(c, q, _)| (c, q))
        .collect();
    if pairs.is_empty() {
        bail!("{}: no pairs", args.pairs.display());
    }
    if verbose {
        eprintln!("sweeping {} pairs over thetas {thetas:?}", pairs.len());
    }
    let rows = acceptance_rate_sweep(&pairs, &cfg, &thetas)?;
    if args.json {
        let rows: Vec<_> = rows
            .iter()
            .map(|(t, f)| json!({ "theta": t, "accept_fraction": f }))
            .collect();
        println!("{}", serde_json::to_string_pretty(&rows)?);
    } else {
        println!("{:>6}  {:>9}", "theta", "accepted");
        for (t, f) in rows {
            println!("{t:>6.2}  {:>8.2}%", 100.0 * f);
        }
    }
    Ok(())
}

fn fmt_ratio(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.3}"))
}

pub fn evaluate(args: EvaluateArgs, _verbose: bool) -> Result<()> {
    if let Some(path) = &args.votes {
        let labels = aggregate_votes(&read_votes(path)?)?;
        if args.json {
            println!("{}", serde_json::to_string_pretty(&labels)?);
        } else {
            for (item, label) in labels {
                println!("{item}\t{label}");
            }
        }
    } else if let Some(path) = &args.labeled {
        let pr = validator_pr(&read_labeled(path)?)?;
        if args.json {
            println!("{}", serde_json::to_string_pretty(&pr)?);
        } else {
            println!("precision {}", fmt_ratio(pr.precision));
            println!("recall    {}", fmt_ratio(pr.recall));
            println!(
                "tp {}  fp {}  fn {}  tn {}  excluded {}",
                pr.tp, pr.fp, pr.fn_, pr.tn, pr.excluded
            );
        }
    } else if let Some(path) = &args.answers {
        let (Some(gold), Some(vectors)) = (&args.gold, &args.vectors) else {
            return Err(usage("--answers needs --gold and --vectors"));
        };
        let store = load_vectors(vectors)?;
        let rows = answer_similarity_rows(&read_answers(path)?, &read_answers(gold)?, &store)?;
        print_table(&rows, args.json, None, false)?;
    } else {
        return Err(usage("one of --votes, --labeled or --answers is required"));
    }
    Ok(())
}

fn print_table(rows: &[ReportRow], json: bool, out: Option<&PathBuf>, force: bool) -> Result<()> {
    let table = property_report(rows);
    let text = if json {
        format!("{}\n", serde_json::to_string_pretty(&table)?)
    } else {
        table.render()
    };
    emit(out.map(PathBuf::as_path), force, &text)
}

pub fn report(args: ReportArgs, _verbose: bool) -> Result<()> {
    if let Some(out) = &args.out {
        refuse_overwrite(out, args.force)?;
    }
    let rows: Vec<ReportRow> = read_jsonl(&args.rows)?;
    print_table(&rows, args.json, args.out.as_ref(), args.force)
}

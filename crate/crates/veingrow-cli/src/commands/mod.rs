pub mod cover_ratio;
pub mod encode;
pub mod loss_check;
pub mod targets;

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;

use veingrow::ingest::{apply_filter, parse_coco, AnnotationRecord, CorpusFilter, IngestError};

use crate::{CliError, CorpusArgs};

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Corpus(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub fn validate(args: &CorpusArgs) -> Result<(), CliError> {
    if args.complexities.is_empty() {
        return Err(CliError::Corpus("no complexities given".into()));
    }
    if let Some(&n) = args.complexities.iter().find(|&&n| n < 3) {
        return Err(CliError::Corpus(format!(
            "complexity {n} is below the minimum of 3"
        )));
    }
    Ok(())
}

pub fn load_corpus(args: &CorpusArgs) -> Result<Vec<AnnotationRecord>, CliError> {
    let (records, summary) = parse_coco(&args.input)?;
    log::info!(
        "parsed {} annotations ({} RLE skipped, {} invalid skipped)",
        records.len(),
        summary.rle_skipped,
        summary.invalid_skipped
    );
    let filter = corpus_filter(args);
    let filtered = apply_filter(records, &filter);
    if filtered.is_empty() {
        return Err(CliError::Corpus("no instances left after filtering".into()));
    }
    log::info!("{} instances after filtering", filtered.len());
    Ok(filtered)
}

pub fn corpus_filter(args: &CorpusArgs) -> CorpusFilter {
    CorpusFilter {
        min_area: args.min_area,
        categories: None,
        max_instances: args.max_instances,
        skip_multipart: true,
    }
}

/// Run inside a fixed-size rayon pool when --workers was given.
pub fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Shared metadata block: tool version, command, inputs, and the filter
/// settings, so every report is auditable. Timestamps live only here, never
/// in the CSV bodies.
pub fn metadata_value(
    command: &str,
    args: &CorpusArgs,
    extra: serde_json::Value,
) -> serde_json::Value {
    let unix_time = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "input": args.input.display().to_string(),
        "filters": {
            "min_area": args.min_area,
            "categories": serde_json::Value::Null,
            "max_instances": args.max_instances,
            "skip_multipart": true,
        },
        "complexities": args.complexities,
        "depth": args.depth,
        "supersample": args.supersample,
        "seed": args.seed,
        "workers": args.workers,
        "unix_time": unix_time,
        "details": extra,
    })
}

pub fn write_metadata(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    fs::write(path, serde_json::to_string_pretty(value).expect("json") + "\n")?;
    Ok(())
}

pub fn ensure_out_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path)?;
    Ok(())
}

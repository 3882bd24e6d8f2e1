//! `topiclens extract`: run passage extraction over the corpus and write the
//! passage store plus the per-slice extraction summary.

use crate::context::{CliError, CommandContext, Overrides};
use serde_json::json;
use std::path::Path;
use topiclens::corpus::{extract_leader_passages, load_corpus, save_passages, slice_corpus};

const FLUSH_EVERY: usize = 200;

pub fn run(config_path: &Path, overrides: &Overrides) -> Result<(), CliError> {
    let ctx = CommandContext::prepare(config_path, overrides)?;
    let docs = load_corpus(&ctx.config.corpus_path, ctx.config.corpus_format_enum())?;
    let client = ctx.chat_client()?;

    let mut passages = Vec::new();
    let store_path = ctx.run_dir.passages_path();
    for (i, doc) in docs.iter().enumerate() {
        passages.extend(extract_leader_passages(doc, &client)?);
        if (i + 1) % FLUSH_EVERY == 0 {
            save_passages(&store_path, &passages)?;
            log::info!("extraction progress: {}/{} documents", i + 1, docs.len());
        }
    }
    save_passages(&store_path, &passages)?;

    let sliced = slice_corpus(&passages);
    let counts: serde_json::Map<String, serde_json::Value> = sliced
        .slices
        .iter()
        .map(|(k, s)| (k.to_string(), json!(s.passages.len())))
        .collect();
    let summary = json!({
        "total_documents": docs.len(),
        "total_passages": passages.len(),
        "slice_counts": counts,
        "excluded_passages": sliced.excluded.len(),
        "provider_calls": client.provider_calls(),
        "cache_hits": client.cache_hits(),
    });
    topiclens::store::atomic_write(
        &ctx.run_dir.extraction_summary_path(),
        serde_json::to_string_pretty(&summary)
            .expect("summary serializes")
            .as_bytes(),
    )
    .map_err(|e| CliError::data(e.to_string()))?;

    println!(
        "extracted {} passages from {} documents ({} excluded from slices)",
        passages.len(),
        docs.len(),
        sliced.excluded.len()
    );
    for (key, slice) in &sliced.slices {
        println!("  {}: {}", key, slice.passages.len());
    }
    Ok(())
}

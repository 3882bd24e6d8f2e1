//! `topiclens model`: run the pipeline stages for the selected slices,
//! resuming from the last complete checkpoint.

use crate::commands::resolve_slices;
use crate::context::{CliError, CommandContext, Overrides};
use std::path::Path;
use topiclens::corpus::{load_passages, slice_corpus, CorpusSlice};
use topiclens::pipeline::{
    topic_count_grid, PipelineError, PipelineRunner, Stage, TopicModelState,
};

pub fn run(
    config_path: &Path,
    overrides: &Overrides,
    slice_selector: &str,
    n_clusters_flag: Option<&str>,
) -> Result<(), CliError> {
    let ctx = CommandContext::prepare(config_path, overrides)?;
    let store_path = ctx.run_dir.passages_path();
    if !store_path.exists() {
        return Err(CliError::data(format!(
            "passage store {} not found; run `topiclens extract` first",
            store_path.display()
        )));
    }
    let passages = load_passages(&store_path)?;
    let sliced = slice_corpus(&passages);
    let keys = resolve_slices(slice_selector, &sliced.slices)?;

    let n_clusters_override = match n_clusters_flag {
        Some(raw) => Some(parse_cluster_list(raw)?),
        None => None,
    };

    let client = ctx.chat_client()?;
    let embedder = ctx.embedding_provider()?;
    let embed_cache = ctx.embedding_cache();

    for key in keys {
        let slice = &sliced.slices[&key];
        println!("modeling slice {} ({} passages)", key, slice.passages.len());
        model_slice(
            &ctx,
            slice,
            &client,
            embedder.as_ref(),
            &embed_cache,
            n_clusters_override.as_deref(),
        )?;
    }
    Ok(())
}

fn parse_cluster_list(raw: &str) -> Result<Vec<usize>, CliError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::config(format!("invalid n_clusters entry '{}'", s)))
        })
        .collect()
}

fn model_slice(
    ctx: &CommandContext,
    slice: &CorpusSlice,
    client: &topiclens::llm::LlmClient,
    embedder: &dyn topiclens::embedding::EmbeddingProvider,
    embed_cache: &topiclens::embedding::EmbeddingCache,
    n_clusters_override: Option<&[usize]>,
) -> Result<(), CliError> {
    let slice_key = slice.key.to_string();
    let mut runner = PipelineRunner::new(
        slice,
        client,
        embedder,
        Some(embed_cache),
        ctx.config.pipeline_config(),
    );

    let load_or = |stage: Stage| -> Result<Option<TopicModelState>, PipelineError> {
        ctx.run_dir.read_state(&ctx.run_dir.stage_path(&slice_key, stage))
    };

    let named = match load_or(Stage::Named).map_err(CliError::from)? {
        Some(state) => {
            println!("  named: resumed from checkpoint");
            state
        }
        None => {
            let state = runner.build_initial_topics()?;
            ctx.run_dir
                .write_state(&state, &ctx.run_dir.stage_path(&slice_key, Stage::Named))?;
            println!("  named: {} topics", state.topics.len());
            state
        }
    };

    let reassigned = match load_or(Stage::Reassigned).map_err(CliError::from)? {
        Some(state) => {
            println!("  reassigned: resumed from checkpoint");
            state
        }
        None => {
            let partial = ctx.run_dir.refine_partial_path(&slice_key);
            let state = runner.refine_assignments(&named, Some(&partial))?;
            ctx.run_dir
                .write_state(&state, &ctx.run_dir.stage_path(&slice_key, Stage::Reassigned))?;
            println!("  reassigned: {} topics", state.topics.len());
            state
        }
    };

    let split = match load_or(Stage::Split).map_err(CliError::from)? {
        Some(state) => {
            println!("  split: resumed from checkpoint");
            state
        }
        None => {
            let state = runner.split_by_polarity(&reassigned)?;
            ctx.run_dir
                .write_state(&state, &ctx.run_dir.stage_path(&slice_key, Stage::Split))?;
            println!("  split: {} topics", state.topics.len());
            state
        }
    };

    let k = split.topics.len();
    let cluster_counts: Vec<usize> = match n_clusters_override {
        Some(list) => list.to_vec(),
        None if !ctx.config.pipeline.n_clusters.is_empty() => {
            ctx.config.pipeline.n_clusters.clone()
        }
        None => match topic_count_grid(k) {
            Ok(grid) => {
                let mut v = vec![grid.t_min, grid.t_mid, grid.t_max];
                v.dedup();
                v
            }
            Err(_) => {
                log::info!(
                    "slice {} has only {} topics; integrating at the original count",
                    slice_key,
                    k
                );
                vec![k]
            }
        },
    };

    for &n in &cluster_counts {
        if n < 1 || n > k {
            return Err(CliError::config(format!(
                "n_clusters {} out of range [1, {}] for slice {}",
                n, k, slice_key
            )));
        }
        let path = ctx.run_dir.integrated_path(&slice_key, n);
        if ctx.run_dir.read_state(&path).map_err(CliError::from)?.is_some() {
            println!("  integrated_T{}: resumed from checkpoint", n);
            continue;
        }
        let state = runner.integrate_topics(&split, n)?;
        ctx.run_dir.write_state(&state, &path)?;
        println!("  integrated_T{}: {} topics", n, state.topics.len());
    }
    Ok(())
}

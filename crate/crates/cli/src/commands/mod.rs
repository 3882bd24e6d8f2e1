pub mod evaluate;
pub mod extract;
pub mod model;
pub mod outcomes;
pub mod report;

use topiclens::corpus::{CorpusSlice, SliceKey};

use crate::context::CliError;

/// Resolves `--slice` into concrete keys; "all" means every non-empty slice.
pub fn resolve_slices(
    selector: &str,
    sliced: &std::collections::BTreeMap<SliceKey, CorpusSlice>,
) -> Result<Vec<SliceKey>, CliError> {
    if selector == "all" {
        let keys: Vec<SliceKey> = sliced
            .iter()
            .filter(|(_, s)| !s.passages.is_empty())
            .map(|(k, _)| *k)
            .collect();
        if keys.is_empty() {
            return Err(CliError::data("no non-empty slices in the passage store"));
        }
        return Ok(keys);
    }
    match SliceKey::parse(selector) {
        Some(key) => Ok(vec![key]),
        None => Err(CliError::config(format!(
            "invalid slice '{}': expected e.g. top:behavior or all",
            selector
        ))),
    }
}

//! Grid-world engine for studying how sequential decision makers adapt to
//! novelty: sudden, mid-training changes to world objects or action dynamics.

pub mod agents;
pub mod catalog;
pub mod experiment;
pub mod grid;
pub mod injection;
pub mod layout;
pub mod metrics;
pub mod ontology;

/// Closest candidate by edit distance, for "did you mean" hints.
pub(crate) fn nearest<'a>(name: &str, candidates: impl Iterator<Item = &'a str>) -> Option<String> {
    let lower = name.to_ascii_lowercase();
    candidates
        .map(|c| (strsim::levenshtein(&lower, &c.to_ascii_lowercase()), c))
        .min_by_key(|(d, _)| *d)
        // Past half the name's length the match is noise.
        .filter(|(d, _)| *d <= (name.len() / 2).max(2))
        .map(|(_, c)| c.to_string())
}

use rand::Rng;

use super::lexer::{tokenize, Tok};
use super::CodeBlock;
use crate::docstore::DocStore;
use crate::seeding::keyed_rng;

const KEYWORDS: &[&str] = &[
    "and", "as", "assert", "async", "await", "break", "class", "continue", "def", "del", "elif",
    "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda",
    "nonlocal", "not", "or", "pass", "raise", "return", "try", "while", "with", "yield",
];

/// Names called in `text` (the last component of `a.b.name(`), in source
/// order, deduplicated. Definition names and keywords are skipped.
pub fn called_names(text: &str) -> Vec<&str> {
    let toks = tokenize(text);
    let mut names: Vec<&str> = Vec::new();
    for (i, tok) in toks.iter().enumerate() {
        let Tok::Ident(name) = tok else { continue };
        if toks.get(i + 1) != Some(&Tok::Punct('(')) || KEYWORDS.contains(name) {
            continue;
        }
        if i > 0 && matches!(toks[i - 1], Tok::Ident("def") | Tok::Ident("class")) {
            continue;
        }
        if !names.contains(name) {
            names.push(name);
        }
    }
    names
}

/// Match the block's call sites against the store by name. A name with
/// several candidate records resolves to one of them, chosen uniformly by a
/// generator keyed on `(rng_seed, file_id, block_id, name)`.
pub fn match_apis(block: &CodeBlock, store: &DocStore, rng_seed: u64) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for name in called_names(&block.text) {
        let candidates = store.ids_by_name(name);
        let chosen = match candidates.len() {
            0 => continue,
            1 => &candidates[0],
            n => {
                let mut rng = keyed_rng(rng_seed, &[&block.file_id, &block.block_id, name]);
                &candidates[rng.random_range(0..n)]
            }
        };
        if !out.contains(chosen) {
            out.push(chosen.clone());
        }
    }
    out
}

/// Per-file API name statistics: (distinct matched names, total candidate
/// records across those names).
pub fn name_match_counts<'a>(
    blocks: impl IntoIterator<Item = &'a CodeBlock>,
    store: &DocStore,
) -> (u64, u64) {
    let mut seen: Vec<&str> = Vec::new();
    let mut names = 0;
    let mut matches = 0;
    for block in blocks {
        for name in called_names(&block.text) {
            let n = store.ids_by_name(name).len() as u64;
            if n > 0 && !seen.contains(&name) {
                seen.push(name);
                names += 1;
                matches += n;
            }
        }
    }
    (names, matches)
}

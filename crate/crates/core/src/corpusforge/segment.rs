//! Splitting a Python source file into code blocks.
//!
//! Blocks are top-level `def`/`class` definitions (methods stay inside their
//! class) plus the module-level code found between them. Decorators and
//! comment lines directly above a definition, with no blank line in between,
//! belong to that definition.

use super::lexer::{tokenize, LineState, Tok};
use super::{CodeBlock, CorpusError};
use crate::docstore::normalize_whitespace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StmtKind {
    Definition,
    Decorator,
    Comment,
    Code,
}

/// A top-level statement as a half-open line range with trailing blank
/// lines excluded.
#[derive(Debug, Clone, Copy)]
struct Stmt {
    kind: StmtKind,
    start: usize,
    end: usize,
}

fn classify(line: &str) -> StmtKind {
    let is_kw = |kw: &str| {
        line.strip_prefix(kw)
            .is_some_and(|rest| rest.starts_with(|c: char| c.is_whitespace()))
    };
    if line.starts_with('#') {
        StmtKind::Comment
    } else if line.starts_with('@') {
        StmtKind::Decorator
    } else if is_kw("def") || is_kw("class") || line.strip_prefix("async").is_some_and(|r| r.trim_start().starts_with("def ")) {
        StmtKind::Definition
    } else {
        StmtKind::Code
    }
}

fn statements(lines: &[&str]) -> Vec<Stmt> {
    let blank: Vec<bool> = lines.iter().map(|l| l.trim().is_empty()).collect();
    let mut starts_stmt = vec![false; lines.len()];
    let mut state = LineState::default();
    for (i, line) in lines.iter().enumerate() {
        if state.at_statement_boundary()
            && !blank[i]
            && !line.starts_with(|c: char| c.is_whitespace())
        {
            starts_stmt[i] = true;
        }
        state = state.advance(line);
    }
    // A column-0 comment inside an indented body does not end that body.
    for i in 0..lines.len() {
        if starts_stmt[i] && lines[i].starts_with('#') {
            let next_code = (i + 1..lines.len())
                .find(|&j| !blank[j] && !lines[j].trim_start().starts_with('#'));
            if let Some(j) = next_code {
                if !starts_stmt[j] {
                    starts_stmt[i] = false;
                }
            }
        }
    }

    let mut stmts: Vec<Stmt> = Vec::new();
    for i in 0..lines.len() {
        if starts_stmt[i] {
            stmts.push(Stmt { kind: classify(lines[i]), start: i, end: i + 1 });
        } else if !blank[i] {
            match stmts.last_mut() {
                Some(s) => s.end = i + 1,
                // indented code before any top-level statement
                None => stmts.push(Stmt { kind: StmtKind::Code, start: i, end: i + 1 }),
            }
        }
    }
    stmts
}

/// Segment `source_text` into code blocks, in file order.
pub fn segment_blocks(file_id: &str, source_text: &str) -> Result<Vec<CodeBlock>, CorpusError> {
    let lines: Vec<&str> = source_text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    let stmts = statements(&lines);
    if stmts.is_empty() {
        return Err(CorpusError::EmptyFile(file_id.to_string()));
    }

    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut pending: Vec<Stmt> = Vec::new();
    for stmt in stmts {
        if stmt.kind != StmtKind::Definition {
            pending.push(stmt);
            continue;
        }
        let mut def_start = stmt.start;
        while let Some(prev) = pending.last() {
            let attachable = matches!(prev.kind, StmtKind::Decorator | StmtKind::Comment);
            if attachable && prev.end == def_start {
                def_start = prev.start;
                pending.pop();
            } else {
                break;
            }
        }
        if let (Some(first), Some(last)) = (pending.first(), pending.last()) {
            spans.push((first.start, last.end));
        }
        pending.clear();
        spans.push((def_start, stmt.end));
    }
    if let (Some(first), Some(last)) = (pending.first(), pending.last()) {
        spans.push((first.start, last.end));
    }

    let line_offsets: Vec<usize> = std::iter::once(0)
        .chain(source_text.match_indices('\n').map(|(i, _)| i + 1))
        .collect();
    let blocks = spans
        .into_iter()
        .enumerate()
        .map(|(index, (start, end))| {
            let byte_start = line_offsets[start];
            let byte_end = line_offsets[end - 1] + lines[end - 1].len();
            let text = source_text[byte_start..byte_end].to_string();
            let mut block = CodeBlock {
                block_id: format!("{file_id}#{index}"),
                file_id: file_id.to_string(),
                index_in_file: index,
                start_line: start + 1,
                end_line: end,
                text,
                nl_description: String::new(),
                matched_api_ids: Vec::new(),
            };
            block.nl_description = extract_nl_description(&block);
            block
        })
        .collect();
    Ok(blocks)
}

/// The natural-language description of a block: its docstring if present,
/// else the comment lines directly above or directly under its header, else
/// an empty string. Whitespace is collapsed to single spaces.
pub fn extract_nl_description(block: &CodeBlock) -> String {
    if let Some(doc) = docstring(&block.text) {
        let doc = normalize_whitespace(&doc);
        if !doc.is_empty() {
            return doc;
        }
    }
    let lines: Vec<&str> = block.text.lines().collect();
    let leading = comment_run(&lines);
    if !leading.is_empty() {
        return leading;
    }
    // comments heading the body, right after the header line(s)
    let mut state = LineState::default();
    for (i, line) in lines.iter().enumerate() {
        let trimmed = line.trim_start();
        let is_header = trimmed.starts_with("def ")
            || trimmed.starts_with("class ")
            || trimmed.starts_with("async ");
        if is_header && state.at_statement_boundary() {
            let mut j = i;
            let mut s = state;
            loop {
                s = s.advance(lines[j]);
                j += 1;
                if s.at_statement_boundary() || j >= lines.len() {
                    break;
                }
            }
            return comment_run(&lines[j.min(lines.len())..]);
        }
        state = state.advance(line);
    }
    String::new()
}

fn comment_run(lines: &[&str]) -> String {
    let parts: Vec<&str> = lines
        .iter()
        .map(|l| l.trim())
        .take_while(|l| l.starts_with('#') && !l.starts_with("#!"))
        .map(|l| l.trim_start_matches('#').trim())
        .collect();
    normalize_whitespace(&parts.join(" "))
}

/// Docstring of the first definition in `text`, or of the module-level code
/// when the block opens with a string literal.
fn docstring(text: &str) -> Option<String> {
    let toks = tokenize(text);
    if let Some(Tok::Str(s)) = toks.first() {
        return Some(s.clone());
    }
    let def_pos = toks
        .iter()
        .position(|t| matches!(t, Tok::Ident("def") | Tok::Ident("class")))?;
    let mut depth = 0i32;
    for (i, tok) in toks.iter().enumerate().skip(def_pos) {
        match tok {
            Tok::Punct('(' | '[' | '{') => depth += 1,
            Tok::Punct(')' | ']' | '}') => depth -= 1,
            Tok::Punct(':') if depth <= 0 => {
                return match toks.get(i + 1) {
                    Some(Tok::Str(s)) => Some(s.clone()),
                    _ => None,
                };
            }
            _ => {}
        }
    }
    None
}

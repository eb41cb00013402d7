//! A small tolerant Python scanner: enough to find top-level statement
//! starts, string literals and call sites without a full parser.

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok<'a> {
    Ident(&'a str),
    Punct(char),
    Str(String),
}

/// Scan `text` into identifiers, punctuation and string literals. Comments
/// and whitespace are dropped. Unterminated strings run to end of input.
pub(crate) fn tokenize(text: &str) -> Vec<Tok<'_>> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
        } else if b.is_ascii_whitespace() || b == b'\\' {
            i += 1;
        } else if b == b'"' || b == b'\'' {
            let (content, next) = scan_string(text, i);
            toks.push(Tok::Str(content));
            i = next;
        } else if is_ident_start(b) {
            let start = i;
            while i < bytes.len() && is_ident_continue(bytes[i]) {
                i += 1;
            }
            let word = &text[start..i];
            if i < bytes.len() && (bytes[i] == b'"' || bytes[i] == b'\'') && is_string_prefix(word)
            {
                let (content, next) = scan_string(text, i);
                toks.push(Tok::Str(content));
                i = next;
            } else {
                toks.push(Tok::Ident(word));
            }
        } else {
            let ch = text[i..].chars().next().unwrap_or('\u{fffd}');
            toks.push(Tok::Punct(ch));
            i += ch.len_utf8();
        }
    }
    toks
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_' || b >= 0x80
}

fn is_ident_continue(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b >= 0x80
}

fn is_string_prefix(word: &str) -> bool {
    matches!(
        word.to_ascii_lowercase().as_str(),
        "r" | "u" | "b" | "f" | "br" | "rb" | "fr" | "rf"
    )
}

/// Scan a string literal starting at the quote at `start`. Returns the raw
/// content between the quotes and the byte offset after the closing quote.
fn scan_string(text: &str, start: usize) -> (String, usize) {
    let bytes = text.as_bytes();
    let quote = bytes[start];
    let triple = bytes.len() >= start + 3 && bytes[start + 1] == quote && bytes[start + 2] == quote;
    let open = if triple { 3 } else { 1 };
    let mut i = start + open;
    let body_start = i;
    while i < bytes.len() {
        let b = bytes[i];
        if b == b'\\' {
            i += 2;
            continue;
        }
        if triple {
            if b == quote && bytes.get(i + 1) == Some(&quote) && bytes.get(i + 2) == Some(&quote) {
                return (text[body_start..i].to_string(), i + 3);
            }
        } else if b == quote {
            return (text[body_start..i].to_string(), i + 1);
        } else if b == b'\n' {
            // unterminated single-quoted string ends at the line break
            return (text[body_start..i].to_string(), i);
        }
        i += 1;
    }
    let end = bytes.len();
    (text[body_start.min(end)..].to_string(), end)
}

/// Per-line scanner state carried across line boundaries.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct LineState {
    /// Open bracket depth.
    pub depth: u32,
    /// Quote byte of an open triple-quoted string.
    pub triple: Option<u8>,
    /// Previous line ended with a backslash continuation.
    pub continued: bool,
}

impl LineState {
    /// Whether a line beginning in this state starts a new logical line.
    pub fn at_statement_boundary(&self) -> bool {
        self.depth == 0 && self.triple.is_none() && !self.continued
    }

    /// Advance the state over one line (without its newline).
    pub fn advance(mut self, line: &str) -> LineState {
        let bytes = line.as_bytes();
        let mut i = 0;
        self.continued = false;
        while i < bytes.len() {
            if let Some(q) = self.triple {
                if bytes[i] == b'\\' {
                    i += 2;
                    continue;
                }
                if bytes[i] == q && bytes.get(i + 1) == Some(&q) && bytes.get(i + 2) == Some(&q) {
                    self.triple = None;
                    i += 3;
                } else {
                    i += 1;
                }
                continue;
            }
            match bytes[i] {
                b'#' => break,
                b'"' | b'\'' => {
                    let q = bytes[i];
                    if bytes.get(i + 1) == Some(&q) && bytes.get(i + 2) == Some(&q) {
                        self.triple = Some(q);
                        i += 3;
                    } else {
                        i += 1;
                        while i < bytes.len() && bytes[i] != q {
                            if bytes[i] == b'\\' {
                                i += 1;
                            }
                            i += 1;
                        }
                        i += 1;
                    }
                }
                b'(' | b'[' | b'{' => {
                    self.depth += 1;
                    i += 1;
                }
                b')' | b']' | b'}' => {
                    self.depth = self.depth.saturating_sub(1);
                    i += 1;
                }
                b'\\' if i + 1 == bytes.len() => {
                    self.continued = true;
                    i += 1;
                }
                _ => i += 1,
            }
        }
        self
    }
}

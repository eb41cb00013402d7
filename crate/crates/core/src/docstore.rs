//! API documentation records and the store that indexes them.
//!
//! Records arrive as JSON Lines doc dumps (one object per API). The store is
//! immutable once built and can be shared freely between threads.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DocStoreError {
    #[error("malformed record on line {line_no}: {reason}")]
    MalformedRecord { line_no: usize, reason: String },
    #[error("duplicate api_id `{0}`")]
    DuplicateApiId(String),
    #[error("i/o error reading doc dump: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiParameter {
    pub name: String,
    pub description: String,
}

/// One documented API.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiRecord {
    pub api_id: String,
    pub library: String,
    /// Unqualified callable name, e.g. `concat`.
    pub name: String,
    pub qualified_name: String,
    /// Parameter list text without the enclosing parentheses.
    pub signature: String,
    pub description_full: String,
    /// First sentence of the whitespace-normalized description.
    pub description_first: String,
    pub parameters: Vec<ApiParameter>,
    pub examples: Vec<String>,
}

/// Wire shape of one doc-dump line. Field order here is the canonical
/// serialization order.
#[derive(Debug, Serialize, Deserialize)]
struct DumpRecord {
    api_id: String,
    library: String,
    name: String,
    #[serde(default)]
    qualified_name: String,
    #[serde(default)]
    signature: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    parameters: Vec<ApiParameter>,
    #[serde(default)]
    examples: Vec<String>,
}

impl ApiRecord {
    /// Build a record, deriving `description_first` from the description.
    pub fn new(
        api_id: impl Into<String>,
        library: impl Into<String>,
        name: impl Into<String>,
        signature: impl Into<String>,
        description: impl Into<String>,
    ) -> Self {
        let name = name.into();
        let description_full = description.into();
        let description_first = first_sentence(&normalize_whitespace(&description_full));
        Self {
            api_id: api_id.into(),
            library: library.into(),
            qualified_name: name.clone(),
            name,
            signature: signature.into(),
            description_full,
            description_first,
            parameters: Vec::new(),
            examples: Vec::new(),
        }
    }

    fn from_dump(d: DumpRecord) -> Self {
        let description_first = first_sentence(&normalize_whitespace(&d.description));
        Self {
            api_id: d.api_id,
            library: d.library,
            name: d.name,
            qualified_name: d.qualified_name,
            signature: d.signature,
            description_full: d.description,
            description_first,
            parameters: d.parameters,
            examples: d.examples,
        }
    }

    fn to_dump(&self) -> DumpRecord {
        DumpRecord {
            api_id: self.api_id.clone(),
            library: self.library.clone(),
            name: self.name.clone(),
            qualified_name: self.qualified_name.clone(),
            signature: self.signature.clone(),
            description: self.description_full.clone(),
            parameters: self.parameters.clone(),
            examples: self.examples.clone(),
        }
    }

    /// The canonical `name(signature):description` prompt line.
    pub fn info_line(&self) -> String {
        api_info_line(self)
    }
}

/// Render `name(signature):first-sentence`.
pub fn api_info_line(record: &ApiRecord) -> String {
    format!(
        "{}({}):{}",
        record.name, record.signature, record.description_first
    )
}

/// Collapse every whitespace run to a single space and trim the ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Return the text up to and including the first `.`, `!` or `?` that is
/// followed by whitespace or the end of the text. Without such a terminator
/// the whole trimmed text is returned.
pub fn first_sentence(text: &str) -> String {
    let text = text.trim();
    let mut chars = text.char_indices().peekable();
    while let Some((i, ch)) = chars.next() {
        if matches!(ch, '.' | '!' | '?') {
            match chars.peek() {
                None => return text.to_string(),
                Some((_, next)) if next.is_whitespace() => {
                    return text[..i + ch.len_utf8()].to_string();
                }
                _ => {}
            }
        }
    }
    text.to_string()
}

/// Immutable collection of API records with name and library indexes.
#[derive(Debug, Clone, Default)]
pub struct DocStore {
    records: Vec<ApiRecord>,
    by_id: HashMap<String, usize>,
    by_name: HashMap<String, Vec<String>>,
    by_library: HashMap<String, Vec<String>>,
}

impl DocStore {
    /// Build a store from records, validating id uniqueness.
    pub fn from_records(records: Vec<ApiRecord>) -> Result<Self, DocStoreError> {
        let mut store = DocStore::default();
        for record in records {
            store.insert(record)?;
        }
        Ok(store)
    }

    fn insert(&mut self, record: ApiRecord) -> Result<(), DocStoreError> {
        if self.by_id.contains_key(&record.api_id) {
            return Err(DocStoreError::DuplicateApiId(record.api_id));
        }
        self.by_id.insert(record.api_id.clone(), self.records.len());
        self.by_name
            .entry(record.name.clone())
            .or_default()
            .push(record.api_id.clone());
        self.by_library
            .entry(record.library.clone())
            .or_default()
            .push(record.api_id.clone());
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[ApiRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, api_id: &str) -> Option<&ApiRecord> {
        self.by_id.get(api_id).map(|&i| &self.records[i])
    }

    /// All api_ids documented under `name`, in ingestion order.
    pub fn ids_by_name(&self, name: &str) -> &[String] {
        self.by_name.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All api_ids of `library`, in ingestion order.
    pub fn ids_by_library(&self, library: &str) -> &[String] {
        self.by_library.get(library).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Library names, sorted.
    pub fn libraries(&self) -> Vec<&str> {
        let mut libs: Vec<&str> = self.by_library.keys().map(String::as_str).collect();
        libs.sort_unstable();
        libs
    }

    /// Write the store back out as a canonical doc dump.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for record in &self.records {
            serde_json::to_writer(&mut out, &record.to_dump())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Parse a JSON Lines doc dump. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn ingest_doc_dump<R: BufRead>(source: R) -> Result<DocStore, DocStoreError> {
    let mut store = DocStore::default();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let dump: DumpRecord =
            serde_json::from_str(&line).map_err(|e| DocStoreError::MalformedRecord {
                line_no,
                reason: e.to_string(),
            })?;
        for (field, value) in [
            ("api_id", &dump.api_id),
            ("library", &dump.library),
            ("name", &dump.name),
        ] {
            if value.trim().is_empty() {
                return Err(DocStoreError::MalformedRecord {
                    line_no,
                    reason: format!("`{field}` must be non-empty"),
                });
            }
        }
        store.insert(ApiRecord::from_dump(dump))?;
    }
    Ok(store)
}

use std::collections::HashSet;

use super::BenchError;

const PANDAS_MONKEY: &str = include_str!("../../data/pandas_monkey.tsv");
const NUMPY_BEATNUM: &str = include_str!("../../data/numpy_beatnum.tsv");

/// Ordered public-to-private token table for one library pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordMap {
    pub public_library: String,
    pub private_library: String,
    entries: Vec<(String, String)>,
    /// Entry indexes sorted by descending public-token length.
    by_length: Vec<usize>,
}

impl KeywordMap {
    /// Validate and build a map: public tokens must be unique and no
    /// private token may equal any public token.
    pub fn new(
        public_library: impl Into<String>,
        private_library: impl Into<String>,
        entries: Vec<(String, String)>,
    ) -> Result<Self, BenchError> {
        let mut keys = HashSet::new();
        for (public, private) in &entries {
            if public.is_empty() || private.is_empty() {
                return Err(BenchError::BadKeywordMap("empty token".into()));
            }
            if !keys.insert(public.as_str()) {
                return Err(BenchError::BadKeywordMap(format!("duplicate key `{public}`")));
            }
        }
        if let Some((_, private)) = entries.iter().find(|(_, p)| keys.contains(p.as_str())) {
            return Err(BenchError::BadKeywordMap(format!(
                "target `{private}` is also a key"
            )));
        }
        let mut by_length: Vec<usize> = (0..entries.len()).collect();
        by_length.sort_by(|&a, &b| entries[b].0.len().cmp(&entries[a].0.len()).then(a.cmp(&b)));
        Ok(Self {
            public_library: public_library.into(),
            private_library: private_library.into(),
            entries,
            by_length,
        })
    }

    /// Parse the TSV format: `public<TAB>private` per line, `#` comments,
    /// and an optional `# library: <public> -> <private>` directive. Library
    /// names given as arguments override the directive.
    pub fn from_tsv(text: &str, libraries: Option<(&str, &str)>) -> Result<Self, BenchError> {
        let mut directive: Option<(String, String)> = None;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(pair) = comment.trim().strip_prefix("library:") {
                    if let Some((a, b)) = pair.split_once("->") {
                        directive = Some((a.trim().to_string(), b.trim().to_string()));
                    }
                }
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(BenchError::BadKeywordMap(format!(
                    "line {}: expected 2 tab-separated columns, found {}",
                    i + 1,
                    cols.len()
                )));
            }
            entries.push((cols[0].to_string(), cols[1].to_string()));
        }
        let (public, private) = match (libraries, directive) {
            (Some((a, b)), _) => (a.to_string(), b.to_string()),
            (None, Some(pair)) => pair,
            (None, None) => {
                return Err(BenchError::BadKeywordMap("library pair not given".into()))
            }
        };
        Self::new(public, private, entries)
    }

    /// Shipped pandas→monkey table.
    pub fn pandas_monkey() -> Self {
        Self::from_tsv(PANDAS_MONKEY, None).expect("bundled pandas map is valid")
    }

    /// Shipped numpy→beatnum table.
    pub fn numpy_beatnum() -> Self {
        Self::from_tsv(NUMPY_BEATNUM, None).expect("bundled numpy map is valid")
    }

    /// Look up a bundled map by public or private library name.
    pub fn bundled(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "pandas" | "monkey" | "pandas_monkey" => Some(Self::pandas_monkey()),
            "numpy" | "beatnum" | "numpy_beatnum" => Some(Self::numpy_beatnum()),
            _ => None,
        }
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, public: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == public).map(|(_, v)| v.as_str())
    }

    pub(crate) fn longest_first(&self) -> impl Iterator<Item = &(String, String)> {
        self.by_length.iter().map(|&i| &self.entries[i])
    }

    /// Python source of an alias module named after the private library:
    /// it re-exports the public library, binds each private name to the
    /// public attribute it replaces, and adds the same aliases as methods on
    /// the library's classes where the class allows it.
    pub fn alias_shim_source(&self) -> String {
        let mut out = format!(
            "# Alias layer: {priv} -> {publ}. Generated from the keyword table.\nimport {publ} as _lib\nfrom {publ} import *  # noqa: F401,F403\n\n_ALIASES = {{\n",
            priv = self.private_library,
            publ = self.public_library
        );
        for (public, private) in &self.entries {
            out.push_str(&format!("    {private:?}: {public:?},\n"));
        }
        out.push_str(concat!(
            "}\n\n",
            "for _new, _old in _ALIASES.items():\n",
            "    if hasattr(_lib, _old):\n",
            "        globals()[_new] = getattr(_lib, _old)\n\n",
            "for _cls in [v for v in list(vars(_lib).values()) if isinstance(v, type)]:\n",
            "    for _new, _old in _ALIASES.items():\n",
            "        if _new not in vars(_cls) and hasattr(_cls, _old):\n",
            "            try:\n",
            "                setattr(_cls, _new, getattr(_cls, _old))\n",
            "            except (TypeError, AttributeError):\n",
            "                pass\n",
        ));
        out
    }
}

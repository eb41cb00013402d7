//! Prompt assembly: API information lines in front of the problem context.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apiretriever::Ranking;
use crate::docstore::DocStore;

/// Header line that opens the API block.
pub const API_HEADER: &str = "# Useful APIs:";

/// Default prompt size limit, in characters.
pub const DEFAULT_BUDGET_CHARS: usize = 4000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("api_id `{0}` not in the doc store")]
    UnknownApiId(String),
    #[error("context alone is {context_chars} chars, budget is {budget}")]
    BudgetTooSmall { context_chars: usize, budget: usize },
    #[error("context is empty")]
    EmptyContext,
}

/// Which API information goes into the prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum PromptSetting {
    /// Context only.
    NoApi,
    /// The benchmark's golden APIs, in benchmark order.
    Perfect { api_ids: Vec<String> },
    /// The first `n` retrieved APIs, in rank order.
    TopN { n: usize, api_ids: Vec<String> },
    /// APIs chosen by human vote, in rank order.
    Human { api_ids: Vec<String> },
}

impl PromptSetting {
    pub fn perfect(golden: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self::Perfect { api_ids: golden.into_iter().map(Into::into).collect() }
    }

    pub fn top_n(n: usize, ranking: &Ranking) -> Self {
        Self::TopN { n, api_ids: ranking.ids().take(n).map(String::from).collect() }
    }

    /// Voted APIs, ordered by their position in `ranking`; voted ids absent
    /// from the ranking go last in ascending order.
    pub fn human<'a>(voted: impl IntoIterator<Item = &'a String>, ranking: &Ranking) -> Self {
        let mut ids: Vec<String> = voted.into_iter().cloned().collect();
        let pos = |id: &String| ranking.ids().position(|r| r == id).unwrap_or(usize::MAX);
        ids.sort_by(|a, b| pos(a).cmp(&pos(b)).then_with(|| a.cmp(b)));
        Self::Human { api_ids: ids }
    }

    pub fn api_ids(&self) -> &[String] {
        match self {
            Self::NoApi => &[],
            Self::Perfect { api_ids } | Self::Human { api_ids } => api_ids,
            Self::TopN { n, api_ids } => &api_ids[..api_ids.len().min(*n)],
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::NoApi => "No API".into(),
            Self::Perfect { .. } => "Perfect".into(),
            Self::TopN { n, .. } => format!("Top-{n}"),
            Self::Human { .. } => "Human".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub problem_id: String,
    pub setting: PromptSetting,
    /// APIs that survived the budget, in prompt order.
    pub included_api_ids: Vec<String>,
    pub text: String,
}

/// Render `context` with the setting's APIs as comment lines in front:
/// `# Useful APIs:`, one `# name(signature):description` line per API, a
/// blank line, then the context unchanged. APIs are dropped from the end of
/// the list until the whole prompt fits in `budget_chars`; if none fit the
/// prompt is the bare context.
pub fn assemble_prompt(
    problem_id: &str,
    context: &str,
    setting: &PromptSetting,
    store: &DocStore,
    budget_chars: usize,
) -> Result<Prompt, PromptError> {
    if context.is_empty() {
        return Err(PromptError::EmptyContext);
    }
    let context_chars = context.chars().count();
    if context_chars > budget_chars {
        return Err(PromptError::BudgetTooSmall { context_chars, budget: budget_chars });
    }
    let mut lines = Vec::new();
    for id in setting.api_ids() {
        let record = store.get(id).ok_or_else(|| PromptError::UnknownApiId(id.clone()))?;
        lines.push((id.clone(), format!("# {}\n", record.info_line())));
    }

    // header line + blank separator line
    let overhead = API_HEADER.chars().count() + 2;
    let mut total = context_chars + overhead + lines.iter().map(|(_, l)| l.chars().count()).sum::<usize>();
    while !lines.is_empty() && total > budget_chars {
        let (_, dropped) = lines.pop().unwrap_or_default();
        total -= dropped.chars().count();
    }

    let text = if lines.is_empty() {
        context.to_string()
    } else {
        let mut t = String::with_capacity(total);
        t.push_str(API_HEADER);
        t.push('\n');
        for (_, line) in &lines {
            t.push_str(line);
        }
        t.push('\n');
        t.push_str(context);
        t
    };
    Ok(Prompt {
        problem_id: problem_id.to_string(),
        setting: setting.clone(),
        included_api_ids: lines.into_iter().map(|(id, _)| id).collect(),
        text,
    })
}

//! Prompt rendering for chat-model agents.
//!
//! Templates are plain text with `{{name}}` placeholders. The built-in set
//! is compiled in from `templates/`; [`PromptTemplates::load_dir`] reads
//! replacements from disk. Rendering an unknown placeholder is an error so
//! that typos in custom templates surface immediately.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use super::chat::ChatMessage;
use super::{statewide_shares, DecisionContext, Party};
use crate::generators::CandidateSet;
use crate::graph::{DualGraph, Plan};
use crate::metrics::{district_geometry, Geometry, MetricsError};

static PLACEHOLDER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\{\{\s*([A-Za-z0-9_]+)\s*\}\}").expect("placeholder pattern"));

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("template {template}: unknown placeholder {{{{{name}}}}}")]
    UnknownPlaceholder { template: &'static str, name: String },
    #[error("reading template {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    pub system: String,
    pub choose: String,
    pub freeze: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self {
            system: include_str!("../../templates/agent_system.txt").to_string(),
            choose: include_str!("../../templates/choose_user.txt").to_string(),
            freeze: include_str!("../../templates/freeze_user.txt").to_string(),
        }
    }
}

impl PromptTemplates {
    /// Reads `agent_system.txt`, `choose_user.txt` and `freeze_user.txt`.
    pub fn load_dir(dir: &Path) -> Result<Self, PromptError> {
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| PromptError::Io { path, source })
        };
        Ok(Self {
            system: read("agent_system.txt")?,
            choose: read("choose_user.txt")?,
            freeze: read("freeze_user.txt")?,
        })
    }
}

fn render(template: &str, name: &'static str, vars: &BTreeMap<&str, String>) -> Result<String, PromptError> {
    let mut out = String::with_capacity(template.len() + 256);
    let mut last = 0;
    for caps in PLACEHOLDER.captures_iter(template) {
        let whole = caps.get(0).expect("match");
        let key = &caps[1];
        let value = vars.get(key).ok_or_else(|| PromptError::UnknownPlaceholder {
            template: name,
            name: key.to_string(),
        })?;
        out.push_str(&template[last..whole.start()]);
        out.push_str(value);
        last = whole.end();
    }
    out.push_str(&template[last..]);
    Ok(out)
}

/// `"blue"`, `"red"` or `"swing"` from the statewide Democratic share.
pub(crate) fn state_type(dem_share: f64) -> &'static str {
    if dem_share >= 0.53 {
        "blue"
    } else if dem_share <= 0.47 {
        "red"
    } else {
        "swing"
    }
}

fn strategy(party: Party, kind: &str) -> &'static str {
    match (kind, party) {
        ("swing", _) => {
            "In a closely divided state small shifts decide many seats: prioritize districts near 50% and avoid wasting votes in lopsided ones."
        }
        ("blue", Party::Democrat) | ("red", Party::Republican) => {
            "Your party holds the statewide majority: spread your voters efficiently so that as many districts as possible carry a safe but not excessive margin."
        }
        _ => {
            "Your party is the statewide minority: concentrate on districts you can realistically carry and protect your strongholds from being cracked."
        }
    }
}

fn base_vars(ctx: &DecisionContext<'_>, party: Party, graph: &DualGraph) -> BTreeMap<&'static str, String> {
    let dem_share = ctx
        .profile
        .party_shares
        .map(|s| s.dem)
        .unwrap_or_else(|| statewide_shares(graph).dem);
    let kind = state_type(dem_share);
    let frozen = if ctx.frozen.is_empty() {
        "(none)".to_string()
    } else {
        ctx.frozen
            .iter()
            .map(|f| format!("- District {}: population {}, Democratic share {:.1}%", f.label, f.population, 100.0 * f.pct_dem))
            .collect::<Vec<_>>()
            .join("\n")
    };
    BTreeMap::from([
        ("party_name", party.name().to_string()),
        ("opponent_name", party.opponent().name().to_string()),
        ("state_name", ctx.profile.name.clone()),
        ("state_type", kind.to_string()),
        ("strategy", strategy(party, kind).to_string()),
        ("background", ctx.profile.background_text.clone()),
        ("round", (ctx.round + 1).to_string()),
        ("districts_left", ctx.districts_left.to_string()),
        ("frozen", frozen),
    ])
}

fn district_table(geoms: &[Geometry<f64>]) -> Result<String, MetricsError> {
    let mut t = String::from("| District | Population | Dem share | PPS |\n|---|---|---|---|\n");
    for g in geoms {
        let share = g.pct_dem().ok_or(MetricsError::NoVotes { label: g.label })?;
        writeln!(t, "| {} | {} | {:.1}% | {:.3} |", g.label, g.population, 100.0 * share, g.polsby_popper()?)
            .expect("write to string");
    }
    Ok(t)
}

fn messages(templates: &PromptTemplates, user_tpl: &str, user_name: &'static str, vars: &BTreeMap<&str, String>) -> Result<Vec<ChatMessage>, PromptError> {
    Ok(vec![
        ChatMessage::system(render(&templates.system, "agent_system", vars)?),
        ChatMessage::user(render(user_tpl, user_name, vars)?),
    ])
}

/// System prompt plus a user message listing every candidate with a
/// per-district table; candidates are numbered from 0.
pub fn build_choose_prompt(
    templates: &PromptTemplates,
    ctx: &DecisionContext<'_>,
    party: Party,
    candidates: &CandidateSet,
    graph: &DualGraph,
) -> Result<Vec<ChatMessage>, PromptError> {
    let mut vars = base_vars(ctx, party, graph);
    let mut listing = String::new();
    for (i, plan) in candidates.plans.iter().enumerate() {
        if i > 0 {
            listing.push('\n');
        }
        writeln!(listing, "Candidate {i}:").expect("write to string");
        listing.push_str(&district_table(&district_geometry(plan, graph))?);
    }
    vars.insert("candidates", listing.trim_end().to_string());
    vars.insert("num_candidates", candidates.len().to_string());
    vars.insert("max_index", candidates.len().saturating_sub(1).to_string());
    messages(templates, &templates.choose, "choose_user", &vars)
}

pub fn build_freeze_prompt(
    templates: &PromptTemplates,
    ctx: &DecisionContext<'_>,
    party: Party,
    plan: &Plan,
    graph: &DualGraph,
) -> Result<Vec<ChatMessage>, PromptError> {
    let mut vars = base_vars(ctx, party, graph);
    let geoms = district_geometry(plan, graph);
    vars.insert("plan", district_table(&geoms)?.trim_end().to_string());
    let labels: Vec<String> = geoms.iter().map(|g| g.label.to_string()).collect();
    vars.insert("labels", labels.join(", "));
    messages(templates, &templates.freeze, "freeze_user", &vars)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_substitutes_and_rejects_unknown() {
        let vars = BTreeMap::from([("a", "x".to_string()), ("b", "y".to_string())]);
        assert_eq!(render("{{a}}-{{ b }}-{{a}}", "t", &vars).unwrap(), "x-y-x");
        let err = render("hi {{c}}", "t", &vars).unwrap_err();
        assert_eq!(err.to_string(), "template t: unknown placeholder {{c}}");
    }

    #[test]
    fn state_types() {
        assert_eq!(state_type(0.55), "blue");
        assert_eq!(state_type(0.50), "swing");
        assert_eq!(state_type(0.40), "red");
    }
}

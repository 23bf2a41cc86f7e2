//! Partisan decision policies.
//!
//! An [`Agent`] answers two questions per round: which candidate plan to
//! pick when choosing, and which district to lock when freezing. Rule
//! policies are pure functions of the plans; the chat-model policy renders
//! prompts, parses the reply and falls back to the partisan rule when the
//! model cannot be reached or keeps answering out of format.

mod chat;
mod llm;
mod prompt;
mod reply;
mod rules;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::CandidateSet;
use crate::graph::{DualGraph, Plan};
use crate::metrics::MetricsError;

pub use chat::{call_chat_endpoint, ChatError, ChatMessage, ChatTransport, HttpChatClient, RequestLimiter};
pub use llm::LlmAgent;
pub use prompt::{build_choose_prompt, build_freeze_prompt, PromptError, PromptTemplates};
pub use reply::{parse_agent_reply, ParseFailure, ParsedReply, ReplyKind};
pub use rules::{
    choose_by_rule, freeze_by_rule, own_share, score_plan_partisan, PartisanScore, RuleAgent, RulePolicy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    #[serde(alias = "dem")]
    Democrat,
    #[serde(alias = "rep")]
    Republican,
}

impl Party {
    pub fn opponent(self) -> Party {
        match self {
            Party::Democrat => Party::Republican,
            Party::Republican => Party::Democrat,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Party::Democrat => "Democratic",
            Party::Republican => "Republican",
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Democrat => "democrat",
            Party::Republican => "republican",
        })
    }
}

impl FromStr for Party {
    type Err = AgentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dem" | "d" | "democrat" | "democratic" => Ok(Party::Democrat),
            "rep" | "r" | "republican" => Ok(Party::Republican),
            other => Err(AgentError::Config(format!("unknown party {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Choose,
    Freeze,
}

/// Connection and retry settings for a chat-completion backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub model: String,
    pub base_url: String,
    /// Name of the environment variable holding the API key. The key is
    /// sent as a bearer token when the variable is set.
    pub api_key_env: String,
    pub max_retries: u32,
    pub timeout_secs: u64,
    /// Base delay of the exponential backoff between transport retries.
    pub backoff_ms: u64,
    /// Fall back to the partisan rule when the model fails.
    pub fallback: bool,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            model: String::new(),
            base_url: String::new(),
            api_key_env: "OPENAI_API_KEY".into(),
            max_retries: 2,
            timeout_secs: 120,
            backoff_ms: 500,
            fallback: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Policy {
    Llm(LlmConfig),
    Rule { rule: RulePolicy },
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Llm(cfg) => write!(f, "llm:{}@{}", cfg.model, cfg.base_url),
            Policy::Rule { rule } => write!(f, "rule:{rule}"),
        }
    }
}

impl FromStr for Policy {
    type Err = AgentError;

    /// `rule:partisan`, `rule:popdev`, `rule:compact` or `llm:<model>@<base-url>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(rule) = s.strip_prefix("rule:") {
            return Ok(Policy::Rule { rule: rule.parse()? });
        }
        if let Some(rest) = s.strip_prefix("llm:") {
            let (model, url) = rest
                .split_once('@')
                .ok_or_else(|| AgentError::Config(format!("llm agent spec {s:?} lacks @<base-url>")))?;
            if model.is_empty() || url.is_empty() {
                return Err(AgentError::Config(format!("llm agent spec {s:?} has an empty field")));
            }
            return Ok(Policy::Llm(LlmConfig {
                model: model.to_string(),
                base_url: url.trim_end_matches('/').to_string(),
                ..LlmConfig::default()
            }));
        }
        Err(AgentError::Config(format!(
            "unknown agent spec {s:?}; expected rule:partisan|popdev|compact or llm:<model>@<url>"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub party: Party,
    pub policy: Policy,
}

impl AgentSpec {
    pub fn parse(party: Party, spec: &str) -> Result<Self, AgentError> {
        Ok(Self {
            party,
            policy: spec.parse()?,
        })
    }

    pub fn rule(party: Party, rule: RulePolicy) -> Self {
        Self {
            party,
            policy: Policy::Rule { rule },
        }
    }

    /// Instantiates the agent; chat-backed agents share `limiter` for
    /// their in-flight request cap.
    pub fn build(&self, limiter: Option<Arc<RequestLimiter>>) -> Box<dyn Agent> {
        match &self.policy {
            Policy::Rule { rule } => Box::new(RuleAgent::new(self.party, *rule)),
            Policy::Llm(cfg) => {
                let client = HttpChatClient::new(cfg.clone()).with_limiter(limiter);
                Box::new(LlmAgent::new(self.party, cfg.clone(), Box::new(client)))
            }
        }
    }
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.party, self.policy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartyShares {
    pub dem: f64,
    pub rep: f64,
}

/// Political background handed to chat-model agents.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StateProfile {
    pub name: String,
    pub background_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub party_shares: Option<PartyShares>,
}

impl StateProfile {
    /// Reads a plain-text background; the profile is named after the file stem.
    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(Self {
            name,
            background_text: text.trim().to_string(),
            party_shares: None,
        })
    }

    /// A short factual background derived from the graph itself.
    pub fn synthetic(name: &str, graph: &DualGraph) -> Self {
        let shares = statewide_shares(graph);
        let background_text = format!(
            "{name} is a synthetic state of {} precincts with {} residents. \
             Statewide the Democratic Party received {:.1}% and the Republican Party {:.1}% of the two-party vote. \
             Partisan geography, demographics and electoral history beyond these totals are not available.",
            graph.len(),
            graph.total_population(),
            100.0 * shares.dem,
            100.0 * shares.rep,
        );
        Self {
            name: name.to_string(),
            background_text,
            party_shares: Some(shares),
        }
    }
}

pub fn statewide_shares(graph: &DualGraph) -> PartyShares {
    let dem: f64 = graph.units().iter().map(|u| u.dem_votes).sum();
    let rep: f64 = graph.units().iter().map(|u| u.rep_votes).sum();
    let total = dem + rep;
    if total > 0.0 {
        PartyShares {
            dem: dem / total,
            rep: rep / total,
        }
    } else {
        PartyShares { dem: 0.5, rep: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrozenSummary {
    pub label: u32,
    pub population: u64,
    pub pct_dem: f64,
}

/// Everything an agent may look at when deciding.
#[derive(Debug, Clone)]
pub struct DecisionContext<'a> {
    pub round: usize,
    pub role: Role,
    pub districts_left: u32,
    pub frozen: Vec<FrozenSummary>,
    pub profile: &'a StateProfile,
    /// Global ideal district population.
    pub ideal_pop: f64,
}

/// An agent's answer: a candidate index when choosing, a district label
/// when freezing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub value: usize,
    pub rationale: Option<String>,
    /// Set when the answer came from the fallback rule; explains why.
    pub fallback: Option<String>,
}

impl Decision {
    pub fn plain(value: usize) -> Self {
        Self {
            value,
            rationale: None,
            fallback: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("agent configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("chat endpoint failed: {0}")]
    Chat(#[from] ChatError),
    #[error("no parseable answer after {attempts} replies: {last}")]
    Unparseable { attempts: u32, last: ParseFailure },
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("empty candidate set")]
    NoCandidates,
}

pub trait Agent: Send {
    fn party(&self) -> Party;

    fn describe(&self) -> String;

    /// Checked once before a game starts.
    fn check_ready(&self, _profile: &StateProfile) -> Result<(), AgentError> {
        Ok(())
    }

    /// Index into `candidates.plans`.
    fn choose(
        &mut self,
        candidates: &CandidateSet,
        ctx: &DecisionContext<'_>,
        graph: &DualGraph,
    ) -> Result<Decision, AgentError>;

    /// A district label of `plan`.
    fn freeze(&mut self, plan: &Plan, ctx: &DecisionContext<'_>, graph: &DualGraph) -> Result<Decision, AgentError>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agent_spec_strings() {
        let s = AgentSpec::parse(Party::Democrat, "rule:partisan").unwrap();
        assert_eq!(s.to_string(), "democrat rule:partisan");
        let s = AgentSpec::parse(Party::Republican, "llm:gpt-4o-mini@http://localhost:8080/v1/").unwrap();
        match &s.policy {
            Policy::Llm(cfg) => {
                assert_eq!(cfg.model, "gpt-4o-mini");
                assert_eq!(cfg.base_url, "http://localhost:8080/v1");
            }
            _ => panic!("expected llm policy"),
        }
        assert!(AgentSpec::parse(Party::Democrat, "rule:greedy").is_err());
        assert!(AgentSpec::parse(Party::Democrat, "llm:model-only").is_err());
        assert!(AgentSpec::parse(Party::Democrat, "human").is_err());
    }

    #[test]
    fn party_parsing_and_opponent() {
        assert_eq!("dem".parse::<Party>().unwrap(), Party::Democrat);
        assert_eq!("REP".parse::<Party>().unwrap(), Party::Republican);
        assert_eq!(Party::Democrat.opponent(), Party::Republican);
    }
}

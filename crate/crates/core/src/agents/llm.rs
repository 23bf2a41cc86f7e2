use super::chat::{ChatMessage, ChatTransport};
use super::prompt::{build_choose_prompt, build_freeze_prompt, PromptTemplates};
use super::reply::{parse_agent_reply, ParseFailure, ParsedReply, ReplyKind};
use super::rules::{choose_by_rule, freeze_by_rule, RulePolicy};
use super::{Agent, AgentError, Decision, DecisionContext, LlmConfig, Party, StateProfile};
use crate::generators::CandidateSet;
use crate::graph::{DualGraph, Plan};

/// Chat-model agent. Each decision sends one prompt; replies that fail to
/// parse are re-sent unchanged up to `max_retries` times. When the model
/// keeps failing, or the endpoint is unreachable, the decision falls back
/// to the partisan rule (if enabled) and the fallback reason is recorded.
pub struct LlmAgent {
    party: Party,
    cfg: LlmConfig,
    templates: PromptTemplates,
    transport: Box<dyn ChatTransport>,
}

enum Outcome {
    Parsed(ParsedReply),
    Failed(AgentError),
}

impl LlmAgent {
    pub fn new(party: Party, cfg: LlmConfig, transport: Box<dyn ChatTransport>) -> Self {
        Self {
            party,
            cfg,
            templates: PromptTemplates::default(),
            transport,
        }
    }

    pub fn with_templates(mut self, templates: PromptTemplates) -> Self {
        self.templates = templates;
        self
    }

    fn ask(&mut self, messages: &[ChatMessage], kind: ReplyKind, bounds: std::ops::RangeInclusive<usize>) -> Outcome {
        let attempts = self.cfg.max_retries + 1;
        let mut last = ParseFailure::Missing;
        for i in 1..=attempts {
            let text = match self.transport.complete(messages) {
                Ok(t) => t,
                Err(e) => return Outcome::Failed(e.into()),
            };
            match parse_agent_reply(&text, kind, bounds.clone()) {
                Ok(parsed) => return Outcome::Parsed(parsed),
                Err(f) => {
                    log::warn!("{} agent reply {i}/{attempts} unusable: {f}", self.party);
                    last = f;
                }
            }
        }
        Outcome::Failed(AgentError::Unparseable { attempts, last })
    }

    fn settle(&self, outcome: Outcome, fallback: impl FnOnce() -> Result<usize, AgentError>) -> Result<Decision, AgentError> {
        match outcome {
            Outcome::Parsed(p) => Ok(Decision {
                value: p.value,
                rationale: p.rationale,
                fallback: None,
            }),
            Outcome::Failed(err) if self.cfg.fallback => {
                log::warn!("{} agent falling back to rule:partisan: {err}", self.party);
                Ok(Decision {
                    value: fallback()?,
                    rationale: None,
                    fallback: Some(format!("rule:partisan fallback: {err}")),
                })
            }
            Outcome::Failed(err) => Err(err),
        }
    }
}

impl Agent for LlmAgent {
    fn party(&self) -> Party {
        self.party
    }

    fn describe(&self) -> String {
        format!("llm:{}@{}", self.cfg.model, self.cfg.base_url)
    }

    fn check_ready(&self, profile: &StateProfile) -> Result<(), AgentError> {
        if profile.background_text.trim().is_empty() {
            return Err(AgentError::Config(format!(
                "{} llm agent needs a nonempty state background",
                self.party
            )));
        }
        Ok(())
    }

    fn choose(
        &mut self,
        candidates: &CandidateSet,
        ctx: &DecisionContext<'_>,
        graph: &DualGraph,
    ) -> Result<Decision, AgentError> {
        if candidates.is_empty() {
            return Err(AgentError::NoCandidates);
        }
        let messages = build_choose_prompt(&self.templates, ctx, self.party, candidates, graph)?;
        let outcome = self.ask(&messages, ReplyKind::Choose, 0..=candidates.len() - 1);
        self.settle(outcome, || {
            choose_by_rule(RulePolicy::Partisan, self.party, &candidates.plans, graph, ctx.ideal_pop)
        })
    }

    fn freeze(&mut self, plan: &Plan, ctx: &DecisionContext<'_>, graph: &DualGraph) -> Result<Decision, AgentError> {
        let messages = build_freeze_prompt(&self.templates, ctx, self.party, plan, graph)?;
        let outcome = self.ask(&messages, ReplyKind::Freeze, 1..=plan.k() as usize);
        self.settle(outcome, || {
            freeze_by_rule(RulePolicy::Partisan, self.party, plan, graph, ctx.ideal_pop).map(|l| l as usize)
        })
    }
}

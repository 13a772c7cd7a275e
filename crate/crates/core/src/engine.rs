//! The interview game: one question, one retrieval, one persuasion judgment,
//! one withholding draw and one source reply per turn.
//!
//! [`Game`] exposes each step separately so the session server can put a
//! human in either seat; [`play_game`] runs a fully automatic game.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;

use crate::agents::prompts::{
    parse_bracketed_ids, parse_bracketed_level, render_interviewer_prompt, render_judge_prompt,
    render_retriever_prompt, render_source_prompt, GAME_TEMPLATES,
};
use crate::agents::{Agent, AgentError, AgentHandle, ChatMessage, PromptSet, TemplateError};
use crate::domain::{
    reward_percent, AblationMode, AgentCalls, BackendIds, GameState, InfoItem, ItemId, Persona, PersuasionLevel,
    RunRecord, Scenario, TokenTotals, Turn,
};
use crate::persona::{PersonaCatalog, PersuasionProfile};
use crate::rng::SimRng;
use crate::withholding::items_to_return;

/// Level the judge falls back to when its reply cannot be parsed.
pub const JUDGE_FALLBACK_LEVEL: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Number of most recent turns the judge sees.
    pub context_window: usize,
    /// Level fed to the withholding draw when persuasion is ablated.
    pub no_persuasion_level: PersuasionLevel,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            context_window: 4,
            no_persuasion_level: PersuasionLevel::clamped(3),
        }
    }
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("{role} agent failed: {error}")]
    Agent { role: &'static str, error: AgentError },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("game already finished")]
    Finished,
}

/// Source of `started_at` / `finished_at` stamps.
pub trait Clock: Send + Sync {
    fn now(&self) -> String;
}

/// Wall-clock UTC time in RFC 3339.
#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> String {
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
    }
}

/// Always returns the same stamp; makes scripted runs byte-reproducible.
#[derive(Debug, Clone)]
pub struct FixedClock(pub String);

impl Default for FixedClock {
    fn default() -> Self {
        FixedClock("1970-01-01T00:00:00.000Z".to_string())
    }
}

impl Clock for FixedClock {
    fn now(&self) -> String {
        self.0.clone()
    }
}

#[derive(Clone)]
pub struct GameAgents {
    pub interviewer: AgentHandle,
    pub source: AgentHandle,
    pub judge: AgentHandle,
    pub retriever: AgentHandle,
}

impl GameAgents {
    pub fn backend_ids(&self) -> BackendIds {
        BackendIds {
            interviewer: self.interviewer.id().to_string(),
            source: self.source.id().to_string(),
            judge: self.judge.id().to_string(),
            retriever: self.retriever.id().to_string(),
        }
    }
}

/// Everything fixed for the duration of one game.
#[derive(Clone)]
pub struct GameSetup {
    pub scenario: Scenario,
    pub persona: Persona,
    pub profile: PersuasionProfile,
    pub agents: GameAgents,
    pub prompts: Arc<PromptSet>,
    pub config: EngineConfig,
}

impl GameSetup {
    pub fn new(scenario: Scenario, catalog: &PersonaCatalog, agents: GameAgents, prompts: Arc<PromptSet>) -> Self {
        GameSetup {
            persona: catalog.persona(scenario.persona).clone(),
            profile: catalog.profile(scenario.persona).clone(),
            scenario,
            agents,
            prompts,
            config: EngineConfig::default(),
        }
    }
}

fn call(agent: &dyn Agent, messages: &[ChatMessage], tokens: &mut TokenTotals) -> Result<String, AgentError> {
    let completion = agent.complete(messages)?;
    if let Some(u) = completion.usage {
        tokens.prompt_tokens += u.prompt_tokens;
        tokens.completion_tokens += u.completion_tokens;
    }
    Ok(completion.text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Retrieval {
    pub items: Vec<InfoItem>,
    pub failed: bool,
    /// Number of retriever calls made (0 when nothing was left to retrieve).
    pub calls: u32,
}

/// Items not yet in `used` that the retriever marks relevant, in scenario order.
/// A failed or unparseable retriever reply yields no items and `failed = true`.
pub fn relevant_items(
    prompts: &PromptSet,
    items: &[InfoItem],
    used: &BTreeSet<ItemId>,
    question: &str,
    retriever: &dyn Agent,
    tokens: &mut TokenTotals,
) -> Result<Retrieval, TemplateError> {
    let candidates: Vec<InfoItem> = items.iter().filter(|i| !used.contains(&i.id)).cloned().collect();
    if candidates.is_empty() {
        return Ok(Retrieval {
            items: Vec::new(),
            failed: false,
            calls: 0,
        });
    }
    let messages = render_retriever_prompt(prompts, &candidates, question)?;
    let ids = match call(retriever, &messages, tokens) {
        Ok(reply) => match parse_bracketed_ids(&reply) {
            Some(ids) => Some(ids),
            None => {
                warn!(retriever = retriever.id(), reply = %reply, "unparseable retriever reply");
                None
            }
        },
        Err(e) => {
            warn!(retriever = retriever.id(), error = %e, "retriever failed");
            None
        }
    };
    let Some(ids) = ids else {
        return Ok(Retrieval {
            items: Vec::new(),
            failed: true,
            calls: 1,
        });
    };
    let wanted: BTreeSet<ItemId> = ids.into_iter().collect();
    Ok(Retrieval {
        items: candidates.into_iter().filter(|i| wanted.contains(&i.id)).collect(),
        failed: false,
        calls: 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Judgment {
    pub level: PersuasionLevel,
    pub fallback: bool,
    pub calls: u32,
}

/// Asks the judge about the last `context_window` turns. One retry on an
/// unparseable reply, then level 2 with `fallback` set. Agent errors propagate.
pub fn persuasion_level(
    prompts: &PromptSet,
    history: &[Turn],
    profile: &PersuasionProfile,
    judge: &dyn Agent,
    context_window: usize,
    tokens: &mut TokenTotals,
) -> Result<Result<Judgment, AgentError>, TemplateError> {
    let start = history.len().saturating_sub(context_window.max(1));
    let messages = render_judge_prompt(prompts, profile, &history[start..])?;
    for attempt in 1..=2 {
        let reply = match call(judge, &messages, tokens) {
            Ok(r) => r,
            Err(e) => return Ok(Err(e)),
        };
        if let Some(level) = parse_bracketed_level(&reply) {
            return Ok(Ok(Judgment {
                level,
                fallback: false,
                calls: attempt,
            }));
        }
        warn!(judge = judge.id(), attempt, reply = %reply, "unparseable judge reply");
    }
    Ok(Ok(Judgment {
        level: PersuasionLevel::clamped(JUDGE_FALLBACK_LEVEL as i64),
        fallback: true,
        calls: 2,
    }))
}

/// A turn that has been retrieved, judged and drawn but not yet answered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedTurn {
    pub question: String,
    pub relevant_ids: Vec<ItemId>,
    /// Items the source will disclose, in scenario order.
    pub disclose_ids: Vec<ItemId>,
    pub judged_level: PersuasionLevel,
    pub effective_level: PersuasionLevel,
    pub draw_fraction: Option<f64>,
    pub judge_fallback: bool,
    pub retriever_failed: bool,
}

/// One game in progress.
pub struct Game {
    setup: GameSetup,
    ablation: AblationMode,
    state: GameState,
    rng: SimRng,
    calls: AgentCalls,
    tokens: TokenTotals,
}

pub fn withholding_label(scenario_id: &str) -> String {
    format!("game/{scenario_id}/withholding")
}

impl Game {
    pub fn new(setup: GameSetup, ablation: AblationMode, seed: u64) -> Self {
        let state = GameState::new(seed, withholding_label(&setup.scenario.id));
        Game::resume(setup, ablation, state, AgentCalls::default(), TokenTotals::default())
    }

    /// Rebuilds a game from persisted state; the RNG continues where it stopped.
    pub fn resume(
        setup: GameSetup,
        ablation: AblationMode,
        state: GameState,
        calls: AgentCalls,
        tokens: TokenTotals,
    ) -> Self {
        let rng = SimRng::at_position(state.rng_seed, &state.rng_label, state.rng_position);
        Game {
            setup,
            ablation,
            state,
            rng,
            calls,
            tokens,
        }
    }

    pub fn setup(&self) -> &GameSetup {
        &self.setup
    }

    pub fn scenario(&self) -> &Scenario {
        &self.setup.scenario
    }

    pub fn ablation(&self) -> AblationMode {
        self.ablation
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn calls(&self) -> &AgentCalls {
        &self.calls
    }

    pub fn tokens(&self) -> &TokenTotals {
        &self.tokens
    }

    pub fn is_finished(&self) -> bool {
        self.state.turns.len() >= self.setup.scenario.max_turns as usize
    }

    pub fn reward_percent(&self) -> f64 {
        reward_percent(self.state.reward, self.setup.scenario.items.len())
    }

    /// Interviewer agent's next question.
    pub fn next_question(&mut self) -> Result<String, GameError> {
        if self.is_finished() {
            return Err(GameError::Finished);
        }
        let messages =
            render_interviewer_prompt(&self.setup.prompts, &self.setup.scenario.outline, &self.state.turns)?;
        self.calls.interviewer += 1;
        call(self.setup.agents.interviewer.as_ref(), &messages, &mut self.tokens)
            .map(|q| q.trim().to_string())
            .map_err(|error| GameError::Agent {
                role: "interviewer",
                error,
            })
    }

    /// Retrieval, persuasion judgment and withholding for `question`.
    pub fn prepare(&mut self, question: &str) -> Result<PreparedTurn, GameError> {
        if self.is_finished() {
            return Err(GameError::Finished);
        }
        let s = &self.setup;
        let retrieval = relevant_items(
            &s.prompts,
            &s.scenario.items,
            &self.state.used,
            question,
            s.agents.retriever.as_ref(),
            &mut self.tokens,
        )?;
        self.calls.retriever += retrieval.calls;

        let (judged, fallback) = if self.ablation == AblationMode::NoPersuasion {
            (s.config.no_persuasion_level, false)
        } else {
            let j = persuasion_level(
                &s.prompts,
                &self.state.turns,
                &s.profile,
                s.agents.judge.as_ref(),
                s.config.context_window,
                &mut self.tokens,
            )?;
            match j {
                Ok(j) => {
                    self.calls.judge += j.calls;
                    (j.level, j.fallback)
                }
                Err(error) => {
                    self.calls.judge += 1;
                    return Err(GameError::Agent { role: "judge", error });
                }
            }
        };

        let (effective, fraction, disclose) = if self.ablation == AblationMode::NoWithholding {
            (s.profile.effective_level(judged), None, retrieval.items.clone())
        } else {
            let d = items_to_return(&retrieval.items, judged, &s.profile, &mut self.rng);
            self.state.rng_position = self.rng.position();
            (d.effective_level, d.fraction, d.items)
        };

        Ok(PreparedTurn {
            question: question.to_string(),
            relevant_ids: retrieval.items.iter().map(|i| i.id).collect(),
            disclose_ids: disclose.iter().map(|i| i.id).collect(),
            judged_level: judged,
            effective_level: effective,
            draw_fraction: fraction,
            judge_fallback: fallback,
            retriever_failed: retrieval.failed,
        })
    }

    pub fn disclose_items(&self, prepared: &PreparedTurn) -> Vec<InfoItem> {
        self.setup
            .scenario
            .items
            .iter()
            .filter(|i| prepared.disclose_ids.contains(&i.id))
            .cloned()
            .collect()
    }

    /// Source agent's reply for a prepared turn.
    pub fn source_answer(&mut self, prepared: &PreparedTurn) -> Result<String, GameError> {
        let messages = render_source_prompt(
            &self.setup.prompts,
            &self.setup.persona,
            prepared.judged_level,
            &self.disclose_items(prepared),
            &prepared.question,
            &self.state.turns,
        )?;
        self.calls.source += 1;
        call(self.setup.agents.source.as_ref(), &messages, &mut self.tokens)
            .map(|a| a.trim().to_string())
            .map_err(|error| GameError::Agent { role: "source", error })
    }

    /// Appends the turn; only items not already used count toward the reward.
    pub fn commit(&mut self, prepared: PreparedTurn, answer: String) -> &Turn {
        let disclosed: BTreeSet<ItemId> = prepared
            .disclose_ids
            .iter()
            .copied()
            .filter(|id| !self.state.used.contains(id))
            .collect();
        self.state.used.extend(disclosed.iter().copied());
        self.state.reward = self.state.used.len() as u32;
        self.state.turns.push(Turn {
            index: self.state.turns.len() as u32 + 1,
            question: prepared.question,
            answer,
            relevant_ids: prepared.relevant_ids,
            disclosed_ids: disclosed,
            judged_level: prepared.judged_level,
            effective_level: prepared.effective_level,
            draw_fraction: prepared.draw_fraction,
            judge_fallback: prepared.judge_fallback,
            retriever_failed: prepared.retriever_failed,
        });
        self.state.turns.last().expect("turn just pushed")
    }

    /// One fully automatic turn.
    pub fn step(&mut self) -> Result<&Turn, GameError> {
        let question = self.next_question()?;
        let prepared = self.prepare(&question)?;
        let answer = self.source_answer(&prepared)?;
        Ok(self.commit(prepared, answer))
    }

    pub fn record(&self, aborted: Option<String>, started_at: String, finished_at: String) -> RunRecord {
        let s = &self.setup;
        RunRecord {
            scenario_id: s.scenario.id.clone(),
            persona: s.scenario.persona,
            ablation: self.ablation,
            backends: s.agents.backend_ids(),
            seed: self.state.rng_seed,
            item_count: s.scenario.items.len() as u32,
            max_turns: s.scenario.max_turns,
            state: self.state.clone(),
            reward_percent: self.reward_percent(),
            agent_calls: self.calls.clone(),
            tokens: self.tokens,
            prompt_hashes: s.prompts.hashes(&GAME_TEMPLATES),
            aborted,
            started_at,
            finished_at,
        }
    }
}

/// Plays `max_turns` automatic turns. An agent failure stops the game and
/// returns the partial record with `aborted` set.
pub fn play_game(setup: GameSetup, ablation: AblationMode, seed: u64, clock: &dyn Clock) -> RunRecord {
    let started = clock.now();
    let mut game = Game::new(setup, ablation, seed);
    let mut aborted = None;
    while !game.is_finished() {
        if let Err(e) = game.step() {
            warn!(scenario = %game.scenario().id, error = %e, "game aborted");
            aborted = Some(e.to_string());
            break;
        }
    }
    game.record(aborted, started, clock.now())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{stock, ScriptedAgent};
    use crate::domain::{ObjectiveOutline, PersonaKind};

    fn scenario(n: u32, persona: PersonaKind, k: u32) -> Scenario {
        Scenario {
            id: "unit".into(),
            outline: ObjectiveOutline {
                source_bio: "An engineer.".into(),
                context: "A bridge project.".into(),
                objectives: vec!["Budget".into()],
            },
            items: (1..=n)
                .map(|i| InfoItem {
                    id: i,
                    text: format!("Fact number {i} about the bridge."),
                })
                .collect(),
            persona,
            max_turns: k,
        }
    }

    fn agents(judge: ScriptedAgent, retriever: ScriptedAgent) -> GameAgents {
        GameAgents {
            interviewer: Arc::new(ScriptedAgent::fixed("q", "Tell me about the bridge?")),
            source: Arc::new(stock::build("template-source", 0).unwrap()),
            judge: Arc::new(judge),
            retriever: Arc::new(retriever),
        }
    }

    fn setup(s: Scenario, a: GameAgents) -> GameSetup {
        GameSetup::new(s, &PersonaCatalog::bundled(), a, Arc::new(PromptSet::bundled()))
    }

    #[test]
    fn judge_parse_and_fallback() {
        let set = PromptSet::bundled();
        let catalog = PersonaCatalog::bundled();
        let profile = catalog.profile(PersonaKind::Anxious);
        let mut tok = TokenTotals::default();
        let mut judge = |a: ScriptedAgent| persuasion_level(&set, &[], profile, &a, 4, &mut tok).unwrap().unwrap();

        let j = judge(ScriptedAgent::fixed("j", "[5]"));
        assert_eq!((j.level.get(), j.fallback, j.calls), (5, false, 1));
        let j = judge(ScriptedAgent::fixed("j", "maybe [3] overall"));
        assert_eq!((j.level.get(), j.fallback), (3, false));
        let j = judge(ScriptedAgent::fixed("j", "no number"));
        assert_eq!((j.level.get(), j.fallback, j.calls), (2, true, 2));
        let j = judge(ScriptedAgent::in_call_order("j", vec!["hmm".into(), "[4]".into()]));
        assert_eq!((j.level.get(), j.fallback, j.calls), (4, false, 2));
    }

    #[test]
    fn retrieval_skips_used_and_failures() {
        let set = PromptSet::bundled();
        let s = scenario(5, PersonaKind::Anxious, 1);
        let mut tok = TokenTotals::default();
        let all: BTreeSet<ItemId> = s.item_ids();
        let r = relevant_items(&set, &s.items, &all, "q", &ScriptedAgent::fixed("r", "[1]"), &mut tok).unwrap();
        assert_eq!((r.items.len(), r.calls), (0, 0));

        let used: BTreeSet<ItemId> = [2].into();
        let r = relevant_items(&set, &s.items, &used, "q", &ScriptedAgent::fixed("r", "[5, 2, 1, 9]"), &mut tok)
            .unwrap();
        assert_eq!(r.items.iter().map(|i| i.id).collect::<Vec<_>>(), vec![1, 5]);

        let r = relevant_items(&set, &s.items, &used, "q", &ScriptedAgent::failing("r", "down"), &mut tok).unwrap();
        assert!(r.failed && r.items.is_empty());
        let r = relevant_items(&set, &s.items, &used, "q", &ScriptedAgent::fixed("r", "none"), &mut tok).unwrap();
        assert!(r.failed);
    }

    #[test]
    fn no_withholding_returns_everything_relevant() {
        let s = scenario(6, PersonaKind::Anxious, 6);
        let retriever = ScriptedAgent::fixed("r", "[1, 2, 3, 4, 5, 6]");
        let rec = play_game(
            setup(s, agents(ScriptedAgent::fixed("j", "[1]"), retriever)),
            AblationMode::NoWithholding,
            1,
            &FixedClock::default(),
        );
        assert_eq!(rec.reward_percent, 100.0);
        assert_eq!(rec.state.turns[0].disclosed_ids.len(), 6);
        assert!(rec.state.turns.iter().all(|t| t.draw_fraction.is_none()));
        assert_eq!(rec.state.rng_position, 0);
    }

    #[test]
    fn no_persuasion_never_calls_the_judge() {
        let s = scenario(6, PersonaKind::Defensive, 4);
        let rec = play_game(
            setup(s, agents(ScriptedAgent::failing("j", "must not be called"), ScriptedAgent::fixed("r", "[1, 2, 3]"))),
            AblationMode::NoPersuasion,
            9,
            &FixedClock::default(),
        );
        assert!(rec.aborted.is_none());
        assert_eq!(rec.agent_calls.judge, 0);
        assert!(rec.state.turns.iter().all(|t| t.judged_level.get() == 3));
    }

    #[test]
    fn judge_transport_failure_aborts_with_partial_record() {
        let s = scenario(4, PersonaKind::Anxious, 3);
        let rec = play_game(
            setup(s, agents(ScriptedAgent::failing("j", "offline"), ScriptedAgent::fixed("r", "[1]"))),
            AblationMode::Full,
            1,
            &FixedClock::default(),
        );
        assert!(rec.aborted.as_deref().unwrap().contains("judge"));
        assert!(rec.state.turns.is_empty());
        assert_eq!(rec.agent_calls.judge, 1);
    }

    #[test]
    fn empty_item_list_scores_zero() {
        let mut s = scenario(1, PersonaKind::Straightforward, 3);
        s.items.clear();
        let rec = play_game(
            setup(s, agents(ScriptedAgent::fixed("j", "[5]"), ScriptedAgent::fixed("r", "[1]"))),
            AblationMode::Full,
            1,
            &FixedClock::default(),
        );
        assert_eq!((rec.state.reward, rec.reward_percent), (0, 0.0));
        assert_eq!(rec.agent_calls.retriever, 0);
        assert_eq!(rec.state.turns.len(), 3);
    }

    #[test]
    fn resumed_game_matches_uninterrupted_game() {
        let make = || {
            setup(
                scenario(10, PersonaKind::Anxious, 6),
                agents(
                    stock::build("cue-judge", 4).unwrap(),
                    ScriptedAgent::fixed("r", "[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]"),
                ),
            )
        };
        let whole = play_game(make(), AblationMode::Full, 77, &FixedClock::default());

        let mut g = Game::new(make(), AblationMode::Full, 77);
        for _ in 0..3 {
            g.step().unwrap();
        }
        let (state, calls, tokens) = (g.state().clone(), g.calls().clone(), *g.tokens());
        let json = serde_json::to_string(&state).unwrap();
        let mut g = Game::resume(make(), AblationMode::Full, serde_json::from_str(&json).unwrap(), calls, tokens);
        while !g.is_finished() {
            g.step().unwrap();
        }
        let t = FixedClock::default().now();
        assert_eq!(g.record(None, t.clone(), t), whole);
    }
}

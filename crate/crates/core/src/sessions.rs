//! Interactive play sessions with durable state.
//!
//! A session wraps one game in one of three modes. Exactly one action is
//! pending at any time:
//!
//! | mode              | cycle                                              |
//! |-------------------|----------------------------------------------------|
//! | auto-vs-auto      | `agent_step` → … → `finished`                      |
//! | human-interviewer | `human_question` → … → `finished`                  |
//! | human-source      | `human_answer` → `human_rating` → … → `finished`   |
//!
//! In human-source mode the engine runs the interviewer, retriever, judge and
//! withholding draw ahead of time, so the human sees the question together
//! with the items the engine would disclose. The judged level stays hidden
//! until the session is finished or closed.
//!
//! Every mutation is first appended to `sessions/<id>/events.jsonl` (with the
//! full resulting snapshot), then `snapshot.json` is replaced atomically. On
//! load the last parseable event wins, so a crash between the two writes
//! loses nothing. A failed agent call leaves the session untouched.

use std::collections::{BTreeMap, HashMap};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::info;

use crate::agents::{AgentRole, PromptSet};
use crate::analysis::{pearson, Correlation};
use crate::batch::read_jsonl;
use crate::config::{AgentSource, Config, RoleAgents};
use crate::domain::{
    AblationMode, AgentCalls, GameState, ItemId, ObjectiveOutline, PersonaKind, PersuasionLevel, RunRecord, Scenario,
    TokenTotals,
};
use crate::engine::{withholding_label, Clock, Game, GameError, GameSetup, PreparedTurn};
use crate::persona::PersonaCatalog;
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionMode {
    AutoVsAuto,
    HumanInterviewer,
    HumanSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PendingAction {
    AgentStep,
    HumanQuestion,
    HumanAnswer,
    HumanRating,
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanRating {
    pub session_id: uuid::Uuid,
    pub turn_index: u32,
    pub human_level: PersuasionLevel,
    pub judged_level: PersuasionLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentSpecs {
    pub interviewer: String,
    pub source: String,
    pub judge: String,
    pub retriever: String,
}

impl AgentSpecs {
    pub fn scripted() -> Self {
        let r = RoleAgents::scripted();
        AgentSpecs {
            interviewer: r.interviewer.spec(),
            source: r.source.spec(),
            judge: r.judge.spec(),
            retriever: r.retriever.spec(),
        }
    }
}

/// Everything persisted about a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: uuid::Uuid,
    pub mode: SessionMode,
    pub ablation: AblationMode,
    pub scenario: Scenario,
    pub agents: AgentSpecs,
    pub state: GameState,
    pub calls: AgentCalls,
    pub tokens: TokenTotals,
    pub pending: PendingAction,
    /// Engine work for the turn awaiting a human answer.
    pub prepared: Option<PreparedTurn>,
    pub ratings: Vec<HumanRating>,
    pub closed: bool,
    /// Whether the run record has been appended to the run log.
    pub recorded: bool,
    pub created_at: String,
    pub updated_at: String,
}

impl Session {
    pub fn is_terminal(&self) -> bool {
        self.pending == PendingAction::Finished
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemView {
    pub id: ItemId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnView {
    pub index: u32,
    pub question: String,
    pub answer: String,
    pub disclosed: Vec<ItemView>,
    /// Present only once the session is terminal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub judged_level: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub human_level: Option<u8>,
}

/// What a human source needs to answer the current question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceBrief {
    pub persona: PersonaKind,
    pub persona_name: String,
    pub persona_description: String,
    pub items: Vec<ItemView>,
    pub used_ids: Vec<ItemId>,
    /// Items the engine would disclose for the pending question.
    pub suggested_ids: Vec<ItemId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub reward: u32,
    pub item_count: usize,
    pub reward_percent: f64,
    pub extracted: Vec<ItemView>,
    /// Ids only, so a human interviewer never sees withheld text.
    pub missed_ids: Vec<ItemId>,
}

/// Client-facing state. Never contains the text of an item that has not been
/// disclosed, except in the human-source view where the human is the source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: uuid::Uuid,
    pub mode: SessionMode,
    pub ablation: AblationMode,
    pub scenario_id: String,
    pub pending: PendingAction,
    pub closed: bool,
    pub max_turns: u32,
    pub turns_taken: u32,
    pub remaining_turns: u32,
    pub outline: ObjectiveOutline,
    pub history: Vec<TurnView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub current_question: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_brief: Option<SourceBrief>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    pub created_at: String,
    pub updated_at: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateSession {
    pub scenario_id: String,
    pub mode: Option<SessionMode>,
    #[serde(default)]
    pub ablation: Option<AblationMode>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Per-role agent specs; the store defaults fill the gaps.
    #[serde(default)]
    pub agents: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurnInput {
    #[serde(default)]
    pub question: Option<String>,
    #[serde(default)]
    pub answer: Option<String>,
    /// Human source only: overrides the suggested disclosure.
    #[serde(default)]
    pub disclosed_ids: Option<Vec<ItemId>>,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("no session {0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("session {0} is closed")]
    Gone(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("agent failure: {0}")]
    Agent(String),
    #[error("storage: {0}")]
    Storage(String),
}

#[derive(Serialize, Deserialize)]
struct Event {
    seq: u64,
    at: String,
    action: String,
    snapshot: Session,
}

fn storage(path: &Path, e: impl std::fmt::Display) -> SessionError {
    SessionError::Storage(format!("{}: {e}", path.display()))
}

fn append_line<T: Serialize>(path: &Path, value: &T) -> Result<(), SessionError> {
    let err = |e: &dyn std::fmt::Display| storage(path, e);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| err(&e))?;
    }
    let mut line = serde_json::to_string(value).map_err(|e| err(&e))?;
    line.push('\n');
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(|e| err(&e))?;
    f.write_all(line.as_bytes()).map_err(|e| err(&e))?;
    f.sync_data().map_err(|e| err(&e))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), SessionError> {
    let err = |e: &dyn std::fmt::Display| storage(path, e);
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, bytes).map_err(|e| err(&e))?;
    std::fs::rename(&tmp, path).map_err(|e| err(&e))
}

struct Slot {
    session: Session,
    seq: u64,
}

/// All sessions under one data directory.
pub struct SessionStore {
    data_dir: PathBuf,
    scenarios: BTreeMap<String, Scenario>,
    catalog: PersonaCatalog,
    prompts: Arc<PromptSet>,
    config: Config,
    defaults: AgentSpecs,
    clock: Arc<dyn Clock>,
    resolved: Mutex<HashMap<(String, AgentRole), AgentSource>>,
    sessions: Mutex<HashMap<uuid::Uuid, Arc<Mutex<Slot>>>>,
    logs: Mutex<()>,
}

pub struct StoreOptions {
    pub data_dir: PathBuf,
    pub scenarios: Vec<Scenario>,
    pub catalog: PersonaCatalog,
    pub prompts: Arc<PromptSet>,
    pub config: Config,
    pub defaults: AgentSpecs,
    pub clock: Arc<dyn Clock>,
}

impl SessionStore {
    pub fn open(opts: StoreOptions) -> Result<Self, SessionError> {
        std::fs::create_dir_all(opts.data_dir.join("sessions")).map_err(|e| storage(&opts.data_dir, e))?;
        Ok(SessionStore {
            scenarios: opts.scenarios.into_iter().map(|s| (s.id.clone(), s)).collect(),
            data_dir: opts.data_dir,
            catalog: opts.catalog,
            prompts: opts.prompts,
            config: opts.config,
            defaults: opts.defaults,
            clock: opts.clock,
            resolved: Mutex::new(HashMap::new()),
            sessions: Mutex::new(HashMap::new()),
            logs: Mutex::new(()),
        })
    }

    pub fn data_dir(&self) -> &Path {
        &self.data_dir
    }

    pub fn scenario_ids(&self) -> Vec<String> {
        self.scenarios.keys().cloned().collect()
    }

    fn session_dir(&self, id: uuid::Uuid) -> PathBuf {
        self.data_dir.join("sessions").join(id.to_string())
    }

    pub fn runs_path(&self) -> PathBuf {
        self.data_dir.join("runs.jsonl")
    }

    pub fn ratings_path(&self) -> PathBuf {
        self.data_dir.join("ratings.jsonl")
    }

    fn resolve(&self, spec: &str, role: AgentRole) -> Result<AgentSource, SessionError> {
        let mut cache = self.resolved.lock().expect("agent cache poisoned");
        if let Some(a) = cache.get(&(spec.to_string(), role)) {
            return Ok(a.clone());
        }
        let a = AgentSource::resolve(spec, role, &self.config).map_err(|e| SessionError::BadRequest(e.to_string()))?;
        cache.insert((spec.to_string(), role), a.clone());
        Ok(a)
    }

    fn game(&self, s: &Session) -> Result<Game, SessionError> {
        let role = |spec: &str, r| self.resolve(spec, r).map(|a| a.instantiate(s.state.rng_seed));
        let agents = crate::engine::GameAgents {
            interviewer: role(&s.agents.interviewer, AgentRole::Interviewer)?,
            source: role(&s.agents.source, AgentRole::Source)?,
            judge: role(&s.agents.judge, AgentRole::Judge)?,
            retriever: role(&s.agents.retriever, AgentRole::Retriever)?,
        };
        let mut setup = GameSetup::new(s.scenario.clone(), &self.catalog, agents, self.prompts.clone());
        setup.config = self.config.engine();
        Ok(Game::resume(setup, s.ablation, s.state.clone(), s.calls.clone(), s.tokens))
    }

    fn load_slot(&self, id: uuid::Uuid) -> Result<Option<Slot>, SessionError> {
        let dir = self.session_dir(id);
        let events = dir.join("events.jsonl");
        if events.exists() {
            let text = std::fs::read_to_string(&events).map_err(|e| storage(&events, e))?;
            let last = text.lines().rev().find_map(|l| serde_json::from_str::<Event>(l).ok());
            if let Some(e) = last {
                return Ok(Some(Slot {
                    session: e.snapshot,
                    seq: e.seq,
                }));
            }
        }
        let snap = dir.join("snapshot.json");
        if snap.exists() {
            let text = std::fs::read_to_string(&snap).map_err(|e| storage(&snap, e))?;
            let session: Session = serde_json::from_str(&text).map_err(|e| storage(&snap, e))?;
            return Ok(Some(Slot { session, seq: 0 }));
        }
        Ok(None)
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>, SessionError> {
        let uid = uuid::Uuid::parse_str(id).map_err(|_| SessionError::NotFound(id.to_string()))?;
        let mut map = self.sessions.lock().expect("session map poisoned");
        if let Some(s) = map.get(&uid) {
            return Ok(s.clone());
        }
        let slot = self.load_slot(uid)?.ok_or_else(|| SessionError::NotFound(id.to_string()))?;
        let slot = Arc::new(Mutex::new(slot));
        map.insert(uid, slot.clone());
        Ok(slot)
    }

    /// Write-ahead: event line first, then the compacted snapshot.
    fn persist(&self, slot: &mut Slot, next: Session, action: &str) -> Result<(), SessionError> {
        let dir = self.session_dir(next.id);
        std::fs::create_dir_all(&dir).map_err(|e| storage(&dir, e))?;
        let event = Event {
            seq: slot.seq + 1,
            at: next.updated_at.clone(),
            action: action.to_string(),
            snapshot: next,
        };
        append_line(&dir.join("events.jsonl"), &event)?;
        let json = serde_json::to_vec_pretty(&event.snapshot).map_err(|e| storage(&dir, e))?;
        write_atomic(&dir.join("snapshot.json"), &json)?;
        slot.seq = event.seq;
        slot.session = event.snapshot;
        Ok(())
    }

    fn record_run(&self, s: &mut Session) -> Result<(), SessionError> {
        if s.recorded {
            return Ok(());
        }
        let game = self.game(s)?;
        let mut rec: RunRecord = game.record(None, s.created_at.clone(), s.updated_at.clone());
        match s.mode {
            SessionMode::HumanInterviewer => rec.backends.interviewer = "human".into(),
            SessionMode::HumanSource => rec.backends.source = "human".into(),
            SessionMode::AutoVsAuto => {}
        }
        let _guard = self.logs.lock().expect("log lock poisoned");
        append_line(&self.runs_path(), &rec)?;
        s.recorded = true;
        Ok(())
    }

    /// Runs the interviewer and the engine's retrieval, judgment and draw for
    /// the next human-source turn.
    fn prepare_for_human_source(&self, s: &mut Session) -> Result<(), SessionError> {
        let mut game = self.game(s)?;
        let agent_err = |e: GameError| SessionError::Agent(e.to_string());
        let question = game.next_question().map_err(agent_err)?;
        let prepared = game.prepare(&question).map_err(agent_err)?;
        s.state = game.state().clone();
        s.calls = game.calls().clone();
        s.tokens = *game.tokens();
        s.prepared = Some(prepared);
        s.pending = PendingAction::HumanAnswer;
        Ok(())
    }

    fn after_turn(&self, s: &mut Session, next: PendingAction) -> Result<(), SessionError> {
        if s.state.turns.len() >= s.scenario.max_turns as usize {
            s.pending = PendingAction::Finished;
            self.record_run(s)?;
        } else {
            s.pending = next;
        }
        Ok(())
    }

    pub fn create(&self, req: CreateSession) -> Result<SessionView, SessionError> {
        let scenario = self
            .scenarios
            .get(&req.scenario_id)
            .cloned()
            .ok_or_else(|| SessionError::BadRequest(format!("unknown scenario `{}`", req.scenario_id)))?;
        let mode = req
            .mode
            .ok_or_else(|| SessionError::BadRequest("mode is required".into()))?;
        let mut agents = self.defaults.clone();
        for (role, spec) in &req.agents {
            let target = match role.as_str() {
                "interviewer" => &mut agents.interviewer,
                "source" => &mut agents.source,
                "judge" => &mut agents.judge,
                "retriever" => &mut agents.retriever,
                other => return Err(SessionError::BadRequest(format!("unknown agent role `{other}`"))),
            };
            *target = spec.clone();
        }
        let id = uuid::Uuid::new_v4();
        let seed = req
            .seed
            .unwrap_or_else(|| SimRng::derive_seed(u64::from_le_bytes(id.as_bytes()[..8].try_into().unwrap()), "session"));
        let now = self.clock.now();
        let mut session = Session {
            id,
            mode,
            ablation: req.ablation.unwrap_or(AblationMode::Full),
            state: GameState::new(seed, withholding_label(&scenario.id)),
            scenario,
            agents,
            calls: AgentCalls::default(),
            tokens: TokenTotals::default(),
            pending: match mode {
                SessionMode::AutoVsAuto => PendingAction::AgentStep,
                SessionMode::HumanInterviewer => PendingAction::HumanQuestion,
                SessionMode::HumanSource => PendingAction::HumanAnswer,
            },
            prepared: None,
            ratings: Vec::new(),
            closed: false,
            recorded: false,
            created_at: now.clone(),
            updated_at: now,
        };
        // Fail on bad agent specs before anything is written.
        self.game(&session)?;
        if session.scenario.max_turns == 0 {
            session.pending = PendingAction::Finished;
        } else if mode == SessionMode::HumanSource {
            self.prepare_for_human_source(&mut session)?;
        }
        let mut slot = Slot {
            session: session.clone(),
            seq: 0,
        };
        self.persist(&mut slot, session, "create")?;
        info!(session = %id, ?mode, "session created");
        let view = self.view(&slot.session);
        self.sessions
            .lock()
            .expect("session map poisoned")
            .insert(id, Arc::new(Mutex::new(slot)));
        Ok(view)
    }

    pub fn get(&self, id: &str) -> Result<SessionView, SessionError> {
        let slot = self.slot(id)?;
        let slot = slot.lock().expect("session poisoned");
        Ok(self.view(&slot.session))
    }

    pub fn session(&self, id: &str) -> Result<Session, SessionError> {
        let slot = self.slot(id)?;
        let slot = slot.lock().expect("session poisoned");
        Ok(slot.session.clone())
    }

    /// Applies `f` to a copy of the session and persists the result; on error
    /// nothing changes.
    fn mutate<F>(&self, id: &str, action: &str, f: F) -> Result<SessionView, SessionError>
    where
        F: FnOnce(&mut Session) -> Result<(), SessionError>,
    {
        let slot = self.slot(id)?;
        let mut slot = slot.lock().expect("session poisoned");
        if slot.session.closed {
            return Err(SessionError::Gone(id.to_string()));
        }
        let mut next = slot.session.clone();
        f(&mut next)?;
        next.updated_at = self.clock.now();
        self.persist(&mut slot, next, action)?;
        Ok(self.view(&slot.session))
    }

    pub fn post_turn(&self, id: &str, input: TurnInput) -> Result<SessionView, SessionError> {
        self.mutate(id, "turn", |s| {
            let conflict = || SessionError::Conflict(format!("cannot post a turn while {:?} is pending", s.pending));
            match (s.mode, s.pending) {
                (SessionMode::AutoVsAuto, PendingAction::AgentStep) => {
                    let mut game = self.game(s)?;
                    game.step().map_err(|e| SessionError::Agent(e.to_string()))?;
                    sync(s, &game);
                    self.after_turn(s, PendingAction::AgentStep)
                }
                (SessionMode::HumanInterviewer, PendingAction::HumanQuestion) => {
                    let question = input.question.as_deref().map(str::trim).unwrap_or_default();
                    if question.is_empty() {
                        return Err(SessionError::BadRequest("question is required".into()));
                    }
                    let mut game = self.game(s)?;
                    let agent_err = |e: GameError| SessionError::Agent(e.to_string());
                    let prepared = game.prepare(question).map_err(agent_err)?;
                    let answer = game.source_answer(&prepared).map_err(agent_err)?;
                    game.commit(prepared, answer);
                    sync(s, &game);
                    self.after_turn(s, PendingAction::HumanQuestion)
                }
                (SessionMode::HumanSource, PendingAction::HumanAnswer) => {
                    let answer = input.answer.as_deref().map(str::trim).unwrap_or_default();
                    if answer.is_empty() {
                        return Err(SessionError::BadRequest("answer is required".into()));
                    }
                    let mut prepared = s.prepared.take().ok_or_else(conflict)?;
                    if let Some(ids) = &input.disclosed_ids {
                        let known = s.scenario.item_ids();
                        if let Some(bad) = ids.iter().find(|i| !known.contains(i)) {
                            return Err(SessionError::BadRequest(format!("unknown item id {bad}")));
                        }
                        prepared.disclose_ids = ids.clone();
                    }
                    let mut game = self.game(s)?;
                    game.commit(prepared, answer.to_string());
                    sync(s, &game);
                    s.pending = PendingAction::HumanRating;
                    Ok(())
                }
                _ => Err(conflict()),
            }
        })
    }

    pub fn post_rating(&self, id: &str, level: i64) -> Result<SessionView, SessionError> {
        let human_level =
            PersuasionLevel::new(level).map_err(|_| SessionError::BadRequest(format!("level {level} is not in 1..=5")))?;
        let mut rating = None;
        let view = self.mutate(id, "rating", |s| {
            if s.pending != PendingAction::HumanRating {
                return Err(SessionError::Conflict(format!(
                    "cannot rate while {:?} is pending",
                    s.pending
                )));
            }
            let turn = s.state.turns.last().ok_or_else(|| SessionError::Conflict("no turn to rate".into()))?;
            let r = HumanRating {
                session_id: s.id,
                turn_index: turn.index,
                human_level,
                judged_level: turn.judged_level,
            };
            s.ratings.push(r);
            rating = Some(r);
            if s.state.turns.len() >= s.scenario.max_turns as usize {
                self.after_turn(s, PendingAction::Finished)
            } else {
                self.prepare_for_human_source(s)
            }
        })?;
        if let Some(r) = rating {
            let _guard = self.logs.lock().expect("log lock poisoned");
            append_line(&self.ratings_path(), &r)?;
        }
        Ok(view)
    }

    pub fn close(&self, id: &str) -> Result<SessionView, SessionError> {
        self.mutate(id, "close", |s| {
            s.closed = true;
            s.pending = PendingAction::Finished;
            s.prepared = None;
            self.record_run(s)
        })
    }

    pub fn runs(&self) -> Result<Vec<RunRecord>, SessionError> {
        let path = self.runs_path();
        if !path.exists() {
            return Ok(Vec::new());
        }
        read_jsonl(&path).map_err(|e| SessionError::Storage(e.to_string()))
    }

    pub fn ratings(&self) -> Result<Vec<HumanRating>, SessionError> {
        let path = self.ratings_path();
        if !path.exists() {
            return Ok(Vec::new());
        }
        read_jsonl(&path).map_err(|e| SessionError::Storage(e.to_string()))
    }

    /// Human vs judged level over all persisted ratings, optionally for one
    /// session.
    pub fn rating_correlation(&self, session: Option<&str>) -> Result<Correlation, SessionError> {
        let ratings: Vec<HumanRating> = self
            .ratings()?
            .into_iter()
            .filter(|r| session.is_none_or(|s| r.session_id.to_string() == s))
            .collect();
        let (x, y): (Vec<f64>, Vec<f64>) = ratings
            .iter()
            .map(|r| (r.human_level.get() as f64, r.judged_level.get() as f64))
            .unzip();
        pearson(&x, &y).map_err(|e| SessionError::BadRequest(e.to_string()))
    }

    pub fn view(&self, s: &Session) -> SessionView {
        let terminal = s.is_terminal();
        let text = |id: &ItemId| {
            s.scenario
                .items
                .iter()
                .find(|i| i.id == *id)
                .map(|i| ItemView {
                    id: i.id,
                    text: i.text.clone(),
                })
        };
        let history = s
            .state
            .turns
            .iter()
            .map(|t| TurnView {
                index: t.index,
                question: t.question.clone(),
                answer: t.answer.clone(),
                disclosed: t.disclosed_ids.iter().filter_map(text).collect(),
                judged_level: terminal.then_some(t.judged_level.get()),
                human_level: s
                    .ratings
                    .iter()
                    .find(|r| r.turn_index == t.index)
                    .map(|r| r.human_level.get()),
            })
            .collect();
        let source_brief = (s.mode == SessionMode::HumanSource).then(|| {
            let persona = self.catalog.persona(s.scenario.persona);
            SourceBrief {
                persona: s.scenario.persona,
                persona_name: s.scenario.persona.display_name().to_string(),
                persona_description: persona.description.clone(),
                items: s.scenario.items.iter().map(|i| ItemView { id: i.id, text: i.text.clone() }).collect(),
                used_ids: s.state.used.iter().copied().collect(),
                suggested_ids: s.prepared.as_ref().map(|p| p.disclose_ids.clone()).unwrap_or_default(),
            }
        });
        let outcome = terminal.then(|| Outcome {
            reward: s.state.reward,
            item_count: s.scenario.items.len(),
            reward_percent: crate::domain::reward_percent(s.state.reward, s.scenario.items.len()),
            extracted: s.state.used.iter().filter_map(text).collect(),
            missed_ids: s
                .scenario
                .items
                .iter()
                .map(|i| i.id)
                .filter(|id| !s.state.used.contains(id))
                .collect(),
        });
        let taken = s.state.turns.len() as u32;
        SessionView {
            id: s.id,
            mode: s.mode,
            ablation: s.ablation,
            scenario_id: s.scenario.id.clone(),
            pending: s.pending,
            closed: s.closed,
            max_turns: s.scenario.max_turns,
            turns_taken: taken,
            remaining_turns: s.scenario.max_turns.saturating_sub(taken),
            outline: s.scenario.outline.clone(),
            history,
            current_question: s.prepared.as_ref().map(|p| p.question.clone()),
            source_brief,
            outcome,
            created_at: s.created_at.clone(),
            updated_at: s.updated_at.clone(),
        }
    }
}

fn sync(s: &mut Session, game: &Game) {
    s.state = game.state().clone();
    s.calls = game.calls().clone();
    s.tokens = *game.tokens();
}

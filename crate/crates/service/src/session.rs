//! Session state and the views served to clients.

use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

use hems_agent::{
    assemble_parameters, AgentType, DriverEvent, DriverStep, Outcome, ParamValue, ParameterId,
    RetrievalDriver,
};
use hems_core::{optimize, synth_scenario, Comparison, HemsError, HemsParameters};
use hems_gateway::TextGenerator;
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

use crate::config::ServiceConfig;
use crate::error::ErrorBody;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    /// The agent is generating.
    AwaitingQuestion,
    /// A question is pending.
    AwaitingAnswer,
    Optimizing,
    Done,
    Failed,
}

impl SessionState {
    pub fn is_terminal(self) -> bool {
        matches!(self, Self::Done | Self::Failed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingQuestion {
    pub parameter: ParameterId,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillStatus {
    Pending,
    Stored,
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterStatus {
    pub parameter: ParameterId,
    pub status: FillStatus,
    pub value: Option<ParamValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Agent,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Message {
    pub role: Role,
    pub parameter: ParameterId,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostSummary {
    pub optimized_cost: f64,
    pub naive_cost: f64,
    pub percent_reduction: f64,
}

/// What `GET /sessions/{id}` returns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionView {
    pub id: String,
    pub state: SessionState,
    pub agent_type: AgentType,
    pub question: Option<PendingQuestion>,
    pub parameters: Vec<ParameterStatus>,
    /// Append-only.
    pub transcript: Vec<Message>,
    pub schedule_ready: bool,
    pub summary: Option<CostSummary>,
    pub error: Option<ErrorBody>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSeries {
    pub import: Vec<f64>,
    pub export: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSeries {
    pub heating: Vec<f64>,
    pub ev: Vec<f64>,
    pub other: Vec<f64>,
    pub solar: Vec<f64>,
    /// Whether the user is home during the step.
    pub home: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatterySeries {
    /// Fleet energy at the start of each step, kWh.
    pub energy: Vec<f64>,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperatureSeries {
    /// House temperature at the start of each step.
    pub house: Vec<f64>,
    pub outside: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
}

/// The optimized schedule as four chart-ready groups, every series one
/// value per step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleView {
    pub timestamps: Vec<String>,
    pub dt_hours: f64,
    pub price: PriceSeries,
    pub power: PowerSeries,
    pub ev_battery: BatterySeries,
    pub temperature: TemperatureSeries,
    pub summary: CostSummary,
}

impl ScheduleView {
    pub fn from_comparison(c: &Comparison) -> Self {
        let h = &c.horizon;
        let s = &h.scenario;
        let o = &c.optimized;
        let n = o.steps();
        Self {
            timestamps: s
                .timestamps
                .iter()
                .map(|t| t.format("%Y-%m-%dT%H:%M:%S").to_string())
                .collect(),
            dt_hours: s.dt,
            price: PriceSeries {
                import: s.pi_e.clone(),
                export: s.pi_s.clone(),
            },
            power: PowerSeries {
                heating: o.p_heat.clone(),
                ev: o.p_ev.clone(),
                other: s.p_other.clone(),
                solar: s.p_solar.clone(),
                home: h.occupancy.clone(),
            },
            ev_battery: BatterySeries {
                energy: o.e_ev[..n].to_vec(),
                capacity: h.e_full(),
            },
            temperature: TemperatureSeries {
                house: o.t_house[..n].to_vec(),
                outside: s.t_ext.clone(),
                t_min: h.params.t_min,
                t_max: h.params.t_max,
            },
            summary: summary(c),
        }
    }
}

fn summary(c: &Comparison) -> CostSummary {
    CostSummary {
        optimized_cost: c.optimized.total_cost,
        naive_cost: c.naive.total_cost,
        percent_reduction: c.percent_reduction(),
    }
}

/// Session-level notices, next to the agent's own events on the feed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionNotice {
    StateChanged { state: SessionState },
    ScheduleReady { summary: CostSummary },
    SessionFailed { code: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SessionEvent {
    Agent(DriverEvent),
    Session(SessionNotice),
}

impl SessionEvent {
    pub fn name(&self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.get("event").and_then(|e| e.as_str()).map(str::to_owned))
            .unwrap_or_else(|| "message".into())
    }

    /// Nothing follows this event on the feed.
    pub fn is_terminal(&self) -> bool {
        matches!(
            self,
            Self::Session(
                SessionNotice::ScheduleReady { .. } | SessionNotice::SessionFailed { .. }
            )
        )
    }
}

struct Feed {
    history: Vec<SessionEvent>,
    tx: broadcast::Sender<SessionEvent>,
}

/// One conversation. The driver sits behind an async mutex so a second
/// request can detect that the session is busy; everything readers need is
/// kept in separate locks that are never held across generation.
pub struct Session {
    pub id: String,
    pub(crate) driver: Arc<tokio::sync::Mutex<RetrievalDriver>>,
    view: RwLock<SessionView>,
    schedule: RwLock<Option<ScheduleView>>,
    feed: Mutex<Feed>,
    last_active: Mutex<Instant>,
    scenario_seed: u64,
}

/// Shared, read-only inputs of the blocking agent work.
pub struct Engine {
    pub generator: Arc<dyn TextGenerator>,
    pub config: ServiceConfig,
}

impl Session {
    pub fn new(
        id: String,
        driver: RetrievalDriver,
        agent_type: AgentType,
        scenario_seed: u64,
    ) -> Self {
        let (tx, _) = broadcast::channel(256);
        Self {
            view: RwLock::new(SessionView {
                id: id.clone(),
                state: SessionState::AwaitingQuestion,
                agent_type,
                question: None,
                parameters: ParameterId::ALL
                    .iter()
                    .map(|&parameter| ParameterStatus {
                        parameter,
                        status: FillStatus::Pending,
                        value: None,
                    })
                    .collect(),
                transcript: Vec::new(),
                schedule_ready: false,
                summary: None,
                error: None,
            }),
            id,
            driver: Arc::new(tokio::sync::Mutex::new(driver)),
            schedule: RwLock::new(None),
            feed: Mutex::new(Feed {
                history: Vec::new(),
                tx,
            }),
            last_active: Mutex::new(Instant::now()),
            scenario_seed,
        }
    }

    pub fn view(&self) -> SessionView {
        self.view.read().expect("view lock").clone()
    }

    pub fn state(&self) -> SessionState {
        self.view.read().expect("view lock").state
    }

    pub fn schedule(&self) -> Option<ScheduleView> {
        self.schedule.read().expect("schedule lock").clone()
    }

    pub fn touch(&self) {
        *self.last_active.lock().expect("clock lock") = Instant::now();
    }

    pub fn idle_since(&self) -> Instant {
        *self.last_active.lock().expect("clock lock")
    }

    /// Past events and a receiver for the ones to come, with no gap between.
    pub fn subscribe(&self) -> (Vec<SessionEvent>, broadcast::Receiver<SessionEvent>) {
        let feed = self.feed.lock().expect("feed lock");
        (feed.history.clone(), feed.tx.subscribe())
    }

    fn publish(&self, event: SessionEvent) {
        let mut feed = self.feed.lock().expect("feed lock");
        feed.history.push(event.clone());
        // no subscribers is fine
        let _ = feed.tx.send(event);
    }

    fn set_state(&self, state: SessionState) {
        {
            let mut v = self.view.write().expect("view lock");
            if v.state == state {
                return;
            }
            v.state = state;
            if state != SessionState::AwaitingAnswer {
                v.question = None;
            }
        }
        self.publish(SessionEvent::Session(SessionNotice::StateChanged { state }));
    }

    fn fail(&self, error: ErrorBody) {
        self.view.write().expect("view lock").error = Some(error.clone());
        self.set_state(SessionState::Failed);
        self.publish(SessionEvent::Session(SessionNotice::SessionFailed {
            code: error.code,
            message: error.message,
        }));
    }

    fn absorb(&self, events: Vec<DriverEvent>) {
        for e in events {
            {
                let mut v = self.view.write().expect("view lock");
                match &e {
                    DriverEvent::QuestionAsked {
                        parameter,
                        question,
                    } => v.transcript.push(Message {
                        role: Role::Agent,
                        parameter: *parameter,
                        text: question.clone(),
                    }),
                    DriverEvent::AnswerReceived { parameter, answer } => {
                        v.transcript.push(Message {
                            role: Role::User,
                            parameter: *parameter,
                            text: answer.clone(),
                        })
                    }
                    DriverEvent::ParameterStored { parameter, value } => {
                        if let Some(p) = v.parameters.iter_mut().find(|p| p.parameter == *parameter)
                        {
                            p.status = FillStatus::Stored;
                            p.value = Some(value.clone());
                        }
                    }
                    DriverEvent::TaskAbandoned { parameter } => {
                        if let Some(p) = v.parameters.iter_mut().find(|p| p.parameter == *parameter)
                        {
                            p.status = FillStatus::Abandoned;
                        }
                    }
                    DriverEvent::TaskFailed { .. } => {}
                }
            }
            self.publish(SessionEvent::Agent(e));
        }
    }

    /// Runs the agent until it asks something or the session ends. Blocks
    /// on generation; call from a blocking context.
    pub(crate) fn run(&self, driver: &mut RetrievalDriver, engine: &Engine) {
        self.set_state(SessionState::AwaitingQuestion);
        let step = driver.advance(engine.generator.as_ref());
        self.absorb(driver.take_events());
        match step {
            Ok(DriverStep::Question { parameter, text }) => {
                self.view.write().expect("view lock").question =
                    Some(PendingQuestion { parameter, text });
                self.set_state(SessionState::AwaitingAnswer);
            }
            Ok(DriverStep::Finished) => self.finish(driver, engine),
            Err(e) => self.fail(ErrorBody::new("agent_error", e.to_string())),
        }
        self.touch();
    }

    /// Hands the answer to the suspended agent and resumes it.
    pub(crate) fn answer(&self, driver: &mut RetrievalDriver, engine: &Engine, answer: &str) {
        if let Err(e) = driver.answer(answer) {
            self.fail(ErrorBody::new("agent_error", e.to_string()));
            return;
        }
        self.absorb(driver.take_events());
        self.run(driver, engine);
    }

    fn finish(&self, driver: &RetrievalDriver, engine: &Engine) {
        if !driver.unrecovered().is_empty() {
            let provider = driver
                .traces()
                .iter()
                .any(|t| t.outcome == Outcome::ProviderError);
            let names: Vec<_> = driver.unrecovered().iter().map(|p| p.as_str()).collect();
            let code = if provider {
                "provider_unavailable"
            } else {
                "retrieval_failed"
            };
            self.fail(ErrorBody::new(
                code,
                format!("could not retrieve: {}", names.join(", ")),
            ));
            return;
        }
        let params = match assemble_parameters(driver.stored()) {
            Ok(p) => p,
            Err(e) => return self.fail(ErrorBody::new("invalid_parameters", e.to_string())),
        };
        self.set_state(SessionState::Optimizing);
        match solve(&params, engine, self.scenario_seed) {
            Ok(c) => {
                let view = ScheduleView::from_comparison(&c);
                let s = view.summary;
                *self.schedule.write().expect("schedule lock") = Some(view);
                {
                    let mut v = self.view.write().expect("view lock");
                    v.schedule_ready = true;
                    v.summary = Some(s);
                }
                self.set_state(SessionState::Done);
                self.publish(SessionEvent::Session(SessionNotice::ScheduleReady {
                    summary: s,
                }));
            }
            Err(e) => {
                let code = match e {
                    HemsError::Infeasible { .. } => "infeasible",
                    HemsError::InvalidParameters(_) => "invalid_parameters",
                    _ => "optimization_failed",
                };
                self.fail(ErrorBody::new(code, e.to_string()));
            }
        }
    }
}

fn solve(params: &HemsParameters, engine: &Engine, seed: u64) -> Result<Comparison, HemsError> {
    let cfg = &engine.config;
    let scenario = synth_scenario(
        &params.city,
        params.date_start,
        params.date_end,
        cfg.dt_hours,
        &cfg.tariff,
        seed,
    )?;
    optimize(params, &cfg.model, &scenario, cfg.tolerance)
}

//! The participation meta-game.
//!
//! In Stage 1 each agent either hands its channel to the algorithmic model
//! (submitting parameters and card texts) or keeps it and messages the
//! arbitrator directly. The model runs only if both participate; when one
//! agent withdraws the other observes this and also falls back to a direct
//! message. In Stage 2 the arbitrator maps the two messages to payoffs and
//! never sees anything but the messages.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{
    run_with_rng, Agent, CardSet, Coin, EngineConfig, Message, Outcome, OutcomeDistribution,
    StrategyParams,
};
use crate::equilibrium::{find_pure_grid_equilibria, StrategyGrid, EQUILIBRIUM_TOL};
use crate::error::{Error, Result};
use crate::games::{PayoffMatrix, PayoffPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetaChoice {
    /// `S(j,0)`
    Participate,
    /// `S(j,1)`
    Withdraw,
}

impl MetaChoice {
    /// Row/column index in the meta-game matrix.
    pub fn index(self) -> usize {
        match self {
            MetaChoice::Participate => 0,
            MetaChoice::Withdraw => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            MetaChoice::Participate
        } else {
            MetaChoice::Withdraw
        }
    }
}

/// An agent's Stage 1 plan.
///
/// `fallback` / `message` override the direct message sent when the model
/// is not triggered; absent an override the agent sends its Defect side.
#[derive(Debug, Clone, PartialEq)]
pub enum MetaStrategy {
    Participate {
        params: StrategyParams,
        cards: CardSet,
        fallback: Option<String>,
    },
    Withdraw {
        cards: CardSet,
        message: Option<String>,
    },
}

impl MetaStrategy {
    pub fn participate(params: StrategyParams, cards: CardSet) -> Self {
        MetaStrategy::Participate {
            params,
            cards,
            fallback: None,
        }
    }

    pub fn withdraw(cards: CardSet) -> Self {
        MetaStrategy::Withdraw {
            cards,
            message: None,
        }
    }

    pub fn choice(&self) -> MetaChoice {
        match self {
            MetaStrategy::Participate { .. } => MetaChoice::Participate,
            MetaStrategy::Withdraw { .. } => MetaChoice::Withdraw,
        }
    }

    pub fn cards(&self) -> &CardSet {
        match self {
            MetaStrategy::Participate { cards, .. } | MetaStrategy::Withdraw { cards, .. } => cards,
        }
    }

    fn direct_message(&self) -> String {
        let over = match self {
            MetaStrategy::Participate { fallback, .. } => fallback,
            MetaStrategy::Withdraw { message, .. } => message,
        };
        over.clone()
            .unwrap_or_else(|| self.cards().side(Coin::D).to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    /// The agent saw the other agent withdraw and took its channel back.
    ObservedWithdrawal {
        agent: Agent,
    },
    DirectMessage {
        agent: Agent,
        text: String,
    },
    EngineRun {
        distribution: OutcomeDistribution,
        outcome: Outcome,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage1Trace {
    pub meta: [MetaChoice; 2],
    pub triggered: bool,
    pub events: Vec<TraceEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage1Result {
    pub messages: (Message, Message),
    pub trace: Stage1Trace,
}

/// Stage 1 on stream 0 of `cfg`'s seed.
pub fn play_stage1(a1: &MetaStrategy, a2: &MetaStrategy, cfg: &EngineConfig) -> Stage1Result {
    play_stage1_with_rng(a1, a2, cfg, &mut cfg.rng(0))
}

pub fn play_stage1_with_rng<R: Rng + ?Sized>(
    a1: &MetaStrategy,
    a2: &MetaStrategy,
    cfg: &EngineConfig,
    rng: &mut R,
) -> Stage1Result {
    let meta = [a1.choice(), a2.choice()];
    if let (
        MetaStrategy::Participate {
            params: p1,
            cards: c1,
            ..
        },
        MetaStrategy::Participate {
            params: p2,
            cards: c2,
            ..
        },
    ) = (a1, a2)
    {
        let run = run_with_rng(p1, p2, c1, c2, cfg, rng);
        return Stage1Result {
            messages: run.messages,
            trace: Stage1Trace {
                meta,
                triggered: true,
                events: vec![TraceEvent::EngineRun {
                    distribution: run.distribution,
                    outcome: run.outcome,
                }],
            },
        };
    }

    let mut events = Vec::new();
    for (agent, plan) in [(Agent::One, a1), (Agent::Two, a2)] {
        if plan.choice() == MetaChoice::Participate {
            events.push(TraceEvent::ObservedWithdrawal { agent });
        }
    }
    let m1 = Message {
        agent: Agent::One,
        text: a1.direct_message(),
    };
    let m2 = Message {
        agent: Agent::Two,
        text: a2.direct_message(),
    };
    for m in [&m1, &m2] {
        events.push(TraceEvent::DirectMessage {
            agent: m.agent,
            text: m.text.clone(),
        });
    }
    Stage1Result {
        messages: (m1, m2),
        trace: Stage1Trace {
            meta,
            triggered: false,
            events,
        },
    }
}

fn read_card(m: &Message, cards: &CardSet) -> Result<Coin> {
    cards
        .coin_of(&m.text)
        .ok_or_else(|| Error::UnrecognizedMessage {
            agent: m.agent.number(),
            text: m.text.clone(),
        })
}

/// Stage 2: the outcome the two messages encode.
pub fn read_messages(
    m1: &Message,
    m2: &Message,
    cards1: &CardSet,
    cards2: &CardSet,
) -> Result<Outcome> {
    Ok(Outcome::new(read_card(m1, cards1)?, read_card(m2, cards2)?))
}

/// Stage 2: payoffs assigned from the two messages alone.
pub fn arbitrate(
    m1: &Message,
    m2: &Message,
    cards1: &CardSet,
    cards2: &CardSet,
    m: &PayoffMatrix,
) -> Result<PayoffPair> {
    Ok(m.payoff(read_messages(m1, m2, cards1, cards2)?))
}

/// One line of the JSON-lines session log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionRecord {
    pub session: u64,
    pub meta: [MetaChoice; 2],
    pub triggered: bool,
    /// The outcome encoded by the delivered messages.
    pub outcome: Outcome,
    pub messages: [String; 2],
    pub payoffs: [f64; 2],
}

/// Both stages of session `session`, drawing from stream `session`.
pub fn play_session(
    a1: &MetaStrategy,
    a2: &MetaStrategy,
    m: &PayoffMatrix,
    cfg: &EngineConfig,
    session: u64,
) -> Result<SessionRecord> {
    let stage1 = play_stage1_with_rng(a1, a2, cfg, &mut cfg.rng(session));
    let (m1, m2) = &stage1.messages;
    let outcome = read_messages(m1, m2, a1.cards(), a2.cards())?;
    let (u1, u2) = m.payoff(outcome);
    Ok(SessionRecord {
        session,
        meta: stage1.trace.meta,
        triggered: stage1.trace.triggered,
        outcome,
        messages: [m1.text.clone(), m2.text.clone()],
        payoffs: [u1, u2],
    })
}

/// `n` independent sessions, in session order.
pub fn run_sessions(
    a1: &MetaStrategy,
    a2: &MetaStrategy,
    n: u64,
    m: &PayoffMatrix,
    cfg: &EngineConfig,
) -> Result<Vec<SessionRecord>> {
    if n == 0 {
        return Err(Error::EmptyInput("at least one session is required"));
    }
    (0..n)
        .into_par_iter()
        .map(|k| play_session(a1, a2, m, cfg, k))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffCount {
    pub payoffs: [f64; 2],
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyReport {
    pub sessions: u64,
    pub triggered: u64,
    pub outcome_counts: BTreeMap<String, u64>,
    pub outcome_frequencies: BTreeMap<String, f64>,
    pub payoff_counts: Vec<PayoffCount>,
    pub mean_payoffs: [f64; 2],
}

impl FrequencyReport {
    pub fn count(&self, outcome: Outcome) -> u64 {
        self.outcome_counts[&outcome.to_string()]
    }

    pub fn frequency(&self, outcome: Outcome) -> f64 {
        self.outcome_frequencies[&outcome.to_string()]
    }
}

pub fn summarize(records: &[SessionRecord]) -> FrequencyReport {
    let n = records.len() as u64;
    let mut counts = [0u64; 4];
    let mut payoff_counts: Vec<PayoffCount> = Vec::new();
    let (mut s1, mut s2) = (0.0, 0.0);
    for r in records {
        counts[r.outcome.index()] += 1;
        s1 += r.payoffs[0];
        s2 += r.payoffs[1];
        match payoff_counts.iter_mut().find(|c| c.payoffs == r.payoffs) {
            Some(c) => c.count += 1,
            None => payoff_counts.push(PayoffCount {
                payoffs: r.payoffs,
                count: 1,
            }),
        }
    }
    payoff_counts.sort_by(|a, b| a.payoffs.partial_cmp(&b.payoffs).expect("finite payoffs"));
    let denom = n.max(1) as f64;
    FrequencyReport {
        sessions: n,
        triggered: records.iter().filter(|r| r.triggered).count() as u64,
        outcome_counts: Outcome::ALL
            .iter()
            .map(|o| (o.to_string(), counts[o.index()]))
            .collect(),
        outcome_frequencies: Outcome::ALL
            .iter()
            .map(|o| (o.to_string(), counts[o.index()] as f64 / denom))
            .collect(),
        payoff_counts,
        mean_payoffs: [s1 / denom, s2 / denom],
    }
}

/// Runs `n` sessions and summarizes them.
pub fn monte_carlo_sessions(
    a1: &MetaStrategy,
    a2: &MetaStrategy,
    n: u64,
    m: &PayoffMatrix,
    cfg: &EngineConfig,
) -> Result<FrequencyReport> {
    Ok(summarize(&run_sessions(a1, a2, n, m, cfg)?))
}

/// The agents' payoff matrix over (Participate, Withdraw).
///
/// Mutual participation pays the inner game's grid equilibrium (a
/// Pareto-flagged one when several exist); every other cell pays `(P, P)`.
pub fn build_meta_matrix(
    m: &PayoffMatrix,
    cfg: &EngineConfig,
    grid: &StrategyGrid,
) -> Result<PayoffMatrix> {
    let pd = m
        .pd_params()
        .filter(|p| p.satisfies_pd())
        .ok_or_else(|| Error::InvalidPayoffs("meta-game requires a Prisoner's Dilemma".into()))?;
    let equilibria = find_pure_grid_equilibria(m, cfg, grid, EQUILIBRIUM_TOL);
    let inner = equilibria
        .iter()
        .find(|e| e.is_pareto_efficient_among_grid)
        .or_else(|| equilibria.first())
        .ok_or_else(|| Error::Protocol("inner game has no grid equilibrium".into()))?;
    let fallback = (pd.p, pd.p);
    Ok(PayoffMatrix::from_cells([
        [inner.payoffs, fallback],
        [fallback, fallback],
    ]))
}

/// Observable features of a one-shot PD situation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GameSetting {
    has_arbitrator: bool,
    strategies_are_messages: bool,
    agents_can_communicate: bool,
    model_constructible_with_observation: bool,
}

impl GameSetting {
    /// The last flag requires both communication and message strategies.
    pub fn new(
        has_arbitrator: bool,
        strategies_are_messages: bool,
        agents_can_communicate: bool,
        model_constructible_with_observation: bool,
    ) -> Result<Self> {
        if model_constructible_with_observation && !agents_can_communicate {
            return Err(Error::InconsistentSetting(
                "constructing the model with observation requires that agents can communicate"
                    .into(),
            ));
        }
        if model_constructible_with_observation && !strategies_are_messages {
            return Err(Error::InconsistentSetting(
                "constructing the model with observation requires message strategies".into(),
            ));
        }
        Ok(GameSetting {
            has_arbitrator,
            strategies_are_messages,
            agents_can_communicate,
            model_constructible_with_observation,
        })
    }

    pub fn has_arbitrator(&self) -> bool {
        self.has_arbitrator
    }

    pub fn strategies_are_messages(&self) -> bool {
        self.strategies_are_messages
    }

    pub fn agents_can_communicate(&self) -> bool {
        self.agents_can_communicate
    }

    pub fn model_constructible_with_observation(&self) -> bool {
        self.model_constructible_with_observation
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PdType {
    Type1,
    Type2,
    Type3,
    Type4,
    Type5,
}

impl PdType {
    /// Whether the algorithmic model can help agents reach `(R, R)`.
    pub fn model_applicable(self) -> bool {
        self == PdType::Type4
    }
}

impl fmt::Display for PdType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = *self as u8 + 1;
        write!(f, "type-{n}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub pd_type: PdType,
    pub conditions: Vec<&'static str>,
}

pub fn classify(setting: &GameSetting) -> PdType {
    classify_explained(setting).pd_type
}

/// Conditions are checked in order: arbitrator, strategy kind,
/// communication, model construction with observation.
pub fn classify_explained(setting: &GameSetting) -> Classification {
    let mut conditions = Vec::new();
    if !setting.has_arbitrator {
        conditions.push("no arbitrator");
        return Classification {
            pd_type: PdType::Type1,
            conditions,
        };
    }
    conditions.push("arbitrator assigns payoffs");
    if !setting.strategies_are_messages {
        conditions.push("strategies are actions");
        return Classification {
            pd_type: PdType::Type2,
            conditions,
        };
    }
    conditions.push("strategies are messages sent through channels");
    if !setting.agents_can_communicate {
        conditions.push("agents cannot communicate");
        return Classification {
            pd_type: PdType::Type3,
            conditions,
        };
    }
    conditions.push("agents can communicate");
    if setting.model_constructible_with_observation {
        conditions.push("agents can construct the algorithmic model and observe participation");
        Classification {
            pd_type: PdType::Type4,
            conditions,
        }
    } else {
        conditions.push("algorithmic model with observation not constructible");
        Classification {
            pd_type: PdType::Type5,
            conditions,
        }
    }
}

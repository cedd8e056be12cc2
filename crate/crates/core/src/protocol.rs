//! Decentralized runtime: each agent runs its local filter and exchanges
//! beliefs only with the partner of a relative-measurement event.
//!
//! A timestep is one barrier-synchronized round:
//!
//! 1. every agent predicts, applies its absolute corrections and emits one
//!    [`Payload::MeasRequest`] per relative measurement it took;
//! 2. targets serve the requests in observer-id order, replying with the
//!    belief they held before the exchange and updating their own belief;
//! 3. observers fold the replies in target-id order with
//!    [`sequential_update_for`].
//!
//! Every request and reply carries the sender's pre-exchange belief, so two
//! agents that measure each other in the same step produce two independent
//! events.

use std::collections::VecDeque;
use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fusion::{sequential_update_for, FusionConfig, Side};
use crate::linalg;
use crate::local_filter::{abs_correct_belief, predict_belief, Landmark, ProcessNoise};
use crate::motion::{NoiseModel, UnicycleInput};
use crate::types::{AgentId, Belief, CovarianceMatrix, FusionMethod, MeasurementKind, RelativeMeasurement};

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// The observer's measurement tuple `(z, R, bel⁻)`.
    MeasRequest {
        z: linalg::Vec,
        r: CovarianceMatrix,
        kind: MeasurementKind,
        belief: Belief,
    },
    /// The target's pre-exchange belief.
    BeliefReply { belief: Belief },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub from: AgentId,
    pub to: AgentId,
    pub stamp: usize,
    pub payload: Payload,
}

impl Message {
    pub fn variant(&self) -> &'static str {
        match self.payload {
            Payload::MeasRequest { .. } => "meas-request",
            Payload::BeliefReply { .. } => "belief-reply",
        }
    }

    /// Wire size with 8-byte ids/stamps and 8-byte floats, covariances sent
    /// as upper triangles.
    pub fn bytes(&self) -> usize {
        let tri = |n: usize| n * (n + 1) / 2;
        let belief = |b: &Belief| 16 + 8 * (b.dim() + tri(b.dim()));
        let body = match &self.payload {
            Payload::MeasRequest { z, belief: b, .. } => 8 + 8 * (z.len() + tri(z.len())) + belief(b),
            Payload::BeliefReply { belief: b } => belief(b),
        };
        24 + body
    }

    pub fn trace_record(&self) -> TraceRecord {
        TraceRecord {
            t: self.stamp,
            from: self.from,
            to: self.to,
            variant: self.variant(),
            bytes: self.bytes(),
        }
    }
}

/// One line of the message trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub t: usize,
    pub from: AgentId,
    pub to: AgentId,
    pub variant: &'static str,
    pub bytes: usize,
}

/// Writes the trace as newline-delimited JSON.
pub fn write_trace<W: Write>(records: &[TraceRecord], mut out: W) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Landmark range taken by one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsoluteEvent {
    pub landmark: Landmark,
    pub z: f64,
    pub r_std: f64,
}

/// Everything an agent senses at one timestep. `relative` holds the
/// measurements this agent took as observer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepEvents {
    pub absolute: Vec<AbsoluteEvent>,
    pub relative: Vec<RelativeMeasurement>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub noise: NoiseModel,
    pub process: ProcessNoise,
    /// `None` disables relative updates; requests are still served.
    pub method: Option<FusionMethod>,
    pub fusion: FusionConfig,
    /// Whether a target also updates its own belief from a request.
    pub serve_updates: bool,
}

impl AgentConfig {
    pub fn new(noise: NoiseModel, method: Option<FusionMethod>, fusion: FusionConfig) -> Self {
        Self {
            noise,
            process: ProcessNoise::default(),
            method,
            fusion,
            serve_updates: true,
        }
    }
}

/// Outcome of one relative update applied by an agent.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateRecord {
    pub agent: AgentId,
    pub t: usize,
    pub side: Side,
    /// The other agents involved, in fold order.
    pub partners: Vec<AgentId>,
    pub det_cov: f64,
    pub trace_cov: f64,
    pub solver_iters: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct AgentRuntime {
    pub id: AgentId,
    pub belief: Belief,
    pub config: AgentConfig,
    pub inbox: VecDeque<Message>,
    pub outbox: Vec<Message>,
    pending: Vec<RelativeMeasurement>,
    snapshot: Option<Belief>,
}

impl AgentRuntime {
    pub fn new(belief: Belief, config: AgentConfig) -> Self {
        Self {
            id: belief.agent_id,
            belief,
            config,
            inbox: VecDeque::new(),
            outbox: Vec::new(),
            pending: Vec::new(),
            snapshot: None,
        }
    }

    /// The belief sent to partners during the current exchange.
    fn exchange_belief(&self) -> &Belief {
        self.snapshot.as_ref().unwrap_or(&self.belief)
    }
}

/// Local phase of a step: predict, absolute corrections, then one request
/// per own relative measurement, in target-id order.
pub fn step_agent(rt: &mut AgentRuntime, u: &UnicycleInput, events: &StepEvents) -> Result<Vec<Message>> {
    let mut bel = predict_belief(&rt.belief, u, &rt.config.noise, &rt.config.process);
    for ev in &events.absolute {
        bel = abs_correct_belief(&bel, ev.z, &ev.landmark, ev.r_std)?;
    }
    rt.belief = bel;
    rt.snapshot = Some(rt.belief.clone());
    rt.pending.clear();
    if rt.config.method.is_none() {
        return Ok(Vec::new());
    }
    let mut own: Vec<_> = events.relative.iter().filter(|m| m.observer == rt.id).cloned().collect();
    own.sort_by_key(|m| m.target);
    let t = rt.belief.stamp;
    let msgs: Vec<Message> = own
        .iter()
        .map(|m| Message {
            from: rt.id,
            to: m.target,
            stamp: t,
            payload: Payload::MeasRequest {
                z: m.z.clone(),
                r: m.r.clone(),
                kind: m.kind,
                belief: rt.belief.clone(),
            },
        })
        .collect();
    rt.pending = own;
    rt.outbox.extend(msgs.iter().cloned());
    Ok(msgs)
}

/// Answers one request with the target's pre-exchange belief and, when
/// enabled, updates the target from the received tuple.
pub fn serve_measurement(rt: &mut AgentRuntime, req: &Message) -> Result<(Message, Option<UpdateRecord>)> {
    let Payload::MeasRequest { z, r, kind, belief } = &req.payload else {
        return Err(Error::UnknownModelKind(req.variant().to_string()));
    };
    let reply = Message {
        from: rt.id,
        to: req.from,
        stamp: req.stamp,
        payload: Payload::BeliefReply {
            belief: rt.exchange_belief().clone(),
        },
    };
    let mut record = None;
    if let (Some(method), true) = (rt.config.method, rt.config.serve_updates) {
        let meas = RelativeMeasurement::new(req.from, rt.id, *kind, z.clone(), r.clone(), req.stamp)?;
        let start = Instant::now();
        let out = sequential_update_for(Side::Target, &rt.belief, &[(belief.clone(), meas)], method, &rt.config.fusion)?;
        record = Some(UpdateRecord {
            agent: rt.id,
            t: req.stamp,
            side: Side::Target,
            partners: vec![req.from],
            det_cov: out.belief.cov.det(),
            trace_cov: out.belief.cov.trace(),
            solver_iters: out.solver_iters,
            elapsed: start.elapsed(),
        });
        rt.belief = out.belief;
    }
    rt.outbox.push(reply.clone());
    Ok((reply, record))
}

/// Folds the received replies into the observer's belief. Requests left
/// without a reply are dropped and returned as [`Error::MissingReply`].
fn absorb_replies(rt: &mut AgentRuntime) -> Result<(Option<UpdateRecord>, Vec<Error>)> {
    let mut replies: Vec<Message> = rt.inbox.drain(..).collect();
    replies.sort_by_key(|m| m.from);
    let pending = std::mem::take(&mut rt.pending);
    let mut partners = Vec::new();
    let mut missing = Vec::new();
    for meas in pending {
        let reply = replies.iter().find_map(|m| match &m.payload {
            Payload::BeliefReply { belief } if m.from == meas.target => Some(belief.clone()),
            _ => None,
        });
        match reply {
            Some(b) => partners.push((b, meas)),
            None => missing.push(Error::MissingReply {
                observer: rt.id,
                target: meas.target,
                t: meas.stamp,
            }),
        }
    }
    let Some(method) = rt.config.method.filter(|_| !partners.is_empty()) else {
        return Ok((None, missing));
    };
    let start = Instant::now();
    let out = sequential_update_for(Side::Observer, &rt.belief, &partners, method, &rt.config.fusion)?;
    let record = UpdateRecord {
        agent: rt.id,
        t: rt.belief.stamp,
        side: Side::Observer,
        partners: partners.iter().map(|(_, m)| m.target).collect(),
        det_cov: out.belief.cov.det(),
        trace_cov: out.belief.cov.trace(),
        solver_iters: out.solver_iters,
        elapsed: start.elapsed(),
    };
    rt.belief = out.belief;
    Ok((Some(record), missing))
}

/// Delivers `msgs` to the inboxes of their recipients within the current
/// step. Messages to unknown agents are discarded; the delivered ones are
/// returned.
pub fn route_messages(agents: &mut [AgentRuntime], msgs: Vec<Message>) -> Vec<Message> {
    let mut delivered = Vec::with_capacity(msgs.len());
    for m in msgs {
        if let Some(rt) = agents.iter_mut().find(|a| a.id == m.to) {
            rt.inbox.push_back(m.clone());
            delivered.push(m);
        }
    }
    delivered
}

/// What happened during one [`World::step`].
#[derive(Debug, Clone, Default)]
pub struct StepReport {
    pub messages: usize,
    pub updates: Vec<UpdateRecord>,
    /// Relative events for which both messages were delivered.
    pub processed_events: usize,
    pub dropped: Vec<Error>,
}

/// All agents plus the simulated channel.
#[derive(Debug, Clone)]
pub struct World {
    pub agents: Vec<AgentRuntime>,
    pub trace: Vec<TraceRecord>,
    pub messages_per_step: Vec<usize>,
    /// Dropped events, logged.
    pub dropped: Vec<Error>,
}

impl World {
    pub fn new(agents: Vec<AgentRuntime>) -> Self {
        Self {
            agents,
            trace: Vec::new(),
            messages_per_step: Vec::new(),
            dropped: Vec::new(),
        }
    }

    pub fn total_messages(&self) -> usize {
        self.messages_per_step.iter().sum()
    }

    pub fn beliefs(&self) -> Vec<Belief> {
        self.agents.iter().map(|a| a.belief.clone()).collect()
    }

    fn record(&mut self, msgs: &[Message]) {
        self.trace.extend(msgs.iter().map(Message::trace_record));
    }

    /// Runs one synchronized round. `inputs` and `events` are indexed like
    /// `agents`.
    pub fn step(&mut self, inputs: &[UnicycleInput], events: &[StepEvents]) -> Result<StepReport> {
        if inputs.len() != self.agents.len() || events.len() != self.agents.len() {
            return Err(Error::Dimension(format!(
                "{} agents but {} inputs and {} event lists",
                self.agents.len(),
                inputs.len(),
                events.len()
            )));
        }
        let mut report = StepReport::default();
        let mut requests = Vec::new();
        for ((rt, u), ev) in self.agents.iter_mut().zip(inputs).zip(events) {
            requests.extend(step_agent(rt, u, ev)?);
        }
        let delivered = route_messages(&mut self.agents, requests);
        self.record(&delivered);
        report.messages += delivered.len();

        let mut replies = Vec::new();
        for rt in self.agents.iter_mut() {
            let mut inbox: Vec<Message> = rt.inbox.drain(..).collect();
            inbox.sort_by_key(|m| m.from);
            for req in &inbox {
                let (reply, rec) = serve_measurement(rt, req)?;
                replies.push(reply);
                report.updates.extend(rec);
            }
        }
        let delivered = route_messages(&mut self.agents, replies);
        self.record(&delivered);
        report.messages += delivered.len();
        report.processed_events = delivered.len();

        for rt in self.agents.iter_mut() {
            let (rec, missing) = absorb_replies(rt)?;
            report.updates.extend(rec);
            report.dropped.extend(missing);
            rt.snapshot = None;
            rt.outbox.clear();
        }
        self.dropped.extend(report.dropped.iter().cloned());
        self.messages_per_step.push(report.messages);
        Ok(report)
    }
}

//! The instrumented adaptation pipeline: an environment emulator feeds
//! context instances to a sensor that derives change events; the
//! reconfiguration engine matches rules against those events and emits
//! reconfiguration requests, which a probe records step by step.
//!
//! Semantics, fixed for determinism:
//!
//! - The first instance of a flow bootstraps: it raises one event per
//!   property. Later instances raise events only for properties whose
//!   value changed.
//! - Events are processed in schema property order; within an event, rules
//!   are tried in textual order. A rule fires when the event's property is
//!   the rule's trigger property, the new value's level is accepted
//!   (case-insensitive), and the condition holds on internal state.
//! - Effects of a fired rule apply immediately, so later rules in the same
//!   step see the updated state.
//!
//! The observable a kill decision compares is the per-step request list —
//! the probe's record — not internal state.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AssignExpr, Condition, ContextFlow, ContextInstance, ContextSchema, Policy, SystemModel,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("unknown property {0}")]
    UnknownProperty(String),
    #[error("value {value} out of bounds [{lower},{upper}] for property {property}")]
    OutOfBounds { property: String, value: i64, lower: i64, upper: i64 },
    #[error("instance has {got} values, schema has {expected} properties")]
    ArityMismatch { expected: usize, got: usize },
    #[error("unknown state variable {0}")]
    UnknownStateRef(String),
}

/// A sensed change of one context property.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub property: String,
    pub value: i64,
    pub level: String,
}

/// Internal state of the reconfiguration engine between steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineState {
    pub internal: BTreeMap<String, i64>,
    pub last_instance: Option<ContextInstance>,
}

impl EngineState {
    /// Fresh state: every declared variable at its initial value, no
    /// instance seen yet.
    pub fn initial(sysmodel: &SystemModel) -> Self {
        EngineState {
            internal: sysmodel
                .state_vars
                .iter()
                .map(|v| (v.name.clone(), v.initial))
                .collect(),
            last_instance: None,
        }
    }
}

/// The observable output of a fired rule, recorded by the probe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconfigurationRequest {
    pub action_property: String,
    pub value: String,
    pub rule_index: usize,
}

/// One simulation step: the injected instance, the events it raised, the
/// requests emitted, and internal state after the step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub instance: ContextInstance,
    pub events: Vec<Event>,
    pub requests: Vec<ReconfigurationRequest>,
    pub post_state: BTreeMap<String, i64>,
}

/// The probe's record of a whole flow; one step per context instance.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Line-oriented export. Step and rule indices are 0-based.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, step) in self.steps.iter().enumerate() {
            let _ = writeln!(out, "step {i}: instance {}", step.instance);
            for e in &step.events {
                let _ = writeln!(out, "  event {} = {} ({})", e.property, e.value, e.level);
            }
            for r in &step.requests {
                let _ = writeln!(
                    out,
                    "  request {} '{}' (rule {})",
                    r.action_property, r.value, r.rule_index
                );
            }
            let state: Vec<String> = step
                .post_state
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            let _ = writeln!(out, "  state {}", state.join(" "));
        }
        out
    }
}

/// The unique level containing `value` in `property`'s domain.
pub fn level_of<'a>(
    schema: &'a ContextSchema,
    property: &str,
    value: i64,
) -> Result<&'a str, EngineError> {
    let prop = schema
        .property(property)
        .ok_or_else(|| EngineError::UnknownProperty(property.to_string()))?;
    prop.level_of(value).ok_or(EngineError::OutOfBounds {
        property: prop.name.clone(),
        value,
        lower: prop.lower,
        upper: prop.upper,
    })
}

/// Events raised by moving from `prev` to `curr`. With no previous
/// instance every property raises a bootstrap event; otherwise only
/// properties whose value changed do. Events come in schema property order.
pub fn events_between(
    schema: &ContextSchema,
    prev: Option<&ContextInstance>,
    curr: &ContextInstance,
) -> Result<Vec<Event>, EngineError> {
    if curr.values.len() != schema.arity() {
        return Err(EngineError::ArityMismatch {
            expected: schema.arity(),
            got: curr.values.len(),
        });
    }
    if let Some(prev) = prev {
        if prev.values.len() != schema.arity() {
            return Err(EngineError::ArityMismatch {
                expected: schema.arity(),
                got: prev.values.len(),
            });
        }
    }
    let mut events = Vec::new();
    for (i, prop) in schema.properties.iter().enumerate() {
        let value = curr.values[i];
        let changed = match prev {
            None => true,
            Some(prev) => prev.values[i] != value,
        };
        if changed {
            events.push(Event {
                property: prop.name.clone(),
                value,
                level: level_of(schema, &prop.name, value)?.to_string(),
            });
        }
    }
    Ok(events)
}

/// Evaluate a rule condition against internal state.
pub fn eval_condition(
    cond: &Condition,
    internal: &BTreeMap<String, i64>,
) -> Result<bool, EngineError> {
    let lhs = *internal
        .get(&cond.state_ref)
        .ok_or_else(|| EngineError::UnknownStateRef(cond.state_ref.clone()))?;
    Ok(cond.op.eval(lhs, cond.value))
}

fn eval_expr(expr: &AssignExpr, internal: &BTreeMap<String, i64>) -> Result<i64, EngineError> {
    let read = |var: &str| {
        internal
            .get(var)
            .copied()
            .ok_or_else(|| EngineError::UnknownStateRef(var.to_string()))
    };
    // saturating arithmetic: state stays total even on hostile deltas
    Ok(match expr {
        AssignExpr::Const { value } => *value,
        AssignExpr::Var { var } => read(var)?,
        AssignExpr::Add { var, delta } => read(var)?.saturating_add(*delta),
        AssignExpr::Sub { var, delta } => read(var)?.saturating_sub(*delta),
    })
}

fn apply_effects(
    sysmodel: &SystemModel,
    internal: &mut BTreeMap<String, i64>,
    action_property: &str,
    action_value: &str,
) -> Result<(), EngineError> {
    for effect in sysmodel.effects_for(action_property, action_value) {
        for assignment in &effect.assignments {
            let value = eval_expr(&assignment.expr, internal)?;
            if !internal.contains_key(&assignment.target) {
                return Err(EngineError::UnknownStateRef(assignment.target.clone()));
            }
            internal.insert(assignment.target.clone(), value);
        }
    }
    Ok(())
}

/// Inject one context instance: derive events, match rules, emit requests,
/// apply effects. Returns the updated state and the step record.
pub fn step(
    policy: &Policy,
    schema: &ContextSchema,
    sysmodel: &SystemModel,
    state: EngineState,
    instance: &ContextInstance,
) -> Result<(EngineState, TraceStep), EngineError> {
    let events = events_between(schema, state.last_instance.as_ref(), instance)?;
    let mut internal = state.internal;
    let mut requests = Vec::new();
    for event in &events {
        for (rule_index, rule) in policy.rules.iter().enumerate() {
            if rule.trigger.property != event.property {
                continue;
            }
            if !rule.trigger.accepts(&event.level) {
                continue;
            }
            if !eval_condition(&rule.condition, &internal)? {
                continue;
            }
            requests.push(ReconfigurationRequest {
                action_property: rule.action.property.clone(),
                value: rule.action.value.clone(),
                rule_index,
            });
            apply_effects(sysmodel, &mut internal, &rule.action.property, &rule.action.value)?;
        }
    }
    let record = TraceStep {
        instance: instance.clone(),
        events,
        requests,
        post_state: internal.clone(),
    };
    let state = EngineState { internal, last_instance: Some(instance.clone()) };
    Ok((state, record))
}

/// Run a whole flow from the system model's initial state. Deterministic:
/// a pure function of its four inputs.
pub fn run_flow(
    policy: &Policy,
    schema: &ContextSchema,
    sysmodel: &SystemModel,
    flow: &ContextFlow,
) -> Result<Trace, EngineError> {
    let mut state = EngineState::initial(sysmodel);
    let mut steps = Vec::with_capacity(flow.len());
    for instance in &flow.instances {
        let (next, record) = step(policy, schema, sysmodel, state, instance)?;
        state = next;
        steps.push(record);
    }
    Ok(Trace { steps })
}

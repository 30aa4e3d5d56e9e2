//! In-memory representation of action-based adaptation policies and their
//! environment: context schemas, context instances and flows, ECA rule sets,
//! and the system model that gives actions their effect on internal state.
//!
//! All types are immutable values after construction and are safe to share
//! between concurrent workers.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while constructing or checking model values.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("schema must declare at least one property")]
    EmptySchema,
    #[error("duplicate property name {0:?}")]
    DuplicateProperty(String),
    #[error("property with empty name")]
    EmptyPropertyName,
    #[error("property {name:?}: lower bound {lower} exceeds upper bound {upper}")]
    InvalidBounds { name: String, lower: i64, upper: i64 },
    #[error("property {name:?}: levels do not partition [{lower},{upper}]: {detail}")]
    BadLevelPartition {
        name: String,
        lower: i64,
        upper: i64,
        detail: String,
    },
    #[error("property {name:?}: duplicate level name {level:?}")]
    DuplicateLevel { name: String, level: String },
}

/// A named interval of a property's integer domain. Level names are the
/// qualitative values ('low', 'medium', 'high', ...) rules refer to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
}

/// One environmental property: an integer domain with inclusive bounds,
/// partitioned into qualitative levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertySchema {
    pub name: String,
    pub lower: i64,
    pub upper: i64,
    pub levels: Vec<Level>,
}

impl PropertySchema {
    /// Checks bounds and that the levels are non-overlapping, contiguous and
    /// exactly cover `[lower, upper]`. Level names must be unique, compared
    /// case-insensitively.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.name.is_empty() {
            return Err(ModelError::EmptyPropertyName);
        }
        if self.lower > self.upper {
            return Err(ModelError::InvalidBounds {
                name: self.name.clone(),
                lower: self.lower,
                upper: self.upper,
            });
        }
        let partition_err = |detail: String| ModelError::BadLevelPartition {
            name: self.name.clone(),
            lower: self.lower,
            upper: self.upper,
            detail,
        };
        if self.levels.is_empty() {
            return Err(partition_err("no levels declared".into()));
        }
        let mut seen = BTreeSet::new();
        for level in &self.levels {
            if !seen.insert(level.name.to_ascii_lowercase()) {
                return Err(ModelError::DuplicateLevel {
                    name: self.name.clone(),
                    level: level.name.clone(),
                });
            }
        }
        let mut expected = self.lower as i128;
        for level in &self.levels {
            let (lo, hi) = (level.lo as i128, level.hi as i128);
            if lo != expected {
                let detail = if lo < expected {
                    format!("overlapping levels at {}..{}", lo, expected - 1)
                } else {
                    format!("gap at {}..{}", expected, lo - 1)
                };
                return Err(partition_err(detail));
            }
            if hi < lo {
                return Err(partition_err(format!(
                    "level {:?} has empty interval [{},{}]",
                    level.name, level.lo, level.hi
                )));
            }
            if hi > self.upper as i128 {
                return Err(partition_err(format!(
                    "level {:?} extends past upper bound {}",
                    level.name, self.upper
                )));
            }
            expected = hi + 1;
        }
        if expected != self.upper as i128 + 1 {
            return Err(partition_err(format!(
                "gap at {}..{}",
                expected, self.upper
            )));
        }
        Ok(())
    }

    /// Name of the level whose interval contains `value`, if in bounds.
    pub fn level_of(&self, value: i64) -> Option<&str> {
        self.levels
            .iter()
            .find(|l| l.lo <= value && value <= l.hi)
            .map(|l| l.name.as_str())
    }

    /// Whether this property declares a level named `level` (case-insensitive).
    pub fn has_level(&self, level: &str) -> bool {
        self.levels.iter().any(|l| l.name.eq_ignore_ascii_case(level))
    }

    /// Number of values in the domain.
    pub fn domain_size(&self) -> u64 {
        (self.upper as i128 - self.lower as i128 + 1) as u64
    }
}

/// The environment model: an ordered list of properties. The order is the
/// canonical tuple order of context instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSchema {
    pub properties: Vec<PropertySchema>,
}

impl ContextSchema {
    pub fn new(properties: Vec<PropertySchema>) -> Result<Self, ModelError> {
        let schema = ContextSchema { properties };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.properties.is_empty() {
            return Err(ModelError::EmptySchema);
        }
        let mut seen = BTreeSet::new();
        for prop in &self.properties {
            prop.validate()?;
            if !seen.insert(prop.name.clone()) {
                return Err(ModelError::DuplicateProperty(prop.name.clone()));
            }
        }
        Ok(())
    }

    pub fn property(&self, name: &str) -> Option<&PropertySchema> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn arity(&self) -> usize {
        self.properties.len()
    }
}

/// Concrete values of all properties at one instant, in schema order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContextInstance {
    pub values: Vec<i64>,
}

impl ContextInstance {
    pub fn new(values: Vec<i64>) -> Self {
        ContextInstance { values }
    }
}

impl fmt::Display for ContextInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ">")
    }
}

/// An ordered sequence of context instances; consecutive instances must
/// differ in at least one property. This is the test-case payload.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContextFlow {
    pub instances: Vec<ContextInstance>,
}

impl ContextFlow {
    pub fn new(instances: Vec<ContextInstance>) -> Self {
        ContextFlow { instances }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Comparison operator of a rule condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn eval(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// The event part of a rule: fires when the named context property changes
/// to a value whose level is one of the accepted levels. Level names are
/// compared case-insensitively.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTrigger {
    pub property: String,
    pub accepted_levels: Vec<String>,
}

impl EventTrigger {
    pub fn accepts(&self, level: &str) -> bool {
        self.accepted_levels
            .iter()
            .any(|l| l.eq_ignore_ascii_case(level))
    }
}

/// The condition part of a rule: a single comparison against an internal
/// state variable of the adaptation system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub state_ref: String,
    pub op: CmpOp,
    pub value: i64,
}

/// The action part of a rule: assign a qualitative value to an action
/// property. Values are compared case-insensitively.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub property: String,
    pub value: String,
}

/// One event-condition-action rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub trigger: EventTrigger,
    pub condition: Condition,
    pub action: Action,
}

/// An ordered rule set. Textual order is execution priority. A policy may
/// be empty: a fully mutated policy can have zero rules.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Policy {
    pub rules: Vec<Rule>,
}

impl Policy {
    pub fn new(rules: Vec<Rule>) -> Self {
        Policy { rules }
    }
}

/// Right-hand side of a state assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AssignExpr {
    Const { value: i64 },
    Var { var: String },
    Add { var: String, delta: i64 },
    Sub { var: String, delta: i64 },
}

/// `target := expr`, applied to internal state when an effect fires.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub target: String,
    pub expr: AssignExpr,
}

/// Binds an (action property, action value) pair to state assignments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Effect {
    pub action_property: String,
    pub action_value: String,
    pub assignments: Vec<Assignment>,
}

/// Internal state of the adaptation system: declared state variables with
/// initial values, plus the effects actions have on them. Action values
/// with no declared effect leave the state unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SystemModel {
    pub state_vars: Vec<StateVar>,
    pub effects: Vec<Effect>,
}

/// A declared internal state variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateVar {
    pub name: String,
    pub initial: i64,
}

impl SystemModel {
    pub fn declares(&self, name: &str) -> bool {
        self.state_vars.iter().any(|v| v.name == name)
    }

    /// Effects registered for the given action property and value; the value
    /// comparison is case-insensitive.
    pub fn effects_for(&self, action_property: &str, action_value: &str) -> Vec<&Effect> {
        self.effects
            .iter()
            .filter(|e| {
                e.action_property == action_property
                    && e.action_value.eq_ignore_ascii_case(action_value)
            })
            .collect()
    }
}

/// One static-consistency finding. `index` is the rule index for policy
/// validation and the instance index for flow validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub index: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "[{}] {}", i, self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Result of a validation pass. Violations are data, not failures: an empty
/// report means the input is well-formed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, index: Option<usize>, message: String) {
        self.violations.push(Violation { index, message });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Static consistency of a policy against a schema and a system model:
/// trigger properties must be declared, accepted levels must exist for the
/// trigger property, and condition state references must be declared.
pub fn validate_policy(
    policy: &Policy,
    schema: &ContextSchema,
    sysmodel: &SystemModel,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (i, rule) in policy.rules.iter().enumerate() {
        match schema.property(&rule.trigger.property) {
            None => report.push(
                Some(i),
                format!("unknown property {}", rule.trigger.property),
            ),
            Some(prop) => {
                for level in &rule.trigger.accepted_levels {
                    if !prop.has_level(level) {
                        report.push(
                            Some(i),
                            format!(
                                "level '{}' not declared for property {}",
                                level, prop.name
                            ),
                        );
                    }
                }
            }
        }
        if !sysmodel.declares(&rule.condition.state_ref) {
            report.push(
                Some(i),
                format!("unknown state variable {}", rule.condition.state_ref),
            );
        }
    }
    report
}

/// Checks a flow against a schema: arity, bounds and the
/// consecutive-instances-differ invariant.
pub fn validate_flow(flow: &ContextFlow, schema: &ContextSchema) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (i, inst) in flow.instances.iter().enumerate() {
        if inst.values.len() != schema.arity() {
            report.push(
                Some(i),
                format!(
                    "instance has {} values, schema has {} properties",
                    inst.values.len(),
                    schema.arity()
                ),
            );
            continue;
        }
        for (prop, &value) in schema.properties.iter().zip(&inst.values) {
            if value < prop.lower || value > prop.upper {
                report.push(
                    Some(i),
                    format!(
                        "value {} out of bounds [{},{}] for property {}",
                        value, prop.lower, prop.upper, prop.name
                    ),
                );
            }
        }
        if i > 0 && flow.instances[i - 1] == *inst {
            report.push(Some(i), format!("consecutive instances identical at index {i}"));
        }
    }
    report
}

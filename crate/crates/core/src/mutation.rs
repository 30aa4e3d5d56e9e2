//! Mutant generation for adaptation policies.
//!
//! Five operators, grouped by the fault class they model:
//!
//! - environmental completeness (the logic ignores part of the context):
//!   - ICP — ignore a context property: delete every rule triggered by it
//!   - ISV — ignore one (property, level) couple: delete every rule
//!     executable when the property has that level
//!   - IMV — ignore a set of couples over distinct properties: delete every
//!     rule executable when any of them holds; only emitted when the
//!     deleted rules span at least two properties
//! - adaptation correctness (the logic reacts, but wrongly):
//!   - SRA — swap the action values of two rules that modify the same
//!     action property
//!   - MRCV — widen a rule's condition: for `<`/`<=` the value is
//!     multiplied by 10 (or becomes 10 from 0), for `>`/`>=` it is divided
//!     by 10 (or decremented when the division is a fixed point)
//!
//! Operators are pure functions over the model; they never emit identity
//! mutants. [`enumerate_mutants`] concatenates them in the fixed order ICP,
//! ISV, IMV, SRA, MRCV, drops textual duplicates within each operator
//! (keeping the first), and assigns sequential per-operator ids, so the
//! result is deterministic for a given input.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::artifact::{create_dir_all, read_to_string, write_string, ArtifactError};
use crate::model::{CmpOp, ContextSchema, Policy};
use crate::text::{parse_policy, serialize_policy};

/// The five mutation operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MutationOperator {
    #[serde(rename = "ICP")]
    Icp,
    #[serde(rename = "ISV")]
    Isv,
    #[serde(rename = "IMV")]
    Imv,
    #[serde(rename = "SRA")]
    Sra,
    #[serde(rename = "MRCV")]
    Mrcv,
}

impl MutationOperator {
    /// All operators, in application order.
    pub const ALL: [MutationOperator; 5] = [
        MutationOperator::Icp,
        MutationOperator::Isv,
        MutationOperator::Imv,
        MutationOperator::Sra,
        MutationOperator::Mrcv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationOperator::Icp => "ICP",
            MutationOperator::Isv => "ISV",
            MutationOperator::Imv => "IMV",
            MutationOperator::Sra => "SRA",
            MutationOperator::Mrcv => "MRCV",
        }
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationOperator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "icp" => Ok(MutationOperator::Icp),
            "isv" => Ok(MutationOperator::Isv),
            "imv" => Ok(MutationOperator::Imv),
            "sra" => Ok(MutationOperator::Sra),
            "mrcv" => Ok(MutationOperator::Mrcv),
            other => Err(format!("unknown mutation operator {other:?}")),
        }
    }
}

/// A (property, level) couple, the unit ISV and IMV ignore.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Couple {
    pub property: String,
    pub level: String,
}

impl fmt::Display for Couple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, '{}')", self.property, self.level)
    }
}

/// Operator-specific provenance of a mutant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MutantParams {
    Icp { property: String },
    Isv { property: String, level: String },
    Imv { couples: Vec<Couple> },
    Sra { rule_a: usize, rule_b: usize, action_property: String },
    Mrcv { rule: usize, state_ref: String, old_value: i64, new_value: i64 },
}

impl fmt::Display for MutantParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MutantParams::Icp { property } => write!(f, "ignore property {property}"),
            MutantParams::Isv { property, level } => {
                write!(f, "ignore ({property}, '{level}')")
            }
            MutantParams::Imv { couples } => {
                write!(f, "ignore ")?;
                for (i, c) in couples.iter().enumerate() {
                    if i > 0 {
                        write!(f, " and ")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            MutantParams::Sra { rule_a, rule_b, action_property } => {
                write!(f, "swap {action_property} values of rules {rule_a} and {rule_b}")
            }
            MutantParams::Mrcv { rule, state_ref, old_value, new_value } => {
                write!(f, "rule {rule}: {state_ref} condition value {old_value} -> {new_value}")
            }
        }
    }
}

/// One operator application: the mutated policy plus provenance. The
/// mutant policy always differs structurally from the original and
/// `affected_rules` (0-based indices into the original) is never empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutant {
    pub id: String,
    pub operator: MutationOperator,
    pub params: MutantParams,
    pub policy: Policy,
    pub affected_rules: BTreeSet<usize>,
}

/// The result of enumerating operators over a policy. `raw_count` is the
/// number of mutants the generators produced; `deduped_count` (equal to
/// `mutants.len()`) is what remains after dropping per-operator textual
/// duplicates. Cross-operator duplicates are retained with distinct ids
/// since provenance feeds the per-operator scores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutantSet {
    pub original: Policy,
    pub mutants: Vec<Mutant>,
    pub raw_count: usize,
    pub deduped_count: usize,
}

fn delete_rules(policy: &Policy, doomed: &BTreeSet<usize>) -> Policy {
    Policy::new(
        policy
            .rules
            .iter()
            .enumerate()
            .filter(|(i, _)| !doomed.contains(i))
            .map(|(_, r)| r.clone())
            .collect(),
    )
}

fn provisional_id(op: MutationOperator, seq: usize) -> String {
    format!("{}-{:03}", op.name(), seq)
}

/// ICP — one mutant per context property with at least one rule triggered
/// by it; the mutant deletes all such rules. Properties are visited in
/// schema order.
pub fn gen_icp(policy: &Policy, schema: &ContextSchema) -> Vec<Mutant> {
    let mut mutants = Vec::new();
    for prop in &schema.properties {
        let affected: BTreeSet<usize> = policy
            .rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.trigger.property == prop.name)
            .map(|(i, _)| i)
            .collect();
        if affected.is_empty() {
            continue;
        }
        mutants.push(Mutant {
            id: provisional_id(MutationOperator::Icp, mutants.len() + 1),
            operator: MutationOperator::Icp,
            params: MutantParams::Icp { property: prop.name.clone() },
            policy: delete_rules(policy, &affected),
            affected_rules: affected,
        });
    }
    mutants
}

fn rules_matching(policy: &Policy, property: &str, level: &str) -> BTreeSet<usize> {
    policy
        .rules
        .iter()
        .enumerate()
        .filter(|(_, r)| r.trigger.property == property && r.trigger.accepts(level))
        .map(|(i, _)| i)
        .collect()
}

/// ISV — one candidate per (property, declared level) couple matching at
/// least one rule; the mutant deletes every rule executable when the
/// property has that level. Couples are visited in schema then level
/// declaration order.
pub fn gen_isv(policy: &Policy, schema: &ContextSchema) -> Vec<Mutant> {
    let mut mutants = Vec::new();
    for prop in &schema.properties {
        for level in &prop.levels {
            let affected = rules_matching(policy, &prop.name, &level.name);
            if affected.is_empty() {
                continue;
            }
            mutants.push(Mutant {
                id: provisional_id(MutationOperator::Isv, mutants.len() + 1),
                operator: MutationOperator::Isv,
                params: MutantParams::Isv {
                    property: prop.name.clone(),
                    level: level.name.clone(),
                },
                policy: delete_rules(policy, &affected),
                affected_rules: affected,
            });
        }
    }
    mutants
}

fn combinations<T: Clone>(items: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn rec<T: Clone>(items: &[T], n: usize, start: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<T>>) {
        if stack.len() == n {
            out.push(stack.iter().map(|&i| items[i].clone()).collect());
            return;
        }
        for i in start..items.len() {
            stack.push(i);
            rec(items, n, i + 1, stack, out);
            stack.pop();
        }
    }
    rec(items, n, 0, &mut stack, &mut out);
    out
}

/// IMV — for every size-`n` set of couples over pairwise-distinct
/// properties, delete every rule executable when any couple holds; the
/// mutant is emitted only when the deleted rules span at least two
/// distinct trigger properties. `n` must be at least 2.
pub fn gen_imv(policy: &Policy, schema: &ContextSchema, n: usize) -> Vec<Mutant> {
    assert!(n >= 2, "IMV requires sets of at least two couples");
    let couples: Vec<Couple> = schema
        .properties
        .iter()
        .flat_map(|p| {
            p.levels.iter().map(|l| Couple { property: p.name.clone(), level: l.name.clone() })
        })
        .collect();
    let mut mutants = Vec::new();
    for set in combinations(&couples, n) {
        let distinct: BTreeSet<&str> = set.iter().map(|c| c.property.as_str()).collect();
        if distinct.len() != n {
            continue;
        }
        let mut affected = BTreeSet::new();
        for couple in &set {
            affected.extend(rules_matching(policy, &couple.property, &couple.level));
        }
        let touched: BTreeSet<&str> = affected
            .iter()
            .map(|&i| policy.rules[i].trigger.property.as_str())
            .collect();
        if touched.len() < 2 {
            continue;
        }
        mutants.push(Mutant {
            id: provisional_id(MutationOperator::Imv, mutants.len() + 1),
            operator: MutationOperator::Imv,
            params: MutantParams::Imv { couples: set },
            policy: delete_rules(policy, &affected),
            affected_rules: affected,
        });
    }
    mutants
}

/// SRA — one mutant per unordered pair of rules with the same action
/// property and different action values; the two values are exchanged.
pub fn gen_sra(policy: &Policy) -> Vec<Mutant> {
    let mut mutants = Vec::new();
    for i in 0..policy.rules.len() {
        for j in (i + 1)..policy.rules.len() {
            let (a, b) = (&policy.rules[i].action, &policy.rules[j].action);
            if a.property != b.property || a.value.eq_ignore_ascii_case(&b.value) {
                continue;
            }
            let mut rules = policy.rules.clone();
            let value_i = rules[i].action.value.clone();
            rules[i].action.value = rules[j].action.value.clone();
            rules[j].action.value = value_i;
            mutants.push(Mutant {
                id: provisional_id(MutationOperator::Sra, mutants.len() + 1),
                operator: MutationOperator::Sra,
                params: MutantParams::Sra {
                    rule_a: i,
                    rule_b: j,
                    action_property: a.property.clone(),
                },
                policy: Policy::new(rules),
                affected_rules: [i, j].into_iter().collect(),
            });
        }
    }
    mutants
}

/// The widened condition value MRCV rewrites to, or None when no rewrite
/// applies (equality operators, or saturation makes it a fixed point).
fn mrcv_rewrite(op: CmpOp, value: i64) -> Option<i64> {
    let new = match op {
        CmpOp::Lt | CmpOp::Le => {
            if value == 0 {
                10
            } else {
                value.saturating_mul(10)
            }
        }
        CmpOp::Gt | CmpOp::Ge => {
            let quot = value.div_euclid(10);
            if quot == value {
                value.saturating_sub(1)
            } else {
                quot
            }
        }
        CmpOp::Eq | CmpOp::Ne => return None,
    };
    (new != value).then_some(new)
}

/// MRCV — one mutant per rule with an ordering condition; `<`/`<=` values
/// are increased tenfold and `>`/`>=` values cut tenfold so the condition
/// widens. Equality conditions are skipped.
pub fn gen_mrcv(policy: &Policy) -> Vec<Mutant> {
    let mut mutants = Vec::new();
    for (i, rule) in policy.rules.iter().enumerate() {
        let Some(new_value) = mrcv_rewrite(rule.condition.op, rule.condition.value) else {
            continue;
        };
        let mut rules = policy.rules.clone();
        rules[i].condition.value = new_value;
        mutants.push(Mutant {
            id: provisional_id(MutationOperator::Mrcv, mutants.len() + 1),
            operator: MutationOperator::Mrcv,
            params: MutantParams::Mrcv {
                rule: i,
                state_ref: rule.condition.state_ref.clone(),
                old_value: rule.condition.value,
                new_value,
            },
            policy: Policy::new(rules),
            affected_rules: [i].into_iter().collect(),
        });
    }
    mutants
}

/// Run the selected operators (any order, duplicates ignored) and collect
/// the surviving mutants with per-operator sequential ids. Pure function
/// of its inputs.
pub fn enumerate_mutants(
    policy: &Policy,
    schema: &ContextSchema,
    operators: &[MutationOperator],
    imv_n: usize,
) -> MutantSet {
    let selected: BTreeSet<MutationOperator> = operators.iter().copied().collect();
    let original_text = serialize_policy(policy);
    let mut mutants = Vec::new();
    let mut raw_count = 0usize;
    for op in MutationOperator::ALL {
        if !selected.contains(&op) {
            continue;
        }
        let generated = match op {
            MutationOperator::Icp => gen_icp(policy, schema),
            MutationOperator::Isv => gen_isv(policy, schema),
            MutationOperator::Imv => gen_imv(policy, schema, imv_n),
            MutationOperator::Sra => gen_sra(policy),
            MutationOperator::Mrcv => gen_mrcv(policy),
        };
        raw_count += generated.len();
        let mut seen = BTreeSet::new();
        let mut seq = 0usize;
        for mut mutant in generated {
            let text = serialize_policy(&mutant.policy);
            if text == original_text {
                // generators never emit identity mutants; keep the guard anyway
                continue;
            }
            if !seen.insert(text) {
                continue;
            }
            seq += 1;
            mutant.id = provisional_id(op, seq);
            mutants.push(mutant);
        }
    }
    MutantSet {
        original: policy.clone(),
        deduped_count: mutants.len(),
        mutants,
        raw_count,
    }
}

/// Index file written next to the mutant policies.
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    original: String,
    raw_count: usize,
    deduped_count: usize,
    mutants: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    id: String,
    operator: MutationOperator,
    params: MutantParams,
    affected_rules: Vec<usize>,
    file: String,
}

/// Write one `<id>.apl` per mutant plus `manifest.json` into `dir`
/// (created if missing).
pub fn write_mutant_set(dir: &Path, set: &MutantSet) -> Result<(), ArtifactError> {
    create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(set.mutants.len());
    for mutant in &set.mutants {
        let file = format!("{}.apl", mutant.id);
        write_string(&dir.join(&file), &serialize_policy(&mutant.policy))?;
        entries.push(ManifestEntry {
            id: mutant.id.clone(),
            operator: mutant.operator,
            params: mutant.params.clone(),
            affected_rules: mutant.affected_rules.iter().copied().collect(),
            file,
        });
    }
    let manifest = Manifest {
        original: serialize_policy(&set.original),
        raw_count: set.raw_count,
        deduped_count: set.deduped_count,
        mutants: entries,
    };
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|source| ArtifactError::Json { path: path.clone(), source })?;
    write_string(&path, &json)
}

/// Read a mutant set written by [`write_mutant_set`]. The manifest's
/// recorded original must match `original` canonically, otherwise the set
/// belongs to a different policy and scores would be meaningless.
pub fn read_mutant_set(dir: &Path, original: &Policy) -> Result<MutantSet, ArtifactError> {
    let path = dir.join(MANIFEST_FILE);
    let json = read_to_string(&path)?;
    let manifest: Manifest = serde_json::from_str(&json)
        .map_err(|source| ArtifactError::Json { path: path.clone(), source })?;
    if manifest.original != serialize_policy(original) {
        return Err(ArtifactError::OriginalMismatch { dir: dir.to_path_buf() });
    }
    let mut mutants = Vec::with_capacity(manifest.mutants.len());
    for entry in manifest.mutants {
        let mutant_path = dir.join(&entry.file);
        let text = read_to_string(&mutant_path)?;
        let policy = parse_policy(&text)
            .map_err(|source| ArtifactError::Syntax { path: mutant_path.clone(), source })?
            .into_policy();
        if entry.affected_rules.is_empty() {
            return Err(ArtifactError::Malformed {
                path: path.clone(),
                message: format!("mutant {} has no affected rules", entry.id),
            });
        }
        mutants.push(Mutant {
            id: entry.id,
            operator: entry.operator,
            params: entry.params,
            policy,
            affected_rules: entry.affected_rules.into_iter().collect(),
        });
    }
    Ok(MutantSet {
        original: original.clone(),
        raw_count: manifest.raw_count,
        deduped_count: manifest.deduped_count,
        mutants,
    })
}

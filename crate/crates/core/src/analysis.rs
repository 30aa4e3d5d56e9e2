//! Kill decisions and mutation scores.
//!
//! A flow kills a mutant when the mutant's reconfiguration-request trace
//! diverges from the original's: the comparison is step-aligned and
//! order-sensitive over (action property, value) pairs, with rule indices
//! excluded so deletion mutants are killed by behavior, not bookkeeping.
//! A suite's score is the fraction of mutants killed by at least one of
//! its flows (a union, not a sum).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{run_flow, step, EngineError, EngineState, ReconfigurationRequest, Trace};
use crate::model::{ContextFlow, ContextInstance, ContextSchema, Policy, SystemModel};
use crate::mutation::{MutantParams, MutantSet, MutationOperator};
use crate::testgen::TestSuite;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("traces have different lengths ({orig} vs {mutant})")]
    TraceLengthMismatch { orig: usize, mutant: usize },
    #[error("brute force budget exceeded: {needed} candidate flows, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("failed to build worker pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

fn requests_equal(a: &[ReconfigurationRequest], b: &[ReconfigurationRequest]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.action_property == y.action_property && x.value.eq_ignore_ascii_case(&y.value)
        })
}

/// First step (0-based) at which the two traces' request lists differ, or
/// None when the mutant behaves identically on this flow.
pub fn kills(orig: &Trace, mutant: &Trace) -> Result<Option<usize>, AnalysisError> {
    if orig.len() != mutant.len() {
        return Err(AnalysisError::TraceLengthMismatch {
            orig: orig.len(),
            mutant: mutant.len(),
        });
    }
    Ok(orig
        .steps
        .iter()
        .zip(&mutant.steps)
        .position(|(o, m)| !requests_equal(&o.requests, &m.requests)))
}

/// Identifies one flow of one suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowRef {
    pub suite: usize,
    pub flow: usize,
}

/// One mutant's kill cells across every flow, aligned with
/// [`KillMatrix::columns`]; a cell is the first divergence step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillRow {
    pub mutant_id: String,
    pub operator: MutationOperator,
    pub cells: Vec<Option<usize>>,
}

impl KillRow {
    pub fn killed_anywhere(&self) -> bool {
        self.cells.iter().any(|c| c.is_some())
    }
}

/// Suite-by-mutant kill bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillMatrix {
    pub columns: Vec<FlowRef>,
    pub rows: Vec<KillRow>,
}

/// An exact `killed/total` fraction; `den == 0` means not defined (no
/// mutants or no suites) and renders as "n/a".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    pub num: u64,
    pub den: u64,
}

impl Score {
    pub fn value(&self) -> Option<f64> {
        (self.den != 0).then(|| self.num as f64 / self.den as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteScore {
    pub suite: usize,
    pub killed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorScore {
    pub operator: MutationOperator,
    pub killed: usize,
    pub total: usize,
}

/// A mutant no flow of any suite killed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Survivor {
    pub id: String,
    pub operator: MutationOperator,
    pub params: MutantParams,
}

/// Aggregated mutation scores. `min`/`max` range over per-suite scores;
/// `avg` is the exact mean (total kills over suites x mutants).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub mutant_count: usize,
    pub suite_count: usize,
    pub per_suite: Vec<SuiteScore>,
    pub min_score: Score,
    pub max_score: Score,
    pub avg_score: Score,
    pub per_operator: Vec<OperatorScore>,
    pub survivors: Vec<Survivor>,
}

/// Run every (flow x original/mutant) simulation and aggregate scores.
/// `jobs` bounds the worker pool (0 uses the default); results are
/// identical for any parallelism degree since cells merge in a fixed
/// (mutant, suite, flow) order.
pub fn run_analysis(
    policy: &Policy,
    schema: &ContextSchema,
    sysmodel: &SystemModel,
    suites: &[TestSuite],
    mutants: &MutantSet,
    jobs: usize,
) -> Result<(KillMatrix, AnalysisReport), AnalysisError> {
    let compute = || compute_analysis(policy, schema, sysmodel, suites, mutants);
    if jobs > 0 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        pool.install(compute)
    } else {
        compute()
    }
}

fn compute_analysis(
    policy: &Policy,
    schema: &ContextSchema,
    sysmodel: &SystemModel,
    suites: &[TestSuite],
    mutants: &MutantSet,
) -> Result<(KillMatrix, AnalysisReport), AnalysisError> {
    let flows: Vec<(FlowRef, &ContextFlow)> = suites
        .iter()
        .enumerate()
        .flat_map(|(si, s)| {
            s.flows
                .iter()
                .enumerate()
                .map(move |(fi, f)| (FlowRef { suite: si, flow: fi }, f))
        })
        .collect();

    let originals: Vec<Trace> = flows
        .par_iter()
        .map(|(_, flow)| run_flow(policy, schema, sysmodel, flow))
        .collect::<Result<_, _>>()?;

    let rows: Vec<KillRow> = mutants
        .mutants
        .par_iter()
        .map(|mutant| -> Result<KillRow, AnalysisError> {
            let mut cells = Vec::with_capacity(flows.len());
            for ((_, flow), orig) in flows.iter().zip(&originals) {
                let trace = run_flow(&mutant.policy, schema, sysmodel, flow)?;
                cells.push(kills(orig, &trace)?);
            }
            Ok(KillRow { mutant_id: mutant.id.clone(), operator: mutant.operator, cells })
        })
        .collect::<Result<_, _>>()?;

    let matrix = KillMatrix { columns: flows.iter().map(|(r, _)| *r).collect(), rows };
    let report = summarize(&matrix, suites.len(), mutants);
    Ok((matrix, report))
}

fn summarize(matrix: &KillMatrix, suite_count: usize, mutants: &MutantSet) -> AnalysisReport {
    let total = mutants.mutants.len();
    let mut per_suite = Vec::with_capacity(suite_count);
    for si in 0..suite_count {
        // union over the suite's flows: a mutant counts once however many
        // of the suite's flows kill it
        let killed = matrix
            .rows
            .iter()
            .filter(|row| {
                row.cells
                    .iter()
                    .zip(&matrix.columns)
                    .any(|(cell, col)| col.suite == si && cell.is_some())
            })
            .count();
        per_suite.push(SuiteScore { suite: si, killed, total });
    }

    let undefined = total == 0 || suite_count == 0;
    let (min_score, max_score, avg_score) = if undefined {
        let na = Score { num: 0, den: 0 };
        (na, na, na)
    } else {
        let min = per_suite.iter().map(|s| s.killed).min().unwrap() as u64;
        let max = per_suite.iter().map(|s| s.killed).max().unwrap() as u64;
        let sum: u64 = per_suite.iter().map(|s| s.killed as u64).sum();
        (
            Score { num: min, den: total as u64 },
            Score { num: max, den: total as u64 },
            Score { num: sum, den: (suite_count * total) as u64 },
        )
    };

    let present: Vec<MutationOperator> = MutationOperator::ALL
        .into_iter()
        .filter(|op| mutants.mutants.iter().any(|m| m.operator == *op))
        .collect();
    let per_operator = present
        .into_iter()
        .map(|operator| {
            let of_op: Vec<&KillRow> =
                matrix.rows.iter().filter(|r| r.operator == operator).collect();
            OperatorScore {
                operator,
                killed: of_op.iter().filter(|r| r.killed_anywhere()).count(),
                total: of_op.len(),
            }
        })
        .collect();

    let survivors = matrix
        .rows
        .iter()
        .zip(&mutants.mutants)
        .filter(|(row, _)| !row.killed_anywhere())
        .map(|(_, m)| Survivor { id: m.id.clone(), operator: m.operator, params: m.params.clone() })
        .collect();

    AnalysisReport {
        mutant_count: total,
        suite_count,
        per_suite,
        min_score,
        max_score,
        avg_score,
        per_operator,
        survivors,
    }
}

/// Outcome of the bounded-exhaustive survivor check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// The shortest, lexicographically first flow that kills the mutant.
    Killable { witness: ContextFlow, divergence_step: usize },
    /// No flow of length up to `max_len` kills it. Equivalence beyond the
    /// bound stays open: the check is exhaustive only within it.
    EquivalentUpTo { max_len: usize },
}

/// Exhaustively enumerate every valid flow of length <= `max_len`
/// (shortest first, lexicographic within a length) and report the first
/// killing flow. The candidate space, the product of the domain sizes
/// raised to `max_len`, must stay within `budget`.
pub fn brute_force_survivor_check(
    policy: &Policy,
    mutant: &Policy,
    schema: &ContextSchema,
    sysmodel: &SystemModel,
    max_len: usize,
    budget: u64,
) -> Result<Verdict, AnalysisError> {
    let domain: Option<u128> = schema
        .properties
        .iter()
        .try_fold(1u128, |acc, p| acc.checked_mul(p.domain_size() as u128));
    let needed = domain.and_then(|d| d.checked_pow(max_len as u32));
    match needed {
        Some(n) if n <= budget as u128 => {}
        _ => {
            return Err(AnalysisError::BudgetExceeded {
                needed: needed.unwrap_or(u128::MAX),
                budget,
            });
        }
    }

    let instances = all_instances(schema);
    let mut prefix = Vec::new();
    for target_len in 1..=max_len {
        let orig_state = EngineState::initial(sysmodel);
        let mut_state = EngineState::initial(sysmodel);
        if let Some((witness, divergence_step)) = search(
            policy,
            mutant,
            schema,
            sysmodel,
            &instances,
            &mut prefix,
            &orig_state,
            &mut_state,
            target_len,
        )? {
            return Ok(Verdict::Killable { witness, divergence_step });
        }
    }
    Ok(Verdict::EquivalentUpTo { max_len })
}

fn all_instances(schema: &ContextSchema) -> Vec<ContextInstance> {
    let mut out = Vec::new();
    let mut values: Vec<i64> = schema.properties.iter().map(|p| p.lower).collect();
    loop {
        out.push(ContextInstance::new(values.clone()));
        // odometer increment, last property fastest: lexicographic order
        let mut i = schema.properties.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if values[i] < schema.properties[i].upper {
                values[i] += 1;
                for (j, v) in values.iter_mut().enumerate().skip(i + 1) {
                    *v = schema.properties[j].lower;
                }
                break;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    policy: &Policy,
    mutant: &Policy,
    schema: &ContextSchema,
    sysmodel: &SystemModel,
    instances: &[ContextInstance],
    prefix: &mut Vec<ContextInstance>,
    orig_state: &EngineState,
    mut_state: &EngineState,
    remaining: usize,
) -> Result<Option<(ContextFlow, usize)>, AnalysisError> {
    if remaining == 0 {
        return Ok(None);
    }
    for instance in instances {
        if prefix.last() == Some(instance) {
            continue;
        }
        let (orig_next, orig_rec) = step(policy, schema, sysmodel, orig_state.clone(), instance)?;
        let (mut_next, mut_rec) = step(mutant, schema, sysmodel, mut_state.clone(), instance)?;
        prefix.push(instance.clone());
        if !requests_equal(&orig_rec.requests, &mut_rec.requests) {
            let witness = ContextFlow::new(prefix.clone());
            let divergence_step = prefix.len() - 1;
            prefix.pop();
            return Ok(Some((witness, divergence_step)));
        }
        let found = search(
            policy,
            mutant,
            schema,
            sysmodel,
            instances,
            prefix,
            &orig_next,
            &mut_next,
            remaining - 1,
        )?;
        prefix.pop();
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::mutation::{enumerate_mutants, Mutant, MutationOperator};
    use crate::testgen::random_suite;

    fn webserver() -> (Policy, ContextSchema, SystemModel) {
        (
            corpus::webserver_policy(),
            corpus::webserver_schema(),
            corpus::webserver_sysmodel(),
        )
    }

    fn flow(instances: &[&[i64]]) -> ContextFlow {
        ContextFlow::new(instances.iter().map(|v| ContextInstance::new(v.to_vec())).collect())
    }

    #[test]
    fn identical_traces_do_not_kill() {
        let (policy, schema, sys) = webserver();
        let f = flow(&[&[12, 3], &[80, 3]]);
        let a = run_flow(&policy, &schema, &sys, &f).unwrap();
        let b = run_flow(&policy, &schema, &sys, &f).unwrap();
        assert_eq!(kills(&a, &b).unwrap(), None);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let (policy, schema, sys) = webserver();
        let a = run_flow(&policy, &schema, &sys, &flow(&[&[12, 3]])).unwrap();
        let b = run_flow(&policy, &schema, &sys, &flow(&[&[12, 3], &[80, 3]])).unwrap();
        assert!(matches!(
            kills(&a, &b),
            Err(AnalysisError::TraceLengthMismatch { orig: 1, mutant: 2 })
        ));
    }

    // ICP(LOAD): the bootstrap LOAD event always fires an addFileServer
    // rule in the original (FileServers.size starts at 0), so the
    // deletion shows at step 0 already.
    #[test]
    fn icp_load_killed_at_bootstrap() {
        let (policy, schema, sys) = webserver();
        let set = enumerate_mutants(&policy, &schema, &[MutationOperator::Icp], 2);
        let icp_load = &set.mutants[0];
        assert_eq!(icp_load.params.to_string(), "ignore property LOAD");
        let f = flow(&[&[12, 3], &[80, 3]]);
        let orig = run_flow(&policy, &schema, &sys, &f).unwrap();
        let mutant = run_flow(&icp_load.policy, &schema, &sys, &f).unwrap();
        assert_eq!(kills(&orig, &mutant).unwrap(), Some(0));
    }

    // SRA on the addCache pair swaps the value the bootstrap emits.
    #[test]
    fn sra_addcache_killed_at_step_zero() {
        let (policy, schema, sys) = webserver();
        let set = enumerate_mutants(&policy, &schema, &[MutationOperator::Sra], 2);
        let sra_cache = &set.mutants[0];
        assert!(sra_cache.params.to_string().contains("addCache"));
        let f = flow(&[&[12, 3]]);
        let orig = run_flow(&policy, &schema, &sys, &f).unwrap();
        let mutant = run_flow(&sra_cache.policy, &schema, &sys, &f).unwrap();
        assert_eq!(kills(&orig, &mutant).unwrap(), Some(0));
        assert_eq!(orig.steps[0].requests[1].value, "low");
        assert_eq!(mutant.steps[0].requests[1].value, "high");
    }

    // MRCV leaves behavior unchanged until FileServers.size exceeds 10,
    // which a short flow cannot reach: not killed.
    #[test]
    fn mrcv_not_killed_by_short_flows() {
        let (policy, schema, sys) = webserver();
        let set = enumerate_mutants(&policy, &schema, &[MutationOperator::Mrcv], 2);
        let f = flow(&[&[80, 3], &[90, 3], &[80, 3]]);
        let orig = run_flow(&policy, &schema, &sys, &f).unwrap();
        for m in &set.mutants {
            let trace = run_flow(&m.policy, &schema, &sys, &f).unwrap();
            assert_eq!(kills(&orig, &trace).unwrap(), None, "{}", m.id);
        }
    }

    #[test]
    fn run_analysis_zero_mutants_is_na() {
        let (policy, schema, sys) = webserver();
        let set = enumerate_mutants(&Policy::default(), &schema, &[], 2);
        let suites = vec![random_suite(&schema, 2, 5, 1).unwrap()];
        let empty_set = MutantSet { original: policy.clone(), ..set };
        let (matrix, report) = run_analysis(&policy, &schema, &sys, &suites, &empty_set, 1).unwrap();
        assert!(matrix.rows.is_empty());
        assert_eq!(report.min_score, Score { num: 0, den: 0 });
        assert_eq!(report.min_score.value(), None);
    }

    // A hand-made identity mutant is behaviorally equivalent: killed by
    // no suite, listed as survivor.
    #[test]
    fn equivalent_mutant_survives() {
        let (policy, schema, sys) = webserver();
        let set = MutantSet {
            original: policy.clone(),
            mutants: vec![Mutant {
                id: "EQ-001".into(),
                operator: MutationOperator::Mrcv,
                params: MutantParams::Mrcv {
                    rule: 0,
                    state_ref: "cacheHandler.size".into(),
                    old_value: 0,
                    new_value: 0,
                },
                policy: policy.clone(),
                affected_rules: [0].into_iter().collect(),
            }],
            raw_count: 1,
            deduped_count: 1,
        };
        let suites = vec![
            random_suite(&schema, 3, 10, 5).unwrap(),
            random_suite(&schema, 3, 10, 6).unwrap(),
        ];
        let (_, report) = run_analysis(&policy, &schema, &sys, &suites, &set, 0).unwrap();
        assert_eq!(report.survivors.len(), 1);
        assert_eq!(report.survivors[0].id, "EQ-001");
        assert_eq!(report.max_score, Score { num: 0, den: 1 });
    }

    #[test]
    fn suite_score_is_union_not_sum() {
        let (policy, schema, sys) = webserver();
        // one ICP mutant killed by every flow of the suite: score must be
        // 1/1, not flows/1
        let set = enumerate_mutants(&policy, &schema, &[MutationOperator::Icp], 2);
        let one = MutantSet {
            original: policy.clone(),
            mutants: vec![set.mutants[0].clone()],
            raw_count: 1,
            deduped_count: 1,
        };
        let suites = vec![random_suite(&schema, 4, 6, 3).unwrap()];
        let (matrix, report) = run_analysis(&policy, &schema, &sys, &suites, &one, 1).unwrap();
        assert!(matrix.rows[0].cells.iter().all(|c| c.is_some()));
        assert_eq!(report.per_suite[0].killed, 1);
    }

    #[test]
    fn parallelism_degree_does_not_change_results() {
        let (policy, schema, sys) = webserver();
        let set = enumerate_mutants(&policy, &schema, &MutationOperator::ALL, 2);
        let suites: Vec<TestSuite> =
            (0..4).map(|s| random_suite(&schema, 5, 12, s).unwrap()).collect();
        let (m1, r1) = run_analysis(&policy, &schema, &sys, &suites, &set, 1).unwrap();
        let (m4, r4) = run_analysis(&policy, &schema, &sys, &suites, &set, 4).unwrap();
        let (m0, r0) = run_analysis(&policy, &schema, &sys, &suites, &set, 0).unwrap();
        assert_eq!(m1, m4);
        assert_eq!(r1, r4);
        assert_eq!(m1, m0);
        assert_eq!(r1, r0);
    }

    fn shrunk_schema() -> ContextSchema {
        crate::text::parse_schema(
            "property LOAD : int [0,3] levels { low: [0,1], high: [2,3] }\n\
             property requestdensity : int [0,3] levels { low: [0,1], high: [2,3] }",
        )
        .unwrap()
    }

    fn shrunk_policy() -> Policy {
        crate::text::parse_policy(
            "when requestdensity is 'high'\nif cacheHandler.size == 0\nthen utility of addCache is 'high'\n\
             when requestdensity is 'low'\nif cacheHandler.size == 0\nthen utility of addCache is 'low'\n\
             when LOAD is 'high'\nif FileServers.size <= 10\nthen utility of addFileServer is 'high'\n\
             when LOAD is 'low'\nif FileServers.size <= 10\nthen utility of addFileServer is 'low'",
        )
        .unwrap()
        .into_policy()
    }

    #[test]
    fn brute_force_finds_short_witness_for_icp() {
        let (_, _, sys) = webserver();
        let schema = shrunk_schema();
        let policy = shrunk_policy();
        let set = enumerate_mutants(&policy, &schema, &[MutationOperator::Icp], 2);
        let verdict = brute_force_survivor_check(
            &policy,
            &set.mutants[0].policy,
            &schema,
            &sys,
            3,
            1_000_000,
        )
        .unwrap();
        match verdict {
            Verdict::Killable { witness, divergence_step } => {
                assert_eq!(witness.len(), 1);
                assert_eq!(divergence_step, 0);
                // lexicographically first instance is <0,0>
                assert_eq!(witness.instances[0].values, vec![0, 0]);
            }
            other => panic!("expected witness, got {other:?}"),
        }
    }

    // The widened '<= 100' condition needs FileServers.size > 10, out of
    // reach within three steps: bounded-equivalent.
    #[test]
    fn brute_force_declares_mrcv_bounded_equivalent() {
        let (_, _, sys) = webserver();
        let schema = shrunk_schema();
        let policy = shrunk_policy();
        let set = enumerate_mutants(&policy, &schema, &[MutationOperator::Mrcv], 2);
        let verdict = brute_force_survivor_check(
            &policy,
            &set.mutants[0].policy,
            &schema,
            &sys,
            3,
            1_000_000,
        )
        .unwrap();
        assert_eq!(verdict, Verdict::EquivalentUpTo { max_len: 3 });
    }

    #[test]
    fn brute_force_identity_mutant_equivalent_at_any_bound() {
        let (_, _, sys) = webserver();
        let schema = shrunk_schema();
        let policy = shrunk_policy();
        for max_len in 0..=3 {
            let verdict =
                brute_force_survivor_check(&policy, &policy, &schema, &sys, max_len, 1_000_000)
                    .unwrap();
            assert_eq!(verdict, Verdict::EquivalentUpTo { max_len });
        }
    }

    #[test]
    fn brute_force_respects_budget() {
        let (policy, schema, sys) = webserver();
        // 101*101 = 10201 instances; length 2 needs ~10^8 > budget
        let err =
            brute_force_survivor_check(&policy, &policy, &schema, &sys, 2, 1_000_000).unwrap_err();
        assert!(matches!(err, AnalysisError::BudgetExceeded { .. }));
    }

    #[test]
    fn all_instances_is_lexicographic() {
        let schema = shrunk_schema();
        let instances = all_instances(&schema);
        assert_eq!(instances.len(), 16);
        assert_eq!(instances[0].values, vec![0, 0]);
        assert_eq!(instances[1].values, vec![0, 1]);
        assert_eq!(instances[4].values, vec![1, 0]);
        assert_eq!(instances[15].values, vec![3, 3]);
    }
}

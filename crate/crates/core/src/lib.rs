//! Mutation testing for action-based adaptation logics.
//!
//! An adaptation policy is a set of event-condition-action rules that map
//! environmental change (context flows) to reconfiguration requests. This
//! crate parses such policies, derives mutants via five operators (ICP,
//! ISV, IMV, SRA, MRCV), executes original and mutant policies against
//! context flows through a simulated reconfiguration engine, and scores
//! test suites by the mutants they kill.
//!
//! Module map:
//!
//! - [`model`] — policies, context schemas, flows, system models
//! - [`text`] — text bridge: parse and serialize the on-disk formats
//! - [`mutation`] — mutation operators and mutant enumeration
//! - [`engine`] — the instrumented adaptation pipeline (sensor, rule
//!   matching, reconfiguration probe)
//! - [`testgen`] — seeded random generation of flows and suites
//! - [`analysis`] — kill decisions, mutation scores, survivor checks
//! - [`report`] — text, JSON and CSV analysis reports
//! - [`corpus`] — the shipped adaptive web server example

pub mod analysis;
pub mod artifact;
pub mod corpus;
pub mod engine;
pub mod model;
pub mod mutation;
pub mod report;
pub mod testgen;
pub mod text;

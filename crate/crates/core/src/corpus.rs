//! The adaptive web server example shipped with the toolkit: a four-rule
//! cache/file-server policy over a two-property context (server load and
//! request density), with the matching schema and system model. Used
//! throughout the tests and handy as CLI demo input (see `assets/`).

use crate::model::{ContextSchema, Policy, SystemModel};
use crate::text;

pub const WEBSERVER_POLICY: &str = include_str!("../../../assets/webserver.apl");
pub const WEBSERVER_SCHEMA: &str = include_str!("../../../assets/webserver.ctx");
pub const WEBSERVER_SYSMODEL: &str = include_str!("../../../assets/webserver.sys");

pub fn webserver_policy() -> Policy {
    text::parse_policy(WEBSERVER_POLICY)
        .expect("shipped policy parses")
        .into_policy()
}

pub fn webserver_schema() -> ContextSchema {
    text::parse_schema(WEBSERVER_SCHEMA).expect("shipped schema parses")
}

pub fn webserver_sysmodel() -> SystemModel {
    text::parse_system_model(WEBSERVER_SYSMODEL).expect("shipped system model parses")
}

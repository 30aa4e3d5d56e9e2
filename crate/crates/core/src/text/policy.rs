//! Parser and canonical serializer for `.apl` adaptation policies.
//!
//! Grammar (keywords case-insensitive, newlines insignificant):
//!
//! ```text
//! policy := rule*
//! rule   := "when" IDENT "is" QVAL ("or" QVAL)*
//!           "if" DOTTED_IDENT CMP INT
//!           "then" "utility" "of" IDENT "is" QVAL
//! QVAL   := "'" IDENT "'"
//! CMP    := "==" | "!=" | "<=" | ">=" | "<" | ">"
//! ```

use crate::model::{Action, CmpOp, Condition, EventTrigger, Policy, Rule};

use super::lexer::{Cursor, Tok};
use super::{SourceSpan, SyntaxError};

const RESERVED: &[&str] = &["when", "is", "or", "if", "then", "utility", "of"];

/// A parsed policy together with the source span of each rule's `when`
/// keyword, index-aligned with `policy.rules`.
#[derive(Debug, Clone)]
pub struct ParsedPolicy {
    pub policy: Policy,
    pub rule_spans: Vec<SourceSpan>,
}

impl ParsedPolicy {
    pub fn into_policy(self) -> Policy {
        self.policy
    }
}

/// Parse policy text. Rule order in the model matches textual order.
/// Qualitative values are stored lower-cased; duplicate accepted levels in
/// a `when` clause are dropped, keeping the first occurrence.
pub fn parse_policy(text: &str) -> Result<ParsedPolicy, SyntaxError> {
    let mut cur = Cursor::from_text(text)?;
    let mut rules = Vec::new();
    let mut rule_spans = Vec::new();
    while !cur.is_done() {
        let when = cur.expect_keyword("when")?;
        let (property, _) = cur.expect_ident("property identifier", RESERVED, false)?;
        cur.expect_keyword("is")?;
        let mut accepted_levels = vec![cur.expect_quoted()?];
        while cur.peek_keyword("or") {
            cur.next();
            let level = cur.expect_quoted()?;
            if !accepted_levels.iter().any(|l| l.eq_ignore_ascii_case(&level)) {
                accepted_levels.push(level);
            }
        }
        cur.expect_keyword("if")?;
        let (state_ref, _) = cur.expect_ident("state variable", RESERVED, true)?;
        let op = expect_cmp(&mut cur)?;
        let value = cur.expect_signed_int()?;
        cur.expect_keyword("then")?;
        cur.expect_keyword("utility")?;
        cur.expect_keyword("of")?;
        let (action_property, _) = cur.expect_ident("action property identifier", RESERVED, false)?;
        cur.expect_keyword("is")?;
        let action_value = cur.expect_quoted()?;

        rules.push(Rule {
            trigger: EventTrigger { property, accepted_levels },
            condition: Condition { state_ref, op, value },
            action: Action { property: action_property, value: action_value },
        });
        rule_spans.push(when.span);

        if !cur.is_done() && !cur.peek_keyword("when") {
            return Err(cur.error("'when' or end of input"));
        }
    }
    Ok(ParsedPolicy { policy: Policy::new(rules), rule_spans })
}

fn expect_cmp(cur: &mut Cursor) -> Result<CmpOp, SyntaxError> {
    let op = match cur.peek().map(|t| &t.tok) {
        Some(Tok::EqEq) => CmpOp::Eq,
        Some(Tok::Ne) => CmpOp::Ne,
        Some(Tok::Le) => CmpOp::Le,
        Some(Tok::Ge) => CmpOp::Ge,
        Some(Tok::Lt) => CmpOp::Lt,
        Some(Tok::Gt) => CmpOp::Gt,
        _ => return Err(cur.error("comparison operator")),
    };
    cur.next();
    Ok(op)
}

/// Canonical text form: three physical lines per rule, one blank line
/// between rules, single spaces, qualitative values lower-cased. The empty
/// policy serializes to the empty string.
pub fn serialize_policy(policy: &Policy) -> String {
    let mut out = String::new();
    for (i, rule) in policy.rules.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str("when ");
        out.push_str(&rule.trigger.property);
        out.push_str(" is ");
        for (j, level) in rule.trigger.accepted_levels.iter().enumerate() {
            if j > 0 {
                out.push_str(" or ");
            }
            out.push('\'');
            out.push_str(&level.to_ascii_lowercase());
            out.push('\'');
        }
        out.push('\n');
        out.push_str("if ");
        out.push_str(&rule.condition.state_ref);
        out.push(' ');
        out.push_str(rule.condition.op.symbol());
        out.push(' ');
        out.push_str(&rule.condition.value.to_string());
        out.push('\n');
        out.push_str("then utility of ");
        out.push_str(&rule.action.property);
        out.push_str(" is '");
        out.push_str(&rule.action.value.to_ascii_lowercase());
        out.push_str("'\n");
    }
    out
}

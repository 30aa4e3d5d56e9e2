//! Parser for `.sys` system model files.
//!
//! Two line forms, states before the effects that reference them:
//!
//! ```text
//! state NAME = INT
//! effect ACTIONPROP 'VALUE' => NAME := EXPR
//! ```
//!
//! where `EXPR` is one of `INT`, `NAME`, `NAME + INT`, `NAME - INT` and
//! every `NAME` must be a declared state variable.

use crate::model::{AssignExpr, Assignment, Effect, StateVar, SystemModel};

use super::lexer::{tokenize_line, Cursor, Tok};
use super::{SourceSpan, SyntaxError};

const RESERVED: &[&str] = &["state", "effect"];

pub fn parse_system_model(text: &str) -> Result<SystemModel, SyntaxError> {
    let mut model = SystemModel::default();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = (i + 1) as u32;
        let mut tokens = Vec::new();
        tokenize_line(raw_line, line_no, &mut tokens)?;
        if tokens.is_empty() {
            continue;
        }
        let eof = SourceSpan::new(line_no, raw_line.chars().count() as u32 + 1, 0);
        let mut cur = Cursor::new(tokens, eof);

        if cur.peek_keyword("state") {
            cur.next();
            let (name, span) = cur.expect_ident("state variable name", RESERVED, true)?;
            cur.expect_tok(Tok::Eq, "'='")?;
            let initial = cur.expect_signed_int()?;
            if model.declares(&name) {
                return Err(SyntaxError::new(
                    span,
                    format!("state variable {name} already declared"),
                ));
            }
            model.state_vars.push(StateVar { name, initial });
        } else if cur.peek_keyword("effect") {
            cur.next();
            let (action_property, _) = cur.expect_ident("action property", RESERVED, false)?;
            let action_value = cur.expect_quoted()?;
            cur.expect_tok(Tok::FatArrow, "'=>'")?;
            let (target, target_span) = cur.expect_ident("state variable", RESERVED, true)?;
            if !model.declares(&target) {
                return Err(SyntaxError::new(
                    target_span,
                    format!("unknown state variable {target}"),
                ));
            }
            cur.expect_tok(Tok::ColonEq, "':='")?;
            let expr = parse_expr(&mut cur, &model)?;
            model.effects.push(Effect {
                action_property,
                action_value,
                assignments: vec![Assignment { target, expr }],
            });
        } else {
            return Err(cur.error("'state' or 'effect'"));
        }
        if !cur.is_done() {
            return Err(cur.error("end of line"));
        }
    }
    Ok(model)
}

fn parse_expr(cur: &mut Cursor, model: &SystemModel) -> Result<AssignExpr, SyntaxError> {
    match cur.peek().map(|t| &t.tok) {
        Some(Tok::Int(_)) | Some(Tok::Minus) => {
            let value = cur.expect_signed_int()?;
            Ok(AssignExpr::Const { value })
        }
        Some(Tok::Ident(_)) => {
            let (var, span) = cur.expect_ident("state variable", RESERVED, true)?;
            if !model.declares(&var) {
                return Err(SyntaxError::new(span, format!("unknown state variable {var}")));
            }
            match cur.peek().map(|t| &t.tok) {
                Some(Tok::Plus) => {
                    cur.next();
                    let delta = cur.expect_signed_int()?;
                    Ok(AssignExpr::Add { var, delta })
                }
                Some(Tok::Minus) => {
                    cur.next();
                    let delta = cur.expect_signed_int()?;
                    Ok(AssignExpr::Sub { var, delta })
                }
                _ => Ok(AssignExpr::Var { var }),
            }
        }
        _ => Err(cur.error("integer or state variable")),
    }
}

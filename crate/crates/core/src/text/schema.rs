//! Parser for `.ctx` context schema files.
//!
//! One property per line:
//!
//! ```text
//! property NAME : int [LO,UP] levels { name: [a,b], name: [c,d] }
//! ```
//!
//! Levels must partition `[LO,UP]` exactly; overlaps and gaps are rejected.

use crate::model::{ContextSchema, Level, PropertySchema};

use super::lexer::{tokenize_line, Cursor, Tok};
use super::{SourceSpan, SyntaxError};

const RESERVED: &[&str] = &["property", "levels", "int"];

pub fn parse_schema(text: &str) -> Result<ContextSchema, SyntaxError> {
    let mut properties = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = (i + 1) as u32;
        let mut tokens = Vec::new();
        tokenize_line(raw_line, line_no, &mut tokens)?;
        if tokens.is_empty() {
            continue;
        }
        let line_span = SourceSpan::new(line_no, 1, raw_line.chars().count() as u32);
        let eof = SourceSpan::new(line_no, raw_line.chars().count() as u32 + 1, 0);
        let mut cur = Cursor::new(tokens, eof);

        cur.expect_keyword("property")?;
        let (name, _) = cur.expect_ident("property name", RESERVED, false)?;
        cur.expect_tok(Tok::Colon, "':'")?;
        cur.expect_keyword("int")?;
        cur.expect_tok(Tok::LBracket, "'['")?;
        let lower = cur.expect_signed_int()?;
        cur.expect_tok(Tok::Comma, "','")?;
        let upper = cur.expect_signed_int()?;
        cur.expect_tok(Tok::RBracket, "']'")?;
        cur.expect_keyword("levels")?;
        cur.expect_tok(Tok::LBrace, "'{'")?;
        let mut levels = Vec::new();
        loop {
            let (level_name, _) = cur.expect_ident("level name", RESERVED, false)?;
            cur.expect_tok(Tok::Colon, "':'")?;
            cur.expect_tok(Tok::LBracket, "'['")?;
            let lo = cur.expect_signed_int()?;
            cur.expect_tok(Tok::Comma, "','")?;
            let hi = cur.expect_signed_int()?;
            cur.expect_tok(Tok::RBracket, "']'")?;
            levels.push(Level { name: level_name.to_ascii_lowercase(), lo, hi });
            match cur.peek().map(|t| &t.tok) {
                Some(Tok::Comma) => {
                    cur.next();
                }
                Some(Tok::RBrace) => break,
                _ => return Err(cur.error("',' or '}'")),
            }
        }
        cur.expect_tok(Tok::RBrace, "'}'")?;
        if !cur.is_done() {
            return Err(cur.error("end of line"));
        }

        let prop = PropertySchema { name, lower, upper, levels };
        prop.validate()
            .map_err(|e| SyntaxError::new(line_span, e.to_string()))?;
        properties.push(prop);
    }

    ContextSchema::new(properties).map_err(|e| {
        SyntaxError::new(SourceSpan::new(1, 1, 0), e.to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn parses_single_property_line() {
        let schema =
            parse_schema("property LOAD : int [0,100] levels { low: [0,49], high: [50,100] }")
                .unwrap();
        assert_eq!(schema.properties.len(), 1);
        let p = &schema.properties[0];
        assert_eq!(p.name, "LOAD");
        assert_eq!((p.lower, p.upper), (0, 100));
        assert_eq!(p.levels.len(), 2);
        assert_eq!(p.levels[0], Level { name: "low".into(), lo: 0, hi: 49 });
        assert_eq!(p.levels[1], Level { name: "high".into(), lo: 50, hi: 100 });
    }

    #[test]
    fn overlapping_levels_rejected() {
        let err =
            parse_schema("property p : int [0,100] levels { low: [0,40], high: [39,100] }")
                .unwrap_err();
        assert!(err.message.contains("overlapping levels at 39..40"), "{err}");
    }

    #[test]
    fn gap_rejected() {
        let err =
            parse_schema("property p : int [0,100] levels { low: [0,40], high: [42,100] }")
                .unwrap_err();
        assert!(err.message.contains("gap at 41..41"), "{err}");
    }

    #[test]
    fn webserver_schema_order_is_load_then_requestdensity() {
        let schema = parse_schema(corpus::WEBSERVER_SCHEMA).unwrap();
        let names: Vec<_> = schema.properties.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, vec!["LOAD", "requestdensity"]);
        let rd = schema.property("requestdensity").unwrap();
        assert_eq!(rd.levels.len(), 3);
        assert_eq!(rd.level_of(33), Some("low"));
        assert_eq!(rd.level_of(34), Some("medium"));
        assert_eq!(rd.level_of(67), Some("high"));
    }

    #[test]
    fn empty_schema_rejected() {
        assert!(parse_schema("").is_err());
        assert!(parse_schema("# nothing here\n").is_err());
    }

    #[test]
    fn negative_bounds_supported() {
        let schema =
            parse_schema("property t : int [-10,10] levels { cold: [-10,-1], warm: [0,10] }")
                .unwrap();
        assert_eq!(schema.properties[0].lower, -10);
        assert_eq!(schema.properties[0].level_of(-3), Some("cold"));
    }

    #[test]
    fn duplicate_property_rejected() {
        let text = "property a : int [0,1] levels { x: [0,1] }\nproperty a : int [0,1] levels { x: [0,1] }";
        let err = parse_schema(text).unwrap_err();
        assert!(err.message.contains("duplicate property"), "{err}");
    }

    #[test]
    fn trailing_tokens_rejected() {
        let err = parse_schema("property a : int [0,1] levels { x: [0,1] } extra").unwrap_err();
        assert!(err.message.contains("expected end of line"), "{err}");
    }
}

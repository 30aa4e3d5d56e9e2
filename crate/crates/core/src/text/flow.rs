//! Parser and serializer for `.flow` context flow files: one instance per
//! line, comma-separated integers in schema property order. Parsed flows
//! are validated against the schema; the first violation is reported as a
//! syntax error at the offending line.

use crate::model::{validate_flow, ContextFlow, ContextInstance, ContextSchema};

use super::{SourceSpan, SyntaxError};

pub fn parse_flow(text: &str, schema: &ContextSchema) -> Result<ContextFlow, SyntaxError> {
    let mut instances = Vec::new();
    let mut lines = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = (i + 1) as u32;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        if line.trim().is_empty() {
            continue;
        }
        let span = SourceSpan::new(line_no, 1, raw_line.chars().count() as u32);
        let mut values = Vec::new();
        for field in line.split(',') {
            let value: i64 = field.trim().parse().map_err(|_| {
                SyntaxError::new(span, format!("invalid integer {:?}", field.trim()))
            })?;
            values.push(value);
        }
        instances.push(ContextInstance::new(values));
        lines.push(line_no);
    }
    let flow = ContextFlow::new(instances);
    let report = validate_flow(&flow, schema);
    if let Some(v) = report.violations.first() {
        let line_no = v.index.map(|i| lines[i]).unwrap_or(1);
        return Err(SyntaxError::new(
            SourceSpan::new(line_no, 1, 0),
            v.message.clone(),
        ));
    }
    Ok(flow)
}

/// One line per instance, values comma-separated, LF line endings. The
/// empty flow serializes to the empty string.
pub fn serialize_flow(flow: &ContextFlow) -> String {
    let mut out = String::new();
    for inst in &flow.instances {
        let line: Vec<String> = inst.values.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn parses_two_instances() {
        let schema = corpus::webserver_schema();
        let flow = parse_flow("12,3\n80,3", &schema).unwrap();
        assert_eq!(flow.len(), 2);
        assert_eq!(flow.instances[0].values, vec![12, 3]);
        assert_eq!(flow.instances[1].values, vec![80, 3]);
    }

    #[test]
    fn empty_text_gives_empty_flow() {
        let schema = corpus::webserver_schema();
        assert!(parse_flow("", &schema).unwrap().is_empty());
    }

    #[test]
    fn consecutive_duplicates_rejected() {
        let schema = corpus::webserver_schema();
        let err = parse_flow("12,3\n12,3", &schema).unwrap_err();
        assert!(err.message.contains("consecutive instances identical"), "{err}");
        assert_eq!(err.span.line, 2);
    }

    #[test]
    fn out_of_bounds_rejected() {
        let schema = corpus::webserver_schema();
        let err = parse_flow("101,3", &schema).unwrap_err();
        assert!(err.message.contains("value 101 out of bounds"), "{err}");
    }

    #[test]
    fn comments_and_blanks_skipped() {
        let schema = corpus::webserver_schema();
        let flow = parse_flow("# header\n12,3\n\n80,3 # trailing\n", &schema).unwrap();
        assert_eq!(flow.len(), 2);
    }

    #[test]
    fn round_trips() {
        let schema = corpus::webserver_schema();
        let flow = parse_flow("12,3\n80,3\n0,100\n", &schema).unwrap();
        let text = serialize_flow(&flow);
        assert_eq!(text, "12,3\n80,3\n0,100\n");
        assert_eq!(parse_flow(&text, &schema).unwrap(), flow);
    }
}

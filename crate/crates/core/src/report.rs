//! Analysis report rendering.
//!
//! - `text`: a short table with minimum/maximum/average mutation score
//!   rows, per-operator kill rates and the survivor list.
//! - `json`: the full report plus the kill matrix in one document with
//!   stable field names.
//! - `csv`: the kill matrix in long form, one row per (mutant, flow) cell,
//!   with headers `mutant_id,operator,suite,flow,killed,first_divergence_step`.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::{AnalysisReport, KillMatrix, Score};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format {other:?} (expected text, json or csv)")),
        }
    }
}

/// Render the analysis in the requested format.
pub fn render(report: &AnalysisReport, matrix: &KillMatrix, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(report),
        ReportFormat::Json => render_json(report, matrix),
        ReportFormat::Csv => render_csv(matrix),
    }
}

fn fmt_score(score: Score) -> String {
    match score.value() {
        None => "n/a".to_string(),
        Some(v) => format!("{}/{} (~{:.0}%)", score.num, score.den, v * 100.0),
    }
}

/// Average score printed per suite: kills averaged over suites, against
/// the mutant total, e.g. "10.5/14".
fn fmt_avg(score: Score, suite_count: usize, mutant_count: usize) -> String {
    match score.value() {
        None => "n/a".to_string(),
        Some(v) => {
            let mean_kills = score.num as f64 / suite_count as f64;
            let mut num = format!("{mean_kills:.2}");
            while num.ends_with('0') {
                num.pop();
            }
            if num.ends_with('.') {
                num.pop();
            }
            format!("{num}/{mutant_count} (~{:.0}%)", v * 100.0)
        }
    }
}

fn render_text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "mutation analysis: {} mutants, {} suites",
        report.mutant_count, report.suite_count
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "minimum mutation score   {}", fmt_score(report.min_score));
    let _ = writeln!(out, "maximum mutation score   {}", fmt_score(report.max_score));
    let _ = writeln!(
        out,
        "average mutation score   {}",
        fmt_avg(report.avg_score, report.suite_count, report.mutant_count)
    );
    if !report.per_operator.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "per-operator kills:");
        for op in &report.per_operator {
            let _ = writeln!(out, "  {:<5} {}/{}", op.operator.name(), op.killed, op.total);
        }
    }
    let _ = writeln!(out);
    if report.survivors.is_empty() {
        let _ = writeln!(out, "survivors: none");
    } else {
        let _ = writeln!(out, "survivors ({}):", report.survivors.len());
        for s in &report.survivors {
            let _ = writeln!(out, "  {:<9} {}", s.id, s.params);
        }
    }
    out
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    #[serde(flatten)]
    report: &'a AnalysisReport,
    matrix: &'a KillMatrix,
}

fn render_json(report: &AnalysisReport, matrix: &KillMatrix) -> String {
    serde_json::to_string_pretty(&JsonDocument { report, matrix })
        .expect("report serialization cannot fail")
}

fn render_csv(matrix: &KillMatrix) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["mutant_id", "operator", "suite", "flow", "killed", "first_divergence_step"])
        .expect("csv header");
    for row in &matrix.rows {
        for (cell, col) in row.cells.iter().zip(&matrix.columns) {
            writer
                .write_record([
                    row.mutant_id.as_str(),
                    row.operator.name(),
                    &col.suite.to_string(),
                    &col.flow.to_string(),
                    if cell.is_some() { "true" } else { "false" },
                    &cell.map(|s| s.to_string()).unwrap_or_default(),
                ])
                .expect("csv record");
        }
    }
    String::from_utf8(writer.into_inner().expect("csv flush")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{FlowRef, KillRow, OperatorScore, SuiteScore, Survivor};
    use crate::mutation::{MutantParams, MutationOperator};

    // Shapes mirroring the published experiment: 30 suites over a
    // 130-mutant set with min 91, max 96, avg 93 kills.
    fn sample_report() -> AnalysisReport {
        let per_suite: Vec<SuiteScore> = (0..30)
            .map(|suite| SuiteScore { suite, killed: 93, total: 130 })
            .collect();
        AnalysisReport {
            mutant_count: 130,
            suite_count: 30,
            per_suite,
            min_score: Score { num: 91, den: 130 },
            max_score: Score { num: 96, den: 130 },
            avg_score: Score { num: 93 * 30, den: 130 * 30 },
            per_operator: vec![OperatorScore {
                operator: MutationOperator::Icp,
                killed: 2,
                total: 2,
            }],
            survivors: vec![Survivor {
                id: "MRCV-001".into(),
                operator: MutationOperator::Mrcv,
                params: MutantParams::Mrcv {
                    rule: 2,
                    state_ref: "FileServers.size".into(),
                    old_value: 10,
                    new_value: 100,
                },
            }],
        }
    }

    fn empty_matrix() -> KillMatrix {
        KillMatrix { columns: vec![], rows: vec![] }
    }

    #[test]
    fn text_report_has_min_max_avg_rows() {
        let text = render(&sample_report(), &empty_matrix(), ReportFormat::Text);
        assert!(text.contains("minimum mutation score   91/130 (~70%)"), "{text}");
        assert!(text.contains("maximum mutation score   96/130 (~74%)"), "{text}");
        assert!(text.contains("average mutation score   93/130 (~72%)"), "{text}");
        assert!(text.contains("survivors (1):"), "{text}");
        assert!(text.contains("MRCV-001"), "{text}");
    }

    #[test]
    fn empty_analysis_renders_na() {
        let report = AnalysisReport {
            mutant_count: 0,
            suite_count: 0,
            per_suite: vec![],
            min_score: Score { num: 0, den: 0 },
            max_score: Score { num: 0, den: 0 },
            avg_score: Score { num: 0, den: 0 },
            per_operator: vec![],
            survivors: vec![],
        };
        let text = render(&report, &empty_matrix(), ReportFormat::Text);
        assert!(text.contains("minimum mutation score   n/a"), "{text}");
        assert!(text.contains("average mutation score   n/a"), "{text}");
    }

    fn sample_matrix() -> KillMatrix {
        KillMatrix {
            columns: vec![FlowRef { suite: 0, flow: 0 }, FlowRef { suite: 0, flow: 1 }],
            rows: vec![
                KillRow {
                    mutant_id: "ICP-001".into(),
                    operator: MutationOperator::Icp,
                    cells: vec![Some(0), None],
                },
                KillRow {
                    mutant_id: "SRA-002, tricky \"quoted\"".into(),
                    operator: MutationOperator::Sra,
                    cells: vec![None, Some(3)],
                },
            ],
        }
    }

    #[test]
    fn csv_round_trips_through_a_generic_parser() {
        let csv_text = render(&sample_report(), &sample_matrix(), ReportFormat::Csv);
        let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
        let headers = reader.headers().unwrap().clone();
        assert_eq!(
            headers.iter().collect::<Vec<_>>(),
            vec!["mutant_id", "operator", "suite", "flow", "killed", "first_divergence_step"]
        );
        let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(records.len(), 4);
        assert_eq!(&records[0][0], "ICP-001");
        assert_eq!(&records[0][4], "true");
        assert_eq!(&records[0][5], "0");
        assert_eq!(&records[1][4], "false");
        assert_eq!(&records[1][5], "");
        // quoting survives a field with comma and quotes
        assert_eq!(&records[2][0], "SRA-002, tricky \"quoted\"");
    }

    #[test]
    fn json_carries_report_and_matrix() {
        let json = render(&sample_report(), &sample_matrix(), ReportFormat::Json);
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(doc["mutant_count"], 130);
        assert_eq!(doc["min_score"]["num"], 91);
        assert_eq!(doc["matrix"]["rows"][0]["mutant_id"], "ICP-001");
        assert_eq!(doc["matrix"]["rows"][0]["cells"][0], 0);
        assert_eq!(doc["matrix"]["rows"][0]["cells"][1], serde_json::Value::Null);
        assert_eq!(doc["survivors"][0]["id"], "MRCV-001");
        assert_eq!(doc["per_suite"][0]["killed"], 93);
    }

    #[test]
    fn format_parses_from_str() {
        assert_eq!("text".parse::<ReportFormat>().unwrap(), ReportFormat::Text);
        assert_eq!("JSON".parse::<ReportFormat>().unwrap(), ReportFormat::Json);
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}

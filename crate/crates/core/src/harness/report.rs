use std::fmt::Write;

use serde::Serialize;

use crate::bounds::{BoundReport, BoundStatus};

use super::{OutputFormat, SuiteResult};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub curves: usize,
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    /// Largest Szpiro ratio seen, if any curve got that far.
    pub max_sigma: Option<f64>,
}

impl Summary {
    pub fn of(reports: &[BoundReport], curves: usize, max_sigma: Option<f64>) -> Self {
        let count = |s| reports.iter().filter(|r| r.status == s).count();
        Summary {
            curves,
            pass: count(BoundStatus::Pass),
            fail: count(BoundStatus::Fail),
            skipped: count(BoundStatus::Skipped),
            max_sigma,
        }
    }
}

#[derive(Serialize)]
struct SummaryLine<'a> {
    summary: &'a Summary,
}

const TSV_HEADER: &str = "label\tcheck\tplace\tlhs\trhs\tmargin\tstatus\tcontext";

/// Reports in their stored order, one per line, then a summary line.
pub fn emit_report(result: &SuiteResult, format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Json => {
            for r in &result.reports {
                out.push_str(&serde_json::to_string(r).expect("reports serialize"));
                out.push('\n');
            }
            let line = SummaryLine {
                summary: &result.summary,
            };
            out.push_str(&serde_json::to_string(&line).expect("summary serializes"));
            out.push('\n');
        }
        OutputFormat::Tsv => {
            out.push_str(TSV_HEADER);
            out.push('\n');
            for r in &result.reports {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.label, r.check, r.place, r.lhs, r.rhs, r.margin, r.status, r.context
                );
            }
            let s = &result.summary;
            let sigma = s.max_sigma.map_or_else(|| "-".to_string(), |v| v.to_string());
            let _ = writeln!(
                out,
                "# summary\tcurves={}\tpass={}\tfail={}\tskipped={}\tmax_sigma={sigma}",
                s.curves, s.pass, s.fail, s.skipped
            );
        }
    }
    out
}

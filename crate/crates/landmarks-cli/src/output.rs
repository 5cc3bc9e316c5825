//! Deterministic text output: every number is rendered with 17 significant
//! digits so identical invocations produce byte-identical files.

use std::io::Write;
use std::path::Path;

use landmarks::curvature::CurvatureReport;

use crate::CliError;

pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `numerator/denominator` only when the section is non-degenerate,
/// otherwise the JSON null literal.
pub fn fmt_sectional(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt17(x),
        None => "null".to_string(),
    }
}

pub fn report_json(report: &CurvatureReport) -> String {
    format!(
        "{{\"r1\":{},\"r2\":{},\"r3\":{},\"r4\":{},\"numerator\":{},\"denominator\":{},\"sectional\":{}}}",
        fmt17(report.r1),
        fmt17(report.r2),
        fmt17(report.r3),
        fmt17(report.r4),
        fmt17(report.numerator),
        fmt17(report.denominator),
        fmt_sectional(report.sectional),
    )
}

/// Write to `--out` when given, stdout otherwise.
pub fn write_text(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| CliError::input(format!("stdout write failed: {e}"))),
    }
}

pub struct CsvBuilder {
    buf: String,
}

impl CsvBuilder {
    pub fn new(header: &[String]) -> Self {
        CsvBuilder {
            buf: header.join(",") + "\n",
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        let mut first = true;
        for v in values {
            if !first {
                self.buf.push(',');
            }
            self.buf.push_str(&fmt17(*v));
            first = false;
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

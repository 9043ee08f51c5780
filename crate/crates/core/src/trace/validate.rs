use std::fmt;
use std::io::Read;

use serde::Serialize;

use super::format::{open_lines, raw_lines};
use super::{Direction, EventKind, FrameworkPrefixes, ReturnKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub line: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: line {}", self.line)?;
        if let Some(seq) = self.seq {
            write!(f, " (seq {seq})")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub events: usize,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    pub fn is_clean(&self) -> bool {
        self.errors().next().is_none()
    }
}

/// Checks every trace invariant, collecting violations instead of stopping at
/// the first one. Unclosed begin events at the end of the trace are warnings:
/// a crash truncates the failure trace.
///
/// Only unreadable input and lines that are not trace records at all are
/// returned as errors.
pub fn validate_trace<R: Read>(input: R, prefixes: &FrameworkPrefixes, root: &str) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let mut open: Vec<(String, u64)> = Vec::new();
    let mut last_seq: Option<u64> = None;
    let mut last_line = 0;

    for item in raw_lines(open_lines(input)?) {
        let (line, raw) = item?;
        last_line = line;
        if raw.meta.is_some() {
            if report.events > 0 {
                report.push(Severity::Error, line, None, "metadata line after events".into());
            }
            continue;
        }
        let (Some(seq), Some(kind), Some(method), Some(dir)) = (raw.seq, raw.kind, raw.method, raw.dir) else {
            return Err(Error::Parse {
                line,
                reason: "record lacks one of `seq`, `kind`, `method`, `dir`".into(),
            });
        };
        report.events += 1;
        let mut err = |msg: String| {
            report.findings.push(Finding {
                severity: Severity::Error,
                line,
                seq: Some(seq),
                message: msg,
            })
        };

        if let Some(prev) = last_seq {
            if seq <= prev {
                err(format!("seq {seq} does not follow seq {prev}"));
            }
        }
        last_seq = Some(seq);

        if method.is_empty() || !method.contains('.') {
            err(format!("method `{method}` is not fully qualified"));
        }
        let origin = prefixes.classify(&method);
        if origin != dir.expected_origin() {
            let dir_name = match dir {
                Direction::ApiCall => "an API call",
                Direction::Callback => "a callback",
            };
            err(format!("`{method}` is {origin:?}-origin but recorded as {dir_name}"));
        }
        if let Some(ret) = &raw.ret {
            if kind == EventKind::Begin {
                err("return value on a begin event".into());
            }
            if ret.k == ReturnKind::Void && !ret.v.is_empty() {
                err("void return value carries a repr".into());
            }
        }
        if let Some(stack) = &raw.stack {
            if kind == EventKind::End {
                err("stack snapshot on an end event".into());
            }
            match stack.first() {
                None => err("empty stack snapshot".into()),
                Some(first) if first != root => err(format!("stack starts at `{first}`, expected root `{root}`")),
                Some(_) => {}
            }
        }

        match kind {
            EventKind::Begin => open.push((method, seq)),
            EventKind::End => match open.iter().rposition(|(m, _)| *m == method) {
                None => err(format!("end of `{method}` without a matching begin")),
                Some(pos) => {
                    if pos + 1 != open.len() {
                        let (inner, inner_seq) = &open[open.len() - 1];
                        err(format!(
                            "end of `{method}` while `{inner}` (seq {inner_seq}) is still open"
                        ));
                    }
                    open.truncate(pos);
                }
            },
        }
    }

    if !open.is_empty() {
        let (method, seq) = &open[0];
        report.push(
            Severity::Warning,
            last_line,
            None,
            format!(
                "{} begin event(s) never closed, outermost `{method}` at seq {seq} (truncated trace?)",
                open.len()
            ),
        );
    }
    Ok(report)
}

impl ValidationReport {
    fn push(&mut self, severity: Severity, line: usize, seq: Option<u64>, message: String) {
        self.findings.push(Finding {
            severity,
            line,
            seq,
            message,
        });
    }
}

//! Line-oriented JSON trace files.
//!
//! One event per line:
//!
//! ```text
//! {"seq":0,"kind":"b","method":"org.x.MainActivity.onCreate","dir":"cb","stack":["com.android.internal.os.ZygoteInit.main","org.x.MainActivity.onCreate"]}
//! {"seq":1,"kind":"e","method":"org.x.MainActivity.onCreate","dir":"cb","ret":{"k":"void","v":""}}
//! ```
//!
//! An optional first line `{"meta":{...}}` carries trace metadata. Files may be
//! gzip-compressed.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};

use super::{
    Direction, EventKind, FrameworkPrefixes, MethodId, ReturnKind, ReturnValue, StackSnapshot, Trace, TraceEvent,
    TraceLabel,
};
use crate::error::{Error, Result};

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct RawReturn {
    pub k: ReturnKind,
    #[serde(default)]
    pub v: String,
}

/// A trace line before any invariant is checked.
#[derive(Debug, Default, Deserialize)]
pub(crate) struct RawLine {
    pub meta: Option<BTreeMap<String, String>>,
    pub seq: Option<u64>,
    pub kind: Option<EventKind>,
    pub method: Option<String>,
    pub sig: Option<String>,
    pub dir: Option<Direction>,
    pub ret: Option<RawReturn>,
    pub stack: Option<Vec<String>>,
}

#[derive(Serialize)]
struct OutLine<'a> {
    seq: u64,
    kind: EventKind,
    method: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    sig: Option<&'a str>,
    dir: Direction,
    #[serde(skip_serializing_if = "Option::is_none")]
    ret: Option<RawReturn>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stack: Option<Vec<&'a str>>,
}

#[derive(Serialize)]
struct MetaLine<'a> {
    meta: &'a BTreeMap<String, String>,
}

/// Opens `input`, transparently inflating gzip streams.
pub(crate) fn open_lines<'a, R: Read + 'a>(input: R) -> Result<Box<dyn BufRead + 'a>> {
    let mut reader = BufReader::new(input);
    let head = reader.fill_buf()?;
    if head.len() >= 2 && head[..2] == GZIP_MAGIC {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(reader))))
    } else {
        Ok(Box::new(reader))
    }
}

/// Iterates over non-blank lines with their 1-based line numbers.
pub(crate) fn raw_lines<'a>(reader: Box<dyn BufRead + 'a>) -> impl Iterator<Item = Result<(usize, RawLine)>> + 'a {
    reader.lines().enumerate().filter_map(|(idx, line)| {
        let line_no = idx + 1;
        match line {
            Err(e) => Some(Err(Error::Parse {
                line: line_no,
                reason: e.to_string(),
            })),
            Ok(text) if text.trim().is_empty() => None,
            Ok(text) => Some(
                serde_json::from_str::<RawLine>(&text)
                    .map(|raw| (line_no, raw))
                    .map_err(|e| Error::Parse {
                        line: line_no,
                        reason: e.to_string(),
                    }),
            ),
        }
    })
}

/// Interns method names so repeated frames share one allocation.
struct MethodCache<'p> {
    prefixes: &'p FrameworkPrefixes,
    by_name: HashMap<String, MethodId>,
}

impl<'p> MethodCache<'p> {
    fn new(prefixes: &'p FrameworkPrefixes) -> Self {
        Self {
            prefixes,
            by_name: HashMap::new(),
        }
    }

    fn get(&mut self, name: &str) -> Result<MethodId> {
        if let Some(m) = self.by_name.get(name) {
            return Ok(m.clone());
        }
        let m = MethodId::classified(name, self.prefixes)?;
        self.by_name.insert(name.to_string(), m.clone());
        Ok(m)
    }
}

fn missing(line: usize, field: &str) -> Error {
    Error::Parse {
        line,
        reason: format!("missing field `{field}`"),
    }
}

/// Parses a trace file. Empty input yields a trace with no events.
pub fn parse_trace<R: Read>(input: R, label: TraceLabel, prefixes: &FrameworkPrefixes) -> Result<Trace> {
    let mut cache = MethodCache::new(prefixes);
    let mut sig_cache: HashMap<String, Arc<str>> = HashMap::new();
    let mut events: Vec<TraceEvent> = Vec::new();
    let mut metadata = BTreeMap::new();

    for item in raw_lines(open_lines(input)?) {
        let (line, raw) = item?;
        if let Some(meta) = raw.meta {
            if !events.is_empty() || !metadata.is_empty() {
                return Err(Error::Parse {
                    line,
                    reason: "metadata line must come first".into(),
                });
            }
            metadata = meta;
            continue;
        }
        let seq = raw.seq.ok_or_else(|| missing(line, "seq"))?;
        let kind = raw.kind.ok_or_else(|| missing(line, "kind"))?;
        let name = raw.method.ok_or_else(|| missing(line, "method"))?;
        let dir = raw.dir.ok_or_else(|| missing(line, "dir"))?;

        let at_line = |e: Error| match e {
            Error::Structural(reason) => Error::Parse { line, reason },
            other => other,
        };

        let mut method = cache.get(&name).map_err(at_line)?;
        if let Some(sig) = raw.sig {
            let sig = sig_cache
                .entry(sig)
                .or_insert_with_key(|s| Arc::from(s.as_str()))
                .clone();
            method = MethodId::new(method.name.clone(), Some(sig), method.origin).map_err(at_line)?;
        }
        let ret = raw
            .ret
            .map(|r| ReturnValue::new(r.k, r.v))
            .transpose()
            .map_err(at_line)?;
        let stack = raw
            .stack
            .map(|frames| {
                let frames = frames.iter().map(|f| cache.get(f)).collect::<Result<Vec<_>>>()?;
                StackSnapshot::new(frames)
            })
            .transpose()
            .map_err(at_line)?;

        if let Some(prev) = events.last() {
            if seq <= prev.seq {
                return Err(Error::Structural(format!(
                    "line {line}: seq {seq} does not follow seq {}",
                    prev.seq
                )));
            }
        }
        events.push(TraceEvent::new(seq, kind, method, dir, ret, stack).map_err(at_line)?);
    }

    Ok(Trace {
        events,
        label,
        metadata,
    })
}

pub fn read_trace_file(path: &Path, label: TraceLabel, prefixes: &FrameworkPrefixes) -> Result<Trace> {
    parse_trace(File::open(path)?, label, prefixes)
}

pub fn write_trace<W: Write>(trace: &Trace, mut out: W) -> Result<()> {
    if !trace.metadata.is_empty() {
        serde_json::to_writer(&mut out, &MetaLine { meta: &trace.metadata })?;
        out.write_all(b"\n")?;
    }
    for ev in &trace.events {
        let line = OutLine {
            seq: ev.seq,
            kind: ev.kind,
            method: ev.method.name(),
            sig: ev.method.signature(),
            dir: ev.direction,
            ret: ev.return_value.as_ref().map(|r| RawReturn {
                k: r.kind,
                v: r.repr.clone(),
            }),
            stack: ev.stack.as_ref().map(|s| s.frames.iter().map(MethodId::name).collect()),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn serialize_trace(trace: &Trace) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trace(trace, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

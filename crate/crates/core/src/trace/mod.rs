//! Boundary-call trace model.
//!
//! A trace is the interleaved sequence of API calls (application code calling
//! into the framework) and callbacks (framework calling into application code)
//! recorded while one test runs. Every call contributes a begin event and,
//! unless the process died first, an end event.

mod builder;
mod format;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use builder::TraceBuilder;
pub use format::{parse_trace, read_trace_file, serialize_trace, write_trace};
pub use validate::{validate_trace, Finding, Severity, ValidationReport};

/// Package prefixes used when no explicit list is configured.
pub const DEFAULT_FRAMEWORK_PREFIXES: &[&str] =
    &["android.", "androidx.", "java.", "javax.", "kotlin.", "com.android."];

/// Process-entry method every collected stack starts from.
pub const DEFAULT_ROOT: &str = "com.android.internal.os.ZygoteInit.main";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Application,
    Framework,
}

/// Framework if `name` starts with any of `prefixes`, application otherwise.
pub fn classify_origin<S: AsRef<str>>(name: &str, prefixes: &[S]) -> Origin {
    if prefixes.iter().any(|p| name.starts_with(p.as_ref())) {
        Origin::Framework
    } else {
        Origin::Application
    }
}

/// Ordered list of package prefixes identifying framework methods.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameworkPrefixes(Vec<String>);

impl FrameworkPrefixes {
    pub fn new<I, S>(prefixes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let list: Vec<String> = prefixes.into_iter().map(Into::into).filter(|p| !p.is_empty()).collect();
        if list.is_empty() {
            return Err(Error::Parameter("framework prefix list is empty".into()));
        }
        Ok(Self(list))
    }

    /// Parses a comma-separated list such as `android.,java.`.
    pub fn parse_list(list: &str) -> Result<Self> {
        Self::new(list.split(',').map(str::trim))
    }

    pub fn classify(&self, name: &str) -> Origin {
        classify_origin(name, &self.0)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }
}

impl Default for FrameworkPrefixes {
    fn default() -> Self {
        Self(DEFAULT_FRAMEWORK_PREFIXES.iter().map(|s| s.to_string()).collect())
    }
}

/// A fully-qualified method (`package.Class.method`) plus optional signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodId {
    name: Arc<str>,
    signature: Option<Arc<str>>,
    origin: Origin,
}

impl MethodId {
    pub fn new(name: impl Into<Arc<str>>, signature: Option<Arc<str>>, origin: Origin) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || !name.contains('.') {
            return Err(Error::Structural(format!(
                "method name `{name}` is not fully qualified"
            )));
        }
        Ok(Self {
            name,
            signature,
            origin,
        })
    }

    /// Builds a method id whose origin comes from `prefixes`.
    pub fn classified(name: &str, prefixes: &FrameworkPrefixes) -> Result<Self> {
        Self::new(name, None, prefixes.classify(name))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn signature(&self) -> Option<&str> {
        self.signature.as_deref()
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn is_framework(&self) -> bool {
        self.origin == Origin::Framework
    }

    /// `org.x.MainActivity$1` for `org.x.MainActivity$1.onLocationChanged`.
    pub fn class_name(&self) -> &str {
        self.name.rsplit_once('.').map_or(&self.name, |(class, _)| class)
    }

    /// Outermost class when the declaring class is nested or anonymous.
    pub fn enclosing_class(&self) -> Option<&str> {
        let class = self.class_name();
        class.split_once('$').map(|(outer, _)| outer)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(sig) = &self.signature {
            write!(f, "({sig})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "b")]
    Begin,
    #[serde(rename = "e")]
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "api")]
    ApiCall,
    #[serde(rename = "cb")]
    Callback,
}

impl Direction {
    /// The origin a method must have to be reached through this direction.
    pub fn expected_origin(self) -> Origin {
        match self {
            Direction::ApiCall => Origin::Framework,
            Direction::Callback => Origin::Application,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Direction::ApiCall => "api",
            Direction::Callback => "cb",
        }
    }
}

/// How a return value was rendered by the tracer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReturnKind {
    #[serde(rename = "prim")]
    Primitive,
    #[serde(rename = "str")]
    ToString,
    #[serde(rename = "type")]
    DynamicTypeOnly,
    #[serde(rename = "void")]
    Void,
}

impl ReturnKind {
    fn tag(self) -> &'static str {
        match self {
            ReturnKind::Primitive => "prim",
            ReturnKind::ToString => "str",
            ReturnKind::DynamicTypeOnly => "type",
            ReturnKind::Void => "void",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReturnValue {
    kind: ReturnKind,
    repr: String,
}

impl ReturnValue {
    pub fn new(kind: ReturnKind, repr: impl Into<String>) -> Result<Self> {
        let repr = repr.into();
        if kind == ReturnKind::Void && !repr.is_empty() {
            return Err(Error::Structural("void return value carries a repr".into()));
        }
        Ok(Self { kind, repr })
    }

    pub fn void() -> Self {
        Self {
            kind: ReturnKind::Void,
            repr: String::new(),
        }
    }

    pub fn primitive(repr: impl Into<String>) -> Self {
        Self {
            kind: ReturnKind::Primitive,
            repr: repr.into(),
        }
    }

    pub fn to_string_repr(repr: impl Into<String>) -> Self {
        Self {
            kind: ReturnKind::ToString,
            repr: repr.into(),
        }
    }

    pub fn dynamic_type(repr: impl Into<String>) -> Self {
        Self {
            kind: ReturnKind::DynamicTypeOnly,
            repr: repr.into(),
        }
    }

    pub fn kind(&self) -> ReturnKind {
        self.kind
    }

    pub fn repr(&self) -> &str {
        &self.repr
    }
}

/// Call stack captured at a begin event, outermost frame first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StackSnapshot {
    frames: Vec<MethodId>,
}

impl StackSnapshot {
    pub fn new(frames: Vec<MethodId>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Structural("empty stack snapshot".into()));
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[MethodId] {
        &self.frames
    }

    pub fn root(&self) -> &MethodId {
        &self.frames[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    seq: u64,
    kind: EventKind,
    method: MethodId,
    direction: Direction,
    return_value: Option<ReturnValue>,
    stack: Option<StackSnapshot>,
}

impl TraceEvent {
    pub fn new(
        seq: u64,
        kind: EventKind,
        method: MethodId,
        direction: Direction,
        return_value: Option<ReturnValue>,
        stack: Option<StackSnapshot>,
    ) -> Result<Self> {
        if return_value.is_some() && kind != EventKind::End {
            return Err(Error::Structural(format!("seq {seq}: return value on a begin event")));
        }
        if stack.is_some() && kind != EventKind::Begin {
            return Err(Error::Structural(format!("seq {seq}: stack snapshot on an end event")));
        }
        if method.origin() != direction.expected_origin() {
            return Err(Error::Structural(format!(
                "seq {seq}: `{}` is {:?}-origin but recorded as a {} event \
                 (check the framework prefix list)",
                method.name(),
                method.origin(),
                direction.tag()
            )));
        }
        Ok(Self {
            seq,
            kind,
            method,
            direction,
            return_value,
            stack,
        })
    }

    pub fn begin(seq: u64, method: MethodId, direction: Direction, stack: Option<StackSnapshot>) -> Result<Self> {
        Self::new(seq, EventKind::Begin, method, direction, None, stack)
    }

    pub fn end(seq: u64, method: MethodId, direction: Direction, ret: Option<ReturnValue>) -> Result<Self> {
        Self::new(seq, EventKind::End, method, direction, ret, None)
    }

    pub fn seq(&self) -> u64 {
        self.seq
    }

    pub fn kind(&self) -> EventKind {
        self.kind
    }

    pub fn is_begin(&self) -> bool {
        self.kind == EventKind::Begin
    }

    pub fn method(&self) -> &MethodId {
        &self.method
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn return_value(&self) -> Option<&ReturnValue> {
        self.return_value.as_ref()
    }

    pub fn stack(&self) -> Option<&StackSnapshot> {
        self.stack.as_ref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceLabel {
    Baseline,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    events: Vec<TraceEvent>,
    label: TraceLabel,
    metadata: BTreeMap<String, String>,
}

impl Trace {
    pub fn new(label: TraceLabel, events: Vec<TraceEvent>) -> Result<Self> {
        if let Some(w) = events.windows(2).find(|w| w[0].seq >= w[1].seq) {
            return Err(Error::Structural(format!("seq {} follows seq {}", w[1].seq, w[0].seq)));
        }
        Ok(Self {
            events,
            label,
            metadata: BTreeMap::new(),
        })
    }

    pub fn empty(label: TraceLabel) -> Self {
        Self {
            events: Vec::new(),
            label,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, metadata: BTreeMap<String, String>) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn label(&self) -> TraceLabel {
        self.label
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }
}

/// Which event fields define line identity for the diff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyPolicy {
    #[default]
    Full,
    NoReturn,
}

impl std::str::FromStr for KeyPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(KeyPolicy::Full),
            "no_return" | "no-return" => Ok(KeyPolicy::NoReturn),
            other => Err(Error::Parameter(format!("unknown key policy `{other}`"))),
        }
    }
}

/// Line identity of `event` as seen by the diff, e.g. `b|api|android.app.Dialog.cancel`.
pub fn diff_key(event: &TraceEvent, policy: KeyPolicy) -> String {
    let kind = match event.kind {
        EventKind::Begin => 'b',
        EventKind::End => 'e',
    };
    let mut key = format!("{kind}|{}|{}", event.direction.tag(), event.method);
    if policy == KeyPolicy::Full {
        if let Some(ret) = &event.return_value {
            key.push('|');
            key.push_str(ret.kind.tag());
            key.push(':');
            key.push_str(&ret.repr);
        }
    }
    key
}

use std::collections::HashMap;

use super::{
    Direction, EventKind, FrameworkPrefixes, MethodId, Origin, ReturnValue, StackSnapshot, Trace, TraceEvent,
    TraceLabel,
};
use crate::error::Result;

/// Appends events with consecutive sequence numbers. The direction of each
/// event follows the origin of its method.
#[derive(Debug)]
pub struct TraceBuilder {
    prefixes: FrameworkPrefixes,
    methods: HashMap<String, MethodId>,
    events: Vec<TraceEvent>,
    next_seq: u64,
}

impl TraceBuilder {
    pub fn new(prefixes: FrameworkPrefixes) -> Self {
        Self {
            prefixes,
            methods: HashMap::new(),
            events: Vec::new(),
            next_seq: 0,
        }
    }

    pub fn method(&mut self, name: &str) -> Result<MethodId> {
        if let Some(m) = self.methods.get(name) {
            return Ok(m.clone());
        }
        let m = MethodId::classified(name, &self.prefixes)?;
        self.methods.insert(name.to_string(), m.clone());
        Ok(m)
    }

    fn direction(method: &MethodId) -> Direction {
        match method.origin() {
            Origin::Framework => Direction::ApiCall,
            Origin::Application => Direction::Callback,
        }
    }

    /// Begin event for the last frame of `stack`, recording the stack.
    pub fn begin<S: AsRef<str>>(&mut self, stack: &[S]) -> Result<&mut Self> {
        let frames = stack
            .iter()
            .map(|f| self.method(f.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let method = frames.last().cloned().expect("stack has at least one frame");
        let snapshot = StackSnapshot::new(frames)?;
        self.push(EventKind::Begin, method, None, Some(snapshot))
    }

    /// Begin event without a stack snapshot.
    pub fn begin_bare(&mut self, name: &str) -> Result<&mut Self> {
        let method = self.method(name)?;
        self.push(EventKind::Begin, method, None, None)
    }

    pub fn end(&mut self, name: &str, ret: Option<ReturnValue>) -> Result<&mut Self> {
        let method = self.method(name)?;
        self.push(EventKind::End, method, ret, None)
    }

    /// A complete boundary call: begin with `stack`, then end.
    pub fn call<S: AsRef<str>>(&mut self, stack: &[S], ret: Option<ReturnValue>) -> Result<&mut Self> {
        let name = stack.last().expect("stack has at least one frame").as_ref().to_string();
        self.begin(stack)?;
        self.end(&name, ret)
    }

    fn push(
        &mut self,
        kind: EventKind,
        method: MethodId,
        ret: Option<ReturnValue>,
        stack: Option<StackSnapshot>,
    ) -> Result<&mut Self> {
        let dir = Self::direction(&method);
        let ev = TraceEvent::new(self.next_seq, kind, method, dir, ret, stack)?;
        self.next_seq += 1;
        self.events.push(ev);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn finish(self, label: TraceLabel) -> Trace {
        Trace {
            events: self.events,
            label,
            metadata: Default::default(),
        }
    }
}

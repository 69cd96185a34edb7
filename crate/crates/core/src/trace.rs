//! Trace sink for per-round protocol traces.
//!
//! Line format: `round <t> tx=<ids> rx=<node>:<M|C|S> ...`, with iteration
//! markers `iter t=<k> T=<2^k>` and reset markers `reset t=<k>` in between.
//! Sinks that report `enabled() == false` never see a line, and engines
//! skip formatting entirely.

use alloc::string::String;

pub trait TraceSink {
    fn enabled(&self) -> bool {
        true
    }
    fn line(&mut self, line: &str);
}

/// Discards everything; the default for quiet runs.
pub struct NullTrace;

impl TraceSink for NullTrace {
    fn enabled(&self) -> bool {
        false
    }
    fn line(&mut self, _line: &str) {}
}

/// Collects lines in memory, mostly for tests.
#[derive(Default)]
pub struct VecTrace {
    pub lines: alloc::vec::Vec<String>,
}

impl TraceSink for VecTrace {
    fn line(&mut self, line: &str) {
        self.lines.push(String::from(line));
    }
}

//! Optional line-oriented CSV trace of every simulated frame.

use std::io::Write;

use super::state::FrameReport;
use super::SimError;

pub struct FrameLog<W: Write> {
    out: W,
}

impl<W: Write> std::fmt::Debug for FrameLog<W> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("FrameLog")
    }
}

impl<W: Write> FrameLog<W> {
    pub fn new(mut out: W, groups: usize) -> Result<Self, SimError> {
        let mut header = String::from("frame,phase,stage");
        for g in 0..groups {
            header.push_str(&format!(",group{g}"));
        }
        header.push_str(",departures,omega");
        writeln!(out, "{header}")?;
        Ok(FrameLog { out })
    }

    pub fn write(&mut self, r: &FrameReport) -> Result<(), SimError> {
        let mut line = format!("{},{},{}", r.frame, r.phase, r.stage.as_str());
        for c in &r.group_counts {
            line.push_str(&format!(",{c}"));
        }
        line.push_str(&format!(",{},{}", r.departures, r.omega));
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

//! Machine-readable verification reports (JSON schema 1).

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Witnesses kept per check; the violation count is always exact.
pub const MAX_WITNESSES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    /// The claim quantifies over all dimensions and was verified up to the
    /// recorded bounds.
    BoundedPass,
    Fail,
}

impl Status {
    pub fn is_pass(self) -> bool {
        !matches!(self, Status::Fail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub description: String,
    /// Maps involved, in `dom->cod:[table]` form.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub maps: Vec<String>,
    /// A single CLI invocation that reproduces the failure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repro: Option<String>,
}

impl Witness {
    pub fn new(description: impl Into<String>) -> Self {
        Witness { description: description.into(), maps: Vec::new(), repro: None }
    }

    pub fn with_maps<I, T>(mut self, maps: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: ToString,
    {
        self.maps = maps.into_iter().map(|m| m.to_string()).collect();
        self
    }

    pub fn with_repro(mut self, repro: impl Into<String>) -> Self {
        self.repro = Some(repro.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<String>,
    pub status: Status,
    pub summary: String,
    /// Number of objects examined (maps, pairs, cells, ...).
    pub examined: u64,
    pub violations: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
    /// Informational findings that are not failures (e.g. expected non-split idempotents).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl Check {
    pub fn new(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            site: None,
            status: Status::Pass,
            summary: String::new(),
            examined: 0,
            violations: 0,
            witnesses: Vec::new(),
            notes: Vec::new(),
            elapsed_ms: None,
        }
    }

    pub fn for_site(mut self, site: impl ToString) -> Self {
        self.site = Some(site.to_string());
        self
    }

    pub fn violation(&mut self, w: Witness) {
        self.violations += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w);
        }
    }

    pub fn note(&mut self, w: Witness) {
        if self.notes.len() < MAX_WITNESSES {
            self.notes.push(w);
        }
    }

    /// Absorbs the counts and witnesses of a partial check over a sub-range.
    pub fn merge(&mut self, other: Check) {
        self.examined += other.examined;
        self.violations += other.violations;
        for w in other.witnesses {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        }
        for w in other.notes {
            self.note(w);
        }
    }

    /// Sets the status from the violation count.
    pub fn finish(mut self, bounded: bool, summary: impl Into<String>) -> Self {
        self.status = match (self.violations, bounded) {
            (0, false) => Status::Pass,
            (0, true) => Status::BoundedPass,
            _ => Status::Fail,
        };
        self.summary = summary.into();
        self
    }

    /// Runs `f` and records its wall-clock time.
    pub fn timed(f: impl FnOnce() -> Check) -> Check {
        let start = Instant::now();
        let mut c = f();
        c.elapsed_ms = Some(start.elapsed().as_millis() as u64);
        c
    }

    pub fn line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::BoundedPass => "PASS (bounded)",
            Status::Fail => "FAIL",
        };
        let site = self.site.as_deref().map(|s| format!(" [{s}]")).unwrap_or_default();
        format!("{tag:<14} {}{site}: {}", self.name, self.summary)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub tool_version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<String>,
    pub bounds: Bounds,
    pub status: Status,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: impl Into<String>, site: Option<String>, bounds: Bounds) -> Self {
        Report {
            schema: SCHEMA,
            tool_version: TOOL_VERSION.to_string(),
            command: command.into(),
            site,
            bounds,
            status: Status::Pass,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        if !check.status.is_pass() {
            self.status = Status::Fail;
        }
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.status.is_pass()
    }

    /// Drops wall-clock times so that reports compare byte-for-byte.
    pub fn strip_timings(&mut self) {
        for c in &mut self.checks {
            c.elapsed_ms = None;
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(s: &str) -> crate::Result<Report> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_violations() {
        let c = Check::new("a").finish(false, "ok");
        assert_eq!(c.status, Status::Pass);
        let c = Check::new("a").finish(true, "ok");
        assert_eq!(c.status, Status::BoundedPass);
        let mut c = Check::new("a");
        for k in 0..40 {
            c.violation(Witness::new(format!("w{k}")));
        }
        let c = c.finish(true, "bad");
        assert_eq!(c.status, Status::Fail);
        assert_eq!(c.violations, 40);
        assert_eq!(c.witnesses.len(), MAX_WITNESSES);
    }

    #[test]
    fn json_round_trip() {
        let mut r = Report::new("homs", Some("cs".into()), Bounds { max_dim: Some(3), ..Bounds::default() });
        let mut c = Check::new("x").for_site("cs");
        c.violation(Witness::new("bad").with_maps(["1->1:[1,0]"]).with_repro("cubeforge member --site cs --map 1->1:[1,0]"));
        r.push(c.finish(false, "one violation"));
        assert!(!r.passed());
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}

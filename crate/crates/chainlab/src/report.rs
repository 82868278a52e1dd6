//! Stable plain-text reports: `key: value` lines with two-space
//! indentation, fixed key order, LF endings. Identical spec and seed
//! yield byte-identical reports; the timing section is isolated at the
//! end so byte comparisons can strip it.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Partial,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Partial => "partial",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProbeRecord {
    pub kind: String,
    pub algebra: String,
    /// Echoed inputs, in spec order.
    pub inputs: Vec<(String, String)>,
    /// Computed outputs, in a fixed per-kind order.
    pub outputs: Vec<(String, String)>,
    pub status: Status,
    /// The probe demanded saturation and did not get it (exit 3).
    pub require_failed: bool,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub spec_name: String,
    pub seed: u64,
    pub algebras: Vec<(String, String)>,
    pub records: Vec<ProbeRecord>,
    /// Per-probe and total milliseconds; omitted from goldens.
    pub timing_ms: Option<(Vec<u128>, u128)>,
}

impl Report {
    pub fn passed(&self) -> usize {
        self.count(Status::Pass)
    }

    pub fn failed(&self) -> usize {
        self.count(Status::Fail)
    }

    pub fn partial(&self) -> usize {
        self.count(Status::Partial)
    }

    pub fn any_require_failed(&self) -> bool {
        self.records.iter().any(|r| r.require_failed)
    }

    fn count(&self, status: Status) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }
}

pub fn render_report(report: &Report) -> String {
    let mut out = String::new();
    out.push_str("chainlab report\n");
    out.push_str("format: 1\n");
    let _ = writeln!(out, "spec: {}", report.spec_name);
    let _ = writeln!(out, "seed: {}", report.seed);
    out.push_str("algebras:\n");
    for (name, builder) in &report.algebras {
        let _ = writeln!(out, "  {name}: {builder}");
    }
    out.push_str("probes:\n");
    for record in &report.records {
        let _ = writeln!(out, "  - kind: {}", record.kind);
        let _ = writeln!(out, "    algebra: {}", record.algebra);
        for (key, value) in &record.inputs {
            let _ = writeln!(out, "    {key}: {value}");
        }
        for (key, value) in &record.outputs {
            let _ = writeln!(out, "    {key}: {value}");
        }
        let _ = writeln!(out, "    status: {}", record.status.as_str());
    }
    out.push_str("summary:\n");
    let _ = writeln!(out, "  probes: {}", report.records.len());
    let _ = writeln!(out, "  passed: {}", report.passed());
    let _ = writeln!(out, "  failed: {}", report.failed());
    let _ = writeln!(out, "  partial: {}", report.partial());
    if let Some((per_probe, total)) = &report.timing_ms {
        out.push_str("timing:\n");
        for (i, ms) in per_probe.iter().enumerate() {
            let _ = writeln!(out, "  probe_{}_ms: {ms}", i + 1);
        }
        let _ = writeln!(out, "  total_ms: {total}");
    }
    out
}

/// Drops the timing section for byte comparisons and goldens.
pub fn strip_timing(rendered: &str) -> &str {
    match rendered.find("\ntiming:\n") {
        Some(pos) => &rendered[..pos + 1],
        None => rendered,
    }
}

//! Executes the probes of a parsed spec against the built algebras,
//! producing deterministic probe records. Probes are independent; the
//! runner may fan them out over threads, but records always land in
//! spec order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::Instant;

use chainlab_core::algebra::{
    chain_from_free, chain_probe, closure, find_free_subset, is_free, member, Algebra, Element,
    ElementTag, FreeSearch, Freeness, MemberVerdict,
};
use chainlab_core::amalgam::{check_generating_axioms, parse_letter, parse_word, Letter, Modulus};
use chainlab_core::constructions::{
    free_or_witness, trichotomy_check, witness_search, Certification, FreeOrWitness, Trichotomy,
};
use chainlab_core::ordinal::Ordinal;
use chainlab_core::ramsey::{
    algebra_coloring, find_homogeneous, homogeneous_free_check, FreeVerification, HomogeneousSearch,
};

use crate::builder::build_algebras;
use crate::report::{ProbeRecord, Report, Status};
use crate::spec::{ExperimentSpec, ProbeDecl, ProbeKind, Value};

#[derive(Debug)]
pub struct RunError {
    pub probe: usize,
    pub message: String,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "probe {}: {}", self.probe, self.message)
    }
}

impl std::error::Error for RunError {}

/// Runs every probe. `jobs` > 1 fans probes out over that many worker
/// threads; results are identical either way.
pub fn run_spec(
    spec: &ExperimentSpec,
    spec_name: &str,
    jobs: usize,
    with_timing: bool,
) -> Result<Report, RunError> {
    let algebras = build_algebras(&spec.algebras).map_err(|e| RunError {
        probe: 0,
        message: e.to_string(),
    })?;
    let total_start = Instant::now();
    let jobs = jobs.max(1);
    let mut slots: Vec<Option<(ProbeRecord, u128)>> = vec![None; spec.probes.len()];
    if jobs == 1 {
        for (index, probe) in spec.probes.iter().enumerate() {
            slots[index] = Some(run_one(spec, index, probe, &algebras)?);
        }
    } else {
        type Outcome = Result<(ProbeRecord, u128), RunError>;
        let next = std::sync::atomic::AtomicUsize::new(0);
        let results: std::sync::Mutex<Vec<(usize, Outcome)>> = std::sync::Mutex::new(Vec::new());
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(spec.probes.len().max(1)) {
                scope.spawn(|| loop {
                    let index = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if index >= spec.probes.len() {
                        break;
                    }
                    let outcome = run_one(spec, index, &spec.probes[index], &algebras);
                    results
                        .lock()
                        .expect("worker panicked")
                        .push((index, outcome));
                });
            }
        });
        let mut results = results.into_inner().expect("worker panicked");
        results.sort_by_key(|(index, _)| *index);
        for (index, outcome) in results {
            slots[index] = Some(outcome?);
        }
    }
    let mut records = Vec::with_capacity(spec.probes.len());
    let mut per_probe = Vec::with_capacity(spec.probes.len());
    for slot in slots {
        let (record, ms) = slot.expect("every probe ran");
        records.push(record);
        per_probe.push(ms);
    }
    Ok(Report {
        spec_name: spec_name.to_string(),
        seed: spec.seed,
        algebras: spec
            .algebras
            .iter()
            .map(|d| (d.name.clone(), d.builder.to_string()))
            .collect(),
        records,
        timing_ms: with_timing.then(|| (per_probe, total_start.elapsed().as_millis())),
    })
}

fn run_one(
    spec: &ExperimentSpec,
    index: usize,
    probe: &ProbeDecl,
    algebras: &BTreeMap<String, Algebra>,
) -> Result<(ProbeRecord, u128), RunError> {
    let start = Instant::now();
    let algebra = algebras.get(&probe.algebra).ok_or_else(|| RunError {
        probe: index + 1,
        message: format!("unknown algebra `{}`", probe.algebra),
    })?;
    let mut ctx = ProbeContext {
        spec,
        index,
        probe,
        algebra,
        outputs: Vec::new(),
        failures: 0,
        partial: false,
    };
    let result = ctx.execute();
    let record = match result {
        Ok(()) => ctx.finish(),
        Err(message) => {
            return Err(RunError {
                probe: index + 1,
                message,
            })
        }
    };
    Ok((record, start.elapsed().as_millis()))
}

struct ProbeContext<'a> {
    spec: &'a ExperimentSpec,
    index: usize,
    probe: &'a ProbeDecl,
    algebra: &'a Algebra,
    outputs: Vec<(String, String)>,
    failures: usize,
    partial: bool,
}

impl<'a> ProbeContext<'a> {
    fn emit(&mut self, key: &str, value: impl fmt::Display) {
        self.outputs.push((key.to_string(), value.to_string()));
    }

    fn mark_partial(&mut self) {
        self.partial = true;
    }

    fn expect_token(&mut self, key: &str, actual: &str) {
        if let Some(Value::Token(want)) = self.probe.get(key) {
            if want != actual {
                self.failures += 1;
                self.emit(
                    "expectation_failed",
                    format!("{key}: wanted {want}, got {actual}"),
                );
            }
        }
    }

    fn expect_nat(&mut self, key: &str, actual: u64) {
        if let Some(Value::Nat(want)) = self.probe.get(key) {
            if *want != actual {
                self.failures += 1;
                self.emit(
                    "expectation_failed",
                    format!("{key}: wanted {want}, got {actual}"),
                );
            }
        }
    }

    fn finish(self) -> ProbeRecord {
        let require_saturated =
            matches!(self.probe.get("require"), Some(Value::Token(t)) if t == "saturated");
        let require_failed = require_saturated && self.partial;
        let status = if self.failures > 0 {
            Status::Fail
        } else if self.partial {
            Status::Partial
        } else {
            Status::Pass
        };
        ProbeRecord {
            kind: self.probe.kind.to_string(),
            algebra: self.probe.algebra.clone(),
            inputs: self
                .probe
                .params
                .iter()
                .map(|(k, v)| (k.clone(), v.to_string()))
                .collect(),
            outputs: self.outputs,
            status,
            require_failed,
        }
    }

    fn value(&self, key: &str) -> Result<&Value, String> {
        self.probe
            .get(key)
            .ok_or_else(|| format!("missing key `{key}`"))
    }

    fn nat(&self, key: &str) -> Result<u64, String> {
        match self.value(key)? {
            Value::Nat(n) => Ok(*n),
            other => Err(format!("key `{key}` must be a natural, got `{other}`")),
        }
    }

    fn element(&self, key: &str) -> Result<Element, String> {
        value_to_element(self.value(key)?, self.algebra.tag())
    }

    fn element_list(&self, key: &str) -> Result<Vec<Element>, String> {
        match self.value(key)? {
            Value::List(items) => items
                .iter()
                .map(|v| value_to_element(v, self.algebra.tag()))
                .collect(),
            other => Err(format!("key `{key}` must be a list, got `{other}`")),
        }
    }

    fn element_set(&self, key: &str) -> Result<BTreeSet<Element>, String> {
        Ok(self.element_list(key)?.into_iter().collect())
    }

    fn execute(&mut self) -> Result<(), String> {
        match self.probe.kind {
            ProbeKind::Closure => self.run_closure(),
            ProbeKind::Member => self.run_member(),
            ProbeKind::Free => self.run_free(),
            ProbeKind::FreeSearch => self.run_free_search(),
            ProbeKind::Chain => self.run_chain(),
            ProbeKind::ChainFromFree => self.run_chain_from_free(),
            ProbeKind::Trichotomy => self.run_trichotomy(),
            ProbeKind::RamseyColor => self.run_ramsey_color(),
            ProbeKind::RamseyHomog => self.run_ramsey_homog(),
            ProbeKind::RamseyPipeline => self.run_ramsey_pipeline(),
            ProbeKind::Axioms => self.run_axioms(),
            ProbeKind::Witness => self.run_witness(),
            ProbeKind::FreeOrWitness => self.run_free_or_witness(),
        }
    }

    fn run_closure(&mut self) -> Result<(), String> {
        let set = self.element_set("set")?;
        let budget = self.nat("budget")?;
        let result = closure(self.algebra, &set, budget).map_err(|e| e.to_string())?;
        self.emit("found_size", result.found.len());
        if result.found.len() <= 32 {
            self.emit("found", render_elements(result.found.iter()));
        }
        self.emit("saturated", result.saturated);
        self.emit("budget_used", result.budget_used);
        if !result.frontier_sample.is_empty() {
            self.emit(
                "frontier_sample",
                render_elements(result.frontier_sample.iter()),
            );
        }
        if !result.saturated {
            self.mark_partial();
        }
        self.expect_token(
            "expect_saturated",
            if result.saturated { "true" } else { "false" },
        );
        self.expect_nat("expect_size", result.found.len() as u64);
        if let Some(Value::List(items)) = self.probe.get("expect_found") {
            let want: Result<BTreeSet<Element>, String> = items
                .iter()
                .map(|v| value_to_element(v, self.algebra.tag()))
                .collect();
            let want = want?;
            if want != result.found {
                self.failures += 1;
                self.emit(
                    "expectation_failed",
                    format!(
                        "expect_found: wanted {}, got {}",
                        render_elements(want.iter()),
                        render_elements(result.found.iter())
                    ),
                );
            }
        }
        Ok(())
    }

    fn run_member(&mut self) -> Result<(), String> {
        let set = self.element_set("set")?;
        let y = self.element("y")?;
        let budget = self.nat("budget")?;
        let verdict = member(self.algebra, &set, &y, budget).map_err(|e| e.to_string())?;
        let shown = match &verdict {
            MemberVerdict::In { depth } => {
                self.emit("verdict", "in");
                if let Some(d) = depth {
                    self.emit("depth", d);
                }
                "in"
            }
            MemberVerdict::Out => {
                self.emit("verdict", "out");
                "out"
            }
            MemberVerdict::Unknown { budget_used } => {
                self.emit("verdict", "unknown");
                self.emit("budget_used", budget_used);
                self.mark_partial();
                "unknown"
            }
        };
        self.expect_token("expect", shown);
        Ok(())
    }

    fn run_free(&mut self) -> Result<(), String> {
        let set = self.element_set("set")?;
        let budget = self.nat("budget")?;
        let verdict = is_free(self.algebra, &set, budget).map_err(|e| e.to_string())?;
        let shown = match &verdict {
            Freeness::Free => {
                self.emit("verdict", "free");
                "free"
            }
            Freeness::NotFree {
                witness,
                derivation_depth,
            } => {
                self.emit("verdict", "not-free");
                self.emit("witness", witness);
                if let Some(d) = derivation_depth {
                    self.emit("depth", d);
                }
                "not-free"
            }
            Freeness::Unknown { budget_used } => {
                self.emit("verdict", "unknown");
                self.emit("budget_used", budget_used);
                self.mark_partial();
                "unknown"
            }
        };
        self.expect_token("expect", shown);
        Ok(())
    }

    fn run_free_search(&mut self) -> Result<(), String> {
        let pool = self.element_list("pool")?;
        let k = self.nat("k")? as usize;
        let budget = self.nat("budget")?;
        let probe_seed = self.spec.seed.wrapping_add(self.index as u64);
        self.emit("probe_seed", probe_seed);
        let outcome = find_free_subset(self.algebra, &pool, k, budget, probe_seed)
            .map_err(|e| e.to_string())?;
        let shown = match &outcome {
            FreeSearch::Found { subset } => {
                self.emit("verdict", "found");
                self.emit("subset", render_elements(subset.iter()));
                "found"
            }
            FreeSearch::NotFound => {
                self.emit("verdict", "not-found");
                "not-found"
            }
            FreeSearch::Partial { unknown_candidates } => {
                self.emit("verdict", "partial");
                self.emit("unknown_candidates", unknown_candidates);
                self.mark_partial();
                "partial"
            }
        };
        self.expect_token("expect", shown);
        Ok(())
    }

    fn run_chain(&mut self) -> Result<(), String> {
        let sets: Vec<BTreeSet<Element>> = match self.value("sets")? {
            Value::List(items) => items
                .iter()
                .map(|v| match v {
                    Value::List(inner) => inner
                        .iter()
                        .map(|e| value_to_element(e, self.algebra.tag()))
                        .collect(),
                    other => Err(format!("sets entries must be lists, got `{other}`")),
                })
                .collect::<Result<_, _>>()?,
            other => return Err(format!("key `sets` must be a list, got `{other}`")),
        };
        let budget = self.nat("budget")?;
        let report = chain_probe(self.algebra, &sets, budget).map_err(|e| e.to_string())?;
        self.emit(
            "sizes",
            format!(
                "[{}]",
                report
                    .closures
                    .iter()
                    .map(|c| c.found.len().to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        );
        self.emit(
            "drop_positions",
            format!(
                "[{}]",
                report
                    .drop_positions
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        );
        match report.stabilization {
            Some(m) => self.emit("stabilization", m),
            None => self.emit("stabilization", "none"),
        }
        self.emit("partial", report.partial);
        if report.partial {
            self.mark_partial();
        }
        match self.probe.get("expect_stabilization") {
            Some(Value::Nat(want)) => {
                if report.stabilization != Some(*want as usize) {
                    self.failures += 1;
                    self.emit(
                        "expectation_failed",
                        format!(
                            "expect_stabilization: wanted {want}, got {:?}",
                            report.stabilization
                        ),
                    );
                }
            }
            Some(Value::Token(t)) if t == "none" && report.stabilization.is_some() => {
                self.failures += 1;
                self.emit(
                    "expectation_failed",
                    format!(
                        "expect_stabilization: wanted none, got {:?}",
                        report.stabilization
                    ),
                );
            }
            _ => {}
        }
        self.expect_nat("expect_drops", report.drop_positions.len() as u64);
        Ok(())
    }

    fn run_chain_from_free(&mut self) -> Result<(), String> {
        let tuple = self.element_list("tuple")?;
        let budget = self.nat("budget")?;
        let chain = chain_from_free(self.algebra, &tuple, budget).map_err(|e| e.to_string())?;
        self.emit(
            "sizes",
            format!(
                "[{}]",
                chain
                    .tails
                    .iter()
                    .map(|c| c.found.len().to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        );
        self.emit("strict_drops", chain.strict_drops);
        self.emit("certified", chain.certified);
        if !chain.certified {
            self.mark_partial();
        }
        self.expect_nat("expect_drops", chain.strict_drops as u64);
        Ok(())
    }

    fn run_trichotomy(&mut self) -> Result<(), String> {
        let k0 = self.element_set("k0")?;
        let k1 = self.element_set("k1")?;
        let budget = self.nat("budget")?;
        let c0 = closure(self.algebra, &k0, budget).map_err(|e| e.to_string())?;
        let c1 = closure(self.algebra, &k1, budget).map_err(|e| e.to_string())?;
        let shown = if !c0.saturated || !c1.saturated {
            self.emit("verdict", "partial");
            self.mark_partial();
            "partial"
        } else if !(c1.found.is_subset(&c0.found) && c1.found != c0.found) {
            self.emit("verdict", "not-nested");
            "not-nested"
        } else {
            match trichotomy_check(self.algebra, &c0, &c1).map_err(|e| e.to_string())? {
                Trichotomy::Holds(cases) => {
                    let mut held = Vec::new();
                    if cases.base_proper {
                        held.push("base_proper");
                    }
                    if cases.sup_drops {
                        held.push("sup_drops");
                    }
                    if cases.sup_escapes {
                        held.push("sup_escapes");
                    }
                    self.emit("verdict", "holds");
                    self.emit("cases", format!("[{}]", held.join(",")));
                    "holds"
                }
                Trichotomy::Fails => {
                    self.emit("verdict", "fails");
                    "fails"
                }
            }
        };
        self.expect_token("expect", shown);
        Ok(())
    }

    fn run_ramsey_color(&mut self) -> Result<(), String> {
        let pool = self.element_list("pool")?;
        let m = self.nat("m")? as usize;
        let budget = self.nat("budget")?;
        let coloring =
            algebra_coloring(self.algebra, &pool, m, budget).map_err(|e| e.to_string())?;
        self.emit("cells", coloring.cell_count());
        self.emit("partial_cells", coloring.partial_cells());
        self.emit("max_color_size", coloring.max_color_size());
        if coloring.partial_cells() > 0 {
            self.mark_partial();
        }
        self.expect_nat("expect_partial_cells", coloring.partial_cells() as u64);
        self.expect_nat("expect_max_color", coloring.max_color_size() as u64);
        Ok(())
    }

    fn run_ramsey_homog(&mut self) -> Result<(), String> {
        let pool = self.element_list("pool")?;
        let m = self.nat("m")? as usize;
        let k = self.nat("k")? as usize;
        let budget = self.nat("budget")?;
        let coloring =
            algebra_coloring(self.algebra, &pool, m, budget).map_err(|e| e.to_string())?;
        self.emit("partial_cells", coloring.partial_cells());
        if coloring.partial_cells() > 0 {
            self.mark_partial();
        }
        let shown = match find_homogeneous(&coloring, k) {
            HomogeneousSearch::Found { subset } => {
                self.emit("verdict", "found");
                self.emit("subset", render_elements(subset.iter()));
                "found"
            }
            HomogeneousSearch::NotFound => {
                self.emit("verdict", "not-found");
                "not-found"
            }
        };
        self.expect_token("expect", shown);
        Ok(())
    }

    fn run_ramsey_pipeline(&mut self) -> Result<(), String> {
        let pool = self.element_list("pool")?;
        let m = self.nat("m")? as usize;
        let k = self.nat("k")? as usize;
        let budget = self.nat("budget")?;
        let coloring =
            algebra_coloring(self.algebra, &pool, m, budget).map_err(|e| e.to_string())?;
        self.emit("partial_cells", coloring.partial_cells());
        let shown = match find_homogeneous(&coloring, k) {
            HomogeneousSearch::Found { subset } => {
                self.emit("homogeneous", render_elements(subset.iter()));
                match homogeneous_free_check(self.algebra, &subset, budget)
                    .map_err(|e| e.to_string())?
                {
                    FreeVerification::Confirmed => {
                        self.emit("verdict", "confirmed");
                        "confirmed"
                    }
                    FreeVerification::Refuted { witness, .. } => {
                        self.emit("verdict", "refuted");
                        self.emit("witness", witness);
                        "refuted"
                    }
                    FreeVerification::Partial => {
                        self.emit("verdict", "partial");
                        self.mark_partial();
                        "partial"
                    }
                }
            }
            HomogeneousSearch::NotFound => {
                self.emit("homogeneous", "none");
                self.emit("verdict", "not-found");
                "not-found"
            }
        };
        self.expect_token("expect", shown);
        Ok(())
    }

    fn run_axioms(&mut self) -> Result<(), String> {
        let modulus = match self.value("m")? {
            Value::Nat(m) => Modulus::Finite(*m),
            Value::Token(t) if t == "inf" => Modulus::Infinite,
            other => return Err(format!("key `m` must be a natural or `inf`, got `{other}`")),
        };
        let samples: Vec<BTreeSet<Letter>> = match self.value("xs")? {
            Value::List(items) => items
                .iter()
                .map(|v| match v {
                    Value::List(inner) => inner
                        .iter()
                        .map(|tok| match tok {
                            Value::Token(t) => parse_letter(t, modulus),
                            other => Err(format!("letters look like z0^2, got `{other}`")),
                        })
                        .collect(),
                    // a word literal: letters juxtaposed with spaces
                    Value::Token(word) => {
                        parse_word(word, modulus).map(|w| w.letters().iter().cloned().collect())
                    }
                    other => Err(format!(
                        "xs entries must be letter lists or words, got `{other}`"
                    )),
                })
                .collect::<Result<_, _>>()?,
            other => return Err(format!("key `xs` must be a list, got `{other}`")),
        };
        let budget = self.nat("budget")?;
        let report =
            check_generating_axioms(self.algebra, &samples, budget).map_err(|e| e.to_string())?;
        self.emit("checks", report.entries.len());
        self.emit("failed", report.failures());
        self.emit("partial_checks", report.partials());
        if let Some(first) = report
            .entries
            .iter()
            .find(|e| e.outcome == chainlab_core::amalgam::CheckOutcome::Fail)
        {
            self.emit(
                "first_failure",
                format!("({}) {}", first.axiom, first.detail),
            );
        }
        if report.partials() > 0 {
            self.mark_partial();
        }
        match self.probe.get("expect_failures") {
            Some(Value::Nat(want)) => {
                if report.failures() as u64 != *want {
                    self.failures += 1;
                    self.emit(
                        "expectation_failed",
                        format!("expect_failures: wanted {want}, got {}", report.failures()),
                    );
                }
            }
            _ => {
                if report.failures() > 0 {
                    self.failures += 1;
                }
            }
        }
        Ok(())
    }

    fn run_witness(&mut self) -> Result<(), String> {
        let context = self.element_set("u")?;
        let beta = self.element("beta")?;
        let budget = self.nat("budget")?;
        let (alpha, report) =
            witness_search(self.algebra, &context, &beta, budget).map_err(|e| e.to_string())?;
        self.emit("alpha", &alpha);
        let shown = match report.certification {
            Certification::Certified { .. } => "certified",
            Certification::Defaulted => {
                self.mark_partial();
                "defaulted"
            }
        };
        self.emit("certification", shown);
        if let Some(want) = self.probe.get("expect_alpha") {
            let want = value_to_element(want, self.algebra.tag())?;
            if want != alpha {
                self.failures += 1;
                self.emit(
                    "expectation_failed",
                    format!("expect_alpha: wanted {want}, got {alpha}"),
                );
            }
        }
        self.expect_token("expect", shown);
        Ok(())
    }

    fn run_free_or_witness(&mut self) -> Result<(), String> {
        let seq = self.element_list("seq")?;
        let budget = self.nat("budget")?;
        let outcome = free_or_witness(self.algebra, &seq, budget).map_err(|e| e.to_string())?;
        let shown = match &outcome {
            FreeOrWitness::FreeCandidate { indices } => {
                self.emit("verdict", "free-candidate");
                self.emit(
                    "indices",
                    format!(
                        "[{}]",
                        indices
                            .iter()
                            .map(usize::to_string)
                            .collect::<Vec<_>>()
                            .join(",")
                    ),
                );
                "free-candidate"
            }
            FreeOrWitness::CoveredPair { u, n, m_prime } => {
                self.emit("verdict", "covered-pair");
                self.emit(
                    "u",
                    format!(
                        "[{}]",
                        u.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
                    ),
                );
                self.emit("n", n);
                self.emit("m_prime", m_prime);
                "covered-pair"
            }
            FreeOrWitness::Partial { .. } => {
                self.emit("verdict", "partial");
                self.mark_partial();
                "partial"
            }
        };
        self.expect_token("expect", shown);
        Ok(())
    }
}

fn value_to_element(value: &Value, tag: ElementTag) -> Result<Element, String> {
    match (tag, value) {
        (ElementTag::Nat, Value::Nat(n)) => Ok(Element::Nat(*n)),
        (ElementTag::Ord, Value::Nat(n)) => Ok(Element::Ord(Ordinal::from_nat(*n))),
        (ElementTag::Ord, Value::Token(t)) => t
            .parse::<Ordinal>()
            .map(Element::Ord)
            .map_err(|e| format!("bad ordinal literal `{t}`: {e}")),
        (_, other) => Err(format!("cannot read `{other}` as a carrier element")),
    }
}

fn render_elements<'e>(elements: impl Iterator<Item = &'e Element>) -> String {
    let rendered: Vec<String> = elements.map(|e| e.to_string()).collect();
    format!("[{}]", rendered.join(","))
}

//! Algebras as immutable values: a carrier, an indexed family of total
//! finitary operations, and an optional exact membership oracle — plus
//! the budgeted closure engine, membership and freeness probes, and
//! descending-chain probes built on top of it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::amalgam::{AmalgamError, Letter};
use crate::ordinal::Ordinal;

/// A carrier element. All elements of one algebra share a tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Nat(u64),
    Ord(Ordinal),
    Letter(Letter),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementTag {
    Nat,
    Ord,
    Letter,
}

impl Element {
    pub fn tag(&self) -> ElementTag {
        match self {
            Element::Nat(_) => ElementTag::Nat,
            Element::Ord(_) => ElementTag::Ord,
            Element::Letter(_) => ElementTag::Letter,
        }
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self {
            Element::Nat(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_ord(&self) -> Option<&Ordinal> {
        match self {
            Element::Ord(o) => Some(o),
            _ => None,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Nat(n) => write!(f, "{n}"),
            Element::Ord(o) => write!(f, "{o}"),
            Element::Letter(l) => write!(f, "{l}"),
        }
    }
}

/// An operation symbol: identifier plus fixed arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpSym {
    pub name: String,
    pub arity: usize,
}

pub type OpFn = Arc<dyn Fn(&[Element]) -> Element + Send + Sync>;
pub type OracleFn = Arc<dyn Fn(&BTreeSet<Element>, &Element) -> bool + Send + Sync>;
pub type ArityFn = Arc<dyn Fn(&Element) -> usize + Send + Sync>;
pub type IndexedOpFn = Arc<dyn Fn(&Element, &[Element]) -> Element + Send + Sync>;

/// One total operation of fixed arity.
#[derive(Clone)]
pub struct Operation {
    pub sym: OpSym,
    pub func: OpFn,
    /// When set, every off-diagonal tuple returns one of its arguments,
    /// so closure rounds need only evaluate diagonal tuples.
    pub diagonal_only: bool,
}

/// A carrier-indexed family of operations {f_x : x in carrier}. The
/// closure engine applies f_x only for indices x already discovered;
/// the full index set is never enumerated.
#[derive(Clone)]
pub struct IndexedFamily {
    pub name: String,
    /// Arities occurring in the family.
    pub arities: BTreeSet<usize>,
    pub arity_of: ArityFn,
    pub apply: IndexedOpFn,
}

#[derive(Clone)]
pub enum OpKind {
    Fixed(Operation),
    CarrierIndexed(IndexedFamily),
}

impl OpKind {
    pub fn name(&self) -> &str {
        match self {
            OpKind::Fixed(op) => &op.sym.name,
            OpKind::CarrierIndexed(fam) => &fam.name,
        }
    }
}

/// Carrier descriptor: a membership predicate and, when available, a
/// canonical enumeration (index ↦ element, `None` past the end).
#[derive(Clone)]
pub struct Carrier {
    pub contains: Arc<dyn Fn(&Element) -> bool + Send + Sync>,
    pub enumerate: Option<Arc<dyn Fn(u64) -> Option<Element> + Send + Sync>>,
}

impl Carrier {
    pub fn nat_range(upper: u64) -> Carrier {
        Carrier {
            contains: Arc::new(move |e| matches!(e, Element::Nat(n) if *n < upper)),
            enumerate: Some(Arc::new(move |i| (i < upper).then_some(Element::Nat(i)))),
        }
    }

    pub fn all_nats() -> Carrier {
        Carrier {
            contains: Arc::new(|e| matches!(e, Element::Nat(_))),
            enumerate: Some(Arc::new(|i| Some(Element::Nat(i)))),
        }
    }

    /// An explicit finite carrier.
    pub fn finite_set(elements: BTreeSet<Element>) -> Carrier {
        let ordered: Arc<Vec<Element>> = Arc::new(elements.iter().cloned().collect());
        let set = Arc::new(elements);
        let by_index = Arc::clone(&ordered);
        Carrier {
            contains: Arc::new(move |e| set.contains(e)),
            enumerate: Some(Arc::new(move |i| by_index.get(i as usize).cloned())),
        }
    }
}

/// An immutable algebra. Operations are total on carrier tuples and
/// must return carrier elements; the optional oracle decides membership
/// in generated subalgebras exactly.
#[derive(Clone)]
pub struct Algebra {
    label: String,
    tag: ElementTag,
    carrier: Carrier,
    ops: Vec<OpKind>,
    membership_oracle: Option<OracleFn>,
}

impl Algebra {
    pub fn new(label: impl Into<String>, tag: ElementTag, carrier: Carrier) -> Algebra {
        Algebra {
            label: label.into(),
            tag,
            carrier,
            ops: Vec::new(),
            membership_oracle: None,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn tag(&self) -> ElementTag {
        self.tag
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn set_carrier(&mut self, carrier: Carrier) {
        self.carrier = carrier;
    }

    pub fn ops(&self) -> &[OpKind] {
        &self.ops
    }

    pub fn push_op(
        &mut self,
        name: impl Into<String>,
        arity: usize,
        func: impl Fn(&[Element]) -> Element + Send + Sync + 'static,
    ) {
        self.ops.push(OpKind::Fixed(Operation {
            sym: OpSym {
                name: name.into(),
                arity,
            },
            func: Arc::new(func),
            diagonal_only: false,
        }));
    }

    pub fn push_diagonal_op(
        &mut self,
        name: impl Into<String>,
        arity: usize,
        func: impl Fn(&[Element]) -> Element + Send + Sync + 'static,
    ) {
        self.ops.push(OpKind::Fixed(Operation {
            sym: OpSym {
                name: name.into(),
                arity,
            },
            func: Arc::new(func),
            diagonal_only: true,
        }));
    }

    pub fn push_indexed(&mut self, family: IndexedFamily) {
        self.ops.push(OpKind::CarrierIndexed(family));
    }

    pub fn set_oracle(
        &mut self,
        oracle: impl Fn(&BTreeSet<Element>, &Element) -> bool + Send + Sync + 'static,
    ) {
        self.membership_oracle = Some(Arc::new(oracle));
    }

    pub fn clear_oracle(&mut self) {
        self.membership_oracle = None;
    }

    pub fn has_oracle(&self) -> bool {
        self.membership_oracle.is_some()
    }

    pub fn contains(&self, e: &Element) -> bool {
        (self.carrier.contains)(e)
    }

    /// Exact oracle verdict, when an oracle is installed.
    pub fn oracle_says(&self, gens: &BTreeSet<Element>, y: &Element) -> Option<bool> {
        self.membership_oracle.as_ref().map(|o| o(gens, y))
    }

    /// Evaluates a fixed op by name.
    pub fn eval_op(&self, name: &str, args: &[Element]) -> Option<Element> {
        self.ops.iter().find_map(|op| match op {
            OpKind::Fixed(op) if op.sym.name == name && op.sym.arity == args.len() => {
                Some((op.func)(args))
            }
            _ => None,
        })
    }

    /// Evaluates a member of an indexed family by family name.
    pub fn eval_indexed(&self, name: &str, index: &Element, args: &[Element]) -> Option<Element> {
        self.ops.iter().find_map(|op| match op {
            OpKind::CarrierIndexed(fam) if fam.name == name => Some((fam.apply)(index, args)),
            _ => None,
        })
    }

    /// Materializes the carrier when it enumerates to a finite list
    /// within `cap` elements.
    pub fn carrier_elements(&self, cap: u64) -> Option<Vec<Element>> {
        let enumerate = self.carrier.enumerate.as_ref()?;
        let mut out = Vec::new();
        for i in 0..cap {
            match enumerate(i) {
                Some(e) => out.push(e),
                None => return Some(out),
            }
        }
        None
    }
}

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Algebra({})", self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    OutsideCarrier { element: Element },
    BudgetTooSmall { needed: u64, given: u64 },
    DuplicateElements,
    SizeExceedsPool { k: usize, pool: usize },
    OpEscapedCarrier { op: String, value: Element },
    EmptyGeneratorSet,
    ZeroCarrier,
    Unsaturated,
    NotStrictlyNested,
    OracleRequired,
    CeilingNotInfinite,
    NatCarrierRequired,
    LevelsNotNested,
    LevelMismatch { index: usize },
    NotLevelPreserving { op: String },
    CarrierNotEnumerable,
    Amalgam(AmalgamError),
}

impl fmt::Display for AlgebraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraError::OutsideCarrier { element } => {
                write!(f, "element {element} is outside the carrier")
            }
            AlgebraError::BudgetTooSmall { needed, given } => {
                write!(f, "budget {given} is below the generator count {needed}")
            }
            AlgebraError::DuplicateElements => write!(f, "tuple elements must be distinct"),
            AlgebraError::SizeExceedsPool { k, pool } => {
                write!(f, "subset size {k} exceeds pool size {pool}")
            }
            AlgebraError::OpEscapedCarrier { op, value } => {
                write!(f, "operation {op} returned {value} outside the carrier")
            }
            AlgebraError::EmptyGeneratorSet => write!(f, "generator set must be nonempty"),
            AlgebraError::ZeroCarrier => write!(f, "carrier size must be at least 1"),
            AlgebraError::Unsaturated => write!(f, "closure result must be saturated"),
            AlgebraError::NotStrictlyNested => {
                write!(f, "closure results must be strictly nested")
            }
            AlgebraError::OracleRequired => write!(f, "base algebra must carry an exact oracle"),
            AlgebraError::CeilingNotInfinite => write!(f, "ordinal ceiling must be infinite"),
            AlgebraError::NatCarrierRequired => {
                write!(f, "construction requires a natural-number carrier")
            }
            AlgebraError::LevelsNotNested => write!(f, "levels must be strictly nested"),
            AlgebraError::LevelMismatch { index } => {
                write!(f, "part {index} does not match its level")
            }
            AlgebraError::NotLevelPreserving { op } => {
                write!(f, "operation {op} does not preserve levels")
            }
            AlgebraError::CarrierNotEnumerable => {
                write!(f, "carrier does not enumerate to a finite list")
            }
            AlgebraError::Amalgam(e) => write!(f, "{e}"),
        }
    }
}

/// The computable face of a generated subalgebra: the elements found, a
/// saturation flag, budget accounting, and (when unsaturated) a sample
/// of the frontier that did not fit the budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureResult {
    pub found: BTreeSet<Element>,
    pub saturated: bool,
    pub budget_used: u64,
    pub frontier_sample: BTreeSet<Element>,
}

const FRONTIER_SAMPLE_CAP: usize = 8;

/// Deterministic budgeted closure. Expansion is breadth-first over
/// (round, op position, tuple in lexicographic carrier order); the
/// budget counts distinct elements admitted to `found`, including the
/// generators. Indexed families are applied only at indices already in
/// `found`.
pub fn closure(
    algebra: &Algebra,
    generators: &BTreeSet<Element>,
    budget: u64,
) -> Result<ClosureResult, AlgebraError> {
    closure_with_depths(algebra, generators, budget).map(|(r, _)| r)
}

/// As [`closure`], additionally reporting the round at which each
/// element was admitted (generators at round 0).
pub fn closure_with_depths(
    algebra: &Algebra,
    generators: &BTreeSet<Element>,
    budget: u64,
) -> Result<(ClosureResult, BTreeMap<Element, u64>), AlgebraError> {
    for x in generators {
        if !algebra.contains(x) {
            return Err(AlgebraError::OutsideCarrier { element: x.clone() });
        }
    }
    if budget < generators.len() as u64 {
        return Err(AlgebraError::BudgetTooSmall {
            needed: generators.len() as u64,
            given: budget,
        });
    }

    let mut found: BTreeSet<Element> = generators.clone();
    let mut depths: BTreeMap<Element, u64> = generators.iter().map(|e| (e.clone(), 0)).collect();
    // Elements admitted in the previous round: only tuples touching
    // them can discover anything new.
    let mut delta: BTreeSet<Element> = generators.clone();
    let mut round: u64 = 0;
    let saturated;
    let mut frontier: BTreeSet<Element> = BTreeSet::new();

    loop {
        round += 1;
        let sorted: Vec<Element> = found.iter().cloned().collect();
        let is_new: Vec<bool> = sorted.iter().map(|e| delta.contains(e)).collect();
        let mut pending: Vec<Element> = Vec::new();
        let mut pending_set: BTreeSet<Element> = BTreeSet::new();
        let mut truncated = false;

        'ops: for op in &algebra.ops {
            match op {
                OpKind::Fixed(operation) if operation.diagonal_only => {
                    for (i, x) in sorted.iter().enumerate() {
                        if !is_new[i] {
                            continue;
                        }
                        let args = alloc::vec![x.clone(); operation.sym.arity];
                        let y = (operation.func)(&args);
                        if admit(
                            algebra,
                            &operation.sym.name,
                            y,
                            &found,
                            &mut pending,
                            &mut pending_set,
                            &mut frontier,
                            &mut truncated,
                            budget,
                        )? {
                            break 'ops;
                        }
                    }
                }
                OpKind::Fixed(operation) => {
                    let arity = operation.sym.arity;
                    let mut tuples = Tuples::new(&sorted, &is_new, arity);
                    while let Some(args) = tuples.next_tuple() {
                        let y = (operation.func)(args);
                        if admit(
                            algebra,
                            &operation.sym.name,
                            y,
                            &found,
                            &mut pending,
                            &mut pending_set,
                            &mut frontier,
                            &mut truncated,
                            budget,
                        )? {
                            break 'ops;
                        }
                    }
                }
                OpKind::CarrierIndexed(family) => {
                    for (i, index) in sorted.iter().enumerate() {
                        let arity = (family.arity_of)(index);
                        // index position counts toward the delta check
                        let force = is_new[i];
                        let mut tuples = if force {
                            Tuples::new_all(&sorted, arity)
                        } else {
                            Tuples::new(&sorted, &is_new, arity)
                        };
                        while let Some(args) = tuples.next_tuple() {
                            let y = (family.apply)(index, args);
                            if admit(
                                algebra,
                                &family.name,
                                y,
                                &found,
                                &mut pending,
                                &mut pending_set,
                                &mut frontier,
                                &mut truncated,
                                budget,
                            )? {
                                break 'ops;
                            }
                        }
                    }
                }
            }
        }

        if truncated {
            saturated = false;
            // everything already admitted this round stays admitted
            for e in &pending {
                depths.insert(e.clone(), round);
            }
            found.extend(pending);
            break;
        }
        if pending.is_empty() {
            saturated = true;
            break;
        }
        for e in &pending {
            depths.insert(e.clone(), round);
        }
        found.extend(pending.iter().cloned());
        delta = pending.into_iter().collect();
    }

    let budget_used = found.len() as u64;
    Ok((
        ClosureResult {
            found,
            saturated,
            budget_used,
            frontier_sample: frontier,
        },
        depths,
    ))
}

/// Handles one discovered value. Returns Ok(true) when the scan should
/// stop (budget exhausted and the frontier sample is full).
#[allow(clippy::too_many_arguments)]
fn admit(
    algebra: &Algebra,
    op_name: &str,
    value: Element,
    found: &BTreeSet<Element>,
    pending: &mut Vec<Element>,
    pending_set: &mut BTreeSet<Element>,
    frontier: &mut BTreeSet<Element>,
    truncated: &mut bool,
    budget: u64,
) -> Result<bool, AlgebraError> {
    if !algebra.contains(&value) {
        return Err(AlgebraError::OpEscapedCarrier {
            op: String::from(op_name),
            value,
        });
    }
    if found.contains(&value) || pending_set.contains(&value) || frontier.contains(&value) {
        return Ok(false);
    }
    if *truncated || (found.len() + pending.len()) as u64 >= budget {
        *truncated = true;
        frontier.insert(value);
        return Ok(frontier.len() >= FRONTIER_SAMPLE_CAP);
    }
    pending_set.insert(value.clone());
    pending.push(value);
    Ok(false)
}

/// Lexicographic tuple odometer over a sorted slice, skipping tuples
/// whose coordinates are all old (those cannot discover new values).
struct Tuples<'a> {
    elements: &'a [Element],
    is_new: Option<&'a [bool]>,
    indices: Vec<usize>,
    buffer: Vec<Element>,
    done: bool,
    started: bool,
}

impl<'a> Tuples<'a> {
    fn new(elements: &'a [Element], is_new: &'a [bool], arity: usize) -> Self {
        Tuples {
            elements,
            is_new: Some(is_new),
            indices: alloc::vec![0; arity],
            buffer: Vec::new(),
            done: elements.is_empty() && arity > 0,
            started: false,
        }
    }

    fn new_all(elements: &'a [Element], arity: usize) -> Self {
        Tuples {
            elements,
            is_new: None,
            indices: alloc::vec![0; arity],
            buffer: Vec::new(),
            done: elements.is_empty() && arity > 0,
            started: false,
        }
    }

    fn has_new(&self) -> bool {
        match self.is_new {
            None => true,
            Some(flags) => self.indices.iter().any(|&i| flags[i]),
        }
    }

    fn advance(&mut self) -> bool {
        // odometer with the first coordinate most significant
        let arity = self.indices.len();
        if arity == 0 {
            return false;
        }
        let mut pos = arity;
        loop {
            if pos == 0 {
                return false;
            }
            pos -= 1;
            self.indices[pos] += 1;
            if self.indices[pos] < self.elements.len() {
                return true;
            }
            self.indices[pos] = 0;
        }
    }

    fn next_tuple(&mut self) -> Option<&[Element]> {
        if self.done {
            return None;
        }
        if self.indices.is_empty() {
            // the single empty tuple: nullary ops fire every round and
            // their values dedup against `found`
            self.done = true;
            self.buffer.clear();
            return Some(&self.buffer);
        }
        loop {
            if self.started {
                if !self.advance() {
                    self.done = true;
                    return None;
                }
            } else {
                self.started = true;
            }
            if self.has_new() {
                self.buffer.clear();
                self.buffer
                    .extend(self.indices.iter().map(|&i| self.elements[i].clone()));
                return Some(&self.buffer);
            }
        }
    }
}

/// Membership verdict for y in the subalgebra generated by X.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MemberVerdict {
    /// Certified member. `depth` is the closure round that produced it,
    /// when the derivation was found by search (oracle-only
    /// certifications carry no depth).
    In {
        depth: Option<u64>,
    },
    Out,
    Unknown {
        budget_used: u64,
    },
}

/// Budgeted membership probe. Exact when the algebra carries an oracle
/// or the closure saturates; `Unknown` otherwise.
pub fn member(
    algebra: &Algebra,
    generators: &BTreeSet<Element>,
    y: &Element,
    budget: u64,
) -> Result<MemberVerdict, AlgebraError> {
    if !algebra.contains(y) {
        return Err(AlgebraError::OutsideCarrier { element: y.clone() });
    }
    if let Some(answer) = algebra.oracle_says(generators, y) {
        if !answer {
            for x in generators {
                if !algebra.contains(x) {
                    return Err(AlgebraError::OutsideCarrier { element: x.clone() });
                }
            }
            return Ok(MemberVerdict::Out);
        }
        // find a derivation depth when the budget allows
        let (result, depths) = closure_with_depths(algebra, generators, budget)?;
        let _ = result;
        return Ok(MemberVerdict::In {
            depth: depths.get(y).copied(),
        });
    }
    let (result, depths) = closure_with_depths(algebra, generators, budget)?;
    if let Some(d) = depths.get(y) {
        return Ok(MemberVerdict::In { depth: Some(*d) });
    }
    if result.saturated {
        return Ok(MemberVerdict::Out);
    }
    Ok(MemberVerdict::Unknown {
        budget_used: result.budget_used,
    })
}

/// Freeness verdict for a finite set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Freeness {
    Free,
    NotFree {
        witness: Element,
        derivation_depth: Option<u64>,
    },
    Unknown {
        budget_used: u64,
    },
}

/// A set is free when no element lies in the closure of the others.
/// Tests run in ascending carrier order; the first certified membership
/// wins.
pub fn is_free(
    algebra: &Algebra,
    set: &BTreeSet<Element>,
    budget: u64,
) -> Result<Freeness, AlgebraError> {
    let mut unknown_budget = 0;
    let mut any_unknown = false;
    for x in set {
        let rest: BTreeSet<Element> = set.iter().filter(|e| *e != x).cloned().collect();
        match member(algebra, &rest, x, budget)? {
            MemberVerdict::In { depth } => {
                return Ok(Freeness::NotFree {
                    witness: x.clone(),
                    derivation_depth: depth,
                })
            }
            MemberVerdict::Out => {}
            MemberVerdict::Unknown { budget_used } => {
                any_unknown = true;
                unknown_budget += budget_used;
            }
        }
    }
    if any_unknown {
        Ok(Freeness::Unknown {
            budget_used: unknown_budget,
        })
    } else {
        Ok(Freeness::Free)
    }
}

/// Tail closures of an ordered free tuple: M_j is generated by the
/// suffix starting at j. On a certified free tuple with saturated
/// closures each containment is strict.
#[derive(Debug, Clone)]
pub struct ChainFromFree {
    pub tails: Vec<ClosureResult>,
    pub strict_drops: usize,
    /// All closures saturated; drops below are certified only then.
    pub certified: bool,
}

pub fn chain_from_free(
    algebra: &Algebra,
    tuple: &[Element],
    budget: u64,
) -> Result<ChainFromFree, AlgebraError> {
    let distinct: BTreeSet<&Element> = tuple.iter().collect();
    if distinct.len() != tuple.len() {
        return Err(AlgebraError::DuplicateElements);
    }
    let mut tails = Vec::with_capacity(tuple.len());
    for j in 0..tuple.len() {
        let gens: BTreeSet<Element> = tuple[j..].iter().cloned().collect();
        tails.push(closure(algebra, &gens, budget)?);
    }
    let strict_drops = tails
        .windows(2)
        .filter(|w| w[1].found.is_subset(&w[0].found) && w[1].found != w[0].found)
        .count();
    let certified = tails.iter().all(|t| t.saturated);
    Ok(ChainFromFree {
        tails,
        strict_drops,
        certified,
    })
}

/// Closure comparison across a sequence of generator sets: where the
/// found-sets strictly decrease, and the least index after which all
/// saturated closures agree.
#[derive(Debug, Clone)]
pub struct ChainProbeReport {
    pub closures: Vec<ClosureResult>,
    pub drop_positions: Vec<usize>,
    pub stabilization: Option<usize>,
    /// Some closure did not saturate.
    pub partial: bool,
}

pub fn chain_probe(
    algebra: &Algebra,
    generator_sets: &[BTreeSet<Element>],
    budget: u64,
) -> Result<ChainProbeReport, AlgebraError> {
    let mut closures = Vec::with_capacity(generator_sets.len());
    for gens in generator_sets {
        closures.push(closure(algebra, gens, budget)?);
    }
    let drop_positions = closures
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].found.is_subset(&w[0].found) && w[1].found != w[0].found)
        .map(|(i, _)| i)
        .collect();
    let partial = closures.iter().any(|c| !c.saturated);
    let saturated_indices: Vec<usize> = closures
        .iter()
        .enumerate()
        .filter(|(_, c)| c.saturated)
        .map(|(i, _)| i)
        .collect();
    let stabilization = saturated_indices.last().map(|&last| {
        let final_found = &closures[last].found;
        saturated_indices
            .iter()
            .copied()
            .rev()
            .take_while(|&i| closures[i].found == *final_found)
            .last()
            .expect("nonempty")
    });
    Ok(ChainProbeReport {
        closures,
        drop_positions,
        stabilization,
        partial,
    })
}

/// Search outcome for a certified free subset of a pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FreeSearch {
    Found {
        subset: Vec<Element>,
    },
    NotFound,
    /// Some candidates could not be decided within budget.
    Partial {
        unknown_candidates: u64,
    },
}

/// Exhaustive certified search for a free k-subset. The seed shuffles
/// the candidate visiting order; the search itself stays exhaustive, so
/// `NotFound` means every k-subset is certified not free.
pub fn find_free_subset(
    algebra: &Algebra,
    pool: &[Element],
    k: usize,
    budget: u64,
    seed: u64,
) -> Result<FreeSearch, AlgebraError> {
    if k > pool.len() {
        return Err(AlgebraError::SizeExceedsPool {
            k,
            pool: pool.len(),
        });
    }
    let distinct: BTreeSet<&Element> = pool.iter().collect();
    if distinct.len() != pool.len() {
        return Err(AlgebraError::DuplicateElements);
    }
    for e in pool {
        if !algebra.contains(e) {
            return Err(AlgebraError::OutsideCarrier { element: e.clone() });
        }
    }
    let mut candidates = combinations(pool.len(), k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    candidates.shuffle(&mut rng);
    let mut unknown: u64 = 0;
    for combo in &candidates {
        let subset: BTreeSet<Element> = combo.iter().map(|&i| pool[i].clone()).collect();
        match is_free(algebra, &subset, budget)? {
            Freeness::Free => {
                return Ok(FreeSearch::Found {
                    subset: combo.iter().map(|&i| pool[i].clone()).collect(),
                })
            }
            Freeness::NotFree { .. } => {}
            Freeness::Unknown { .. } => unknown += 1,
        }
    }
    if unknown > 0 {
        Ok(FreeSearch::Partial {
            unknown_candidates: unknown,
        })
    } else {
        Ok(FreeSearch::NotFound)
    }
}

/// All k-subsets of {0..n-1} as index vectors, in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    if k == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        out.push(combo.clone());
        // find the rightmost index that can advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if combo[i] < n - (k - i) {
                combo[i] += 1;
                for j in i + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

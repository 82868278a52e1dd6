//! Explicit algebra constructions: base witnesses, enrichment
//! combinators that add cover / uncurry / witness functions, the Whaley
//! lift to an ordinal carrier, stratified glues, and the free-set
//! extraction loop.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::algebra::{
    member, Algebra, AlgebraError, Carrier, ClosureResult, Element, ElementTag, IndexedFamily,
    MemberVerdict, OpKind,
};
use crate::ordinal::{enum_decode, enum_encode, Ordinal};

/// Largest set size covered by the singleton-cover functions j_n.
pub const MAXJ: usize = 8;

/// Witness functions are added for argument counts 1..=MAXW.
pub const MAXW: usize = 3;

/// The base Artinian witness on the naturals: one unary op p with
/// p(0) = 0, p(n+1) = n, and the exact oracle y ∈ cl(X) iff y ≤ max X.
pub fn predecessor_algebra() -> Algebra {
    let mut a = Algebra::new("predecessor", ElementTag::Nat, Carrier::all_nats());
    a.push_op("p", 1, |args| match &args[0] {
        Element::Nat(0) => Element::Nat(0),
        Element::Nat(n) => Element::Nat(n - 1),
        other => unreachable!("predecessor applied to {other}"),
    });
    a.set_oracle(|gens, y| match gens.iter().max() {
        Some(max) => y <= max,
        None => false,
    });
    a
}

/// Carrier {0..n-1} with the empty signature; cl(X) = X.
pub fn discrete_algebra(n: u64) -> Algebra {
    let mut a = Algebra::new(
        format!("discrete({n})"),
        ElementTag::Nat,
        Carrier::nat_range(n),
    );
    a.set_oracle(|gens, y| gens.contains(y));
    a
}

/// Carrier {0..λ-1} with one unary constant op f_α per element; every
/// nonempty generator set generates the whole carrier.
pub fn constant_cover_algebra(lambda: u64) -> Result<Algebra, AlgebraError> {
    if lambda == 0 {
        return Err(AlgebraError::ZeroCarrier);
    }
    let mut a = Algebra::new(
        format!("constant_cover({lambda})"),
        ElementTag::Nat,
        Carrier::nat_range(lambda),
    );
    for alpha in 0..lambda {
        a.push_op(format!("f{alpha}"), 1, move |_| Element::Nat(alpha));
    }
    a.set_oracle(|gens, _| !gens.is_empty());
    Ok(a)
}

/// Ascending positions of set bits.
pub fn bit_positions(n: u64) -> Vec<u64> {
    (0..64).filter(|b| n & (1 << b) != 0).collect()
}

/// Encodes a finite set of bit positions (< 64) as a natural.
pub fn bit_encode(set: &BTreeSet<u64>) -> u64 {
    set.iter().fold(0, |acc, b| acc | (1 << b))
}

/// Adds singleton-cover functions j_1..j_MAXJ over the bit-encoding
/// surjection: on the diagonal, j_n(α,…,α) is the n-th smallest bit
/// position of α, so u ⊆ cl({bit_encode(u)}) whenever |u| ≤ MAXJ.
/// Off-diagonal tuples (and diagonals with fewer than n bits) return
/// the first argument.
pub fn singleton_cover_enrich(a: &Algebra) -> Algebra {
    assert_eq!(
        a.tag(),
        ElementTag::Nat,
        "singleton cover needs a Nat carrier"
    );
    let mut out = a.clone();
    out.set_label(format!("singleton_cover({})", a.label()));
    for n in 1..=MAXJ {
        out.push_diagonal_op(format!("j{n}"), n, move |args| {
            let first = args[0].clone();
            if args.iter().any(|x| *x != args[0]) {
                return first;
            }
            let alpha = match &args[0] {
                Element::Nat(v) => *v,
                other => unreachable!("j applied to {other}"),
            };
            let bits = bit_positions(alpha);
            if bits.len() >= n {
                Element::Nat(bits[n - 1])
            } else {
                first
            }
        });
    }
    out
}

/// The carrier-indexed family of unary constants f_α(x) = α.
pub fn constant_family() -> IndexedFamily {
    IndexedFamily {
        name: String::from("const"),
        arities: [1].into_iter().collect(),
        arity_of: Arc::new(|_| 1),
        apply: Arc::new(|index, _| index.clone()),
    }
}

/// The carrier-indexed family whose every member is the predecessor op.
pub fn predecessor_family() -> IndexedFamily {
    IndexedFamily {
        name: String::from("pred"),
        arities: [1].into_iter().collect(),
        arity_of: Arc::new(|_| 1),
        apply: Arc::new(|_, args| match &args[0] {
            Element::Nat(0) => Element::Nat(0),
            Element::Nat(n) => Element::Nat(n - 1),
            other => unreachable!("predecessor applied to {other}"),
        }),
    }
}

/// Uncurries a carrier-indexed family into fixed ops: for each arity n
/// in the family, h_n(x_0..x_{n-1}, α) = f_α(x̄) when σ(f_α) = n, else
/// the first argument (the index itself for n = 0). The oracle is
/// dropped: an arbitrary family need not stay inside generated
/// subalgebras.
pub fn uncurry_enrich(a: &Algebra, family: &IndexedFamily) -> Algebra {
    let mut out = a.clone();
    out.set_label(format!("uncurry({})", a.label()));
    out.clear_oracle();
    for &n in &family.arities {
        let arity_of = Arc::clone(&family.arity_of);
        let apply = Arc::clone(&family.apply);
        out.push_op(format!("h{n}"), n + 1, move |args| {
            let (xs, index) = args.split_at(n);
            let index = &index[0];
            if arity_of(index) == n {
                apply(index, xs)
            } else if n > 0 {
                xs[0].clone()
            } else {
                index.clone()
            }
        });
    }
    out
}

/// Certification status of a witness value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certification {
    /// Both clause memberships verified within the stated budget.
    Certified { budget: u64 },
    /// Returned without certification (level constraint or budget).
    Defaulted,
}

/// One witness-function call: the requested pair, the returned value,
/// and whether it was certified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessReport {
    pub context: Vec<Element>,
    pub beta: Element,
    pub alpha: Element,
    pub certification: Certification,
}

fn certified_in(
    algebra: &Algebra,
    gens: &BTreeSet<Element>,
    y: &Element,
    budget: u64,
) -> Result<bool, AlgebraError> {
    // witness searches only need the verdict, so an exact oracle
    // short-circuits the derivation-depth closure `member` would run
    if let Some(answer) = algebra.oracle_says(gens, y) {
        if !algebra.contains(y) {
            return Err(AlgebraError::OutsideCarrier { element: y.clone() });
        }
        return Ok(answer);
    }
    match member(algebra, gens, y, budget) {
        Ok(MemberVerdict::In { .. }) => Ok(true),
        Ok(_) => Ok(false),
        Err(AlgebraError::BudgetTooSmall { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Searches for the least certified mutual witness: the smallest α, in
/// ascending carrier order over the first `budget` enumerated elements,
/// with β ∈ cl(u ∪ {α}) and α ∈ cl(u ∪ {β}) certified within budget.
/// Falls back to β itself, which satisfies both memberships trivially.
pub fn witness_search(
    algebra: &Algebra,
    context: &BTreeSet<Element>,
    beta: &Element,
    budget: u64,
) -> Result<(Element, WitnessReport), AlgebraError> {
    let mut candidates: BTreeSet<Element> = BTreeSet::new();
    if budget > 0 {
        if let Some(enumerate) = &algebra.carrier().enumerate {
            for i in 0..budget {
                match enumerate(i) {
                    Some(e) if e < *beta => {
                        candidates.insert(e);
                    }
                    Some(_) => {}
                    None => break,
                }
            }
        }
    }
    for alpha in &candidates {
        let mut with_alpha = context.clone();
        with_alpha.insert(alpha.clone());
        let mut with_beta = context.clone();
        with_beta.insert(beta.clone());
        if certified_in(algebra, &with_alpha, beta, budget)?
            && certified_in(algebra, &with_beta, alpha, budget)?
        {
            let report = WitnessReport {
                context: context.iter().cloned().collect(),
                beta: beta.clone(),
                alpha: alpha.clone(),
                certification: Certification::Certified { budget },
            };
            return Ok((alpha.clone(), report));
        }
    }
    // β ∈ cl(u ∪ {β}) on both sides by extensivity
    let report = WitnessReport {
        context: context.iter().cloned().collect(),
        beta: beta.clone(),
        alpha: beta.clone(),
        certification: Certification::Certified { budget },
    };
    Ok((beta.clone(), report))
}

/// Adds witness functions h'_n for 1 ≤ n ≤ MAXW: on (x_0..x_{n-2}, β)
/// they return the least certified mutual witness in the base algebra.
/// Witness values lie in cl of the arguments, so the base oracle stays
/// exact and is kept.
pub fn witness_enrich(a: &Algebra, budget: u64) -> Algebra {
    let base = Arc::new(a.clone());
    let mut out = a.clone();
    out.set_label(format!("witness({})", a.label()));
    for n in 1..=MAXW {
        let base = Arc::clone(&base);
        out.push_op(format!("h'{n}"), n, move |args| {
            let (context, beta) = args.split_at(n - 1);
            let context: BTreeSet<Element> = context.iter().cloned().collect();
            let (value, _) = witness_search(&base, &context, &beta[0], budget)
                .expect("witness search over carrier arguments");
            value
        });
    }
    out
}

fn embed_nat(e: &Element) -> Element {
    match e {
        Element::Nat(n) => Element::Ord(Ordinal::from_nat(*n)),
        other => other.clone(),
    }
}

fn ord_of(e: &Element) -> &Ordinal {
    match e {
        Element::Ord(o) => o,
        other => unreachable!("lift carrier holds ordinals, found {other}"),
    }
}

fn naturalize(args: &[Element]) -> Option<Vec<Element>> {
    args.iter()
        .map(|e| ord_of(e).as_nat().map(Element::Nat))
        .collect()
}

/// The Whaley lift: extends an algebra on the naturals (with exact
/// oracle) to the ordinals below `gamma_max`. Base ops act on finite
/// tuples and send anything else to 0; the binary pairing op h applies
/// the canonical enumeration h_β = enum_encode(β, ·) piecewise:
/// h(β, γ) = h_β(γ) for infinite β and γ < β, h(β, γ) = h_γ⁻¹(β) for
/// finite β and infinite γ, and 0 otherwise. The lift has no exact
/// oracle; closures are budgeted only.
pub fn whaley_lift(n1: &Algebra, gamma_max: &Ordinal) -> Result<Algebra, AlgebraError> {
    if gamma_max.is_finite() {
        return Err(AlgebraError::CeilingNotInfinite);
    }
    if n1.tag() != ElementTag::Nat {
        return Err(AlgebraError::NatCarrierRequired);
    }
    if !n1.has_oracle() {
        return Err(AlgebraError::OracleRequired);
    }
    let ceiling = gamma_max.clone();
    let contains_ceiling = ceiling.clone();
    let decode_ceiling = ceiling.clone();
    let mut out = Algebra::new(
        format!("whaley_lift({}, {gamma_max})", n1.label()),
        ElementTag::Ord,
        Carrier {
            contains: Arc::new(move |e| matches!(e, Element::Ord(o) if *o < contains_ceiling)),
            enumerate: Some(Arc::new(move |i| {
                Some(Element::Ord(
                    enum_decode(&decode_ceiling, i).expect("ceiling is infinite"),
                ))
            })),
        },
    );
    for op in n1.ops() {
        match op {
            OpKind::Fixed(operation) => {
                let func = Arc::clone(&operation.func);
                // the 0-extension can produce a non-argument on mixed
                // tuples, so the diagonal shortcut is not sound here
                out.push_op(
                    operation.sym.name.clone(),
                    operation.sym.arity,
                    move |args| match naturalize(args) {
                        Some(nat_args) => embed_nat(&func(&nat_args)),
                        None => Element::Ord(Ordinal::zero()),
                    },
                );
            }
            OpKind::CarrierIndexed(family) => {
                let arity_of = Arc::clone(&family.arity_of);
                let apply = Arc::clone(&family.apply);
                let min_arity = family.arities.first().copied().unwrap_or(1);
                let lifted_arity = Arc::clone(&arity_of);
                out.push_indexed(IndexedFamily {
                    name: family.name.clone(),
                    arities: family.arities.clone(),
                    arity_of: Arc::new(move |index| match ord_of(index).as_nat() {
                        Some(k) => lifted_arity(&Element::Nat(k)),
                        None => min_arity,
                    }),
                    apply: Arc::new(move |index, args| {
                        match (ord_of(index).as_nat(), naturalize(args)) {
                            (Some(k), Some(nat_args)) => {
                                if arity_of(&Element::Nat(k)) == args.len() {
                                    embed_nat(&apply(&Element::Nat(k), &nat_args))
                                } else {
                                    Element::Ord(Ordinal::zero())
                                }
                            }
                            _ => Element::Ord(Ordinal::zero()),
                        }
                    }),
                });
            }
        }
    }
    out.push_op("h", 2, move |args| {
        let beta = ord_of(&args[0]);
        let gamma = ord_of(&args[1]);
        if beta.is_infinite() && gamma < beta {
            let code = enum_encode(beta, gamma).expect("gamma below beta");
            Element::Ord(Ordinal::from_nat(code))
        } else if beta.is_finite() && gamma.is_infinite() {
            let n = beta.as_nat().expect("finite");
            Element::Ord(enum_decode(gamma, n).expect("gamma is infinite"))
        } else {
            Element::Ord(Ordinal::zero())
        }
    });
    Ok(out)
}

/// Which of the three descent clauses hold for a strictly nested pair
/// of saturated subalgebras of a lift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrichotomyCases {
    /// K1 ∩ ω is a proper subset of K0 ∩ ω.
    pub base_proper: bool,
    /// sup K1 < sup K0.
    pub sup_drops: bool,
    /// sup K0 ∈ K0 ∖ K1.
    pub sup_escapes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trichotomy {
    Holds(TrichotomyCases),
    Fails,
}

/// Evaluates the three descent clauses on the finite found-sets of a
/// strictly nested saturated pair. Sup is the maximum under ordinal
/// order; an empty K1 counts as having smaller sup.
pub fn trichotomy_check(
    lift: &Algebra,
    k0: &ClosureResult,
    k1: &ClosureResult,
) -> Result<Trichotomy, AlgebraError> {
    if !k0.saturated || !k1.saturated {
        return Err(AlgebraError::Unsaturated);
    }
    if !(k1.found.is_subset(&k0.found) && k1.found != k0.found) {
        return Err(AlgebraError::NotStrictlyNested);
    }
    for e in &k0.found {
        if !lift.contains(e) {
            return Err(AlgebraError::OutsideCarrier { element: e.clone() });
        }
    }
    let finite_part = |set: &BTreeSet<Element>| -> BTreeSet<Element> {
        set.iter()
            .filter(|e| matches!(e, Element::Ord(o) if o.is_finite()))
            .cloned()
            .collect()
    };
    let base0 = finite_part(&k0.found);
    let base1 = finite_part(&k1.found);
    let cases = TrichotomyCases {
        base_proper: base1 != base0,
        sup_drops: k1.found.iter().max() < k0.found.iter().max(),
        sup_escapes: match k0.found.iter().max() {
            Some(sup) => !k1.found.contains(sup),
            None => false,
        },
    };
    if cases.base_proper || cases.sup_drops || cases.sup_escapes {
        Ok(Trichotomy::Holds(cases))
    } else {
        Ok(Trichotomy::Fails)
    }
}

/// A strictly increasing chain of explicit finite carrier levels.
#[derive(Debug, Clone)]
pub struct StratifiedCarrier {
    levels: Vec<BTreeSet<Element>>,
}

impl StratifiedCarrier {
    pub fn new(levels: Vec<BTreeSet<Element>>) -> Result<Self, AlgebraError> {
        if levels.is_empty() || levels.iter().any(BTreeSet::is_empty) {
            return Err(AlgebraError::ZeroCarrier);
        }
        for w in levels.windows(2) {
            if !(w[0].is_subset(&w[1]) && w[0] != w[1]) {
                return Err(AlgebraError::LevelsNotNested);
            }
        }
        Ok(StratifiedCarrier { levels })
    }

    /// Levels {0..s} for each size in the list.
    pub fn nat_prefixes(sizes: &[u64]) -> Result<Self, AlgebraError> {
        StratifiedCarrier::new(
            sizes
                .iter()
                .map(|&s| (0..s).map(Element::Nat).collect())
                .collect(),
        )
    }

    pub fn levels(&self) -> &[BTreeSet<Element>] {
        &self.levels
    }

    pub fn top(&self) -> &BTreeSet<Element> {
        self.levels.last().expect("nonempty")
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.top().contains(e)
    }

    /// Index of the smallest level containing every given element.
    pub fn smallest_level_containing(&self, elems: &[Element]) -> Option<usize> {
        self.levels
            .iter()
            .position(|level| elems.iter().all(|e| level.contains(e)))
    }
}

const LEVEL_CHECK_SAMPLE: usize = 2000;

fn check_level_preserving(
    part: &Algebra,
    home: usize,
    levels: &[BTreeSet<Element>],
) -> Result<(), AlgebraError> {
    for level in levels.iter().take(home + 1) {
        let elems: Vec<Element> = level.iter().cloned().collect();
        for op in part.ops() {
            match op {
                OpKind::Fixed(operation) => {
                    let arity = operation.sym.arity;
                    let total = elems.len().checked_pow(arity as u32);
                    let exhaustive = matches!(total, Some(t) if t <= LEVEL_CHECK_SAMPLE);
                    let mut checked = 0usize;
                    let mut indices = alloc::vec![0usize; arity];
                    'tuples: loop {
                        let args: Vec<Element> =
                            indices.iter().map(|&i| elems[i].clone()).collect();
                        let value = (operation.func)(&args);
                        if !level.contains(&value) {
                            return Err(AlgebraError::NotLevelPreserving {
                                op: operation.sym.name.clone(),
                            });
                        }
                        checked += 1;
                        if !exhaustive && checked >= LEVEL_CHECK_SAMPLE {
                            break;
                        }
                        // advance odometer
                        let mut pos = arity;
                        loop {
                            if pos == 0 {
                                break 'tuples;
                            }
                            pos -= 1;
                            indices[pos] += 1;
                            if indices[pos] < elems.len() {
                                break;
                            }
                            indices[pos] = 0;
                        }
                    }
                    // diagonals always get checked for sampled arities
                    if !exhaustive {
                        for x in &elems {
                            let args = alloc::vec![x.clone(); arity];
                            let value = (operation.func)(&args);
                            if !level.contains(&value) {
                                return Err(AlgebraError::NotLevelPreserving {
                                    op: operation.sym.name.clone(),
                                });
                            }
                        }
                    }
                }
                OpKind::CarrierIndexed(family) => {
                    for index in &elems {
                        let arity = (family.arity_of)(index);
                        let mut checked = 0usize;
                        for combo_id in 0..elems.len().pow(arity.min(2) as u32).max(1) {
                            // sample: decode combo_id as a mixed-radix tuple
                            let mut args = Vec::with_capacity(arity);
                            let mut rest = combo_id;
                            for _ in 0..arity {
                                args.push(elems[rest % elems.len()].clone());
                                rest /= elems.len();
                            }
                            let value = (family.apply)(index, &args);
                            if !level.contains(&value) {
                                return Err(AlgebraError::NotLevelPreserving {
                                    op: family.name.clone(),
                                });
                            }
                            checked += 1;
                            if checked >= LEVEL_CHECK_SAMPLE {
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Glues algebras living on nested levels into one algebra on the top
/// level. Each op keeps its home behavior on tuples inside its home
/// level (level preservation is verified at construction and asserted
/// per call); tuples outside it go to the least element of the smallest
/// level containing all arguments.
pub fn limit_glue(parts: &[Algebra], strat: &StratifiedCarrier) -> Result<Algebra, AlgebraError> {
    if parts.len() != strat.levels().len() || parts.is_empty() {
        return Err(AlgebraError::LevelsNotNested);
    }
    let cap = strat.top().len() as u64 + 1;
    for (i, part) in parts.iter().enumerate() {
        let elems = part
            .carrier_elements(cap)
            .ok_or(AlgebraError::LevelMismatch { index: i })?;
        let as_set: BTreeSet<Element> = elems.into_iter().collect();
        if as_set != strat.levels()[i] {
            return Err(AlgebraError::LevelMismatch { index: i });
        }
        check_level_preserving(part, i, strat.levels())?;
    }
    let labels: Vec<&str> = parts.iter().map(|p| p.label()).collect();
    let mut out = Algebra::new(
        format!("glue({})", labels.join(", ")),
        parts[0].tag(),
        Carrier::finite_set(strat.top().clone()),
    );
    let levels: Arc<Vec<BTreeSet<Element>>> = Arc::new(strat.levels().to_vec());
    for (home, part) in parts.iter().enumerate() {
        for op in part.ops() {
            if let OpKind::Fixed(operation) = op {
                let func = Arc::clone(&operation.func);
                let name = format!("{}@{home}", operation.sym.name);
                let assert_name = name.clone();
                let levels = Arc::clone(&levels);
                out.push_op(name, operation.sym.arity, move |args| {
                    let level_idx = levels
                        .iter()
                        .position(|level| args.iter().all(|e| level.contains(e)))
                        .unwrap_or(levels.len() - 1);
                    if level_idx <= home {
                        let value = func(args);
                        assert!(
                            levels[level_idx].contains(&value),
                            "{assert_name} left level {level_idx}"
                        );
                        value
                    } else {
                        levels[level_idx]
                            .iter()
                            .next()
                            .expect("levels are nonempty")
                            .clone()
                    }
                });
            } else {
                // indexed families glue the same way with the index as an
                // extra argument; none of the desk-scale parts carry one
                return Err(AlgebraError::LevelMismatch { index: home });
            }
        }
    }
    Ok(out)
}

/// Searches level `s` in ascending order for a certified mutual witness
/// for (u, β); defaults to the least element of the level when nothing
/// certifies within budget.
pub fn stratified_witness_search(
    algebra: &Algebra,
    strat: &StratifiedCarrier,
    s: usize,
    context: &BTreeSet<Element>,
    beta: &Element,
    budget: u64,
) -> Result<(Element, WitnessReport), AlgebraError> {
    let level = &strat.levels()[s];
    // budget 0 means no certification at all, oracle or not
    let candidates = if budget == 0 { None } else { Some(level) };
    for alpha in candidates.into_iter().flatten() {
        let mut with_alpha = context.clone();
        with_alpha.insert(alpha.clone());
        let mut with_beta = context.clone();
        with_beta.insert(beta.clone());
        if certified_in(algebra, &with_alpha, beta, budget)?
            && certified_in(algebra, &with_beta, alpha, budget)?
        {
            let report = WitnessReport {
                context: context.iter().cloned().collect(),
                beta: beta.clone(),
                alpha: alpha.clone(),
                certification: Certification::Certified { budget },
            };
            return Ok((alpha.clone(), report));
        }
    }
    let fallback = level.iter().next().expect("levels are nonempty").clone();
    let report = WitnessReport {
        context: context.iter().cloned().collect(),
        beta: beta.clone(),
        alpha: fallback.clone(),
        certification: Certification::Defaulted,
    };
    Ok((fallback, report))
}

/// Adds stratified witness functions h_{r,s} for 1 ≤ r ≤ MAXW and each
/// level s: on (x_0..x_{r-2}, β) they return a certified-or-defaulted
/// witness inside level s. Defaulted values can escape generated
/// subalgebras, so the oracle is dropped.
pub fn stratified_witness_enrich(
    a: &Algebra,
    strat: &StratifiedCarrier,
    budget: u64,
) -> Result<Algebra, AlgebraError> {
    for e in strat.top() {
        if !a.contains(e) {
            return Err(AlgebraError::OutsideCarrier { element: e.clone() });
        }
    }
    let base = Arc::new(a.clone());
    let strat = Arc::new(strat.clone());
    let mut out = a.clone();
    out.set_label(format!("stratified_witness({})", a.label()));
    out.clear_oracle();
    for r in 1..=MAXW {
        for s in 0..strat.levels().len() {
            let base = Arc::clone(&base);
            let strat = Arc::clone(&strat);
            out.push_op(format!("h{r}_{s}"), r, move |args| {
                let (context, beta) = args.split_at(r - 1);
                let context: BTreeSet<Element> = context.iter().cloned().collect();
                let (value, _) =
                    stratified_witness_search(&base, &strat, s, &context, &beta[0], budget)
                        .expect("witness search over carrier arguments");
                value
            });
        }
    }
    Ok(out)
}

/// Outcome of the free-set extraction loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FreeOrWitness {
    /// The selection loop exhausted the sequence; the indices are a
    /// candidate the caller should confirm with `is_free`.
    FreeCandidate { indices: Vec<usize> },
    /// Every remaining index was covered: α_n lies in the closure of
    /// {α_ℓ : ℓ ∈ (n, m') ∩ A or ℓ ∈ u}, reported for the least such n
    /// with the minimal window bound m'.
    CoveredPair {
        u: Vec<usize>,
        n: usize,
        m_prime: usize,
    },
    /// A membership test came back Unknown; the selection so far.
    Partial { selected: Vec<usize> },
}

/// Runs the selection dichotomy at finite scale: repeatedly pick the
/// first remaining index whose element escapes the closure of the later
/// remaining elements plus the selected ones, shrinking the remainder
/// past it. Exhaustion yields a free candidate; a fully covered
/// remainder yields a covered pair with a certified membership.
pub fn free_or_witness(
    algebra: &Algebra,
    seq: &[Element],
    budget: u64,
) -> Result<FreeOrWitness, AlgebraError> {
    let distinct: BTreeSet<&Element> = seq.iter().collect();
    if distinct.len() != seq.len() {
        return Err(AlgebraError::DuplicateElements);
    }
    if seq.is_empty() {
        return Ok(FreeOrWitness::FreeCandidate {
            indices: Vec::new(),
        });
    }
    let mut selected = alloc::vec![0usize];
    let mut active: Vec<usize> = (1..seq.len()).collect();
    loop {
        if active.is_empty() {
            return Ok(FreeOrWitness::FreeCandidate { indices: selected });
        }
        let mut escape: Option<usize> = None;
        for (pos, &n) in active.iter().enumerate() {
            let gens: BTreeSet<Element> = active[pos + 1..]
                .iter()
                .chain(selected.iter())
                .map(|&l| seq[l].clone())
                .collect();
            match member(algebra, &gens, &seq[n], budget)? {
                MemberVerdict::Out => {
                    escape = Some(pos);
                    break;
                }
                MemberVerdict::In { .. } => {}
                MemberVerdict::Unknown { .. } => {
                    return Ok(FreeOrWitness::Partial { selected });
                }
            }
        }
        match escape {
            Some(pos) => {
                let n = active[pos];
                selected.push(n);
                active.retain(|&x| x > n);
            }
            None => {
                // clause (iii) holds for (selected, active): report the
                // least covered index with its minimal window bound
                let n = active[0];
                for (end_pos, m_prime) in active[1..]
                    .iter()
                    .copied()
                    .chain(core::iter::once(seq.len()))
                    .enumerate()
                {
                    let gens: BTreeSet<Element> = active[1..1 + end_pos]
                        .iter()
                        .chain(selected.iter())
                        .map(|&l| seq[l].clone())
                        .collect();
                    match member(algebra, &gens, &seq[n], budget)? {
                        MemberVerdict::In { .. } => {
                            return Ok(FreeOrWitness::CoveredPair {
                                u: selected,
                                n,
                                m_prime,
                            });
                        }
                        MemberVerdict::Out => {}
                        MemberVerdict::Unknown { .. } => {
                            return Ok(FreeOrWitness::Partial { selected });
                        }
                    }
                }
                unreachable!("the full window repeats a certified membership");
            }
        }
    }
}

/// Restricts an algebra to the carrier {0..n-1}, verifying (up to a
/// deterministic sample for high arities) that its ops stay inside.
/// The oracle is kept; the base oracles in this crate remain exact on
/// initial-segment restrictions.
pub fn restrict_algebra(a: &Algebra, n: u64) -> Result<Algebra, AlgebraError> {
    if a.tag() != ElementTag::Nat {
        return Err(AlgebraError::NatCarrierRequired);
    }
    if n == 0 {
        return Err(AlgebraError::ZeroCarrier);
    }
    let level: BTreeSet<Element> = (0..n).map(Element::Nat).collect();
    for e in &level {
        if !a.contains(e) {
            return Err(AlgebraError::OutsideCarrier { element: e.clone() });
        }
    }
    check_level_preserving(a, 0, core::slice::from_ref(&level))?;
    let mut out = a.clone();
    out.set_label(format!("restrict({}, {n})", a.label()));
    out.set_carrier(Carrier::nat_range(n));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{chain_probe, closure, is_free, Freeness};

    fn nats(values: &[u64]) -> BTreeSet<Element> {
        values.iter().map(|&n| Element::Nat(n)).collect()
    }

    fn ord(s: &str) -> Element {
        Element::Ord(s.parse().unwrap())
    }

    #[test]
    fn predecessor_examples() {
        let a = predecessor_algebra();
        let r = closure(&a, &nats(&[7]), 50).unwrap();
        assert_eq!(r.found, nats(&[0, 1, 2, 3, 4, 5, 6, 7]));
        assert!(closure(&a, &BTreeSet::new(), 10).unwrap().found.is_empty());
        // descending singleton chains have length at most 9 from {0..8}
        let sets: Vec<BTreeSet<Element>> = (0..9).map(|i| nats(&[8 - i])).collect();
        let report = chain_probe(&a, &sets, 50).unwrap();
        assert_eq!(report.drop_positions.len(), 8);
    }

    #[test]
    fn constant_cover_examples() {
        let a = constant_cover_algebra(16).unwrap();
        let r = closure(&a, &nats(&[3]), 50).unwrap();
        assert_eq!(r.found, (0..16).map(Element::Nat).collect::<BTreeSet<_>>());
        assert!(r.saturated);
        let empty = closure(&a, &BTreeSet::new(), 50).unwrap();
        assert!(empty.found.is_empty());
        assert!(empty.saturated);
        assert!(matches!(
            is_free(&a, &nats(&[2, 9]), 50).unwrap(),
            Freeness::NotFree { .. }
        ));
        assert!(constant_cover_algebra(0).is_err());
    }

    #[test]
    fn singleton_cover_examples() {
        let a = singleton_cover_enrich(&predecessor_algebra());
        // u = {1,3}: bit encoding 2^1 + 2^3 = 10
        assert_eq!(bit_encode(&[1, 3].into_iter().collect()), 10);
        assert_eq!(
            a.eval_op("j1", &[Element::Nat(10)]).unwrap(),
            Element::Nat(1)
        );
        assert_eq!(
            a.eval_op("j2", &[Element::Nat(10), Element::Nat(10)])
                .unwrap(),
            Element::Nat(3)
        );
        assert_eq!(
            a.eval_op("j1", &[Element::Nat(1)]).unwrap(),
            Element::Nat(0)
        );
        // off-diagonal defaults to the first argument
        assert_eq!(
            a.eval_op("j2", &[Element::Nat(3), Element::Nat(5)])
                .unwrap(),
            Element::Nat(3)
        );
    }

    #[test]
    fn singleton_cover_guarantee_on_discrete_base() {
        // on a discrete base, cl({enc}) is the iterated bit-closure of
        // {enc}: membership cascades through bit positions of members
        let a = singleton_cover_enrich(&discrete_algebra(1 << 16));
        let u: BTreeSet<u64> = [0, 2, 5, 9, 12].into_iter().collect();
        let enc = bit_encode(&u);
        let r = closure(&a, &nats(&[enc]), 50).unwrap();
        assert!(r.saturated);
        assert!(nats(&u.iter().copied().collect::<Vec<_>>()).is_subset(&r.found));
        // independent oracle: fixpoint of x ↦ bit positions of x
        let mut expected: BTreeSet<u64> = [enc].into_iter().collect();
        loop {
            let next: BTreeSet<u64> = expected
                .iter()
                .flat_map(|&x| bit_positions(x))
                .chain(expected.iter().copied())
                .collect();
            if next == expected {
                break;
            }
            expected = next;
        }
        assert_eq!(
            r.found,
            expected
                .iter()
                .map(|&n| Element::Nat(n))
                .collect::<BTreeSet<_>>()
        );
    }

    #[test]
    fn uncurry_examples() {
        let a = uncurry_enrich(&constant_cover_algebra(8).unwrap(), &constant_family());
        // h_1(x, α) = α for the constant family
        assert_eq!(
            a.eval_op("h1", &[Element::Nat(2), Element::Nat(5)])
                .unwrap(),
            Element::Nat(5)
        );
        let p = uncurry_enrich(&predecessor_algebra(), &predecessor_family());
        for idx in [0u64, 3, 9] {
            assert_eq!(
                p.eval_op("h1", &[Element::Nat(4), Element::Nat(idx)])
                    .unwrap(),
                Element::Nat(3)
            );
        }
    }

    #[test]
    fn uncurry_off_arity_defaults_to_first_argument() {
        // a family with arity 1 at odd indices and arity 2 at even ones
        let mixed = IndexedFamily {
            name: String::from("mixed"),
            arities: [1, 2].into_iter().collect(),
            arity_of: Arc::new(|index| match index {
                Element::Nat(n) if n % 2 == 1 => 1,
                _ => 2,
            }),
            apply: Arc::new(|index, args| match (index, &args[0]) {
                (Element::Nat(i), Element::Nat(x)) => Element::Nat(i + x),
                _ => unreachable!(),
            }),
        };
        let a = uncurry_enrich(&discrete_algebra(64), &mixed);
        // matching arity applies the family member
        assert_eq!(
            a.eval_op("h1", &[Element::Nat(4), Element::Nat(3)])
                .unwrap(),
            Element::Nat(7)
        );
        // off-arity index falls back to the first argument
        assert_eq!(
            a.eval_op("h1", &[Element::Nat(4), Element::Nat(2)])
                .unwrap(),
            Element::Nat(4)
        );
        assert_eq!(
            a.eval_op("h2", &[Element::Nat(4), Element::Nat(9), Element::Nat(2)])
                .unwrap(),
            Element::Nat(6)
        );
        assert_eq!(
            a.eval_op("h2", &[Element::Nat(4), Element::Nat(9), Element::Nat(3)])
                .unwrap(),
            Element::Nat(4)
        );
    }

    #[test]
    fn indexed_family_iterates_found_indices_only() {
        let mut a = Algebra::new("indexed", ElementTag::Nat, Carrier::nat_range(16));
        a.push_indexed(constant_family());
        // f_ι is applied only for discovered ι, so singletons are closed
        let r = closure(&a, &nats(&[3]), 50).unwrap();
        assert_eq!(r.found, nats(&[3]));
        assert!(r.saturated);
        let r = closure(&a, &nats(&[3, 5]), 50).unwrap();
        assert_eq!(r.found, nats(&[3, 5]));
    }

    #[test]
    fn witness_examples() {
        // predecessor: no smaller mutual witness below 4
        let pred = predecessor_algebra();
        let (alpha, report) =
            witness_search(&pred, &BTreeSet::new(), &Element::Nat(4), 50).unwrap();
        assert_eq!(alpha, Element::Nat(4));
        assert!(matches!(
            report.certification,
            Certification::Certified { .. }
        ));

        // constant cover: mutual generation holds for all pairs
        let cover = constant_cover_algebra(16).unwrap();
        let (alpha, _) = witness_search(&cover, &BTreeSet::new(), &Element::Nat(9), 50).unwrap();
        assert_eq!(alpha, Element::Nat(0));

        let enriched = witness_enrich(&pred, 50);
        assert_eq!(
            enriched.eval_op("h'1", &[Element::Nat(4)]).unwrap(),
            Element::Nat(4)
        );
        // with context {7} every α ≤ 3 is mutually generated with β = 3,
        // so the least witness is 0
        assert_eq!(
            enriched
                .eval_op("h'2", &[Element::Nat(7), Element::Nat(3)])
                .unwrap(),
            Element::Nat(0)
        );
    }

    #[test]
    fn witness_reports_reverify() {
        let cover = constant_cover_algebra(12).unwrap();
        for beta in 1..6u64 {
            let (_, report) = witness_search(&cover, &nats(&[7]), &Element::Nat(beta), 60).unwrap();
            if let Certification::Certified { budget } = report.certification {
                let mut with_alpha = nats(&[7]);
                with_alpha.insert(report.alpha.clone());
                let mut with_beta = nats(&[7]);
                with_beta.insert(report.beta.clone());
                assert!(certified_in(&cover, &with_alpha, &report.beta, budget).unwrap());
                assert!(certified_in(&cover, &with_beta, &report.alpha, budget).unwrap());
                // minimality among scanned candidates
                let alpha_nat = report.alpha.as_nat().unwrap();
                for smaller in 0..alpha_nat {
                    let mut with_s = nats(&[7]);
                    with_s.insert(Element::Nat(smaller));
                    let mut with_b = nats(&[7]);
                    with_b.insert(report.beta.clone());
                    assert!(
                        !(certified_in(&cover, &with_s, &report.beta, budget).unwrap()
                            && certified_in(&cover, &with_b, &Element::Nat(smaller), budget)
                                .unwrap())
                    );
                }
            }
        }
    }

    #[test]
    fn whaley_lift_h_values() {
        let lift = whaley_lift(&predecessor_algebra(), &"w*2".parse().unwrap()).unwrap();
        assert_eq!(lift.eval_op("h", &[ord("w"), ord("3")]).unwrap(), ord("3"));
        assert_eq!(lift.eval_op("h", &[ord("3"), ord("7")]).unwrap(), ord("0"));
        assert_eq!(lift.eval_op("h", &[ord("w"), ord("w")]).unwrap(), ord("0"));
        assert_eq!(lift.eval_op("h", &[ord("0"), ord("w")]).unwrap(), ord("0"));
        assert_eq!(lift.eval_op("p", &[ord("w")]).unwrap(), ord("0"));
        assert_eq!(lift.eval_op("p", &[ord("5")]).unwrap(), ord("4"));
    }

    #[test]
    fn whaley_lift_closure_of_omega() {
        let lift = whaley_lift(&predecessor_algebra(), &"w*2".parse().unwrap()).unwrap();
        let r = closure(&lift, &[ord("w")].into_iter().collect(), 50).unwrap();
        assert!(r.saturated);
        assert_eq!(
            r.found,
            [ord("w"), ord("0")].into_iter().collect::<BTreeSet<_>>()
        );
    }

    #[test]
    fn whaley_lift_rejects_bad_inputs() {
        let pred = predecessor_algebra();
        assert!(matches!(
            whaley_lift(&pred, &Ordinal::from_nat(9)),
            Err(AlgebraError::CeilingNotInfinite)
        ));
        let mut no_oracle = pred.clone();
        no_oracle.clear_oracle();
        assert!(matches!(
            whaley_lift(&no_oracle, &Ordinal::omega()),
            Err(AlgebraError::OracleRequired)
        ));
    }

    #[test]
    fn trichotomy_examples() {
        let lift = whaley_lift(&predecessor_algebra(), &"w*4".parse().unwrap()).unwrap();
        let k0 = closure(&lift, &[ord("5")].into_iter().collect(), 50).unwrap();
        let k1 = closure(&lift, &[ord("3")].into_iter().collect(), 50).unwrap();
        match trichotomy_check(&lift, &k0, &k1).unwrap() {
            Trichotomy::Holds(cases) => {
                assert!(cases.base_proper && cases.sup_drops && cases.sup_escapes);
            }
            Trichotomy::Fails => panic!("initial segments satisfy all three clauses"),
        }

        let k0 = closure(&lift, &[ord("w")].into_iter().collect(), 50).unwrap();
        let k1 = closure(&lift, &[ord("0")].into_iter().collect(), 50).unwrap();
        match trichotomy_check(&lift, &k0, &k1).unwrap() {
            Trichotomy::Holds(cases) => {
                assert!(!cases.base_proper);
                assert!(cases.sup_drops && cases.sup_escapes);
            }
            Trichotomy::Fails => panic!("sup drops from omega to 0"),
        }

        assert!(matches!(
            trichotomy_check(&lift, &k0, &k0.clone()),
            Err(AlgebraError::NotStrictlyNested)
        ));
    }

    #[test]
    fn limit_glue_examples() {
        let strat = StratifiedCarrier::nat_prefixes(&[4, 8, 16]).unwrap();
        let pred = predecessor_algebra();
        let parts: Vec<Algebra> = [4u64, 8, 16]
            .iter()
            .map(|&n| restrict_algebra(&pred, n).unwrap())
            .collect();
        let glued = limit_glue(&parts, &strat).unwrap();
        // closures match plain predecessor behavior
        let r = closure(&glued, &nats(&[5]), 50).unwrap();
        assert_eq!(r.found, nats(&[0, 1, 2, 3, 4, 5]));
        // an op of parts[0] on a tuple straddling into level 2 returns
        // the least element of level 2
        assert_eq!(
            glued.eval_op("p@0", &[Element::Nat(12)]).unwrap(),
            Element::Nat(0)
        );
        assert_eq!(
            glued.eval_op("p@2", &[Element::Nat(12)]).unwrap(),
            Element::Nat(11)
        );
        // an op of parts[1] applied inside level 0 lands in level 0
        assert_eq!(
            glued.eval_op("p@1", &[Element::Nat(2)]).unwrap(),
            Element::Nat(1)
        );
    }

    #[test]
    fn limit_glue_rejects_mismatches() {
        let strat = StratifiedCarrier::nat_prefixes(&[4, 8]).unwrap();
        let pred = predecessor_algebra();
        let parts = alloc::vec![
            restrict_algebra(&pred, 4).unwrap(),
            restrict_algebra(&pred, 6).unwrap(),
        ];
        assert!(matches!(
            limit_glue(&parts, &strat),
            Err(AlgebraError::LevelMismatch { index: 1 })
        ));
        assert!(StratifiedCarrier::nat_prefixes(&[8, 4]).is_err());
        assert!(StratifiedCarrier::nat_prefixes(&[4, 4]).is_err());
    }

    #[test]
    fn stratified_witness_examples() {
        let strat = StratifiedCarrier::nat_prefixes(&[4, 8, 16]).unwrap();
        let pred = predecessor_algebra();

        // β already in level s and nothing smaller certifies
        let (alpha, report) =
            stratified_witness_search(&pred, &strat, 1, &BTreeSet::new(), &Element::Nat(6), 50)
                .unwrap();
        assert_eq!(alpha, Element::Nat(6));
        assert!(matches!(
            report.certification,
            Certification::Certified { .. }
        ));

        // constant cover: mutual generation puts the least level element first
        let cover = constant_cover_algebra(16).unwrap();
        let (alpha, report) =
            stratified_witness_search(&cover, &strat, 0, &nats(&[9]), &Element::Nat(11), 50)
                .unwrap();
        assert_eq!(alpha, Element::Nat(0));
        assert!(matches!(
            report.certification,
            Certification::Certified { .. }
        ));

        // budget 0: no search possible, defaulted to the least element
        let (alpha, report) =
            stratified_witness_search(&pred, &strat, 2, &BTreeSet::new(), &Element::Nat(3), 0)
                .unwrap();
        assert_eq!(alpha, Element::Nat(0));
        assert_eq!(report.certification, Certification::Defaulted);

        let enriched = stratified_witness_enrich(&pred, &strat, 50).unwrap();
        assert_eq!(
            enriched.eval_op("h1_1", &[Element::Nat(6)]).unwrap(),
            Element::Nat(6)
        );
    }

    #[test]
    fn free_or_witness_examples() {
        // empty signature: every test escapes, all indices selected
        let disc = discrete_algebra(32);
        let seq: Vec<Element> = [4u64, 9, 17, 23].iter().map(|&n| Element::Nat(n)).collect();
        assert_eq!(
            free_or_witness(&disc, &seq, 50).unwrap(),
            FreeOrWitness::FreeCandidate {
                indices: alloc::vec![0, 1, 2, 3]
            }
        );
        // candidates confirm under is_free with the same budget
        let candidate: BTreeSet<Element> = seq.iter().cloned().collect();
        assert_eq!(is_free(&disc, &candidate, 50).unwrap(), Freeness::Free);

        // constant cover: covered at the first test
        let cover = constant_cover_algebra(16).unwrap();
        let seq: Vec<Element> = [3u64, 7, 11].iter().map(|&n| Element::Nat(n)).collect();
        match free_or_witness(&cover, &seq, 50).unwrap() {
            FreeOrWitness::CoveredPair { u, n, .. } => {
                assert_eq!(u, alloc::vec![0]);
                assert_eq!(n, 1);
            }
            other => panic!("expected CoveredPair, got {other:?}"),
        }

        // predecessor on (9, 7, 5, 3): 7 is covered once 9 is selected
        let pred = predecessor_algebra();
        let seq: Vec<Element> = [9u64, 7, 5, 3].iter().map(|&n| Element::Nat(n)).collect();
        match free_or_witness(&pred, &seq, 50).unwrap() {
            FreeOrWitness::CoveredPair { u, n, m_prime } => {
                assert_eq!(u, alloc::vec![0]);
                assert_eq!(n, 1);
                // window (1, 2) ∩ A is empty; u = {index 0} already covers
                assert_eq!(m_prime, 2);
            }
            other => panic!("expected CoveredPair, got {other:?}"),
        }
    }

    #[test]
    fn covered_pair_membership_reverifies() {
        let pred = predecessor_algebra();
        let seq: Vec<Element> = [9u64, 7, 5, 3].iter().map(|&n| Element::Nat(n)).collect();
        if let FreeOrWitness::CoveredPair { u, n, m_prime } =
            free_or_witness(&pred, &seq, 50).unwrap()
        {
            let gens: BTreeSet<Element> = (n + 1..m_prime)
                .map(|l| seq[l].clone())
                .chain(u.iter().map(|&l| seq[l].clone()))
                .collect();
            assert!(matches!(
                member(&pred, &gens, &seq[n], 50).unwrap(),
                MemberVerdict::In { .. }
            ));
        } else {
            panic!("expected CoveredPair");
        }
    }

    #[test]
    fn restrict_keeps_behavior() {
        let pred = predecessor_algebra();
        let small = restrict_algebra(&pred, 10).unwrap();
        let r = closure(&small, &nats(&[7]), 50).unwrap();
        assert_eq!(r.found.len(), 8);
        assert!(closure(&small, &nats(&[12]), 50).is_err());
        assert!(restrict_algebra(&whaley_lift(&pred, &Ordinal::omega()).unwrap(), 5).is_err());
    }
}

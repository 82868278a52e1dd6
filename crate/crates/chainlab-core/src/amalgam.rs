//! Free amalgams of cyclic groups: reduced free-product words over the
//! nontrivial elements, the component projection τ, and the generating
//! function induced by an algebra on the generators, together with
//! executable checks of its defining clauses.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{closure, Algebra, AlgebraError, Element};

/// Order of the cyclic components: a fixed finite order shared by every
/// component, or infinite cyclic. Finite orders are restricted to odd
/// m ≥ 3 (components must have no involutions); the group-existence
/// theorem behind that restriction is out of scope here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modulus {
    Finite(u64),
    Infinite,
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulus::Finite(m) => write!(f, "{m}"),
            Modulus::Infinite => write!(f, "inf"),
        }
    }
}

/// A nontrivial element z_α^e of one cyclic component of the amalgam.
///
/// For finite modulus m the exponent is stored reduced to 1..m−1; for
/// the infinite cyclic case any nonzero exponent is allowed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub component: u64,
    pub exponent: i64,
    pub modulus: Modulus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AmalgamError {
    /// Finite moduli must be odd and at least 3.
    BadModulus(u64),
    /// The exponent reduces to zero, i.e. the letter is the identity.
    ZeroExponent,
    /// Letters or words with different moduli were combined.
    ModulusMismatch,
    /// An operation requiring nonempty input received an empty one.
    EmptyInput,
}

impl fmt::Display for AmalgamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmalgamError::BadModulus(m) => write!(f, "modulus {m} is not an odd number >= 3"),
            AmalgamError::ZeroExponent => write!(f, "letter exponent reduces to zero"),
            AmalgamError::ModulusMismatch => write!(f, "letters have different moduli"),
            AmalgamError::EmptyInput => write!(f, "input must be nonempty"),
        }
    }
}

impl Letter {
    pub fn new(component: u64, exponent: i64, modulus: Modulus) -> Result<Self, AmalgamError> {
        match modulus {
            Modulus::Finite(m) => {
                if m < 3 || m % 2 == 0 {
                    return Err(AmalgamError::BadModulus(m));
                }
                let e = exponent.rem_euclid(m as i64);
                if e == 0 {
                    return Err(AmalgamError::ZeroExponent);
                }
                Ok(Letter {
                    component,
                    exponent: e,
                    modulus,
                })
            }
            Modulus::Infinite => {
                if exponent == 0 {
                    return Err(AmalgamError::ZeroExponent);
                }
                Ok(Letter {
                    component,
                    exponent,
                    modulus,
                })
            }
        }
    }

    pub fn inverse(&self) -> Letter {
        match self.modulus {
            Modulus::Finite(m) => Letter {
                component: self.component,
                exponent: m as i64 - self.exponent,
                modulus: self.modulus,
            },
            Modulus::Infinite => Letter {
                component: self.component,
                exponent: -self.exponent,
                modulus: self.modulus,
            },
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z{}^{}", self.component, self.exponent)
    }
}

/// A reduced word over the free product of the components: adjacent
/// letters lie in distinct components and no letter is the identity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AmalgamWord {
    letters: Vec<Letter>,
}

impl AmalgamWord {
    pub fn identity() -> Self {
        AmalgamWord::default()
    }

    /// Builds a word from letters, reducing to normal form.
    pub fn from_letters(letters: Vec<Letter>) -> Result<Self, AmalgamError> {
        check_same_modulus(letters.iter())?;
        let mut stack: Vec<Letter> = Vec::new();
        for letter in letters {
            push_reduced(&mut stack, letter);
        }
        Ok(AmalgamWord { letters: stack })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> AmalgamWord {
        AmalgamWord {
            letters: self.letters.iter().rev().map(Letter::inverse).collect(),
        }
    }
}

impl fmt::Display for AmalgamWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

fn check_same_modulus<'a>(
    mut letters: impl Iterator<Item = &'a Letter>,
) -> Result<(), AmalgamError> {
    if let Some(first) = letters.next() {
        if letters.any(|l| l.modulus != first.modulus) {
            return Err(AmalgamError::ModulusMismatch);
        }
    }
    Ok(())
}

fn push_reduced(stack: &mut Vec<Letter>, letter: Letter) {
    match stack.last() {
        Some(top) if top.component == letter.component => {
            let merged = match letter.modulus {
                Modulus::Finite(m) => (top.exponent + letter.exponent).rem_euclid(m as i64),
                Modulus::Infinite => top.exponent + letter.exponent,
            };
            if merged == 0 {
                stack.pop();
            } else {
                stack.last_mut().expect("nonempty").exponent = merged;
            }
        }
        _ => stack.push(letter),
    }
}

/// Free-product multiplication: concatenate and reduce to normal form.
pub fn word_mul(a: &AmalgamWord, b: &AmalgamWord) -> Result<AmalgamWord, AmalgamError> {
    check_same_modulus(a.letters.iter().chain(b.letters.iter()))?;
    let mut stack = a.letters.clone();
    for letter in &b.letters {
        push_reduced(&mut stack, letter.clone());
    }
    Ok(AmalgamWord { letters: stack })
}

/// Component projection: each letter z_α^e maps to the generator z_α,
/// represented by its index as a `Nat` element.
pub fn tau_letters(letters: &BTreeSet<Letter>) -> BTreeSet<Element> {
    letters.iter().map(|l| Element::Nat(l.component)).collect()
}

/// A symbolic value of the generating function: either a subgroup of a
/// single component (recorded by the gcd of the exponents and, when
/// finite, the order) or the union of whole components indexed by a
/// budgeted closure of the projected generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComponentSet {
    WithinComponent {
        component: u64,
        subgroup_gcd: u64,
    },
    UnionOfComponents {
        components: BTreeSet<u64>,
        saturated: bool,
    },
}

impl ComponentSet {
    /// Component indices touched by this value.
    pub fn component_indices(&self) -> BTreeSet<u64> {
        match self {
            ComponentSet::WithinComponent { component, .. } => {
                core::iter::once(*component).collect()
            }
            ComponentSet::UnionOfComponents { components, .. } => components.clone(),
        }
    }

    pub fn is_saturated(&self) -> bool {
        match self {
            ComponentSet::WithinComponent { .. } => true,
            ComponentSet::UnionOfComponents { saturated, .. } => *saturated,
        }
    }
}

impl fmt::Display for ComponentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentSet::WithinComponent {
                component,
                subgroup_gcd,
            } => write!(f, "within(z{component}, gcd={subgroup_gcd})"),
            ComponentSet::UnionOfComponents {
                components,
                saturated,
            } => {
                write!(f, "union(")?;
                for (i, c) in components.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, "){}", if *saturated { "" } else { " unsaturated" })
            }
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The generating function f. Single-component inputs yield the cyclic
/// subgroup generated by the letters (minus the identity), recorded by
/// gcd data; mixed inputs yield the union of the components indexed by
/// the closure of τ(X) in the given algebra on the generators.
pub fn generating_fn(
    alg: &Algebra,
    x: &BTreeSet<Letter>,
    budget: u64,
) -> Result<ComponentSet, AlgebraError> {
    if x.is_empty() {
        return Err(AlgebraError::EmptyGeneratorSet);
    }
    let first = x.iter().next().expect("nonempty");
    if x.iter().any(|l| l.modulus != first.modulus) {
        return Err(AlgebraError::Amalgam(AmalgamError::ModulusMismatch));
    }
    let single = x.iter().all(|l| l.component == first.component);
    if single {
        let d = x
            .iter()
            .fold(0u64, |acc, l| gcd(acc, l.exponent.unsigned_abs()));
        let d = match first.modulus {
            Modulus::Finite(m) => gcd(d, m),
            Modulus::Infinite => d,
        };
        return Ok(ComponentSet::WithinComponent {
            component: first.component,
            subgroup_gcd: d,
        });
    }
    let gens = tau_letters(x);
    let result = closure(alg, &gens, budget)?;
    let components = result
        .found
        .iter()
        .map(|e| match e {
            Element::Nat(n) => *n,
            _ => unreachable!("generator algebras carry Nat elements"),
        })
        .collect();
    Ok(ComponentSet::UnionOfComponents {
        components,
        saturated: result.saturated,
    })
}

/// The letters appearing in a nonempty collection of nonempty words.
pub fn letters_of(words: &[AmalgamWord]) -> Result<BTreeSet<Letter>, AmalgamError> {
    if words.is_empty() || words.iter().any(AmalgamWord::is_identity) {
        return Err(AmalgamError::EmptyInput);
    }
    Ok(words
        .iter()
        .flat_map(|w| w.letters.iter().cloned())
        .collect())
}

/// F(𝒲) = f(letters of 𝒲).
pub fn f_of(
    alg: &Algebra,
    words: &[AmalgamWord],
    budget: u64,
) -> Result<ComponentSet, AlgebraError> {
    let letters = letters_of(words).map_err(AlgebraError::Amalgam)?;
    generating_fn(alg, &letters, budget)
}

/// Outcome of one generating-axiom check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckOutcome {
    Pass,
    Fail,
    /// An involved closure did not saturate within budget.
    Partial,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckOutcome::Pass => write!(f, "pass"),
            CheckOutcome::Fail => write!(f, "fail"),
            CheckOutcome::Partial => write!(f, "partial"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub detail: String,
    pub outcome: CheckOutcome,
}

#[derive(Debug, Clone, Default)]
pub struct AxiomsReport {
    pub entries: Vec<AxiomCheck>,
}

impl AxiomsReport {
    pub fn failures(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.outcome == CheckOutcome::Fail)
            .count()
    }

    pub fn partials(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.outcome == CheckOutcome::Partial)
            .count()
    }
}

/// The cyclic subgroup of Z/m generated by a set of exponents, by
/// additive closure. Independent of the gcd route in `generating_fn`.
fn cyclic_subgroup(exponents: &[u64], m: u64) -> BTreeSet<u64> {
    let mut set: BTreeSet<u64> = BTreeSet::new();
    set.insert(0);
    loop {
        let mut grew = false;
        let snapshot: Vec<u64> = set.iter().copied().collect();
        for s in &snapshot {
            for e in exponents {
                if set.insert((s + e) % m) {
                    grew = true;
                }
            }
        }
        if !grew {
            return set;
        }
    }
}

/// Executable checks of the generating-function clauses on sampled
/// letter sets: (a) single-component values are the cyclic subgroup,
/// (b) finite subsets of a value generate inside it, (c) a finite set's
/// value is the union over its nonempty subsets, and idempotence at the
/// component level.
pub fn check_generating_axioms(
    alg: &Algebra,
    samples: &[BTreeSet<Letter>],
    budget: u64,
) -> Result<AxiomsReport, AlgebraError> {
    let mut report = AxiomsReport::default();
    for x in samples {
        let value = generating_fn(alg, x, budget)?;
        match &value {
            ComponentSet::WithinComponent {
                component,
                subgroup_gcd,
            } => {
                // (a): compare the gcd datum against the additive closure
                let first = x.iter().next().expect("nonempty");
                let outcome = match first.modulus {
                    Modulus::Finite(m) => {
                        let exps: Vec<u64> = x.iter().map(|l| l.exponent.unsigned_abs()).collect();
                        let subgroup = cyclic_subgroup(&exps, m);
                        let by_gcd: BTreeSet<u64> =
                            (0..m).filter(|v| v % subgroup_gcd == 0).collect();
                        if subgroup == by_gcd {
                            CheckOutcome::Pass
                        } else {
                            CheckOutcome::Fail
                        }
                    }
                    Modulus::Infinite => {
                        if x.iter()
                            .all(|l| l.exponent.unsigned_abs() % subgroup_gcd == 0)
                        {
                            CheckOutcome::Pass
                        } else {
                            CheckOutcome::Fail
                        }
                    }
                };
                report.entries.push(AxiomCheck {
                    axiom: "a",
                    detail: alloc::format!(
                        "f({}) = within(z{component}, gcd={subgroup_gcd})",
                        fmt_letters(x)
                    ),
                    outcome,
                });
            }
            ComponentSet::UnionOfComponents {
                components,
                saturated,
            } => {
                // (b): letters drawn from f(X) generate inside f(X)
                let modulus = x.iter().next().expect("nonempty").modulus;
                let outcome = if !saturated {
                    CheckOutcome::Partial
                } else {
                    let z: BTreeSet<Letter> = components
                        .iter()
                        .map(|c| Letter::new(*c, 1, modulus).expect("unit exponent"))
                        .collect();
                    let fz = generating_fn(alg, &z, budget)?;
                    if !fz.is_saturated() {
                        CheckOutcome::Partial
                    } else if fz.component_indices().is_subset(components) {
                        CheckOutcome::Pass
                    } else {
                        CheckOutcome::Fail
                    }
                };
                report.entries.push(AxiomCheck {
                    axiom: "b",
                    detail: alloc::format!("f(Z) ⊆ f({}) for Z spanning the value", fmt_letters(x)),
                    outcome,
                });
            }
        }
        // (c): f(X) equals the union of f over nonempty subsets of X,
        // at the component-index level.
        if x.len() <= 6 {
            let letters: Vec<Letter> = x.iter().cloned().collect();
            let mut union: BTreeSet<u64> = BTreeSet::new();
            let mut partial = false;
            for mask in 1u32..(1 << letters.len()) {
                let z: BTreeSet<Letter> = letters
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, l)| l.clone())
                    .collect();
                let fz = generating_fn(alg, &z, budget)?;
                partial |= !fz.is_saturated();
                union.extend(fz.component_indices());
            }
            let outcome = if partial || !value.is_saturated() {
                CheckOutcome::Partial
            } else if union == value.component_indices() {
                CheckOutcome::Pass
            } else {
                CheckOutcome::Fail
            };
            report.entries.push(AxiomCheck {
                axiom: "c",
                detail: alloc::format!("f({}) = union over nonempty subsets", fmt_letters(x)),
                outcome,
            });
        }
        // idempotence: f applied to representatives of f(X) returns the
        // same component set.
        let outcome = if !value.is_saturated() {
            CheckOutcome::Partial
        } else {
            let modulus = x.iter().next().expect("nonempty").modulus;
            let reps: BTreeSet<Letter> = match &value {
                ComponentSet::WithinComponent {
                    component,
                    subgroup_gcd,
                } => {
                    let e = if *subgroup_gcd == 0 { 1 } else { *subgroup_gcd };
                    core::iter::once(
                        Letter::new(*component, e as i64, modulus).expect("gcd is nonzero mod m"),
                    )
                    .collect()
                }
                ComponentSet::UnionOfComponents { components, .. } => components
                    .iter()
                    .map(|c| Letter::new(*c, 1, modulus).expect("unit exponent"))
                    .collect(),
            };
            let again = generating_fn(alg, &reps, budget)?;
            if !again.is_saturated() {
                CheckOutcome::Partial
            } else if again.component_indices() == value.component_indices() {
                CheckOutcome::Pass
            } else {
                CheckOutcome::Fail
            }
        };
        report.entries.push(AxiomCheck {
            axiom: "idempotence",
            detail: alloc::format!("f(f({})) = f({0})", fmt_letters(x)),
            outcome,
        });
    }
    Ok(report)
}

fn fmt_letters(x: &BTreeSet<Letter>) -> String {
    let mut s = String::from("{");
    for (i, l) in x.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&alloc::format!("{l}"));
    }
    s.push('}');
    s
}

/// Parses a word literal: letters `z<index>^<exp>` separated by spaces,
/// e.g. `z0^2 z3^1`. The modulus is supplied by context.
pub fn parse_word(s: &str, modulus: Modulus) -> Result<AmalgamWord, String> {
    let mut letters = Vec::new();
    for token in s.split_whitespace() {
        letters.push(parse_letter(token, modulus)?);
    }
    AmalgamWord::from_letters(letters).map_err(|e| alloc::format!("{e}"))
}

/// Parses a single letter literal `z<index>^<exp>`.
pub fn parse_letter(token: &str, modulus: Modulus) -> Result<Letter, String> {
    let rest = token
        .strip_prefix('z')
        .ok_or_else(|| alloc::format!("letter `{token}` must start with 'z'"))?;
    let (idx, exp) = rest
        .split_once('^')
        .ok_or_else(|| alloc::format!("letter `{token}` needs an exponent, e.g. z0^2"))?;
    let component: u64 = idx
        .parse()
        .map_err(|_| alloc::format!("bad component index in `{token}`"))?;
    let exponent: i64 = exp
        .parse()
        .map_err(|_| alloc::format!("bad exponent in `{token}`"))?;
    Letter::new(component, exponent, modulus).map_err(|e| alloc::format!("{token}: {e}"))
}

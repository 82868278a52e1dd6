//! Ordinals below ε₀ in Cantor normal form, with exact arithmetic,
//! canonical fundamental sequences, and a canonical bijection between
//! any infinite ordinal's predecessors and the naturals.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// An ordinal below ε₀, stored as a strictly-decreasing sum of terms
/// ω^e·c with coefficients c ≥ 1. The empty sum is 0; a natural n is
/// the single term ω^0·n.
///
/// The derived ordering is lexicographic on the term list, which agrees
/// with ordinal order on normal forms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Ordinal {
    terms: Vec<(Ordinal, u64)>,
}

/// Zero / successor / limit classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrdinalKind {
    Zero,
    Successor,
    Limit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrdinalError {
    /// Subtraction `a - b` with `b > a`.
    Underflow,
    /// A fundamental sequence was requested for a non-limit ordinal.
    NotALimit,
    /// An enumeration was requested for a finite ordinal.
    NotInfinite,
    /// `enum_encode(gamma, alpha)` with `alpha >= gamma`.
    OutOfRange,
    /// An enumeration index exceeded the `u64` range.
    Overflow,
    /// Invalid term list handed to `from_terms`.
    NotNormal,
}

impl fmt::Display for OrdinalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrdinalError::Underflow => write!(f, "subtrahend exceeds minuend"),
            OrdinalError::NotALimit => write!(f, "ordinal is not a limit"),
            OrdinalError::NotInfinite => write!(f, "ordinal is not infinite"),
            OrdinalError::OutOfRange => write!(f, "ordinal is out of range"),
            OrdinalError::Overflow => write!(f, "enumeration index exceeds u64"),
            OrdinalError::NotNormal => write!(f, "terms are not in Cantor normal form"),
        }
    }
}

impl Ordinal {
    pub const fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn from_nat(n: u64) -> Self {
        if n == 0 {
            Ordinal::zero()
        } else {
            Ordinal {
                terms: alloc::vec![(Ordinal::zero(), n)],
            }
        }
    }

    pub fn omega() -> Self {
        Ordinal::omega_pow(Ordinal::from_nat(1))
    }

    /// ω^e.
    pub fn omega_pow(e: Ordinal) -> Self {
        Ordinal::omega_pow_mul(e, 1)
    }

    /// ω^e·c. Returns 0 when c = 0.
    pub fn omega_pow_mul(e: Ordinal, c: u64) -> Self {
        if c == 0 {
            Ordinal::zero()
        } else {
            Ordinal {
                terms: alloc::vec![(e, c)],
            }
        }
    }

    /// Builds an ordinal from explicit terms, validating normal form.
    pub fn from_terms(terms: Vec<(Ordinal, u64)>) -> Result<Self, OrdinalError> {
        for window in terms.windows(2) {
            if window[0].0 <= window[1].0 {
                return Err(OrdinalError::NotNormal);
            }
        }
        if terms.iter().any(|(_, c)| *c == 0) {
            return Err(OrdinalError::NotNormal);
        }
        Ok(Ordinal { terms })
    }

    pub fn terms(&self) -> &[(Ordinal, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The natural-number value, if this ordinal is finite.
    pub fn as_nat(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(e, c)] if e.is_zero() => Some(*c),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_nat().is_some()
    }

    pub fn is_infinite(&self) -> bool {
        !self.is_finite()
    }

    pub fn kind(&self) -> OrdinalKind {
        match self.terms.last() {
            None => OrdinalKind::Zero,
            Some((e, _)) if e.is_zero() => OrdinalKind::Successor,
            Some(_) => OrdinalKind::Limit,
        }
    }

    pub fn is_limit(&self) -> bool {
        self.kind() == OrdinalKind::Limit
    }

    pub fn is_successor(&self) -> bool {
        self.kind() == OrdinalKind::Successor
    }

    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::from_nat(1))
    }

    /// Splits off the trailing finite part: `self = limit_or_zero + tail`.
    pub fn split_finite_tail(&self) -> (Ordinal, u64) {
        match self.terms.last() {
            Some((e, c)) if e.is_zero() => {
                let head = Ordinal {
                    terms: self.terms[..self.terms.len() - 1].to_vec(),
                };
                (head, *c)
            }
            _ => (self.clone(), 0),
        }
    }

    /// Ordinal addition in normal form.
    pub fn add(&self, other: &Ordinal) -> Ordinal {
        if other.is_zero() {
            return self.clone();
        }
        let (lead_exp, lead_coeff) = &other.terms[0];
        let mut terms: Vec<(Ordinal, u64)> = self
            .terms
            .iter()
            .filter(|(e, _)| e > lead_exp)
            .cloned()
            .collect();
        // absorb: a term of self with the same exponent merges coefficients
        let merged = self
            .terms
            .iter()
            .find(|(e, _)| e == lead_exp)
            .map(|(_, c)| c + lead_coeff)
            .unwrap_or(*lead_coeff);
        terms.push((lead_exp.clone(), merged));
        terms.extend(other.terms[1..].iter().cloned());
        Ordinal { terms }
    }

    /// Left subtraction: the unique ρ with `other + ρ = self`, defined
    /// when `other <= self`.
    pub fn left_sub(&self, other: &Ordinal) -> Result<Ordinal, OrdinalError> {
        let a = &self.terms;
        let b = &other.terms;
        let mut i = 0;
        while i < a.len() && i < b.len() && a[i] == b[i] {
            i += 1;
        }
        if i == b.len() {
            // other is a (possibly full) prefix of self
            return Ok(Ordinal {
                terms: a[i..].to_vec(),
            });
        }
        if i == a.len() {
            return Err(OrdinalError::Underflow);
        }
        let (ea, ca) = &a[i];
        let (eb, cb) = &b[i];
        if ea > eb {
            Ok(Ordinal {
                terms: a[i..].to_vec(),
            })
        } else if ea < eb || ca < cb {
            Err(OrdinalError::Underflow)
        } else {
            let mut terms = alloc::vec![(ea.clone(), ca - cb)];
            terms.extend(a[i + 1..].iter().cloned());
            Ok(Ordinal { terms })
        }
    }

    /// Predecessor of a successor ordinal.
    pub fn pred(&self) -> Result<Ordinal, OrdinalError> {
        let (head, tail) = self.split_finite_tail();
        if tail == 0 {
            return Err(OrdinalError::Underflow);
        }
        Ok(head.add(&Ordinal::from_nat(tail - 1)))
    }

    /// `self` with the final term's coefficient decremented (the term is
    /// dropped when the coefficient reaches zero). Used by the canonical
    /// fundamental-sequence and enumeration schemes.
    fn drop_one_final(&self) -> Ordinal {
        let mut terms = self.terms.clone();
        let last = terms.len() - 1;
        if terms[last].1 > 1 {
            terms[last].1 -= 1;
        } else {
            terms.pop();
        }
        Ordinal { terms }
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::from_nat(n)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if e.is_zero() {
                write!(f, "{c}")?;
            } else {
                write!(f, "w")?;
                if e.as_nat() != Some(1) {
                    match e.as_nat() {
                        Some(n) => write!(f, "^{n}")?,
                        None => write!(f, "^({e})")?,
                    }
                }
                if *c != 1 {
                    write!(f, "*{c}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The canonical fundamental sequence of a limit ordinal: for
/// γ = δ + ω^(e+1) take `γ[n] = δ + ω^e·n`, for γ = δ + ω^λ with λ a
/// limit take `γ[n] = δ + ω^(λ[n])`, and for a trailing coefficient
/// c ≥ 2 fold ω^e·(c−1) into δ first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FundamentalSequence {
    base: Ordinal,
}

impl FundamentalSequence {
    pub fn base(&self) -> &Ordinal {
        &self.base
    }

    /// `γ[n]`; strictly increasing in n with supremum γ.
    pub fn index(&self, n: u64) -> Ordinal {
        let delta = self.base.drop_one_final();
        let (exp, _) = self.base.terms.last().expect("limit is nonzero");
        match exp.kind() {
            OrdinalKind::Zero => unreachable!("limit ordinals have no finite tail"),
            OrdinalKind::Successor => {
                let e = exp.pred().expect("successor exponent");
                delta.add(&Ordinal::omega_pow_mul(e, n))
            }
            OrdinalKind::Limit => {
                let inner = FundamentalSequence { base: exp.clone() };
                delta.add(&Ordinal::omega_pow(inner.index(n)))
            }
        }
    }
}

/// Canonical fundamental sequence of a limit ordinal below ε₀.
pub fn fundamental(gamma: &Ordinal) -> Result<FundamentalSequence, OrdinalError> {
    if gamma.is_limit() {
        Ok(FundamentalSequence {
            base: gamma.clone(),
        })
    } else {
        Err(OrdinalError::NotALimit)
    }
}

/// Cantor pairing (n+k)(n+k+1)/2 + k, fixed bit-exactly.
///
/// Panics when the code exceeds `u64`; [`enum_encode`] reports that
/// case as [`OrdinalError::Overflow`] instead.
pub fn cantor_pair(n: u64, k: u64) -> u64 {
    checked_cantor_pair(n, k).expect("cantor pair exceeds u64")
}

fn checked_cantor_pair(n: u64, k: u64) -> Option<u64> {
    let s = n as u128 + k as u128;
    let v = s * (s + 1) / 2 + k as u128;
    u64::try_from(v).ok()
}

/// Inverse of [`cantor_pair`].
pub fn cantor_unpair(m: u64) -> (u64, u64) {
    let w = ((8 * m as u128 + 1).isqrt() - 1) / 2;
    let t = w * (w + 1) / 2;
    let k = m as u128 - t;
    ((w - k) as u64, k as u64)
}

/// The canonical bijection from {α : α < γ} onto the naturals, for
/// infinite γ < ε₀.
///
/// Scheme, by recursion on the normal form of γ:
/// - γ = δ + t with a finite tail t ≥ 1: the tail elements δ+j map to
///   t−1−j (so the top element maps to 0), and α < δ maps to
///   t + encode(δ, α). This is the t-fold iteration of the successor
///   rule γ′ ↦ 0, α ↦ 1 + encode(γ′, α).
/// - γ = ω: the identity on the naturals.
/// - γ = ω^e with e ≥ 2: segments `S₀ = [0, γ[1])` and
///   `Sₙ = [γ[n], γ[n+1])` of the fundamental sequence; α in Sₙ at
///   offset ρ maps to pair(n, encode(seg_len, ρ)). Every segment
///   length is infinite here.
/// - otherwise (last term ω^e with e ≥ 1, and either more terms or a
///   coefficient ≥ 2): split γ = head + ω^e with head = γ minus one
///   final ω^e; α < head maps to 2·encode(head, α) and α = head + ρ maps
///   to 2·encode(ω^e, ρ) + 1. Both halves are infinite.
///
/// The even/odd split gives encode(γ, 0) = 0 for every γ, which keeps
/// the enumeration stable under composition.
pub fn enum_encode(gamma: &Ordinal, alpha: &Ordinal) -> Result<u64, OrdinalError> {
    if gamma.is_finite() {
        return Err(OrdinalError::NotInfinite);
    }
    if alpha >= gamma {
        return Err(OrdinalError::OutOfRange);
    }
    let (head, tail) = gamma.split_finite_tail();
    if tail > 0 {
        // head is infinite and a limit
        return if alpha >= &head {
            let j = alpha
                .left_sub(&head)
                .expect("alpha >= head")
                .as_nat()
                .expect("tail offset is finite");
            Ok(tail - 1 - j)
        } else {
            tail.checked_add(enum_encode(&head, alpha)?)
                .ok_or(OrdinalError::Overflow)
        };
    }
    // gamma is a limit
    let (exp, coeff) = gamma.terms.last().expect("infinite is nonzero").clone();
    if gamma.terms.len() == 1 && coeff == 1 {
        if exp.as_nat() == Some(1) {
            // γ = ω: identity on the naturals
            return Ok(alpha.as_nat().expect("alpha < omega"));
        }
        // γ = ω^e, e ≥ 2: segment scheme over the fundamental sequence
        let fs = fundamental(gamma)?;
        let mut n: u64 = 0;
        let mut base = Ordinal::zero();
        let mut next = fs.index(1);
        while alpha >= &next {
            n += 1;
            base = next;
            next = fs.index(n + 1);
        }
        let rho = alpha.left_sub(&base).expect("alpha >= segment base");
        let seg_len = next.left_sub(&base).expect("segments increase");
        let local = enum_encode(&seg_len, &rho)?;
        return checked_cantor_pair(n, local).ok_or(OrdinalError::Overflow);
    }
    // mixed: γ = head + ω^e with infinite head
    let head = gamma.drop_one_final();
    let block = Ordinal::omega_pow(exp);
    if alpha < &head {
        enum_encode(&head, alpha)?
            .checked_mul(2)
            .ok_or(OrdinalError::Overflow)
    } else {
        let rho = alpha.left_sub(&head).expect("alpha >= head");
        enum_encode(&block, &rho)?
            .checked_mul(2)
            .and_then(|v| v.checked_add(1))
            .ok_or(OrdinalError::Overflow)
    }
}

/// Exact inverse of [`enum_encode`].
pub fn enum_decode(gamma: &Ordinal, n: u64) -> Result<Ordinal, OrdinalError> {
    if gamma.is_finite() {
        return Err(OrdinalError::NotInfinite);
    }
    let (head, tail) = gamma.split_finite_tail();
    if tail > 0 {
        return if n < tail {
            Ok(head.add(&Ordinal::from_nat(tail - 1 - n)))
        } else {
            enum_decode(&head, n - tail)
        };
    }
    let (exp, coeff) = gamma.terms.last().expect("infinite is nonzero").clone();
    if gamma.terms.len() == 1 && coeff == 1 {
        if exp.as_nat() == Some(1) {
            return Ok(Ordinal::from_nat(n));
        }
        let fs = fundamental(gamma)?;
        let (seg, local) = cantor_unpair(n);
        let base = if seg == 0 {
            Ordinal::zero()
        } else {
            fs.index(seg)
        };
        let seg_len = fs
            .index(seg + 1)
            .left_sub(&base)
            .expect("segments increase");
        return Ok(base.add(&enum_decode(&seg_len, local)?));
    }
    let head = gamma.drop_one_final();
    let block = Ordinal::omega_pow(exp);
    if n.is_multiple_of(2) {
        enum_decode(&head, n / 2)
    } else {
        Ok(head.add(&enum_decode(&block, (n - 1) / 2)?))
    }
}

/// Parse error for the ordinal literal grammar, with a byte position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOrdinalError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseOrdinalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.pos, self.msg)
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseOrdinalError> {
        Err(ParseOrdinalError {
            pos: self.pos,
            msg: String::from(msg),
        })
    }

    fn nat(&mut self) -> Result<u64, ParseOrdinalError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a natural number");
        }
        core::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(ParseOrdinalError {
                pos: start,
                msg: String::from("natural number out of range"),
            })
    }

    // term := 'w' ('^' exponent)? ('*' nat)? | nat
    // exponent := '(' expr ')' | 'w' ('^' exponent)? | nat
    fn term(&mut self) -> Result<(Ordinal, u64), ParseOrdinalError> {
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                let exp = if self.peek() == Some(b'^') {
                    self.pos += 1;
                    self.exponent()?
                } else {
                    Ordinal::from_nat(1)
                };
                let coeff = if self.peek() == Some(b'*') {
                    self.pos += 1;
                    self.nat()?
                } else {
                    1
                };
                Ok((exp, coeff))
            }
            Some(b'0'..=b'9') => Ok((Ordinal::zero(), self.nat()?)),
            _ => self.err("expected 'w' or a natural number"),
        }
    }

    fn exponent(&mut self) -> Result<Ordinal, ParseOrdinalError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'w') => {
                self.pos += 1;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    Ok(Ordinal::omega_pow(self.exponent()?))
                } else {
                    Ok(Ordinal::omega())
                }
            }
            Some(b'0'..=b'9') => Ok(Ordinal::from_nat(self.nat()?)),
            _ => self.err("expected an exponent"),
        }
    }

    fn expr(&mut self) -> Result<Ordinal, ParseOrdinalError> {
        let mut terms = alloc::vec![self.term()?];
        while self.peek() == Some(b'+') {
            self.pos += 1;
            terms.push(self.term()?);
        }
        // `0` alone denotes zero; otherwise every coefficient must be >= 1
        // and exponents strictly decreasing — non-normal input is rejected.
        if terms.len() == 1 && terms[0] == (Ordinal::zero(), 0) {
            return Ok(Ordinal::zero());
        }
        for (i, window) in terms.windows(2).enumerate() {
            if window[0].0 <= window[1].0 {
                return Err(ParseOrdinalError {
                    pos: self.pos,
                    msg: alloc::format!(
                        "terms {} and {} are not in strictly decreasing exponent order",
                        i,
                        i + 1
                    ),
                });
            }
        }
        if terms.iter().any(|(_, c)| *c == 0) {
            return self.err("zero coefficient is not in normal form");
        }
        Ok(Ordinal { terms })
    }
}

impl FromStr for Ordinal {
    type Err = ParseOrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser {
            bytes: s.as_bytes(),
            pos: 0,
        };
        let o = p.expr()?;
        if p.pos != p.bytes.len() {
            return p.err("trailing input after ordinal literal");
        }
        Ok(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ord(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn omega() -> Ordinal {
        Ordinal::omega()
    }

    #[test]
    fn comparison_examples() {
        assert!(ord("5") < omega());
        assert_eq!(ord("w*2+1"), ord("w*2+1"));
        assert!(ord("w^2") > ord("w*7+3"));
    }

    #[test]
    fn addition_examples() {
        assert_eq!(omega().add(&ord("3")), ord("w+3"));
        assert_eq!(ord("3").add(&omega()), omega());
        assert_eq!(ord("w^2+w").add(&ord("w*2+5")), ord("w^2+w*3+5"));
    }

    #[test]
    fn subtraction_round_trip() {
        // ord_sub(ω·2+5, ω) verified by the add round trip
        let diff = ord("w*2+5").left_sub(&omega()).unwrap();
        assert_eq!(omega().add(&diff), ord("w*2+5"));
        assert_eq!(diff, ord("w+5"));
        assert_eq!(ord("w").left_sub(&ord("w")).unwrap(), Ordinal::zero());
        assert!(ord("w").left_sub(&ord("w+1")).is_err());
        assert!(ord("5").left_sub(&ord("w")).is_err());
    }

    #[test]
    fn kinds() {
        assert_eq!(Ordinal::zero().kind(), OrdinalKind::Zero);
        assert_eq!(ord("7").kind(), OrdinalKind::Successor);
        assert_eq!(ord("w+1").kind(), OrdinalKind::Successor);
        assert_eq!(omega().kind(), OrdinalKind::Limit);
        assert_eq!(ord("w^2+w*3").kind(), OrdinalKind::Limit);
    }

    fn random_ordinal(rng: &mut ChaCha8Rng, max_exp: u64) -> Ordinal {
        // random normal form below ω^(max_exp+1)
        let n_terms = rng.gen_range(0..=3);
        let mut exps: Vec<u64> = (0..n_terms).map(|_| rng.gen_range(0..=max_exp)).collect();
        exps.sort_unstable();
        exps.dedup();
        exps.reverse();
        let terms = exps
            .into_iter()
            .map(|e| (Ordinal::from_nat(e), rng.gen_range(1..=9)))
            .collect();
        Ordinal::from_terms(terms).unwrap()
    }

    #[test]
    fn add_associative_and_sub_inverse_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..10_000 {
            let a = random_ordinal(&mut rng, 4);
            let b = random_ordinal(&mut rng, 4);
            let c = random_ordinal(&mut rng, 4);
            assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            let sum = b.add(&a);
            let diff = sum.left_sub(&b).unwrap();
            assert_eq!(b.add(&diff), sum);
            if a <= b {
                let d = b.left_sub(&a).unwrap();
                assert_eq!(a.add(&d), b);
            }
        }
    }

    #[test]
    fn fundamental_examples() {
        let fs = fundamental(&omega()).unwrap();
        for n in 0..10 {
            assert_eq!(fs.index(n), Ordinal::from_nat(n));
        }
        let fs = fundamental(&ord("w*2")).unwrap();
        for n in 0..10 {
            assert_eq!(fs.index(n), omega().add(&Ordinal::from_nat(n)));
        }
        let fs = fundamental(&ord("w^2")).unwrap();
        for n in 0..10 {
            assert_eq!(fs.index(n), Ordinal::omega_pow_mul(Ordinal::from_nat(1), n));
        }
        assert!(fundamental(&ord("w+1")).is_err());
        assert!(fundamental(&Ordinal::zero()).is_err());
    }

    #[test]
    fn fundamental_monotone_with_sup() {
        let gammas = ["w", "w*2", "w^2", "w^2+w*3", "w^3", "w^w", "w^(w+1)"];
        for g in gammas {
            let gamma = ord(g);
            let fs = fundamental(&gamma).unwrap();
            let mut prev = fs.index(0);
            assert!(prev < gamma);
            for n in 1..40 {
                let cur = fs.index(n);
                assert!(cur > prev, "{g}[{n}] not increasing");
                assert!(cur < gamma);
                prev = cur;
            }
            // sup: any sampled alpha < gamma is eventually dominated
            for i in 0..50 {
                let alpha = enum_decode(&gamma, i).unwrap();
                assert!(
                    (0..200).any(|n| fs.index(n) > alpha),
                    "{g} sequence never exceeds {alpha}"
                );
            }
        }
    }

    #[test]
    fn encode_identity_on_omega() {
        for n in 0..1000 {
            assert_eq!(enum_encode(&omega(), &Ordinal::from_nat(n)).unwrap(), n);
            assert_eq!(enum_decode(&omega(), n).unwrap(), Ordinal::from_nat(n));
        }
    }

    #[test]
    fn encode_successor_rule() {
        let g = ord("w+1");
        assert_eq!(enum_encode(&g, &omega()).unwrap(), 0);
        for n in 0..1000 {
            assert_eq!(enum_encode(&g, &Ordinal::from_nat(n)).unwrap(), n + 1);
        }
    }

    #[test]
    fn encode_rejects_out_of_range() {
        assert_eq!(
            enum_encode(&omega(), &omega()),
            Err(OrdinalError::OutOfRange)
        );
        assert_eq!(
            enum_encode(&ord("17"), &ord("3")),
            Err(OrdinalError::NotInfinite)
        );
    }

    #[test]
    fn enumeration_round_trips() {
        let gammas = ["w", "w+1", "w*2", "w^2", "w^2+w*3+4"];
        for g in gammas {
            let gamma = ord(g);
            for n in 0..1000 {
                let alpha = enum_decode(&gamma, n).unwrap();
                assert!(alpha < gamma, "{g}: decode({n}) = {alpha} not below");
                assert_eq!(
                    enum_encode(&gamma, &alpha).unwrap(),
                    n,
                    "{g}: encode(decode({n}))"
                );
            }
        }
    }

    #[test]
    fn decode_zero_on_limits_is_zero() {
        for g in ["w", "w*2", "w*3", "w^2", "w^2+w*3", "w^w"] {
            assert_eq!(enum_decode(&ord(g), 0).unwrap(), Ordinal::zero());
        }
        // successors enumerate their finite tail first, top element at 0
        assert_eq!(enum_decode(&ord("w^2+w*3+4"), 0).unwrap(), ord("w^2+w*3+3"));
        assert_eq!(enum_decode(&ord("w+1"), 0).unwrap(), ord("w"));
    }

    #[test]
    fn encode_reports_overflow_on_tall_towers() {
        // codes square at each exponent level; ω^6 already pushes the
        // code of a small natural past u64
        assert_eq!(
            enum_encode(&ord("w^6"), &ord("7")),
            Err(OrdinalError::Overflow)
        );
        // shallow towers stay in range
        assert!(enum_encode(&ord("w^3"), &ord("w^2*9+w*9+9")).is_ok());
    }

    #[test]
    fn cantor_pair_round_trip() {
        assert_eq!(cantor_pair(0, 0), 0);
        assert_eq!(cantor_pair(1, 0), 1);
        assert_eq!(cantor_pair(0, 1), 2);
        for m in 0..5000 {
            let (n, k) = cantor_unpair(m);
            assert_eq!(cantor_pair(n, k), m);
        }
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            ord("w^2*3+w+5"),
            Ordinal::from_terms(alloc::vec![
                (Ordinal::from_nat(2), 3),
                (Ordinal::from_nat(1), 1),
                (Ordinal::zero(), 5),
            ])
            .unwrap()
        );
        assert_eq!(ord("0"), Ordinal::zero());
        assert_eq!(ord("42"), Ordinal::from_nat(42));
        assert_eq!(ord("w^(w)"), Ordinal::omega_pow(omega()));
    }

    #[test]
    fn parse_rejects_non_normal() {
        assert!("w+w^2".parse::<Ordinal>().is_err());
        assert!("w+w".parse::<Ordinal>().is_err());
        assert!("5+3".parse::<Ordinal>().is_err());
        assert!("w*0".parse::<Ordinal>().is_err());
        assert!("w+0".parse::<Ordinal>().is_err());
        assert!("".parse::<Ordinal>().is_err());
        assert!("w^".parse::<Ordinal>().is_err());
        assert!("w**2".parse::<Ordinal>().is_err());
        assert!("x".parse::<Ordinal>().is_err());
        assert!("w 2".parse::<Ordinal>().is_err());
    }

    #[test]
    fn display_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let a = random_ordinal(&mut rng, 5);
            let shown = alloc::format!("{a}");
            assert_eq!(shown.parse::<Ordinal>().unwrap(), a, "literal {shown}");
        }
        // composite exponents render with parentheses
        let a = Ordinal::omega_pow_mul(omega().add(&Ordinal::from_nat(1)), 3);
        let shown = alloc::format!("{a}");
        assert_eq!(shown, "w^(w+1)*3");
        assert_eq!(shown.parse::<Ordinal>().unwrap(), a);
    }

    #[test]
    fn derived_order_matches_cnf_order_samples() {
        // leading-exponent dominance and prefix cases
        assert!(ord("w^3") > ord("w^2*9+w*9+9"));
        assert!(ord("w^2") < ord("w^2+1"));
        assert!(ord("w^2+1") < ord("w^2+w"));
        assert!(ord("w*2") > ord("w+999"));
    }
}

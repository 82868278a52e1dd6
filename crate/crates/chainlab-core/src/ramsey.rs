//! Colorings of small finite subsets induced by closure enumerations,
//! exhaustive homogeneous-set search, and the homogeneous-implies-free
//! verification pipeline.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{closure, combinations, is_free, Algebra, AlgebraError, Element, Freeness};

/// A color: the set of pairs (position, enumeration index) recording
/// where each subset element sits inside the canonical enumeration of
/// the closure of the others. At most |u| pairs for the cell of u.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct ColorValue(pub BTreeSet<(usize, u64)>);

impl fmt::Display for ColorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (pos, zeta)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({pos},{zeta})")?;
        }
        write!(f, "}}")
    }
}

/// A cell is either a computed color or marked partial when some
/// involved closure failed to saturate within budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cell {
    Color(ColorValue),
    Partial,
}

/// A coloring of the subsets u of a pool with 1 ≤ |u| ≤ max_arity.
#[derive(Debug, Clone)]
pub struct Coloring {
    pool: Vec<Element>,
    max_arity: usize,
    cells: BTreeMap<Vec<Element>, Cell>,
}

impl Coloring {
    pub fn pool(&self) -> &[Element] {
        &self.pool
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    /// The cell of a subset, given in ascending order.
    pub fn cell(&self, u: &[Element]) -> Option<&Cell> {
        self.cells.get(u)
    }

    pub fn cells(&self) -> impl Iterator<Item = (&Vec<Element>, &Cell)> {
        self.cells.iter()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn partial_cells(&self) -> usize {
        self.cells
            .values()
            .filter(|c| matches!(c, Cell::Partial))
            .count()
    }

    /// Largest |color(u)| across defined cells.
    pub fn max_color_size(&self) -> usize {
        self.cells
            .values()
            .filter_map(|c| match c {
                Cell::Color(v) => Some(v.0.len()),
                Cell::Partial => None,
            })
            .max()
            .unwrap_or(0)
    }
}

/// Builds the closure-enumeration coloring: for u = {β_0 < … < β_k},
/// color(u) contains (i, ζ) exactly when β_i is the ζ-th element, in
/// ascending order, of the saturated closure of u ∖ {β_i}. Cells whose
/// closures do not saturate are marked partial.
pub fn algebra_coloring(
    algebra: &Algebra,
    pool: &[Element],
    max_arity: usize,
    budget: u64,
) -> Result<Coloring, AlgebraError> {
    for w in pool.windows(2) {
        if w[0] >= w[1] {
            return Err(AlgebraError::DuplicateElements);
        }
    }
    for e in pool {
        if !algebra.contains(e) {
            return Err(AlgebraError::OutsideCarrier { element: e.clone() });
        }
    }
    let mut cache: BTreeMap<Vec<Element>, (Vec<Element>, bool)> = BTreeMap::new();
    let mut cells = BTreeMap::new();
    for size in 1..=max_arity.min(pool.len()) {
        for combo in combinations(pool.len(), size) {
            let u: Vec<Element> = combo.iter().map(|&i| pool[i].clone()).collect();
            let mut color = BTreeSet::new();
            let mut partial = false;
            for (i, beta) in u.iter().enumerate() {
                let rest: Vec<Element> = u.iter().filter(|e| *e != beta).cloned().collect();
                let (found, saturated) = match cache.get(&rest) {
                    Some(entry) => entry.clone(),
                    None => {
                        let gens: BTreeSet<Element> = rest.iter().cloned().collect();
                        let result = closure(algebra, &gens, budget)?;
                        let entry = (
                            result.found.iter().cloned().collect::<Vec<Element>>(),
                            result.saturated,
                        );
                        cache.insert(rest.clone(), entry.clone());
                        entry
                    }
                };
                if !saturated {
                    partial = true;
                    break;
                }
                if let Some(zeta) = found.iter().position(|e| e == beta) {
                    color.insert((i, zeta as u64));
                }
            }
            cells.insert(
                u,
                if partial {
                    Cell::Partial
                } else {
                    Cell::Color(ColorValue(color))
                },
            );
        }
    }
    Ok(Coloring {
        pool: pool.to_vec(),
        max_arity,
        cells,
    })
}

/// A coloring of pairs from an explicit edge-color function, with all
/// singletons receiving the same empty color. Used for ground-truth
/// Ramsey checks.
pub fn pair_coloring(pool: &[Element], edge_color: impl Fn(usize, usize) -> u64) -> Coloring {
    let mut cells = BTreeMap::new();
    for (i, e) in pool.iter().enumerate() {
        cells.insert(alloc::vec![e.clone()], Cell::Color(ColorValue::default()));
        for (j, f) in pool.iter().enumerate().skip(i + 1) {
            let mut value = BTreeSet::new();
            value.insert((0usize, edge_color(i, j)));
            cells.insert(
                alloc::vec![e.clone(), f.clone()],
                Cell::Color(ColorValue(value)),
            );
        }
    }
    Coloring {
        pool: pool.to_vec(),
        max_arity: 2,
        cells,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomogeneousSearch {
    Found { subset: Vec<Element> },
    NotFound,
}

/// Exhaustive search, in canonical subset order, for a k-subset S whose
/// cells are constant at every level 1..=min(k, max_arity). Candidates
/// containing partial cells are excluded rather than guessed.
pub fn find_homogeneous(coloring: &Coloring, k: usize) -> HomogeneousSearch {
    let pool_len = coloring.pool.len();
    if k > pool_len {
        return HomogeneousSearch::NotFound;
    }
    'candidates: for combo in combinations(pool_len, k) {
        let subset: Vec<Element> = combo.iter().map(|&i| coloring.pool[i].clone()).collect();
        for level in 1..=k.min(coloring.max_arity) {
            let mut reference: Option<&ColorValue> = None;
            for sub in combinations(k, level) {
                let u: Vec<Element> = sub.iter().map(|&i| subset[i].clone()).collect();
                match coloring.cell(&u) {
                    Some(Cell::Color(value)) => match reference {
                        None => reference = Some(value),
                        Some(r) if r == value => {}
                        Some(_) => continue 'candidates,
                    },
                    _ => continue 'candidates,
                }
            }
        }
        return HomogeneousSearch::Found { subset };
    }
    HomogeneousSearch::NotFound
}

/// Outcome of verifying a homogeneous set against direct freeness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FreeVerification {
    Confirmed,
    /// The witness element sits in the closure of the rest; the two
    /// comparison sets drop the witness and its successor for
    /// inspection of the swap argument.
    Refuted {
        witness: Element,
        upper: Vec<Element>,
        lower: Vec<Element>,
    },
    Partial,
}

/// Confirms a homogeneous set by running the freeness probe directly.
pub fn homogeneous_free_check(
    algebra: &Algebra,
    subset: &[Element],
    budget: u64,
) -> Result<FreeVerification, AlgebraError> {
    let set: BTreeSet<Element> = subset.iter().cloned().collect();
    if set.len() != subset.len() {
        return Err(AlgebraError::DuplicateElements);
    }
    match is_free(algebra, &set, budget)? {
        Freeness::Free => Ok(FreeVerification::Confirmed),
        Freeness::NotFree { witness, .. } => {
            let sorted: Vec<Element> = set.iter().cloned().collect();
            let i = sorted
                .iter()
                .position(|e| *e == witness)
                .expect("witness comes from the set");
            let skip_upper = (i + 1).min(sorted.len().saturating_sub(1));
            let upper: Vec<Element> = sorted
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != skip_upper)
                .map(|(_, e)| e.clone())
                .collect();
            let lower: Vec<Element> = sorted
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, e)| e.clone())
                .collect();
            Ok(FreeVerification::Refuted {
                witness,
                upper,
                lower,
            })
        }
        Freeness::Unknown { .. } => Ok(FreeVerification::Partial),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{
        constant_cover_algebra, discrete_algebra, predecessor_algebra, restrict_algebra,
    };

    fn nat_pool(n: u64) -> Vec<Element> {
        (0..n).map(Element::Nat).collect()
    }

    #[test]
    fn discrete_coloring_is_empty() {
        let a = discrete_algebra(8);
        let c = algebra_coloring(&a, &nat_pool(6), 3, 100).unwrap();
        assert_eq!(c.partial_cells(), 0);
        for (_, cell) in c.cells() {
            assert_eq!(cell, &Cell::Color(ColorValue::default()));
        }
    }

    #[test]
    fn constant_cover_cell_example() {
        // u = {2,5} over constant_cover(8): cl({5}) = {0..7} so 2 sits
        // at index 2, and 5 sits at index 5 of cl({2})
        let a = constant_cover_algebra(8).unwrap();
        let c = algebra_coloring(&a, &nat_pool(8), 2, 100).unwrap();
        let cell = c
            .cell(&[Element::Nat(2), Element::Nat(5)])
            .expect("cell exists");
        let expected: BTreeSet<(usize, u64)> = [(0usize, 2u64), (1, 5)].into_iter().collect();
        assert_eq!(cell, &Cell::Color(ColorValue(expected)));
    }

    #[test]
    fn color_size_bound() {
        for a in [
            discrete_algebra(12),
            constant_cover_algebra(12).unwrap(),
            restrict_algebra(&predecessor_algebra(), 12).unwrap(),
        ] {
            let c = algebra_coloring(&a, &nat_pool(12), 4, 400).unwrap();
            for (u, cell) in c.cells() {
                if let Cell::Color(value) = cell {
                    assert!(value.0.len() <= u.len(), "{}: |color| > |u|", a.label());
                }
            }
        }
    }

    #[test]
    fn homogeneous_on_constant_coloring() {
        let a = discrete_algebra(8);
        let c = algebra_coloring(&a, &nat_pool(6), 3, 100).unwrap();
        assert_eq!(
            find_homogeneous(&c, 3),
            HomogeneousSearch::Found {
                subset: nat_pool(3)
            }
        );
    }

    #[test]
    fn five_cycle_has_no_homogeneous_triple() {
        let pool = nat_pool(5);
        let adjacent = |i: usize, j: usize| -> u64 {
            let d = (j + 5 - i) % 5;
            u64::from(d == 1 || d == 4)
        };
        let c = pair_coloring(&pool, adjacent);
        assert_eq!(find_homogeneous(&c, 3), HomogeneousSearch::NotFound);
        // independent verification over the 10 triples
        for combo in combinations(5, 3) {
            let pairs = [
                (combo[0], combo[1]),
                (combo[0], combo[2]),
                (combo[1], combo[2]),
            ];
            let colors: BTreeSet<u64> = pairs.iter().map(|&(i, j)| adjacent(i, j)).collect();
            assert!(colors.len() > 1, "triple {combo:?} is monochromatic");
        }
    }

    #[test]
    fn six_vertices_spot_masks_have_triples() {
        // a deterministic sample of edge colorings on 6 vertices; the
        // exhaustive sweep lives in the acceptance suite
        let pool = nat_pool(6);
        let edges: Vec<(usize, usize)> = (0..6)
            .flat_map(|i| (i + 1..6).map(move |j| (i, j)))
            .collect();
        for mask in (0u32..1 << 15).step_by(97) {
            let color = |i: usize, j: usize| -> u64 {
                let idx = edges.iter().position(|&e| e == (i, j)).unwrap();
                u64::from(mask & (1 << idx) != 0)
            };
            let c = pair_coloring(&pool, color);
            assert!(
                matches!(find_homogeneous(&c, 3), HomogeneousSearch::Found { .. }),
                "mask {mask:#x} lacks a monochromatic triple"
            );
        }
    }

    #[test]
    fn pipeline_on_discrete_confirms() {
        let a = discrete_algebra(8);
        let c = algebra_coloring(&a, &nat_pool(6), 3, 100).unwrap();
        if let HomogeneousSearch::Found { subset } = find_homogeneous(&c, 3) {
            assert_eq!(
                homogeneous_free_check(&a, &subset, 100).unwrap(),
                FreeVerification::Confirmed
            );
        } else {
            panic!("constant coloring must have a homogeneous triple");
        }
    }

    #[test]
    fn pipeline_on_constant_cover_reports_not_found() {
        // distinct pairs get distinct colors, blocking homogeneity at
        // size 3; the pipeline reports NotFound rather than Refuted
        let a = constant_cover_algebra(8).unwrap();
        let c = algebra_coloring(&a, &nat_pool(8), 2, 100).unwrap();
        assert_eq!(find_homogeneous(&c, 3), HomogeneousSearch::NotFound);
    }

    #[test]
    fn pipeline_on_predecessor_agrees_with_direct_freeness() {
        let a = restrict_algebra(&predecessor_algebra(), 10).unwrap();
        let c = algebra_coloring(&a, &nat_pool(10), 4, 200).unwrap();
        assert_eq!(c.partial_cells(), 0);
        let outcome = find_homogeneous(&c, 4);
        // pairs {a < b} are colored {(0, a)}, so no two pairs agree and
        // no 4-subset is homogeneous; cross-check against is_free
        assert_eq!(outcome, HomogeneousSearch::NotFound);
        let direct = is_free(
            &a,
            &[0u64, 3, 6, 9].iter().map(|&n| Element::Nat(n)).collect(),
            200,
        )
        .unwrap();
        assert!(matches!(direct, Freeness::NotFree { .. }));
    }

    #[test]
    fn refuted_diagnostic_drops_witness_and_successor() {
        let a = restrict_algebra(&predecessor_algebra(), 10).unwrap();
        let s: Vec<Element> = [2u64, 5, 8].iter().map(|&n| Element::Nat(n)).collect();
        match homogeneous_free_check(&a, &s, 100).unwrap() {
            FreeVerification::Refuted {
                witness,
                upper,
                lower,
            } => {
                // 2 ∈ cl({5,8}) makes 2 the first witness
                assert_eq!(witness, Element::Nat(2));
                assert_eq!(upper, vec![Element::Nat(2), Element::Nat(8)]);
                assert_eq!(lower, vec![Element::Nat(5), Element::Nat(8)]);
            }
            other => panic!("expected Refuted, got {other:?}"),
        }
    }

    #[test]
    fn coloring_recomputation_is_identical() {
        let a = constant_cover_algebra(10).unwrap();
        let c1 = algebra_coloring(&a, &nat_pool(10), 3, 200).unwrap();
        let c2 = algebra_coloring(&a, &nat_pool(10), 3, 200).unwrap();
        let v1: Vec<_> = c1.cells().collect();
        let v2: Vec<_> = c2.cells().collect();
        assert_eq!(v1, v2);
    }

    #[test]
    fn coloring_rejects_unsorted_pool() {
        let a = discrete_algebra(8);
        assert!(algebra_coloring(&a, &[Element::Nat(3), Element::Nat(1)], 2, 100).is_err());
    }
}

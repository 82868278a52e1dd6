//! Closure-operator laws over a randomized corpus of algebras and
//! generator sets, plus oracle agreement and chain behavior.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chainlab_core::algebra::{
    chain_from_free, closure, is_free, Algebra, Element, Freeness, OpKind,
};
use chainlab_core::constructions::{
    constant_cover_algebra, constant_family, discrete_algebra, predecessor_algebra,
    singleton_cover_enrich, uncurry_enrich, whaley_lift, witness_enrich,
};

fn corpus() -> Vec<(Algebra, Vec<Element>)> {
    let pred = predecessor_algebra();
    let lift = whaley_lift(&pred, &"w*4".parse().unwrap()).unwrap();
    let lift_pool: Vec<Element> = (0..12)
        .map(|n| Element::Ord(chainlab_core::Ordinal::from_nat(n)))
        .chain([Element::Ord(chainlab_core::Ordinal::omega())])
        .collect();
    vec![
        (pred.clone(), (0..40).map(Element::Nat).collect()),
        (
            constant_cover_algebra(24).unwrap(),
            (0..24).map(Element::Nat).collect(),
        ),
        (
            singleton_cover_enrich(&pred),
            (0..1000).step_by(7).map(Element::Nat).collect(),
        ),
        (discrete_algebra(40), (0..40).map(Element::Nat).collect()),
        (lift, lift_pool),
    ]
}

fn sample_set(rng: &mut ChaCha8Rng, pool: &[Element], max_len: usize) -> BTreeSet<Element> {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| pool[rng.gen_range(0..pool.len())].clone())
        .collect()
}

#[test]
fn extensivity_monotonicity_idempotence() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let corpus = corpus();
    for round in 0..200 {
        let (algebra, pool) = &corpus[round % corpus.len()];
        let x = sample_set(&mut rng, pool, 3);
        let mut y = x.clone();
        y.extend(sample_set(&mut rng, pool, 2));
        let cx = closure(algebra, &x, 300).unwrap();
        let cy = closure(algebra, &y, 300).unwrap();
        assert!(
            x.is_subset(&cx.found),
            "{}: extensivity failed",
            algebra.label()
        );
        if cx.saturated && cy.saturated {
            assert!(
                cx.found.is_subset(&cy.found),
                "{}: monotonicity failed",
                algebra.label()
            );
        }
        if cx.saturated {
            let again = closure(algebra, &cx.found, 300).unwrap();
            assert!(again.saturated);
            assert_eq!(again.found, cx.found, "{}: idempotence", algebra.label());
        }
    }
}

#[test]
fn oracle_matches_saturated_closures() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pred = predecessor_algebra();
    let algebras = [
        pred.clone(),
        constant_cover_algebra(16).unwrap(),
        discrete_algebra(24),
        singleton_cover_enrich(&pred),
        witness_enrich(&pred, 30),
    ];
    for _ in 0..100 {
        let algebra = &algebras[rng.gen_range(0..algebras.len())];
        let pool: Vec<Element> = (0..16).map(Element::Nat).collect();
        let gens = sample_set(&mut rng, &pool, 3);
        let result = closure(algebra, &gens, 500).unwrap();
        if !result.saturated {
            continue;
        }
        for y in 0..16u64 {
            let e = Element::Nat(y);
            assert_eq!(
                algebra.oracle_says(&gens, &e).unwrap(),
                result.found.contains(&e),
                "{}: oracle disagrees at {y} from {gens:?}",
                algebra.label()
            );
        }
    }
}

#[test]
fn certified_free_tuples_drop_strictly() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let disc = discrete_algebra(64);
    for _ in 0..50 {
        let mut tuple: Vec<Element> = Vec::new();
        let k = rng.gen_range(1..=6);
        while tuple.len() < k {
            let e = Element::Nat(rng.gen_range(0..64));
            if !tuple.contains(&e) {
                tuple.push(e);
            }
        }
        let set: BTreeSet<Element> = tuple.iter().cloned().collect();
        assert_eq!(is_free(&disc, &set, 100).unwrap(), Freeness::Free);
        let chain = chain_from_free(&disc, &tuple, 100).unwrap();
        assert!(chain.certified);
        assert_eq!(chain.strict_drops, k - 1);
    }
}

/// Reference closure with no evaluation shortcuts: every op over every
/// tuple of the full found-set each round. Exponential in arity, so it
/// only runs on low-arity corpora, but it is independent of the
/// engine's delta-skipping and admission machinery.
fn naive_closure(
    algebra: &Algebra,
    gens: &BTreeSet<Element>,
    cap: usize,
) -> (BTreeSet<Element>, bool) {
    let mut found: BTreeSet<Element> = gens.clone();
    loop {
        let sorted: Vec<Element> = found.iter().cloned().collect();
        let mut discovered: BTreeSet<Element> = BTreeSet::new();
        let mut eval = |arity: usize, apply: &dyn Fn(&[Element]) -> Element| {
            let mut indices = vec![0usize; arity];
            if sorted.is_empty() && arity > 0 {
                return;
            }
            loop {
                let args: Vec<Element> = indices.iter().map(|&i| sorted[i].clone()).collect();
                let value = apply(&args);
                if !found.contains(&value) {
                    discovered.insert(value);
                }
                let mut pos = arity;
                loop {
                    if pos == 0 {
                        return;
                    }
                    pos -= 1;
                    indices[pos] += 1;
                    if indices[pos] < sorted.len() {
                        break;
                    }
                    indices[pos] = 0;
                }
            }
        };
        for op in algebra.ops() {
            match op {
                OpKind::Fixed(operation) => {
                    eval(operation.sym.arity, &|args| (operation.func)(args));
                }
                OpKind::CarrierIndexed(family) => {
                    for index in &sorted {
                        eval((family.arity_of)(index), &|args| {
                            (family.apply)(index, args)
                        });
                    }
                }
            }
        }
        if discovered.is_empty() {
            return (found, true);
        }
        found.extend(discovered);
        if found.len() > cap {
            return (found, false);
        }
    }
}

#[test]
fn engine_agrees_with_naive_closure() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let pred = predecessor_algebra();
    let corpus: Vec<(Algebra, Vec<Element>)> = vec![
        (pred.clone(), (0..20).map(Element::Nat).collect()),
        (
            constant_cover_algebra(12).unwrap(),
            (0..12).map(Element::Nat).collect(),
        ),
        (
            uncurry_enrich(&discrete_algebra(24), &constant_family()),
            (0..24).map(Element::Nat).collect(),
        ),
        (
            whaley_lift(&pred, &"w*4".parse().unwrap()).unwrap(),
            (0..15)
                .map(|n| Element::Ord(chainlab_core::Ordinal::from_nat(n)))
                .chain([Element::Ord(chainlab_core::Ordinal::omega())])
                .collect(),
        ),
    ];
    for case in 0..60 {
        let (algebra, pool) = &corpus[case % corpus.len()];
        let gens = sample_set(&mut rng, pool, 3);
        let (reference, reference_saturated) = naive_closure(algebra, &gens, 200);
        let result = closure(algebra, &gens, 400).unwrap();
        assert!(reference_saturated, "reference blew past its cap");
        assert!(result.saturated, "engine failed to saturate {gens:?}");
        assert_eq!(
            result.found,
            reference,
            "engine disagrees with reference on {} from {gens:?}",
            algebra.label()
        );
    }
}

#[test]
fn diagonal_hint_matches_off_diagonal_contract() {
    // the closure engine skips off-diagonal tuples of hinted ops; their
    // contract is to return the first argument there
    let enriched = singleton_cover_enrich(&discrete_algebra(4096));
    let pool: Vec<u64> = vec![0, 1, 5, 10, 77, 2049];
    let mut checked = 0;
    for n in 2..=4usize {
        let name = format!("j{n}");
        let mut indices = vec![0usize; n];
        'tuples: loop {
            let args: Vec<Element> = indices.iter().map(|&i| Element::Nat(pool[i])).collect();
            if args.iter().any(|a| *a != args[0]) {
                assert_eq!(
                    enriched.eval_op(&name, &args).unwrap(),
                    args[0],
                    "off-diagonal {name} must return its first argument"
                );
                checked += 1;
            }
            let mut pos = n;
            loop {
                if pos == 0 {
                    break 'tuples;
                }
                pos -= 1;
                indices[pos] += 1;
                if indices[pos] < pool.len() {
                    break;
                }
                indices[pos] = 0;
            }
        }
    }
    assert_eq!(checked, (36 - 6) + (216 - 6) + (1296 - 6));
}

#[test]
fn singleton_cover_guarantee_full_sweep() {
    // every u ⊆ {0..15} with 1 ≤ |u| ≤ MAXJ sits inside the saturated
    // closure of its bit encoding
    let enriched = singleton_cover_enrich(&discrete_algebra(1 << 16));
    for mask in 1u32..(1 << 16) {
        if mask.count_ones() as usize > chainlab_core::constructions::MAXJ {
            continue;
        }
        let u: BTreeSet<Element> = (0..16)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| Element::Nat(b as u64))
            .collect();
        let generator: BTreeSet<Element> = [Element::Nat(mask as u64)].into_iter().collect();
        let result = closure(&enriched, &generator, 64).unwrap();
        assert!(result.saturated, "mask {mask:#x} did not saturate");
        assert!(
            u.is_subset(&result.found),
            "mask {mask:#x}: u not covered by cl({{enc}})"
        );
    }
}

#[test]
fn closure_results_are_reproducible() {
    let corpus = corpus();
    for (algebra, pool) in &corpus {
        let gens: BTreeSet<Element> = pool.iter().take(3).cloned().collect();
        let a = closure(algebra, &gens, 100).unwrap();
        let b = closure(algebra, &gens, 100).unwrap();
        assert_eq!(a, b, "{}: closure not reproducible", algebra.label());
    }
}

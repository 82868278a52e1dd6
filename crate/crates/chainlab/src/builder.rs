//! Turns algebra declarations into core algebras.

use std::collections::BTreeMap;

use chainlab_core::algebra::Algebra;
use chainlab_core::constructions::{
    constant_cover_algebra, constant_family, discrete_algebra, limit_glue, predecessor_algebra,
    predecessor_family, restrict_algebra, singleton_cover_enrich, stratified_witness_enrich,
    uncurry_enrich, whaley_lift, witness_enrich, StratifiedCarrier,
};

use crate::spec::{AlgebraDecl, BuilderExpr, FamilyName};

#[derive(Debug)]
pub struct BuildError {
    pub algebra: String,
    pub message: String,
}

impl std::fmt::Display for BuildError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "algebra `{}`: {}", self.algebra, self.message)
    }
}

impl std::error::Error for BuildError {}

/// Builds every declared algebra in declaration order. References only
/// look backwards, so a single pass suffices.
pub fn build_algebras(decls: &[AlgebraDecl]) -> Result<BTreeMap<String, Algebra>, BuildError> {
    let mut built: BTreeMap<String, Algebra> = BTreeMap::new();
    for decl in decls {
        let fail = |message: String| BuildError {
            algebra: decl.name.clone(),
            message,
        };
        let lookup = |name: &str| -> Result<&Algebra, BuildError> {
            built.get(name).ok_or_else(|| BuildError {
                algebra: decl.name.clone(),
                message: format!("unknown algebra `{name}`"),
            })
        };
        let algebra = match &decl.builder {
            BuilderExpr::Predecessor => predecessor_algebra(),
            BuilderExpr::Discrete(n) => discrete_algebra(*n),
            BuilderExpr::ConstantCover(n) => {
                constant_cover_algebra(*n).map_err(|e| fail(e.to_string()))?
            }
            BuilderExpr::SingletonCover(a) => singleton_cover_enrich(lookup(a)?),
            BuilderExpr::Uncurry(a, family) => {
                let family = match family {
                    FamilyName::Constants => constant_family(),
                    FamilyName::Predecessor => predecessor_family(),
                };
                uncurry_enrich(lookup(a)?, &family)
            }
            BuilderExpr::Witness(a, budget) => witness_enrich(lookup(a)?, *budget),
            BuilderExpr::WhaleyLift(a, gamma) => {
                whaley_lift(lookup(a)?, gamma).map_err(|e| fail(e.to_string()))?
            }
            BuilderExpr::Restrict(a, n) => {
                restrict_algebra(lookup(a)?, *n).map_err(|e| fail(e.to_string()))?
            }
            BuilderExpr::LimitGlue(part_names) => {
                let mut parts = Vec::new();
                let mut levels = Vec::new();
                for name in part_names {
                    let part = lookup(name)?;
                    let elems = part
                        .carrier_elements(1 << 20)
                        .ok_or_else(|| fail(format!("part `{name}` has no finite carrier")))?;
                    levels.push(elems.into_iter().collect());
                    parts.push(part.clone());
                }
                let strat = StratifiedCarrier::new(levels).map_err(|e| fail(e.to_string()))?;
                limit_glue(&parts, &strat).map_err(|e| fail(e.to_string()))?
            }
            BuilderExpr::StratifiedWitness(a, sizes, budget) => {
                let strat =
                    StratifiedCarrier::nat_prefixes(sizes).map_err(|e| fail(e.to_string()))?;
                stratified_witness_enrich(lookup(a)?, &strat, *budget)
                    .map_err(|e| fail(e.to_string()))?
            }
        };
        built.insert(decl.name.clone(), algebra);
    }
    Ok(built)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parse_spec;

    #[test]
    fn builds_a_full_stack() {
        let spec = parse_spec(
            "algebra P = predecessor\n\
             algebra S = singleton_cover(P)\n\
             algebra W = witness(P, 40)\n\
             algebra L = whaley_lift(P, w*4)\n\
             algebra R4 = restrict(P, 4)\n\
             algebra R8 = restrict(P, 8)\n\
             algebra G = limit_glue(R4, R8)\n\
             algebra U = uncurry(R8, constants)\n\
             algebra T = stratified_witness(P, [4,8], 30)\n",
        )
        .unwrap();
        let built = build_algebras(&spec.algebras).unwrap();
        assert_eq!(built.len(), 9);
    }

    #[test]
    fn glue_requires_finite_parts() {
        let spec = parse_spec(
            "algebra P = predecessor\n\
             algebra G = limit_glue(P, P)\n",
        )
        .unwrap();
        let e = build_algebras(&spec.algebras).unwrap_err();
        assert!(e.message.contains("finite carrier"), "{e}");
    }
}

//! The cMS criterion: invariance under automorphisms, decomposition into
//! types, orbit counting for algebraic tuples, and additivity over dcl.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::library::formula_library;
use super::{all_tuples, closed_subsets, random_closed, random_tuple, show_nodes, show_set, CheckReport};
use crate::fragment::{component_automorphisms, Fragment, GeneratorAutomorphism};
use crate::measure::{dim_meas_definable, dim_meas_tuple, dim_meas_types, DefinableSet, DimMeas, Formula};
use crate::tree::{GammaNode, NodeSet};

/// h(gā/gC) = h(ā/C) for compositions of up to three generator automorphisms.
/// A fragment without a non-identity generator contributes no instances.
pub fn check_cms1(frag: &Fragment, trials: usize, seed: u64, max_closed: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("cms1", seed);
    let gens: Vec<GeneratorAutomorphism> = frag
        .components()
        .keys()
        .flat_map(|k| component_automorphisms(frag, k, 24))
        .filter(|g| !g.is_identity())
        .collect();
    if gens.is_empty() {
        return report;
    }
    for t in 0..trials {
        let depth = rng.gen_range(1..=3);
        let chain: Vec<&GeneratorAutomorphism> = (0..depth).filter_map(|_| gens.choose(&mut rng)).collect();
        let len = rng.gen_range(1..=3);
        let tuple = random_tuple(frag, &mut rng, len);
        let c = random_closed(frag, &mut rng, 3, max_closed);
        let mut moved = frag.clone();
        let mut g_tuple = tuple.clone();
        let mut g_c = c.clone();
        let mut ok = true;
        let mut applied: Vec<GeneratorAutomorphism> = Vec::new();
        for g in &chain {
            // Earlier moves may have relabeled the cone holding this component.
            let key = applied.iter().fold(g.key.clone(), |k, h| h.apply_key(&k));
            let g = &GeneratorAutomorphism { key, perm: g.perm.clone() };
            match moved.apply_generator(g) {
                Ok(m) => moved = m,
                Err(e) => {
                    report.fail(format!("seed={seed} trial={t} generator at {}", g.key.parent), "applicable generator", e);
                    ok = false;
                    break;
                }
            }
            g_tuple = g_tuple.iter().map(|n| g.apply_node(n)).collect();
            g_c = g_c.iter().map(|n| g.apply_node(n)).collect();
            applied.push(g.clone());
        }
        if !ok {
            continue;
        }
        let lhs = dim_meas_tuple(&moved, &g_tuple, &g_c);
        let rhs = dim_meas_tuple(frag, &tuple, &c);
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => report.expect_eq(
                || format!("seed={seed} trial={t} a={} C={} depth={}", show_nodes(&tuple), show_set(&c), chain.len()),
                &r,
                &l,
            ),
            (l, r) => report.fail(format!("seed={seed} trial={t}"), "two values", format!("{l:?} / {r:?}")),
        }
    }
    report
}

/// cMS2: h of a union of types is the max/sum of the parts, recomputed from
/// the raw type list. cMS3: algebraic tuples have h = (0, 1) and a singleton
/// orbit (no other tuple in the fragment has the same type).
pub fn check_cms2_cms3(frag: &Fragment, seed: u64, max_closed: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("cms2_cms3", seed);

    for entry in formula_library(frag.plan()) {
        let Some(params) = entry.pick_params(frag, &mut rng) else { continue };
        let set = DefinableSet::formula(params.clone(), entry.arity, entry.formula.clone());
        let inst = || format!("seed={seed} set={} params={}", entry.name, show_nodes(&params));
        let parts = match set.decompose(frag) {
            Ok(p) => p,
            Err(e) => {
                report.fail(inst(), "a decomposition", e);
                continue;
            }
        };
        let mut values: Vec<DimMeas> = Vec::new();
        for r in &parts {
            match dim_meas_tuple(&r.fragment, &r.tuple, &r.descriptor.base) {
                Ok(h) => values.push(h),
                Err(e) => report.fail(inst(), "a type value", e),
            }
        }
        // Independent max/sum: sort by dimension, sum the top block.
        values.sort_by_key(|v| std::cmp::Reverse(v.dim));
        let expected = match values.first() {
            None => DimMeas::empty(),
            Some(top) => DimMeas::new(
                top.dim,
                values.iter().take_while(|v| v.dim == top.dim).map(|v| v.meas.clone()).sum(),
            ),
        };
        let descs: Vec<_> = parts.iter().map(|r| r.descriptor.clone()).collect();
        match (dim_meas_definable(frag, &set), dim_meas_types(frag, &descs)) {
            (Ok(a), Ok(b)) => {
                report.expect_eq(inst, &expected, &a);
                report.expect_eq(inst, &expected, &b);
            }
            (a, b) => report.fail(inst(), "values", format!("{a:?} / {b:?}")),
        }
        let distinct: std::collections::BTreeSet<_> = descs.iter().collect();
        report.expect(distinct.len() == descs.len(), inst, "pairwise distinct types", || "repeated type".into());
    }
    let empty = DefinableSet::formula(vec![], 1, Formula::False);
    let h = dim_meas_definable(frag, &empty).ok();
    report.expect_eq(|| format!("seed={seed} empty set"), &Some(DimMeas::empty()), &h);

    let nodes: Vec<GammaNode> = frag.nodes().iter().cloned().collect();
    for c in closed_subsets(frag, max_closed, 12) {
        // Type classes of all fragment tuples, computed once per C.
        let mut classes: BTreeMap<_, usize> = BTreeMap::new();
        for n in 1..=2 {
            for t in all_tuples(&nodes, n) {
                if let Ok(d) = frag.type_descriptor(&t, &c) {
                    *classes.entry(d).or_default() += 1;
                }
            }
        }
        let inside: Vec<GammaNode> = c.iter().cloned().collect();
        for n in 1..=2 {
            for a in all_tuples(&inside, n) {
                let inst = || format!("seed={seed} a={} C={}", show_nodes(&a), show_set(&c));
                let h = dim_meas_tuple(frag, &a, &c).ok();
                report.expect_eq(inst, &Some(DimMeas::point()), &h);
                let orbit = frag.type_descriptor(&a, &c).ok().and_then(|d| classes.get(&d).copied()).unwrap_or(0);
                report.expect_eq(inst, &1, &orbit);
            }
        }
    }
    report
}

/// For b̄ ⊆ tcl(Cā): h(ā/C) = h(b̄/C) ⊗ h(ā/tcl(Cb̄)).
pub fn check_cms4(frag: &Fragment, trials: usize, seed: u64, max_closed: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("cms4", seed);
    for t in 0..trials {
        let c = random_closed(frag, &mut rng, 3, max_closed);
        let len = rng.gen_range(1..=3);
        let a = random_tuple(frag, &mut rng, len);
        let w: Vec<GammaNode> = frag.tcl(c.iter().chain(&a)).into_iter().collect();
        let blen = rng.gen_range(1..=3);
        let b: Vec<GammaNode> = (0..blen).map(|_| w[rng.gen_range(0..w.len())].clone()).collect();
        let cb: NodeSet = frag.tcl(c.iter().chain(&b));
        let lhs = dim_meas_tuple(frag, &a, &c);
        let rhs = dim_meas_tuple(frag, &b, &c).and_then(|x| Ok(x * dim_meas_tuple(frag, &a, &cb)?));
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => report.expect_eq(
                || format!("seed={seed} trial={t} a={} b={} C={}", show_nodes(&a), show_nodes(&b), show_set(&c)),
                &l,
                &r,
            ),
            (l, r) => report.fail(format!("seed={seed} trial={t}"), "two values", format!("{l:?} / {r:?}")),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;
    use crate::components::{ComponentType, TypeKind};
    use crate::fixtures::{p1, p2, p3};
    use crate::tree::ComponentKey;

    #[test]
    fn suites_pass_on_small_fragments() {
        for plan in [p1(), p2(), p3()] {
            // A fragment without a non-identity generator gives cms1 nothing to do.
            let mut generator_instances = 0;
            for seed in 0..3 {
                let f = Fragment::grow_random(plan.clone(), seed, 8);
                let cms1 = check_cms1(&f, 10, seed, 6);
                assert!(cms1.passed(), "{:?}", cms1.failures);
                generator_instances += cms1.instances;
                for r in [check_cms2_cms3(&f, seed, 4), check_cms4(&f, 10, seed, 6)] {
                    assert!(r.passed(), "{:?}", r.failures);
                    assert!(r.instances > 0);
                }
            }
            assert!(generator_instances > 0);
        }
    }

    #[test]
    fn pure_set_swap_preserves_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut f = Fragment::new(p2());
        let root = GammaNode::root();
        let t = ComponentType { theory: "pure_set".into(), params: vec![], kind: TypeKind::Fresh(vec![]) };
        let a = f.realize_node(&root, 0, Some(&t), &mut rng).unwrap();
        let b = f.realize_node(&root, 0, Some(&t), &mut rng).unwrap();
        let g = GeneratorAutomorphism {
            key: ComponentKey { parent: root, index: 0 },
            perm: [(a.elem().unwrap(), b.elem().unwrap()), (b.elem().unwrap(), a.elem().unwrap())].into(),
        };
        let moved = f.apply_generator(&g).unwrap();
        let c = f.tcl(std::iter::empty());
        assert_eq!(g.apply_node(&a), b);
        assert_eq!(
            dim_meas_tuple(&moved, &[g.apply_node(&a)], &c).unwrap(),
            dim_meas_tuple(&f, &[a], &c).unwrap()
        );
    }
}

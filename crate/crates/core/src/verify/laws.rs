//! Laws of h itself: the closed-form dim and meas formulas for 1-types,
//! coordinate-permutation invariance, and independence of the parameter set
//! (well-definedness).

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{closed_subsets, random_closed, show_nodes, show_set, CheckReport};
use crate::fragment::{min_budget, Fragment, TypeDescriptor};
use crate::measure::{combine_types, dim_meas_1type, dim_meas_tuple, DimMeas};
use crate::tree::{component_key, meet_closure_in, GammaNode, Lambda, NodeSet};

/// dim(a/B) counts the infinity nodes strictly above `[a∧B]` up to `a`;
/// meas(e/tcl(B ∪ {pred e})) is the component measure of e over B ∩ M(e).
pub fn check_main_formulas(frag: &Fragment, max_closed: usize) -> CheckReport {
    let mut report = CheckReport::new("main_formulas", 0);
    let plan = frag.plan();
    for b in closed_subsets(frag, max_closed, 4096) {
        for a in frag.nodes() {
            let inst = || format!("a={a} B={}", show_set(&b));
            let entry = meet_closure_in(a, &b);
            let expected = a
                .prefixes()
                .filter(|x| entry.lt(x) && plan.lambda(&x.projection()) == Some(Lambda::Infinity))
                .count() as u32;
            let actual = dim_meas_1type(frag, a, &b).map(|h| h.dim).ok();
            report.expect_eq(inst, &Some(expected), &actual);

            let Some(key) = component_key(a) else { continue };
            if plan.lambda(&key.projection()) != Some(Lambda::Infinity) {
                continue;
            }
            let th = frag.theory_of(&key).expect("validated plan");
            let expected = frag.component_type(a, &b).map(|t| th.dim_meas(&t).meas);
            let with_pred = frag.tcl(b.iter().chain(std::iter::once(&key.parent)));
            let actual = dim_meas_1type(frag, a, &with_pred).map(|h| h.meas).ok();
            report.expect(expected == actual, inst, "component measure", || format!("{actual:?} vs {expected:?}"));
        }
    }
    report
}

/// All tuples up to `max_len` (as multisets, each in every order) over every
/// closed set of at most `max_closed` nodes, capped at `cap_sets` sets.
pub fn check_permutation_invariance(frag: &Fragment, max_len: usize, max_closed: usize, cap_sets: usize) -> CheckReport {
    let mut report = CheckReport::new("permutation", 0);
    let nodes: Vec<GammaNode> = frag.nodes().iter().cloned().collect();
    for c in closed_subsets(frag, max_closed, cap_sets) {
        for len in 1..=max_len {
            for idx in multisets(nodes.len(), len) {
                let base: Vec<GammaNode> = idx.iter().map(|&i| nodes[i].clone()).collect();
                let Ok(h0) = dim_meas_tuple(frag, &base, &c) else {
                    report.fail(format!("a={} C={}", show_nodes(&base), show_set(&c)), "a value", "error");
                    continue;
                };
                for perm in permutations(len).into_iter().skip(1) {
                    let t: Vec<GammaNode> = perm.iter().map(|&i| base[i].clone()).collect();
                    let h = dim_meas_tuple(frag, &t, &c).ok();
                    report.expect_eq(|| format!("a={} C={}", show_nodes(&t), show_set(&c)), &Some(h0.clone()), &h);
                }
            }
        }
    }
    report
}

fn multisets(n: usize, len: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i, n, len, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, len, &mut Vec::new(), &mut out);
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// For nested closed B ⊆ C and every type q over B: dim q is the largest
/// dimension among its extensions over C, and meas q is the sum of the
/// measures of the extensions attaining it. Each (B, C) pair counts as one
/// instance.
pub fn check_well_definedness(frag: &Fragment, trials: usize, seed: u64, max_closed: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("well_definedness", seed);
    for t in 0..trials {
        let c = random_closed(frag, &mut rng, 3, max_closed);
        let inner = frag.restrict(&c).expect("closed subset");
        let subs = closed_subsets(&inner, c.len(), 256);
        let b: NodeSet = subs.choose(&mut rng).cloned().unwrap_or_else(|| c.clone());
        let n = if c.len() <= 5 && rng.gen_bool(0.3) { 2 } else { 1 };
        let inst = || format!("seed={seed} trial={t} n={n} B={} C={}", show_set(&b), show_set(&c));
        report.instances += 1;
        if let Err(e) = well_defined_on(frag, &b, &c, n) {
            report.fail(inst(), "extensions agree", e);
        }
    }
    report
}

/// Checks one nested pair; the error describes the first discrepancy.
pub(crate) fn well_defined_on(frag: &Fragment, b: &NodeSet, c: &NodeSet, n: usize) -> Result<(), String> {
    let budget = min_budget(frag.plan(), n);
    let over_b = frag.enumerate_realizations(n, b, budget).map_err(|e| e.to_string())?;
    let over_c = frag.enumerate_realizations(n, c, budget).map_err(|e| e.to_string())?;
    let mut exts: BTreeMap<TypeDescriptor, Vec<DimMeas>> = BTreeMap::new();
    for r in &over_c {
        let q = r.fragment.type_descriptor(&r.tuple, b).map_err(|e| e.to_string())?;
        let h = dim_meas_tuple(&r.fragment, &r.tuple, c).map_err(|e| e.to_string())?;
        exts.entry(q).or_default().push(h);
    }
    let known: BTreeSet<&TypeDescriptor> = over_b.iter().map(|r| &r.descriptor).collect();
    if let Some(stray) = exts.keys().find(|q| !known.contains(q)) {
        return Err(format!("extension restricts to unenumerated type {stray}"));
    }
    for r in &over_b {
        let h = dim_meas_tuple(&r.fragment, &r.tuple, b).map_err(|e| e.to_string())?;
        let Some(e) = exts.get(&r.descriptor) else {
            return Err(format!("type {} has no extension", r.descriptor));
        };
        let combined = combine_types(e);
        if combined != h {
            return Err(format!("type {}: h = {h}, extensions give {combined}", r.descriptor));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{p1, p2, p3};

    #[test]
    fn combinatorics() {
        assert_eq!(multisets(3, 2).len(), 6);
        assert_eq!(multisets(10, 3).len(), 220);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[0], vec![0, 1, 2]);
    }

    #[test]
    fn laws_hold_on_small_fragments() {
        for plan in [p1(), p2(), p3()] {
            for seed in 0..3 {
                let f = Fragment::grow_random(plan.clone(), seed, 7);
                for r in [
                    check_main_formulas(&f, 7),
                    check_permutation_invariance(&f, 2, 5, 8),
                    check_well_definedness(&f, 5, seed, 6),
                ] {
                    assert!(r.passed(), "{}: {:?}", r.suite, r.failures);
                    assert!(r.instances > 0);
                }
            }
        }
    }

    #[test]
    fn p1_split_over_a_new_vertex() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut f = Fragment::new(p1());
        let c = f.realize_random_child(&GammaNode::root(), 0, &mut rng);
        let b = f.tcl(std::iter::empty());
        let cc = f.tcl([&c]);
        well_defined_on(&f, &b, &cc, 1).unwrap();
        well_defined_on(&f, &cc, &cc, 1).unwrap();
        well_defined_on(&f, &b, &cc, 2).unwrap();
    }
}

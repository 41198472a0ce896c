//! The NIC axioms at fragment scale, back-and-forth soundness, and the dump
//! round trip.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{all_tuples, closed_subsets, show_nodes, show_set, CheckReport};
use crate::fragment::{back_and_forth, is_isomorphism, min_budget, Fragment, TypeDescriptor};
use crate::tree::{component_key, GammaNode, NodeSet};

/// N2: single nodes with equal tree descriptors over tcl(∅) have equal full
/// descriptors. N3: two elements of one component that agree on the tree
/// descriptor over C and on the component type over tcl(C) ∩ M(e) have equal
/// full descriptors over C. acl = tcl: every non-algebraic 1-type over a
/// closed C has `k` distinct realizations, and every algebraic one has
/// exactly one realization in the fragment.
pub fn check_nic_axioms(frag: &Fragment, k: usize, seed: u64, max_closed: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("nic", seed);
    let empty = frag.tcl(std::iter::empty());

    let mut n2: BTreeMap<TypeDescriptor, TypeDescriptor> = BTreeMap::new();
    for e in frag.nodes() {
        let Ok(d) = frag.type_descriptor(std::slice::from_ref(e), &empty) else { continue };
        let first = n2.entry(d.tree_part()).or_insert_with(|| d.clone());
        report.expect_eq(|| format!("N2 e={e}"), first, &d);
    }

    let sets = closed_subsets(frag, max_closed, 64);
    for c in &sets {
        let mut n3: BTreeMap<(String, TypeDescriptor, String), TypeDescriptor> = BTreeMap::new();
        for e in frag.nodes().iter().filter(|e| !c.contains(*e)) {
            let Some(key) = component_key(e) else { continue };
            let Some(ct) = frag.component_type(e, c) else { continue };
            let Ok(d) = frag.type_descriptor(std::slice::from_ref(e), c) else { continue };
            let class = (format!("{}/{}", key.parent, key.index), d.tree_part(), format!("{ct:?}"));
            let first = n3.entry(class).or_insert_with(|| d.clone());
            report.expect_eq(|| format!("N3 e={e} C={}", show_set(c)), first, &d);
        }
    }

    let nodes: Vec<GammaNode> = frag.nodes().iter().cloned().collect();
    for c in sets.iter().take(8) {
        let Ok(types) = frag.enumerate_realizations(1, c, min_budget(frag.plan(), 1)) else {
            report.fail(format!("acl C={}", show_set(c)), "1-types", "enumeration error");
            continue;
        };
        for r in types {
            let inst = || format!("acl type={} C={}", r.descriptor, show_set(c));
            if r.descriptor.is_algebraic() {
                let count = nodes
                    .iter()
                    .filter(|n| frag.type_descriptor(std::slice::from_ref(*n), c).ok().as_ref() == Some(&r.descriptor))
                    .count();
                report.expect_eq(inst, &1, &count);
            } else {
                report.expect_eq(inst, &k, &distinct_realizations(&r.fragment, &r.descriptor, k, &mut rng));
            }
        }
    }
    report
}

/// Realizes `desc` repeatedly in one fragment and counts the distinct tuples
/// obtained, each checked to have the requested type.
fn distinct_realizations(start: &Fragment, desc: &TypeDescriptor, k: usize, rng: &mut ChaCha8Rng) -> usize {
    let Ok(mut frag) = start.restrict(&desc.base) else { return 0 };
    let mut found: Vec<Vec<GammaNode>> = Vec::new();
    for _ in 0..k {
        let Ok((next, tuple)) = frag.realize_descriptor(desc, rng) else { break };
        if next.type_descriptor(&tuple, &desc.base).ok().as_ref() != Some(desc) {
            break;
        }
        frag = next;
        if !found.contains(&tuple) {
            found.push(tuple);
        }
    }
    found.len()
}

/// Runs the alternating extension ladder between `a` and `b` (both may grow)
/// and checks that the result is an isomorphism carrying the descriptor over
/// tcl(∅) of every node and every pair to that of its image.
pub fn check_back_and_forth(a: &Fragment, b: &Fragment, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("back_and_forth", seed);
    let (mut a, mut b) = (a.clone(), b.clone());
    let f = match back_and_forth(&mut a, &mut b, &mut rng) {
        Ok(f) => f,
        Err(e) => {
            report.fail(format!("seed={seed}"), "a total correspondence", e);
            return report;
        }
    };
    report.expect(is_isomorphism(&a, &b, &f), || format!("seed={seed}"), "isomorphism", || {
        format!("{} -> {} nodes, map of size {}", a.len(), b.len(), f.len())
    });
    let base: NodeSet = a.tcl(std::iter::empty());
    let nodes: Vec<GammaNode> = a.nodes().iter().cloned().collect();
    let mut tuples = all_tuples(&nodes, 1);
    tuples.extend(all_tuples(&nodes, 2).into_iter().step_by(3));
    for t in tuples {
        let image: Vec<GammaNode> = t.iter().map(|x| f[x].clone()).collect();
        let da = a.type_descriptor(&t, &base).ok();
        let db = b.type_descriptor(&image, &base).ok();
        report.expect_eq(|| format!("seed={seed} a={} image={}", show_nodes(&t), show_nodes(&image)), &da, &db);
    }
    report
}

/// dump → load → dump is byte-identical and the loaded fragment equals the
/// original.
pub fn check_round_trip(frag: &Fragment) -> CheckReport {
    let mut report = CheckReport::new("round_trip", 0);
    let first = frag.to_json();
    match Fragment::from_json(&first) {
        Ok(loaded) => {
            report.expect(loaded == *frag, || format!("{} nodes", frag.len()), "equal fragment", || "different".into());
            report.expect_eq(|| format!("{} nodes", frag.len()), &first, &loaded.to_json());
        }
        Err(e) => report.fail(format!("{} nodes", frag.len()), "a loadable dump", e),
    }
    report
}

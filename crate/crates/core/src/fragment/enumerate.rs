//! Exhaustive enumeration of the complete n-types over a closed set.
//!
//! Every n-type over a closed `B` is realized by adding, for each coordinate,
//! either a node of the current closure or a fresh branch: a new sibling in
//! some component hanging off the closure (one choice per fresh component
//! 1-type), continued upward along any plan path. Continuations above a new
//! node only meet empty components, whose unique 1-type is forced. So each
//! coordinate adds at most `height + 1` nodes on its branch.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Fragment, FragmentError, TypeDescriptor};
use crate::components::{ComponentType, TypeKind};
use crate::tree::{ComponentKey, GammaNode, Lambda, NodeSet, Tag, TreePlan};

/// A witness for one enumerated type: a fragment holding the base and the
/// realized tuple, and the tuple's descriptor over the base.
#[derive(Clone, Debug)]
pub struct Realization {
    pub fragment: Fragment,
    pub tuple: Vec<GammaNode>,
    pub descriptor: TypeDescriptor,
}

/// The smallest budget for which enumeration of `n`-types is complete.
pub fn min_budget(plan: &TreePlan, n: usize) -> usize {
    n * (plan.height() + 1)
}

impl Fragment {
    /// All complete `n`-types over the closed set `base`, each with a witness.
    pub fn enumerate_realizations(
        &self,
        n: usize,
        base: &NodeSet,
        budget: usize,
    ) -> Result<Vec<Realization>, FragmentError> {
        let required = min_budget(&self.plan, n);
        if budget < required {
            return Err(FragmentError::BudgetTooSmall { budget, required });
        }
        let start = self.restrict(base)?;
        // Realizations below happen in fragments that contain nothing outside
        // the current closure, so no coin is ever flipped.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut raw = Vec::new();
        extend(&start, Vec::new(), n, &mut rng, &mut raw)?;

        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (fragment, tuple) in raw {
            let descriptor = fragment.type_descriptor(&tuple, base)?;
            if seen.insert(descriptor.clone()) {
                out.push(Realization { fragment, tuple, descriptor });
            }
        }
        Ok(out)
    }

    pub fn enumerate_types(&self, n: usize, base: &NodeSet, budget: usize) -> Result<Vec<TypeDescriptor>, FragmentError> {
        Ok(self.enumerate_realizations(n, base, budget)?.into_iter().map(|r| r.descriptor).collect())
    }
}

fn extend(
    frag: &Fragment,
    tuple: Vec<GammaNode>,
    n: usize,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<(Fragment, Vec<GammaNode>)>,
) -> Result<(), FragmentError> {
    if tuple.len() == n {
        out.push((frag.clone(), tuple));
        return Ok(());
    }
    for w in frag.nodes() {
        let mut t = tuple.clone();
        t.push(w.clone());
        extend(frag, t, n, rng, out)?;
    }
    for (grown, node) in fresh_branches(frag, rng)? {
        let mut t = tuple.clone();
        t.push(node);
        extend(&grown, t, n, rng, out)?;
    }
    Ok(())
}

/// Every way of adding one node outside the (closed) fragment, up to type.
fn fresh_branches(frag: &Fragment, rng: &mut ChaCha8Rng) -> Result<Vec<(Fragment, GammaNode)>, FragmentError> {
    let plan = frag.plan_arc().clone();
    let mut out = Vec::new();
    for e0 in frag.nodes() {
        for (index, lambda) in plan.children(&e0.projection()) {
            if lambda != Lambda::Infinity {
                continue;
            }
            let key = ComponentKey { parent: e0.clone(), index };
            let th = frag.theory_of(&key).expect("validated plan");
            let params: Vec<_> = frag.component(&key).map(|st| st.elements().iter().copied().collect()).unwrap_or_default();
            for t in th.enumerate_1types(&params).into_iter().filter(|t| !t.is_algebraic()) {
                let mut first = frag.clone();
                let e1 = first.realize_node(e0, index, Some(&t), rng)?;
                let sigma = e1.projection();
                for tau in plan.subtree(&sigma) {
                    let mut grown = first.clone();
                    let mut node = e1.clone();
                    let mut path = sigma.clone();
                    for &idx in &tau[sigma.len()..] {
                        path.push(idx);
                        node = match plan.lambda(&path) {
                            Some(Lambda::One) => node.child(idx, Tag::Star),
                            _ => {
                                let th = plan.theory(&path).expect("validated plan");
                                let unique = ComponentType {
                                    theory: th.id().to_owned(),
                                    params: Vec::new(),
                                    kind: TypeKind::Fresh(Vec::new()),
                                };
                                grown.realize_node(&node, idx, Some(&unique), rng)?
                            }
                        };
                    }
                    out.push((grown, node));
                }
            }
        }
    }
    Ok(out)
}

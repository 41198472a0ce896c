//! Generator automorphisms: an automorphism of one component `M(a)` moves
//! every node above an element `c` to the corresponding node above `σ(c)`
//! and fixes everything else.

use std::collections::{BTreeMap, BTreeSet};

use super::{Fragment, FragmentError};
use crate::components::ComponentTheory;
use crate::tree::{ComponentKey, ElemId, GammaNode, Tag};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorAutomorphism {
    pub key: ComponentKey,
    pub perm: BTreeMap<ElemId, ElemId>,
}

impl GeneratorAutomorphism {
    pub fn is_identity(&self) -> bool {
        self.perm.iter().all(|(a, b)| a == b)
    }

    fn image_of(&self, id: ElemId) -> ElemId {
        *self.perm.get(&id).unwrap_or(&id)
    }

    /// The image of a node under the induced map on Γ.
    pub fn apply_node(&self, node: &GammaNode) -> GammaNode {
        let d = self.key.parent.len();
        if node.len() <= d || !self.key.parent.le(node) || node.steps()[d].index != self.key.index {
            return node.clone();
        }
        match node.steps()[d].tag {
            Tag::Elem(id) => node.with_tag_at(d, Tag::Elem(self.image_of(id))),
            Tag::Star => node.clone(),
        }
    }

    pub fn apply_key(&self, key: &ComponentKey) -> ComponentKey {
        ComponentKey { parent: self.apply_node(&key.parent), index: key.index }
    }

    /// The inverse generator.
    pub fn inverse(&self) -> GeneratorAutomorphism {
        GeneratorAutomorphism { key: self.key.clone(), perm: self.perm.iter().map(|(&a, &b)| (b, a)).collect() }
    }
}

impl Fragment {
    /// Transports the whole fragment along a generator. The permutation must
    /// be an automorphism of the (finite) component state, which makes the
    /// result equal to the input as a fragment.
    pub fn apply_generator(&self, g: &GeneratorAutomorphism) -> Result<Fragment, FragmentError> {
        let st = self.component(&g.key).ok_or_else(|| FragmentError::MissingComponent(g.key.parent.to_string()))?;
        let th = self.theory_of(&g.key).expect("validated plan");
        if !th.is_automorphism(st, &g.perm) {
            return Err(FragmentError::NotTypePreserving(g.key.parent.to_string()));
        }
        let nodes = self.nodes.iter().map(|n| g.apply_node(n)).collect();
        let components = self
            .components
            .iter()
            .map(|(k, s)| {
                let moved = if *k == g.key { s.relabel(th.signature(), &g.perm) } else { s.clone() };
                (g.apply_key(k), moved)
            })
            .collect();
        Ok(Fragment { plan: self.plan.clone(), nodes, components })
    }
}

/// Automorphisms of the component at `key`, found by backtracking over
/// element assignments, in lexicographic order of the image sequence. At
/// most `limit` are returned; the identity comes first.
pub fn component_automorphisms(frag: &Fragment, key: &ComponentKey, limit: usize) -> Vec<GeneratorAutomorphism> {
    let (Some(st), Some(th)) = (frag.component(key), frag.theory_of(key)) else {
        return Vec::new();
    };
    let elems: Vec<ElemId> = st.elements().iter().copied().collect();
    let mut out = Vec::new();
    let mut img = Vec::with_capacity(elems.len());
    let mut used = BTreeSet::new();
    search(th, st, &elems, &mut img, &mut used, limit, &mut |img: &[ElemId]| {
        out.push(GeneratorAutomorphism { key: key.clone(), perm: elems.iter().copied().zip(img.iter().copied()).collect() });
    });
    out
}

fn search(
    th: &dyn ComponentTheory,
    st: &crate::components::ComponentState,
    elems: &[ElemId],
    img: &mut Vec<ElemId>,
    used: &mut BTreeSet<ElemId>,
    limit: usize,
    emit: &mut dyn FnMut(&[ElemId]),
) -> usize {
    if img.len() == elems.len() {
        emit(img);
        return 1;
    }
    let mut found = 0;
    for &c in elems {
        if found >= limit {
            break;
        }
        if used.contains(&c) {
            continue;
        }
        img.push(c);
        if th.same_qf_type(st, &[], &elems[..img.len()], img) {
            used.insert(c);
            found += search(th, st, elems, img, used, limit - found, emit);
            used.remove(&c);
        }
        img.pop();
    }
    found
}

//! Canonical descriptors of complete types over tree-closed parameter sets.
//!
//! The type of a tuple over a closed set `B` is fixed by the labeled tree
//! `tcl(B ∪ ā)` over `B` together with the quantifier-free data of the new
//! elements inside each component. Because the tuple coordinates are marked,
//! a canonical labeling needs no search: new nodes are numbered in order of
//! first appearance while walking each coordinate's branch from the root,
//! followed by the one-labeled children added by the closure. Each new
//! infinity node records its 1-type over the `B`-elements of its component
//! (in id order) followed by the earlier new elements of that component.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Fragment, FragmentError};
use crate::components::{ComponentType, TypeKind};
use crate::tree::{component_key, ComponentKey, ElemId, GammaNode, Lambda, NodeSet, Tag};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeRef {
    /// A parameter node.
    Base(GammaNode),
    /// The new node with this canonical number.
    New(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NewNode {
    pub parent: NodeRef,
    pub index: u32,
    /// Slot pattern of the component 1-type; empty for one-labeled nodes.
    pub pattern: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeDescriptor {
    pub base: NodeSet,
    pub coords: Vec<NodeRef>,
    pub new_nodes: Vec<NewNode>,
}

impl TypeDescriptor {
    pub fn arity(&self) -> usize {
        self.coords.len()
    }

    /// True iff every coordinate is a parameter, i.e. the type is realized
    /// inside the closed base set.
    pub fn is_algebraic(&self) -> bool {
        self.coords.iter().all(|c| matches!(c, NodeRef::Base(_)))
    }

    /// The labeled-tree part alone, without component data.
    pub fn tree_part(&self) -> TypeDescriptor {
        let mut t = self.clone();
        for n in &mut t.new_nodes {
            n.pattern.clear();
        }
        t
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Base(n) => write!(f, "{n}"),
            NodeRef::New(i) => write!(f, "#{i}"),
        }
    }
}

impl fmt::Display for TypeDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tp(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, " / {} nodes)", self.base.len())?;
        for (i, n) in self.new_nodes.iter().enumerate() {
            write!(f, " #{i}={}^{}", n.parent, n.index)?;
            if !n.pattern.is_empty() {
                let bits: String = n.pattern.iter().map(|&b| if b { '1' } else { '0' }).collect();
                write!(f, "[{bits}]")?;
            }
        }
        Ok(())
    }
}

impl Fragment {
    /// The canonical descriptor of `tp(tuple / base)`; `base` must be tree-closed.
    pub fn type_descriptor(&self, tuple: &[GammaNode], base: &NodeSet) -> Result<TypeDescriptor, FragmentError> {
        if !self.is_closed(base) {
            return Err(FragmentError::NotClosed);
        }
        if let Some(n) = tuple.iter().chain(base).find(|n| !self.contains(n)) {
            return Err(FragmentError::MissingNode(n.to_string()));
        }
        let mut order: Vec<GammaNode> = Vec::new();
        let mut names: BTreeMap<GammaNode, usize> = BTreeMap::new();
        for a in tuple {
            for p in a.prefixes() {
                if !base.contains(&p) && !names.contains_key(&p) {
                    names.insert(p.clone(), order.len());
                    order.push(p);
                }
            }
        }
        let mut i = 0;
        while i < order.len() {
            let node = order[i].clone();
            for (index, lambda) in self.plan.children(&node.projection()) {
                if lambda == Lambda::One {
                    let child = node.child(index, Tag::Star);
                    if !names.contains_key(&child) {
                        names.insert(child.clone(), order.len());
                        order.push(child);
                    }
                }
            }
            i += 1;
        }

        let node_ref = |n: &GammaNode| match names.get(n) {
            Some(&k) => NodeRef::New(k),
            None => NodeRef::Base(n.clone()),
        };
        let mut new_nodes = Vec::with_capacity(order.len());
        let mut seen_in: BTreeMap<ComponentKey, Vec<ElemId>> = BTreeMap::new();
        for node in &order {
            let key = component_key(node).expect("new nodes are never the root");
            let pattern = match node.elem() {
                None => Vec::new(),
                Some(id) => {
                    let th = self.theory_of(&key).expect("validated plan");
                    let st = self.component(&key).expect("registered element");
                    let earlier = seen_in.entry(key.clone()).or_default();
                    let mut params = self.elements_in(&key, base);
                    params.extend(earlier.iter().copied());
                    earlier.push(id);
                    match th.type_of(st, id, &params).kind {
                        TypeKind::Fresh(p) => p,
                        TypeKind::Equal(_) => unreachable!("new node coincides with a parameter"),
                    }
                }
            };
            new_nodes.push(NewNode { parent: node_ref(&node.pred()), index: key.index, pattern });
        }
        Ok(TypeDescriptor { base: base.clone(), coords: tuple.iter().map(node_ref).collect(), new_nodes })
    }

    /// Adds a realization of `desc` to a copy of this fragment. The base of the
    /// descriptor must be a closed subset of the fragment; atoms linking the new
    /// elements to non-base elements are random.
    pub fn realize_descriptor(
        &self,
        desc: &TypeDescriptor,
        rng: &mut dyn rand::RngCore,
    ) -> Result<(Fragment, Vec<GammaNode>), FragmentError> {
        if !self.is_closed(&desc.base) {
            return Err(FragmentError::NotClosed);
        }
        if let Some(n) = desc.base.iter().find(|n| !self.contains(n)) {
            return Err(FragmentError::MissingNode(n.to_string()));
        }
        let mismatch = |m: String| FragmentError::DescriptorMismatch(m);
        let mut frag = self.clone();
        let mut actual: Vec<GammaNode> = Vec::with_capacity(desc.new_nodes.len());
        let mut seen_in: BTreeMap<ComponentKey, Vec<ElemId>> = BTreeMap::new();
        for (k, nn) in desc.new_nodes.iter().enumerate() {
            let parent = match &nn.parent {
                NodeRef::Base(n) => n.clone(),
                NodeRef::New(j) if *j < k => actual[*j].clone(),
                NodeRef::New(j) => return Err(mismatch(format!("node #{k} refers to later node #{j}"))),
            };
            let mut path = parent.projection();
            path.push(nn.index);
            let node = match frag.plan.lambda(&path) {
                None => return Err(mismatch(format!("no plan path for node #{k}"))),
                Some(Lambda::One) => {
                    let child = parent.child(nn.index, Tag::Star);
                    if !frag.contains(&child) {
                        return Err(mismatch(format!("one child of node #{k} is missing")));
                    }
                    child
                }
                Some(Lambda::Infinity) => {
                    let key = ComponentKey { parent: parent.clone(), index: nn.index };
                    let th = frag.theory_of(&key).expect("validated plan");
                    let earlier = seen_in.entry(key.clone()).or_default();
                    let mut params = frag.elements_in(&key, &desc.base);
                    params.extend(earlier.iter().copied());
                    let t = ComponentType {
                        theory: th.id().to_owned(),
                        params,
                        kind: TypeKind::Fresh(nn.pattern.clone()),
                    };
                    let node = frag.realize_node(&parent, nn.index, Some(&t), rng)?;
                    seen_in.get_mut(&key).expect("inserted above").push(node.elem().expect("infinity node"));
                    node
                }
            };
            actual.push(node);
        }
        let tuple = desc
            .coords
            .iter()
            .map(|c| match c {
                NodeRef::Base(n) => Ok(n.clone()),
                NodeRef::New(j) => actual.get(*j).cloned().ok_or_else(|| mismatch(format!("coordinate #{j} is undefined"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((frag, tuple))
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::fixtures::p1;

    /// P1 with b0 present and three further siblings: two adjacent to b0, one not.
    fn setup() -> (Fragment, GammaNode, [GammaNode; 3]) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut f = Fragment::new(p1());
        let root = GammaNode::root();
        let b0 = f.realize_random_child(&root, 0, &mut rng);
        let c0 = b0.elem().unwrap();
        let t = |adj: bool| ComponentType {
            theory: "random_graph".into(),
            params: vec![c0],
            kind: TypeKind::Fresh(vec![adj]),
        };
        let a = f.realize_node(&root, 0, Some(&t(true)), &mut rng).unwrap();
        let a2 = f.realize_node(&root, 0, Some(&t(true)), &mut rng).unwrap();
        let n = f.realize_node(&root, 0, Some(&t(false)), &mut rng).unwrap();
        (f, b0, [a, a2, n])
    }

    #[test]
    fn parameter_node_has_unique_descriptor() {
        let (f, b0, _) = setup();
        let base = f.tcl([&b0]);
        let d = f.type_descriptor(std::slice::from_ref(&b0), &base).unwrap();
        assert!(d.is_algebraic());
        for other in f.nodes() {
            if *other != b0 {
                assert_ne!(f.type_descriptor(std::slice::from_ref(other), &base).unwrap(), d);
            }
        }
    }

    #[test]
    fn same_adjacency_means_same_descriptor() {
        let (f, b0, [a, a2, n]) = setup();
        let base = f.tcl([&b0]);
        let da = f.type_descriptor(&[a], &base).unwrap();
        assert_eq!(da, f.type_descriptor(&[a2], &base).unwrap());
        assert_ne!(da, f.type_descriptor(&[n], &base).unwrap());
    }

    #[test]
    fn descriptor_requires_closed_base() {
        let (f, b0, [a, ..]) = setup();
        let open: NodeSet = [b0].into_iter().collect();
        assert!(matches!(f.type_descriptor(&[a], &open), Err(FragmentError::NotClosed)));
    }

    #[test]
    fn realizing_a_descriptor_reproduces_it() {
        let (f, b0, [a, _, n]) = setup();
        let base = f.tcl([&b0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for tuple in [vec![a.clone()], vec![a.clone(), n.clone()], vec![n.clone(), b0.clone(), n.clone()]] {
            let d = f.type_descriptor(&tuple, &base).unwrap();
            let (g, t) = f.realize_descriptor(&d, &mut rng).unwrap();
            assert_eq!(g.type_descriptor(&t, &base).unwrap(), d);
            let (h, t) = f.restrict(&base).unwrap().realize_descriptor(&d, &mut rng).unwrap();
            assert_eq!(h.type_descriptor(&t, &base).unwrap(), d);
        }
    }
}

//! Finite, materialized pieces of a NIC structure.
//!
//! A [`Fragment`] is a tree-closed node set of Γ(S) together with the
//! relational data of every infinity component it meets. Relations only ever
//! live inside one component, so cross-component interaction cannot be
//! expressed at all.

mod descriptor;
mod dump;
mod embedding;
mod enumerate;
mod generator;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use descriptor::{NewNode, NodeRef, TypeDescriptor};
pub use dump::{ComponentDump, FragmentDump};
pub use embedding::{back_and_forth, extend_embedding, extend_embedding_within, is_isomorphism, Correspondence};
pub use enumerate::{min_budget, Realization};
pub use generator::{component_automorphisms, GeneratorAutomorphism};

use crate::components::{ComponentError, ComponentState, ComponentTheory, ComponentType};
use crate::tree::{self, component_key, ComponentKey, ElemId, GammaNode, Lambda, NodeSet, Tag, TreePlan};

#[derive(Debug, Error)]
pub enum FragmentError {
    #[error("node {0} is not in the fragment")]
    MissingNode(String),
    #[error("plan has no path {0}")]
    NotInPlan(String),
    #[error("one-labeled child {0} is already present")]
    OneChildPresent(String),
    #[error("infinity child {0} needs a component type")]
    MissingType(String),
    #[error(transparent)]
    Component(#[from] ComponentError),
    #[error("parameter set is not tree-closed")]
    NotClosed,
    #[error("enumeration budget {budget} is below the required {required}")]
    BudgetTooSmall { budget: usize, required: usize },
    #[error("no component at {0}")]
    MissingComponent(String),
    #[error("permutation is not an automorphism of component {0}")]
    NotTypePreserving(String),
    #[error("pred({0}) is not in the domain of the correspondence")]
    PredNotInDomain(String),
    #[error("descriptor does not fit this fragment: {0}")]
    DescriptorMismatch(String),
    #[error("malformed fragment dump: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid fragment: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    plan: Arc<TreePlan>,
    nodes: NodeSet,
    components: BTreeMap<ComponentKey, ComponentState>,
}

impl Fragment {
    /// The fragment holding exactly tcl(∅).
    pub fn new(plan: Arc<TreePlan>) -> Self {
        let nodes = tree::tcl(&plan, &NodeSet::new());
        Fragment { plan, nodes, components: BTreeMap::new() }
    }

    pub fn plan(&self) -> &TreePlan {
        &self.plan
    }

    pub fn plan_arc(&self) -> &Arc<TreePlan> {
        &self.plan
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, node: &GammaNode) -> bool {
        self.nodes.contains(node)
    }

    pub fn components(&self) -> &BTreeMap<ComponentKey, ComponentState> {
        &self.components
    }

    pub fn component(&self, key: &ComponentKey) -> Option<&ComponentState> {
        self.components.get(key)
    }

    pub fn theory_of(&self, key: &ComponentKey) -> Option<&'static dyn ComponentTheory> {
        self.plan.theory(&key.projection())
    }

    pub fn tcl<'a>(&self, nodes: impl IntoIterator<Item = &'a GammaNode>) -> NodeSet {
        tree::tcl(&self.plan, nodes)
    }

    pub fn is_closed(&self, nodes: &NodeSet) -> bool {
        tree::is_closed(&self.plan, nodes)
    }

    /// Elements of component `key` whose nodes lie in `within`, in id order.
    pub fn elements_in(&self, key: &ComponentKey, within: &NodeSet) -> Vec<ElemId> {
        self.components
            .get(key)
            .map(|st| st.elements().iter().copied().filter(|&id| within.contains(&key.node(id))).collect())
            .unwrap_or_default()
    }

    /// The component 1-type of the infinity node `a` over the component
    /// elements that lie in `within`.
    pub fn component_type(&self, a: &GammaNode, within: &NodeSet) -> Option<ComponentType> {
        let key = component_key(a)?;
        let th = self.theory_of(&key)?;
        let st = self.components.get(&key)?;
        let params = self.elements_in(&key, within);
        Some(th.type_of(st, a.elem()?, &params))
    }

    /// Adds a child of `parent` at plan index `index`. Infinity children get a
    /// new element realizing `ctype`; one children always exist already since
    /// fragments are kept tree-closed.
    pub fn realize_node(
        &mut self,
        parent: &GammaNode,
        index: u32,
        ctype: Option<&ComponentType>,
        rng: &mut dyn rand::RngCore,
    ) -> Result<GammaNode, FragmentError> {
        if !self.nodes.contains(parent) {
            return Err(FragmentError::MissingNode(parent.to_string()));
        }
        let mut path = parent.projection();
        path.push(index);
        match self.plan.lambda(&path) {
            None => Err(FragmentError::NotInPlan(tree::PathDisplay(&path).to_string())),
            Some(Lambda::One) => {
                Err(FragmentError::OneChildPresent(parent.child(index, Tag::Star).to_string()))
            }
            Some(Lambda::Infinity) => {
                let key = ComponentKey { parent: parent.clone(), index };
                let ctype = ctype.ok_or_else(|| FragmentError::MissingType(key.projection_display()))?;
                let th = self.plan.theory(&path).expect("validated plan");
                let state = self.components.entry(key.clone()).or_default();
                let id = match th.realize(state, ctype, rng) {
                    Ok(id) => id,
                    Err(e) => {
                        if state.is_empty() {
                            self.components.remove(&key);
                        }
                        return Err(e.into());
                    }
                };
                let node = key.node(id);
                self.insert_closed(&node);
                Ok(node)
            }
        }
    }

    /// Adds a child element with random relations to every existing sibling.
    pub fn realize_random_child(&mut self, parent: &GammaNode, index: u32, rng: &mut dyn rand::RngCore) -> GammaNode {
        let key = ComponentKey { parent: parent.clone(), index };
        let th = self.theory_of(&key).expect("infinity child");
        let state = self.components.entry(key.clone()).or_default();
        let id = th.realize_random(state, rng);
        let node = key.node(id);
        self.insert_closed(&node);
        node
    }

    /// Ensures `node` exists, creating missing ancestors with the ids the node
    /// names. Relations of newly created elements are random.
    pub fn materialize(&mut self, node: &GammaNode, rng: &mut dyn rand::RngCore) -> Result<(), FragmentError> {
        if !self.plan.admits(node) {
            return Err(FragmentError::NotInPlan(node.to_string()));
        }
        for p in node.prefixes() {
            if self.nodes.contains(&p) {
                continue;
            }
            let key = component_key(&p).expect("root is always present");
            let th = self.theory_of(&key).expect("one children exist in closed fragments");
            let id = p.elem().expect("infinity step");
            let state = self.components.entry(key).or_default();
            let others: Vec<ElemId> = state.elements().iter().copied().collect();
            state.add_with_id(id);
            for slot in th.slots(others.len()) {
                let rel = &th.signature()[slot.relation];
                let v = rng.gen_bool(0.5);
                state.set(rel, &crate::components::instantiate(&slot.args, id, &others), v);
            }
            self.insert_closed(&p);
        }
        Ok(())
    }

    fn insert_closed(&mut self, node: &GammaNode) {
        let closed = tree::tcl(&self.plan, std::iter::once(node));
        self.nodes.extend(closed);
    }

    /// The sub-fragment on the tree-closed set `keep`.
    pub fn restrict(&self, keep: &NodeSet) -> Result<Fragment, FragmentError> {
        if !self.is_closed(keep) {
            return Err(FragmentError::NotClosed);
        }
        if let Some(n) = keep.iter().find(|n| !self.nodes.contains(n)) {
            return Err(FragmentError::MissingNode(n.to_string()));
        }
        let mut components = BTreeMap::new();
        for (key, st) in &self.components {
            if !keep.contains(&key.parent) {
                continue;
            }
            let ids: BTreeSet<ElemId> = self.elements_in(key, keep).into_iter().collect();
            if !ids.is_empty() {
                components.insert(key.clone(), st.restrict(&ids));
            }
        }
        Ok(Fragment { plan: self.plan.clone(), nodes: keep.clone(), components })
    }

    /// Grows a random fragment to (at most) `target` nodes, deterministically
    /// from `seed`.
    pub fn grow_random(plan: Arc<TreePlan>, seed: u64, target: usize) -> Fragment {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut frag = Fragment::new(plan);
        let mut attempts = 0;
        while frag.len() < target && attempts < 64 * target.max(1) {
            attempts += 1;
            let nodes: Vec<&GammaNode> = frag.nodes.iter().collect();
            let parent = nodes[rng.gen_range(0..nodes.len())].clone();
            let inf: Vec<u32> = frag
                .plan
                .children(&parent.projection())
                .into_iter()
                .filter(|(_, l)| *l == Lambda::Infinity)
                .map(|(i, _)| i)
                .collect();
            if inf.is_empty() {
                continue;
            }
            let index = inf[rng.gen_range(0..inf.len())];
            let mut next = frag.clone();
            next.realize_random_child(&parent, index, &mut rng);
            if next.len() <= target {
                frag = next;
            }
        }
        frag
    }

    /// Every relation tuple stored anywhere, with the component it lives in.
    /// Used to audit that no tuple mixes components.
    pub fn relation_audit(&self) -> Vec<(ComponentKey, String, Vec<GammaNode>)> {
        let mut out = Vec::new();
        for (key, st) in &self.components {
            for (name, tuples) in st.relations() {
                for t in tuples {
                    out.push((key.clone(), name.clone(), t.iter().map(|&id| key.node(id)).collect()));
                }
            }
        }
        out
    }

    /// Checks every structural invariant of a fragment.
    pub fn check_invariants(&self) -> Result<(), FragmentError> {
        let bad = |m: String| Err(FragmentError::Invalid(m));
        for n in &self.nodes {
            if !self.plan.admits(n) {
                return bad(format!("node {n} does not fit the plan"));
            }
        }
        if !self.is_closed(&self.nodes) {
            return bad("node set is not tree-closed".into());
        }
        for n in &self.nodes {
            if let (Some(key), Some(id)) = (component_key(n), n.elem()) {
                if !self.components.get(&key).is_some_and(|st| st.contains(id)) {
                    return bad(format!("element of {n} is not registered"));
                }
            }
        }
        for (key, st) in &self.components {
            let Some(th) = self.theory_of(key) else {
                return bad(format!("component at {} has no theory", key.projection_display()));
            };
            if st.is_empty() {
                return bad(format!("empty component at {}", key.node(0)));
            }
            for &id in st.elements() {
                if !self.nodes.contains(&key.node(id)) {
                    return bad(format!("element {id} of component {} has no node", key.parent));
                }
                if id >= st.next_id() {
                    return bad(format!("element {id} is not below the id counter"));
                }
            }
            for (name, tuples) in st.relations() {
                let Some(rel) = th.relation(name) else {
                    return bad(format!("relation {name} is not in the signature of {}", th.id()));
                };
                for t in tuples {
                    if t.len() != rel.arity || t.iter().any(|x| !st.contains(*x)) {
                        return bad(format!("bad tuple {t:?} in {name}"));
                    }
                    let distinct: BTreeSet<_> = t.iter().collect();
                    if distinct.len() != t.len() {
                        return bad(format!("reflexive tuple {t:?} in {name}"));
                    }
                    if rel.kind == crate::components::RelationKind::Symmetric && !t.windows(2).all(|w| w[0] < w[1]) {
                        return bad(format!("unsorted symmetric tuple {t:?} in {name}"));
                    }
                }
                if rel.kind == crate::components::RelationKind::Oriented {
                    let ids: Vec<ElemId> = st.elements().iter().copied().collect();
                    for (i, &a) in ids.iter().enumerate() {
                        for &b in &ids[i + 1..] {
                            if tuples.contains(&vec![a, b]) == tuples.contains(&vec![b, a]) {
                                return bad(format!("pair ({a},{b}) is not oriented exactly once"));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl ComponentKey {
    fn projection_display(&self) -> String {
        tree::PathDisplay(&self.projection()).to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::TypeKind;
    use crate::fixtures::{minimal, p1, p2};

    #[test]
    fn build_holds_tcl_of_empty() {
        assert_eq!(Fragment::new(p1()).nodes().len(), 1);
        let f = Fragment::new(p2());
        let expected: NodeSet =
            [GammaNode::root(), GammaNode::root().child(1, Tag::Star)].into_iter().collect();
        assert_eq!(f.nodes(), &expected);
        assert_eq!(Fragment::new(minimal()).nodes().len(), 1);
    }

    #[test]
    fn realize_sibling_adjacent_to_existing() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut f = Fragment::new(p1());
        let root = GammaNode::root();
        let b0 = f.realize_random_child(&root, 0, &mut rng);
        let t = ComponentType {
            theory: "random_graph".into(),
            params: vec![b0.elem().unwrap()],
            kind: TypeKind::Fresh(vec![true]),
        };
        let a = f.realize_node(&root, 0, Some(&t), &mut rng).unwrap();
        let within: NodeSet = [b0.clone()].into_iter().collect();
        assert_eq!(f.component_type(&a, &within).unwrap(), t);
        f.check_invariants().unwrap();
    }

    #[test]
    fn realize_pure_set_child_in_p2() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut f = Fragment::new(p2());
        let t = ComponentType { theory: "pure_set".into(), params: vec![], kind: TypeKind::Fresh(vec![]) };
        let a = f.realize_node(&GammaNode::root(), 0, Some(&t), &mut rng).unwrap();
        assert_eq!(a.projection(), vec![0]);
        assert!(f.component(&component_key(&a).unwrap()).unwrap().relations().is_empty());
    }

    #[test]
    fn realize_one_child_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut f = Fragment::new(p2());
        let err = f.realize_node(&GammaNode::root(), 1, None, &mut rng).unwrap_err();
        assert!(matches!(err, FragmentError::OneChildPresent(_)));
        assert!(matches!(
            f.realize_node(&GammaNode::root(), 7, None, &mut rng),
            Err(FragmentError::NotInPlan(_))
        ));
    }

    #[test]
    fn inconsistent_type_leaves_fragment_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut f = Fragment::new(p1());
        let before = f.clone();
        let t = ComponentType { theory: "random_graph".into(), params: vec![3], kind: TypeKind::Fresh(vec![true]) };
        assert!(f.realize_node(&GammaNode::root(), 0, Some(&t), &mut rng).is_err());
        assert_eq!(f, before);
    }

    #[test]
    fn grown_fragments_satisfy_invariants() {
        for seed in 0..20 {
            for plan in [p1(), p2(), crate::fixtures::p3()] {
                let f = Fragment::grow_random(plan, seed, 9);
                assert!(f.len() <= 9);
                f.check_invariants().unwrap();
                for (key, _, nodes) in f.relation_audit() {
                    assert!(nodes.iter().all(|n| key.contains(n)));
                }
            }
        }
    }

    #[test]
    fn restrict_keeps_only_closed_part() {
        let f = Fragment::grow_random(p2(), 4, 10);
        let some = f.nodes().iter().find(|n| n.len() == 2).cloned();
        if let Some(a) = some {
            let keep = f.tcl([&a]);
            let r = f.restrict(&keep).unwrap();
            assert_eq!(r.nodes(), &keep);
            r.check_invariants().unwrap();
        }
        let not_closed: NodeSet = [GammaNode::root()].into_iter().collect();
        assert!(matches!(f.restrict(&not_closed), Err(FragmentError::NotClosed)));
    }

    #[test]
    fn materialize_creates_named_nodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut f = Fragment::new(p2());
        let target: GammaNode = serde_json::from_str("[[0,4],[0,2]]").unwrap();
        f.materialize(&target, &mut rng).unwrap();
        assert!(f.contains(&target));
        assert!(f.contains(&target.pred()));
        f.check_invariants().unwrap();
        let bad: GammaNode = serde_json::from_str(r#"[[1,3]]"#).unwrap();
        assert!(f.materialize(&bad, &mut rng).is_err());
    }
}

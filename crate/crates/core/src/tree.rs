//! Tree plans and the node algebra of the coordinatizing tree.
//!
//! A [`TreePlan`] is a finite prefix-closed set of index paths, each labeled
//! [`Lambda::One`] or [`Lambda::Infinity`]. Nodes of the expanded tree are
//! [`GammaNode`]s: sequences of `(index, tag)` steps whose index sequence is a
//! plan path. A step under an infinity-labeled path carries a component
//! element id, every other step carries [`Tag::Star`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::components::{self, ComponentTheory};

/// A path in the plan, i.e. a finite sequence of child indexes.
pub type PlanPath = Vec<u32>;

/// Element ids are allocated per component; they are only meaningful together
/// with the [`ComponentKey`] of the component they live in.
pub type ElemId = u32;

/// A finite set of nodes of the expanded tree.
pub type NodeSet = BTreeSet<GammaNode>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Lambda {
    #[serde(rename = "one")]
    One,
    #[serde(rename = "inf")]
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanNode {
    pub lambda: Lambda,
    pub component: Option<String>,
}

/// Problems found while validating a plan. Each one names the offending path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanViolation {
    MissingRoot,
    RootNotOne,
    DuplicatePath(PlanPath),
    NotPrefixClosed(PlanPath),
    MissingComponent(PlanPath),
    UnexpectedComponent(PlanPath),
    UnknownTheory(PlanPath, String),
}

impl fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanViolation::MissingRoot => write!(f, "missing root ⟨⟩"),
            PlanViolation::RootNotOne => write!(f, "root ⟨⟩ must be labeled one"),
            PlanViolation::DuplicatePath(p) => write!(f, "duplicate path {}", PathDisplay(p)),
            PlanViolation::NotPrefixClosed(p) => {
                write!(f, "not prefix-closed at {}", PathDisplay(p))
            }
            PlanViolation::MissingComponent(p) => {
                write!(f, "infinity node {} has no component theory", PathDisplay(p))
            }
            PlanViolation::UnexpectedComponent(p) => {
                write!(f, "one node {} must not carry a component theory", PathDisplay(p))
            }
            PlanViolation::UnknownTheory(p, id) => {
                write!(f, "unknown component theory {id:?} at {}", PathDisplay(p))
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("malformed plan file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid plan: {}", join_violations(.0))]
    Invalid(Vec<PlanViolation>),
}

fn join_violations(v: &[PlanViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Formats a plan path as `⟨0,1⟩`.
pub struct PathDisplay<'a>(pub &'a [u32]);

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "⟩")
    }
}

/// One entry of the plan file format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanEntry {
    pub path: PlanPath,
    pub lambda: Lambda,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub nodes: Vec<PlanEntry>,
}

/// Checks every tree-plan invariant and reports all violations found.
pub fn validate_plan(entries: &[PlanEntry]) -> Vec<PlanViolation> {
    let mut violations = Vec::new();
    let mut seen: BTreeMap<&PlanPath, &PlanEntry> = BTreeMap::new();
    for e in entries {
        if seen.insert(&e.path, e).is_some() {
            violations.push(PlanViolation::DuplicatePath(e.path.clone()));
        }
    }
    match seen.get(&PlanPath::new()) {
        None => violations.push(PlanViolation::MissingRoot),
        Some(root) if root.lambda != Lambda::One => violations.push(PlanViolation::RootNotOne),
        Some(_) => {}
    }
    for (path, e) in &seen {
        if !path.is_empty() && !seen.contains_key(&path[..path.len() - 1].to_vec()) {
            violations.push(PlanViolation::NotPrefixClosed((*path).clone()));
        }
        match (e.lambda, &e.component) {
            (Lambda::Infinity, None) => {
                violations.push(PlanViolation::MissingComponent((*path).clone()))
            }
            (Lambda::One, Some(_)) => {
                violations.push(PlanViolation::UnexpectedComponent((*path).clone()))
            }
            (Lambda::Infinity, Some(id)) if components::theory(id).is_none() => {
                violations.push(PlanViolation::UnknownTheory((*path).clone(), id.clone()))
            }
            _ => {}
        }
    }
    violations
}

/// A validated tree plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePlan {
    nodes: BTreeMap<PlanPath, PlanNode>,
}

impl TreePlan {
    pub fn new(entries: Vec<PlanEntry>) -> Result<Self, PlanError> {
        let violations = validate_plan(&entries);
        if !violations.is_empty() {
            return Err(PlanError::Invalid(violations));
        }
        let nodes = entries
            .into_iter()
            .map(|e| (e.path, PlanNode { lambda: e.lambda, component: e.component }))
            .collect();
        Ok(TreePlan { nodes })
    }

    /// Convenience constructor: `(path, None)` is a one node, `(path, Some(theory))`
    /// an infinity node.
    pub fn from_entries(entries: &[(&[u32], Option<&str>)]) -> Result<Self, PlanError> {
        let entries = entries
            .iter()
            .map(|(p, c)| PlanEntry {
                path: p.to_vec(),
                lambda: if c.is_some() { Lambda::Infinity } else { Lambda::One },
                component: c.map(str::to_owned),
            })
            .collect();
        TreePlan::new(entries)
    }

    pub fn from_json(s: &str) -> Result<Self, PlanError> {
        let file: PlanFile = serde_json::from_str(s)?;
        TreePlan::new(file.nodes)
    }

    pub fn to_file(&self) -> PlanFile {
        PlanFile {
            nodes: self
                .nodes
                .iter()
                .map(|(p, n)| PlanEntry {
                    path: p.clone(),
                    lambda: n.lambda,
                    component: n.component.clone(),
                })
                .collect(),
        }
    }

    pub fn contains(&self, path: &[u32]) -> bool {
        self.nodes.contains_key(path)
    }

    pub fn lambda(&self, path: &[u32]) -> Option<Lambda> {
        self.nodes.get(path).map(|n| n.lambda)
    }

    pub fn is_infinity(&self, path: &[u32]) -> bool {
        self.lambda(path) == Some(Lambda::Infinity)
    }

    pub fn theory(&self, path: &[u32]) -> Option<&'static dyn ComponentTheory> {
        self.nodes.get(path)?.component.as_deref().and_then(components::theory)
    }

    pub fn paths(&self) -> impl Iterator<Item = &PlanPath> {
        self.nodes.keys()
    }

    /// I(Γ): the infinity-labeled paths.
    pub fn infinity_paths(&self) -> impl Iterator<Item = &PlanPath> {
        self.nodes.iter().filter(|(_, n)| n.lambda == Lambda::Infinity).map(|(p, _)| p)
    }

    /// Direct children of `path` as `(index, lambda)`, in index order.
    pub fn children(&self, path: &[u32]) -> Vec<(u32, Lambda)> {
        let depth = path.len() + 1;
        self.nodes
            .range(path.to_vec()..)
            .take_while(|(p, _)| p.starts_with(path))
            .filter(|(p, _)| p.len() == depth)
            .map(|(p, n)| (p[depth - 1], n.lambda))
            .collect()
    }

    /// Every plan path that extends `path` (including `path` itself).
    pub fn subtree(&self, path: &[u32]) -> Vec<PlanPath> {
        self.nodes
            .range(path.to_vec()..)
            .take_while(|(p, _)| p.starts_with(path))
            .map(|(p, _)| p.clone())
            .collect()
    }

    pub fn height(&self) -> usize {
        self.nodes.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Whether `node` is an element of Γ(S) for this plan: its projection is a
    /// plan path and every tag matches the label of its prefix.
    pub fn admits(&self, node: &GammaNode) -> bool {
        let mut path = PlanPath::with_capacity(node.len());
        for step in node.steps() {
            path.push(step.index);
            match (self.lambda(&path), step.tag) {
                (Some(Lambda::One), Tag::Star) | (Some(Lambda::Infinity), Tag::Elem(_)) => {}
                _ => return false,
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Star,
    Elem(ElemId),
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Tag::Star => s.serialize_str("*"),
            Tag::Elem(id) => s.serialize_u32(*id),
        }
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Id(ElemId),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Id(id) => Ok(Tag::Elem(id)),
            Raw::Text(s) if s == "*" => Ok(Tag::Star),
            Raw::Text(s) => Err(de::Error::custom(format!("invalid tag {s:?}, expected \"*\" or an element id"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub index: u32,
    pub tag: Tag,
}

impl Serialize for Step {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.index, self.tag).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Step {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (index, tag) = <(u32, Tag)>::deserialize(d)?;
        Ok(Step { index, tag })
    }
}

/// A node of Γ(S). The derived order is lexicographic, so every prefix sorts
/// before its extensions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GammaNode(Vec<Step>);

impl GammaNode {
    pub fn root() -> Self {
        GammaNode(Vec::new())
    }

    pub fn from_steps(steps: Vec<Step>) -> Self {
        GammaNode(steps)
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Height: the number of steps from the root.
    pub fn height(&self) -> usize {
        self.0.len()
    }

    /// π: the underlying plan path.
    pub fn projection(&self) -> PlanPath {
        self.0.iter().map(|s| s.index).collect()
    }

    /// The parent node; the root is its own predecessor.
    pub fn pred(&self) -> GammaNode {
        let mut steps = self.0.clone();
        steps.pop();
        GammaNode(steps)
    }

    pub fn child(&self, index: u32, tag: Tag) -> GammaNode {
        let mut steps = self.0.clone();
        steps.push(Step { index, tag });
        GammaNode(steps)
    }

    pub fn last(&self) -> Option<Step> {
        self.0.last().copied()
    }

    /// The component element carried by the last step, if any.
    pub fn elem(&self) -> Option<ElemId> {
        match self.0.last()?.tag {
            Tag::Elem(id) => Some(id),
            Tag::Star => None,
        }
    }

    /// The tree order: `self ≤ other` iff `self` is a prefix of `other`.
    pub fn le(&self, other: &GammaNode) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn lt(&self, other: &GammaNode) -> bool {
        self.len() < other.len() && self.le(other)
    }

    /// The longest common prefix.
    pub fn meet(&self, other: &GammaNode) -> GammaNode {
        let n = self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count();
        GammaNode(self.0[..n].to_vec())
    }

    /// All nodes `≤ self`, from the root up to `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = GammaNode> + '_ {
        (0..=self.0.len()).map(move |k| GammaNode(self.0[..k].to_vec()))
    }

    /// Replaces the tag at depth `depth` (0-based step position).
    pub(crate) fn with_tag_at(&self, depth: usize, tag: Tag) -> GammaNode {
        let mut steps = self.0.clone();
        steps[depth].tag = tag;
        GammaNode(steps)
    }
}

impl fmt::Display for GammaNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match s.tag {
                Tag::Star => write!(f, "({},⋆)", s.index)?,
                Tag::Elem(id) => write!(f, "({},{})", s.index, id)?,
            }
        }
        write!(f, "⟩")
    }
}

/// Identifies a component M(a) by `(pred(a), last index of π(a))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComponentKey {
    pub parent: GammaNode,
    pub index: u32,
}

impl ComponentKey {
    pub fn projection(&self) -> PlanPath {
        let mut p = self.parent.projection();
        p.push(self.index);
        p
    }

    pub fn contains(&self, node: &GammaNode) -> bool {
        node.len() == self.parent.len() + 1
            && self.parent.le(node)
            && node.steps()[self.parent.len()].index == self.index
    }

    pub fn node(&self, id: ElemId) -> GammaNode {
        self.parent.child(self.index, Tag::Elem(id))
    }
}

/// The key `(pred(a), π(a))` of the component containing `a`; `None` for the root.
pub fn component_key(a: &GammaNode) -> Option<ComponentKey> {
    let last = a.last()?;
    Some(ComponentKey { parent: a.pred(), index: last.index })
}

pub fn meet(a: &GammaNode, b: &GammaNode) -> GammaNode {
    a.meet(b)
}

/// ↓B
pub fn downset<'a>(nodes: impl IntoIterator<Item = &'a GammaNode>) -> NodeSet {
    let mut out = NodeSet::new();
    for n in nodes {
        out.extend(n.prefixes());
    }
    out
}

/// Tree-closure: the root and the downset of `nodes`, closed under adding the
/// unique one-labeled children. Iterated to a fixed point.
pub fn tcl<'a>(plan: &TreePlan, nodes: impl IntoIterator<Item = &'a GammaNode>) -> NodeSet {
    let mut out = downset(nodes);
    out.insert(GammaNode::root());
    let mut work: Vec<GammaNode> = out.iter().cloned().collect();
    while let Some(node) = work.pop() {
        for (index, lambda) in plan.children(&node.projection()) {
            if lambda == Lambda::One {
                let child = node.child(index, Tag::Star);
                if out.insert(child.clone()) {
                    work.push(child);
                }
            }
        }
    }
    out
}

pub fn is_closed(plan: &TreePlan, nodes: &NodeSet) -> bool {
    tcl(plan, nodes) == *nodes
}

/// `[a ∧ B]`: the largest element of tcl(B) below or equal to `a`.
pub fn meet_closure(plan: &TreePlan, a: &GammaNode, b: &NodeSet) -> GammaNode {
    meet_closure_in(a, &tcl(plan, b))
}

/// As [`meet_closure`], with `closed` already tree-closed.
pub fn meet_closure_in(a: &GammaNode, closed: &NodeSet) -> GammaNode {
    (0..=a.len())
        .rev()
        .map(|k| GammaNode(a.steps()[..k].to_vec()))
        .find(|p| closed.contains(p))
        .unwrap_or_default()
}

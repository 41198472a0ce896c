//! Component theories glued at infinity nodes.
//!
//! Every theory here is a free-amalgamation class: ℵ0-categorical, with
//! quantifier elimination, trivial algebraic closure and a single 1-type over
//! the empty set. That makes the 1-types over a finite parameter list easy to
//! describe: either `x = c` for a parameter `c`, or a fresh element together
//! with a truth value for every atom mixing `x` with parameters (a "slot").
//!
//! The measure on a component is the uniform pattern measure: each of the
//! `2^k` fresh patterns over `k` slots gets `2^-k`, algebraic types get
//! `(0, 1)`.

mod graph;
mod hypergraph;
mod pure_set;
mod tournament;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use graph::RandomGraph;
pub use hypergraph::RandomHypergraph3;
pub use pure_set::PureSet;
pub use tournament::RandomTournament;

use crate::measure::DimMeas;
use crate::tree::ElemId;

/// Theory ids accepted in plan files.
pub const THEORY_IDS: [&str; 4] = ["pure_set", "random_graph", "random_tournament", "random_3hypergraph"];

static PURE_SET: PureSet = PureSet;
static RANDOM_GRAPH: RandomGraph = RandomGraph;
static RANDOM_TOURNAMENT: RandomTournament = RandomTournament;
static RANDOM_3HYPERGRAPH: RandomHypergraph3 = RandomHypergraph3;

pub fn theory(id: &str) -> Option<&'static dyn ComponentTheory> {
    match id {
        "pure_set" => Some(&PURE_SET),
        "random_graph" => Some(&RANDOM_GRAPH),
        "random_tournament" => Some(&RANDOM_TOURNAMENT),
        "random_3hypergraph" => Some(&RANDOM_3HYPERGRAPH),
        _ => None,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComponentError {
    #[error("unknown component theory {0:?}")]
    UnknownTheory(String),
    #[error("inconsistent component type: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationKind {
    /// Irreflexive and invariant under permuting arguments; stored sorted.
    Symmetric,
    /// Binary, irreflexive, and exactly one of `R(a,b)`, `R(b,a)` for `a ≠ b`.
    Oriented,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelationSymbol {
    pub name: &'static str,
    pub arity: usize,
    pub kind: RelationKind,
}

/// An argument position of a slot atom: the new variable or a parameter index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Arg {
    X,
    Param(usize),
}

/// An atom `R(args)` mentioning the new variable at least once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub relation: usize,
    pub args: Vec<Arg>,
}

/// The relational data of one finite component.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentState {
    elements: BTreeSet<ElemId>,
    next_id: ElemId,
    relations: BTreeMap<String, BTreeSet<Vec<ElemId>>>,
}

impl ComponentState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(
        elements: BTreeSet<ElemId>,
        next_id: ElemId,
        relations: BTreeMap<String, BTreeSet<Vec<ElemId>>>,
    ) -> Self {
        ComponentState { elements, next_id, relations }
    }

    pub fn elements(&self) -> &BTreeSet<ElemId> {
        &self.elements
    }

    pub fn next_id(&self) -> ElemId {
        self.next_id
    }

    pub fn relations(&self) -> &BTreeMap<String, BTreeSet<Vec<ElemId>>> {
        &self.relations
    }

    pub fn contains(&self, id: ElemId) -> bool {
        self.elements.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Registers a new element with the next unused id.
    pub fn add_fresh(&mut self) -> ElemId {
        let id = self.next_id;
        self.add_with_id(id);
        id
    }

    /// Registers an element with a caller-chosen id.
    pub fn add_with_id(&mut self, id: ElemId) {
        self.elements.insert(id);
        self.next_id = self.next_id.max(id + 1);
    }

    pub fn holds(&self, rel: &RelationSymbol, args: &[ElemId]) -> bool {
        if args.len() != rel.arity {
            return false;
        }
        let Some(tuples) = self.relations.get(rel.name) else {
            return false;
        };
        match rel.kind {
            RelationKind::Symmetric => {
                let mut t = args.to_vec();
                t.sort_unstable();
                tuples.contains(&t)
            }
            RelationKind::Oriented => tuples.contains(args),
        }
    }

    /// Records the truth value of `R(args)`; for oriented relations a false
    /// value records the reverse arc.
    pub fn set(&mut self, rel: &RelationSymbol, args: &[ElemId], value: bool) {
        let tuples = self.relations.entry(rel.name.to_owned()).or_default();
        match rel.kind {
            RelationKind::Symmetric => {
                let mut t = args.to_vec();
                t.sort_unstable();
                if value {
                    tuples.insert(t);
                } else {
                    tuples.remove(&t);
                }
            }
            RelationKind::Oriented => {
                let rev = vec![args[1], args[0]];
                if value {
                    tuples.remove(&rev);
                    tuples.insert(args.to_vec());
                } else {
                    tuples.remove(args);
                    tuples.insert(rev);
                }
            }
        }
        if tuples.is_empty() {
            self.relations.remove(rel.name);
        }
    }

    /// The substructure on `keep`, with the id counter preserved.
    pub fn restrict(&self, keep: &BTreeSet<ElemId>) -> ComponentState {
        let elements: BTreeSet<ElemId> = self.elements.intersection(keep).copied().collect();
        let relations = self
            .relations
            .iter()
            .map(|(name, ts)| {
                let kept: BTreeSet<Vec<ElemId>> =
                    ts.iter().filter(|t| t.iter().all(|x| elements.contains(x))).cloned().collect();
                (name.clone(), kept)
            })
            .filter(|(_, ts)| !ts.is_empty())
            .collect();
        ComponentState { elements, next_id: self.next_id, relations }
    }

    /// Applies an id relabeling (identity off the map's domain).
    pub fn relabel(&self, rel_kinds: &[RelationSymbol], map: &BTreeMap<ElemId, ElemId>) -> ComponentState {
        let f = |x: ElemId| *map.get(&x).unwrap_or(&x);
        let elements = self.elements.iter().map(|&x| f(x)).collect();
        let mut relations = BTreeMap::new();
        for (name, ts) in &self.relations {
            let kind = rel_kinds.iter().find(|r| r.name == name).map(|r| r.kind);
            let moved: BTreeSet<Vec<ElemId>> = ts
                .iter()
                .map(|t| {
                    let mut m: Vec<ElemId> = t.iter().map(|&x| f(x)).collect();
                    if kind == Some(RelationKind::Symmetric) {
                        m.sort_unstable();
                    }
                    m
                })
                .collect();
            relations.insert(name.clone(), moved);
        }
        let next_id = self.elements.iter().map(|&x| f(x) + 1).max().unwrap_or(0).max(self.next_id);
        ComponentState { elements, next_id, relations }
    }
}

/// What a 1-type says about the new element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TypeKind {
    /// `x = c`.
    Equal(ElemId),
    /// A new element; entry `i` is the truth value of slot `i` over the parameters.
    Fresh(Vec<bool>),
}

/// A complete quantifier-free 1-type over an ordered list of parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComponentType {
    pub theory: String,
    pub params: Vec<ElemId>,
    pub kind: TypeKind,
}

impl ComponentType {
    pub fn is_algebraic(&self) -> bool {
        matches!(self.kind, TypeKind::Equal(_))
    }

    pub fn pattern(&self) -> Option<&[bool]> {
        match &self.kind {
            TypeKind::Fresh(p) => Some(p),
            TypeKind::Equal(_) => None,
        }
    }
}

/// The contract of a component theory. Implementors only describe their
/// signature and slot layout; everything else is derived generically.
pub trait ComponentTheory: fmt::Debug + Send + Sync {
    fn id(&self) -> &'static str;

    fn signature(&self) -> &'static [RelationSymbol];

    /// The atoms mixing `x` with `n` parameters whose truth values make up a
    /// fresh 1-type, in a fixed order.
    fn slots(&self, n: usize) -> Vec<Slot>;

    fn relation(&self, name: &str) -> Option<&'static RelationSymbol> {
        self.signature().iter().find(|r| r.name == name)
    }

    /// All 1-types over `params`: the algebraic ones first, then every fresh
    /// pattern in binary counting order.
    fn enumerate_1types(&self, params: &[ElemId]) -> Vec<ComponentType> {
        let k = self.slots(params.len()).len();
        let mut out: Vec<ComponentType> = params
            .iter()
            .map(|&c| ComponentType {
                theory: self.id().to_owned(),
                params: params.to_vec(),
                kind: TypeKind::Equal(c),
            })
            .collect();
        for bits in 0u64..(1u64 << k) {
            let pattern = (0..k).map(|i| bits >> i & 1 == 1).collect();
            out.push(ComponentType {
                theory: self.id().to_owned(),
                params: params.to_vec(),
                kind: TypeKind::Fresh(pattern),
            });
        }
        out
    }

    /// (0, 1) for `x = c`; (1, 2^-k) for a fresh pattern over `k` slots.
    fn dim_meas(&self, t: &ComponentType) -> DimMeas {
        match &t.kind {
            TypeKind::Equal(_) => DimMeas::point(),
            TypeKind::Fresh(p) => {
                let denom = BigInt::one() << p.len();
                DimMeas::new(1, BigRational::new(BigInt::one(), denom))
            }
        }
    }

    /// Reads off the quantifier-free type of `x` over `params` in `state`.
    fn type_of(&self, state: &ComponentState, x: ElemId, params: &[ElemId]) -> ComponentType {
        let kind = match params.iter().find(|&&c| c == x) {
            Some(&c) => TypeKind::Equal(c),
            None => TypeKind::Fresh(
                self.slots(params.len())
                    .iter()
                    .map(|s| {
                        let rel = &self.signature()[s.relation];
                        state.holds(rel, &instantiate(&s.args, x, params))
                    })
                    .collect(),
            ),
        };
        ComponentType { theory: self.id().to_owned(), params: params.to_vec(), kind }
    }

    /// Checks that `t` is a fresh type of this theory over elements of `state`.
    fn check_realizable(&self, state: &ComponentState, t: &ComponentType) -> Result<(), ComponentError> {
        if t.theory != self.id() {
            return Err(ComponentError::Inconsistent(format!(
                "type of theory {} used in a {} component",
                t.theory,
                self.id()
            )));
        }
        let distinct: BTreeSet<_> = t.params.iter().collect();
        if distinct.len() != t.params.len() {
            return Err(ComponentError::Inconsistent("repeated parameter".into()));
        }
        if let Some(c) = t.params.iter().find(|c| !state.contains(**c)) {
            return Err(ComponentError::Inconsistent(format!("parameter {c} is not in the component")));
        }
        match &t.kind {
            TypeKind::Equal(c) => Err(ComponentError::Inconsistent(format!(
                "x = {c} is algebraic and cannot be realized by a new element"
            ))),
            TypeKind::Fresh(p) if p.len() != self.slots(t.params.len()).len() => {
                Err(ComponentError::Inconsistent(format!(
                    "pattern has {} entries, expected {}",
                    p.len(),
                    self.slots(t.params.len()).len()
                )))
            }
            TypeKind::Fresh(_) => Ok(()),
        }
    }

    /// Adds a new element realizing `t`. Atoms involving existing
    /// non-parameter elements are decided by fair coin flips from `rng`.
    fn realize(
        &self,
        state: &mut ComponentState,
        t: &ComponentType,
        rng: &mut dyn rand::RngCore,
    ) -> Result<ElemId, ComponentError> {
        self.check_realizable(state, t)?;
        let pattern = t.pattern().expect("checked fresh");
        let others: Vec<ElemId> = state.elements().iter().copied().collect();
        let mut prescribed: BTreeMap<(usize, Vec<Option<ElemId>>), bool> = BTreeMap::new();
        for (slot, &v) in self.slots(t.params.len()).iter().zip(pattern) {
            prescribed.insert(atom_key(self, slot, &t.params), v);
        }
        let x = state.add_fresh();
        for slot in self.slots(others.len()) {
            let key = atom_key(self, &slot, &others);
            let value = match prescribed.get(&key) {
                Some(&v) => v,
                None => rng.gen_bool(0.5),
            };
            let rel = &self.signature()[slot.relation];
            state.set(rel, &instantiate(&slot.args, x, &others), value);
        }
        Ok(x)
    }

    /// Adds a new element whose every atom is a fair coin flip.
    fn realize_random(&self, state: &mut ComponentState, rng: &mut dyn rand::RngCore) -> ElemId {
        let others: Vec<ElemId> = state.elements().iter().copied().collect();
        let x = state.add_fresh();
        for slot in self.slots(others.len()) {
            let rel = &self.signature()[slot.relation];
            let v = rng.gen_bool(0.5);
            state.set(rel, &instantiate(&slot.args, x, &others), v);
        }
        x
    }

    /// Whether `tuple ↦ other` (fixing `over`) is a partial isomorphism, i.e.
    /// both tuples have the same quantifier-free type over `over`.
    fn same_qf_type(&self, state: &ComponentState, over: &[ElemId], tuple: &[ElemId], other: &[ElemId]) -> bool {
        if tuple.len() != other.len() {
            return false;
        }
        let dom: Vec<ElemId> = over.iter().chain(tuple).copied().collect();
        let img: Vec<ElemId> = over.iter().chain(other).copied().collect();
        for i in 0..dom.len() {
            for j in 0..dom.len() {
                if (dom[i] == dom[j]) != (img[i] == img[j]) {
                    return false;
                }
            }
        }
        for rel in self.signature() {
            let mut idx = vec![0usize; rel.arity];
            loop {
                let a: Vec<ElemId> = idx.iter().map(|&i| dom[i]).collect();
                let b: Vec<ElemId> = idx.iter().map(|&i| img[i]).collect();
                if state.holds(rel, &a) != state.holds(rel, &b) {
                    return false;
                }
                if !advance(&mut idx, dom.len()) {
                    break;
                }
            }
        }
        true
    }

    /// The number of tuples in `state` with the same quantifier-free type over
    /// `over` as `tuple`.
    fn orbit_count(&self, state: &ComponentState, tuple: &[ElemId], over: &[ElemId]) -> usize {
        let elems: Vec<ElemId> = state.elements().iter().copied().collect();
        if tuple.is_empty() {
            return 1;
        }
        let mut idx = vec![0usize; tuple.len()];
        let mut count = 0;
        loop {
            let cand: Vec<ElemId> = idx.iter().map(|&i| elems[i]).collect();
            if self.same_qf_type(state, over, tuple, &cand) {
                count += 1;
            }
            if !advance(&mut idx, elems.len()) {
                break;
            }
        }
        count
    }

    /// Whether the element map is a bijection of the component onto itself
    /// preserving every relation.
    fn is_automorphism(&self, state: &ComponentState, map: &BTreeMap<ElemId, ElemId>) -> bool {
        let f = |x: ElemId| *map.get(&x).unwrap_or(&x);
        let image: BTreeSet<ElemId> = state.elements().iter().map(|&x| f(x)).collect();
        if image != *state.elements() || map.keys().any(|k| !state.contains(*k)) {
            return false;
        }
        state.relabel(self.signature(), map) == *state
    }
}

/// Substitutes `x` and the parameters into slot arguments.
pub fn instantiate(args: &[Arg], x: ElemId, params: &[ElemId]) -> Vec<ElemId> {
    args.iter()
        .map(|a| match a {
            Arg::X => x,
            Arg::Param(i) => params[*i],
        })
        .collect()
}

fn atom_key(th: &(impl ComponentTheory + ?Sized), slot: &Slot, params: &[ElemId]) -> (usize, Vec<Option<ElemId>>) {
    let mut key: Vec<Option<ElemId>> = slot
        .args
        .iter()
        .map(|a| match a {
            Arg::X => None,
            Arg::Param(i) => Some(params[*i]),
        })
        .collect();
    if th.signature()[slot.relation].kind == RelationKind::Symmetric {
        key.sort_unstable();
    }
    (slot.relation, key)
}

/// Odometer increment over `0..base`; false once it wraps around.
fn advance(idx: &mut [usize], base: usize) -> bool {
    if base == 0 {
        return false;
    }
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

//! The measuring function h = (dim, meas).
//!
//! For a single node `a` over a closed `B`, h walks the branch from
//! `[a∧B]` up to `a`: every infinity step contributes its component measure
//! over the parameters already present in that component, one-labeled steps
//! contribute nothing. Tuples fold this along the coordinates, closing the
//! parameter set after each one. A definable set is a finite union of
//! complete types, measured by the maximal dimension and the sum of the
//! measures attaining it.

mod formula;

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use formula::{DefinableSet, Formula, SetBody, Term};

use crate::fragment::{Fragment, FragmentError, TypeDescriptor};
use crate::tree::{component_key, GammaNode, Lambda, NodeSet};

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error(transparent)]
    Fragment(#[from] FragmentError),
    #[error("formula is not quantifier-free: {0}")]
    NotQuantifierFree(String),
    #[error("malformed formula: {0}")]
    BadFormula(String),
    #[error("variable x{index} is out of range for arity {arity}")]
    VarOutOfRange { index: usize, arity: usize },
    #[error("parameter p{index} is out of range ({count} parameters)")]
    ParamOutOfRange { index: usize, count: usize },
    #[error("types disagree on arity or base set")]
    MixedTypes,
    #[error("type index {0} is out of range")]
    TypeOutOfRange(usize),
    #[error("map is not surjective onto the target set")]
    NotSurjective,
    #[error("malformed definable set: {0}")]
    Parse(#[from] serde_json::Error),
}

/// A value of h: a dimension and an exact non-negative measure.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DimMeas {
    pub dim: u32,
    pub meas: BigRational,
}

impl DimMeas {
    pub fn new(dim: u32, meas: BigRational) -> Self {
        DimMeas { dim, meas }
    }

    /// h of a single point.
    pub fn point() -> Self {
        DimMeas { dim: 0, meas: BigRational::one() }
    }

    /// h of the empty set.
    pub fn empty() -> Self {
        DimMeas { dim: 0, meas: BigRational::zero() }
    }

    /// A finite set of the given size.
    pub fn finite(count: usize) -> Self {
        DimMeas { dim: 0, meas: BigRational::from_integer(BigInt::from(count)) }
    }

    pub fn is_empty(&self) -> bool {
        self.meas.is_zero()
    }

    /// `p/q` in lowest terms, with `q` always written.
    pub fn meas_string(&self) -> String {
        format!("{}/{}", self.meas.numer(), self.meas.denom())
    }
}

/// Lascar composition: dimensions add, measures multiply.
impl Mul for &DimMeas {
    type Output = DimMeas;

    fn mul(self, rhs: &DimMeas) -> DimMeas {
        DimMeas { dim: self.dim + rhs.dim, meas: &self.meas * &rhs.meas }
    }
}

impl Mul for DimMeas {
    type Output = DimMeas;

    fn mul(self, rhs: DimMeas) -> DimMeas {
        &self * &rhs
    }
}

impl fmt::Debug for DimMeas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for DimMeas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.dim, self.meas_string())
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.trim().parse().ok()?;
    let q: BigInt = q.trim().parse().ok()?;
    (!q.is_zero()).then(|| BigRational::new(p, q))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDimMeas {
    dim: u32,
    meas: String,
}

impl Serialize for DimMeas {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawDimMeas { dim: self.dim, meas: self.meas_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DimMeas {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawDimMeas::deserialize(d)?;
        let meas = parse_rational(&raw.meas).ok_or_else(|| de::Error::custom(format!("bad fraction {:?}", raw.meas)))?;
        Ok(DimMeas { dim: raw.dim, meas })
    }
}

fn check_base(frag: &Fragment, base: &NodeSet) -> Result<(), FragmentError> {
    if !frag.is_closed(base) {
        return Err(FragmentError::NotClosed);
    }
    match base.iter().find(|n| !frag.contains(n)) {
        Some(n) => Err(FragmentError::MissingNode(n.to_string())),
        None => Ok(()),
    }
}

/// h(a/B) for a single node and a closed `B`.
pub fn dim_meas_1type(frag: &Fragment, a: &GammaNode, base: &NodeSet) -> Result<DimMeas, MeasureError> {
    check_base(frag, base)?;
    if !frag.contains(a) {
        return Err(FragmentError::MissingNode(a.to_string()).into());
    }
    if base.contains(a) {
        return Ok(DimMeas::point());
    }
    let chain: Vec<GammaNode> = a.prefixes().collect();
    let start = chain.iter().rposition(|e| base.contains(e)).expect("the root is in every closed set");
    let mut w = base.clone();
    let mut h = DimMeas::point();
    for i in start + 1..chain.len() {
        let e = &chain[i];
        w = frag.tcl(w.iter().chain(std::iter::once(&chain[i - 1])));
        if frag.plan().lambda(&e.projection()) == Some(Lambda::One) {
            continue;
        }
        let key = component_key(e).expect("non-root");
        let th = frag.theory_of(&key).expect("validated plan");
        let t = frag.component_type(e, &w).expect("registered element");
        h = h * th.dim_meas(&t);
    }
    Ok(h)
}

/// h(ā/B): the Lascar fold over the coordinates, closing the parameters after
/// each step.
pub fn dim_meas_tuple(frag: &Fragment, tuple: &[GammaNode], base: &NodeSet) -> Result<DimMeas, MeasureError> {
    check_base(frag, base)?;
    let mut w = base.clone();
    let mut h = DimMeas::point();
    for a in tuple {
        h = h * dim_meas_1type(frag, a, &w)?;
        w = frag.tcl(w.iter().chain(std::iter::once(a)));
    }
    Ok(h)
}

/// h(ā/C) for an arbitrary parameter set, evaluated over `tcl(C)`.
pub fn dim_meas_over(frag: &Fragment, tuple: &[GammaNode], params: &[GammaNode]) -> Result<DimMeas, MeasureError> {
    let base = frag.tcl(params);
    dim_meas_tuple(frag, tuple, &base)
}

/// h of a complete type, computed on a realization inside the base.
pub fn dim_meas_type(frag: &Fragment, desc: &TypeDescriptor) -> Result<DimMeas, MeasureError> {
    let mut rng = rand::rngs::mock::StepRng::new(0, 1);
    let restricted = frag.restrict(&desc.base)?;
    let (g, tuple) = restricted.realize_descriptor(desc, &mut rng)?;
    dim_meas_tuple(&g, &tuple, &desc.base)
}

/// Max dimension; measures summed over the types attaining it. The empty
/// union is (0, 0).
pub fn combine_types<'a>(values: impl IntoIterator<Item = &'a DimMeas>) -> DimMeas {
    let mut acc: Option<DimMeas> = None;
    for v in values {
        acc = Some(match acc {
            None => v.clone(),
            Some(a) if v.dim > a.dim => v.clone(),
            Some(a) if v.dim == a.dim => DimMeas { dim: a.dim, meas: a.meas + &v.meas },
            Some(a) => a,
        });
    }
    acc.unwrap_or_else(DimMeas::empty)
}

/// h of a finite union of complete types sharing base set and arity.
pub fn dim_meas_types(frag: &Fragment, types: &[TypeDescriptor]) -> Result<DimMeas, MeasureError> {
    if let Some(first) = types.first() {
        if types.iter().any(|t| t.arity() != first.arity() || t.base != first.base) {
            return Err(MeasureError::MixedTypes);
        }
    }
    let values = types.iter().map(|t| dim_meas_type(frag, t)).collect::<Result<Vec<_>, _>>()?;
    Ok(combine_types(&values))
}

/// h of a definable set: decompose, then combine.
pub fn dim_meas_definable(frag: &Fragment, set: &DefinableSet) -> Result<DimMeas, MeasureError> {
    let parts = set.decompose(frag)?;
    let values = parts
        .iter()
        .map(|r| dim_meas_tuple(&r.fragment, &r.tuple, &r.descriptor.base))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(combine_types(&values))
}

//! Quantifier-free formulas over the tree signature and the component
//! relations, and definable sets built from them.
//!
//! Formulas are written as JSON s-expressions:
//!
//! ```text
//! term    := ["var", i] | ["param", i] | ["pred", term] | ["meet", term, term]
//!          | "x<i>" | "p<i>"
//! formula := true | false
//!          | ["eq", term, term] | ["le", term, term] | ["P", [path], term]
//!          | ["rel", name, term, ...]
//!          | ["and", formula, ...] | ["or", formula, ...] | ["not", formula]
//! ```

use serde_json::{json, Value};

use super::MeasureError;
use crate::fragment::{min_budget, Fragment, FragmentError, Realization};
use crate::tree::{component_key, GammaNode, PlanPath};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(usize),
    Param(usize),
    Pred(Box<Term>),
    Meet(Box<Term>, Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Le(Term, Term),
    P(PlanPath, Term),
    Rel(String, Vec<Term>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
}

fn bad(msg: impl Into<String>) -> MeasureError {
    MeasureError::BadFormula(msg.into())
}

fn index_of(v: &Value) -> Result<usize, MeasureError> {
    v.as_u64().map(|i| i as usize).ok_or_else(|| bad(format!("expected an index, got {v}")))
}

impl Term {
    pub fn from_value(v: &Value) -> Result<Term, MeasureError> {
        if let Some(s) = v.as_str() {
            let (kind, rest) = s.split_at(s.len().min(1));
            let i: usize = rest.parse().map_err(|_| bad(format!("unknown term {s:?}")))?;
            return match kind {
                "x" => Ok(Term::Var(i)),
                "p" => Ok(Term::Param(i)),
                _ => Err(bad(format!("unknown term {s:?}"))),
            };
        }
        let items = v.as_array().ok_or_else(|| bad(format!("expected a term, got {v}")))?;
        let head = items.first().and_then(Value::as_str).ok_or_else(|| bad(format!("term without head: {v}")))?;
        let args = &items[1..];
        match (head, args) {
            ("var", [i]) => Ok(Term::Var(index_of(i)?)),
            ("param", [i]) => Ok(Term::Param(index_of(i)?)),
            ("pred", [t]) => Ok(Term::Pred(Box::new(Term::from_value(t)?))),
            ("meet", [s, t]) => Ok(Term::Meet(Box::new(Term::from_value(s)?), Box::new(Term::from_value(t)?))),
            _ => Err(bad(format!("malformed term {v}"))),
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            Term::Var(i) => json!(["var", i]),
            Term::Param(i) => json!(["param", i]),
            Term::Pred(t) => json!(["pred", t.to_value()]),
            Term::Meet(s, t) => json!(["meet", s.to_value(), t.to_value()]),
        }
    }

    fn validate(&self, arity: usize, params: usize) -> Result<(), MeasureError> {
        match self {
            Term::Var(i) if *i >= arity => Err(MeasureError::VarOutOfRange { index: *i, arity }),
            Term::Param(i) if *i >= params => Err(MeasureError::ParamOutOfRange { index: *i, count: params }),
            Term::Var(_) | Term::Param(_) => Ok(()),
            Term::Pred(t) => t.validate(arity, params),
            Term::Meet(s, t) => {
                s.validate(arity, params)?;
                t.validate(arity, params)
            }
        }
    }

    pub fn eval(&self, vars: &[GammaNode], params: &[GammaNode]) -> GammaNode {
        match self {
            Term::Var(i) => vars[*i].clone(),
            Term::Param(i) => params[*i].clone(),
            Term::Pred(t) => t.eval(vars, params).pred(),
            Term::Meet(s, t) => s.eval(vars, params).meet(&t.eval(vars, params)),
        }
    }
}

impl Formula {
    pub fn from_value(v: &Value) -> Result<Formula, MeasureError> {
        if let Some(b) = v.as_bool() {
            return Ok(if b { Formula::True } else { Formula::False });
        }
        let items = v.as_array().ok_or_else(|| bad(format!("expected a formula, got {v}")))?;
        let head = items.first().and_then(Value::as_str).ok_or_else(|| bad(format!("formula without head: {v}")))?;
        let args = &items[1..];
        let formulas = |xs: &[Value]| xs.iter().map(Formula::from_value).collect::<Result<Vec<_>, _>>();
        match (head, args) {
            ("eq", [s, t]) => Ok(Formula::Eq(Term::from_value(s)?, Term::from_value(t)?)),
            ("le", [s, t]) => Ok(Formula::Le(Term::from_value(s)?, Term::from_value(t)?)),
            ("P", [path, t]) => {
                let path = serde_json::from_value(path.clone()).map_err(|e| bad(format!("bad path: {e}")))?;
                Ok(Formula::P(path, Term::from_value(t)?))
            }
            ("rel", [name, ts @ ..]) => {
                let name = name.as_str().ok_or_else(|| bad("relation name must be a string"))?;
                let ts = ts.iter().map(Term::from_value).collect::<Result<Vec<_>, _>>()?;
                Ok(Formula::Rel(name.to_owned(), ts))
            }
            ("and", xs) => Ok(Formula::And(formulas(xs)?)),
            ("or", xs) => Ok(Formula::Or(formulas(xs)?)),
            ("not", [f]) => Ok(Formula::Not(Box::new(Formula::from_value(f)?))),
            ("exists" | "forall", _) => Err(MeasureError::NotQuantifierFree(head.to_owned())),
            _ => Err(bad(format!("malformed formula {v}"))),
        }
    }

    pub fn to_value(&self) -> Value {
        let many = |h: &str, fs: &[Formula]| {
            let mut v = vec![json!(h)];
            v.extend(fs.iter().map(Formula::to_value));
            Value::Array(v)
        };
        match self {
            Formula::True => json!(true),
            Formula::False => json!(false),
            Formula::Eq(s, t) => json!(["eq", s.to_value(), t.to_value()]),
            Formula::Le(s, t) => json!(["le", s.to_value(), t.to_value()]),
            Formula::P(p, t) => json!(["P", p, t.to_value()]),
            Formula::Rel(name, ts) => {
                let mut v = vec![json!("rel"), json!(name)];
                v.extend(ts.iter().map(Term::to_value));
                Value::Array(v)
            }
            Formula::And(fs) => many("and", fs),
            Formula::Or(fs) => many("or", fs),
            Formula::Not(f) => json!(["not", f.to_value()]),
        }
    }

    pub fn validate(&self, arity: usize, params: usize) -> Result<(), MeasureError> {
        match self {
            Formula::True | Formula::False => Ok(()),
            Formula::Eq(s, t) | Formula::Le(s, t) => {
                s.validate(arity, params)?;
                t.validate(arity, params)
            }
            Formula::P(_, t) => t.validate(arity, params),
            Formula::Rel(_, ts) => ts.iter().try_for_each(|t| t.validate(arity, params)),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().try_for_each(|f| f.validate(arity, params)),
            Formula::Not(f) => f.validate(arity, params),
        }
    }

    /// Truth in `frag`. A relation atom holds only if all its arguments are
    /// siblings in one component whose theory has that relation.
    pub fn eval(&self, frag: &Fragment, vars: &[GammaNode], params: &[GammaNode]) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Eq(s, t) => s.eval(vars, params) == t.eval(vars, params),
            Formula::Le(s, t) => s.eval(vars, params).le(&t.eval(vars, params)),
            Formula::P(p, t) => t.eval(vars, params).projection() == *p,
            Formula::Rel(name, ts) => {
                let nodes: Vec<GammaNode> = ts.iter().map(|t| t.eval(vars, params)).collect();
                let Some(key) = nodes.first().and_then(component_key) else { return false };
                let (Some(th), Some(st)) = (frag.theory_of(&key), frag.component(&key)) else { return false };
                let Some(rel) = th.relation(name) else { return false };
                if rel.arity != nodes.len() || !nodes.iter().all(|n| key.contains(n)) {
                    return false;
                }
                let ids: Option<Vec<_>> = nodes.iter().map(GammaNode::elem).collect();
                ids.is_some_and(|ids| st.holds(rel, &ids))
            }
            Formula::And(fs) => fs.iter().all(|f| f.eval(frag, vars, params)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(frag, vars, params)),
            Formula::Not(f) => !f.eval(frag, vars, params),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetBody {
    Formula(Formula),
    /// Indices into the enumeration order of the complete types over `tcl(params)`.
    Types(Vec<usize>),
}

/// A subset of `M^arity` defined with parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefinableSet {
    pub params: Vec<GammaNode>,
    pub arity: usize,
    pub body: SetBody,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSet {
    #[serde(default)]
    params: Vec<GammaNode>,
    arity: usize,
    formula: Option<Value>,
    types: Option<Vec<usize>>,
}

impl DefinableSet {
    pub fn formula(params: Vec<GammaNode>, arity: usize, formula: Formula) -> Self {
        DefinableSet { params, arity, body: SetBody::Formula(formula) }
    }

    pub fn from_json(s: &str) -> Result<Self, MeasureError> {
        let raw: RawSet = serde_json::from_str(s)?;
        let body = match (raw.formula, raw.types) {
            (Some(f), None) => SetBody::Formula(Formula::from_value(&f)?),
            (None, Some(t)) => SetBody::Types(t),
            _ => return Err(bad("exactly one of \"formula\" and \"types\" is required")),
        };
        let set = DefinableSet { params: raw.params, arity: raw.arity, body };
        if let SetBody::Formula(f) = &set.body {
            f.validate(set.arity, set.params.len())?;
        }
        Ok(set)
    }

    pub fn to_value(&self) -> Value {
        let mut v = json!({ "params": self.params, "arity": self.arity });
        match &self.body {
            SetBody::Formula(f) => v["formula"] = f.to_value(),
            SetBody::Types(t) => v["types"] = json!(t),
        }
        v
    }

    /// The complete types over `tcl(params)` making up the set, each with a witness.
    pub fn decompose(&self, frag: &Fragment) -> Result<Vec<Realization>, MeasureError> {
        if let Some(p) = self.params.iter().find(|p| !frag.contains(p)) {
            return Err(FragmentError::MissingNode(p.to_string()).into());
        }
        let base = frag.tcl(&self.params);
        let all = frag.enumerate_realizations(self.arity, &base, min_budget(frag.plan(), self.arity))?;
        match &self.body {
            SetBody::Formula(f) => {
                f.validate(self.arity, self.params.len())?;
                Ok(all.into_iter().filter(|r| f.eval(&r.fragment, &r.tuple, &self.params)).collect())
            }
            SetBody::Types(idx) => {
                idx.iter().map(|&i| all.get(i).cloned().ok_or(MeasureError::TypeOutOfRange(i))).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::fixtures::p1;
    use crate::measure::{dim_meas_definable, DimMeas};

    fn parse(s: &str) -> Result<Formula, MeasureError> {
        Formula::from_value(&serde_json::from_str(s).unwrap())
    }

    fn with_b0() -> (Fragment, GammaNode) {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut f = Fragment::new(p1());
        let b0 = f.realize_random_child(&GammaNode::root(), 0, &mut rng);
        (f, b0)
    }

    #[test]
    fn formulas_round_trip() {
        let src = r#"["and",["rel","E",["var",0],["param",0]],["not",["eq",["var",0],["pred",["var",0]]]],["P",[0],["meet",["var",0],["param",0]]],true]"#;
        let f = parse(src).unwrap();
        assert_eq!(Formula::from_value(&f.to_value()).unwrap(), f);
        assert_eq!(parse(r#"["eq","x0","p1"]"#).unwrap(), Formula::Eq(Term::Var(0), Term::Param(1)));
    }

    #[test]
    fn quantifiers_and_garbage_are_rejected() {
        assert!(matches!(parse(r#"["exists",0,true]"#), Err(MeasureError::NotQuantifierFree(_))));
        assert!(matches!(parse(r#"["eq","x0"]"#), Err(MeasureError::BadFormula(_))));
        assert!(matches!(parse(r#"["frob"]"#), Err(MeasureError::BadFormula(_))));
        assert!(matches!(parse("3"), Err(MeasureError::BadFormula(_))));
    }

    #[test]
    fn out_of_range_indices() {
        let f = parse(r#"["eq","x1","p0"]"#).unwrap();
        assert!(matches!(f.validate(1, 1), Err(MeasureError::VarOutOfRange { index: 1, arity: 1 })));
        let g = parse(r#"["eq","x0","p2"]"#).unwrap();
        assert!(matches!(g.validate(1, 1), Err(MeasureError::ParamOutOfRange { index: 2, count: 1 })));
    }

    #[test]
    fn trivial_and_empty_formulas() {
        let f = Fragment::new(p1());
        let all = DefinableSet::formula(vec![], 1, Formula::True);
        assert_eq!(all.decompose(&f).unwrap().len(), 2);
        let none = DefinableSet::formula(vec![], 1, Formula::False);
        assert!(none.decompose(&f).unwrap().is_empty());
        assert_eq!(dim_meas_definable(&f, &none).unwrap(), DimMeas::empty());
    }

    #[test]
    fn neighbours_of_b0() {
        let (f, b0) = with_b0();
        let set = DefinableSet::formula(vec![b0], 1, parse(r#"["rel","E","x0","p0"]"#).unwrap());
        assert_eq!(set.decompose(&f).unwrap().len(), 1);
        let h = dim_meas_definable(&f, &set).unwrap();
        assert_eq!(h, DimMeas::new(1, BigRational::new(1.into(), 2.into())));
    }

    #[test]
    fn sets_from_json() {
        let (f, b0) = with_b0();
        let s = format!(r#"{{"params":[{}],"arity":1,"types":[0,1]}}"#, serde_json::to_string(&b0).unwrap());
        let set = DefinableSet::from_json(&s).unwrap();
        assert_eq!(set.decompose(&f).unwrap().len(), 2);
        assert_eq!(DefinableSet::from_json(&set.to_value().to_string()).unwrap(), set);
        let s = r#"{"arity":1,"types":[9]}"#;
        assert!(matches!(DefinableSet::from_json(s).unwrap().decompose(&f), Err(MeasureError::TypeOutOfRange(9))));
        assert!(DefinableSet::from_json(r#"{"arity":1}"#).is_err());
        assert!(DefinableSet::from_json(r#"{"arity":1,"formula":true,"junk":0}"#).is_err());
    }
}

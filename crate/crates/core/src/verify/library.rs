//! A stock of quantifier-free formulas generated from a plan's shape, used
//! by the definable-set suites.

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

use crate::components::RelationKind;
use crate::fragment::Fragment;
use crate::measure::{Formula, Term};
use crate::tree::{GammaNode, PlanPath, TreePlan};

#[derive(Clone, Debug)]
pub struct LibraryEntry {
    pub name: String,
    pub formula: Formula,
    pub arity: usize,
    /// Required plan path of each parameter; `None` accepts any node.
    pub param_paths: Vec<Option<PlanPath>>,
    /// Definable maps out of the set: coordinate projections and dcl-maps.
    pub maps: Vec<Vec<Term>>,
}

impl LibraryEntry {
    fn new(name: String, formula: serde_json::Value, arity: usize, params: Vec<Option<PlanPath>>, maps: &[&[Term]]) -> Self {
        LibraryEntry {
            name,
            formula: Formula::from_value(&formula).expect("library formulas are well-formed"),
            arity,
            param_paths: params,
            maps: maps.iter().map(|m| m.to_vec()).collect(),
        }
    }

    /// Picks parameters from `frag` matching the required paths.
    pub fn pick_params(&self, frag: &Fragment, rng: &mut impl Rng) -> Option<Vec<GammaNode>> {
        self.param_paths
            .iter()
            .map(|p| {
                let fits: Vec<&GammaNode> =
                    frag.nodes().iter().filter(|n| p.as_ref().is_none_or(|p| n.projection() == *p)).collect();
                fits.choose(rng).map(|n| (*n).clone())
            })
            .collect()
    }
}

fn x(i: usize) -> Term {
    Term::Var(i)
}

fn pred(t: Term) -> Term {
    Term::Pred(Box::new(t))
}

pub fn formula_library(plan: &TreePlan) -> Vec<LibraryEntry> {
    let mut out = vec![
        LibraryEntry::new("all".into(), json!(true), 1, vec![], &[&[x(0)], &[pred(x(0))]]),
        LibraryEntry::new("chain".into(), json!(["le", "x0", "x1"]), 2, vec![], &[&[x(0)], &[x(1)], &[x(1), x(0)]]),
        LibraryEntry::new("parent".into(), json!(["eq", ["pred", "x0"], "x1"]), 2, vec![], &[&[x(0)], &[x(1)]]),
        LibraryEntry::new("below".into(), json!(["le", "x0", "p0"]), 1, vec![None], &[&[x(0)]]),
        LibraryEntry::new("cone".into(), json!(["le", "p0", "x0"]), 1, vec![None], &[&[x(0)], &[pred(x(0))]]),
        LibraryEntry::new(
            "pair_below".into(),
            json!(["and", ["le", "x0", "p0"], ["le", "x1", "p0"]]),
            2,
            vec![None],
            &[&[x(0)], &[x(1)]],
        ),
        LibraryEntry::new(
            "sibling".into(),
            json!(["and", ["eq", ["pred", "x0"], ["pred", "p0"]], ["not", ["eq", "x0", "p0"]]]),
            1,
            vec![None],
            &[&[x(0)]],
        ),
    ];
    for path in plan.infinity_paths() {
        let th = plan.theory(path).expect("validated plan");
        let tag = path.iter().map(u32::to_string).collect::<Vec<_>>().join(".");
        out.push(LibraryEntry::new(
            format!("siblings@{tag}"),
            json!(["and", ["P", path, "x0"], ["P", path, "x1"], ["eq", ["pred", "x0"], ["pred", "x1"]], ["not", ["eq", "x0", "x1"]]]),
            2,
            vec![],
            &[&[x(0)], &[x(1)]],
        ));
        for rel in th.signature() {
            match rel.arity {
                2 => {
                    out.push(LibraryEntry::new(
                        format!("{}-pairs@{tag}", rel.name),
                        json!(["and", ["P", path, "x0"], ["P", path, "x1"], ["rel", rel.name, "x0", "x1"]]),
                        2,
                        vec![],
                        &[&[x(0)], &[x(1)], &[x(1), x(0)]],
                    ));
                    out.push(LibraryEntry::new(
                        format!("{}-nbrs@{tag}", rel.name),
                        json!(["rel", rel.name, "x0", "p0"]),
                        1,
                        vec![Some(path.clone())],
                        &[&[x(0)]],
                    ));
                    if rel.kind == RelationKind::Oriented {
                        out.push(LibraryEntry::new(
                            format!("{}-in@{tag}", rel.name),
                            json!(["rel", rel.name, "p0", "x0"]),
                            1,
                            vec![Some(path.clone())],
                            &[&[x(0)]],
                        ));
                    }
                }
                3 => {
                    out.push(LibraryEntry::new(
                        format!("{}-link@{tag}", rel.name),
                        json!(["rel", rel.name, "x0", "p0", "p1"]),
                        1,
                        vec![Some(path.clone()), Some(path.clone())],
                        &[&[x(0)]],
                    ));
                    out.push(LibraryEntry::new(
                        format!("{}-pairs@{tag}", rel.name),
                        json!(["rel", rel.name, "x0", "x1", "p0"]),
                        2,
                        vec![Some(path.clone())],
                        &[&[x(0)], &[x(1)]],
                    ));
                }
                _ => {}
            }
        }
    }
    out
}

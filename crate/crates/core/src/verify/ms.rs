//! The MS axioms: finitely many values that depend only on the parameter
//! type (MS1, MS3), counting on finite sets (MS2), and Fubini for definable
//! maps (MS4).

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::library::formula_library;
use super::{all_tuples, show_nodes, CheckReport};
use crate::fragment::{Fragment, TypeDescriptor};
use crate::measure::{combine_types, dim_meas_definable, dim_meas_tuple, DefinableSet, DimMeas, Formula, MeasureError, SetBody, Term};
use crate::tree::GammaNode;

/// For φ(x̄; ȳ): the values h(φ(M, b̄)) over all parameter types b̄ over ∅
/// form a finite set no larger than the number of types, and tuples of the
/// fragment with equal type give equal values.
pub fn check_ms1_ms3(
    frag: &Fragment,
    formula: &Formula,
    arity: usize,
    nparams: usize,
    budget: usize,
) -> Result<CheckReport, MeasureError> {
    let mut report = CheckReport::new("ms1_ms3", 0);
    let base = frag.tcl(std::iter::empty());
    let param_types = frag.enumerate_realizations(nparams, &base, budget)?;
    let mut values: BTreeMap<TypeDescriptor, DimMeas> = BTreeMap::new();
    for r in &param_types {
        let set = DefinableSet::formula(r.tuple.clone(), arity, formula.clone());
        values.insert(r.descriptor.clone(), dim_meas_definable(&r.fragment, &set)?);
    }
    let distinct: BTreeSet<String> = values.values().map(ToString::to_string).collect();
    report.expect(
        distinct.len() <= param_types.len(),
        || format!("{} parameter types", param_types.len()),
        "at most one value per type",
        || format!("{} values", distinct.len()),
    );
    let nodes: Vec<GammaNode> = frag.nodes().iter().cloned().collect();
    let mut tuples = all_tuples(&nodes, nparams);
    tuples.truncate(48);
    for b in tuples {
        let d = frag.type_descriptor(&b, &base)?;
        let set = DefinableSet::formula(b.clone(), arity, formula.clone());
        let h = dim_meas_definable(frag, &set)?;
        report.expect_eq(|| format!("params={} type={d}", show_nodes(&b)), &values.get(&d).cloned(), &Some(h));
    }
    Ok(report)
}

/// Every set from the formula library whose decomposition has only algebraic
/// types gets (0, |X|), with |X| counted by brute force over the fragment.
pub fn check_ms2(frag: &Fragment, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("ms2", seed);
    let nodes: Vec<GammaNode> = frag.nodes().iter().cloned().collect();
    for entry in formula_library(frag.plan()) {
        for _ in 0..3 {
            let Some(params) = entry.pick_params(frag, &mut rng) else { continue };
            let set = DefinableSet::formula(params.clone(), entry.arity, entry.formula.clone());
            let inst = || format!("seed={seed} set={} params={}", entry.name, show_nodes(&params));
            let Ok(parts) = set.decompose(frag) else {
                report.fail(inst(), "a decomposition", "error");
                continue;
            };
            if parts.is_empty() || !parts.iter().all(|r| r.descriptor.is_algebraic()) {
                continue;
            }
            let count = all_tuples(&nodes, entry.arity)
                .iter()
                .filter(|t| entry.formula.eval(frag, t, &params))
                .count();
            let h = dim_meas_definable(frag, &set).ok();
            report.expect_eq(inst, &Some(DimMeas::finite(count)), &h);
        }
    }
    report
}

/// The data of one Fubini check for a map f: X → Y.
#[derive(Clone, Debug)]
pub struct FubiniOutcome {
    /// h(X), computed directly.
    pub x: DimMeas,
    /// Per image type p: (h(p), fiber value over p, h(f⁻¹[p]) from the X types).
    pub per_type: Vec<(DimMeas, DimMeas, DimMeas)>,
    /// Per fiber value class Y(d, μ): (fiber value, h(Y(d, μ)), h(f⁻¹[Y(d, μ)])).
    pub classes: Vec<(DimMeas, DimMeas, DimMeas)>,
    /// Image types on which the fiber value was not constant.
    pub inconsistent: Vec<String>,
}

/// A fiber value with the image types and preimage types that share it.
type FiberClass = (DimMeas, Vec<DimMeas>, Vec<DimMeas>);

/// Computes both sides of Fubini for `map` (a list of terms in the set's
/// variables and parameters) on the definable set `set`.
pub fn fubini(frag: &Fragment, set: &DefinableSet, map: &[Term]) -> Result<FubiniOutcome, MeasureError> {
    let SetBody::Formula(phi) = &set.body else {
        return Err(MeasureError::BadFormula("Fubini needs a formula body".into()));
    };
    let k = set.params.len();
    let parts = set.decompose(frag)?;
    let mut by_type: BTreeMap<TypeDescriptor, (DimMeas, DimMeas, Vec<DimMeas>)> = BTreeMap::new();
    let mut inconsistent = Vec::new();
    for r in &parts {
        let base = &r.descriptor.base;
        let b: Vec<GammaNode> = map.iter().map(|t| t.eval(&r.tuple, &set.params)).collect();
        let ydesc = r.fragment.type_descriptor(&b, base)?;
        let mut conj = vec![phi.clone()];
        conj.extend(map.iter().enumerate().map(|(j, t)| Formula::Eq(t.clone(), Term::Param(k + j))));
        let mut fiber_params = set.params.clone();
        fiber_params.extend(b.iter().cloned());
        let fiber_set = DefinableSet::formula(fiber_params, set.arity, Formula::And(conj));
        let fiber = dim_meas_definable(&r.fragment, &fiber_set)?;
        let hx = dim_meas_tuple(&r.fragment, &r.tuple, base)?;
        match by_type.get_mut(&ydesc) {
            Some((_, f, xs)) => {
                if *f != fiber {
                    inconsistent.push(format!("{ydesc}: {f} vs {fiber}"));
                }
                xs.push(hx);
            }
            None => {
                let hy = dim_meas_tuple(&r.fragment, &b, base)?;
                by_type.insert(ydesc, (hy, fiber, vec![hx]));
            }
        }
    }
    let per_type: Vec<(DimMeas, DimMeas, DimMeas)> =
        by_type.values().map(|(hy, f, xs)| (hy.clone(), f.clone(), combine_types(xs))).collect();
    let mut class_map: BTreeMap<(u32, String), FiberClass> = BTreeMap::new();
    for (hy, f, xs) in by_type.values() {
        let e = class_map.entry((f.dim, f.meas_string())).or_insert_with(|| (f.clone(), Vec::new(), Vec::new()));
        e.1.push(hy.clone());
        e.2.extend(xs.iter().cloned());
    }
    let classes = class_map.into_values().map(|(f, ys, xs)| (f, combine_types(&ys), combine_types(&xs))).collect();
    Ok(FubiniOutcome { x: dim_meas_definable(frag, set)?, per_type, classes, inconsistent })
}

/// Checks the Fubini identities for `map` on `set`: fiber values are
/// constant on image types, h(f⁻¹[p]) = h(p) ⊗ fiber for each image type and
/// each fiber class, and h(X) is the combination over the classes. If a
/// `target` set is given, every one of its types must be hit.
pub fn check_ms4_fubini(
    frag: &Fragment,
    set: &DefinableSet,
    map: &[Term],
    target: Option<&DefinableSet>,
) -> Result<CheckReport, MeasureError> {
    let mut report = CheckReport::new("ms4", 0);
    if let Some(t) = target {
        let parts = set.decompose(frag)?;
        let image: BTreeSet<TypeDescriptor> = parts
            .iter()
            .map(|r| {
                let b: Vec<GammaNode> = map.iter().map(|m| m.eval(&r.tuple, &set.params)).collect();
                r.fragment.type_descriptor(&b, &r.descriptor.base)
            })
            .collect::<Result<_, _>>()?;
        if t.decompose(frag)?.iter().any(|r| !image.contains(&r.descriptor)) {
            return Err(MeasureError::NotSurjective);
        }
    }
    let out = fubini(frag, set, map)?;
    report.expect(out.inconsistent.is_empty(), || "fiber classes".into(), "constant on image types", || {
        out.inconsistent.join("; ")
    });
    for (hy, f, pre) in &out.per_type {
        report.expect_eq(|| format!("image type with h = {hy}"), &(hy * f), pre);
    }
    for (f, hy, pre) in &out.classes {
        report.expect_eq(|| format!("fiber class {f}"), &(hy * f), pre);
    }
    let total = combine_types(out.classes.iter().map(|c| &c.2));
    report.expect_eq(|| "whole set".into(), &out.x, &total);
    Ok(report)
}

/// Fubini over every library set and map; each (set, map) pair is one instance.
pub fn check_ms4_library(frag: &Fragment, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("ms4", seed);
    for entry in formula_library(frag.plan()) {
        let Some(params) = entry.pick_params(frag, &mut rng) else { continue };
        let set = DefinableSet::formula(params.clone(), entry.arity, entry.formula.clone());
        for map in &entry.maps {
            report.instances += 1;
            let inst = || format!("seed={seed} set={} params={} map={map:?}", entry.name, show_nodes(&params));
            match check_ms4_fubini(frag, &set, map, None) {
                Ok(r) => {
                    for f in r.failures {
                        report.fail(format!("{} {}", inst(), f.instance), f.expected, f.actual);
                    }
                }
                Err(e) => report.fail(inst(), "a Fubini report", e),
            }
        }
    }
    report
}

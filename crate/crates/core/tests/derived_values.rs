//! Worked values computed by hand or by brute force in this file, compared
//! with what the engine returns.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nic_measure::components::{theory, ComponentState, ComponentType, TypeKind};
use nic_measure::fixtures::{p1, p2};
use nic_measure::fragment::{component_automorphisms, extend_embedding, Correspondence, Fragment, GeneratorAutomorphism};
use nic_measure::measure::{dim_meas_definable, dim_meas_tuple, DefinableSet, DimMeas, Formula, Term};
use nic_measure::tree::{meet, meet_closure, tcl, ComponentKey, GammaNode, NodeSet, Step, Tag};
use nic_measure::verify::{check_cms4, fubini};

fn node(steps: &[(u32, Option<u32>)]) -> GammaNode {
    GammaNode::from_steps(
        steps
            .iter()
            .map(|&(index, id)| Step { index, tag: id.map_or(Tag::Star, Tag::Elem) })
            .collect(),
    )
}

fn set(nodes: &[GammaNode]) -> NodeSet {
    nodes.iter().cloned().collect()
}

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

fn h(dim: u32, p: i64, d: i64) -> DimMeas {
    DimMeas::new(dim, q(p, d))
}

fn graph_type(params: Vec<u32>, pattern: Vec<bool>) -> ComponentType {
    ComponentType { theory: "random_graph".into(), params, kind: TypeKind::Fresh(pattern) }
}

fn f(v: serde_json::Value) -> Formula {
    Formula::from_value(&v).unwrap()
}

/// P1 with b0 and one further vertex per entry, adjacent to b0 as given.
fn p1_with(b0_adjacency: &[bool]) -> (Fragment, GammaNode, Vec<GammaNode>) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut frag = Fragment::new(p1());
    let root = GammaNode::root();
    let b0 = frag.realize_node(&root, 0, Some(&graph_type(vec![], vec![])), &mut rng).unwrap();
    let id = b0.elem().unwrap();
    let others = b0_adjacency
        .iter()
        .map(|&adj| frag.realize_node(&root, 0, Some(&graph_type(vec![id], vec![adj])), &mut rng).unwrap())
        .collect();
    (frag, b0, others)
}

#[test]
fn meets_and_closures_by_hand() {
    let a = node(&[(0, Some(3)), (0, Some(5))]);
    let b = node(&[(0, Some(3)), (0, Some(6))]);
    assert_eq!(meet(&a, &b), node(&[(0, Some(3))]));

    assert_eq!(tcl(&p2(), std::iter::empty()), set(&[GammaNode::root(), node(&[(1, None)])]));
    let s = node(&[(0, Some(0))]);
    assert_eq!(tcl(&p1(), [&s]), set(&[GammaNode::root(), s.clone()]));

    let t = node(&[(0, Some(1))]);
    assert_eq!(meet_closure(&p1(), &t, &set(std::slice::from_ref(&s))), GammaNode::root());
    let deep = node(&[(0, Some(0)), (0, Some(2))]);
    assert_eq!(meet_closure(&p2(), &deep, &set(std::slice::from_ref(&s))), s);
    assert_eq!(p2().height(), 2);
}

#[test]
fn component_type_counts_and_values() {
    let pure = theory("pure_set").unwrap();
    let graph = theory("random_graph").unwrap();
    // Over two parameters a pure set has x = c0, x = c1 and one fresh type.
    let types = pure.enumerate_1types(&[0, 1]);
    assert_eq!(types.len(), 3);
    assert_eq!(types.iter().filter(|t| t.is_algebraic()).count(), 2);
    // Over one vertex a graph has x = c0, x ~ c0 and x !~ c0.
    assert_eq!(graph.enumerate_1types(&[0]).len(), 3);

    for n in 0..4u32 {
        let params: Vec<u32> = (0..n).collect();
        for t in pure.enumerate_1types(&params).iter().filter(|t| !t.is_algebraic()) {
            assert_eq!(pure.dim_meas(t), h(1, 1, 1));
        }
        for t in graph.enumerate_1types(&params).iter().filter(|t| !t.is_algebraic()) {
            assert_eq!(graph.dim_meas(t), h(1, 1, 1 << n));
        }
    }
}

#[test]
fn realize_fills_non_parameters_by_coin_and_respects_the_type() {
    let graph = theory("random_graph").unwrap();
    let e = graph.relation("E").unwrap();
    for seed in 0..8 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut st = ComponentState::new();
        let c0 = st.add_fresh();
        let _d = st.add_fresh();
        let x = graph.realize(&mut st, &graph_type(vec![c0], vec![true]), &mut rng).unwrap();
        assert!(st.holds(e, &[x, c0]));
        assert_eq!(st.len(), 3);
    }
}

#[test]
fn orbit_counts_by_hand() {
    let pure = theory("pure_set").unwrap();
    let mut st = ComponentState::new();
    let c = st.add_fresh();
    let outside: Vec<u32> = (0..4).map(|_| st.add_fresh()).collect();
    assert_eq!(pure.orbit_count(&st, &[outside[0]], &[c]), 4);

    // Vertices 1 and 2 are both adjacent to c; vertex 3 is not.
    let graph = theory("random_graph").unwrap();
    let e = graph.relation("E").unwrap();
    let mut st = ComponentState::new();
    let c = st.add_fresh();
    let v: Vec<u32> = (0..3).map(|_| st.add_fresh()).collect();
    st.set(e, &[v[0], c], true);
    st.set(e, &[v[1], c], true);
    assert_eq!(graph.orbit_count(&st, &[v[0]], &[c]), 2);
    assert_eq!(graph.orbit_count(&st, &[v[2]], &[c]), 1);
}

#[test]
fn empty_fragments_are_the_closure_of_nothing() {
    assert_eq!(Fragment::new(p1()).nodes(), &set(&[GammaNode::root()]));
    assert_eq!(Fragment::new(p2()).nodes(), &set(&[GammaNode::root(), node(&[(1, None)])]));
}

#[test]
fn descriptors_and_enumeration_on_p1() {
    let (frag, b0, v) = p1_with(&[true, true, false]);
    let base = frag.tcl([&b0]);
    let d = |x: &GammaNode| frag.type_descriptor(std::slice::from_ref(x), &base).unwrap();
    assert_eq!(d(&v[0]), d(&v[1]));
    assert_ne!(d(&v[0]), d(&v[2]));

    let empty = frag.tcl(std::iter::empty());
    assert_eq!(frag.enumerate_types(1, &empty, 2).unwrap().len(), 2);
    // Root, b0 itself, a neighbour of b0, a non-neighbour of b0.
    assert_eq!(frag.enumerate_types(1, &base, 2).unwrap().len(), 4);
}

#[test]
fn generators_on_pure_sets_and_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut frag = Fragment::new(p2());
    let root = GammaNode::root();
    let fresh = ComponentType { theory: "pure_set".into(), params: vec![], kind: TypeKind::Fresh(vec![]) };
    for _ in 0..3 {
        frag.realize_node(&root, 0, Some(&fresh), &mut rng).unwrap();
    }
    let key = ComponentKey { parent: root.clone(), index: 0 };
    assert_eq!(component_automorphisms(&frag, &key, 100).len(), 6);

    // v0 and v1 are adjacent to b0 only; v2 is isolated.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut frag = Fragment::new(p1());
    let b0 = frag.realize_node(&root, 0, Some(&graph_type(vec![], vec![])), &mut rng).unwrap();
    let mut ids = vec![b0.elem().unwrap()];
    let mut v = Vec::new();
    for pattern in [vec![true], vec![true, false], vec![false, false, false]] {
        let x = frag.realize_node(&root, 0, Some(&graph_type(ids.clone(), pattern)), &mut rng).unwrap();
        ids.push(x.elem().unwrap());
        v.push(x);
    }
    let key = ComponentKey { parent: GammaNode::root(), index: 0 };
    let swap = |x: &GammaNode, y: &GammaNode| GeneratorAutomorphism {
        key: key.clone(),
        perm: BTreeMap::from([(x.elem().unwrap(), y.elem().unwrap()), (y.elem().unwrap(), x.elem().unwrap())]),
    };
    assert!(frag.apply_generator(&swap(&v[0], &v[1])).is_ok());
    assert!(frag.apply_generator(&swap(&v[0], &v[2])).is_err());
    assert!(frag.apply_generator(&swap(&b0, &v[2])).is_err());
}

#[test]
fn embedding_transports_the_diagram() {
    // b0, b1 non-adjacent; b adjacent to b0 only.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut frag = Fragment::new(p1());
    let root = GammaNode::root();
    let b0 = frag.realize_node(&root, 0, Some(&graph_type(vec![], vec![])), &mut rng).unwrap();
    let i0 = b0.elem().unwrap();
    let b1 = frag.realize_node(&root, 0, Some(&graph_type(vec![i0], vec![false])), &mut rng).unwrap();
    let i1 = b1.elem().unwrap();
    let b = frag.realize_node(&root, 0, Some(&graph_type(vec![i0, i1], vec![true, false])), &mut rng).unwrap();

    let src = frag.clone();
    let mut dst = frag.clone();
    let mut map: Correspondence = [(root.clone(), root.clone()), (b0.clone(), b1.clone()), (b1.clone(), b0.clone())].into();
    let img = extend_embedding(&src, &mut dst, &mut map, &b, &mut rng).unwrap();
    let e = theory("random_graph").unwrap().relation("E").unwrap();
    let st = dst.component(&ComponentKey { parent: root, index: 0 }).unwrap();
    let j = img.elem().unwrap();
    assert!(st.holds(e, &[j, i1]));
    assert!(!st.holds(e, &[j, i0]));
    assert_ne!(img, b);
}

#[test]
fn values_of_h_by_hand() {
    // P2: both steps of a depth-two node are infinity steps of measure 1.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut frag = Fragment::new(p2());
    let a = node(&[(0, Some(0)), (0, Some(0))]);
    frag.materialize(&a, &mut rng).unwrap();
    let empty = frag.tcl(std::iter::empty());
    assert_eq!(dim_meas_tuple(&frag, &[a], &empty).unwrap(), h(2, 1, 1));

    // P1: fixed adjacency to two vertices of B is one of four patterns.
    let (frag, b0, v) = p1_with(&[true, false]);
    let base = frag.tcl([&b0, &v[0]]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut frag = frag;
    let ids = vec![b0.elem().unwrap(), v[0].elem().unwrap()];
    let y = frag.realize_node(&GammaNode::root(), 0, Some(&graph_type(ids, vec![true, true])), &mut rng).unwrap();
    assert_eq!(dim_meas_tuple(&frag, &[y], &base).unwrap(), h(1, 1, 4));

    // P1 pair over ∅: (1, 1) for the first, (1, 1/2) for the second over it.
    let (frag, b0, v) = p1_with(&[true]);
    let empty = frag.tcl(std::iter::empty());
    assert_eq!(dim_meas_tuple(&frag, &[b0, v[0].clone()], &empty).unwrap(), h(2, 1, 2));
}

#[test]
fn definable_sets_by_hand() {
    let (frag, b0, _) = p1_with(&[true, false]);
    let nbrs = DefinableSet::formula(vec![b0.clone()], 1, f(serde_json::json!(["rel", "E", "x0", "p0"])));
    assert_eq!(nbrs.decompose(&frag).unwrap().len(), 1);
    assert_eq!(dim_meas_definable(&frag, &nbrs).unwrap(), h(1, 1, 2));

    let everything = DefinableSet::formula(vec![], 1, Formula::True);
    assert_eq!(everything.decompose(&Fragment::new(p1())).unwrap().len(), 2);
}

#[test]
fn adjacency_values_per_parameter_type() {
    // Over ∅ in P1 a single parameter is either the root or a vertex.
    let phi = f(serde_json::json!(["rel", "E", "x0", "p0"]));
    let (frag, b0, v) = p1_with(&[true, false]);
    for p in [&b0, &v[0], &v[1]] {
        let s = DefinableSet::formula(vec![p.clone()], 1, phi.clone());
        assert_eq!(dim_meas_definable(&frag, &s).unwrap(), h(1, 1, 2));
    }
    let s = DefinableSet::formula(vec![GammaNode::root()], 1, phi);
    assert_eq!(dim_meas_definable(&frag, &s).unwrap(), DimMeas::empty());
}

#[test]
fn mixed_fibers_on_p2() {
    // X = {(x0, x1) : x0 ≤ x1}, f = second coordinate. Over ∅ the image types
    // are the root (fiber 1), ⟨(1,*)⟩ (fiber 2), a depth-one element (fiber 2)
    // and a depth-two element (fiber 3). Only the last has dimension 2.
    let frag = Fragment::new(p2());
    let chain = DefinableSet::formula(vec![], 2, f(serde_json::json!(["le", "x0", "x1"])));
    let out = fubini(&frag, &chain, &[Term::Var(1)]).unwrap();
    let mut fibers: Vec<(DimMeas, DimMeas)> = out.per_type.iter().map(|(y, fib, _)| (y.clone(), fib.clone())).collect();
    fibers.sort_by_key(|(y, fib)| (y.dim, fib.meas.clone()));
    assert_eq!(
        fibers,
        vec![
            (h(0, 1, 1), h(0, 1, 1)),
            (h(0, 1, 1), h(0, 2, 1)),
            (h(1, 1, 1), h(0, 2, 1)),
            (h(2, 1, 1), h(0, 3, 1)),
        ]
    );
    // Brute force: the depth-two class contributes three types of dimension 2.
    assert_eq!(out.x, h(2, 3, 1));
    assert_eq!(dim_meas_definable(&frag, &chain).unwrap(), h(2, 3, 1));
}

#[test]
fn extensions_split_the_measure() {
    // P1: the fresh 1-type over ∅ extends over tcl({c}) to x ~ c, x !~ c and x = c.
    let (frag, c, _) = p1_with(&[]);
    let b = frag.tcl(std::iter::empty());
    let cc = frag.tcl([&c]);
    let over_c = frag.enumerate_realizations(1, &cc, 2).unwrap();
    let mut values: Vec<DimMeas> = over_c
        .iter()
        .filter(|r| !r.tuple[0].is_root())
        .map(|r| dim_meas_tuple(&r.fragment, &r.tuple, &cc).unwrap())
        .collect();
    values.sort_by_key(|v| (v.dim, v.meas.clone()));
    assert_eq!(values, vec![h(0, 1, 1), h(1, 1, 2), h(1, 1, 2)]);
    let top: BigRational = values.iter().filter(|v| v.dim == 1).map(|v| v.meas.clone()).sum();
    let over_b = frag.enumerate_realizations(1, &b, 2).unwrap();
    let fresh = over_b.iter().find(|r| !r.tuple[0].is_root()).unwrap();
    assert_eq!(dim_meas_tuple(&fresh.fragment, &fresh.tuple, &b).unwrap(), DimMeas::new(1, top));
}

#[test]
fn pred_chains_satisfy_additivity() {
    let frag = Fragment::grow_random(p2(), 5, 10);
    let empty = frag.tcl(std::iter::empty());
    for a in frag.nodes() {
        let chain: Vec<GammaNode> = a.prefixes().collect();
        let cb = frag.tcl(chain.iter());
        let lhs = dim_meas_tuple(&frag, std::slice::from_ref(a), &empty).unwrap();
        let rhs = dim_meas_tuple(&frag, &chain, &empty).unwrap() * dim_meas_tuple(&frag, std::slice::from_ref(a), &cb).unwrap();
        assert_eq!(lhs, rhs);
    }
    assert!(check_cms4(&frag, 30, 5, 6).passed());
}

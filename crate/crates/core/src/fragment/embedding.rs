//! Partial isomorphisms between fragments and their one-step extensions.

use std::collections::{BTreeMap, BTreeSet};

use super::{Fragment, FragmentError};
use crate::components::{ComponentType, TypeKind};
use crate::tree::{component_key, ComponentKey, ElemId, GammaNode, Lambda, Tag};

/// A partial map of nodes, source to target.
pub type Correspondence = BTreeMap<GammaNode, GammaNode>;

/// Extends `f` to `b`, a node of `src` whose predecessor is already mapped.
/// The image is an unused sibling of the right component type if `dst` has
/// one; otherwise a new element is realized in `dst`. Returns the image.
pub fn extend_embedding(
    src: &Fragment,
    dst: &mut Fragment,
    f: &mut Correspondence,
    b: &GammaNode,
    rng: &mut dyn rand::RngCore,
) -> Result<GammaNode, FragmentError> {
    if let Some(img) = f.get(b) {
        return Ok(img.clone());
    }
    if !src.contains(b) {
        return Err(FragmentError::MissingNode(b.to_string()));
    }
    let key = component_key(b).ok_or_else(|| FragmentError::PredNotInDomain(b.to_string()))?;
    let parent_img = f.get(&key.parent).cloned().ok_or_else(|| FragmentError::PredNotInDomain(b.to_string()))?;
    let img = match src.plan.lambda(&key.projection()) {
        Some(Lambda::One) => {
            let c = parent_img.child(key.index, Tag::Star);
            if !dst.contains(&c) {
                return Err(FragmentError::MissingNode(c.to_string()));
            }
            c
        }
        _ => {
            let th = src.theory_of(&key).expect("validated plan");
            let st = src.component(&key).expect("registered element");
            let x = b.elem().expect("infinity node");
            let (params, images) = mapped_siblings(f, &key);
            let pattern = match th.type_of(st, x, &params).kind {
                TypeKind::Fresh(p) => p,
                TypeKind::Equal(_) => unreachable!("unmapped node equals a mapped one"),
            };
            let dkey = ComponentKey { parent: parent_img.clone(), index: key.index };
            let range: BTreeSet<&GammaNode> = f.values().collect();
            let existing = dst.component(&dkey).and_then(|dst_st| {
                dst_st.elements().iter().copied().find(|&c| {
                    !range.contains(&dkey.node(c))
                        && th.type_of(dst_st, c, &images).kind == TypeKind::Fresh(pattern.clone())
                })
            });
            match existing {
                Some(c) => dkey.node(c),
                None => {
                    let t = ComponentType { theory: th.id().to_owned(), params: images, kind: TypeKind::Fresh(pattern) };
                    dst.realize_node(&parent_img, key.index, Some(&t), rng)?
                }
            }
        }
    };
    f.insert(b.clone(), img.clone());
    Ok(img)
}

/// Mapped elements of component `key` (in source id order) and their images.
fn mapped_siblings(f: &Correspondence, key: &ComponentKey) -> (Vec<ElemId>, Vec<ElemId>) {
    let mut params = Vec::new();
    let mut images = Vec::new();
    for (s, t) in f {
        if key.contains(s) {
            params.push(s.elem().expect("infinity node"));
            images.push(t.elem().expect("images of infinity nodes are infinity nodes"));
        }
    }
    (params, images)
}

/// [`extend_embedding`] with the source and target being the same fragment.
pub fn extend_embedding_within(
    frag: &mut Fragment,
    f: &mut Correspondence,
    b: &GammaNode,
    rng: &mut dyn rand::RngCore,
) -> Result<GammaNode, FragmentError> {
    let src = frag.clone();
    extend_embedding(&src, frag, f, b, rng)
}

/// Alternates forth and back steps, always extending at the least unmapped
/// node, until every node of either fragment is matched. Both fragments may
/// grow. Returns the final isomorphism from `a` onto `b`.
pub fn back_and_forth(
    a: &mut Fragment,
    b: &mut Fragment,
    rng: &mut dyn rand::RngCore,
) -> Result<Correspondence, FragmentError> {
    let start = a.tcl(std::iter::empty());
    let mut f: Correspondence = start.iter().map(|n| (n.clone(), n.clone())).collect();
    let mut g: Correspondence = f.clone();
    loop {
        let mut progressed = false;
        if let Some(x) = a.nodes().iter().find(|n| !f.contains_key(*n)).cloned() {
            let y = extend_embedding(a, b, &mut f, &x, rng)?;
            g.insert(y, x);
            progressed = true;
        }
        if let Some(y) = b.nodes().iter().find(|n| !g.contains_key(*n)).cloned() {
            let x = extend_embedding(b, a, &mut g, &y, rng)?;
            f.insert(x, y);
            progressed = true;
        }
        if !progressed {
            return Ok(f);
        }
    }
}

/// Whether `f` is an isomorphism of `src` onto `dst`: a bijection on nodes
/// preserving predecessor, plan path and every component relation.
pub fn is_isomorphism(src: &Fragment, dst: &Fragment, f: &Correspondence) -> bool {
    if f.len() != src.len() || f.keys().any(|k| !src.contains(k)) {
        return false;
    }
    let image: BTreeSet<&GammaNode> = f.values().collect();
    if image.len() != f.len() || image.iter().any(|n| !dst.contains(n)) || image.len() != dst.len() {
        return false;
    }
    for (a, fa) in f {
        if a.projection() != fa.projection() || a.elem().is_some() != fa.elem().is_some() {
            return false;
        }
        if !a.is_root() && f.get(&a.pred()) != Some(&fa.pred()) {
            return false;
        }
    }
    if src.components().len() != dst.components().len() {
        return false;
    }
    for (key, st) in src.components() {
        let Some(&first) = st.elements().iter().next() else { continue };
        let Some(dkey) = component_key(&f[&key.node(first)]) else { return false };
        let Some(dst_st) = dst.component(&dkey) else { return false };
        let th = src.theory_of(key).expect("validated plan");
        let map: BTreeMap<ElemId, ElemId> =
            st.elements().iter().map(|&id| (id, f[&key.node(id)].elem().expect("infinity node"))).collect();
        let moved = st.relabel(th.signature(), &map);
        if moved.elements() != dst_st.elements() || moved.relations() != dst_st.relations() {
            return false;
        }
    }
    true
}

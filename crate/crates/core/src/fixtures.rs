//! Small reference plans used throughout the tests and the verification suites.

use std::sync::Arc;

use crate::tree::TreePlan;

/// `{⟨⟩}` alone.
pub fn minimal() -> Arc<TreePlan> {
    Arc::new(TreePlan::from_entries(&[(&[], None)]).expect("valid plan"))
}

/// `⟨⟩:1, ⟨0⟩:∞ (random graph)`.
pub fn p1() -> Arc<TreePlan> {
    Arc::new(TreePlan::from_entries(&[(&[], None), (&[0], Some("random_graph"))]).expect("valid plan"))
}

/// `⟨⟩:1, ⟨0⟩:∞ (pure set), ⟨0,0⟩:∞ (random graph), ⟨1⟩:1`.
pub fn p2() -> Arc<TreePlan> {
    Arc::new(
        TreePlan::from_entries(&[
            (&[], None),
            (&[0], Some("pure_set")),
            (&[0, 0], Some("random_graph")),
            (&[1], None),
        ])
        .expect("valid plan"),
    )
}

/// Height three, mixing all theories and a one node under an infinity node:
/// `⟨⟩:1, ⟨0⟩:∞ (tournament), ⟨0,0⟩:1, ⟨0,0,0⟩:∞ (3-hypergraph), ⟨1⟩:∞ (pure set)`.
pub fn p3() -> Arc<TreePlan> {
    Arc::new(
        TreePlan::from_entries(&[
            (&[], None),
            (&[0], Some("random_tournament")),
            (&[0, 0], None),
            (&[0, 0, 0], Some("random_3hypergraph")),
            (&[1], Some("pure_set")),
        ])
        .expect("valid plan"),
    )
}

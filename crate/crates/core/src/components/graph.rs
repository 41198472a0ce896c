use super::{Arg, ComponentTheory, RelationKind, RelationSymbol, Slot};

const EDGE: [RelationSymbol; 1] = [RelationSymbol { name: "E", arity: 2, kind: RelationKind::Symmetric }];

/// The countable random graph. Slot `i` is `E(x, c_i)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomGraph;

impl ComponentTheory for RandomGraph {
    fn id(&self) -> &'static str {
        "random_graph"
    }

    fn signature(&self) -> &'static [RelationSymbol] {
        &EDGE
    }

    fn slots(&self, n: usize) -> Vec<Slot> {
        (0..n).map(|i| Slot { relation: 0, args: vec![Arg::X, Arg::Param(i)] }).collect()
    }
}

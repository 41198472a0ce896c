use super::{Arg, ComponentTheory, RelationKind, RelationSymbol, Slot};

const HYPEREDGE: [RelationSymbol; 1] = [RelationSymbol { name: "H", arity: 3, kind: RelationKind::Symmetric }];

/// The random 3-uniform hypergraph. Slots are `H(x, c_i, c_j)` for `i < j`,
/// in lexicographic order of `(i, j)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomHypergraph3;

impl ComponentTheory for RandomHypergraph3 {
    fn id(&self) -> &'static str {
        "random_3hypergraph"
    }

    fn signature(&self) -> &'static [RelationSymbol] {
        &HYPEREDGE
    }

    fn slots(&self, n: usize) -> Vec<Slot> {
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                out.push(Slot { relation: 0, args: vec![Arg::X, Arg::Param(i), Arg::Param(j)] });
            }
        }
        out
    }
}

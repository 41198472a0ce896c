use super::{Arg, ComponentTheory, RelationKind, RelationSymbol, Slot};

const ARC: [RelationSymbol; 1] = [RelationSymbol { name: "T", arity: 2, kind: RelationKind::Oriented }];

/// The random tournament. Slot `i` is `T(x, c_i)`; false means `T(c_i, x)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomTournament;

impl ComponentTheory for RandomTournament {
    fn id(&self) -> &'static str {
        "random_tournament"
    }

    fn signature(&self) -> &'static [RelationSymbol] {
        &ARC
    }

    fn slots(&self, n: usize) -> Vec<Slot> {
        (0..n).map(|i| Slot { relation: 0, args: vec![Arg::X, Arg::Param(i)] }).collect()
    }
}

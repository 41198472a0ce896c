use super::{ComponentTheory, RelationSymbol, Slot};

/// The theory of an infinite set with no structure.
#[derive(Debug, Clone, Copy, Default)]
pub struct PureSet;

impl ComponentTheory for PureSet {
    fn id(&self) -> &'static str {
        "pure_set"
    }

    fn signature(&self) -> &'static [RelationSymbol] {
        &[]
    }

    fn slots(&self, _n: usize) -> Vec<Slot> {
        Vec::new()
    }
}

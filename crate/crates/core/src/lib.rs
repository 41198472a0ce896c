//! Finite fragments of nil-interaction coordinatized (NIC) structures built
//! over tree plans, the exact dimension/measure function `h = (dim, meas)` on
//! their definable sets, and oracle suites checking its axioms.

pub mod cli;
pub mod components;
pub mod fixtures;
pub mod fragment;
pub mod measure;
pub mod tree;
pub mod verify;

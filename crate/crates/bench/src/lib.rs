//! Fixtures shared by the benchmarks.

use lre_core::{QubitCount, StateDescriptor, StateKind, TrueState};

/// Exact-probability source for a GHZ state; the pipeline's cost does not
/// depend on the state.
pub fn ghz(n: u32) -> TrueState {
    let n = QubitCount::new(n).expect("qubit count");
    TrueState::prepare(StateDescriptor::new(StateKind::Ghz, n).expect("descriptor")).expect("state")
}

use super::{SpinState, DOWN, UP};
use crate::counting::{Outcome, OutcomeTree};
use crate::error::Result;

/// Spin measured once; inside the `up` branch only, a second spin is measured.
/// Leaves are `up,up`, `up,down` and `down`.
pub fn wallace_tree(first: SpinState, second: SpinState) -> Result<OutcomeTree> {
    let n2 = second.norm_sq();
    OutcomeTree::new(vec![
        Outcome::with_children(
            UP,
            first.weight_up(),
            vec![
                Outcome::leaf(UP, second.weight_up() / n2),
                Outcome::leaf(DOWN, second.weight_down() / n2),
            ],
        ),
        Outcome::leaf(DOWN, first.weight_down()),
    ])
}

/// The same first measurement without the extra branching.
pub fn wallace_tree_unbranched(first: SpinState) -> Result<OutcomeTree> {
    OutcomeTree::new(vec![Outcome::leaf(UP, first.weight_up()), Outcome::leaf(DOWN, first.weight_down())])
}

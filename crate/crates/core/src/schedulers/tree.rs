use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::blockdp::{mix, respond, BlockState};
use crate::error::{CascadeError, Result};
use crate::game::{Choice, GameParams, Mode, Rational};
use crate::graphs::Blockmodel;

use super::SchedulePolicy;

/// A block schedule written as a history tree: schedule a block, then
/// continue with the Y-branch or N-branch depending on the decision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyTree {
    Done,
    Then {
        block: usize,
        on_y: Box<PolicyTree>,
        on_n: Box<PolicyTree>,
    },
}

impl PolicyTree {
    pub fn branch(block: usize, on_y: PolicyTree, on_n: PolicyTree) -> Self {
        PolicyTree::Then {
            block,
            on_y: Box::new(on_y),
            on_n: Box::new(on_n),
        }
    }

    /// Fixed block sequence regardless of outcomes.
    pub fn seq(blocks: &[usize]) -> Self {
        match blocks.split_first() {
            None => PolicyTree::Done,
            Some((&b, rest)) => PolicyTree::branch(b, Self::seq(rest), Self::seq(rest)),
        }
    }

    /// Flattens the tree into a table keyed by block state.
    ///
    /// Fails when two histories reach the same state but prescribe different
    /// blocks, when a block is scheduled past its size, or when the tree stops
    /// before every node has decided.
    pub fn compile(&self, bm: &Blockmodel, initial: &BlockState) -> Result<SchedulePolicy> {
        let mut table = BTreeMap::new();
        self.walk(bm, initial, &mut table)?;
        Ok(SchedulePolicy::Adaptive { table })
    }

    /// Expected final Y-count per block when agents answer this tree from
    /// `state`. The tree may depend on the history, not only on the state.
    pub fn evaluate(
        &self,
        bm: &Blockmodel,
        params: &GameParams,
        mode: Mode,
        state: &BlockState,
    ) -> Result<Vec<Rational>> {
        match self {
            PolicyTree::Done => {
                if !state.is_terminal(bm) {
                    return Err(CascadeError::Schedule(format!("policy tree ends early at {state}")));
                }
                Ok((0..bm.block_count()).map(|b| Rational::from(state.y(b))).collect())
            }
            PolicyTree::Then { block, on_y, on_n } => {
                if *block >= bm.block_count() || state.undecided(bm, *block) == 0 {
                    return Err(CascadeError::Schedule(format!(
                        "policy tree schedules exhausted block {block} at {state}"
                    )));
                }
                let vy = on_y.evaluate(bm, params, mode, &state.with(*block, Choice::Y))?;
                let vn = on_n.evaluate(bm, params, mode, &state.with(*block, Choice::N))?;
                let r = respond(bm, params, mode, state, *block, &vy, &vn);
                let pick = |c: Choice| if c.is_y() { &vy } else { &vn };
                Ok(mix(&params.p, &params.q(), pick(r.action_y), pick(r.action_n)))
            }
        }
    }

    fn walk(
        &self,
        bm: &Blockmodel,
        state: &BlockState,
        table: &mut BTreeMap<String, usize>,
    ) -> Result<()> {
        match self {
            PolicyTree::Done => {
                if state.is_terminal(bm) {
                    Ok(())
                } else {
                    Err(CascadeError::Schedule(format!("policy tree ends early at {state}")))
                }
            }
            PolicyTree::Then { block, on_y, on_n } => {
                if *block >= bm.block_count() || state.undecided(bm, *block) == 0 {
                    return Err(CascadeError::Schedule(format!(
                        "policy tree schedules exhausted block {block} at {state}"
                    )));
                }
                let key = state.to_string();
                if let Some(&prev) = table.get(&key) {
                    if prev != *block {
                        return Err(CascadeError::Schedule(format!(
                            "policy tree is not a function of the block state at {key}"
                        )));
                    }
                }
                table.insert(key, *block);
                on_y.walk(bm, &state.with(*block, Choice::Y), table)?;
                on_n.walk(bm, &state.with(*block, Choice::N), table)
            }
        }
    }
}

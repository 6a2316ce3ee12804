use std::collections::HashMap;

use serde::Serialize;

use crate::blockdp::{dp_solve, mix, respond, BlockState};
use crate::error::{CascadeError, Result};
use crate::game::{Choice, GameParams, Mode, Rational};
use crate::graphs::Blockmodel;

use super::{PolicyTree, SchedulePolicy, Scheduling};

/// Default cap on stored outcome vectors across all states.
pub const DEFAULT_OUTCOME_BUDGET: usize = 2_000_000;

/// Best committed schedule next to the subgame-optimal scheduler.
#[derive(Clone, Debug, Serialize)]
pub struct StackelbergResult {
    /// Best commitment as a decision tree over histories.
    pub tree: PolicyTree,
    /// The same commitment as a state table, when no two histories that
    /// reach one state need different blocks.
    pub policy: Option<SchedulePolicy>,
    /// Performance (fraction of Y) of the best committed schedule.
    pub stackelberg: Rational,
    /// Performance of the subgame-optimal scheduler.
    pub pbe: Rational,
    /// Distinct achievable outcome vectors at the initial state.
    pub root_outcomes: usize,
    /// Outcome vectors stored over all states.
    pub total_outcomes: usize,
}

/// Distinct expected-Y vectors a committed schedule can induce from one
/// state, each with the move that realizes it.
struct Outcomes {
    values: Vec<Vec<Rational>>,
    /// `(block, index in Y-child, index in N-child)`; `None` at terminal states.
    moves: Vec<Option<(usize, usize, usize)>>,
}

struct Search<'a> {
    bm: &'a Blockmodel,
    params: &'a GameParams,
    mode: Mode,
    memo: HashMap<BlockState, Outcomes>,
    stored: usize,
    budget: usize,
}

impl Search<'_> {
    fn build(&mut self, state: &BlockState) -> Result<()> {
        if self.memo.contains_key(state) {
            return Ok(());
        }
        let bm = self.bm;
        let mut out = Outcomes {
            values: Vec::new(),
            moves: Vec::new(),
        };
        if state.is_terminal(bm) {
            out.values.push((0..bm.block_count()).map(|b| Rational::from(state.y(b))).collect());
            out.moves.push(None);
        } else {
            let q = self.params.q();
            let mut seen: HashMap<Vec<Rational>, usize> = HashMap::new();
            for block in 0..bm.block_count() {
                if state.undecided(bm, block) == 0 {
                    continue;
                }
                let (sy, sn) = (state.with(block, Choice::Y), state.with(block, Choice::N));
                self.build(&sy)?;
                self.build(&sn)?;
                let (oy, on) = (&self.memo[&sy], &self.memo[&sn]);
                for (iy, phi_y) in oy.values.iter().enumerate() {
                    for (i_n, phi_n) in on.values.iter().enumerate() {
                        let r = respond(bm, self.params, self.mode, state, block, phi_y, phi_n);
                        let pick = |c: Choice| if c.is_y() { phi_y } else { phi_n };
                        let v = mix(&self.params.p, &q, pick(r.action_y), pick(r.action_n));
                        if seen.contains_key(&v) {
                            continue;
                        }
                        seen.insert(v.clone(), out.values.len());
                        out.values.push(v);
                        out.moves.push(Some((block, iy, i_n)));
                    }
                }
            }
        }
        self.stored += out.values.len();
        if self.stored > self.budget {
            return Err(CascadeError::CapExceeded {
                what: "committed-schedule outcomes",
                size: self.stored,
                limit: self.budget,
                hint: "use a smaller blockmodel or raise the outcome budget",
            });
        }
        self.memo.insert(state.clone(), out);
        Ok(())
    }

    fn extract(&self, state: &BlockState, idx: usize) -> PolicyTree {
        match self.memo[state].moves[idx] {
            None => PolicyTree::Done,
            Some((block, iy, i_n)) => PolicyTree::branch(
                block,
                self.extract(&state.with(block, Choice::Y), iy),
                self.extract(&state.with(block, Choice::N), i_n),
            ),
        }
    }
}

/// Best committed block schedule for strategic agents, against the
/// subgame-optimal scheduler.
pub fn stackelberg_search(bm: &Blockmodel, params: &GameParams) -> Result<StackelbergResult> {
    stackelberg_search_with(bm, params, Mode::Strategic, DEFAULT_OUTCOME_BUDGET)
}

/// Committed-schedule search for either agent mode with an outcome budget.
///
/// Every schedule tree induces, at each state, an expected-Y vector per
/// block; agents respond only to their children's vectors. Building the set
/// of achievable vectors bottom-up therefore covers every schedule without
/// listing the trees themselves.
pub fn stackelberg_search_with(
    bm: &Blockmodel,
    params: &GameParams,
    mode: Mode,
    budget: usize,
) -> Result<StackelbergResult> {
    params.validate()?;
    let mut search = Search {
        bm,
        params,
        mode,
        memo: HashMap::new(),
        stored: 0,
        budget,
    };
    let root = BlockState::empty(bm.block_count());
    search.build(&root)?;
    let outcomes = &search.memo[&root];
    let (best_idx, best_total) = outcomes
        .values
        .iter()
        .map(|v| v.iter().sum::<Rational>())
        .enumerate()
        .fold(None::<(usize, Rational)>, |acc, (i, t)| match acc {
            Some((_, ref bt)) if *bt >= t => acc,
            _ => Some((i, t)),
        })
        .expect("at least one outcome");
    let tree = search.extract(&root, best_idx);
    let policy = tree.compile(bm, &root).ok();
    let n = Rational::from(bm.node_count());
    let pbe = dp_solve(bm, params, mode, &Scheduling::PbeOptimal, None)?.root_performance();
    Ok(StackelbergResult {
        tree,
        policy,
        stackelberg: best_total / n,
        pbe,
        root_outcomes: outcomes.values.len(),
        total_outcomes: search.stored,
    })
}

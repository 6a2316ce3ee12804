//! Exact equilibrium and scheduler optimization on blockmodels.
//!
//! Nodes inside a block are exchangeable, so a state only records how many
//! nodes of each block have decided Y and N.

mod clique;
mod star;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CascadeError, Result};
use crate::game::{myopic_decision, tie_break, Choice, GameParams, Mode, Rational, Situation};
use crate::graphs::Blockmodel;
use crate::schedulers::Scheduling;

pub use clique::{classify_clique, classify_table, CliqueClass};
pub use star::{star_thresholds, StarThresholds, ThresholdRow};

/// Default cap on the number of block states a solve may touch.
pub const DEFAULT_STATE_BUDGET: usize = 10_000_000;

/// Decided-Y and decided-N counts per block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockState {
    counts: Vec<(u32, u32)>,
}

impl BlockState {
    pub fn empty(blocks: usize) -> Self {
        BlockState {
            counts: vec![(0, 0); blocks],
        }
    }

    pub fn from_counts(bm: &Blockmodel, counts: Vec<(u32, u32)>) -> Result<Self> {
        let state = BlockState { counts };
        state.validate(bm)?;
        Ok(state)
    }

    /// Collapses an explicit situation on the expansion of `bm`.
    pub fn from_situation(bm: &Blockmodel, situation: &Situation) -> Self {
        let mut state = BlockState::empty(bm.block_count());
        for (v, slot) in situation.slots().iter().enumerate() {
            if let Some(c) = slot {
                state = state.with(bm.block_of(v), *c);
            }
        }
        state
    }

    pub fn validate(&self, bm: &Blockmodel) -> Result<()> {
        if self.counts.len() != bm.block_count() {
            return Err(CascadeError::InvalidParameter(format!(
                "state has {} blocks, model has {}",
                self.counts.len(),
                bm.block_count()
            )));
        }
        for (b, &(y, n)) in self.counts.iter().enumerate() {
            if (y + n) as usize > bm.size(b) {
                return Err(CascadeError::InvalidParameter(format!(
                    "block {b} has {} decisions but size {}",
                    y + n,
                    bm.size(b)
                )));
            }
        }
        Ok(())
    }

    pub fn block_count(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[(u32, u32)] {
        &self.counts
    }

    pub fn y(&self, block: usize) -> usize {
        self.counts[block].0 as usize
    }

    pub fn n(&self, block: usize) -> usize {
        self.counts[block].1 as usize
    }

    pub fn count(&self, block: usize, c: Choice) -> usize {
        match c {
            Choice::Y => self.y(block),
            Choice::N => self.n(block),
        }
    }

    pub fn undecided(&self, bm: &Blockmodel, block: usize) -> usize {
        bm.size(block) - self.y(block) - self.n(block)
    }

    pub fn total_decided(&self) -> usize {
        self.counts.iter().map(|&(y, n)| (y + n) as usize).sum()
    }

    pub fn total_y(&self) -> usize {
        self.counts.iter().map(|&(y, _)| y as usize).sum()
    }

    pub fn is_terminal(&self, bm: &Blockmodel) -> bool {
        (0..self.counts.len()).all(|b| self.undecided(bm, b) == 0)
    }

    pub fn with(&self, block: usize, c: Choice) -> BlockState {
        let mut next = self.clone();
        match c {
            Choice::Y => next.counts[block].0 += 1,
            Choice::N => next.counts[block].1 += 1,
        }
        next
    }
}

impl fmt::Display for BlockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (y, n)) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{y}:{n}")?;
        }
        Ok(())
    }
}

impl FromStr for BlockState {
    type Err = CascadeError;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || CascadeError::InvalidParameter(format!("bad block state {s:?}"));
        let counts = s
            .split(',')
            .map(|part| {
                let (y, n) = part.trim().split_once(':').ok_or_else(bad)?;
                Ok((y.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockState { counts })
    }
}

impl Serialize for BlockState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BlockState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Number of block states for a model, or `None` on overflow.
pub fn state_space_size(bm: &Blockmodel) -> Option<usize> {
    bm.sizes().iter().try_fold(1usize, |acc, &s| {
        acc.checked_mul((s + 1) * (s + 2) / 2)
    })
}

/// How an agent of each type answers when its block is scheduled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Response {
    pub action_y: Choice,
    pub action_n: Choice,
    /// Utility of Y minus utility of N before the type bonus.
    pub gap: Rational,
}

impl Response {
    pub fn action(&self, t: Choice) -> Choice {
        match t {
            Choice::Y => self.action_y,
            Choice::N => self.action_n,
        }
    }
}

/// Agent response when `block` decides at `state`, given the expected
/// final Y-counts per block after it plays Y (`phi_y`) or N (`phi_n`).
pub fn respond(
    bm: &Blockmodel,
    params: &GameParams,
    mode: Mode,
    state: &BlockState,
    block: usize,
    phi_y: &[Rational],
    phi_n: &[Rational],
) -> Response {
    match mode {
        Mode::Myopic => {
            let (mut m_y, mut m_n) = (0, 0);
            for j in 0..bm.block_count() {
                if bm.adjacent(block, j) {
                    m_y += state.y(j);
                    m_n += state.n(j);
                }
            }
            Response {
                action_y: myopic_decision(Choice::Y, m_y, m_n, &params.pi),
                action_n: myopic_decision(Choice::N, m_y, m_n, &params.pi),
                gap: Rational::from_int(m_y as i64 - m_n as i64),
            }
        }
        Mode::Strategic => {
            // the deciding agent counts itself in its own block under both
            // choices, so self-exclusion cancels in the difference
            let mut gap = Rational::zero();
            for j in 0..bm.block_count() {
                if bm.adjacent(block, j) {
                    gap += &phi_y[j];
                    gap += &phi_n[j];
                    gap -= Rational::from(bm.size(j));
                }
            }
            let zero = Rational::zero();
            let act = |t: Choice| {
                let (u_y, u_n) = match t {
                    Choice::Y => (&gap + &params.pi, zero.clone()),
                    Choice::N => (gap.clone(), params.pi.clone()),
                };
                tie_break(t, &u_y, &u_n)
            };
            Response {
                action_y: act(Choice::Y),
                action_n: act(Choice::N),
                gap: gap.clone(),
            }
        }
    }
}

/// `p * a + (1 - p) * b`, componentwise.
pub(crate) fn mix(p: &Rational, q: &Rational, a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| {
        if x == y {
            x.clone()
        } else {
            p * x + q * y
        }
    }).collect()
}

/// Memoized equilibrium data for one block state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueEntry {
    /// Expected final Y-count of each block.
    pub expected_y: Vec<Rational>,
    /// Block scheduled here; `None` at terminal states.
    pub block: Option<usize>,
    pub response: Option<Response>,
}

impl ValueEntry {
    pub fn total(&self) -> Rational {
        self.expected_y.iter().sum()
    }
}

/// Backward-induction solver over block states, evaluated on demand.
pub struct DpSolver<'a> {
    bm: &'a Blockmodel,
    params: &'a GameParams,
    mode: Mode,
    scheduling: &'a Scheduling,
    initial: BlockState,
    memo: HashMap<BlockState, ValueEntry>,
}

impl<'a> DpSolver<'a> {
    pub fn new(
        bm: &'a Blockmodel,
        params: &'a GameParams,
        mode: Mode,
        scheduling: &'a Scheduling,
        predecided: Option<&BlockState>,
    ) -> Result<Self> {
        Self::with_budget(bm, params, mode, scheduling, predecided, DEFAULT_STATE_BUDGET)
    }

    pub fn with_budget(
        bm: &'a Blockmodel,
        params: &'a GameParams,
        mode: Mode,
        scheduling: &'a Scheduling,
        predecided: Option<&BlockState>,
        budget: usize,
    ) -> Result<Self> {
        params.validate()?;
        let size = state_space_size(bm).unwrap_or(usize::MAX);
        if size > budget {
            return Err(CascadeError::CapExceeded {
                what: "block states",
                size,
                limit: budget,
                hint: "reduce block sizes or raise the state budget",
            });
        }
        let initial = match predecided {
            Some(s) => {
                s.validate(bm)?;
                s.clone()
            }
            None => BlockState::empty(bm.block_count()),
        };
        Ok(DpSolver {
            bm,
            params,
            mode,
            scheduling,
            initial,
            memo: HashMap::new(),
        })
    }

    pub fn initial(&self) -> &BlockState {
        &self.initial
    }

    /// Equilibrium entry at `state`, solving its subgame if needed.
    pub fn solve(&mut self, state: &BlockState) -> Result<&ValueEntry> {
        state.validate(self.bm)?;
        self.ensure(state)?;
        Ok(&self.memo[state])
    }

    /// Response of `block` if it were scheduled at `state`, whatever the
    /// scheduler would actually pick there.
    pub fn respond_at(&mut self, state: &BlockState, block: usize) -> Result<Response> {
        state.validate(self.bm)?;
        if block >= self.bm.block_count() || state.undecided(self.bm, block) == 0 {
            return Err(CascadeError::Schedule(format!("block {block} cannot decide at {state}")));
        }
        let (sy, sn) = (state.with(block, Choice::Y), state.with(block, Choice::N));
        self.ensure(&sy)?;
        self.ensure(&sn)?;
        Ok(respond(
            self.bm,
            self.params,
            self.mode,
            state,
            block,
            &self.memo[&sy].expected_y,
            &self.memo[&sn].expected_y,
        ))
    }

    fn evaluate(&mut self, state: &BlockState, block: usize) -> Result<(Response, Vec<Rational>)> {
        let (sy, sn) = (state.with(block, Choice::Y), state.with(block, Choice::N));
        self.ensure(&sy)?;
        self.ensure(&sn)?;
        let (vy, vn) = (&self.memo[&sy].expected_y, &self.memo[&sn].expected_y);
        let r = respond(self.bm, self.params, self.mode, state, block, vy, vn);
        let pick = |c: Choice| if c.is_y() { vy } else { vn };
        let value = mix(&self.params.p, &self.params.q(), pick(r.action_y), pick(r.action_n));
        Ok((r, value))
    }

    fn ensure(&mut self, state: &BlockState) -> Result<()> {
        if self.memo.contains_key(state) {
            return Ok(());
        }
        let bm = self.bm;
        let entry = if state.is_terminal(bm) {
            ValueEntry {
                expected_y: (0..bm.block_count()).map(|b| Rational::from(state.y(b))).collect(),
                block: None,
                response: None,
            }
        } else {
            match self.scheduling {
                Scheduling::Policy(policy) => {
                    let block = policy
                        .next_block(bm, &self.initial, state)?
                        .expect("nonterminal state");
                    let (r, value) = self.evaluate(state, block)?;
                    ValueEntry {
                        expected_y: value,
                        block: Some(block),
                        response: Some(r),
                    }
                }
                Scheduling::PbeOptimal => {
                    let mut best: Option<(Rational, usize, Response, Vec<Rational>)> = None;
                    for block in 0..bm.block_count() {
                        if state.undecided(bm, block) == 0 {
                            continue;
                        }
                        let (r, value) = self.evaluate(state, block)?;
                        let total: Rational = value.iter().sum();
                        if best.as_ref().is_none_or(|(t, ..)| total > *t) {
                            best = Some((total, block, r, value));
                        }
                    }
                    let (_, block, r, value) = best.expect("nonterminal state has an open block");
                    ValueEntry {
                        expected_y: value,
                        block: Some(block),
                        response: Some(r),
                    }
                }
            }
        };
        self.memo.insert(state.clone(), entry);
        Ok(())
    }

    pub fn into_table(self) -> ValueTable {
        ValueTable {
            bm: self.bm.clone(),
            mode: self.mode,
            initial: self.initial,
            entries: self.memo,
        }
    }
}

/// Solves the game from the predecided state (or the empty state).
pub fn dp_solve(
    bm: &Blockmodel,
    params: &GameParams,
    mode: Mode,
    scheduling: &Scheduling,
    predecided: Option<&BlockState>,
) -> Result<ValueTable> {
    let mut solver = DpSolver::new(bm, params, mode, scheduling, predecided)?;
    let root = solver.initial().clone();
    solver.solve(&root)?;
    Ok(solver.into_table())
}

/// Completed equilibrium values keyed by block state.
#[derive(Clone, Debug)]
pub struct ValueTable {
    bm: Blockmodel,
    mode: Mode,
    initial: BlockState,
    entries: HashMap<BlockState, ValueEntry>,
}

#[derive(Serialize)]
struct ExportRow<'a> {
    state: &'a BlockState,
    chosen_block: Option<usize>,
    #[serde(rename = "action_Y_type")]
    action_y_type: Option<Choice>,
    #[serde(rename = "action_N_type")]
    action_n_type: Option<Choice>,
    #[serde(rename = "expected_Y_counts")]
    expected_y_counts: &'a [Rational],
}

impl ValueTable {
    pub fn blockmodel(&self) -> &Blockmodel {
        &self.bm
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn initial(&self) -> &BlockState {
        &self.initial
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, state: &BlockState) -> Result<&ValueEntry> {
        self.entries
            .get(state)
            .ok_or_else(|| CascadeError::UnknownState(state.to_string()))
    }

    pub fn root(&self) -> &ValueEntry {
        &self.entries[&self.initial]
    }

    /// Expected final Y-count over all nodes from `state`.
    pub fn expected_count(&self, state: &BlockState) -> Result<Rational> {
        Ok(self.get(state)?.total())
    }

    /// Expected fraction of Y from `state`; with `exclude_predecided` the
    /// initial decisions leave both numerator and denominator.
    pub fn performance(&self, state: &BlockState, exclude_predecided: bool) -> Result<Rational> {
        let count = self.expected_count(state)?;
        let n = self.bm.node_count();
        if exclude_predecided {
            let fixed = self.initial.total_decided();
            if fixed == n {
                return Err(CascadeError::Undefined("every node is predecided".into()));
            }
            let base = Rational::from(self.initial.total_y());
            Ok((count - base) / Rational::from(n - fixed))
        } else {
            Ok(count / Rational::from(n))
        }
    }

    /// Performance from the initial state over all nodes.
    pub fn root_performance(&self) -> Rational {
        self.performance(&self.initial, false).expect("root is solved")
    }

    /// Entries sorted by state for stable output.
    pub fn sorted(&self) -> Vec<(&BlockState, &ValueEntry)> {
        let mut rows: Vec<_> = self.entries.iter().collect();
        rows.sort_by(|a, b| a.0.cmp(b.0));
        rows
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<ExportRow<'_>> = self
            .sorted()
            .into_iter()
            .map(|(state, e)| ExportRow {
                state,
                chosen_block: e.block,
                action_y_type: e.response.as_ref().map(|r| r.action_y),
                action_n_type: e.response.as_ref().map(|r| r.action_n),
                expected_y_counts: &e.expected_y,
            })
            .collect();
        serde_json::to_value(rows).expect("rows serialize")
    }
}

use rayon::prelude::*;
use serde::Serialize;

use crate::blockdp::{dp_solve, BlockState};
use crate::engine::{monte_carlo_performance, solve_explicit, McEstimate};
use crate::error::{CascadeError, Result};
use crate::game::{Choice, GameParams, Mode, Rational, Situation};
use crate::graphs::{self, Blockmodel, FamilySpec};
use crate::schedulers::{canonical, PolicyId, Scheduling};

/// Size of the subcliques hanging off each representative.
pub const SUBCLIQUE_SIZE: usize = 5;

/// Lower bound `K (1 - M^2 (1 - p^2)^(M - 2)) / (K + M)` on the council
/// schedule's myopic performance.
pub fn council_bound(k: usize, m: usize, p: &Rational) -> Rational {
    let base = Rational::one() - p.pow(2);
    let power = if m >= 2 {
        base.pow((m - 2) as u32)
    } else {
        Rational::one() / base.pow((2 - m) as u32)
    };
    let inner = Rational::one() - Rational::from(m * m) * power;
    Rational::from(k) * inner / Rational::from(k + m)
}

#[derive(Clone, Debug, Serialize)]
pub struct CouncilReport {
    pub k: usize,
    pub m: usize,
    pub p: Rational,
    pub pi: Rational,
    pub estimate: McEstimate,
    pub bound: Rational,
    pub bound_float: f64,
    /// The bound is at most 0 and says nothing.
    pub vacuous: bool,
    /// Estimate is at least the bound minus three standard errors.
    pub passed: bool,
}

/// Monte Carlo myopic performance of the council schedule against the
/// analytic lower bound.
pub fn council_bound_check(
    k: usize,
    m: usize,
    params: &GameParams,
    trials: usize,
    seed: u64,
) -> Result<CouncilReport> {
    if !(params.pi > Rational::from_int(2) && params.pi < Rational::from_int(3)) {
        return Err(CascadeError::InvalidParameter("council check needs 2 < pi < 3".into()));
    }
    let family = FamilySpec::Council {
        k,
        m,
        subclique_size: SUBCLIQUE_SIZE,
    };
    let g = graphs::council(k, m, SUBCLIQUE_SIZE)?;
    let sched = Scheduling::Policy(canonical(PolicyId::CouncilS, &family)?);
    let estimate = monte_carlo_performance(
        &g,
        params,
        Mode::Myopic,
        &sched,
        &Situation::empty(g.node_count()),
        trials,
        seed,
    )?;
    let bound = council_bound(k, m, &params.p);
    let bound_float = bound.to_f64();
    Ok(CouncilReport {
        k,
        m,
        p: params.p.clone(),
        pi: params.pi.clone(),
        vacuous: !bound.is_positive(),
        passed: estimate.fraction >= bound_float - 3.0 * estimate.stderr,
        bound,
        bound_float,
        estimate,
    })
}

/// A clique of `k` nodes all adjacent to one extra node fixed at Y.
pub fn fixed_neighbor_clique(k: usize) -> Result<Blockmodel> {
    Blockmodel::new(vec![k, 1], vec![vec![true, true], vec![true, false]])
}

fn fixed_neighbor_state() -> BlockState {
    BlockState::empty(2).with(1, Choice::Y)
}

/// Expected number of Y among the clique nodes, strategic agents.
pub fn fixed_neighbor_clique_y(k: usize, params: &GameParams) -> Result<Rational> {
    let bm = fixed_neighbor_clique(k)?;
    let vt = dp_solve(&bm, params, Mode::Strategic, &Scheduling::PbeOptimal, Some(&fixed_neighbor_state()))?;
    Ok(vt.root().expected_y[0].clone())
}

/// Same quantity from backward induction on the explicit graph.
pub fn fixed_neighbor_clique_y_explicit(k: usize, params: &GameParams) -> Result<Rational> {
    let g = fixed_neighbor_clique(k)?.expand();
    let initial = Situation::empty(k + 1).with(k, Choice::Y);
    let table = solve_explicit(&g, params, Mode::Strategic, &Scheduling::PbeOptimal, &initial)?;
    Ok(table.root().prob_y[..k].iter().sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub ks: Vec<usize>,
    pub checked: usize,
    /// `(p, pi)` pairs where every clique size ends with all N.
    pub witnesses: Vec<(Rational, Rational)>,
}

/// Grid search for `(p, pi)` such that a clique of every size in `ks`,
/// next to one node fixed at Y, still ends with every agent at N.
pub fn fixed_neighbor_witness_search(
    ks: &[usize],
    ps: &[Rational],
    pis: &[Rational],
) -> Result<WitnessReport> {
    let grid: Vec<(&Rational, &Rational)> = ps.iter().flat_map(|p| pis.iter().map(move |pi| (p, pi))).collect();
    let hits: Vec<Option<(Rational, Rational)>> = grid
        .par_iter()
        .map(|&(p, pi)| {
            let params = GameParams::new(p.clone(), pi.clone())?;
            for &k in ks {
                if !fixed_neighbor_clique_y(k, &params)?.is_zero() {
                    return Ok(None);
                }
            }
            Ok(Some((p.clone(), pi.clone())))
        })
        .collect::<Result<_>>()?;
    Ok(WitnessReport {
        ks: ks.to_vec(),
        checked: grid.len(),
        witnesses: hits.into_iter().flatten().collect(),
    })
}

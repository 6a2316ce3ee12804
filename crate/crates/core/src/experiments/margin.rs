use serde::Serialize;

use crate::engine::{solve_explicit, EquilibriumTable};
use crate::error::{CascadeError, Result};
use crate::game::{Choice, GameParams, Mode, Rational, Situation};
use crate::graphs::ExplicitGraph;
use crate::schedulers::Scheduling;

#[derive(Clone, Debug, Serialize)]
pub struct MarginReport {
    /// Smallest nonzero utility difference over all decision points.
    pub delta: Rational,
    pub pi: Rational,
    pub perturbed_pi: Rational,
    pub performance: Rational,
    pub perturbed_performance: Rational,
    /// Decision points with an exact tie, before and after the perturbation.
    pub indifferent_before: usize,
    pub indifferent_after: usize,
    pub passed: bool,
}

/// `u_Y - u_N` for each type at every decision point of the table.
fn differences<'a>(table: &'a EquilibriumTable, pi: &'a Rational) -> impl Iterator<Item = Rational> + 'a {
    table.entries().filter_map(|(_, e)| e.response.as_ref()).flat_map(move |r| {
        Choice::BOTH.map(|t| match t {
            Choice::Y => &r.gap + pi,
            Choice::N => &r.gap - pi,
        })
    })
}

/// Finds the smallest nonzero indifference margin of the strategic game,
/// raises `pi` by half of it, and checks that ties vanish while the
/// performance stays the same under the same schedule.
pub fn indifference_margin(
    g: &ExplicitGraph,
    params: &GameParams,
    scheduling: &Scheduling,
) -> Result<MarginReport> {
    let initial = Situation::empty(g.node_count());
    // the schedule is held fixed, so the optimal scheduler's moves are frozen first
    let fixed = match scheduling {
        Scheduling::Policy(p) => Scheduling::Policy(p.clone()),
        Scheduling::PbeOptimal => {
            let t = solve_explicit(g, params, Mode::Strategic, scheduling, &initial)?;
            Scheduling::Policy(t.schedule())
        }
    };
    let table = solve_explicit(g, params, Mode::Strategic, &fixed, &initial)?;
    let delta = differences(&table, &params.pi)
        .filter(|d| !d.is_zero())
        .map(|d| d.abs())
        .min()
        .ok_or_else(|| CascadeError::Undefined("every decision point is indifferent".into()))?;
    let indifferent_before = differences(&table, &params.pi).filter(|d| d.is_zero()).count();
    let perturbed_pi = &params.pi + &(&delta / Rational::from_int(2));
    let perturbed = params.with_pi(perturbed_pi.clone())?;
    let table2 = solve_explicit(g, &perturbed, Mode::Strategic, &fixed, &initial)?;
    let indifferent_after = differences(&table2, &perturbed_pi).filter(|d| d.is_zero()).count();
    let performance = table.performance().fraction;
    let perturbed_performance = table2.performance().fraction;
    Ok(MarginReport {
        passed: performance == perturbed_performance && indifferent_after == 0,
        delta,
        pi: params.pi.clone(),
        perturbed_pi,
        performance,
        perturbed_performance,
        indifferent_before,
        indifferent_after,
    })
}

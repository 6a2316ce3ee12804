use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CascadeError, Result};
use crate::game::{Choice, GameParams, Mode, Situation};
use crate::graphs::ExplicitGraph;
use crate::schedulers::Scheduling;

use super::{play_myopic_from, solve_explicit};

/// Monte Carlo estimate of the Y fraction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub trials: usize,
    pub seed: u64,
    pub mean_count: f64,
    pub fraction: f64,
    /// Standard error of `fraction`.
    pub stderr: f64,
}

fn probability_parts(params: &GameParams) -> Result<(u64, u64)> {
    let num = params.p.numer().to_u64();
    let den = params.p.denom().to_u64();
    match (num, den) {
        (Some(n), Some(d)) => Ok((n, d)),
        _ => Err(CascadeError::InvalidParameter(format!(
            "p = {} has parts too large for sampling",
            params.p
        ))),
    }
}

/// Per-trial generator: the seed picks the key, the trial index the stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws a type for every node; exact Bernoulli(num/den) per node.
pub fn sample_types(rng: &mut ChaCha8Rng, n: usize, num: u64, den: u64) -> Vec<Choice> {
    (0..n)
        .map(|_| if rng.gen_range(0..den) < num { Choice::Y } else { Choice::N })
        .collect()
}

/// Estimates performance from `initial` with independent seeded trials.
///
/// Myopic play under a fixed policy runs playouts directly; other cases
/// follow an exact equilibrium table, so they inherit its size caps.
pub fn monte_carlo_performance(
    g: &ExplicitGraph,
    params: &GameParams,
    mode: Mode,
    scheduling: &Scheduling,
    initial: &Situation,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(CascadeError::InvalidParameter("trials must be positive".into()));
    }
    params.validate()?;
    let (num, den) = probability_parts(params)?;
    let n = g.node_count();
    let table = match (mode, scheduling) {
        (Mode::Myopic, Scheduling::Policy(_)) => None,
        _ => Some(solve_explicit(g, params, mode, scheduling, initial)?),
    };
    let counts: Vec<u64> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let types = sample_types(&mut rng, n, num, den);
            let end = match (&table, scheduling) {
                (Some(t), _) => t.walk(&types)?,
                (None, Scheduling::Policy(policy)) => {
                    play_myopic_from(g, initial, &types, &params.pi, policy)?
                }
                (None, Scheduling::PbeOptimal) => unreachable!("table built for subgame-optimal play"),
            };
            Ok(end.count(Choice::Y) as u64)
        })
        .collect::<Result<_>>()?;
    let total: u128 = counts.iter().map(|&c| c as u128).sum();
    let squares: u128 = counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
    let t = trials as f64;
    let mean_count = total as f64 / t;
    let var = if trials > 1 {
        ((squares as f64) - t * mean_count * mean_count) / (t - 1.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        trials,
        seed,
        mean_count,
        fraction: mean_count / n as f64,
        stderr: (var.max(0.0) / t).sqrt() / n as f64,
    })
}

use serde::{Deserialize, Serialize};

use crate::error::{CascadeError, Result};
use crate::game::{Choice, GameParams, Mode};
use crate::graphs;
use crate::schedulers::Scheduling;

use super::{dp_solve, BlockState, ValueTable};

/// Equilibrium shape of the strategic game on a clique.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CliqueClass {
    /// Every agent chooses N regardless of type.
    #[serde(rename = "PNC")]
    Pnc,
    /// The first agent plays its type and everyone after copies it.
    #[serde(rename = "TC")]
    Tc,
    #[serde(rename = "OTHER")]
    Other,
}

impl std::fmt::Display for CliqueClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CliqueClass::Pnc => "PNC",
            CliqueClass::Tc => "TC",
            CliqueClass::Other => "OTHER",
        })
    }
}

fn actions(vt: &ValueTable, y: u32, n: u32) -> (Choice, Choice) {
    let state = BlockState { counts: vec![(y, n)] };
    let r = vt.get(&state).expect("clique path state is solved");
    let r = r.response.as_ref().expect("nonterminal");
    (r.action_y, r.action_n)
}

/// Classifies the strategic clique equilibrium from an already solved table.
pub fn classify_table(vt: &ValueTable) -> CliqueClass {
    let n = vt.blockmodel().size(0) as u32;
    let all = |c: Choice| (c, c);
    let pnc = (0..n).all(|k| actions(vt, 0, k) == all(Choice::N));
    if pnc {
        return CliqueClass::Pnc;
    }
    let tc = actions(vt, 0, 0) == (Choice::Y, Choice::N)
        && (1..n).all(|k| actions(vt, k, 0) == all(Choice::Y) && actions(vt, 0, k) == all(Choice::N));
    if tc {
        CliqueClass::Tc
    } else {
        CliqueClass::Other
    }
}

/// Solves the strategic game on `K_n` and classifies its equilibrium.
pub fn classify_clique(n: usize, params: &GameParams) -> Result<CliqueClass> {
    if n < 2 {
        return Err(CascadeError::InvalidParameter("classification needs n >= 2".into()));
    }
    let bm = graphs::clique(n)?;
    let vt = dp_solve(&bm, params, Mode::Strategic, &Scheduling::PbeOptimal, None)?;
    Ok(classify_table(&vt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Rational;

    fn gp(p: &str, pi: &str) -> GameParams {
        GameParams::new(p.parse().unwrap(), pi.parse().unwrap()).unwrap()
    }

    #[test]
    fn k3_example_is_pnc() {
        assert_eq!(classify_clique(3, &gp("9/100", "11/10")).unwrap(), CliqueClass::Pnc);
    }

    #[test]
    fn small_pi_is_total_cascade() {
        for n in [2, 3, 7, 15] {
            assert_eq!(classify_clique(n, &gp("1/5", "9/10")).unwrap(), CliqueClass::Tc);
        }
    }

    #[test]
    fn forty_in_middle_regime_is_tc() {
        assert_eq!(classify_clique(40, &gp("3/10", "11/10")).unwrap(), CliqueClass::Tc);
    }

    #[test]
    fn rejects_single_node() {
        let params = GameParams::new(Rational::ratio(1, 4), Rational::one()).unwrap();
        assert!(classify_clique(1, &params).is_err());
    }
}

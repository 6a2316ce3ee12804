use proptest::prelude::*;

use cascade_core::blockdp::{dp_solve, BlockState};
use cascade_core::game::{myopic_decision, utility};
use cascade_core::graphs;
use cascade_core::schedulers::{SchedulePolicy, Scheduling};
use cascade_core::{Choice, GameParams, Mode, Rational, Situation};

fn choice() -> impl Strategy<Value = Choice> {
    prop_oneof![Just(Choice::Y), Just(Choice::N)]
}

fn rational() -> impl Strategy<Value = Rational> {
    (-10_000i64..10_000, 1i64..10_000).prop_map(|(a, b)| Rational::ratio(a, b))
}

proptest! {
    #[test]
    fn rational_text_round_trip(r in rational()) {
        prop_assert_eq!(r.to_string().parse::<Rational>().unwrap(), r.clone());
        let json = serde_json::to_string(&r).unwrap();
        prop_assert_eq!(serde_json::from_str::<Rational>(&json).unwrap(), r);
    }

    #[test]
    fn situation_text_round_trip(slots in prop::collection::vec(prop::option::of(choice()), 0..20)) {
        let s = Situation::from_slots(slots);
        prop_assert_eq!(s.to_string().parse::<Situation>().unwrap(), s);
    }

    #[test]
    fn block_state_text_round_trip(counts in prop::collection::vec((0u32..50, 0u32..50), 1..6)) {
        let mut s = BlockState::empty(counts.len());
        for (b, &(y, n)) in counts.iter().enumerate() {
            for _ in 0..y { s = s.with(b, Choice::Y); }
            for _ in 0..n { s = s.with(b, Choice::N); }
        }
        prop_assert_eq!(s.to_string().parse::<BlockState>().unwrap(), s);
    }

    #[test]
    fn matching_neighbor_adds_exactly_one(
        t in choice(),
        c in choice(),
        others in prop::collection::vec(choice(), 0..8),
        pi in rational().prop_map(|r| r.abs()),
    ) {
        let before = utility(t, c, &others, &pi);
        let mut more = others.clone();
        more.push(c);
        prop_assert_eq!(utility(t, c, &more, &pi), before + Rational::one());
    }

    #[test]
    fn myopic_rule_is_symmetric(t in choice(), my in 0usize..10, mn in 0usize..10, j in 1i64..40) {
        let pi = Rational::ratio(j, 4);
        prop_assert_eq!(myopic_decision(!t, mn, my, &pi), !myopic_decision(t, my, mn, &pi));
    }

    #[test]
    fn schedule_json_round_trip(order in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle()) {
        let policy = SchedulePolicy::order(order);
        let json = serde_json::to_string(&policy).unwrap();
        prop_assert_eq!(serde_json::from_str::<SchedulePolicy>(&json).unwrap(), policy);
    }

    #[test]
    fn clique_schedule_does_not_matter(n in 2usize..9, i in 1i64..10, j in 1i64..16) {
        // all blocks of a clique are one block, so every schedule is the same
        let params = GameParams::new(Rational::ratio(i, 20), Rational::ratio(j, 4)).unwrap();
        let bm = graphs::clique(n).unwrap();
        let seq = Scheduling::Policy(SchedulePolicy::order(vec![0; n]));
        for mode in Mode::BOTH {
            let a = dp_solve(&bm, &params, mode, &seq, None).unwrap().root_performance();
            let b = dp_solve(&bm, &params, mode, &Scheduling::PbeOptimal, None).unwrap().root_performance();
            prop_assert_eq!(a, b);
        }
    }
}

use rand::Rng;

use cascade_core::blockdp::{classify_clique, dp_solve, BlockState, CliqueClass};
use cascade_core::engine::{play_myopic, trial_rng, NeighborCounts};
use cascade_core::game::myopic_decision;
use cascade_core::graphs::{self, FamilySpec};
use cascade_core::schedulers::{canonical, fig5_pbe_tree, fig5_stackelberg_tree, PolicyId, Scheduling};
use cascade_core::{Choice, GameParams, Mode, Rational, Situation};

fn gp(p: &str, pi: &str) -> GameParams {
    GameParams::new(p.parse().unwrap(), pi.parse().unwrap()).unwrap()
}

#[test]
fn council_cursor_matches_pure_schedule() {
    for (k, m) in [(6, 3), (12, 6), (30, 10)] {
        let family = FamilySpec::Council {
            k,
            m,
            subclique_size: 5,
        };
        let g = graphs::council(k, m, 5).unwrap();
        let policy = canonical(PolicyId::CouncilS, &family).unwrap();
        let n = g.node_count();
        let empty = Situation::empty(n);
        for trial in 0..40 {
            let mut rng = trial_rng(31, trial);
            let pi = Rational::ratio(rng.gen_range(9..=11), 4);
            let p = rng.gen_range(0.2..0.8);
            let types: Vec<Choice> = (0..n).map(|_| if rng.gen_bool(p) { Choice::Y } else { Choice::N }).collect();
            let fast = play_myopic(&g, &types, &pi, &policy).unwrap();
            let mut s = empty.clone();
            let mut counts = NeighborCounts::new(&g, &empty);
            while let Some(v) = policy.next_node(&g, &empty, &s).unwrap() {
                let (my, mn) = counts.decided(v);
                let c = myopic_decision(types[v], my, mn, &pi);
                s.decide(v, c).unwrap();
                counts.record(v, c);
            }
            let slow: Vec<Choice> = s.slots().iter().map(|c| c.unwrap()).collect();
            assert_eq!(fast, slow, "k={k} m={m} trial={trial}");
        }
    }
}

#[test]
fn published_trees_give_published_counts() {
    let params = gp("18/100", "185/100");
    let bm = graphs::three_group([2, 2, 1], 0b011010).unwrap();
    let root = BlockState::empty(3);
    let count = |t: &cascade_core::schedulers::PolicyTree| -> Rational {
        t.evaluate(&bm, &params, Mode::Strategic, &root).unwrap().iter().sum()
    };
    let committed = count(&fig5_stackelberg_tree());
    let subgame = count(&fig5_pbe_tree());
    assert_eq!(committed.round_half_up(3), Rational::ratio(573, 1000));
    assert_eq!(subgame.round_half_up(3), Rational::ratio(371, 1000));
    let optimal = dp_solve(&bm, &params, Mode::Strategic, &Scheduling::PbeOptimal, None).unwrap();
    assert_eq!(optimal.expected_count(&root).unwrap(), subgame);
}

#[test]
fn star_cascade_probability_approaches_random_walk_limit() {
    let params = gp("3/10", "1/2");
    let limit = 3.0 / 7.0;
    let mut last_cascade = 0.0;
    let mut last_perf = 0.0;
    for n in [3, 5, 9, 15, 21, 31, 41] {
        let bm = graphs::star(n).unwrap();
        let opt = dp_solve(&bm, &params, Mode::Myopic, &Scheduling::PbeOptimal, None).unwrap();
        let sopt = Scheduling::Policy(canonical(PolicyId::StarSopt, &FamilySpec::Star { n }).unwrap());
        let fixed = dp_solve(&bm, &params, Mode::Myopic, &sopt, None).unwrap();
        assert_eq!(opt.root_performance(), fixed.root_performance(), "n={n}");
        let cascade = opt.root().expected_y[0].to_f64();
        let perf = opt.root_performance().to_f64();
        assert!(cascade > last_cascade && cascade < limit, "n={n} {cascade}");
        assert!(perf > last_perf, "n={n}");
        last_cascade = cascade;
        last_perf = perf;
    }
    assert!((last_cascade - limit).abs() < 0.02);
    // exteriors left behind by a failed walk still play their types
    assert!(last_perf < limit + (1.0 - limit) * 0.3);
}

#[test]
fn clique_classification_stays_certain() {
    for i in 1..10 {
        for j in 0..12 {
            let params = GameParams::new(Rational::ratio(i, 20), Rational::one() + Rational::ratio(j, 3)).unwrap();
            let q2 = (Rational::one() - &params.p).pow(2);
            let mut armed = false;
            for n in 2..=24 {
                let class = classify_clique(n, &params).unwrap();
                if armed {
                    assert_ne!(class, CliqueClass::Other, "p={} pi={} n={n}", params.p, params.pi);
                }
                if class != CliqueClass::Other && Rational::from(n + 1) * &q2 > params.pi {
                    armed = true;
                }
            }
        }
    }
}

//! Independent oracles and properties of the game rules and solvers.
#![allow(clippy::needless_range_loop)]

mod common;

use gcr::constructions::tree_move;
use gcr::{
    discounted_payoff, evaluate_profile, optimal_capture_time, ratio, replay, simulate, solve_exact,
    solve_positional_ne, Action, CaptureTime, Exact, GameSpec, Graph, Scalar, State, StateSpace,
    Strategy as PlayStrategy,
};
use proptest::prelude::*;

use common::{full_corpus, GAMMA, MAX_ITERS, TOL};

/// Minimax capture time of the cop-and-robber game by depth-bounded backward
/// induction over (cop, robber, mover), using only adjacency.
fn naive_capture_times(g: &Graph) -> Vec<Vec<[Option<usize>; 2]>> {
    let n = g.vertex_count();
    let nb = |v: usize| {
        let mut out = vec![v];
        out.extend_from_slice(g.neighbors(v));
        out
    };
    let mut tau = vec![vec![[None::<usize>; 2]; n + 1]; n + 1];
    for v in 1..=n {
        tau[v][v] = [Some(0), Some(0)];
    }
    for _ in 0..(2 * n * n + 2) {
        let prev = tau.clone();
        for c in 1..=n {
            for r in 1..=n {
                if c == r {
                    continue;
                }
                // Cop wants the smallest time, robber the largest; None is forever.
                tau[c][r][0] = nb(c).into_iter().filter_map(|c2| prev[c2][r][1]).min().map(|t| t + 1);
                let replies: Vec<Option<usize>> = nb(r).into_iter().map(|r2| prev[c][r2][0]).collect();
                tau[c][r][1] = if replies.iter().all(Option::is_some) {
                    replies.into_iter().flatten().max().map(|t| t + 1)
                } else {
                    None
                };
            }
        }
    }
    tau
}

#[test]
fn exact_two_token_values_match_naive_minimax() {
    let gamma: Exact = ratio(9, 10);
    for g in full_corpus() {
        let tau = naive_capture_times(&g.graph);
        let sol = solve_exact(&GameSpec::two_player(g.graph.clone(), gamma.clone()).unwrap()).unwrap();
        let n = g.graph.vertex_count();
        for c in 1..=n {
            for r in 1..=n {
                for mover in 1..=2 {
                    let s = State::new(vec![c, r], mover);
                    let expect = tau[c][r][mover - 1];
                    let want_value = expect.map_or(Exact::from_int(0), |t| gamma.powu(t));
                    let want_time = expect.map_or(CaptureTime::Infinite, CaptureTime::Finite);
                    assert_eq!(sol.value(&s), Some(&want_value), "{} at {s}", g.name);
                    assert_eq!(sol.capture_time(&s), Some(want_time), "{} at {s}", g.name);
                }
            }
        }
    }
}

#[test]
fn profile_evaluation_matches_simulation() {
    for g in [Graph::path(4), Graph::star(3), Graph::cycle(4)] {
        let spec = GameSpec::chain(g, 3, GAMMA).unwrap();
        let ne = solve_positional_ne(&spec, TOL, MAX_ITERS).unwrap();
        let u = evaluate_profile(&spec, &ne.profile).unwrap();
        let strategies = ne.strategies();
        let space = StateSpace::new(&spec).unwrap();
        for i in 0..space.terminal() {
            let s = space.state(i);
            let h = simulate(&spec, &strategies, &s).unwrap();
            let q = discounted_payoff(&spec, &h).unwrap();
            for n in 1..=3 {
                assert!((u.get(i, n) - q[n - 1]).abs() < 1e-12, "{s} player {n}");
            }
        }
    }
}

fn prufer_tree() -> impl Strategy<Value = Graph> {
    (3usize..=9).prop_flat_map(|n| {
        proptest::collection::vec(1..=n, n - 2).prop_map(|seq: Vec<usize>| Graph::from_prufer(&seq).unwrap())
    })
}

fn tree_and_three() -> impl Strategy<Value = (Graph, [usize; 3])> {
    prufer_tree().prop_flat_map(|g| {
        let n = g.vertex_count();
        (Just(g), [1..=n, 1..=n, 1..=n])
    })
}

proptest! {
    #[test]
    fn distance_is_a_metric((g, [x, y, z]) in tree_and_three()) {
        prop_assert_eq!(g.dist(x, x), 0);
        prop_assert_eq!(g.dist(x, y), g.dist(y, x));
        prop_assert!(g.dist(x, z) <= g.dist(x, y) + g.dist(y, z));
        prop_assert_eq!(g.dist(x, y) == 0, x == y);
    }

    #[test]
    fn median_is_symmetric_and_on_all_geodesics((g, [x, y, z]) in tree_and_three()) {
        let m = g.median(x, y, z).unwrap();
        for (a, b, c) in [(x, z, y), (y, x, z), (y, z, x), (z, x, y), (z, y, x)] {
            prop_assert_eq!(g.median(a, b, c).unwrap(), m);
        }
        for (a, b) in [(x, y), (y, z), (x, z)] {
            prop_assert_eq!(g.dist(a, m) + g.dist(m, b), g.dist(a, b));
        }
    }

    #[test]
    fn steps_change_distance_by_one((g, [x, y, _]) in tree_and_three()) {
        let toward = g.step_toward(x, y);
        if x == y {
            prop_assert_eq!(toward, x);
        } else {
            prop_assert!(g.has_edge(x, toward));
            prop_assert_eq!(g.dist(toward, y) + 1, g.dist(x, y));
        }
    }

    #[test]
    fn tree_moves_are_legal((g, x) in tree_and_three(), mover in 1usize..=3) {
        let v = tree_move(&g, &x, mover);
        let here = x[mover - 1];
        prop_assert!(v == here || g.has_edge(here, v));
    }

    #[test]
    fn chain_payoffs_follow_capture_precedence((g, x) in tree_and_three()) {
        let spec = GameSpec::chain(g, 3, GAMMA).unwrap();
        let first = x[0] == x[1];
        let second = x[1] == x[2] && !first;
        let want = [
            i8::from(first),
            i8::from(second) - i8::from(first),
            -i8::from(second),
        ];
        prop_assert_eq!(spec.token_payoffs_at(&x), want.to_vec());
        prop_assert_eq!(spec.is_capture(&x), first || x[1] == x[2]);
        if spec.is_capture(&x) {
            let next = spec.transition(&State::new(x.to_vec(), 1), Action::Null).unwrap();
            prop_assert!(next.is_terminal());
        }
    }

    #[test]
    fn replay_reproduces_random_play((g, x) in tree_and_three(), seed in any::<u64>(), mover in 1usize..=3) {
        let spec = GameSpec::chain(g, 3, GAMMA).unwrap();
        let strategies: Vec<PlayStrategy> = (0..3u64)
            .map(|k| {
                let g = spec.graph_arc();
                PlayStrategy::rule(move |pos, p| {
                    let here = pos[p - 1];
                    let nb = g.neighbors(here);
                    let h = seed.wrapping_mul(6364136223846793005).wrapping_add(k + pos.iter().sum::<usize>() as u64);
                    let pick = (h >> 33) as usize % (nb.len() + 1);
                    if pick == nb.len() { here } else { nb[pick] }
                })
            })
            .collect();
        let s0 = State::new(x.to_vec(), mover);
        let h = simulate(&spec, &strategies, &s0).unwrap();
        prop_assert_eq!(replay(&spec, &s0, &h.actions).unwrap(), h.states.clone());
        prop_assert_eq!(h.capture_time.is_finite(), !h.truncated);
    }

    #[test]
    fn capture_time_inverts_discounting(t in 0usize..100, g in 0.5f64..0.99) {
        prop_assume!(g.powi(t as i32) > 1e-6);
        prop_assert_eq!(optimal_capture_time(&g.powi(t as i32), &g, 1e-12).unwrap(), CaptureTime::Finite(t));
        prop_assert_eq!(optimal_capture_time(&-g.powi(t as i32), &g, 1e-12).unwrap(), CaptureTime::Finite(t));
    }

    #[test]
    fn state_text_round_trips(x in proptest::collection::vec(1usize..50, 2..6), mover in 1usize..6) {
        let s = State::new(x, mover);
        prop_assert_eq!(s.to_string().parse::<State>().unwrap(), s);
    }

    #[test]
    fn trees_are_cop_win(g in prufer_tree()) {
        prop_assert!(gcr::copwin_check(g, GAMMA).unwrap());
    }
}

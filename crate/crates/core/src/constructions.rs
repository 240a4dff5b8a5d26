//! Constructive strategies for three-token chains and the built-in fixtures.

use std::sync::Arc;

use serde::Serialize;

use crate::engine::{discounted_payoff, simulate, Automaton, CaptureTime, History, Mode, PositionalProfile, Strategy};
use crate::error::{Error, Result};
use crate::game::{GameSpec, GeneralizedScheme, PayoffScheme, State, Token};
use crate::graph::{Graph, Vertex};
use crate::scalar::Scalar;
use crate::space::StateSpace;
use crate::zerosum::{optimal_placement, solve_exact, ZeroSumSolution};

/// Which player, if any, gained from the play.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaptureOutcome {
    /// Smallest player with a positive payoff, or 0.
    pub k: usize,
    /// Every player with a positive payoff.
    pub capturer_set: Vec<usize>,
    pub payoffs: Vec<f64>,
    pub capture_time: CaptureTime,
}

/// Plays `profile` from `s0` and classifies the result.
pub fn capture_function<T: Scalar>(spec: &GameSpec<T>, s0: &State, profile: &[Strategy]) -> Result<CaptureOutcome> {
    let h = simulate(spec, profile, s0)?;
    classify_history(spec, &h)
}

pub fn classify_history<T: Scalar>(spec: &GameSpec<T>, h: &History) -> Result<CaptureOutcome> {
    let q = discounted_payoff(spec, h)?;
    let capturer_set: Vec<usize> = (1..=q.len()).filter(|&n| q[n - 1] > T::zero()).collect();
    Ok(CaptureOutcome {
        k: capturer_set.first().copied().unwrap_or(0),
        capturer_set,
        payoffs: q.iter().map(Scalar::to_f64_lossy).collect(),
        capture_time: h.capture_time,
    })
}

fn require_chain3<T: Scalar>(spec: &GameSpec<T>) -> Result<()> {
    if spec.tokens() == 3 && *spec.scheme() == PayoffScheme::Chain {
        Ok(())
    } else {
        Err(Error::InvalidSpec {
            field: "scheme",
            message: "needs the three-token chain game".into(),
        })
    }
}

/// Moves for three collinear tokens with median `m`, one of them.
fn collinear_move(g: &Graph, x: [Vertex; 3], m: Vertex, mover: Token) -> Vertex {
    let [x1, x2, x3] = x;
    if m == x2 {
        // P2 sits between the others: it hunts P3 while P3 runs.
        match mover {
            1 => g.step_toward(x1, x2),
            2 => g.step_toward(x2, x3),
            _ => g.step_away(x3, x2),
        }
    } else if m == x1 {
        // P1 sits between: P2 flees toward its end and is caught.
        match mover {
            1 => g.step_toward(x1, x2),
            2 => g.step_away(x2, x1),
            _ => x3,
        }
    } else {
        // P3 sits between: it walks toward P1, staying on the line.
        match mover {
            1 => g.step_toward(x1, x2),
            2 => g.step_away(x2, x1),
            _ => g.step_toward(x3, x1),
        }
    }
}

/// Median chase on a tree: everyone closes in on the median of the three
/// positions, P2 and P3 waiting next to it until entering is safe; once
/// collinear the path rules take over.
pub fn tree_move(g: &Graph, positions: &[Vertex], mover: Token) -> Vertex {
    let x = [positions[0], positions[1], positions[2]];
    let m = g.tree_median(x[0], x[1], x[2]);
    if x.contains(&m) {
        return collinear_move(g, x, m, mover);
    }
    let d = |v: Vertex| g.dist(v, m);
    match mover {
        1 => g.step_toward(x[0], m),
        2 if d(x[1]) >= 2 || d(x[0]) >= 2 => g.step_toward(x[1], m),
        3 if d(x[2]) >= 2 || d(x[1]) >= 2 => g.step_toward(x[2], m),
        _ => x[mover - 1],
    }
}

/// Positional table of the collinear rules on a path.
pub fn path_profile<T: Scalar>(spec: &GameSpec<T>) -> Result<Arc<PositionalProfile>> {
    require_chain3(spec)?;
    if !spec.graph().classify().is_path {
        return Err(Error::NotAPath);
    }
    tabulate_tree_rule(spec)
}

/// Positional table of the median chase on a tree.
pub fn tree_profile<T: Scalar>(spec: &GameSpec<T>) -> Result<Arc<PositionalProfile>> {
    require_chain3(spec)?;
    if !spec.graph().is_tree() {
        return Err(Error::NotATree);
    }
    tabulate_tree_rule(spec)
}

fn tabulate_tree_rule<T: Scalar>(spec: &GameSpec<T>) -> Result<Arc<PositionalProfile>> {
    let space = StateSpace::new(spec)?;
    let g = spec.graph();
    Ok(Arc::new(PositionalProfile::tabulate(&space, |pos, mover| {
        tree_move(g, pos, mover)
    })))
}

/// Waits until a watched token moves, then reacts for the rest of the game.
struct Trigger {
    token: Token,
    graph: Arc<Graph>,
}

impl Automaton for Trigger {
    fn act(&self, mode: Mode, x: &[Vertex], _: Token) -> Vertex {
        let g = &self.graph;
        match (self.token, mode) {
            (_, 0) => x[self.token - 1],
            (1, _) => g.step_toward(x[0], x[1]),
            (2, _) => g.step_toward(x[1], x[2]),
            (_, 1) => g.step_toward(x[2], x[1]),
            _ => g.step_toward(x[2], x[0]),
        }
    }

    fn update(&self, mode: Mode, x: &[Vertex], mover: Token, chosen: Vertex) -> Mode {
        if mode != 0 || chosen == x[mover - 1] {
            return mode;
        }
        match (self.token, mover) {
            (1, 2) | (2, 3) => 1,
            (3, 1) => 1,
            (3, 2) => 2,
            _ => mode,
        }
    }
}

/// Stay-until-provoked strategies for P1 and P2 at the ends of a path and P3
/// in its middle: P1 chases P2 once P2 moves, P2 chases P3 once P3 moves, and
/// P3 heads for P2 if P1 moved first or for P1 if P2 did.
pub fn trigger_profile<T: Scalar>(spec: &GameSpec<T>, s0: &State) -> Result<Vec<Strategy>> {
    require_chain3(spec)?;
    let g = spec.graph_arc();
    if !g.classify().is_path {
        return Err(Error::NotAPath);
    }
    spec.validate_state(s0)?;
    let bad = |message: &str| Error::InvalidState {
        state: s0.to_string(),
        message: message.into(),
    };
    let x = s0.positions().ok_or_else(|| bad("needs a nonterminal state"))?;
    let is_end = |v: Vertex| g.degree(v) <= 1;
    if x[0] == x[1] || !is_end(x[0]) || !is_end(x[1]) {
        return Err(bad("P1 and P2 must occupy the two ends"));
    }
    if g.dist(x[0], x[2]) != g.dist(x[2], x[1]) {
        return Err(bad("P3 must occupy the middle vertex"));
    }
    Ok((1..=3)
        .map(|token| {
            Strategy::automaton(Trigger {
                token,
                graph: g.clone(),
            })
        })
        .collect())
}

/// A noncapturing equilibrium of the three-token chain on a graph where one
/// cop cannot win.
#[derive(Debug, Clone)]
pub struct NoncapturingNe<T> {
    pub spec: GameSpec<T>,
    pub s0: State,
    pub profile: Arc<PositionalProfile>,
}

/// P1 and P3 share a vertex and never move; P2 evades P1 with an optimal
/// escaping strategy of the cop-and-robber game. P2 could only capture P3 by
/// stepping onto P1 first.
pub fn noncapturing_ne_construction<T: Scalar>(g: impl Into<Arc<Graph>>, gamma: T) -> Result<NoncapturingNe<T>> {
    let g = g.into();
    let two = GameSpec::two_player(g.clone(), gamma.clone())?;
    let sol = solve_exact(&two)?;
    if optimal_placement(&sol)?.value > T::zero() {
        return Err(Error::Precondition("graph is cop-win".into()));
    }
    let x1 = 1;
    let x2 = g
        .vertices()
        .find(|&v| sol.capture_time(&State::new(vec![x1, v], 1)) == Some(CaptureTime::Infinite))
        .expect("a robber escapes every cop placement");
    let spec = GameSpec::chain(g, 3, gamma)?;
    let space = StateSpace::new(&spec)?;
    let profile = PositionalProfile::tabulate(&space, |x, mover| {
        if mover == 2 {
            robber_move(&sol, x[0], x[1])
        } else {
            x[mover - 1]
        }
    });
    Ok(NoncapturingNe {
        spec,
        s0: State::new(vec![x1, x2, x1], 1),
        profile: Arc::new(profile),
    })
}

fn cop_move<T: Scalar>(sol: &ZeroSumSolution<T>, cop: Vertex, robber: Vertex) -> Vertex {
    if cop == robber {
        return cop;
    }
    sol.action(&State::new(vec![cop, robber], 1)).expect("decision state")
}

fn robber_move<T: Scalar>(sol: &ZeroSumSolution<T>, cop: Vertex, robber: Vertex) -> Vertex {
    if cop == robber {
        return robber;
    }
    sol.action(&State::new(vec![cop, robber], 2)).expect("decision state")
}

/// Each token plays its optimal cop-and-robber strategy as if only its own
/// target or pursuer existed: P1 hunts P2, P2 hunts P3 and P3 flees P2.
pub fn extended_pairwise_profile<T: Scalar>(spec: &GameSpec<T>) -> Result<Arc<PositionalProfile>> {
    require_chain3(spec)?;
    let sol = solve_exact(&GameSpec::two_player(spec.graph_arc(), spec.discount().clone())?)?;
    let space = StateSpace::new(spec)?;
    Ok(Arc::new(PositionalProfile::tabulate(&space, |x, mover| match mover {
        1 => cop_move(&sol, x[0], x[1]),
        2 => cop_move(&sol, x[1], x[2]),
        _ => robber_move(&sol, x[1], x[2]),
    })))
}

/// P1 stays put while P2 and P3 play the optimal two-token chase between them.
pub fn pairwise_chase_profile<T: Scalar>(spec: &GameSpec<T>) -> Result<Arc<PositionalProfile>> {
    require_chain3(spec)?;
    let sol = solve_exact(&GameSpec::two_player(spec.graph_arc(), spec.discount().clone())?)?;
    let space = StateSpace::new(spec)?;
    Ok(Arc::new(PositionalProfile::tabulate(&space, |x, mover| match mover {
        1 => x[0],
        2 => cop_move(&sol, x[1], x[2]),
        _ => robber_move(&sol, x[1], x[2]),
    })))
}

/// The twelve-vertex graph: a path 1..10 with a spur 3-11-12.
pub fn fig1_graph() -> Graph {
    let mut edges: Vec<(Vertex, Vertex)> = (1..10).map(|v| (v, v + 1)).collect();
    edges.extend([(3, 11), (11, 12)]);
    Graph::new(12, &edges).expect("valid fixture")
}

#[derive(Debug, Clone)]
pub struct Fig1Fixture {
    pub graph: Arc<Graph>,
    pub s0: State,
    pub strategies: Vec<Strategy>,
}

/// Scripted play on the spur graph: P3 slips behind P1 and keeps P1 between
/// itself and P2, P2 keeps away from P1, and P1 holds its ground.
pub fn fig1_fixture() -> Fig1Fixture {
    let graph = Arc::new(fig1_graph());
    let (g2, g3) = (graph.clone(), graph.clone());
    let strategies = vec![
        Strategy::stay(),
        Strategy::rule(move |x, _| {
            if g2.dist(x[0], x[1]) <= 1 {
                g2.step_away(x[1], x[0])
            } else {
                x[1]
            }
        }),
        Strategy::rule(move |x, _| {
            let shielded = g3.dist(x[2], x[0]) + g3.dist(x[0], x[1]) == g3.dist(x[2], x[1]);
            if shielded {
                x[2]
            } else {
                g3.step_toward(x[2], x[0])
            }
        }),
    ];
    Fig1Fixture {
        graph,
        s0: State::new(vec![1, 12, 2], 3),
        strategies,
    }
}

/// Named built-in instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig5,
    Fig6Star,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig1, Preset::Fig2, Preset::Fig5, Preset::Fig6Star];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig5 => "fig5",
            Preset::Fig6Star => "fig6-star",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::InvalidSpec {
                field: "preset",
                message: format!("unknown preset {name:?}; expected fig1, fig2, fig5 or fig6-star"),
            })
    }

    pub fn graph(self) -> Graph {
        match self {
            Preset::Fig1 => fig1_graph(),
            Preset::Fig2 => Graph::path(5),
            Preset::Fig5 => Graph::path(6),
            Preset::Fig6Star => Graph::star(3),
        }
    }

    pub fn tokens(self) -> usize {
        match self {
            Preset::Fig5 => 4,
            _ => 3,
        }
    }

    pub fn scheme(self) -> PayoffScheme {
        match self {
            Preset::Fig6Star => PayoffScheme::Generalized(GeneralizedScheme::cyclic()),
            _ => PayoffScheme::Chain,
        }
    }

    pub fn positions(self) -> Vec<Vertex> {
        match self {
            Preset::Fig1 => vec![1, 12, 2],
            Preset::Fig2 => vec![1, 5, 3],
            Preset::Fig5 => vec![1, 3, 4, 5],
            Preset::Fig6Star => vec![2, 3, 4],
        }
    }

    /// Initial mover of the built-in state.
    pub fn default_mover(self) -> Token {
        match self {
            Preset::Fig1 => 3,
            Preset::Fig5 => 4,
            _ => 1,
        }
    }

    pub fn initial_state(self) -> State {
        State::new(self.positions(), self.default_mover())
    }

    pub fn spec<T: Scalar>(self, gamma: T) -> Result<GameSpec<T>> {
        GameSpec::new(self.graph(), self.tokens(), gamma, self.scheme())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3(g: Graph) -> GameSpec<f64> {
        GameSpec::chain(g, 3, 0.9f64).unwrap()
    }

    #[test]
    fn path_cases() {
        let spec = chain3(Graph::path(5));
        let p = path_profile(&spec).unwrap().strategies();
        let k = |x: [Vertex; 3]| capture_function(&spec, &State::new(x.to_vec(), 1), &p).unwrap();
        // P2 in the middle hunts P3.
        assert_eq!(k([1, 3, 5]).capturer_set, vec![2]);
        // P3 in the middle: P2 is caught.
        assert_eq!(k([1, 5, 3]).k, 1);
        // P1 in the middle: P2 is caught.
        assert_eq!(k([2, 1, 5]).k, 1);
        assert!(path_profile(&chain3(Graph::star(3))).is_err());
    }

    #[test]
    fn capture_function_without_capture() {
        let spec = chain3(Graph::path(5));
        let out = capture_function(
            &spec,
            &State::new(vec![1, 5, 3], 1),
            &[Strategy::stay(), Strategy::stay(), Strategy::stay()],
        )
        .unwrap();
        assert_eq!(out.k, 0);
        assert!(out.capturer_set.is_empty());
        assert_eq!(out.capture_time, CaptureTime::Infinite);
    }

    #[test]
    fn trigger_on_path_play_is_quiet() {
        let spec = chain3(Graph::path(5));
        let s0 = State::new(vec![1, 5, 3], 1);
        let p = trigger_profile(&spec, &s0).unwrap();
        let h = simulate(&spec, &p, &s0).unwrap();
        assert!(h.truncated);
        assert_eq!(h.states.len(), 4);
        assert!(trigger_profile(&spec, &State::new(vec![2, 5, 3], 1)).is_err());
        assert!(trigger_profile(&spec, &State::new(vec![1, 5, 2], 1)).is_err());
    }

    #[test]
    fn trigger_punishes_p2() {
        let spec = chain3(Graph::path(5));
        let s0 = State::new(vec![1, 5, 3], 2);
        let mut p = trigger_profile(&spec, &s0).unwrap();
        p[1] = Strategy::rule(|x, _| if x[1] == 5 { 4 } else { x[1] });
        let out = capture_function(&spec, &s0, &p).unwrap();
        assert_eq!(out.k, 1);
        assert!(out.payoffs[1] < 0.0);
    }

    #[test]
    fn trigger_p1_deviation_hands_p3_to_p2() {
        let spec = chain3(Graph::path(5));
        let s0 = State::new(vec![1, 5, 3], 1);
        let mut p = trigger_profile(&spec, &s0).unwrap();
        p[0] = Strategy::rule(|x, _| if x[0] == 1 { 2 } else { x[0] });
        let out = capture_function(&spec, &s0, &p).unwrap();
        assert_eq!(out.k, 2);
        assert_eq!(out.payoffs[0], 0.0);
    }

    #[test]
    fn noncapturing_on_c4() {
        let ne = noncapturing_ne_construction(Graph::cycle(4), 0.9).unwrap();
        assert_eq!(ne.s0, State::new(vec![1, 3, 1], 1));
        let out = capture_function(&ne.spec, &ne.s0, &ne.profile.strategies()).unwrap();
        assert_eq!(out.k, 0);
        assert!(matches!(
            noncapturing_ne_construction(Graph::path(4), 0.9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn fig1_evasion() {
        let f = fig1_fixture();
        assert_eq!((f.graph.vertex_count(), f.graph.edge_count()), (12, 11));
        let spec = chain3((*f.graph).clone());
        let h = simulate(&spec, &f.strategies, &f.s0).unwrap();
        assert_eq!(h.capture_time, CaptureTime::Infinite);
        assert!(h.truncated);
        let chase = pairwise_chase_profile(&spec).unwrap();
        let out = capture_function(&spec, &f.s0, &chase.strategies()).unwrap();
        assert_eq!(out.k, 2);
    }

    #[test]
    fn presets() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()).unwrap(), p);
            let spec = p.spec(0.9).unwrap();
            spec.validate_state(&p.initial_state()).unwrap();
        }
        assert!(Preset::from_name("fig3").is_err());
    }
}

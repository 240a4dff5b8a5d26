//! Strategies, deterministic play-outs and discounted payoffs.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::game::{Action, GameSpec, State, Token};
use crate::graph::Vertex;
use crate::scalar::Scalar;
use crate::space::{Indexer, StateSpace};

/// Internal memory of a finite automaton strategy.
pub type Mode = u32;

/// History-dependent strategy with a finite set of modes.
///
/// `act` is only called when the automaton's token is the mover at a
/// non-capture state. `update` observes every move, including its own.
pub trait Automaton: Send + Sync {
    fn initial_mode(&self) -> Mode {
        0
    }

    fn act(&self, mode: Mode, positions: &[Vertex], mover: Token) -> Vertex;

    fn update(&self, mode: Mode, positions: &[Vertex], mover: Token, chosen: Vertex) -> Mode;
}

type RuleFn = dyn Fn(&[Vertex], Token) -> Vertex + Send + Sync;

/// Mover action for every decision state of one game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionalProfile {
    indexer: Indexer,
    actions: Vec<Option<Vertex>>,
}

impl PositionalProfile {
    pub fn empty(indexer: Indexer) -> Self {
        PositionalProfile {
            indexer,
            actions: vec![None; indexer.len()],
        }
    }

    /// Tabulates a state-reactive rule over all decision states.
    pub fn tabulate(space: &StateSpace, mut rule: impl FnMut(&[Vertex], Token) -> Vertex) -> Self {
        let ix = space.indexer();
        let mut out = Self::empty(ix);
        let mut pos = Vec::new();
        for i in 0..space.len() {
            if space.is_decision(i) {
                ix.positions_into(i, &mut pos);
                out.actions[i] = Some(rule(&pos, ix.mover(i)));
            }
        }
        out
    }

    pub fn indexer(&self) -> Indexer {
        self.indexer
    }

    pub fn action(&self, idx: usize) -> Option<Vertex> {
        self.actions[idx]
    }

    pub fn action_at(&self, positions: &[Vertex], mover: Token) -> Option<Vertex> {
        self.actions[self.indexer.index_of(positions, mover)]
    }

    pub fn action_for(&self, s: &State) -> Option<Vertex> {
        self.indexer.index(s).and_then(|i| self.actions[i])
    }

    pub fn set(&mut self, idx: usize, v: Option<Vertex>) {
        self.actions[idx] = v;
    }

    /// `(index, action)` for every defined entry.
    pub fn entries(&self) -> impl Iterator<Item = (usize, Vertex)> + '_ {
        self.actions.iter().enumerate().filter_map(|(i, a)| a.map(|v| (i, v)))
    }

    /// One strategy per token, each reading this table.
    pub fn strategies(self: &Arc<Self>) -> Vec<Strategy> {
        (0..self.indexer.tokens())
            .map(|_| Strategy::Positional(self.clone()))
            .collect()
    }
}

#[derive(Clone)]
pub enum Strategy {
    /// Reads the mover's entry in a positional table.
    Positional(Arc<PositionalProfile>),
    /// Positional rule evaluated on the fly.
    Rule(Arc<RuleFn>),
    Automaton(Arc<dyn Automaton>),
}

impl fmt::Debug for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Positional(_) => f.write_str("Strategy::Positional"),
            Strategy::Rule(_) => f.write_str("Strategy::Rule"),
            Strategy::Automaton(_) => f.write_str("Strategy::Automaton"),
        }
    }
}

impl Strategy {
    /// Never moves.
    pub fn stay() -> Self {
        Strategy::rule(|pos, mover| pos[mover - 1])
    }

    pub fn rule(f: impl Fn(&[Vertex], Token) -> Vertex + Send + Sync + 'static) -> Self {
        Strategy::Rule(Arc::new(f))
    }

    pub fn automaton(a: impl Automaton + 'static) -> Self {
        Strategy::Automaton(Arc::new(a))
    }

    pub fn initial_mode(&self) -> Mode {
        match self {
            Strategy::Automaton(a) => a.initial_mode(),
            _ => 0,
        }
    }

    pub fn is_automaton(&self) -> bool {
        matches!(self, Strategy::Automaton(_))
    }

    /// Chosen vertex, or `None` when a positional table has no entry.
    pub fn act(&self, mode: Mode, positions: &[Vertex], mover: Token) -> Option<Vertex> {
        match self {
            Strategy::Positional(t) => t.action_at(positions, mover),
            Strategy::Rule(f) => Some(f(positions, mover)),
            Strategy::Automaton(a) => Some(a.act(mode, positions, mover)),
        }
    }

    pub fn update(&self, mode: Mode, positions: &[Vertex], mover: Token, chosen: Vertex) -> Mode {
        match self {
            Strategy::Automaton(a) => a.update(mode, positions, mover, chosen),
            _ => mode,
        }
    }
}

/// Number of turns until the first capture, or never.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaptureTime {
    Finite(usize),
    Infinite,
}

impl CaptureTime {
    pub fn finite(self) -> Option<usize> {
        match self {
            CaptureTime::Finite(t) => Some(t),
            CaptureTime::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, CaptureTime::Finite(_))
    }
}

impl fmt::Display for CaptureTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaptureTime::Finite(t) => write!(f, "{t}"),
            CaptureTime::Infinite => f.write_str("infinity"),
        }
    }
}

impl Serialize for CaptureTime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CaptureTime::Finite(t) => s.serialize_u64(*t as u64),
            CaptureTime::Infinite => s.serialize_str("infinity"),
        }
    }
}

impl<'de> Deserialize<'de> for CaptureTime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) if s == "infinity" => Ok(CaptureTime::Infinite),
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(|t| CaptureTime::Finite(t as usize))
                .ok_or_else(|| serde::de::Error::custom("capture time must be a nonnegative integer")),
            other => Err(serde::de::Error::custom(format!("bad capture time {other}"))),
        }
    }
}

/// A recorded play-out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct History {
    pub states: Vec<State>,
    /// `actions[t]` is the mover's action at `states[t]`.
    pub actions: Vec<Action>,
    pub capture_time: CaptureTime,
    /// True when play was cut at a repeated (state, modes) configuration.
    pub truncated: bool,
    /// First occurrence of the repeated configuration when truncated.
    pub cycle_start: Option<usize>,
}

impl History {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("history serializes")
    }

    /// States as nodes, moves as labelled edges.
    pub fn to_dot(&self) -> String {
        let mut ids: HashMap<&State, usize> = HashMap::new();
        let mut s = String::from("digraph trace {\n");
        for st in &self.states {
            let next = ids.len();
            let id = *ids.entry(st).or_insert(next);
            if id == next {
                let _ = writeln!(s, "  s{id} [label=\"{st}\"];");
            }
        }
        for (t, a) in self.actions.iter().enumerate() {
            let u = ids[&self.states[t]];
            let v = ids[&self.states[t + 1]];
            let who = self.states[t].mover().map(|m| format!("P{m}")).unwrap_or_default();
            let _ = writeln!(s, "  s{u} -> s{v} [label=\"t={t} {who}:{a}\"];");
        }
        s.push_str("}\n");
        s
    }
}

/// Default upper bound on play-out length.
pub const DEFAULT_STEP_LIMIT: usize = 10_000_000;

/// Plays `profile` (one strategy per token) from `s0`.
pub fn simulate<T: Scalar>(spec: &GameSpec<T>, profile: &[Strategy], s0: &State) -> Result<History> {
    simulate_with_limit(spec, profile, s0, DEFAULT_STEP_LIMIT)
}

pub fn simulate_with_limit<T: Scalar>(
    spec: &GameSpec<T>,
    profile: &[Strategy],
    s0: &State,
    max_steps: usize,
) -> Result<History> {
    spec.validate_state(s0)?;
    if s0.is_terminal() {
        return Err(Error::InvalidState {
            state: s0.to_string(),
            message: "play must start at a nonterminal state".into(),
        });
    }
    if profile.len() != spec.tokens() {
        return Err(Error::InvalidSpec {
            field: "profile",
            message: format!("expected {} strategies, got {}", spec.tokens(), profile.len()),
        });
    }
    let g = spec.graph();
    let mut modes: Vec<Mode> = profile.iter().map(Strategy::initial_mode).collect();
    let mut seen: HashMap<(State, Vec<Mode>), usize> = HashMap::new();
    let mut states = vec![s0.clone()];
    let mut actions = Vec::new();
    let mut capture_time = CaptureTime::Infinite;
    let mut cycle_start = None;
    loop {
        let t = states.len() - 1;
        let s = states[t].clone();
        let State::Nonterminal { positions, mover } = &s else {
            break;
        };
        if spec.is_capture(positions) {
            capture_time = CaptureTime::Finite(t);
            actions.push(Action::Null);
            states.push(State::Terminal);
            continue;
        }
        match seen.entry((s.clone(), modes.clone())) {
            std::collections::hash_map::Entry::Occupied(e) => {
                cycle_start = Some(*e.get());
                break;
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(t);
            }
        }
        if t >= max_steps {
            return Err(Error::StepLimit { steps: max_steps });
        }
        let p = *mover;
        let x = positions[p - 1];
        let chosen = profile[p - 1].act(modes[p - 1], positions, p);
        let v = match chosen {
            Some(v) if v == x || (v >= 1 && v <= g.vertex_count() && g.has_edge(x, v)) => v,
            other => {
                return Err(Error::IllegalAction {
                    state: s.to_string(),
                    token: p,
                    action: other.map_or("none".into(), |v| v.to_string()),
                })
            }
        };
        for (k, strat) in profile.iter().enumerate() {
            modes[k] = strat.update(modes[k], positions, p, v);
        }
        let mut next = positions.clone();
        next[p - 1] = v;
        actions.push(Action::Move(v));
        states.push(State::new(next, spec.next_mover(p)));
    }
    Ok(History {
        truncated: cycle_start.is_some(),
        states,
        actions,
        capture_time,
        cycle_start,
    })
}

/// Total discounted payoff per player.
///
/// Turn payoffs are nonzero only at the single capture state, so each player
/// receives `q(s_T) * gamma^T`, and exactly zero when no capture occurs.
pub fn discounted_payoff<T: Scalar>(spec: &GameSpec<T>, h: &History) -> Result<Vec<T>> {
    let inconsistent = |message: String| Error::InvalidState {
        state: h.states.first().map(|s| s.to_string()).unwrap_or_default(),
        message,
    };
    match h.capture_time {
        CaptureTime::Infinite => {
            if let Some(t) = h
                .states
                .iter()
                .position(|s| s.positions().is_some_and(|p| spec.is_capture(p)))
            {
                return Err(inconsistent(format!("history reports no capture but state {t} is one")));
            }
            Ok(vec![T::zero(); spec.players()])
        }
        CaptureTime::Finite(t) => {
            let s = h
                .states
                .get(t)
                .ok_or_else(|| inconsistent(format!("capture time {t} beyond history")))?;
            let pos = s
                .positions()
                .filter(|p| spec.is_capture(p))
                .ok_or_else(|| inconsistent(format!("state {t} is not a capture state")))?;
            let w = spec.discount().powu(t);
            Ok(spec
                .aggregate(&spec.token_payoffs_at(pos))
                .into_iter()
                .map(|q| T::from_int(q) * w.clone())
                .collect())
        }
    }
}

/// Replays recorded actions from `s0` through [`GameSpec::transition`].
pub fn replay<T: Scalar>(spec: &GameSpec<T>, s0: &State, actions: &[Action]) -> Result<Vec<State>> {
    let mut out = vec![s0.clone()];
    for &a in actions {
        let next = spec.transition(out.last().expect("nonempty"), a)?;
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn greedy_pair() -> Vec<Strategy> {
        let g = Arc::new(Graph::path(3));
        let g2 = g.clone();
        vec![
            Strategy::rule(move |pos, _| g.step_toward(pos[0], pos[1])),
            Strategy::rule(move |pos, _| g2.step_away(pos[1], pos[0])),
        ]
    }

    #[test]
    fn greedy_chase_on_p3() {
        let spec = GameSpec::two_player(Graph::path(3), 0.9f64).unwrap();
        let h = simulate(&spec, &greedy_pair(), &State::new(vec![1, 3], 1)).unwrap();
        assert_eq!(h.capture_time, CaptureTime::Finite(3));
        assert_eq!(
            h.actions,
            vec![Action::Move(2), Action::Move(3), Action::Move(3), Action::Null]
        );
        let q = discounted_payoff(&spec, &h).unwrap();
        assert!((q[0] - 0.729).abs() < 1e-12 && (q[1] + 0.729).abs() < 1e-12);
        assert_eq!(replay(&spec, &h.states[0], &h.actions).unwrap(), h.states);
    }

    #[test]
    fn capture_at_start() {
        let spec = GameSpec::two_player(Graph::path(3), 0.9f64).unwrap();
        let h = simulate(&spec, &greedy_pair(), &State::new(vec![2, 2], 2)).unwrap();
        assert_eq!(h.states, vec![State::new(vec![2, 2], 2), State::Terminal]);
        assert_eq!(h.capture_time, CaptureTime::Finite(0));
        assert_eq!(discounted_payoff(&spec, &h).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn antipodal_chase_on_c4_cycles() {
        let g = Arc::new(Graph::cycle(4));
        let (a, b) = (g.clone(), g.clone());
        let profile = vec![
            Strategy::rule(move |pos, _| a.step_toward(pos[0], pos[1])),
            Strategy::rule(move |pos, _| {
                // keep the antipodal vertex of the cop
                let cop = pos[0];
                *b.neighbors(pos[1])
                    .iter()
                    .chain(std::iter::once(&pos[1]))
                    .find(|&&w| b.dist(w, cop) == 2)
                    .unwrap_or(&pos[1])
            }),
        ];
        let spec = GameSpec::two_player(g, 0.9f64).unwrap();
        let h = simulate(&spec, &profile, &State::new(vec![1, 3], 1)).unwrap();
        assert_eq!(h.capture_time, CaptureTime::Infinite);
        assert!(h.truncated);
        assert!(h.cycle_start.is_some());
        assert_eq!(discounted_payoff(&spec, &h).unwrap(), vec![0.0, 0.0]);
        let json = h.to_json();
        assert_eq!(json["capture_time"], "infinity");
        assert!(h.to_dot().starts_with("digraph"));
    }

    #[test]
    fn illegal_actions_are_reported() {
        let spec = GameSpec::two_player(Graph::path(3), 0.9f64).unwrap();
        let profile = vec![Strategy::rule(|_, _| 3), Strategy::stay()];
        let err = simulate(&spec, &profile, &State::new(vec![1, 3], 1)).unwrap_err();
        assert_eq!(
            err,
            Error::IllegalAction {
                state: "1,3,1".into(),
                token: 1,
                action: "3".into()
            }
        );
        let table = Arc::new(PositionalProfile::empty(Indexer::new(3, 2, 100).unwrap()));
        let err = simulate(&spec, &table.strategies(), &State::new(vec![1, 3], 1)).unwrap_err();
        assert!(matches!(err, Error::IllegalAction { token: 1, .. }));
    }

    #[test]
    fn payoff_rejects_inconsistent_histories() {
        let spec = GameSpec::two_player(Graph::path(3), 0.9f64).unwrap();
        let h = History {
            states: vec![State::new(vec![1, 3], 1)],
            actions: vec![],
            capture_time: CaptureTime::Finite(0),
            truncated: false,
            cycle_start: None,
        };
        assert!(discounted_payoff(&spec, &h).is_err());
    }

    struct Counter;

    impl Automaton for Counter {
        fn act(&self, _: Mode, pos: &[Vertex], mover: Token) -> Vertex {
            pos[mover - 1]
        }

        fn update(&self, mode: Mode, _: &[Vertex], _: Token, _: Vertex) -> Mode {
            (mode + 1) % 5
        }
    }

    #[test]
    fn cycle_detection_includes_modes() {
        let spec = GameSpec::two_player(Graph::path(3), 0.9f64).unwrap();
        let profile = vec![Strategy::automaton(Counter), Strategy::stay()];
        let h = simulate(&spec, &profile, &State::new(vec![1, 3], 1)).unwrap();
        // The state repeats after 2 turns but the counter needs 10 turns to realign
        // with the same mover.
        assert_eq!(h.cycle_start, Some(0));
        assert_eq!(h.states.len(), 11);
    }
}

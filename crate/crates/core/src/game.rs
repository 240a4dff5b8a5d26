//! States, actions, transitions and turn payoffs.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::scalar::Scalar;
use crate::space::StateSpace;

pub type Token = usize;

/// Default bound on the number of enumerated states.
pub const DEFAULT_STATE_CAP: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum State {
    Nonterminal { positions: Vec<Vertex>, mover: Token },
    Terminal,
}

impl State {
    pub fn new(positions: Vec<Vertex>, mover: Token) -> Self {
        State::Nonterminal { positions, mover }
    }

    pub fn positions(&self) -> Option<&[Vertex]> {
        match self {
            State::Nonterminal { positions, .. } => Some(positions),
            State::Terminal => None,
        }
    }

    pub fn mover(&self) -> Option<Token> {
        match self {
            State::Nonterminal { mover, .. } => Some(*mover),
            State::Terminal => None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, State::Terminal)
    }
}

/// Renders as `v1,...,vN,mover` or `terminal`.
impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Terminal => f.write_str("terminal"),
            State::Nonterminal { positions, mover } => {
                for p in positions {
                    write!(f, "{p},")?;
                }
                write!(f, "{mover}")
            }
        }
    }
}

impl FromStr for State {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "terminal" {
            return Ok(State::Terminal);
        }
        let bad = || Error::InvalidState {
            state: s.to_string(),
            message: "expected comma-separated positions followed by the mover".into(),
        };
        let nums = t
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        if nums.len() < 2 {
            return Err(bad());
        }
        let (positions, mover) = nums.split_at(nums.len() - 1);
        Ok(State::new(positions.to_vec(), mover[0]))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StateRepr {
    Terminal(String),
    Nonterminal { positions: Vec<Vertex>, mover: Token },
}

impl Serialize for State {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            State::Terminal => StateRepr::Terminal("terminal".into()).serialize(s),
            State::Nonterminal { positions, mover } => StateRepr::Nonterminal {
                positions: positions.clone(),
                mover: *mover,
            }
            .serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match StateRepr::deserialize(d)? {
            StateRepr::Terminal(t) if t == "terminal" => Ok(State::Terminal),
            StateRepr::Terminal(t) => Err(serde::de::Error::custom(format!("unknown state {t:?}"))),
            StateRepr::Nonterminal { positions, mover } => Ok(State::new(positions, mover)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Move(Vertex),
    /// The null move available at capture states and the terminal state.
    Null,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Move(v) => write!(f, "{v}"),
            Action::Null => f.write_str("null"),
        }
    }
}

impl Serialize for Action {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Action::Move(v) => s.serialize_u64(*v as u64),
            Action::Null => s.serialize_str("null"),
        }
    }
}

/// Target and pursuer sets per token, 1-indexed tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedScheme {
    targets: Vec<Vec<Token>>,
    pursuers: Vec<Vec<Token>>,
    penalty_dominates: bool,
}

impl GeneralizedScheme {
    /// `targets[n - 1]` lists the tokens token `n` captures; pursuers are
    /// derived as the inverse relation.
    pub fn from_targets(targets: Vec<Vec<Token>>) -> Self {
        let n = targets.len();
        let mut pursuers = vec![Vec::new(); n];
        for (i, ts) in targets.iter().enumerate() {
            for &m in ts {
                if (1..=n).contains(&m) {
                    pursuers[m - 1].push(i + 1);
                }
            }
        }
        for p in pursuers.iter_mut() {
            p.sort_unstable();
        }
        GeneralizedScheme {
            targets,
            pursuers,
            penalty_dominates: true,
        }
    }

    pub fn new(targets: Vec<Vec<Token>>, pursuers: Vec<Vec<Token>>) -> Self {
        GeneralizedScheme {
            targets,
            pursuers,
            penalty_dominates: true,
        }
    }

    /// Three tokens chasing each other in a ring: 1 chases 2, 2 chases 3,
    /// 3 chases 1.
    pub fn cyclic() -> Self {
        Self::from_targets(vec![vec![2], vec![3], vec![1]])
    }

    /// When false, a token that is simultaneously capturing and captured
    /// receives +1 instead of -1.
    pub fn with_penalty_dominates(mut self, flag: bool) -> Self {
        self.penalty_dominates = flag;
        self
    }

    pub fn targets(&self, token: Token) -> &[Token] {
        &self.targets[token - 1]
    }

    pub fn pursuers(&self, token: Token) -> &[Token] {
        &self.pursuers[token - 1]
    }

    pub fn penalty_dominates(&self) -> bool {
        self.penalty_dominates
    }

    fn validate(&self, tokens: usize) -> Result<()> {
        if self.targets.len() != tokens || self.pursuers.len() != tokens {
            return Err(Error::InvalidSpec {
                field: "scheme",
                message: format!("target/pursuer sets must be given for all {tokens} tokens"),
            });
        }
        for n in 1..=tokens {
            for &m in self.targets(n).iter().chain(self.pursuers(n)) {
                if m == 0 || m > tokens {
                    return Err(Error::InvalidSpec {
                        field: "scheme",
                        message: format!("token {n} references unknown token {m}"),
                    });
                }
                if m == n {
                    return Err(Error::InvalidSpec {
                        field: "scheme",
                        message: format!("token {n} cannot target or pursue itself"),
                    });
                }
            }
            for &m in self.targets(n) {
                if !self.pursuers(m).contains(&n) {
                    return Err(Error::InvalidSpec {
                        field: "scheme",
                        message: format!("token {m} is a target of {n} but {n} is not its pursuer"),
                    });
                }
            }
            for &m in self.pursuers(n) {
                if !self.targets(m).contains(&n) {
                    return Err(Error::InvalidSpec {
                        field: "scheme",
                        message: format!("token {m} pursues {n} but {n} is not its target"),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PayoffScheme {
    /// Cop (token 1) and robber (token 2).
    TwoPlayer,
    /// Token n chases token n+1.
    Chain,
    Generalized(GeneralizedScheme),
}

/// How token payoffs combine into player payoffs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Aggregation {
    /// Each player receives the sum of its tokens' payoffs.
    Sum,
    /// Player 1 receives the summed payoff of `protagonist` tokens, player 2
    /// its negation.
    ZeroSum { protagonist: Vec<Token> },
}

#[derive(Debug, Clone)]
pub struct GameSpec<T> {
    graph: Arc<Graph>,
    tokens: usize,
    discount: T,
    scheme: PayoffScheme,
    controllers: Vec<usize>,
    players: usize,
    aggregation: Aggregation,
    state_cap: usize,
}

impl<T: Scalar> GameSpec<T> {
    /// One player per token.
    pub fn new(graph: impl Into<Arc<Graph>>, tokens: usize, discount: T, scheme: PayoffScheme) -> Result<Self> {
        if tokens < 2 {
            return Err(Error::InvalidSpec {
                field: "tokens",
                message: format!("need at least 2 tokens, got {tokens}"),
            });
        }
        if !(discount > T::zero() && discount < T::one()) {
            return Err(Error::InvalidSpec {
                field: "gamma",
                message: format!("discount must lie strictly inside (0,1), got {discount}"),
            });
        }
        match &scheme {
            PayoffScheme::TwoPlayer if tokens != 2 => {
                return Err(Error::InvalidSpec {
                    field: "scheme",
                    message: "the two-player scheme needs exactly 2 tokens".into(),
                })
            }
            PayoffScheme::Generalized(g) => g.validate(tokens)?,
            _ => {}
        }
        Ok(GameSpec {
            graph: graph.into(),
            tokens,
            discount,
            scheme,
            controllers: (1..=tokens).collect(),
            players: tokens,
            aggregation: Aggregation::Sum,
            state_cap: DEFAULT_STATE_CAP,
        })
    }

    pub fn two_player(graph: impl Into<Arc<Graph>>, discount: T) -> Result<Self> {
        Self::new(graph, 2, discount, PayoffScheme::TwoPlayer)
    }

    pub fn chain(graph: impl Into<Arc<Graph>>, tokens: usize, discount: T) -> Result<Self> {
        Self::new(graph, tokens, discount, PayoffScheme::Chain)
    }

    pub fn cyclic(graph: impl Into<Arc<Graph>>, discount: T) -> Result<Self> {
        Self::new(
            graph,
            3,
            discount,
            PayoffScheme::Generalized(GeneralizedScheme::cyclic()),
        )
    }

    /// Assigns tokens to players (`controllers[token - 1]`, 1-indexed players).
    pub fn with_controllers(mut self, controllers: Vec<usize>) -> Result<Self> {
        if controllers.len() != self.tokens {
            return Err(Error::InvalidSpec {
                field: "controllers",
                message: format!("expected {} entries, got {}", self.tokens, controllers.len()),
            });
        }
        let players = controllers.iter().copied().max().unwrap_or(0);
        for p in 1..=players {
            if !controllers.contains(&p) {
                return Err(Error::InvalidSpec {
                    field: "controllers",
                    message: format!("player {p} controls no token"),
                });
            }
        }
        if controllers.contains(&0) {
            return Err(Error::InvalidSpec {
                field: "controllers",
                message: "players are numbered from 1".into(),
            });
        }
        self.controllers = controllers;
        self.players = players;
        if let Aggregation::ZeroSum { .. } = self.aggregation {
            if players != 2 {
                self.aggregation = Aggregation::Sum;
            }
        }
        Ok(self)
    }

    pub fn with_state_cap(mut self, cap: usize) -> Self {
        self.state_cap = cap;
        self
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn graph_arc(&self) -> Arc<Graph> {
        self.graph.clone()
    }

    pub fn tokens(&self) -> usize {
        self.tokens
    }

    pub fn discount(&self) -> &T {
        &self.discount
    }

    pub fn scheme(&self) -> &PayoffScheme {
        &self.scheme
    }

    pub fn controllers(&self) -> &[usize] {
        &self.controllers
    }

    pub fn controller(&self, token: Token) -> usize {
        self.controllers[token - 1]
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn aggregation(&self) -> &Aggregation {
        &self.aggregation
    }

    pub fn state_cap(&self) -> usize {
        self.state_cap
    }

    pub fn tokens_of(&self, player: usize) -> Vec<Token> {
        (1..=self.tokens).filter(|&t| self.controller(t) == player).collect()
    }

    /// True when there are two players whose payoffs always cancel.
    pub fn is_zero_sum(&self) -> bool {
        if self.players != 2 {
            return false;
        }
        match (&self.aggregation, &self.scheme) {
            (Aggregation::ZeroSum { .. }, _) => true,
            (Aggregation::Sum, PayoffScheme::TwoPlayer | PayoffScheme::Chain) => self.tokens == 2,
            _ => false,
        }
    }

    pub fn check_token(&self, token: Token) -> Result<()> {
        if token == 0 || token > self.tokens {
            Err(Error::InvalidToken {
                token,
                count: self.tokens,
            })
        } else {
            Ok(())
        }
    }

    pub fn check_player(&self, player: usize) -> Result<()> {
        if player == 0 || player > self.players {
            Err(Error::InvalidPlayer {
                player,
                count: self.players,
            })
        } else {
            Ok(())
        }
    }

    pub fn validate_state(&self, s: &State) -> Result<()> {
        let State::Nonterminal { positions, mover } = s else {
            return Ok(());
        };
        let invalid = |message: String| Error::InvalidState {
            state: s.to_string(),
            message,
        };
        if positions.len() != self.tokens {
            return Err(invalid(format!(
                "expected {} positions, got {}",
                self.tokens,
                positions.len()
            )));
        }
        if *mover == 0 || *mover > self.tokens {
            return Err(invalid(format!("mover {mover} outside 1..={}", self.tokens)));
        }
        for &p in positions {
            if p == 0 || p > self.graph.vertex_count() {
                return Err(invalid(format!("vertex {p} not in graph")));
            }
        }
        Ok(())
    }

    /// Token indices n with the state in the n-th capture set.
    pub fn capture_memberships(&self, positions: &[Vertex]) -> Vec<Token> {
        match &self.scheme {
            PayoffScheme::TwoPlayer | PayoffScheme::Chain => {
                (1..self.tokens).filter(|&n| positions[n - 1] == positions[n]).collect()
            }
            PayoffScheme::Generalized(g) => (1..=self.tokens)
                .filter(|&n| g.targets(n).iter().any(|&m| positions[m - 1] == positions[n - 1]))
                .collect(),
        }
    }

    pub fn is_capture(&self, positions: &[Vertex]) -> bool {
        match &self.scheme {
            PayoffScheme::TwoPlayer | PayoffScheme::Chain => positions.windows(2).any(|w| w[0] == w[1]),
            PayoffScheme::Generalized(_) => !self.capture_memberships(positions).is_empty(),
        }
    }

    /// Integer turn payoffs per token at a nonterminal configuration.
    pub fn token_payoffs_at(&self, positions: &[Vertex]) -> Vec<i8> {
        let n = self.tokens;
        match &self.scheme {
            PayoffScheme::TwoPlayer => {
                let q = i8::from(positions[0] == positions[1]);
                vec![q, -q]
            }
            PayoffScheme::Chain => {
                // in_set(k): configuration lies in capture set k (defined for 1 <= k < N)
                let in_set = |k: usize| k >= 1 && k < n && positions[k - 1] == positions[k];
                (1..=n)
                    .map(|t| {
                        if in_set(t - 1) && !(t >= 2 && in_set(t - 2)) {
                            -1
                        } else if in_set(t) && !in_set(t - 1) {
                            1
                        } else {
                            0
                        }
                    })
                    .collect()
            }
            PayoffScheme::Generalized(g) => (1..=n)
                .map(|t| {
                    let x = positions[t - 1];
                    let plus = g.targets(t).iter().any(|&m| positions[m - 1] == x);
                    let minus = g.pursuers(t).iter().any(|&m| positions[m - 1] == x);
                    match (plus, minus) {
                        (true, true) if g.penalty_dominates() => -1,
                        (true, _) => 1,
                        (false, true) => -1,
                        (false, false) => 0,
                    }
                })
                .collect(),
        }
    }

    /// Turn payoffs per token; zero at the terminal state.
    pub fn turn_payoffs(&self, s: &State) -> Result<Vec<T>> {
        self.validate_state(s)?;
        Ok(match s {
            State::Terminal => vec![T::zero(); self.tokens],
            State::Nonterminal { positions, .. } => self
                .token_payoffs_at(positions)
                .into_iter()
                .map(|q| T::from_int(i32::from(q)))
                .collect(),
        })
    }

    /// Combines token payoffs into player payoffs.
    pub fn aggregate<Q: Copy + Into<i32>>(&self, token_q: &[Q]) -> Vec<i32> {
        match &self.aggregation {
            Aggregation::Sum => {
                let mut out = vec![0; self.players];
                for (t, &q) in token_q.iter().enumerate() {
                    out[self.controllers[t] - 1] += q.into();
                }
                out
            }
            Aggregation::ZeroSum { protagonist } => {
                let q: i32 = protagonist.iter().map(|&t| token_q[t - 1].into()).sum();
                vec![q, -q]
            }
        }
    }

    pub fn player_payoffs(&self, s: &State) -> Result<Vec<T>> {
        self.validate_state(s)?;
        Ok(match s {
            State::Terminal => vec![T::zero(); self.players],
            State::Nonterminal { positions, .. } => self
                .aggregate(&self.token_payoffs_at(positions))
                .into_iter()
                .map(T::from_int)
                .collect(),
        })
    }

    pub fn action_set(&self, s: &State, token: Token) -> Result<Vec<Action>> {
        self.check_token(token)?;
        self.validate_state(s)?;
        Ok(match s {
            State::Terminal => vec![Action::Null],
            State::Nonterminal { positions, mover } => {
                if self.is_capture(positions) {
                    vec![Action::Null]
                } else if token == *mover {
                    self.graph
                        .closed_nbhd(positions[token - 1])
                        .into_iter()
                        .map(Action::Move)
                        .collect()
                } else {
                    vec![Action::Move(positions[token - 1])]
                }
            }
        })
    }

    pub fn next_mover(&self, mover: Token) -> Token {
        mover % self.tokens + 1
    }

    /// Applies the mover's action.
    pub fn transition(&self, s: &State, a: Action) -> Result<State> {
        self.validate_state(s)?;
        let illegal = |token: usize| Error::IllegalAction {
            state: s.to_string(),
            token,
            action: a.to_string(),
        };
        match s {
            State::Terminal => match a {
                Action::Null => Ok(State::Terminal),
                Action::Move(_) => Err(illegal(0)),
            },
            State::Nonterminal { positions, mover } => {
                if self.is_capture(positions) {
                    return match a {
                        Action::Null => Ok(State::Terminal),
                        Action::Move(_) => Err(illegal(*mover)),
                    };
                }
                let Action::Move(v) = a else {
                    return Err(illegal(*mover));
                };
                let x = positions[*mover - 1];
                if v == 0 || v > self.graph.vertex_count() || (v != x && !self.graph.has_edge(x, v)) {
                    return Err(illegal(*mover));
                }
                let mut next = positions.clone();
                next[*mover - 1] = v;
                Ok(State::new(next, self.next_mover(*mover)))
            }
        }
    }

    /// All nonterminal states in lexicographic order (positions, then mover),
    /// followed by the terminal state.
    pub fn enumerate_states(&self) -> Result<Vec<State>> {
        let space = StateSpace::new(self)?;
        Ok((0..space.len()).map(|i| space.state(i)).collect())
    }

    /// The auxiliary zero-sum game of `player` against a coalition of all
    /// other tokens.
    pub fn aux_game(&self, player: usize) -> Result<GameSpec<T>> {
        self.check_player(player)?;
        let protagonist = self.tokens_of(player);
        let controllers = (1..=self.tokens)
            .map(|t| if self.controller(t) == player { 1 } else { 2 })
            .collect();
        Ok(GameSpec {
            graph: self.graph.clone(),
            tokens: self.tokens,
            discount: self.discount.clone(),
            scheme: self.scheme.clone(),
            controllers,
            players: 2,
            aggregation: Aggregation::ZeroSum { protagonist },
            state_cap: self.state_cap,
        })
    }
}

/// Free-function form of [`GameSpec::aux_game`].
pub fn build_aux_game<T: Scalar>(spec: &GameSpec<T>, player: usize) -> Result<GameSpec<T>> {
    spec.aux_game(player)
}

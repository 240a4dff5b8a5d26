//! Positional Nash equilibria of N-player games, their certification by
//! one-shot deviations, and exact best responses against fixed strategies.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::engine::{Automaton, CaptureTime, Mode, PositionalProfile, Strategy};
use crate::error::{Error, Result};
use crate::game::{GameSpec, State, Token};
use crate::graph::Vertex;
use crate::json::state_key;
use crate::retro::{DecisionGraph, Outcome, Owner};
use crate::scalar::Scalar;
use crate::space::{Indexer, StateSpace};

/// Discounted value of every player at every state.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable<T> {
    indexer: Indexer,
    players: usize,
    u: Vec<T>,
}

impl<T: Scalar> ValueTable<T> {
    pub fn zeros(indexer: Indexer, players: usize) -> Self {
        ValueTable {
            indexer,
            players,
            u: vec![T::zero(); indexer.len() * players],
        }
    }

    pub fn indexer(&self) -> Indexer {
        self.indexer
    }

    pub fn players(&self) -> usize {
        self.players
    }

    /// Value of `player` (1-indexed) at a state index.
    pub fn get(&self, idx: usize, player: usize) -> &T {
        &self.u[idx * self.players + player - 1]
    }

    pub fn set(&mut self, idx: usize, player: usize, value: T) {
        self.u[idx * self.players + player - 1] = value;
    }

    /// All players' values at a state index.
    pub fn row(&self, idx: usize) -> &[T] {
        &self.u[idx * self.players..(idx + 1) * self.players]
    }

    pub fn at(&self, s: &State) -> Option<&[T]> {
        self.indexer.index(s).map(|i| self.row(i))
    }

    pub fn to_json(&self) -> Value {
        let map: Map<String, Value> = (0..self.indexer.len())
            .map(|i| {
                let row = self.row(i).iter().map(|x| Value::from(x.to_f64_lossy())).collect();
                (state_key(&self.indexer.state(i)), Value::Array(row))
            })
            .collect();
        Value::Object(map)
    }
}

/// A profitable one-shot deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub state: State,
    pub token: Token,
    pub player: usize,
    pub prescribed: Vertex,
    pub better: Vertex,
    pub gain: f64,
}

/// A state where the values disagree with the profile's own continuation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inconsistency {
    pub state: State,
    pub player: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub passed: bool,
    pub max_residual: f64,
    pub max_gain: f64,
    pub violations: Vec<Violation>,
    pub inconsistencies: Vec<Inconsistency>,
}

/// Shared per-game data for the solvers below.
struct Ctx<'a, T> {
    spec: &'a GameSpec<T>,
    space: StateSpace,
    players: usize,
    /// Player payoffs at every state, flattened like a value table.
    payoff: Vec<i32>,
}

impl<'a, T: Scalar> Ctx<'a, T> {
    fn new(spec: &'a GameSpec<T>) -> Result<Self> {
        let space = StateSpace::new(spec)?;
        let players = spec.players();
        let mut payoff = vec![0; space.len() * players];
        for i in 0..space.len() {
            if space.is_capture(i) {
                payoff[i * players..(i + 1) * players].copy_from_slice(&spec.aggregate(space.token_payoffs(i)));
            }
        }
        Ok(Ctx {
            spec,
            space,
            players,
            payoff,
        })
    }

    fn player_of(&self, idx: usize) -> usize {
        self.spec.controller(self.space.mover(idx))
    }

    /// Successor of every state under the profile.
    fn successors(&self, profile: &PositionalProfile) -> Result<Vec<usize>> {
        let sp = &self.space;
        if profile.indexer() != sp.indexer() {
            return Err(Error::InvalidSpec {
                field: "profile",
                message: "profile belongs to a different game".into(),
            });
        }
        (0..sp.len())
            .map(|i| {
                if !sp.is_decision(i) {
                    return Ok(sp.terminal());
                }
                let a = profile.action(i);
                a.and_then(|v| sp.moves(i).find(|&(w, _)| w == v).map(|(_, j)| j))
                    .ok_or_else(|| Error::IllegalAction {
                        state: sp.state(i).to_string(),
                        token: sp.mover(i),
                        action: a.map_or("none".into(), |v| v.to_string()),
                    })
            })
            .collect()
    }

    /// Exact values of a positional profile: play follows a functional graph,
    /// so each state either reaches a capture state after `k` steps and earns
    /// `gamma^k` times its payoff, or enters a cycle and earns nothing.
    fn evaluate(&self, profile: &PositionalProfile) -> Result<ValueTable<T>> {
        #[derive(Clone, Copy)]
        enum Res {
            Unknown,
            Active,
            Hit(usize, usize),
            Never,
        }
        let sp = &self.space;
        let next = self.successors(profile)?;
        let mut res = vec![Res::Unknown; sp.len()];
        let mut stack = Vec::new();
        for start in 0..sp.len() {
            let mut cur = start;
            let mut r = loop {
                match res[cur] {
                    Res::Unknown if sp.is_capture(cur) => {
                        res[cur] = Res::Hit(cur, 0);
                        break res[cur];
                    }
                    Res::Unknown if cur == sp.terminal() => {
                        res[cur] = Res::Never;
                        break Res::Never;
                    }
                    Res::Unknown => {
                        res[cur] = Res::Active;
                        stack.push(cur);
                        cur = next[cur];
                    }
                    Res::Active => break Res::Never,
                    done => break done,
                }
            };
            while let Some(i) = stack.pop() {
                r = match r {
                    Res::Hit(c, k) => Res::Hit(c, k + 1),
                    other => other,
                };
                res[i] = r;
            }
        }
        let mut powers = vec![T::one()];
        let mut table = ValueTable::zeros(sp.indexer(), self.players);
        for (i, r) in res.iter().enumerate() {
            if let Res::Hit(c, k) = *r {
                while powers.len() <= k {
                    let p = powers.last().expect("nonempty").clone() * self.spec.discount().clone();
                    powers.push(p);
                }
                for m in 1..=self.players {
                    let q = self.payoff[c * self.players + m - 1];
                    table.set(i, m, T::from_int(q) * powers[k].clone());
                }
            }
        }
        Ok(table)
    }

    /// Lowest move whose successor value for the mover's player is within
    /// `tol` of the best.
    fn greedy_at(&self, u: &ValueTable<T>, i: usize, tol: &T) -> (Vertex, T) {
        let n = self.player_of(i);
        let vals: Vec<(Vertex, &T)> = self.space.moves(i).map(|(a, j)| (a, u.get(j, n))).collect();
        let best = vals
            .iter()
            .map(|x| x.1)
            .fold(vals[0].1, |b, x| if x > b { x } else { b });
        let pick = vals
            .iter()
            .find(|(_, x)| (*x).clone() >= best.clone() - tol.clone())
            .expect("best is attained")
            .0;
        (pick, best.clone())
    }

    fn greedy(&self, u: &ValueTable<T>, tol: &T) -> PositionalProfile {
        let mut out = PositionalProfile::empty(self.space.indexer());
        for i in 0..self.space.len() {
            if self.space.is_decision(i) {
                out.set(i, Some(self.greedy_at(u, i, tol).0));
            }
        }
        out
    }

    /// One synchronous sweep of the coupled system; the mover's player picks
    /// its greedy action and every player inherits that continuation.
    fn sweep(&self, u: &ValueTable<T>, tol: &T, out: &mut ValueTable<T>) {
        let gamma = self.spec.discount();
        for i in 0..self.space.len() {
            if self.space.is_decision(i) {
                let a = self.greedy_at(u, i, tol).0;
                let j = self.space.indexer().successor(i, a);
                for m in 1..=self.players {
                    out.set(i, m, gamma.clone() * u.get(j, m).clone());
                }
            } else {
                for m in 1..=self.players {
                    out.set(i, m, T::from_int(self.payoff[i * self.players + m - 1]));
                }
            }
        }
    }

    /// Coupled value iteration from `start`; with `damped`, each iterate is
    /// averaged with its predecessor. Returns the last iterate and whether the
    /// stopping rule was met.
    fn iterate(&self, start: ValueTable<T>, tol: &T, budget: usize, damped: bool) -> (ValueTable<T>, bool, usize) {
        let gamma = self.spec.discount().clone();
        let stop = tol.clone() * (T::one() - gamma.clone()) / (T::from_int(2) * gamma);
        let half = T::one() / T::from_int(2);
        let mut u = start;
        let mut next = u.clone();
        for k in 1..=budget {
            self.sweep(&u, tol, &mut next);
            if damped {
                for (x, y) in next.u.iter_mut().zip(&u.u) {
                    *x = half.clone() * (x.clone() + y.clone());
                }
            }
            let change = sup_diff(&u.u, &next.u);
            std::mem::swap(&mut u, &mut next);
            if change < stop {
                return (u, true, k);
            }
        }
        (u, false, budget)
    }

    /// Profitable one-shot deviations of `profile` against values `u`, with the
    /// best alternative (lowest vertex) and its gain.
    fn deviations(&self, profile: &PositionalProfile, u: &ValueTable<T>, tol: &T) -> Vec<(usize, Vertex, T)> {
        let mut out = Vec::new();
        for i in 0..self.space.len() {
            if !self.space.is_decision(i) {
                continue;
            }
            let n = self.player_of(i);
            let a = profile.action(i).expect("profile is total");
            let on = u.get(self.space.indexer().successor(i, a), n).clone();
            let (better, best) = self.greedy_at(u, i, &T::zero());
            let gain = self.spec.discount().clone() * (best - on);
            if gain > *tol {
                out.push((i, better, gain));
            }
        }
        out
    }
}

fn sup_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.clone() - y.clone()).abs())
        .fold(T::zero(), |m, d| if d > m { d } else { m })
}

/// Exact discounted values of a positional profile at every state.
pub fn evaluate_profile<T: Scalar>(spec: &GameSpec<T>, profile: &PositionalProfile) -> Result<ValueTable<T>> {
    Ctx::new(spec)?.evaluate(profile)
}

/// Checks the fixed-point system of a positional equilibrium: values must be
/// consistent with the profile's own continuation everywhere, and no mover's
/// player may gain more than `tol` by a single different action.
pub fn certify_ne<T: Scalar>(
    spec: &GameSpec<T>,
    profile: &PositionalProfile,
    u: &ValueTable<T>,
    tol: f64,
) -> Result<Certificate> {
    let ctx = Ctx::new(spec)?;
    certify_with(&ctx, profile, u, tol)
}

#[allow(clippy::needless_range_loop)]
fn certify_with<T: Scalar>(
    ctx: &Ctx<'_, T>,
    profile: &PositionalProfile,
    u: &ValueTable<T>,
    tol: f64,
) -> Result<Certificate> {
    let sp = &ctx.space;
    if u.indexer() != sp.indexer() || u.players() != ctx.players {
        return Err(Error::InvalidSpec {
            field: "values",
            message: "value table belongs to a different game".into(),
        });
    }
    let next = ctx.successors(profile)?;
    let tol_t = T::from_f64_lossy(tol);
    let gamma = ctx.spec.discount();
    let mut max_residual = T::zero();
    let mut inconsistencies = Vec::new();
    for i in 0..sp.len() {
        for m in 1..=ctx.players {
            let expected = if i == sp.terminal() {
                T::zero()
            } else if sp.is_capture(i) {
                T::from_int(ctx.payoff[i * ctx.players + m - 1])
            } else {
                gamma.clone() * u.get(next[i], m).clone()
            };
            let r = (u.get(i, m).clone() - expected).abs();
            if r > tol_t {
                inconsistencies.push(Inconsistency {
                    state: sp.state(i),
                    player: m,
                    residual: r.to_f64_lossy(),
                });
            }
            if r > max_residual {
                max_residual = r;
            }
        }
    }
    let violations: Vec<Violation> = ctx
        .deviations(profile, u, &tol_t)
        .into_iter()
        .map(|(i, better, gain)| Violation {
            state: sp.state(i),
            token: sp.mover(i),
            player: ctx.player_of(i),
            prescribed: profile.action(i).expect("profile is total"),
            better,
            gain: gain.to_f64_lossy(),
        })
        .collect();
    let max_gain = violations.iter().map(|v| v.gain).fold(0.0, f64::max);
    Ok(Certificate {
        passed: violations.is_empty() && inconsistencies.is_empty(),
        max_residual: max_residual.to_f64_lossy(),
        max_gain,
        violations,
        inconsistencies,
    })
}

/// A certified positional equilibrium.
#[derive(Debug, Clone)]
pub struct PositionalNe<T> {
    pub profile: Arc<PositionalProfile>,
    pub values: ValueTable<T>,
    pub certificate: Certificate,
    /// Value sweeps plus refinement rounds used.
    pub iterations: usize,
}

impl<T> PositionalNe<T> {
    pub fn strategies(&self) -> Vec<Strategy> {
        self.profile.strategies()
    }
}

/// Computes a positional equilibrium.
///
/// Coupled value iteration produces a greedy profile, which is then evaluated
/// exactly and refined by switching every state with a profitable one-shot
/// deviation. If refinement revisits a profile, damped value iteration
/// restarts from the current values and refinement continues one state at a
/// time. The result is certified before it is returned; `max_iters` bounds
/// sweeps and refinement rounds together.
pub fn solve_positional_ne<T: Scalar>(spec: &GameSpec<T>, tol: f64, max_iters: usize) -> Result<PositionalNe<T>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidSpec {
            field: "tol",
            message: format!("tolerance must be positive, got {tol}"),
        });
    }
    let ctx = Ctx::new(spec)?;
    let tol_t = T::from_f64_lossy(tol);
    let zeros = ValueTable::zeros(ctx.space.indexer(), ctx.players);
    let (u, _, iterations) = ctx.iterate(zeros, &tol_t, max_iters, false);
    let profile = ctx.greedy(&u, &tol_t);
    refine(&ctx, profile, tol, iterations, max_iters, true)
}

/// Refines a starting profile by switching states with profitable one-shot
/// deviations, one state per round once a profile repeats. No value
/// iteration is involved, so the result depends on the seed.
pub fn improve_profile<T: Scalar>(
    spec: &GameSpec<T>,
    start: &PositionalProfile,
    tol: f64,
    max_rounds: usize,
) -> Result<PositionalNe<T>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidSpec {
            field: "tol",
            message: format!("tolerance must be positive, got {tol}"),
        });
    }
    let ctx = Ctx::new(spec)?;
    if start.indexer() != ctx.space.indexer() {
        return Err(Error::Precondition(
            "profile does not match the game's state space".into(),
        ));
    }
    refine(&ctx, start.clone(), tol, 0, max_rounds, false)
}

fn refine<T: Scalar>(
    ctx: &Ctx<'_, T>,
    mut profile: PositionalProfile,
    tol: f64,
    mut iterations: usize,
    max_iters: usize,
    restart_vi: bool,
) -> Result<PositionalNe<T>> {
    let tol_t = T::from_f64_lossy(tol);
    let mut seen: HashSet<Vec<Option<Vertex>>> = HashSet::new();
    let mut one_at_a_time = false;
    loop {
        let values = ctx.evaluate(&profile)?;
        let devs = ctx.deviations(&profile, &values, &tol_t);
        if devs.is_empty() {
            let certificate = certify_with(ctx, &profile, &values, tol)?;
            if certificate.passed {
                return Ok(PositionalNe {
                    profile: Arc::new(profile),
                    values,
                    certificate,
                    iterations,
                });
            }
            return Err(Error::NonConvergence {
                iterations,
                residual: certificate.max_residual,
            });
        }
        if iterations >= max_iters {
            let residual = devs.iter().map(|d| d.2.to_f64_lossy()).fold(0.0, f64::max);
            return Err(Error::NonConvergence { iterations, residual });
        }
        iterations += 1;
        let key: Vec<Option<Vertex>> = (0..ctx.space.len()).map(|i| profile.action(i)).collect();
        if !seen.insert(key) && !one_at_a_time {
            one_at_a_time = true;
            seen.clear();
            if restart_vi {
                let (u, _, k) = ctx.iterate(values, &tol_t, max_iters.saturating_sub(iterations).max(1), true);
                iterations += k;
                profile = ctx.greedy(&u, &tol_t);
                continue;
            }
        }
        let take = if one_at_a_time { 1 } else { devs.len() };
        for &(i, better, _) in devs.iter().take(take) {
            profile.set(i, Some(better));
        }
    }
}

/// Result of an exact best response.
#[derive(Clone)]
pub struct BestResponse<T> {
    pub value: T,
    pub outcome: Outcome,
    pub capture_time: CaptureTime,
    /// Size of the explored product of game states and opponent modes.
    pub nodes: usize,
    /// Achieving strategy for each of the player's tokens.
    pub strategy: Strategy,
}

impl<T: std::fmt::Debug> std::fmt::Debug for BestResponse<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BestResponse")
            .field("value", &self.value)
            .field("outcome", &self.outcome)
            .field("capture_time", &self.capture_time)
            .field("nodes", &self.nodes)
            .finish()
    }
}

/// Replays an optimal path through the explored product space.
struct ProductPolicy {
    start: usize,
    action: Vec<Option<Vertex>>,
    moves: Vec<Vec<(Vertex, usize)>>,
}

impl Automaton for ProductPolicy {
    fn initial_mode(&self) -> Mode {
        self.start as Mode
    }

    fn act(&self, mode: Mode, positions: &[Vertex], mover: Token) -> Vertex {
        self.action[mode as usize].unwrap_or(positions[mover - 1])
    }

    fn update(&self, mode: Mode, _: &[Vertex], _: Token, chosen: Vertex) -> Mode {
        self.moves[mode as usize]
            .iter()
            .find(|&&(v, _)| v == chosen)
            .map_or(mode, |&(_, j)| j as Mode)
    }
}

/// Best payoff `player` can secure from `s0` when every other token follows
/// `profile` (one strategy per token; entries for the player's own tokens are
/// ignored).
///
/// Opponent automata make the game history-dependent, so the search runs on
/// the reachable product of game states and opponent modes, where the player
/// faces a deterministic decision problem solved exactly by retrograde
/// analysis. Capture payoffs of the player must lie in {-1, 0, 1}.
pub fn best_response<T: Scalar>(
    spec: &GameSpec<T>,
    profile: &[Strategy],
    player: usize,
    s0: &State,
) -> Result<BestResponse<T>> {
    spec.check_player(player)?;
    spec.validate_state(s0)?;
    if profile.len() != spec.tokens() {
        return Err(Error::InvalidSpec {
            field: "profile",
            message: format!("expected {} strategies, got {}", spec.tokens(), profile.len()),
        });
    }
    let space = StateSpace::new(spec)?;
    let start_idx = space
        .index(s0)
        .filter(|&i| i != space.terminal())
        .ok_or_else(|| Error::InvalidState {
            state: s0.to_string(),
            message: "best response needs a nonterminal start".into(),
        })?;
    let own: Vec<bool> = (1..=spec.tokens()).map(|t| spec.controller(t) == player).collect();
    let init_modes: Vec<Mode> = profile
        .iter()
        .zip(&own)
        .map(|(s, &mine)| if mine { 0 } else { s.initial_mode() })
        .collect();

    let mut ids: HashMap<(usize, Vec<Mode>), usize> = HashMap::new();
    let mut nodes: Vec<(usize, Vec<Mode>)> = Vec::new();
    let mut moves: Vec<Vec<(Vertex, usize)>> = Vec::new();
    let mut queue = VecDeque::new();
    let cap = spec.state_cap();
    let mut intern =
        |key: (usize, Vec<Mode>), nodes: &mut Vec<(usize, Vec<Mode>)>, queue: &mut VecDeque<usize>| -> Result<usize> {
            if let Some(&id) = ids.get(&key) {
                return Ok(id);
            }
            let id = nodes.len();
            if id >= cap {
                return Err(Error::StateCapExceeded {
                    states: id as u128 + 1,
                    cap,
                });
            }
            ids.insert(key.clone(), id);
            nodes.push(key);
            queue.push_back(id);
            Ok(id)
        };
    intern((start_idx, init_modes), &mut nodes, &mut queue)?;
    let mut pos = Vec::new();
    while let Some(id) = queue.pop_front() {
        let (idx, modes) = nodes[id].clone();
        let mut out = Vec::new();
        if space.is_decision(idx) {
            let p = space.mover(idx);
            space.indexer().positions_into(idx, &mut pos);
            let chosen: Vec<(Vertex, usize)> = if own[p - 1] {
                space.moves(idx).collect()
            } else {
                let a = profile[p - 1].act(modes[p - 1], &pos, p);
                let legal = a.and_then(|v| space.moves(idx).find(|&(w, _)| w == v));
                vec![legal.ok_or_else(|| Error::IllegalAction {
                    state: space.state(idx).to_string(),
                    token: p,
                    action: a.map_or("none".into(), |v| v.to_string()),
                })?]
            };
            for (v, j) in chosen {
                let next_modes: Vec<Mode> = profile
                    .iter()
                    .zip(&own)
                    .zip(&modes)
                    .map(|((s, &mine), &m)| if mine { 0 } else { s.update(m, &pos, p, v) })
                    .collect();
                out.push((v, intern((j, next_modes), &mut nodes, &mut queue)?));
            }
        }
        moves.push(out);
    }

    let mut g = DecisionGraph::with_capacity(nodes.len(), nodes.len() * 2);
    for (id, (idx, _)) in nodes.iter().enumerate() {
        if space.is_decision(*idx) {
            g.push_node(Owner::Max, moves[id].iter().map(|&(_, j)| j));
        } else {
            let q = spec.aggregate(space.token_payoffs(*idx))[player - 1];
            if q.abs() > 1 {
                return Err(Error::Precondition(format!(
                    "capture payoff {q} of player {player} is not in {{-1, 0, 1}}"
                )));
            }
            g.push_leaf(q as i8);
        }
    }
    let outcomes = g.solve();
    let action = moves
        .iter()
        .enumerate()
        .map(|(id, ms)| {
            let idx = nodes[id].0;
            if ms.is_empty() || !own[space.mover(idx) - 1] {
                return None;
            }
            let mut best = ms[0];
            for &m in &ms[1..] {
                if outcomes[m.1] > outcomes[best.1] {
                    best = m;
                }
            }
            Some(best.0)
        })
        .collect();
    let outcome = outcomes[0];
    let gamma = spec.discount();
    let value = match outcome {
        Outcome::Win(t) => gamma.powu(t),
        Outcome::Loss(t) => -gamma.powu(t),
        Outcome::Draw => T::zero(),
    };
    Ok(BestResponse {
        value,
        outcome,
        capture_time: outcome.steps().map_or(CaptureTime::Infinite, CaptureTime::Finite),
        nodes: nodes.len(),
        strategy: Strategy::automaton(ProductPolicy {
            start: 0,
            action,
            moves,
        }),
    })
}

/// Whether some pure equilibrium, positional or not, produces a play from
/// `s0` that ends in a capture rewarding some player.
///
/// A play is an equilibrium outcome exactly when, at each of its decision
/// states, the mover's player cannot do better by leaving the path and then
/// securing its auxiliary-game value, since the other players can hold it to
/// that value. Values are compared ordinally as signed powers of the discount.
pub fn capturing_ne_outcome_exists<T: Scalar>(spec: &GameSpec<T>, s0: &State) -> Result<bool> {
    let ctx = Ctx::new(spec)?;
    let sp = &ctx.space;
    let s0_idx = sp
        .index(s0)
        .filter(|&i| i != sp.terminal())
        .ok_or_else(|| Error::InvalidState {
            state: s0.to_string(),
            message: "search needs a nonterminal start".into(),
        })?;
    if ctx.payoff.iter().any(|q| q.abs() > 1) {
        return Err(Error::Precondition("capture payoffs must lie in {-1, 0, 1}".into()));
    }
    let aux: Vec<Vec<Outcome>> = (1..=ctx.players)
        .map(|n| {
            let sol = crate::zerosum::solve_aux(spec, n)?;
            Ok((0..sp.len()).map(|i| sol.outcome_at(i)).collect())
        })
        .collect::<Result<_>>()?;
    let max_t = aux.iter().flatten().filter_map(|o| o.steps()).max().unwrap_or(0);
    let horizon = max_t + 2;

    // `k = None` stands for any number of remaining steps beyond the horizon.
    let acceptable = |q: i32, k: Option<usize>, v: Outcome| match (q.signum(), v) {
        (1, Outcome::Win(t)) => k.is_some_and(|k| k <= t + 1),
        (1, _) => true,
        (-1, Outcome::Loss(t)) => k.is_none_or(|k| k > t),
        (-1, _) => false,
        (_, v) => v.sign() <= 0,
    };
    let step_ok = |i: usize, j: usize, q: &[i32], k: Option<usize>| {
        let n = ctx.player_of(i);
        sp.moves(i)
            .all(|(_, jj)| jj == j || acceptable(q[n - 1], k, aux[n - 1][jj]))
    };

    let mut groups: Vec<Vec<i32>> = (0..sp.len())
        .filter(|&i| sp.is_capture(i))
        .map(|i| ctx.payoff[i * ctx.players..(i + 1) * ctx.players].to_vec())
        .filter(|q| q.iter().any(|&x| x > 0))
        .collect();
    groups.sort();
    groups.dedup();
    for q in groups {
        let mut layer: Vec<bool> = (0..sp.len())
            .map(|i| sp.is_capture(i) && ctx.payoff[i * ctx.players..(i + 1) * ctx.players] == q[..])
            .collect();
        if layer[s0_idx] {
            return Ok(true);
        }
        for k in 1..=horizon {
            layer = (0..sp.len())
                .map(|i| sp.is_decision(i) && sp.moves(i).any(|(_, j)| layer[j] && step_ok(i, j, &q, Some(k))))
                .collect();
            if layer[s0_idx] {
                return Ok(true);
            }
        }
        // Past the horizon the step condition no longer depends on k, so the
        // remaining layers are the backward closure of the last one.
        let mut closure = layer;
        loop {
            let mut changed = false;
            for i in 0..sp.len() {
                if !closure[i] && sp.is_decision(i) && sp.moves(i).any(|(_, j)| closure[j] && step_ok(i, j, &q, None)) {
                    closure[i] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if closure[s0_idx] {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{discounted_payoff, simulate};
    use crate::graph::Graph;
    use crate::zerosum::solve_exact;

    fn st(p: &[Vertex], m: usize) -> State {
        State::new(p.to_vec(), m)
    }

    #[test]
    fn three_tokens_on_an_edge() {
        let spec = GameSpec::chain(Graph::path(2), 3, 0.9f64).unwrap();
        let ne = solve_positional_ne(&spec, 1e-9, 1000).unwrap();
        assert!(ne.certificate.passed);
        let s = st(&[1, 2, 1], 1);
        assert_eq!(ne.profile.action_for(&s), Some(2));
        let u = ne.values.at(&s).unwrap();
        assert!((u[0] - 0.9).abs() < 1e-12 && (u[1] + 0.9).abs() < 1e-12 && u[2] == 0.0);
        let cap = st(&[2, 2, 1], 2);
        assert_eq!(ne.values.at(&cap).unwrap(), &[1.0, -1.0, 0.0]);
    }

    #[test]
    fn two_player_ne_matches_zero_sum_values() {
        let spec = GameSpec::two_player(Graph::path(3), 0.9f64).unwrap();
        let ne = solve_positional_ne(&spec, 1e-9, 1000).unwrap();
        let zs = solve_exact(&spec).unwrap();
        for i in 0..zs.indexer().len() {
            assert!((ne.values.get(i, 1) - zs.value_at(i)).abs() < 1e-9);
        }
    }

    #[test]
    fn lazy_cop_is_not_an_equilibrium() {
        let spec = GameSpec::two_player(Graph::path(3), 0.9f64).unwrap();
        let space = StateSpace::new(&spec).unwrap();
        let zs = solve_exact(&spec).unwrap();
        let profile = PositionalProfile::tabulate(&space, |pos, mover| {
            if mover == 1 {
                pos[0]
            } else {
                zs.action(&st(pos, mover)).unwrap()
            }
        });
        let u = evaluate_profile(&spec, &profile).unwrap();
        let cert = certify_ne(&spec, &profile, &u, 1e-9).unwrap();
        assert!(!cert.passed);
        assert!(cert.inconsistencies.is_empty());
        let v = cert
            .violations
            .iter()
            .find(|v| v.state == st(&[2, 3], 1))
            .expect("cop should step onto the robber");
        assert_eq!((v.token, v.prescribed, v.better), (1, 2, 3));
        assert!(cert.violations.iter().all(|v| v.token == 1 && v.better != v.prescribed));
    }

    #[test]
    fn inconsistent_values_are_reported() {
        let spec = GameSpec::two_player(Graph::path(2), 0.9f64).unwrap();
        let zs = solve_exact(&spec).unwrap();
        let u = ValueTable::zeros(zs.indexer(), 2);
        let cert = certify_ne(&spec, &zs.profile(), &u, 1e-9).unwrap();
        assert!(!cert.passed);
        assert!(!cert.inconsistencies.is_empty());
        assert!((cert.max_residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn best_response_against_a_sitting_robber() {
        let spec = GameSpec::two_player(Graph::path(3), 0.9f64).unwrap();
        let profile = vec![Strategy::stay(), Strategy::stay()];
        let s0 = st(&[1, 3], 1);
        let br = best_response(&spec, &profile, 1, &s0).unwrap();
        assert!((br.value - 0.729).abs() < 1e-15);
        assert_eq!(br.capture_time, CaptureTime::Finite(3));
        let played = simulate(&spec, &[br.strategy.clone(), Strategy::stay()], &s0).unwrap();
        assert!((discounted_payoff(&spec, &played).unwrap()[0] - br.value).abs() < 1e-15);
        let robber = best_response(&spec, &profile, 2, &s0).unwrap();
        assert_eq!(robber.value, 0.0);
    }

    #[test]
    fn capturing_outcomes_on_a_path() {
        // On P3 the cop wins from anywhere, so capture is the only outcome.
        let spec = GameSpec::two_player(Graph::path(3), 0.9f64).unwrap();
        assert!(capturing_ne_outcome_exists(&spec, &st(&[1, 3], 1)).unwrap());
        // On C4 from antipodal positions the robber never has to be caught.
        let spec = GameSpec::two_player(Graph::cycle(4), 0.9f64).unwrap();
        assert!(!capturing_ne_outcome_exists(&spec, &st(&[1, 3], 1)).unwrap());
    }
}

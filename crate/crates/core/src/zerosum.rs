//! Two-player zero-sum games: exact retrograde solution, value iteration,
//! capture times and the cop-win test.

use std::sync::Arc;

use serde_json::{Map, Value};

use crate::engine::{CaptureTime, PositionalProfile, Strategy};
use crate::error::{Error, Result};
use crate::game::{GameSpec, State};
use crate::graph::{Graph, Vertex};
use crate::json::state_key;
use crate::retro::{DecisionGraph, Outcome, Owner};
use crate::scalar::Scalar;
use crate::space::{Indexer, StateSpace};

/// Values and optimal strategies of a zero-sum game, seen from player 1.
#[derive(Debug, Clone)]
pub struct ZeroSumSolution<T> {
    indexer: Indexer,
    value: Vec<T>,
    capture_time: Vec<CaptureTime>,
    profile: Arc<PositionalProfile>,
    /// `max_token[t - 1]`: token t belongs to player 1.
    max_token: Vec<bool>,
}

impl<T: Scalar> ZeroSumSolution<T> {
    pub fn indexer(&self) -> Indexer {
        self.indexer
    }

    pub fn values(&self) -> &[T] {
        &self.value
    }

    pub fn value_at(&self, idx: usize) -> &T {
        &self.value[idx]
    }

    pub fn value(&self, s: &State) -> Option<&T> {
        self.indexer.index(s).map(|i| &self.value[i])
    }

    pub fn capture_times(&self) -> &[CaptureTime] {
        &self.capture_time
    }

    pub fn capture_time_at(&self, idx: usize) -> CaptureTime {
        self.capture_time[idx]
    }

    pub fn capture_time(&self, s: &State) -> Option<CaptureTime> {
        self.indexer.index(s).map(|i| self.capture_time[i])
    }

    /// Outcome for player 1 at a state index.
    pub fn outcome_at(&self, idx: usize) -> Outcome {
        match self.capture_time[idx] {
            CaptureTime::Infinite => Outcome::Draw,
            CaptureTime::Finite(t) if self.value[idx] > T::zero() => Outcome::Win(t),
            CaptureTime::Finite(t) if self.value[idx] < T::zero() => Outcome::Loss(t),
            CaptureTime::Finite(_) => Outcome::Draw,
        }
    }

    /// Optimal action of the mover at a decision state.
    pub fn action(&self, s: &State) -> Option<Vertex> {
        self.profile.action_for(s)
    }

    /// Optimal actions for both sides in one table.
    pub fn profile(&self) -> Arc<PositionalProfile> {
        self.profile.clone()
    }

    /// One strategy per token reading the optimal table.
    pub fn strategies(&self) -> Vec<Strategy> {
        self.profile.strategies()
    }

    pub fn max_strategy(&self) -> PositionalProfile {
        self.side(true)
    }

    pub fn min_strategy(&self) -> PositionalProfile {
        self.side(false)
    }

    fn side(&self, max: bool) -> PositionalProfile {
        let mut out = PositionalProfile::empty(self.indexer);
        for (i, v) in self.profile.entries() {
            if self.max_token[self.indexer.mover(i) - 1] == max {
                out.set(i, Some(v));
            }
        }
        out
    }

    /// Value, capture time and action tables keyed by serialized state.
    pub fn to_json(&self) -> Value {
        let mut value = Map::new();
        let mut time = Map::new();
        let mut strategy = Map::new();
        for i in 0..self.indexer.len() {
            let key = state_key(&self.indexer.state(i));
            value.insert(key.clone(), Value::from(self.value[i].to_f64_lossy()));
            time.insert(
                key.clone(),
                serde_json::to_value(self.capture_time[i]).expect("serializes"),
            );
            if let Some(v) = self.profile.action(i) {
                strategy.insert(key, Value::from(v));
            }
        }
        serde_json::json!({ "value": value, "capture_time": time, "strategy": strategy })
    }
}

fn require_zero_sum<T: Scalar>(spec: &GameSpec<T>) -> Result<()> {
    if spec.is_zero_sum() {
        Ok(())
    } else {
        Err(Error::InvalidSpec {
            field: "scheme",
            message: "a two-player zero-sum game is required; use the auxiliary game".into(),
        })
    }
}

fn max_tokens<T: Scalar>(spec: &GameSpec<T>) -> Vec<bool> {
    (1..=spec.tokens()).map(|t| spec.controller(t) == 1).collect()
}

/// Player 1's turn payoff at every state.
fn max_payoffs<T: Scalar>(spec: &GameSpec<T>, space: &StateSpace) -> Vec<i32> {
    (0..space.len())
        .map(|i| {
            if space.is_capture(i) {
                spec.aggregate(space.token_payoffs(i))[0]
            } else {
                0
            }
        })
        .collect()
}

/// Exact solution by retrograde analysis.
///
/// Every capture payoff of player 1 must lie in {-1, 0, 1}.
pub fn solve_exact<T: Scalar>(spec: &GameSpec<T>) -> Result<ZeroSumSolution<T>> {
    require_zero_sum(spec)?;
    let space = StateSpace::new(spec)?;
    let q = max_payoffs(spec, &space);
    if let Some(i) = q.iter().position(|x| x.abs() > 1) {
        return Err(Error::Precondition(format!(
            "capture payoff {} at {} is not in {{-1, 0, 1}}",
            q[i],
            space.state(i)
        )));
    }
    let max_token = max_tokens(spec);
    let mut g = DecisionGraph::with_capacity(space.len(), space.len() * 3);
    for i in 0..space.len() {
        if space.is_decision(i) {
            let owner = if max_token[space.mover(i) - 1] {
                Owner::Max
            } else {
                Owner::Min
            };
            g.push_node(owner, space.moves(i).map(|(_, j)| j));
        } else {
            g.push_leaf(q[i] as i8);
        }
    }
    let outcomes = g.solve();
    let gamma = spec.discount();
    let mut profile = PositionalProfile::empty(space.indexer());
    for i in 0..space.len() {
        if !space.is_decision(i) {
            continue;
        }
        let pick = if g.owner(i) == Owner::Max {
            best_by(space.moves(i), |j| outcomes[j], |a, b| a > b)
        } else {
            best_by(space.moves(i), |j| outcomes[j], |a, b| a < b)
        };
        profile.set(i, Some(pick));
    }
    let value = outcomes
        .iter()
        .map(|o| match *o {
            Outcome::Win(t) => gamma.powu(t),
            Outcome::Loss(t) => -gamma.powu(t),
            Outcome::Draw => T::zero(),
        })
        .collect();
    let capture_time = outcomes
        .iter()
        .map(|o| o.steps().map_or(CaptureTime::Infinite, CaptureTime::Finite))
        .collect();
    Ok(ZeroSumSolution {
        indexer: space.indexer(),
        value,
        capture_time,
        profile: Arc::new(profile),
        max_token,
    })
}

/// First move (lowest vertex) whose successor is strictly better than all
/// earlier ones under `better`.
fn best_by<K: Copy>(
    moves: impl Iterator<Item = (Vertex, usize)>,
    key: impl Fn(usize) -> K,
    better: impl Fn(&K, &K) -> bool,
) -> Vertex {
    let mut best: Option<(Vertex, K)> = None;
    for (v, j) in moves {
        let k = key(j);
        if best.as_ref().is_none_or(|(_, b)| better(&k, b)) {
            best = Some((v, k));
        }
    }
    best.expect("closed neighborhoods are nonempty").0
}

/// Shapley value iteration from the zero vector.
///
/// Stops once the sup-norm change drops below `tol (1 - gamma) / (2 gamma)`,
/// which puts every value within `tol / 2` of the fixed point. Greedy actions
/// treat values within `tol` of the best as ties and take the lowest vertex.
pub fn solve_vi<T: Scalar>(spec: &GameSpec<T>, tol: f64, max_iters: usize) -> Result<ZeroSumSolution<T>> {
    require_zero_sum(spec)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidSpec {
            field: "tol",
            message: format!("tolerance must be positive, got {tol}"),
        });
    }
    let space = StateSpace::new(spec)?;
    let max_token = max_tokens(spec);
    let q: Vec<T> = max_payoffs(spec, &space).into_iter().map(T::from_int).collect();
    let gamma = spec.discount().clone();
    let tol_t = T::from_f64_lossy(tol);
    let stop = tol_t.clone() * (T::one() - gamma.clone()) / (T::from_int(2) * gamma.clone());
    let is_max = |i: usize| max_token[space.mover(i) - 1];

    let mut v = vec![T::zero(); space.len()];
    let mut next = v.clone();
    let mut iterations = 0;
    loop {
        if iterations == max_iters {
            let residual = sup_diff(&v, &next).to_f64_lossy();
            return Err(Error::NonConvergence { iterations, residual });
        }
        iterations += 1;
        for i in 0..space.len() {
            next[i] = if space.is_decision(i) {
                let mut it = space.moves(i).map(|(_, j)| &v[j]);
                let first = it.next().expect("nonempty").clone();
                let best = it.fold(first, |b, x| {
                    if (is_max(i) && *x > b) || (!is_max(i) && *x < b) {
                        x.clone()
                    } else {
                        b
                    }
                });
                gamma.clone() * best
            } else {
                q[i].clone()
            };
        }
        let change = sup_diff(&v, &next);
        std::mem::swap(&mut v, &mut next);
        if change < stop {
            break;
        }
    }

    let mut profile = PositionalProfile::empty(space.indexer());
    for i in 0..space.len() {
        if !space.is_decision(i) {
            continue;
        }
        let vals: Vec<(Vertex, &T)> = space.moves(i).map(|(a, j)| (a, &v[j])).collect();
        let best = vals
            .iter()
            .map(|(_, x)| *x)
            .fold(vals[0].1, |b, x| {
                if (is_max(i) && x > b) || (!is_max(i) && x < b) {
                    x
                } else {
                    b
                }
            })
            .clone();
        let pick = vals
            .iter()
            .find(|(_, x)| (best.clone() - (*x).clone()).abs() <= tol_t)
            .expect("best is attained")
            .0;
        profile.set(i, Some(pick));
    }
    let capture_time = v
        .iter()
        .map(|u| optimal_capture_time(u, &gamma, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(ZeroSumSolution {
        indexer: space.indexer(),
        value: v,
        capture_time,
        profile: Arc::new(profile),
        max_token,
    })
}

fn sup_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.clone() - y.clone()).abs())
        .fold(T::zero(), |m, d| if d > m { d } else { m })
}

/// Turn count `t` with `|u| = gamma^t` up to `tol`; zero means no capture.
pub fn optimal_capture_time<T: Scalar>(u: &T, gamma: &T, tol: f64) -> Result<CaptureTime> {
    let a = u.abs();
    let tol_t = T::from_f64_lossy(tol);
    if a <= tol_t {
        return Ok(CaptureTime::Infinite);
    }
    let not_a_power = || Error::NotAPower {
        value: u.to_f64_lossy(),
        discount: gamma.to_f64_lossy(),
    };
    let t = (a.to_f64_lossy().ln() / gamma.to_f64_lossy().ln()).round();
    if t.is_nan() || t < 0.0 || !t.is_finite() {
        return Err(not_a_power());
    }
    let t = t as usize;
    if (gamma.powu(t) - a).abs() > tol_t {
        return Err(not_a_power());
    }
    Ok(CaptureTime::Finite(t))
}

/// Best initial placement for a cop-and-robber game with the cop moving first.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement<T> {
    pub cop: Vertex,
    pub robber: Vertex,
    pub value: T,
    pub capture_time: CaptureTime,
}

/// The cop's best vertex against the robber's best reply, lowest indices on
/// ties, for a two-token solution.
pub fn optimal_placement<T: Scalar>(sol: &ZeroSumSolution<T>) -> Result<Placement<T>> {
    let ix = sol.indexer();
    if ix.tokens() != 2 {
        return Err(Error::Precondition("placement needs a two-token game".into()));
    }
    let n = ix.vertices();
    let mut best: Option<Placement<T>> = None;
    for cop in 1..=n {
        let mut reply: Option<(Vertex, usize)> = None;
        for robber in 1..=n {
            let i = ix.index_of(&[cop, robber], 1);
            if reply.is_none_or(|(_, j)| sol.value[i] < sol.value[j]) {
                reply = Some((robber, i));
            }
        }
        let (robber, i) = reply.expect("nonempty graph");
        if best.as_ref().is_none_or(|b| sol.value[i] > b.value) {
            best = Some(Placement {
                cop,
                robber,
                value: sol.value[i].clone(),
                capture_time: sol.capture_time[i],
            });
        }
    }
    Ok(best.expect("nonempty graph"))
}

/// True iff one cop moving first catches the robber from its best placement.
pub fn copwin_check<T: Scalar>(g: impl Into<Arc<Graph>>, gamma: T) -> Result<bool> {
    let spec = GameSpec::two_player(g, gamma)?;
    let sol = solve_exact(&spec)?;
    Ok(optimal_placement(&sol)?.value > T::zero())
}

/// Exact solution of the auxiliary game of `player`.
pub fn solve_aux<T: Scalar>(spec: &GameSpec<T>, player: usize) -> Result<ZeroSumSolution<T>> {
    solve_exact(&spec.aux_game(player)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn p(positions: &[Vertex], mover: usize) -> State {
        State::new(positions.to_vec(), mover)
    }

    #[test]
    fn p2_values() {
        let spec = GameSpec::two_player(Graph::path(2), ratio(9, 10)).unwrap();
        let sol = solve_exact(&spec).unwrap();
        assert_eq!(sol.value(&p(&[1, 2], 1)), Some(&ratio(9, 10)));
        assert_eq!(sol.value(&p(&[1, 2], 2)), Some(&ratio(81, 100)));
        assert_eq!(sol.action(&p(&[1, 2], 2)), Some(2));
        assert_eq!(sol.value(&p(&[2, 2], 2)), Some(&ratio(1, 1)));
        assert_eq!(sol.capture_time(&p(&[2, 2], 1)), Some(CaptureTime::Finite(0)));
    }

    #[test]
    fn p3_capture_time() {
        let spec = GameSpec::two_player(Graph::path(3), 0.9f64).unwrap();
        let sol = solve_exact(&spec).unwrap();
        let s = p(&[1, 3], 1);
        assert_eq!(sol.capture_time(&s), Some(CaptureTime::Finite(3)));
        assert!((sol.value(&s).unwrap() - 0.729).abs() < 1e-15);
        let vi = solve_vi(&spec, 1e-9, 10_000).unwrap();
        assert_eq!(vi.capture_time(&s), Some(CaptureTime::Finite(3)));
        assert!((vi.value(&s).unwrap() - 0.729).abs() < 1e-9);
        assert_eq!(vi.profile(), sol.profile());
    }

    #[test]
    fn c4_escape() {
        let spec = GameSpec::two_player(Graph::cycle(4), 0.9f64).unwrap();
        let sol = solve_exact(&spec).unwrap();
        for (c, r) in [(1, 3), (2, 4), (3, 1), (4, 2)] {
            assert_eq!(sol.capture_time(&p(&[c, r], 2)), Some(CaptureTime::Infinite));
            assert_eq!(*sol.value(&p(&[c, r], 2)).unwrap(), 0.0);
        }
        let vi = solve_vi(&spec, 1e-9, 10_000).unwrap();
        assert_eq!(*vi.value(&p(&[1, 3], 2)).unwrap(), 0.0);
    }

    #[test]
    fn capture_time_from_values() {
        assert_eq!(
            optimal_capture_time(&0.729, &0.9, 1e-9).unwrap(),
            CaptureTime::Finite(3)
        );
        assert_eq!(optimal_capture_time(&1.0, &0.9, 1e-9).unwrap(), CaptureTime::Finite(0));
        assert_eq!(optimal_capture_time(&0.0, &0.9, 1e-9).unwrap(), CaptureTime::Infinite);
        assert_eq!(
            optimal_capture_time(&-0.81, &0.9, 1e-9).unwrap(),
            CaptureTime::Finite(2)
        );
        assert!(matches!(
            optimal_capture_time(&0.5, &0.9, 1e-9),
            Err(Error::NotAPower { .. })
        ));
        assert_eq!(
            optimal_capture_time(&ratio(729, 1000), &ratio(9, 10), 0.0).unwrap(),
            CaptureTime::Finite(3)
        );
    }

    #[test]
    fn copwin() {
        assert!(copwin_check(Graph::path(2), 0.9).unwrap());
        assert!(copwin_check(Graph::path(3), 0.9).unwrap());
        assert!(!copwin_check(Graph::cycle(4), 0.9).unwrap());
        assert!(copwin_check(Graph::cycle(3), 0.9).unwrap());
    }

    #[test]
    fn placement_on_p5() {
        let spec = GameSpec::two_player(Graph::path(5), 0.9f64).unwrap();
        let pl = optimal_placement(&solve_exact(&spec).unwrap()).unwrap();
        assert_eq!(pl.cop, 3);
        // The robber picks an endpoint: two cop moves plus nothing it can do.
        assert_eq!(pl.capture_time, CaptureTime::Finite(3));
        assert_eq!(pl.robber, 1);
    }

    #[test]
    fn non_zero_sum_rejected() {
        let spec = GameSpec::<f64>::chain(Graph::path(3), 3, 0.9f64).unwrap();
        assert!(solve_exact(&spec).is_err());
        assert!(solve_aux(&spec, 2).is_ok());
    }

    #[test]
    fn vi_iteration_cap() {
        let spec = GameSpec::two_player(Graph::path(5), 0.9f64).unwrap();
        assert!(matches!(
            solve_vi(&spec, 1e-9, 2),
            Err(Error::NonConvergence { iterations: 2, .. })
        ));
    }

    #[test]
    fn split_strategies() {
        let spec = GameSpec::two_player(Graph::path(3), 0.9f64).unwrap();
        let sol = solve_exact(&spec).unwrap();
        let cop = sol.max_strategy();
        let robber = sol.min_strategy();
        let s = p(&[1, 3], 1);
        assert_eq!(cop.action_for(&s), Some(2));
        assert_eq!(robber.action_for(&s), None);
        assert_eq!(robber.action_for(&p(&[2, 3], 2)), Some(3));
    }
}

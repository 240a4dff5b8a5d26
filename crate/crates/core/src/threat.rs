//! Threat profiles: every token follows its own player's auxiliary-game
//! strategy until some other player deviates, then switches for good to the
//! strategy that holds the deviator to its auxiliary value.

use std::sync::Arc;

use serde::Serialize;

use crate::engine::{discounted_payoff, simulate, Automaton, Mode, PositionalProfile, Strategy};
use crate::equilibrium::best_response;
use crate::error::Result;
use crate::game::{GameSpec, State, Token};
use crate::graph::Vertex;
use crate::scalar::Scalar;
use crate::zerosum::solve_aux;

/// Optimal tables of all auxiliary games plus the token-to-player map.
#[derive(Debug, Clone)]
pub struct ThreatProfile {
    /// `tables[n - 1]`: both sides' optimal actions in player n's auxiliary game.
    tables: Arc<Vec<Arc<PositionalProfile>>>,
    controllers: Arc<Vec<usize>>,
}

impl ThreatProfile {
    pub fn players(&self) -> usize {
        self.tables.len()
    }

    /// Optimal table of player `n`'s auxiliary game.
    pub fn table(&self, n: usize) -> &Arc<PositionalProfile> {
        &self.tables[n - 1]
    }

    /// One automaton per token.
    pub fn strategies(&self) -> Vec<Strategy> {
        (1..=self.controllers.len())
            .map(|token| {
                Strategy::automaton(ThreatAutomaton {
                    player: self.controllers[token - 1],
                    tables: self.tables.clone(),
                    controllers: self.controllers.clone(),
                })
            })
            .collect()
    }

    /// The cooperative tables alone: token t reads its own player's table.
    pub fn base_strategies(&self) -> Vec<Strategy> {
        self.controllers
            .iter()
            .map(|&n| Strategy::Positional(self.tables[n - 1].clone()))
            .collect()
    }
}

/// Mode 0 cooperates; mode m punishes player m and never changes again.
struct ThreatAutomaton {
    player: usize,
    tables: Arc<Vec<Arc<PositionalProfile>>>,
    controllers: Arc<Vec<usize>>,
}

impl Automaton for ThreatAutomaton {
    fn act(&self, mode: Mode, positions: &[Vertex], mover: Token) -> Vertex {
        let n = if mode == 0 { self.player } else { mode as usize };
        self.tables[n - 1]
            .action_at(positions, mover)
            .unwrap_or(positions[mover - 1])
    }

    fn update(&self, mode: Mode, positions: &[Vertex], mover: Token, chosen: Vertex) -> Mode {
        let m = self.controllers[mover - 1];
        if mode != 0 || m == self.player {
            return mode;
        }
        match self.tables[m - 1].action_at(positions, mover) {
            Some(v) if v != chosen => m as Mode,
            _ => mode,
        }
    }
}

/// Solves every player's auxiliary game exactly and assembles the automata.
pub fn build_threat_profile<T: Scalar>(spec: &GameSpec<T>) -> Result<ThreatProfile> {
    let tables = (1..=spec.players())
        .map(|n| Ok(solve_aux(spec, n)?.profile()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ThreatProfile {
        tables: Arc::new(tables),
        controllers: Arc::new(spec.controllers().to_vec()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerCheck {
    pub player: usize,
    pub on_path: f64,
    pub best_deviation: f64,
    pub gain: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreatReport {
    pub state: State,
    pub passed: bool,
    pub players: Vec<PlayerCheck>,
}

/// Compares each player's on-path payoff with its exact best response against
/// the other players' automata.
pub fn verify_threat_ne<T: Scalar>(
    spec: &GameSpec<T>,
    tp: &ThreatProfile,
    s0: &State,
    tol: f64,
) -> Result<ThreatReport> {
    let profile = tp.strategies();
    let history = simulate(spec, &profile, s0)?;
    let on_path = discounted_payoff(spec, &history)?;
    let tol_t = T::from_f64_lossy(tol);
    let mut players = Vec::with_capacity(spec.players());
    for n in 1..=spec.players() {
        let br = best_response(spec, &profile, n, s0)?;
        let gain = br.value.clone() - on_path[n - 1].clone();
        players.push(PlayerCheck {
            player: n,
            on_path: on_path[n - 1].to_f64_lossy(),
            best_deviation: br.value.to_f64_lossy(),
            gain: gain.to_f64_lossy(),
            passed: gain <= tol_t,
        });
    }
    Ok(ThreatReport {
        state: s0.clone(),
        passed: players.iter().all(|p| p.passed),
        players,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn cooperative_play_matches_base_tables() {
        let spec = GameSpec::chain(Graph::path(4), 3, 0.9f64).unwrap();
        let tp = build_threat_profile(&spec).unwrap();
        let s0 = State::new(vec![1, 4, 2], 1);
        let a = simulate(&spec, &tp.strategies(), &s0).unwrap();
        let b = simulate(&spec, &tp.base_strategies(), &s0).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.capture_time, b.capture_time);
    }

    #[test]
    fn deviation_switches_the_others() {
        let spec = GameSpec::chain(Graph::path(4), 3, 0.9f64).unwrap();
        let tp = build_threat_profile(&spec).unwrap();
        let strategies = tp.strategies();
        let pos = [1, 4, 2];
        let prescribed = tp.table(2).action_at(&pos, 2).unwrap();
        let other = if prescribed == 4 { 3 } else { 4 };
        let Strategy::Automaton(a) = &strategies[0] else {
            panic!()
        };
        assert_eq!(a.update(0, &pos, 2, other), 2);
        assert_eq!(a.update(0, &pos, 2, prescribed), 0);
        // Punishment is absorbing and ignores the token's own moves.
        assert_eq!(a.update(2, &pos, 3, 1), 2);
        assert_eq!(a.update(0, &pos, 1, 3), 0);
        assert_eq!(a.act(2, &pos, 1), tp.table(2).action_at(&pos, 1).unwrap());
    }

    #[test]
    fn threat_ne_on_p4() {
        let spec = GameSpec::chain(Graph::path(4), 3, 0.9f64).unwrap();
        let tp = build_threat_profile(&spec).unwrap();
        let r = verify_threat_ne(&spec, &tp, &State::new(vec![1, 4, 2], 2), 1e-12).unwrap();
        assert!(r.passed, "{r:?}");
        let cap = verify_threat_ne(&spec, &tp, &State::new(vec![3, 3, 1], 1), 1e-12).unwrap();
        assert!(cap.passed);
        assert_eq!(cap.players[0].on_path, 1.0);
    }
}

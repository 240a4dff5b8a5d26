//! Generalized Cops and Robbers: turn-based pursuit games on graphs in which
//! several tokens chase each other, with solvers for values, positional and
//! threat equilibria, and the classical constructive strategies.
//!
//! Everything numeric is generic over [`Scalar`]; `f64` is the everyday choice
//! and [`Exact`] gives rational arithmetic on small instances.

pub mod constructions;
pub mod engine;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod graph;
pub mod json;
pub mod retro;
pub mod scalar;
pub mod space;
pub mod threat;
pub mod zerosum;

pub use engine::{
    discounted_payoff, replay, simulate, simulate_with_limit, Automaton, CaptureTime, History, Mode, PositionalProfile,
    Strategy,
};
pub use equilibrium::{
    best_response, certify_ne, evaluate_profile, improve_profile, solve_positional_ne, BestResponse, Certificate,
    ValueTable, Violation,
};
pub use error::{Error, Result};
pub use game::{
    build_aux_game, Action, Aggregation, GameSpec, GeneralizedScheme, PayoffScheme, State, Token, DEFAULT_STATE_CAP,
};
pub use graph::{parse_graph, Classification, Graph, Vertex};
pub use scalar::{ratio, Scalar};
pub use space::{Indexer, StateSpace};
pub use threat::{build_threat_profile, verify_threat_ne, ThreatProfile, ThreatReport};
pub use zerosum::{
    copwin_check, optimal_capture_time, optimal_placement, solve_aux, solve_exact, solve_vi, Placement, ZeroSumSolution,
};

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

pub type GameSpecF64 = GameSpec<f64>;
pub type GameSpecF32 = GameSpec<f32>;
pub type GameSpecExact = GameSpec<Exact>;
pub type ZeroSumSolutionF64 = ZeroSumSolution<f64>;
pub type ZeroSumSolutionExact = ZeroSumSolution<Exact>;
pub type ValueTableF64 = ValueTable<f64>;
pub type ValueTableExact = ValueTable<Exact>;

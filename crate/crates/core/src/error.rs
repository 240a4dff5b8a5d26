use thiserror::Error;

use crate::graph::Vertex;

/// Errors raised by graph construction, game setup, solvers and play-outs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: malformed input {text:?}")]
    Malformed { line: usize, text: String },

    #[error("missing vertex count")]
    MissingVertexCount,

    #[error("line {line}: vertex {vertex} out of range 1..={count}")]
    VertexOutOfRange { line: usize, vertex: usize, count: usize },

    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: Vertex },

    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: Vertex, v: Vertex },

    #[error("graph is disconnected: vertex {unreachable} unreachable from vertex 1")]
    Disconnected { unreachable: Vertex },

    #[error("invalid vertex {vertex} (graph has {count} vertices)")]
    InvalidVertex { vertex: Vertex, count: usize },

    #[error("graph is not a tree")]
    NotATree,

    #[error("graph is not a path")]
    NotAPath,

    #[error("invalid token {token} (game has {count} tokens)")]
    InvalidToken { token: usize, count: usize },

    #[error("invalid player {player} (game has {count} players)")]
    InvalidPlayer { player: usize, count: usize },

    #[error("invalid {field}: {message}")]
    InvalidSpec { field: &'static str, message: String },

    #[error("invalid state {state}: {message}")]
    InvalidState { state: String, message: String },

    #[error("illegal action {action} by token {token} at state {state}")]
    IllegalAction {
        state: String,
        token: usize,
        action: String,
    },

    #[error("state space of {states} states exceeds cap {cap}")]
    StateCapExceeded { states: u128, cap: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("value {value} is not a power of the discount factor {discount}")]
    NotAPower { value: f64, discount: f64 },

    #[error("play-out exceeded {steps} steps without repeating a configuration")]
    StepLimit { steps: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

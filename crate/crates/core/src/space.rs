//! Dense indexing of the state space.
//!
//! Index layout: positions in lexicographic order, then mover, so state
//! `(x1..xN, p)` has index `rank(x) * N + (p - 1)`; the terminal state comes
//! last.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::game::{GameSpec, State, Token};
use crate::graph::{Graph, Vertex};
use crate::scalar::Scalar;

/// Maps states to dense indices for a fixed vertex and token count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Indexer {
    vertices: usize,
    tokens: usize,
    nonterminal: usize,
}

impl Indexer {
    pub fn new(vertices: usize, tokens: usize, cap: usize) -> Result<Self> {
        let states = (vertices as u128)
            .checked_pow(tokens as u32)
            .and_then(|x| x.checked_mul(tokens as u128))
            .map(|x| x + 1)
            .unwrap_or(u128::MAX);
        if states > cap as u128 {
            return Err(Error::StateCapExceeded { states, cap });
        }
        Ok(Indexer {
            vertices,
            tokens,
            nonterminal: states as usize - 1,
        })
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn tokens(&self) -> usize {
        self.tokens
    }

    /// Number of states including the terminal state.
    pub fn len(&self) -> usize {
        self.nonterminal + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn terminal(&self) -> usize {
        self.nonterminal
    }

    /// Index of a nonterminal configuration; positions must be valid.
    pub fn index_of(&self, positions: &[Vertex], mover: Token) -> usize {
        let rank = positions.iter().fold(0usize, |acc, &x| acc * self.vertices + (x - 1));
        rank * self.tokens + (mover - 1)
    }

    pub fn index(&self, s: &State) -> Option<usize> {
        match s {
            State::Terminal => Some(self.terminal()),
            State::Nonterminal { positions, mover } => {
                let ok = positions.len() == self.tokens
                    && (1..=self.tokens).contains(mover)
                    && positions.iter().all(|&x| (1..=self.vertices).contains(&x));
                ok.then(|| self.index_of(positions, *mover))
            }
        }
    }

    pub fn mover(&self, idx: usize) -> Token {
        idx % self.tokens + 1
    }

    pub fn positions_into(&self, idx: usize, out: &mut Vec<Vertex>) {
        out.clear();
        out.resize(self.tokens, 0);
        let mut rank = idx / self.tokens;
        for slot in out.iter_mut().rev() {
            *slot = rank % self.vertices + 1;
            rank /= self.vertices;
        }
    }

    pub fn positions(&self, idx: usize) -> Vec<Vertex> {
        let mut out = Vec::new();
        self.positions_into(idx, &mut out);
        out
    }

    pub fn state(&self, idx: usize) -> State {
        if idx == self.terminal() {
            State::Terminal
        } else {
            State::new(self.positions(idx), self.mover(idx))
        }
    }

    /// Index reached when the mover of `idx` steps to `v`.
    pub fn successor(&self, idx: usize, v: Vertex) -> usize {
        let p = self.mover(idx);
        let stride = self.vertices.pow((self.tokens - p) as u32) * self.tokens;
        let x = (idx / stride) % self.vertices + 1;
        let moved = idx + (v - 1) * stride - (x - 1) * stride;
        let next = p % self.tokens + 1;
        moved - (p - 1) + (next - 1)
    }
}

/// Enumerated state space with capture flags and integer turn payoffs.
#[derive(Debug, Clone)]
pub struct StateSpace {
    indexer: Indexer,
    graph: Arc<Graph>,
    capture: Vec<bool>,
    token_q: Vec<i8>,
}

impl StateSpace {
    pub fn new<T: Scalar>(spec: &GameSpec<T>) -> Result<Self> {
        let n = spec.tokens();
        let indexer = Indexer::new(spec.graph().vertex_count(), n, spec.state_cap())?;
        let len = indexer.len();
        let mut capture = vec![false; len];
        let mut token_q = vec![0i8; len * n];
        let mut pos = Vec::with_capacity(n);
        // Payoffs depend only on positions, so compute once per configuration.
        for rank_start in (0..indexer.terminal()).step_by(n) {
            indexer.positions_into(rank_start, &mut pos);
            let is_cap = spec.is_capture(&pos);
            let q = spec.token_payoffs_at(&pos);
            for i in rank_start..rank_start + n {
                capture[i] = is_cap;
                token_q[i * n..(i + 1) * n].copy_from_slice(&q);
            }
        }
        Ok(StateSpace {
            indexer,
            graph: spec.graph_arc(),
            capture,
            token_q,
        })
    }

    pub fn indexer(&self) -> Indexer {
        self.indexer
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.indexer.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn terminal(&self) -> usize {
        self.indexer.terminal()
    }

    pub fn state(&self, idx: usize) -> State {
        self.indexer.state(idx)
    }

    pub fn index(&self, s: &State) -> Option<usize> {
        self.indexer.index(s)
    }

    pub fn mover(&self, idx: usize) -> Token {
        self.indexer.mover(idx)
    }

    pub fn is_capture(&self, idx: usize) -> bool {
        self.capture[idx]
    }

    /// Nonterminal and not a capture state: the mover has a real choice.
    pub fn is_decision(&self, idx: usize) -> bool {
        idx != self.terminal() && !self.capture[idx]
    }

    pub fn token_payoffs(&self, idx: usize) -> &[i8] {
        let n = self.indexer.tokens();
        &self.token_q[idx * n..(idx + 1) * n]
    }

    /// Vertex currently occupied by the mover.
    pub fn mover_vertex(&self, idx: usize) -> Vertex {
        let ix = &self.indexer;
        let p = ix.mover(idx);
        let stride = ix.vertices.pow((ix.tokens - p) as u32) * ix.tokens;
        (idx / stride) % ix.vertices + 1
    }

    /// `(action vertex, successor index)` pairs in ascending vertex order for
    /// a decision state.
    pub fn moves(&self, idx: usize) -> impl Iterator<Item = (Vertex, usize)> + '_ {
        let x = self.mover_vertex(idx);
        self.graph
            .closed_nbhd(x)
            .into_iter()
            .map(move |v| (v, self.indexer.successor(idx, v)))
    }

    /// Successor indices, following the null move at capture and terminal states.
    pub fn successors(&self, idx: usize) -> Vec<usize> {
        if self.is_decision(idx) {
            self.moves(idx).map(|(_, s)| s).collect()
        } else {
            vec![self.terminal()]
        }
    }
}

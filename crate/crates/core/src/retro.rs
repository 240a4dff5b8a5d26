//! Retrograde analysis of finite two-sided decision graphs whose leaves carry
//! a sign.
//!
//! A node owned by `Max` is won in `t + 1` steps if some successor is won in
//! `t`; a `Min` node only if every successor is. Losses are symmetric and all
//! other nodes are draws (infinite play or zero-payoff leaves).

use std::cmp::Ordering;
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Owner {
    Max,
    Min,
}

/// Outcome from the maximizer's point of view with the number of steps until
/// the deciding leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Win(usize),
    Draw,
    Loss(usize),
}

impl Outcome {
    /// Orders outcomes by preference of the maximizer: quick wins first, slow
    /// losses before quick ones.
    pub fn key(self) -> (u8, i64) {
        match self {
            Outcome::Win(t) => (2, -(t as i64)),
            Outcome::Draw => (1, 0),
            Outcome::Loss(t) => (0, t as i64),
        }
    }

    pub fn steps(self) -> Option<usize> {
        match self {
            Outcome::Win(t) | Outcome::Loss(t) => Some(t),
            Outcome::Draw => None,
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Outcome::Win(_) => 1,
            Outcome::Draw => 0,
            Outcome::Loss(_) => -1,
        }
    }
}

impl PartialOrd for Outcome {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Outcome {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Explicit decision graph in compressed adjacency form.
#[derive(Debug, Clone, Default)]
pub struct DecisionGraph {
    owner: Vec<Owner>,
    leaf: Vec<Option<i8>>,
    start: Vec<usize>,
    succ: Vec<usize>,
}

impl DecisionGraph {
    pub fn new() -> Self {
        DecisionGraph {
            start: vec![0],
            ..Default::default()
        }
    }

    pub fn with_capacity(nodes: usize, edges: usize) -> Self {
        let mut start = Vec::with_capacity(nodes + 1);
        start.push(0);
        DecisionGraph {
            owner: Vec::with_capacity(nodes),
            leaf: Vec::with_capacity(nodes),
            start,
            succ: Vec::with_capacity(edges),
        }
    }

    /// Adds a leaf with payoff sign `sign`; returns its id.
    pub fn push_leaf(&mut self, sign: i8) -> usize {
        self.push(Owner::Max, Some(sign.signum()), std::iter::empty())
    }

    /// Adds an inner node; successor ids may refer to nodes added later.
    pub fn push_node(&mut self, owner: Owner, succ: impl IntoIterator<Item = usize>) -> usize {
        self.push(owner, None, succ)
    }

    fn push(&mut self, owner: Owner, leaf: Option<i8>, succ: impl IntoIterator<Item = usize>) -> usize {
        self.owner.push(owner);
        self.leaf.push(leaf);
        self.succ.extend(succ);
        self.start.push(self.succ.len());
        self.owner.len() - 1
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn successors(&self, node: usize) -> &[usize] {
        &self.succ[self.start[node]..self.start[node + 1]]
    }

    pub fn owner(&self, node: usize) -> Owner {
        self.owner[node]
    }

    /// Outcome of every node under optimal play by both sides.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self) -> Vec<Outcome> {
        let n = self.len();
        assert!(
            (0..n).all(|i| self.leaf[i].is_some() || !self.successors(i).is_empty()),
            "inner nodes need successors"
        );
        // Reverse adjacency, one entry per edge so parallel edges count twice.
        let mut rstart = vec![0usize; n + 1];
        for &v in &self.succ {
            rstart[v + 1] += 1;
        }
        for i in 0..n {
            rstart[i + 1] += rstart[i];
        }
        let mut fill = rstart.clone();
        let mut pred = vec![0usize; self.succ.len()];
        for u in 0..n {
            for &v in self.successors(u) {
                pred[fill[v]] = u;
                fill[v] += 1;
            }
        }
        let mut out = vec![Outcome::Draw; n];
        for (sign, hero) in [(1i8, Owner::Max), (-1i8, Owner::Min)] {
            let mut steps: Vec<Option<usize>> = vec![None; n];
            let mut pending: Vec<usize> = (0..n).map(|i| self.successors(i).len()).collect();
            let mut queue = VecDeque::new();
            for i in 0..n {
                if self.leaf[i] == Some(sign) {
                    steps[i] = Some(0);
                    queue.push_back(i);
                }
            }
            // FIFO order visits nodes by nondecreasing step count, so the
            // first hit fixes the hero's fastest forcing line and the last
            // pending successor fixes the opponent's slowest.
            while let Some(v) = queue.pop_front() {
                let t = steps[v].expect("queued nodes are solved");
                for &u in &pred[rstart[v]..rstart[v + 1]] {
                    if steps[u].is_some() || self.leaf[u].is_some() {
                        continue;
                    }
                    let forced = if self.owner[u] == hero {
                        true
                    } else {
                        pending[u] -= 1;
                        pending[u] == 0
                    };
                    if forced {
                        steps[u] = Some(t + 1);
                        queue.push_back(u);
                    }
                }
            }
            for i in 0..n {
                if let Some(t) = steps[i] {
                    out[i] = if sign > 0 { Outcome::Win(t) } else { Outcome::Loss(t) };
                }
            }
        }
        out
    }
}

//! Successive-shortest-path min-cost flow with non-negative real costs and
//! integer capacities.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: u64,
    cost: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct MinCostFlow {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct Dist(f64);

impl Eq for Dist {}
impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl MinCostFlow {
    pub fn new(n: usize) -> Self {
        MinCostFlow { edges: Vec::new(), adj: vec![Vec::new(); n] }
    }

    /// Adds `from -> to`; returns the edge id for [`flow_on`](Self::flow_on).
    /// Costs must be non-negative.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: u64, cost: f64) -> usize {
        debug_assert!(cost >= 0.0);
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge { to: from, cap: 0, cost: -cost });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    pub fn flow_on(&self, id: usize) -> u64 {
        self.edges[id + 1].cap
    }

    /// Sends up to `limit` units from `s` to `t` at minimum cost; returns the
    /// amount sent. Ties between equal-cost paths go to lower node indices.
    pub fn run(&mut self, s: usize, t: usize, limit: u64) -> u64 {
        let n = self.adj.len();
        let mut potential = vec![0.0f64; n];
        let mut sent = 0;
        while sent < limit {
            let mut dist = vec![f64::INFINITY; n];
            let mut prev_edge = vec![usize::MAX; n];
            let mut done = vec![false; n];
            dist[s] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(Reverse((Dist(0.0), s)));
            while let Some(Reverse((Dist(d), u))) = heap.pop() {
                if done[u] {
                    continue;
                }
                done[u] = true;
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap == 0 {
                        continue;
                    }
                    // reduced costs are >= 0 up to rounding
                    let nd = d + (edge.cost + potential[u] - potential[edge.to]).max(0.0);
                    if nd < dist[edge.to] {
                        dist[edge.to] = nd;
                        prev_edge[edge.to] = e;
                        heap.push(Reverse((Dist(nd), edge.to)));
                    }
                }
            }
            if !dist[t].is_finite() {
                break;
            }
            for v in 0..n {
                if dist[v].is_finite() {
                    potential[v] += dist[v];
                }
            }
            let mut push = limit - sent;
            let mut v = t;
            while v != s {
                let e = prev_edge[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let e = prev_edge[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            sent += push;
        }
        sent
    }
}

//! Directed integer max-flow / min-cut (Dinic) and the node-splitting
//! transform for mixed edge/node terminal cuts.

use std::collections::VecDeque;

use num_traits::PrimInt;

use crate::instance::Instance;

#[derive(Debug, Clone)]
struct Arc<C> {
    to: usize,
    cap: C,
    rev: usize,
}

/// A directed network with nonnegative integer capacities.
#[derive(Debug, Clone)]
pub struct FlowNetwork<C> {
    graph: Vec<Vec<Arc<C>>>,
    /// `(tail, index in graph[tail], original capacity)` per added arc.
    arcs: Vec<(usize, usize, C)>,
    pub source: usize,
    pub sink: usize,
}

/// Nodes on the source side of a minimum cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSide {
    pub members: Vec<bool>,
}

impl CutSide {
    pub fn contains(&self, v: usize) -> bool {
        self.members[v]
    }
}

#[derive(Debug, Clone)]
pub struct MaxFlow<C> {
    pub value: C,
    /// Flow on each arc, in insertion order.
    pub flow: Vec<C>,
    pub min_cut: CutSide,
}

impl<C: PrimInt> FlowNetwork<C> {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Self {
        assert!(source != sink, "source and sink must differ");
        assert!(source < nodes && sink < nodes);
        FlowNetwork { graph: vec![Vec::new(); nodes], arcs: Vec::new(), source, sink }
    }

    pub fn node_count(&self) -> usize {
        self.graph.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Adds arc `tail → head` and returns its id.
    pub fn add_arc(&mut self, tail: usize, head: usize, cap: C) -> usize {
        assert!(cap >= C::zero(), "negative capacity");
        let id = self.arcs.len();
        let fwd = self.graph[tail].len();
        let bwd = self.graph[head].len() + usize::from(tail == head);
        self.graph[tail].push(Arc { to: head, cap, rev: bwd });
        self.graph[head].push(Arc { to: tail, cap: C::zero(), rev: fwd });
        self.arcs.push((tail, fwd, cap));
        id
    }

    fn bfs(&self, level: &mut [usize]) -> bool {
        level.fill(usize::MAX);
        level[self.source] = 0;
        let mut queue = VecDeque::from([self.source]);
        while let Some(v) = queue.pop_front() {
            for arc in &self.graph[v] {
                if arc.cap > C::zero() && level[arc.to] == usize::MAX {
                    level[arc.to] = level[v] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        level[self.sink] != usize::MAX
    }

    fn dfs(&mut self, v: usize, limit: C, level: &[usize], iter: &mut [usize]) -> C {
        if v == self.sink {
            return limit;
        }
        while iter[v] < self.graph[v].len() {
            let i = iter[v];
            let Arc { to, cap, rev } = self.graph[v][i];
            if cap > C::zero() && level[v] < level[to] {
                let pushed = self.dfs(to, limit.min(cap), level, iter);
                if pushed > C::zero() {
                    self.graph[v][i].cap = cap - pushed;
                    self.graph[to][rev].cap = self.graph[to][rev].cap + pushed;
                    return pushed;
                }
            }
            iter[v] += 1;
        }
        C::zero()
    }

    /// Runs max-flow to completion. The network keeps its residual state.
    pub fn max_flow(&mut self) -> MaxFlow<C> {
        let n = self.graph.len();
        let mut level = vec![usize::MAX; n];
        let mut total = C::zero();
        while self.bfs(&mut level) {
            let mut iter = vec![0; n];
            loop {
                let f = self.dfs(self.source, C::max_value(), &level, &mut iter);
                if f == C::zero() {
                    break;
                }
                total = total + f;
            }
        }
        let flow = self
            .arcs
            .iter()
            .map(|&(tail, idx, cap)| cap - self.graph[tail][idx].cap)
            .collect();
        let min_cut = self.residual_reachable();
        MaxFlow { value: total, flow, min_cut }
    }

    fn residual_reachable(&self) -> CutSide {
        let mut seen = vec![false; self.graph.len()];
        seen[self.source] = true;
        let mut queue = VecDeque::from([self.source]);
        while let Some(v) = queue.pop_front() {
            for arc in &self.graph[v] {
                if arc.cap > C::zero() && !seen[arc.to] {
                    seen[arc.to] = true;
                    queue.push_back(arc.to);
                }
            }
        }
        CutSide { members: seen }
    }

    /// Capacity of the arcs leaving `side`.
    pub fn cut_capacity(&self, side: &CutSide) -> C {
        self.arcs
            .iter()
            .map(|&(tail, idx, cap)| (tail, self.graph[tail][idx].to, cap))
            .filter(|&(t, h, _)| side.contains(t) && !side.contains(h))
            .fold(C::zero(), |acc, (_, _, c)| acc + c)
    }

    pub fn arc_endpoints(&self, id: usize) -> (usize, usize) {
        let (tail, idx, _) = self.arcs[id];
        (tail, self.graph[tail][idx].to)
    }
}

/// Value of a minimum `{s}`–`(S−s)` mixed cut under the instance's own
/// capacities. `s` is a terminal index (position in `inst.terminals()`).
pub fn terminal_cut_value(inst: &Instance, s: usize) -> i64 {
    let edge_caps: Vec<i64> = inst.edges().iter().map(|e| e.u).collect();
    mixed_cut_value(inst, s, &edge_caps, inst.node_caps())
}

/// Minimum `{s}`–`(S−s)` cut value with explicit edge and node capacities
/// (node capacities of terminals are ignored).
///
/// Each non-terminal `i` becomes `i_in → i_out` with capacity `c(i)`; each
/// undirected edge `ij` becomes `i_out → j_in` and `j_out → i_in`; every
/// other terminal drains into a super sink.
pub fn mixed_cut_value(inst: &Instance, s: usize, edge_caps: &[i64], node_caps: &[i64]) -> i64 {
    let n = inst.n();
    // in(i) = i, out(i) = n + i for non-terminals; terminals use i for both.
    let sink = 2 * n;
    let inner_bound: i64 = edge_caps.iter().sum::<i64>() + 1;
    let source = inst.terminals()[s];
    let mut net = FlowNetwork::<i64>::new(2 * n + 1, source, sink);
    let out = |v: usize| if inst.is_terminal(v) { v } else { n + v };
    for v in 0..n {
        if !inst.is_terminal(v) {
            net.add_arc(v, n + v, node_caps[v]);
        }
    }
    for (e, edge) in inst.edges().iter().enumerate() {
        net.add_arc(out(edge.i), edge.j, edge_caps[e]);
        net.add_arc(out(edge.j), edge.i, edge_caps[e]);
    }
    for (t, &node) in inst.terminals().iter().enumerate() {
        if t != s {
            net.add_arc(node, sink, inner_bound);
        }
    }
    let result = net.max_flow();
    debug_assert_eq!(result.value, net.cut_capacity(&result.min_cut));
    result.value
}

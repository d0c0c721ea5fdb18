//! Undirected circulations with lower/upper bounds and self-loops.
//!
//! [`solve_circulation`] returns either a half-integral circulation or a
//! cut `(Y,Z)` maximizing the cut function [`kappa`]. The solver doubles every
//! node into `i⁺`/`i⁻`, which turns the problem into a bipartite directed
//! circulation solved with one max-flow.

use std::fmt::Write as _;

use crate::error::{ensure_internal, Error, ParseError, Result};
use crate::maxflow::FlowNetwork;
use crate::numeric::{ExtHalf, Half};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UEdge {
    pub u: usize,
    pub v: usize,
    pub lo: ExtHalf,
    pub hi: ExtHalf,
}

impl UEdge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

/// `((U,F), b̲, b̄)`; self-loops allowed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UndirectedNetwork {
    nodes: usize,
    edges: Vec<UEdge>,
}

impl UndirectedNetwork {
    pub fn new(nodes: usize) -> Self {
        UndirectedNetwork { nodes, edges: Vec::new() }
    }

    pub fn add_node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize, lo: ExtHalf, hi: ExtHalf) -> usize {
        assert!(u < self.nodes && v < self.nodes, "edge endpoint out of range");
        assert!(lo != ExtHalf::PosInf && hi != ExtHalf::NegInf, "bound on the wrong side");
        assert!(lo <= hi, "lower bound exceeds upper bound");
        self.edges.push(UEdge { u, v, lo, hi });
        self.edges.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[UEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &UEdge {
        &self.edges[e]
    }

    /// One edge per line, `i j lo hi`, after a `u <nodes>` header.
    pub fn dump(&self) -> String {
        let mut out = format!("u {}\n", self.nodes);
        for e in &self.edges {
            writeln!(out, "{} {} {} {}", e.u, e.v, e.lo, e.hi).unwrap();
        }
        out
    }

    /// Reads [`UndirectedNetwork::dump`] output. Without a header the node
    /// count is one more than the largest id.
    pub fn parse_dump(text: &str) -> Result<Self, ParseError> {
        let mut nodes: Option<usize> = None;
        let mut raw = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            let err = |msg: &str| ParseError::Syntax { line: line_no, msg: msg.to_string() };
            if toks[0] == "u" {
                if toks.len() != 2 || nodes.is_some() {
                    return Err(err("header must be a single `u <nodes>` line"));
                }
                nodes = Some(toks[1].parse().map_err(|_| err("bad node count"))?);
                continue;
            }
            if toks.len() != 4 {
                return Err(err("edge line must be `i j lo hi`"));
            }
            let u: usize = toks[0].parse().map_err(|_| err("bad node id"))?;
            let v: usize = toks[1].parse().map_err(|_| err("bad node id"))?;
            let lo: ExtHalf = toks[2].parse().map_err(|_| err("bad lower bound"))?;
            let hi: ExtHalf = toks[3].parse().map_err(|_| err("bad upper bound"))?;
            if lo == ExtHalf::PosInf || hi == ExtHalf::NegInf || lo > hi {
                return Err(err("bounds must satisfy lo <= hi with lo < inf and hi > -inf"));
            }
            raw.push((u, v, lo, hi, line_no));
        }
        let needed = raw.iter().map(|r| r.0.max(r.1) + 1).max().unwrap_or(0);
        let nodes = nodes.unwrap_or(needed);
        if needed > nodes {
            return Err(ParseError::Semantic("edge endpoint exceeds node count".into()));
        }
        let mut net = UndirectedNetwork::new(nodes);
        for (u, v, lo, hi, _) in raw {
            net.add_edge(u, v, lo, hi);
        }
        Ok(net)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Out,
    Y,
    Z,
}

/// A pair `(Y,Z)` of disjoint node sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cut {
    sides: Vec<Side>,
}

impl Cut {
    pub fn empty(nodes: usize) -> Self {
        Cut { sides: vec![Side::Out; nodes] }
    }

    pub fn from_sets(nodes: usize, y: &[usize], z: &[usize]) -> Self {
        let mut cut = Cut::empty(nodes);
        for &v in y {
            cut.sides[v] = Side::Y;
        }
        for &v in z {
            assert!(cut.sides[v] != Side::Y, "Y and Z must be disjoint");
            cut.sides[v] = Side::Z;
        }
        cut
    }

    pub fn from_sides(sides: Vec<Side>) -> Self {
        Cut { sides }
    }

    pub fn len(&self) -> usize {
        self.sides.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sides.iter().all(|&s| s == Side::Out)
    }

    pub fn side(&self, v: usize) -> Side {
        self.sides[v]
    }

    pub fn set(&mut self, v: usize, side: Side) {
        self.sides[v] = side;
    }

    /// `χ_{Y,Z}(v)`.
    pub fn chi(&self, v: usize) -> i64 {
        match self.sides[v] {
            Side::Y => 1,
            Side::Z => -1,
            Side::Out => 0,
        }
    }

    pub fn y_nodes(&self) -> Vec<usize> {
        (0..self.sides.len()).filter(|&v| self.sides[v] == Side::Y).collect()
    }

    pub fn z_nodes(&self) -> Vec<usize> {
        (0..self.sides.len()).filter(|&v| self.sides[v] == Side::Z).collect()
    }

    /// Keeps only the nodes selected by `keep`.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Cut {
        let sides = (0..self.sides.len()).map(|v| if keep(v) { self.sides[v] } else { Side::Out }).collect();
        Cut { sides }
    }
}

/// `χ_{Y,Z}` summed over the endpoint *set* of `e`; a self-loop counts its
/// node once.
fn endpoint_chi(cut: &Cut, e: &UEdge) -> i64 {
    if e.is_loop() {
        cut.chi(e.u)
    } else {
        cut.chi(e.u) + cut.chi(e.v)
    }
}

/// Contribution `κ_e(Y,Z) = χ_{Y,Z}(e)^+ b̲(e) − χ_{Z,Y}(e)^+ b̄(e)`.
pub fn kappa_edge(cut: &Cut, e: &UEdge) -> ExtHalf {
    let chi = endpoint_chi(cut, e);
    if chi > 0 {
        e.lo.scale(chi)
    } else if chi < 0 {
        (-e.hi).scale(-chi)
    } else {
        ExtHalf::int(0)
    }
}

/// The cut function `κ(Y,Z)`. Zero-coefficient infinite bounds contribute 0;
/// the result is `−∞` when an infinite bound enters with a positive
/// coefficient.
pub fn kappa(net: &UndirectedNetwork, cut: &Cut) -> ExtHalf {
    assert_eq!(cut.len(), net.node_count(), "cut and network sizes differ");
    net.edges
        .iter()
        .map(|e| kappa_edge(cut, e))
        .try_fold(ExtHalf::int(0), |acc, t| acc.checked_add(t))
        .expect("+∞ cannot arise in the cut function")
}

/// An edge weighting `y` with bounds respected and zero sum at every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circulation {
    pub y: Vec<Half>,
}

impl Circulation {
    /// Exact check of bounds and conservation.
    pub fn is_valid_for(&self, net: &UndirectedNetwork) -> bool {
        if self.y.len() != net.edges.len() {
            return false;
        }
        let mut balance = vec![Half::ZERO; net.node_count()];
        for (e, &y) in net.edges.iter().zip(&self.y) {
            let val = ExtHalf::Finite(y);
            if val < e.lo || val > e.hi {
                return false;
            }
            balance[e.u] += y;
            if !e.is_loop() {
                balance[e.v] += y;
            }
        }
        balance.iter().all(|b| b.is_zero())
    }

    pub fn is_half_integral(&self) -> bool {
        // Every Half is half-integral by construction; kept for symmetry with
        // callers that check this property explicitly.
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CirculationOutcome {
    Feasible(Circulation),
    /// A cut attaining the maximum of `κ`, which is positive.
    Violating { cut: Cut, kappa: Half },
}

impl CirculationOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, CirculationOutcome::Feasible(_))
    }
}

/// Solves the circulation problem.
///
/// All finite bounds must be integers. Infinite bounds are replaced
/// internally by `±B` with `B = 2·Σ|finite bounds| + 1`: any cut whose
/// `κ` uses an infinite bound with a positive coefficient is then negative,
/// so both feasibility and the maximum violating cut are unaffected.
pub fn solve_circulation(net: &UndirectedNetwork) -> Result<CirculationOutcome> {
    let n = net.node_count();
    let mut finite_sum: i64 = 0;
    for e in &net.edges {
        for b in [e.lo, e.hi] {
            if let ExtHalf::Finite(v) = b {
                let Some(int) = v.to_int() else {
                    return Err(Error::Contract(format!(
                        "circulation bounds must be integral on finite edges, edge {}-{} has {v}",
                        e.u, e.v
                    )));
                };
                finite_sum += int.abs();
            }
        }
    }
    let big = 2 * finite_sum + 1;
    let int_bound = |b: ExtHalf| match b {
        ExtHalf::Finite(v) => v.to_int().unwrap(),
        ExtHalf::NegInf => -big,
        ExtHalf::PosInf => big,
    };

    // i⁺ = i, i⁻ = n + i.
    let source = 2 * n;
    let sink = 2 * n + 1;
    let mut flow_net = FlowNetwork::<i64>::new(2 * n + 2, source, sink);
    let mut excess = vec![0i64; 2 * n];
    // (arc id, lower bound) for each directed copy of each edge.
    let mut copies: Vec<Vec<(usize, i64)>> = Vec::with_capacity(net.edges.len());
    for e in &net.edges {
        let lo = int_bound(e.lo);
        let hi = int_bound(e.hi);
        let arcs: Vec<(usize, usize)> = if e.is_loop() { vec![(e.u, n + e.u)] } else { vec![(e.u, n + e.v), (e.v, n + e.u)] };
        let mut ids = Vec::with_capacity(arcs.len());
        for (tail, head) in arcs {
            let id = flow_net.add_arc(tail, head, hi - lo);
            excess[head] += lo;
            excess[tail] -= lo;
            ids.push((id, lo));
        }
        copies.push(ids);
    }
    let mut supply = 0i64;
    for (v, &ex) in excess.iter().enumerate() {
        if ex > 0 {
            flow_net.add_arc(source, v, ex);
            supply += ex;
        } else if ex < 0 {
            flow_net.add_arc(v, sink, -ex);
        }
    }
    let result = flow_net.max_flow();

    if result.value == supply {
        let y = copies
            .iter()
            .map(|ids| {
                let total: i64 = ids.iter().map(|&(id, lo)| lo + result.flow[id]).sum();
                // One copy: y = ŷ; two copies: y = (ŷ₁+ŷ₂)/2. Doubled form below.
                Half::from_doubled(if ids.len() == 1 { 2 * total } else { total })
            })
            .collect();
        let circ = Circulation { y };
        ensure_internal!(circ.is_valid_for(net), "recovered circulation violates bounds or conservation");
        return Ok(CirculationOutcome::Feasible(circ));
    }

    let reach = &result.min_cut;
    let sides = (0..n)
        .map(|i| match (reach.contains(i), reach.contains(n + i)) {
            (false, true) => Side::Y,
            (true, false) => Side::Z,
            _ => Side::Out,
        })
        .collect();
    let cut = Cut::from_sides(sides);
    let deficiency = supply - result.value;
    let value = kappa(net, &cut);
    ensure_internal!(
        value == ExtHalf::int(deficiency),
        "projected cut has κ = {value}, expected deficiency {deficiency}"
    );
    Ok(CirculationOutcome::Violating { cut, kappa: Half::from_int(deficiency) })
}

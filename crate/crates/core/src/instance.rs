//! Problem instances: data model, NTB text format, validation, the
//! positive-cost reduction and feasibility checking.

use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, ParseError, Result};
use crate::maxflow::terminal_cut_value;
use crate::numeric::Half;

/// Undirected edge `ij` with capacity `u` and cost `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub u: i64,
    pub a: i64,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.i {
            self.j
        } else {
            self.i
        }
    }
}

/// A terminal backup network `((V,E),S,u,c,a,r)`.
///
/// Nodes are `0..n`. Terminals are addressed either by node id or by their
/// index `0..k` in [`Instance::terminals`]; requirements are indexed by
/// terminal index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    terminals: Vec<usize>,
    term_index: Vec<Option<usize>>,
    edges: Vec<Edge>,
    /// Node capacity per node id; always 0 for terminals.
    node_cap: Vec<i64>,
    req: Vec<i64>,
    incident: Vec<Vec<usize>>,
}

/// Headroom kept below `i64::MAX` for the largest quantity the solver forms.
const GUARD_LIMIT: i128 = (i64::MAX / 64) as i128;

impl Instance {
    /// Builds and validates an instance. `node_cap` is indexed by node id;
    /// entries for terminals must be zero.
    pub fn new(
        n: usize,
        terminals: Vec<usize>,
        req: Vec<i64>,
        node_cap: Vec<i64>,
        edges: Vec<Edge>,
    ) -> Result<Self, ParseError> {
        let sem = |msg: String| ParseError::Semantic(msg);
        if terminals.len() < 3 {
            return Err(sem(format!("need at least 3 terminals, got {}", terminals.len())));
        }
        if req.len() != terminals.len() {
            return Err(sem("requirement count differs from terminal count".into()));
        }
        if node_cap.len() != n {
            return Err(sem("node capacity vector has wrong length".into()));
        }
        let mut term_index = vec![None; n];
        for (idx, &t) in terminals.iter().enumerate() {
            if t >= n {
                return Err(sem(format!("terminal {t} out of range")));
            }
            if term_index[t].replace(idx).is_some() {
                return Err(sem(format!("terminal {t} listed twice")));
            }
            if node_cap[t] != 0 {
                return Err(sem(format!("terminal {t} carries a node capacity")));
            }
        }
        if let Some(&r) = req.iter().find(|&&r| r < 0) {
            return Err(sem(format!("negative requirement {r}")));
        }
        if let Some(&c) = node_cap.iter().find(|&&c| c < 0) {
            return Err(sem(format!("negative node capacity {c}")));
        }
        let mut seen = HashSet::new();
        let mut incident = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            if e.i >= n || e.j >= n {
                return Err(sem(format!("edge {} {} has an endpoint out of range", e.i, e.j)));
            }
            if e.i == e.j {
                return Err(sem(format!("self-loop at node {}", e.i)));
            }
            if e.u < 0 || e.a < 0 {
                return Err(sem(format!("edge {} {} has a negative capacity or cost", e.i, e.j)));
            }
            if !seen.insert((e.i.min(e.j), e.i.max(e.j))) {
                return Err(sem(format!("duplicate edge {} {}", e.i, e.j)));
            }
            incident[e.i].push(id);
            incident[e.j].push(id);
        }
        let inst = Instance { n, terminals, term_index, edges, node_cap, req, incident };
        inst.check_overflow_guard().map_err(|e| sem(e.to_string()))?;
        Ok(inst)
    }

    /// Rejects instances whose largest derived quantity could overflow.
    ///
    /// The bound covers `2·(Σu·a + Σr + Σc)` as well as the dual potentials,
    /// which stay within `2nA` per coordinate.
    pub fn check_overflow_guard(&self) -> Result<()> {
        let sum_u: i128 = self.edges.iter().map(|e| e.u as i128).sum();
        let ua: i128 = self.edges.iter().map(|e| e.u as i128 * e.a as i128).sum();
        let sum_r: i128 = self.req.iter().map(|&r| r as i128).sum();
        let sum_c: i128 = self.node_cap.iter().map(|&c| c as i128).sum();
        let max_a = self.max_cost() as i128;
        let base = 2 * (ua + sum_r + sum_c);
        let potential = (sum_u + sum_r + sum_c + 1) * (4 * self.n as i128 * max_a + 8) * 4;
        if base > GUARD_LIMIT || potential > GUARD_LIMIT {
            return Err(Error::Overflow(format!(
                "instance magnitudes too large (Σu·a={ua}, Σr={sum_r}, Σc={sum_c}, A={max_a})"
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn k(&self) -> usize {
        self.terminals.len()
    }

    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn terminal_index(&self, v: usize) -> Option<usize> {
        self.term_index[v]
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        self.term_index[v].is_some()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// Edge ids incident to `v`, in input order.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn node_cap(&self, v: usize) -> i64 {
        self.node_cap[v]
    }

    pub fn node_caps(&self) -> &[i64] {
        &self.node_cap
    }

    /// Requirement of terminal index `s`.
    pub fn req(&self, s: usize) -> i64 {
        self.req[s]
    }

    pub fn reqs(&self) -> &[i64] {
        &self.req
    }

    pub fn non_terminals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&v| !self.is_terminal(v))
    }

    pub fn max_cap(&self) -> i64 {
        self.edges.iter().map(|e| e.u).max().unwrap_or(0)
    }

    pub fn max_cost(&self) -> i64 {
        self.edges.iter().map(|e| e.a).max().unwrap_or(0)
    }

    /// `u(δv)`.
    pub fn incident_capacity(&self, v: usize) -> i64 {
        self.incident[v].iter().map(|&e| self.edges[e].u).sum()
    }

    /// Same network with every edge cost replaced.
    pub fn with_costs(&self, costs: &[i64]) -> Instance {
        assert_eq!(costs.len(), self.m());
        let mut out = self.clone();
        for (e, &a) in out.edges.iter_mut().zip(costs) {
            e.a = a;
        }
        out
    }

    /// Same network with every requirement replaced.
    pub fn with_reqs(&self, reqs: &[i64]) -> Instance {
        assert_eq!(reqs.len(), self.k());
        let mut out = self.clone();
        out.req = reqs.to_vec();
        out
    }

    /// `Σ a(e) x(e)`.
    pub fn cost_of(&self, x: &[Half]) -> Half {
        self.edges.iter().zip(x).map(|(e, &xe)| xe * e.a).sum()
    }

    /// Non-terminal nodes that cannot reach any terminal.
    pub fn isolated_non_terminals(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut stack: Vec<usize> = self.terminals.clone();
        for &t in &self.terminals {
            seen[t] = true;
        }
        while let Some(v) = stack.pop() {
            for &e in &self.incident[v] {
                let w = self.edges[e].other(v);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        (0..self.n).filter(|&v| !seen[v]).collect()
    }

    /// NTB text form; [`parse_instance`] reads it back to an equal instance.
    pub fn to_ntb_text(&self) -> String {
        let mut out = String::new();
        let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(" ");
        writeln!(out, "ntb {} {} {}", self.n, self.m(), self.k()).unwrap();
        writeln!(out, "t {}", join(&mut self.terminals.iter().map(|t| t.to_string()))).unwrap();
        writeln!(out, "r {}", join(&mut self.req.iter().map(|r| r.to_string()))).unwrap();
        for v in self.non_terminals() {
            writeln!(out, "c {} {}", v, self.node_cap[v]).unwrap();
        }
        for e in &self.edges {
            writeln!(out, "e {} {} {} {}", e.i, e.j, e.u, e.a).unwrap();
        }
        out
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, msg: msg.into() }
}

fn int_token(tok: &str, line: usize) -> Result<i64, ParseError> {
    tok.parse::<i64>().map_err(|_| syntax(line, format!("expected an integer, found `{tok}`")))
}

fn index_token(tok: &str, line: usize) -> Result<usize, ParseError> {
    tok.parse::<usize>().map_err(|_| syntax(line, format!("expected a node id, found `{tok}`")))
}

/// Reads the NTB text format.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    parse(text, false)
}

/// Reads the NTB text format for commands that ignore costs and
/// requirements: the `r` line may be absent (read as zeros) and edge lines may
/// omit the cost (read as 1).
pub fn parse_network(text: &str) -> Result<Instance, ParseError> {
    parse(text, true)
}

fn parse(text: &str, lenient: bool) -> Result<Instance, ParseError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut terminals: Option<Vec<usize>> = None;
    let mut req: Option<Vec<i64>> = None;
    let mut caps: Vec<(usize, Option<i64>, usize)> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let kw = toks[0];
        if header.is_none() && kw != "ntb" {
            return Err(syntax(line_no, "expected `ntb <n> <m> <k>` header"));
        }
        match kw {
            "ntb" => {
                if header.is_some() {
                    return Err(syntax(line_no, "duplicate header"));
                }
                if toks.len() != 4 {
                    return Err(syntax(line_no, "header must be `ntb <n> <m> <k>`"));
                }
                header = Some((
                    index_token(toks[1], line_no)?,
                    index_token(toks[2], line_no)?,
                    index_token(toks[3], line_no)?,
                ));
            }
            "t" => {
                let (_, _, k) = header.unwrap();
                if terminals.is_some() {
                    return Err(syntax(line_no, "duplicate terminal line"));
                }
                if toks.len() != k + 1 {
                    return Err(syntax(line_no, format!("expected {k} terminal ids")));
                }
                let ids = toks[1..].iter().map(|t| index_token(t, line_no)).collect::<Result<_, _>>()?;
                terminals = Some(ids);
            }
            "r" => {
                let (_, _, k) = header.unwrap();
                if req.is_some() {
                    return Err(syntax(line_no, "duplicate requirement line"));
                }
                if toks.len() != k + 1 {
                    return Err(syntax(line_no, format!("expected {k} requirements")));
                }
                let mut vals = Vec::with_capacity(k);
                for t in &toks[1..] {
                    if t.contains('.') {
                        return Err(syntax(line_no, format!("requirements must be integers, found `{t}`")));
                    }
                    vals.push(int_token(t, line_no)?);
                }
                req = Some(vals);
            }
            "c" => {
                if toks.len() != 3 {
                    return Err(syntax(line_no, "node capacity line must be `c <node> <int|inf>`"));
                }
                let v = index_token(toks[1], line_no)?;
                let cap = if toks[2] == "inf" { None } else { Some(int_token(toks[2], line_no)?) };
                caps.push((v, cap, line_no));
            }
            "e" => {
                let ok_len = toks.len() == 5 || (lenient && toks.len() == 4);
                if !ok_len {
                    return Err(syntax(line_no, "edge line must be `e <i> <j> <u> <a>`"));
                }
                let a = if toks.len() == 5 { int_token(toks[4], line_no)? } else { 1 };
                edges.push(Edge {
                    i: index_token(toks[1], line_no)?,
                    j: index_token(toks[2], line_no)?,
                    u: int_token(toks[3], line_no)?,
                    a,
                });
            }
            other => return Err(syntax(line_no, format!("unknown record `{other}`"))),
        }
    }

    let (n, m, k) = header.ok_or_else(|| syntax(last_line.max(1), "missing header"))?;
    let terminals = terminals.ok_or_else(|| syntax(last_line, "missing terminal line"))?;
    let req = match req {
        Some(r) => r,
        None if lenient => vec![0; k],
        None => return Err(syntax(last_line, "missing requirement line")),
    };
    if edges.len() != m {
        return Err(ParseError::Semantic(format!("header announces {m} edges, found {}", edges.len())));
    }
    // Provisional instance for adjacency; node caps are filled in below.
    let mut node_cap = vec![0i64; n];
    let mut given = vec![false; n];
    let mut infinite = Vec::new();
    let is_term: HashSet<usize> = terminals.iter().copied().collect();
    for &(v, cap, line) in &caps {
        if v >= n {
            return Err(syntax(line, format!("node {v} out of range")));
        }
        if is_term.contains(&v) {
            return Err(ParseError::Semantic(format!("terminal {v} carries a node capacity")));
        }
        if std::mem::replace(&mut given[v], true) {
            return Err(syntax(line, format!("duplicate capacity for node {v}")));
        }
        match cap {
            Some(c) => node_cap[v] = c,
            None => infinite.push(v),
        }
    }
    if let Some(v) = (0..n).find(|v| !is_term.contains(v) && !given[*v]) {
        return Err(ParseError::Semantic(format!("missing capacity line for node {v}")));
    }
    for &v in &infinite {
        // Any flow through v is bounded by the capacity of its incident edges.
        node_cap[v] = edges.iter().filter(|e| e.i == v || e.j == v).map(|e| e.u.max(0)).sum();
    }
    Instance::new(n, terminals, req, node_cap, edges)
}

/// Records how [`ensure_positive_costs`] changed the costs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostCertificate {
    /// `|Z|`, the number of zero-cost edges.
    pub zero_edges: usize,
    /// `U`, the maximum edge capacity.
    pub max_cap: i64,
    /// `2U|Z|+1`, or 1 when no edge had zero cost.
    pub multiplier: i64,
    pub original_costs: Vec<i64>,
}

impl CostCertificate {
    pub fn is_identity(&self) -> bool {
        self.zero_edges == 0
    }

    /// Cost of `x` under the original edge costs.
    pub fn original_cost(&self, x: &[Half]) -> Half {
        self.original_costs.iter().zip(x).map(|(&a, &xe)| xe * a).sum()
    }
}

/// Makes every edge cost positive without changing the set of half-integral
/// optimal solutions: zero-cost edges get cost 1 and the others are scaled by
/// `2U|Z|+1`.
pub fn ensure_positive_costs(inst: &Instance) -> Result<(Instance, CostCertificate)> {
    let original_costs: Vec<i64> = inst.edges().iter().map(|e| e.a).collect();
    let zero_edges = original_costs.iter().filter(|&&a| a == 0).count();
    let max_cap = inst.max_cap();
    if zero_edges == 0 {
        let cert = CostCertificate { zero_edges, max_cap, multiplier: 1, original_costs };
        return Ok((inst.clone(), cert));
    }
    let multiplier = (2 * max_cap as i128 * zero_edges as i128 + 1)
        .try_into()
        .map_err(|_| Error::Overflow("cost multiplier 2U|Z|+1 does not fit in 64 bits".into()))?;
    let mut costs = Vec::with_capacity(inst.m());
    for &a in &original_costs {
        let scaled = if a == 0 {
            1
        } else {
            a.checked_mul(multiplier).ok_or_else(|| {
                Error::Overflow(format!("scaled cost {a}·{multiplier} does not fit in 64 bits"))
            })?
        };
        costs.push(scaled);
    }
    let reduced = inst.with_costs(&costs);
    reduced.check_overflow_guard().map_err(|e| match e {
        Error::Overflow(msg) => Error::Overflow(format!("after the positive-cost reduction: {msg}")),
        other => other,
    })?;
    Ok((reduced, CostCertificate { zero_edges, max_cap, multiplier, original_costs }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub terminal: usize,
    pub nu: i64,
    pub r: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// `ν_s` per terminal index.
    pub nu: Vec<i64>,
    pub violations: Vec<Violation>,
}

/// Checks `ν_s ≥ r(s)` for every terminal, where `ν_s` is the minimum mixed
/// `{s}`–`(S−s)` cut under capacities `u` and `c`.
pub fn check_feasibility(inst: &Instance) -> FeasibilityReport {
    let nu: Vec<i64> = (0..inst.k()).into_par_iter().map(|s| terminal_cut_value(inst, s)).collect();
    let violations: Vec<Violation> = nu
        .iter()
        .enumerate()
        .filter(|&(s, &v)| v < inst.req(s))
        .map(|(s, &v)| Violation { terminal: inst.terminals()[s], nu: v, r: inst.req(s) })
        .collect();
    FeasibilityReport { feasible: violations.is_empty(), nu, violations }
}

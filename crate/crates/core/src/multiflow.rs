//! Separately-capacitated multiflows: path decomposition of a certified
//! optimum, validation, and the maximum multiflow of a network.

use std::collections::HashMap;

use serde::Serialize;

use crate::descent::{solve_scaled, verify_slackness, EdgeCapacity};
use crate::dualnet::{facing, Facing};
use crate::error::{ensure_internal, Error, Result};
use crate::instance::{check_feasibility, ensure_positive_costs, Instance};
use crate::numeric::Half;
use crate::subtree::{Potential, TreeKind};

/// An S-path with its weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlowPath {
    pub nodes: Vec<usize>,
    pub lambda: Half,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Multiflow {
    pub paths: Vec<FlowPath>,
}

impl Multiflow {
    /// `val f = Σ λ`.
    pub fn value(&self) -> Half {
        self.paths.iter().map(|p| p.lambda).sum()
    }

    /// `f(e)` per instance edge. Panics on a step that is not an edge.
    pub fn edge_flow(&self, inst: &Instance) -> Vec<Half> {
        let index = edge_index(inst);
        let mut flow = vec![Half::ZERO; inst.m()];
        for path in &self.paths {
            for w in path.nodes.windows(2) {
                flow[index[&key(w[0], w[1])]] += path.lambda;
            }
        }
        flow
    }

    /// `f(s)`, the total weight of paths ending at `s`, per terminal index.
    pub fn terminal_flow(&self, inst: &Instance) -> Vec<Half> {
        let mut flow = vec![Half::ZERO; inst.k()];
        for path in &self.paths {
            for end in [path.nodes[0], *path.nodes.last().unwrap()] {
                if let Some(s) = inst.terminal_index(end) {
                    flow[s] += path.lambda;
                }
            }
        }
        flow
    }
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn edge_index(inst: &Instance) -> HashMap<(usize, usize), usize> {
    inst.edges().iter().enumerate().map(|(id, e)| (key(e.i, e.j), id)).collect()
}

/// Where an edge enters a node, in terms of the slack classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Terminal,
    /// `δ_0 i` of an arm node.
    Inner,
    /// `δ_s i` of an arm node.
    Outer,
    /// `δ_s i` of a 0-type node.
    Arm(usize),
}

/// Records of the decomposition, for contract checks by callers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecomposeStats {
    /// Minimum over subtractions of the 0-type slack
    /// `Σ_{s''≠s'} x(δ_{s''} i) − x(δ_{s'} i)`; never negative.
    pub min_slack: Option<Half>,
    pub subtractions: usize,
}

/// Decomposes a certified optimum `(x, p)` into an S-path multiflow with
/// `f(e) = x(e)` everywhere.
///
/// Terminals are scanned in index order and their edges in input order; a
/// 0-type node continues along the arm with the most remaining flow, ties to
/// the smallest arm.
pub fn decompose(inst: &Instance, x: &EdgeCapacity, p: &Potential) -> Result<Multiflow> {
    decompose_with_stats(inst, x, p).map(|(f, _)| f)
}

pub fn decompose_with_stats(inst: &Instance, x: &EdgeCapacity, p: &Potential) -> Result<(Multiflow, DecomposeStats)> {
    let report = verify_slackness(inst, x, p)?;
    if !report.pass {
        let why: Vec<String> = report.failures.iter().map(|f| format!("{}: {}", f.clause, f.detail)).collect();
        return Err(Error::Contract(format!("decompose needs (x, p) satisfying C1–C5: {}", why.join("; "))));
    }
    if !x.has_integral_degrees(inst) {
        return Err(Error::Contract("decompose needs x(δi) integral at every node".into()));
    }
    let owned;
    let inst = if inst.edges().iter().all(|e| e.a > 0) {
        inst
    } else {
        owned = ensure_positive_costs(inst)?.0;
        &owned
    };
    let k = inst.k();
    let mut rest = x.x.clone();

    // class[e] = (class at e.i, class at e.j) for edges that may carry flow.
    let mut class = vec![None; inst.m()];
    for (id, e) in inst.edges().iter().enumerate() {
        if rest[id].is_zero() {
            continue;
        }
        let of = |v: usize, w: usize| -> Result<Class> {
            Ok(match facing(inst, p, v, w)? {
                Facing::Terminal => Class::Terminal,
                Facing::Base => Class::Inner,
                Facing::Tip => Class::Outer,
                Facing::Spoke(t) => Class::Arm(t),
            })
        };
        class[id] = Some((of(e.i, e.j)?, of(e.j, e.i)?));
    }
    let class_at = |id: usize, v: usize| -> Class {
        let (ci, cj) = class[id].expect("only edges with positive x are walked");
        if inst.edge(id).i == v {
            ci
        } else {
            cj
        }
    };
    // x(δ_s i) for 0-type nodes.
    let mut arm_flow = vec![vec![Half::ZERO; k]; inst.n()];
    for v in inst.non_terminals() {
        if p.tree(v).kind() == TreeKind::Zero {
            for &id in inst.incident(v) {
                if class[id].is_none() {
                    continue;
                }
                if let Class::Arm(t) = class_at(id, v) {
                    arm_flow[v][t] += rest[id];
                }
            }
        }
    }
    let slack = |flows: &[Half], s: usize| -> Half {
        let total: Half = flows.iter().sum();
        total - flows[s] - flows[s]
    };

    let mut stats = DecomposeStats::default();
    let mut paths = Vec::new();
    let path_cap = 16 * (inst.m() + k * inst.n()) + 16;
    loop {
        let start = inst.terminals().iter().enumerate().find_map(|(s, &t)| {
            inst.incident(t).iter().find(|&&id| rest[id].is_positive()).map(|&id| (s, t, id))
        });
        let Some((s0, t0, first)) = start else { break };
        ensure_internal!(paths.len() < path_cap, "decomposition exceeded {path_cap} paths");
        let mut nodes = vec![t0];
        let mut edges = vec![first];
        let mut mu = rest[first];
        let mut cur = inst.edge(first).other(t0);
        let mut via = first;
        while !inst.is_terminal(cur) {
            ensure_internal!(!nodes.contains(&cur), "walk revisited node {cur}");
            nodes.push(cur);
            let entered = class_at(via, cur);
            let pick = |want: &dyn Fn(Class) -> bool| {
                inst.incident(cur).iter().copied().find(|&id| id != via && rest[id].is_positive() && want(class_at(id, cur)))
            };
            let next = match entered {
                Class::Inner => pick(&|c| c == Class::Outer),
                Class::Outer => pick(&|c| c == Class::Inner),
                Class::Arm(from) => {
                    ensure_internal!(from == s0, "walk from terminal {t0} entered node {cur} from arm {from}");
                    let flows = &arm_flow[cur];
                    let best = (0..k).filter(|&s| s != from).max_by_key(|&s| (flows[s], std::cmp::Reverse(s)));
                    let Some(s) = best.filter(|&s| flows[s].is_positive()) else {
                        return Err(Error::Internal(format!("0-type node {cur} has no outgoing arm flow")));
                    };
                    for t in (0..k).filter(|&t| t != from && t != s) {
                        mu = mu.min(Half::from_doubled(slack(flows, t).doubled() / 2));
                    }
                    pick(&|c| c == Class::Arm(s))
                }
                Class::Terminal => None,
            };
            let Some(next) = next else {
                return Err(Error::Internal(format!("walk stuck at node {cur} entered via edge {via}")));
            };
            mu = mu.min(rest[next]);
            edges.push(next);
            via = next;
            cur = inst.edge(next).other(cur);
        }
        ensure_internal!(!nodes.contains(&cur), "path returned to its start terminal {cur}");
        nodes.push(cur);
        ensure_internal!(mu.is_positive(), "path weight is not positive");
        for &id in &edges {
            rest[id] -= mu;
            let e = inst.edge(id);
            for v in [e.i, e.j] {
                if let Class::Arm(t) = class_at(id, v) {
                    arm_flow[v][t] -= mu;
                }
            }
        }
        for &v in &nodes {
            if !inst.is_terminal(v) && p.tree(v).kind() == TreeKind::Zero {
                for s in 0..k {
                    let sl = slack(&arm_flow[v], s);
                    ensure_internal!(!sl.is_negative(), "0-type slack at node {v}, arm {s} became {sl}");
                    stats.min_slack = Some(stats.min_slack.map_or(sl, |m: Half| m.min(sl)));
                }
            }
        }
        stats.subtractions += 1;
        paths.push(FlowPath { nodes, lambda: mu });
    }
    ensure_internal!(rest.iter().all(|r| r.is_zero()), "flow left on edges after decomposition");
    Ok((Multiflow { paths }, stats))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub issues: Vec<String>,
    /// `(terminal, node)` pairs whose commodity flow exceeds `c(node)`.
    pub node_overloads: Vec<(usize, usize)>,
}

/// Checks paths, edge capacities, separate node capacities and, when `x` is
/// given, `f(e) = x(e)`.
pub fn validate_multiflow(inst: &Instance, f: &Multiflow, x: Option<&EdgeCapacity>) -> ValidationReport {
    let index = edge_index(inst);
    let mut issues = Vec::new();
    let mut edge_flow = vec![Half::ZERO; inst.m()];
    let mut commodity = vec![vec![Half::ZERO; inst.n()]; inst.k()];
    for (n, path) in f.paths.iter().enumerate() {
        let nodes = &path.nodes;
        if !path.lambda.is_positive() {
            issues.push(format!("path {n} has weight {}", path.lambda));
        }
        if nodes.len() < 2 {
            issues.push(format!("path {n} is too short"));
            continue;
        }
        let (a, b) = (nodes[0], nodes[nodes.len() - 1]);
        if !inst.is_terminal(a) || !inst.is_terminal(b) || a == b {
            issues.push(format!("path {n} does not join two distinct terminals"));
        }
        if nodes[1..nodes.len() - 1].iter().any(|&v| inst.is_terminal(v)) {
            issues.push(format!("path {n} passes through a terminal"));
        }
        let mut seen = nodes.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != nodes.len() {
            issues.push(format!("path {n} repeats a node"));
        }
        for w in nodes.windows(2) {
            match index.get(&key(w[0], w[1])) {
                Some(&id) => edge_flow[id] += path.lambda,
                None => issues.push(format!("path {n} uses the non-edge {}-{}", w[0], w[1])),
            }
        }
        for end in [a, b] {
            if let Some(s) = inst.terminal_index(end) {
                for &v in &nodes[1..nodes.len() - 1] {
                    commodity[s][v] += path.lambda;
                }
            }
        }
    }
    for (id, e) in inst.edges().iter().enumerate() {
        if edge_flow[id] > Half::from_int(e.u) {
            issues.push(format!("edge {}-{} carries {} > u = {}", e.i, e.j, edge_flow[id], e.u));
        }
        if let Some(x) = x {
            if edge_flow[id] != x.x[id] {
                issues.push(format!("edge {}-{} carries {} but x = {}", e.i, e.j, edge_flow[id], x.x[id]));
            }
        }
    }
    let mut node_overloads = Vec::new();
    for (s, row) in commodity.iter().enumerate() {
        for v in inst.non_terminals() {
            if row[v] > Half::from_int(inst.node_cap(v)) {
                let t = inst.terminals()[s];
                issues.push(format!("commodity of terminal {t} sends {} through node {v} (c = {})", row[v], inst.node_cap(v)));
                node_overloads.push((t, v));
            }
        }
    }
    ValidationReport { pass: issues.is_empty(), issues, node_overloads }
}

#[derive(Debug, Clone)]
pub struct MaxMultiflow {
    pub flow: Multiflow,
    pub value: Half,
    /// `ν_s` per terminal index.
    pub nu: Vec<i64>,
    pub x: EdgeCapacity,
}

/// A maximum separately-capacitated multiflow, obtained by solving the
/// instance with unit costs and `r = ν` and decomposing the optimum. Costs
/// and requirements of `netw` are ignored.
pub fn max_multiflow(netw: &Instance) -> Result<MaxMultiflow> {
    let nu = check_feasibility(netw).nu;
    let inst = netw.with_costs(&vec![1; netw.m()]).with_reqs(&nu);
    let res = solve_scaled(&inst)?;
    let flow = decompose(&inst, &res.x, &res.p)?;
    Ok(MaxMultiflow { value: flow.value(), flow, nu, x: res.x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{STAR, TRIANGLE};
    use crate::instance::parse_instance;

    #[test]
    fn star_decomposes_into_half_paths() {
        let inst = parse_instance(STAR).unwrap();
        let res = solve_scaled(&inst).unwrap();
        let f = decompose(&inst, &res.x, &res.p).unwrap();
        assert!(validate_multiflow(&inst, &f, Some(&res.x)).pass);
        assert_eq!(f.value(), Half::from_doubled(3));
        assert!(f.paths.iter().all(|p| p.lambda == Half::HALF && p.nodes.len() == 3));
        assert_eq!(f.terminal_flow(&inst), vec![Half::ONE; 3]);
    }

    #[test]
    fn triangle_uses_direct_edges() {
        let inst = parse_instance(TRIANGLE).unwrap();
        let res = solve_scaled(&inst).unwrap();
        let f = decompose(&inst, &res.x, &res.p).unwrap();
        assert_eq!(f.paths.len(), 3);
        assert!(f.paths.iter().all(|p| p.lambda == Half::HALF && p.nodes.len() == 2));
    }

    #[test]
    fn zero_capacity_gives_empty_flow() {
        let inst = parse_instance(STAR).unwrap();
        let f = decompose(&inst, &EdgeCapacity::zeros(3), &Potential::origin(&inst));
        // x ≡ 0 with r ≡ 1 violates C5, so the precondition fails.
        assert!(matches!(f, Err(Error::Contract(_))));
        let free = inst.with_reqs(&[0, 0, 0]);
        let f = decompose(&free, &EdgeCapacity::zeros(3), &Potential::origin(&free)).unwrap();
        assert!(f.paths.is_empty());
    }

    #[test]
    fn max_multiflow_known_values() {
        let tri = parse_instance(TRIANGLE).unwrap();
        let mf = max_multiflow(&tri).unwrap();
        assert_eq!(mf.nu, vec![2, 2, 2]);
        assert_eq!(mf.value, Half::from_int(3));
        assert!(mf.flow.paths.iter().all(|p| p.lambda == Half::ONE));

        let star = parse_instance(STAR).unwrap();
        let mf = max_multiflow(&star).unwrap();
        assert_eq!(mf.value, Half::from_doubled(3));

        let blocked = parse_instance(&STAR.replace("c 3 2", "c 3 0")).unwrap();
        let mf = max_multiflow(&blocked).unwrap();
        assert_eq!(mf.nu, vec![0, 0, 0]);
        assert!(mf.flow.paths.is_empty());
    }

    #[test]
    fn validation_flags_problems() {
        let wide = parse_instance(&STAR.replace(" 1 1\n", " 3 1\n")).unwrap();
        let heavy = Multiflow {
            paths: vec![
                FlowPath { nodes: vec![0, 3, 1], lambda: Half::from_doubled(3) },
                FlowPath { nodes: vec![0, 3, 2], lambda: Half::from_doubled(3) },
            ],
        };
        let report = validate_multiflow(&wide, &heavy, None);
        assert_eq!(report.node_overloads, vec![(0, 3)]);
        assert_eq!(report.issues.len(), 1);
        let looped = Multiflow { paths: vec![FlowPath { nodes: vec![0, 3, 0], lambda: Half::HALF }] };
        assert!(!validate_multiflow(&wide, &looped, None).pass);
    }
}

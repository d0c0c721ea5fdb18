//! JSON result documents. Half values are written as doubled integers in
//! fields ending in `_x2`.

use serde::{Deserialize, Serialize};

use crate::descent::{EdgeCapacity, SlacknessReport, SolveResult};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::multiflow::{MaxMultiflow, Multiflow};
use crate::numeric::Half;
use crate::subtree::{Potential, Subtree};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeValue {
    pub i: usize,
    pub j: usize,
    pub x_x2: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTree {
    pub node: usize,
    pub tree_x2: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathReport {
    pub nodes: Vec<usize>,
    pub lambda_x2: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiflowReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<i64>>,
    pub value_x2: i64,
    pub paths: Vec<PathReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: String,
    /// Cost under the costs given in the input.
    pub cost_x2: i64,
    /// Cost under the strictly positive costs actually optimized.
    #[serde(default)]
    pub reduced_cost_x2: Option<i64>,
    pub x: Vec<EdgeValue>,
    pub potential: Vec<NodeTree>,
    pub gap_x2: i64,
    #[serde(default)]
    pub iterations: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiflow: Option<MultiflowReport>,
}

pub fn edge_values(inst: &Instance, x: &EdgeCapacity) -> Vec<EdgeValue> {
    inst.edges().iter().zip(&x.x).map(|(e, v)| EdgeValue { i: e.i, j: e.j, x_x2: v.doubled() }).collect()
}

pub fn potential_rows(p: &Potential) -> Vec<NodeTree> {
    p.trees().iter().enumerate().map(|(node, t)| NodeTree { node, tree_x2: t.doubled_coords() }).collect()
}

pub fn multiflow_report(f: &Multiflow, nu: Option<Vec<i64>>) -> MultiflowReport {
    MultiflowReport {
        nu,
        value_x2: f.value().doubled(),
        paths: f.paths.iter().map(|p| PathReport { nodes: p.nodes.clone(), lambda_x2: p.lambda.doubled() }).collect(),
    }
}

pub fn max_multiflow_report(mm: &MaxMultiflow) -> MultiflowReport {
    multiflow_report(&mm.flow, Some(mm.nu.clone()))
}

pub fn solve_report(inst: &Instance, res: &SolveResult, flow: Option<&Multiflow>) -> SolveReport {
    SolveReport {
        status: "optimal".into(),
        cost_x2: res.original_cost.doubled(),
        reduced_cost_x2: Some(res.cost.doubled()),
        x: edge_values(inst, &res.x),
        potential: potential_rows(&res.p),
        gap_x2: res.gap.doubled(),
        iterations: res.iterations.clone(),
        multiflow: flow.map(|f| multiflow_report(f, None)),
    }
}

/// Reads `x` and `p` back from a [`SolveReport`], matching edges by their
/// unordered endpoints.
pub fn read_solution(inst: &Instance, report: &SolveReport) -> Result<(EdgeCapacity, Potential)> {
    let contract = |msg: String| Error::Contract(msg);
    let mut x = vec![None; inst.m()];
    for ev in &report.x {
        let id = inst
            .edges()
            .iter()
            .position(|e| (e.i, e.j) == (ev.i, ev.j) || (e.j, e.i) == (ev.i, ev.j))
            .ok_or_else(|| contract(format!("solution mentions unknown edge {} {}", ev.i, ev.j)))?;
        if x[id].replace(Half::from_doubled(ev.x_x2)).is_some() {
            return Err(contract(format!("edge {} {} listed twice", ev.i, ev.j)));
        }
    }
    let x = x.into_iter().map(|v| v.unwrap_or(Half::ZERO)).collect();
    let mut trees = vec![None; inst.n()];
    for row in &report.potential {
        if row.node >= inst.n() || row.tree_x2.len() != inst.k() {
            return Err(contract(format!("malformed potential row for node {}", row.node)));
        }
        let t = Subtree::new(row.tree_x2.iter().map(|&d| Half::from_doubled(d)).collect())?;
        trees[row.node] = Some(t);
    }
    let trees = trees
        .into_iter()
        .enumerate()
        .map(|(v, t)| t.ok_or_else(|| contract(format!("potential misses node {v}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok((EdgeCapacity { x }, Potential::new(inst, trees)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub gap_x2: i64,
    pub slackness: SlacknessReport,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::solve_scaled;
    use crate::fixtures::STAR;
    use crate::instance::parse_instance;

    #[test]
    fn solution_round_trips_through_json() {
        let inst = parse_instance(STAR).unwrap();
        let res = solve_scaled(&inst).unwrap();
        let report = solve_report(&inst, &res, None);
        assert_eq!(report.cost_x2, 6);
        assert_eq!(report.gap_x2, 0);
        let text = serde_json::to_string(&report).unwrap();
        let back: SolveReport = serde_json::from_str(&text).unwrap();
        let (x, p) = read_solution(&inst, &back).unwrap();
        assert_eq!(x, res.x);
        assert_eq!(p, res.p);
    }
}

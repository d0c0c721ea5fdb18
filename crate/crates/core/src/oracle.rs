//! Brute-force reference answers for small inputs.
//!
//! These never call into the descent machinery: the optimum is found by
//! exhaustive enumeration of half-integral capacities, cuts by enumerating all
//! of `3^U`, and subtree distances by walking explicit points of the star.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::circulation::{kappa, Cut, Side, UndirectedNetwork};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::maxflow::mixed_cut_value;
use crate::numeric::Half;
use crate::subtree::{Subtree, TreeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleBudget {
    /// Upper limit on `Π_e (2u(e)+1)`.
    pub max_combinations: u64,
    /// Upper limit on `|U|` for cut enumeration.
    pub max_cut_nodes: usize,
    pub time_limit: Option<Duration>,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_combinations: 5_000_000, max_cut_nodes: 12, time_limit: None }
    }
}

/// `Π_e (2u(e)+1)`, saturating.
pub fn combinations(inst: &Instance) -> u64 {
    inst.edges().iter().fold(1u64, |acc, e| acc.saturating_mul(2 * e.u as u64 + 1))
}

/// Minimum of `Σ a x` over half-integral `x` with `0 ≤ x ≤ u` that satisfy
/// every terminal's requirement; `None` when no such `x` exists.
pub fn brute_force_opt(inst: &Instance, budget: &OracleBudget) -> Result<Option<Half>> {
    let total = combinations(inst);
    if total > budget.max_combinations {
        return Err(Error::Budget(format!("{total} capacity vectors exceed the limit {}", budget.max_combinations)));
    }
    if inst.m() == 0 {
        return Ok(feasible_doubled(inst, &[]).then_some(Half::ZERO));
    }
    let started = Instant::now();
    let radix: Vec<i64> = inst.edges().iter().map(|e| 2 * e.u + 1).collect();
    let costs: Vec<i64> = inst.edges().iter().map(|e| e.a).collect();
    let timed_out = std::sync::atomic::AtomicBool::new(false);
    // Outermost edge value is split across threads; the rest is an odometer.
    let best = (0..radix[0])
        .into_par_iter()
        .filter_map(|first| {
            let mut x = vec![0i64; radix.len()];
            x[0] = first;
            let mut best: Option<i64> = None;
            let mut steps = 0u64;
            loop {
                let cost: i64 = x.iter().zip(&costs).map(|(v, a)| v * a).sum();
                if best.is_none_or(|b| cost < b) && feasible_doubled(inst, &x) {
                    best = Some(cost);
                }
                steps += 1;
                if steps.is_multiple_of(4096) {
                    if let Some(limit) = budget.time_limit {
                        if started.elapsed() > limit {
                            timed_out.store(true, std::sync::atomic::Ordering::Relaxed);
                            return best;
                        }
                    }
                }
                // Advance positions 1.. of the odometer.
                let mut pos = 1;
                loop {
                    if pos == x.len() {
                        return best;
                    }
                    x[pos] += 1;
                    if x[pos] < radix[pos] {
                        break;
                    }
                    x[pos] = 0;
                    pos += 1;
                }
            }
        })
        .min();
    if timed_out.into_inner() {
        return Err(Error::Budget("brute-force optimum hit its time limit".into()));
    }
    Ok(best.map(Half::from_doubled))
}

/// Feasibility of doubled capacities `x2`: every terminal reaches the others
/// with `2r` units under capacities `(x2, 2c)`.
fn feasible_doubled(inst: &Instance, x2: &[i64]) -> bool {
    // Cheap necessary check first: x(δs) ≥ r_s.
    for (s, &t) in inst.terminals().iter().enumerate() {
        let deg: i64 = inst.incident(t).iter().map(|&e| x2[e]).sum();
        if deg < 2 * inst.req(s) {
            return false;
        }
    }
    let node_caps: Vec<i64> = inst.node_caps().iter().map(|c| 2 * c).collect();
    (0..inst.k()).all(|s| mixed_cut_value(inst, s, x2, &node_caps) >= 2 * inst.req(s))
}

/// A cut maximizing `κ` if the maximum is positive; `None` when the network
/// has a circulation.
pub fn brute_force_max_violating(net: &UndirectedNetwork, budget: &OracleBudget) -> Result<Option<(Cut, Half)>> {
    let n = net.node_count();
    if n > budget.max_cut_nodes {
        return Err(Error::Budget(format!("{n} nodes exceed the cut-enumeration limit {}", budget.max_cut_nodes)));
    }
    let total = 3u64.pow(n as u32);
    let decode = |mut code: u64| {
        let sides = (0..n)
            .map(|_| {
                let side = match code % 3 {
                    0 => Side::Out,
                    1 => Side::Y,
                    _ => Side::Z,
                };
                code /= 3;
                side
            })
            .collect();
        Cut::from_sides(sides)
    };
    let best = (0..total)
        .into_par_iter()
        .filter_map(|code| kappa(net, &decode(code)).finite().map(|k| (k, std::cmp::Reverse(code))))
        .max();
    Ok(best.filter(|(k, _)| k.is_positive()).map(|(k, code)| (decode(code.0), k)))
}

/// Points of a subtree as `(arm, position in half units)`; the origin is
/// `(None, 0)`.
fn points(t: &Subtree) -> Vec<(Option<usize>, i64)> {
    match t.kind() {
        TreeKind::Zero => {
            let mut pts = vec![(None, 0)];
            for s in 0..t.k() {
                pts.extend((1..=t.coord(s).doubled()).map(|pos| (Some(s), pos)));
            }
            pts
        }
        TreeKind::Arm(s) => {
            let lo = -t.coord(if s == 0 { 1 } else { 0 }).doubled();
            (lo..=t.coord(s).doubled()).map(|pos| (Some(s), pos)).collect()
        }
    }
}

/// `dist(T, T')` by brute force over the half-unit points of both subtrees.
pub fn geometric_dist(a: &Subtree, b: &Subtree) -> Half {
    let pa = points(a);
    let pb = points(b);
    let walk = |(s, x): (Option<usize>, i64), (t, y): (Option<usize>, i64)| match (s, t) {
        (Some(s), Some(t)) if s == t => (x - y).abs(),
        _ => x + y,
    };
    let d = pa.iter().flat_map(|&p| pb.iter().map(move |&q| walk(p, q))).min().unwrap_or(0);
    Half::from_doubled(d)
}

/// Exhaustive check that no cut of `net` has positive `κ`.
pub fn is_circulation_feasible(net: &UndirectedNetwork, budget: &OracleBudget) -> Result<bool> {
    brute_force_max_violating(net, budget).map(|r| r.is_none())
}

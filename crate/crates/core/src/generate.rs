//! Seeded random inputs for experiments and test suites.
//!
//! Every generator takes an explicit RNG; nothing touches a global one.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circulation::UndirectedNetwork;
use crate::error::{Error, Result};
use crate::instance::{check_feasibility, Edge, Instance};
use crate::numeric::{ExtHalf, Half};
use crate::subtree::Subtree;

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub k: usize,
    pub p_edge: f64,
    pub max_u: i64,
    pub max_a: i64,
    pub max_c: i64,
    pub max_r: i64,
    /// Edges beyond this many are dropped at random (keeps oracles in budget).
    pub max_edges: Option<usize>,
    /// Skip the "every terminal has an edge" repair.
    pub allow_degenerate: bool,
    pub retries: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n: 8,
            k: 3,
            p_edge: 0.4,
            max_u: 2,
            max_a: 5,
            max_c: 3,
            max_r: 2,
            max_edges: None,
            allow_degenerate: false,
            retries: 200,
        }
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws one instance; terminals are nodes `0..k`. Not checked for
/// feasibility.
pub fn random_instance_unchecked<R: Rng>(params: &GenParams, rng: &mut R) -> Result<Instance> {
    let GenParams { n, k, .. } = *params;
    if k < 3 || n < k {
        return Err(Error::Contract(format!("need n ≥ k ≥ 3, got n={n}, k={k}")));
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(params.p_edge.clamp(0.0, 1.0)) {
                pairs.push((i, j));
            }
        }
    }
    if let Some(cap) = params.max_edges {
        if pairs.len() > cap {
            pairs.shuffle(rng);
            pairs.truncate(cap);
            pairs.sort_unstable();
        }
    }
    if !params.allow_degenerate && n > 1 {
        for s in 0..k {
            if pairs.iter().any(|&(i, j)| i == s || j == s) {
                continue;
            }
            let mut j = rng.gen_range(0..n - 1);
            if j >= s {
                j += 1;
            }
            let pair = (s.min(j), s.max(j));
            if let Some(cap) = params.max_edges {
                // Make room by dropping an edge not needed by an earlier terminal.
                if pairs.len() >= cap && cap > 0 {
                    let spare = pairs.iter().rposition(|&(a, b)| a >= s && b >= s && a != s && b != s);
                    match spare {
                        Some(idx) => {
                            pairs.remove(idx);
                        }
                        None => continue,
                    }
                }
            }
            pairs.push(pair);
        }
        pairs.sort_unstable();
        pairs.dedup();
    }
    let edges = pairs
        .into_iter()
        .map(|(i, j)| Edge { i, j, u: rng.gen_range(1..=params.max_u.max(1)), a: rng.gen_range(0..=params.max_a) })
        .collect();
    let node_cap = (0..n).map(|v| if v < k { 0 } else { rng.gen_range(0..=params.max_c) }).collect();
    let req = (0..k).map(|_| rng.gen_range(0..=params.max_r)).collect();
    Instance::new(n, (0..k).collect(), req, node_cap, edges).map_err(Error::from)
}

/// Draws instances until one is feasible, up to `params.retries` attempts.
pub fn random_instance<R: Rng>(params: &GenParams, rng: &mut R) -> Result<Instance> {
    for _ in 0..params.retries.max(1) {
        let inst = random_instance_unchecked(params, rng)?;
        if check_feasibility(&inst).feasible {
            return Ok(inst);
        }
    }
    Err(Error::Infeasible(format!("no feasible instance after {} attempts", params.retries.max(1))))
}

/// Random circulation network on `nodes` nodes: bounds in `[−3, 3]`, about
/// 30% of edges with `lo = hi`, and self-loops.
pub fn random_network<R: Rng>(nodes: usize, rng: &mut R) -> UndirectedNetwork {
    let mut net = UndirectedNetwork::new(nodes);
    let density = rng.gen_range(0.25..0.7);
    for i in 0..nodes {
        for j in i..nodes {
            let p = if i == j { 0.3 } else { density };
            if !rng.gen_bool(p) {
                continue;
            }
            let (lo, hi) = if rng.gen_bool(0.3) {
                let v = rng.gen_range(-3..=3);
                (v, v)
            } else {
                let a = rng.gen_range(-3..=3);
                let b = rng.gen_range(-3..=3);
                (a.min(b), a.max(b))
            };
            net.add_edge(i, j, ExtHalf::int(lo), ExtHalf::int(hi));
        }
    }
    net
}

/// Random membership-valid subtree with doubled coordinates in
/// `[−2·bound, 2·bound]`.
pub fn random_subtree<R: Rng>(k: usize, bound: i64, rng: &mut R) -> Subtree {
    let b2 = 2 * bound;
    let coords: Vec<i64> = if rng.gen_bool(0.5) || b2 == 0 {
        (0..k).map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(0..=b2) }).collect()
    } else {
        let s = rng.gen_range(0..k);
        let l = rng.gen_range(1..=b2);
        let l2 = rng.gen_range(l..=b2);
        (0..k).map(|t| if t == s { l2 } else { -l }).collect()
    };
    Subtree::new(coords.into_iter().map(Half::from_doubled).collect()).expect("generated subtree is valid")
}

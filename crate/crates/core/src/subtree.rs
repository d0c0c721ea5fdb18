//! Subtrees of the star of `k` paths glued at the origin, in the k-vector
//! representation, and the dual objective `h` over subtree-valued potentials.
//!
//! A vector `T` is a subtree iff either every coordinate is nonnegative
//! (0-type: the union of the segments `[0, T_s]` of each arm), or there is an
//! `s` with `T_s ≥ −T_t = −T_t' > 0` for all `t, t' ≠ s` (s-type: the interval
//! `[l, l']` of arm `s` with `l = −T_t`, `l' = T_s`).

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::numeric::Half;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TreeKind {
    /// Contains the origin.
    Zero,
    /// Lies inside arm `s` (terminal index), away from the origin.
    Arm(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Subtree {
    coords: Vec<Half>,
}

impl Subtree {
    /// Validates the membership condition.
    pub fn new(coords: Vec<Half>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Contract("a subtree vector needs at least two coordinates".into()));
        }
        let tree = Subtree { coords };
        if tree.find_kind().is_none() {
            return Err(Error::Contract(format!("{tree} is not a subtree vector")));
        }
        Ok(tree)
    }

    pub fn origin(k: usize) -> Self {
        Subtree { coords: vec![Half::ZERO; k] }
    }

    /// The point at distance `l ≥ 0` from the origin on arm `s`.
    pub fn point(k: usize, s: usize, l: Half) -> Self {
        Self::interval(k, s, l, l)
    }

    /// The segment `[l, l']` of arm `s`, `0 ≤ l ≤ l'`. With `l = 0` this is a
    /// 0-type tree.
    pub fn interval(k: usize, s: usize, l: Half, l2: Half) -> Self {
        assert!(Half::ZERO <= l && l <= l2, "interval [{l}, {l2}] is not ordered");
        let mut coords = vec![if l.is_zero() { Half::ZERO } else { -l }; k];
        coords[s] = l2;
        Subtree { coords }
    }

    /// A 0-type tree with the given arm lengths.
    pub fn star(lengths: Vec<Half>) -> Result<Self> {
        if lengths.iter().any(|l| l.is_negative()) {
            return Err(Error::Contract("0-type arm lengths must be nonnegative".into()));
        }
        Self::new(lengths)
    }

    pub fn k(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Half] {
        &self.coords
    }

    pub fn coord(&self, s: usize) -> Half {
        self.coords[s]
    }

    /// Doubled coordinates, the serialized form.
    pub fn doubled_coords(&self) -> Vec<i64> {
        self.coords.iter().map(|c| c.doubled()).collect()
    }

    fn find_kind(&self) -> Option<TreeKind> {
        if self.coords.iter().all(|c| !c.is_negative()) {
            return Some(TreeKind::Zero);
        }
        let (s, &top) = self.coords.iter().enumerate().max_by_key(|&(_, c)| *c)?;
        let other = self.coords[self.other_index(s)];
        let rest_equal = self.coords.iter().enumerate().all(|(t, &c)| t == s || c == other);
        (rest_equal && other.is_negative() && top >= -other).then_some(TreeKind::Arm(s))
    }

    pub fn kind(&self) -> TreeKind {
        self.find_kind().expect("membership is validated at construction")
    }

    pub fn is_zero_type(&self) -> bool {
        self.kind() == TreeKind::Zero
    }

    /// Smallest index different from `s`.
    fn other_index(&self, s: usize) -> usize {
        usize::from(s == 0)
    }

    /// `(l, l')` of an s-type tree.
    pub fn arm_interval(&self) -> Option<(usize, Half, Half)> {
        match self.kind() {
            TreeKind::Arm(s) => Some((s, -self.coords[self.other_index(s)], self.coords[s])),
            TreeKind::Zero => None,
        }
    }

    /// Total length.
    pub fn size(&self) -> Half {
        match self.kind() {
            TreeKind::Zero => self.coords.iter().sum(),
            TreeKind::Arm(s) => (self.coords[s] + self.coords[self.other_index(s)]).pos(),
        }
    }

    /// Length inside arm `s`.
    pub fn size_s(&self, s: usize) -> Result<Half> {
        match self.kind() {
            TreeKind::Zero => Ok(self.coords[s]),
            TreeKind::Arm(t) if t == s => Ok(self.size()),
            TreeKind::Arm(t) => Err(Error::Contract(format!("size_{s} requested for a tree of arm {t}"))),
        }
    }

    /// Distance from the origin (0 for 0-type trees).
    pub fn depth(&self) -> Half {
        match self.arm_interval() {
            Some((_, l, _)) => l,
            None => Half::ZERO,
        }
    }

    /// `‖T − T'‖ = max_s |T_s − T'_s|`.
    pub fn norm_to(&self, other: &Subtree) -> Half {
        self.coords.iter().zip(&other.coords).map(|(&a, &b)| (a - b).abs()).max().unwrap_or(Half::ZERO)
    }

    /// Every coordinate doubled; membership is preserved.
    pub fn doubled(&self) -> Subtree {
        Subtree { coords: self.coords.iter().map(|c| c.twice()).collect() }
    }
}

impl fmt::Display for Subtree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (idx, c) in self.coords.iter().enumerate() {
            if idx > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// `dist(T, T')`: minimum distance between the two subtrees.
pub fn dist(a: &Subtree, b: &Subtree) -> Half {
    dist_margin(a, b, 0)
}

/// `(dist(T, T') − margin)^+`.
pub fn dist_margin(a: &Subtree, b: &Subtree, margin: i64) -> Half {
    debug_assert_eq!(a.k(), b.k());
    let m = Half::from_int(margin);
    let pos = |v: Half| (v - m).pos();
    match (a.kind(), b.kind()) {
        (TreeKind::Zero, TreeKind::Zero) => Half::ZERO,
        (TreeKind::Arm(s), TreeKind::Arm(t)) if s == t => {
            let o = a.other_index(s);
            pos(-a.coords[s] - b.coords[o]) + pos(-a.coords[o] - b.coords[s])
        }
        (TreeKind::Arm(s), _) => pos(-a.coords[a.other_index(s)] - b.coords[s]),
        (TreeKind::Zero, TreeKind::Arm(t)) => pos(-b.coords[b.other_index(t)] - a.coords[t]),
    }
}

/// A subtree per node, with every terminal pinned to its own arm.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Potential {
    trees: Vec<Subtree>,
}

impl Potential {
    pub fn origin(inst: &Instance) -> Self {
        Potential { trees: vec![Subtree::origin(inst.k()); inst.n()] }
    }

    /// Validates the terminal condition `p_s ∈ P_s`.
    pub fn new(inst: &Instance, trees: Vec<Subtree>) -> Result<Self> {
        if trees.len() != inst.n() {
            return Err(Error::Contract(format!("potential has {} trees for {} nodes", trees.len(), inst.n())));
        }
        if let Some(bad) = trees.iter().position(|t| t.k() != inst.k()) {
            return Err(Error::Contract(format!("tree of node {bad} has the wrong dimension")));
        }
        for (s, &node) in inst.terminals().iter().enumerate() {
            let t = &trees[node];
            let ok = t.size().is_zero() && (t.kind() == TreeKind::Zero || t.kind() == TreeKind::Arm(s));
            if !ok {
                return Err(Error::Contract(format!("terminal {node} is not a point of its own arm: {t}")));
            }
        }
        Ok(Potential { trees })
    }

    /// From doubled coordinate rows, as serialized.
    pub fn from_doubled(inst: &Instance, rows: &[Vec<i64>]) -> Result<Self> {
        let trees = rows
            .iter()
            .map(|row| Subtree::new(row.iter().map(|&d| Half::from_doubled(d)).collect()))
            .collect::<Result<Vec<_>>>()?;
        Potential::new(inst, trees)
    }

    pub fn trees(&self) -> &[Subtree] {
        &self.trees
    }

    pub fn tree(&self, v: usize) -> &Subtree {
        &self.trees[v]
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// `L_s = dist(0, p_s)` per terminal index.
    pub fn terminal_depths(&self, inst: &Instance) -> Vec<Half> {
        inst.terminals().iter().map(|&t| self.trees[t].depth()).collect()
    }

    /// Whether every tree lies in the hull of the terminal points.
    pub fn is_proper(&self, inst: &Instance) -> bool {
        let depth = self.terminal_depths(inst);
        self.trees.iter().all(|t| match t.arm_interval() {
            Some((s, _, l2)) => l2 <= depth[s],
            None => t.coords.iter().zip(&depth).all(|(c, d)| c <= d),
        })
    }

    pub fn doubled(&self) -> Potential {
        Potential { trees: self.trees.iter().map(Subtree::doubled).collect() }
    }

    /// `‖p − q‖ = max_i ‖p_i − q_i‖`.
    pub fn norm_to(&self, other: &Potential) -> Half {
        self.trees.iter().zip(&other.trees).map(|(a, b)| a.norm_to(b)).max().unwrap_or(Half::ZERO)
    }

    pub fn doubled_rows(&self) -> Vec<Vec<i64>> {
        self.trees.iter().map(Subtree::doubled_coords).collect()
    }
}

/// `V∖S` split by tree type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePartition {
    pub v0: Vec<usize>,
    /// `vs[s]` for terminal index `s`.
    pub vs: Vec<Vec<usize>>,
}

impl NodePartition {
    pub fn of(inst: &Instance, p: &Potential) -> Self {
        let mut v0 = Vec::new();
        let mut vs = vec![Vec::new(); inst.k()];
        for v in inst.non_terminals() {
            match p.tree(v).kind() {
                TreeKind::Zero => v0.push(v),
                TreeKind::Arm(s) => vs[s].push(v),
            }
        }
        NodePartition { v0, vs }
    }
}

/// The dual objective
/// `h(p) = −Σ r_s dist(0,p_s) + Σ c_i size(p_i) + Σ u_ij (dist(p_i,p_j) − a_ij)^+`.
pub fn h_value(inst: &Instance, p: &Potential) -> Half {
    let terminals: Half = inst
        .terminals()
        .iter()
        .enumerate()
        .map(|(s, &t)| p.tree(t).depth() * inst.req(s))
        .sum();
    let nodes: Half = inst.non_terminals().map(|v| p.tree(v).size() * inst.node_cap(v)).sum();
    let edges: Half = inst
        .edges()
        .iter()
        .map(|e| dist_margin(p.tree(e.i), p.tree(e.j), e.a) * e.u)
        .sum();
    nodes + edges - terminals
}

/// Clips every tree to the hull of the terminal points; `h` does not increase.
pub fn properize(inst: &Instance, p: &Potential) -> Potential {
    let depth = p.terminal_depths(inst);
    let k = inst.k();
    let trees = p
        .trees
        .iter()
        .map(|t| match t.arm_interval() {
            Some((s, l, l2)) => Subtree::interval(k, s, l.min(depth[s]), l2.min(depth[s])),
            None => Subtree { coords: t.coords.iter().zip(&depth).map(|(&c, &d)| c.min(d)).collect() },
        })
        .collect();
    Potential { trees }
}

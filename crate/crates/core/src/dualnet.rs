//! The circulation network `N_p` of a proper potential, and the passage from
//! its circulations and cuts back to edge capacities and improved potentials.
//!
//! Node roles in `N_p`:
//! * terminal `s` — one node `s⁰` with a self-loop `e_s`;
//! * `i` with an s-type tree — `i⁰` (origin side) and `iˢ` (far side) joined
//!   by `e_i`;
//! * `i` with a 0-type tree — hubs `i^{s,0}` forming a clique and spokes
//!   `i^s`, each hub joined to its spoke by `e_i^s`.
//!
//! Every node except the hubs carries a coordinate of the potential:
//! `p(s⁰) = −dist(0,p_s)`, `p(i⁰) = −l`, `p(iˢ) = l'` for `p_i = [l,l']_s`, and
//! `p(i^s) = (p_i)_s` for 0-type trees.

use crate::circulation::{kappa, Circulation, Cut, Side, UndirectedNetwork};
use crate::descent::EdgeCapacity;
use crate::error::{ensure_internal, Error, Result};
use crate::instance::Instance;
use crate::numeric::{ExtHalf, Half};
use crate::subtree::{dist, NodePartition, Potential, Subtree, TreeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// `s⁰` of the terminal with this index.
    Terminal(usize),
    /// `i⁰` of an s-type node.
    Base(usize),
    /// `iˢ` of an s-type node.
    Tip(usize),
    /// `i^{s,0}` of a 0-type node.
    Hub(usize, usize),
    /// `i^s` of a 0-type node.
    Spoke(usize, usize),
}

/// The copies of one original node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gadget {
    Terminal { s: usize, node: usize, self_loop: usize },
    Arm { s: usize, base: usize, tip: usize, edge: usize },
    Zero { hubs: Vec<usize>, spokes: Vec<usize>, spoke_edges: Vec<usize> },
}

/// Which copy of `i` an edge `ij` of `E_p` attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Facing {
    Terminal,
    /// `i⁰`: `p_j` lies on the origin side of `p_i` (`δ_0 i`).
    Base,
    /// `iˢ`: `p_j` lies beyond `p_i` on its arm (`δ_s i`).
    Tip,
    /// `i^t` of a 0-type node: `p_j` lies on arm `t` (`δ_t i`).
    Spoke(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplacedEdge {
    /// Index of the edge in `N_p`.
    pub f: usize,
    pub end_i: usize,
    pub end_j: usize,
}

#[derive(Debug, Clone)]
pub struct DualNetwork {
    pub net: UndirectedNetwork,
    pub roles: Vec<Role>,
    pub gadgets: Vec<Gadget>,
    /// Per instance edge: its replacement if the edge is in `E_p`.
    pub replaced: Vec<Option<ReplacedEdge>>,
    pub partition: NodePartition,
    /// `p(j)` for every node of `N_p` but the hubs.
    pub value: Vec<Option<Half>>,
    /// Membership in `U^↑` (integral coordinates and all hubs).
    pub up_side: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Up => "up",
            Direction::Down => "down",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MovableCut {
    pub cut: Cut,
    pub direction: Direction,
    pub kappa: Half,
}

/// Whether every edge cost is positive, as `N_p` requires.
pub fn has_positive_costs(inst: &Instance) -> bool {
    inst.edges().iter().all(|e| e.a > 0)
}

/// The copy of `i` that an edge `ij` with `dist(p_i,p_j) > 0` attaches to.
pub fn facing(inst: &Instance, p: &Potential, i: usize, j: usize) -> Result<Facing> {
    if inst.is_terminal(i) {
        return Ok(Facing::Terminal);
    }
    let pj = p.tree(j);
    // Arm of p_j, if p_j avoids the origin; terminals at the origin have none.
    let arm_j = match pj.kind() {
        TreeKind::Arm(t) => Some(t),
        TreeKind::Zero => None,
    };
    match p.tree(i).kind() {
        TreeKind::Zero => match arm_j {
            Some(t) => Ok(Facing::Spoke(t)),
            None => Err(Error::Internal(format!("edge {i}-{j} joins two trees through the origin"))),
        },
        TreeKind::Arm(s) if arm_j == Some(s) => {
            if p.tree(i).depth() < pj.depth() {
                Ok(Facing::Tip)
            } else {
                Ok(Facing::Base)
            }
        }
        TreeKind::Arm(_) => Ok(Facing::Base),
    }
}

/// Builds `N_p`. The potential must be proper and every cost positive.
pub fn build_dual_network(inst: &Instance, p: &Potential) -> Result<DualNetwork> {
    if !p.is_proper(inst) {
        return Err(Error::Contract("N_p needs a proper potential".into()));
    }
    if !has_positive_costs(inst) {
        return Err(Error::Contract("N_p needs every edge cost to be positive".into()));
    }
    let k = inst.k();
    let mut net = UndirectedNetwork::new(0);
    let mut roles = Vec::new();
    let mut value = Vec::new();
    let mut gadgets = Vec::with_capacity(inst.n());
    let mut add = |net: &mut UndirectedNetwork, role: Role, v: Option<Half>| {
        roles.push(role);
        value.push(v);
        net.add_node()
    };
    let neg = |c: i64| ExtHalf::int(-c);

    for v in 0..inst.n() {
        let tree = p.tree(v);
        if let Some(s) = inst.terminal_index(v) {
            let depth = tree.depth();
            let node = add(&mut net, Role::Terminal(s), Some(-depth));
            let lo = if depth.is_zero() { ExtHalf::NegInf } else { neg(inst.req(s)) };
            let self_loop = net.add_edge(node, node, lo, neg(inst.req(s)));
            gadgets.push(Gadget::Terminal { s, node, self_loop });
            continue;
        }
        let c = inst.node_cap(v);
        match tree.arm_interval() {
            Some((s, l, l2)) => {
                let base = add(&mut net, Role::Base(v), Some(-l));
                let tip = add(&mut net, Role::Tip(v), Some(l2));
                let hi = if tree.size().is_zero() { ExtHalf::int(0) } else { neg(c) };
                let edge = net.add_edge(base, tip, neg(c), hi);
                gadgets.push(Gadget::Arm { s, base, tip, edge });
            }
            None => {
                let hubs: Vec<usize> = (0..k).map(|s| add(&mut net, Role::Hub(v, s), None)).collect();
                let spokes: Vec<usize> =
                    (0..k).map(|s| add(&mut net, Role::Spoke(v, s), Some(tree.coord(s)))).collect();
                let spoke_edges = (0..k)
                    .map(|s| {
                        let hi = if tree.coord(s).is_zero() { ExtHalf::int(0) } else { neg(c) };
                        net.add_edge(hubs[s], spokes[s], neg(c), hi)
                    })
                    .collect();
                for a in 0..k {
                    for b in a + 1..k {
                        net.add_edge(hubs[a], hubs[b], ExtHalf::int(0), ExtHalf::PosInf);
                    }
                }
                gadgets.push(Gadget::Zero { hubs, spokes, spoke_edges });
            }
        }
    }

    let copy_of = |v: usize, f: Facing| -> Result<usize> {
        match (&gadgets[v], f) {
            (Gadget::Terminal { node, .. }, Facing::Terminal) => Ok(*node),
            (Gadget::Arm { base, .. }, Facing::Base) => Ok(*base),
            (Gadget::Arm { tip, .. }, Facing::Tip) => Ok(*tip),
            (Gadget::Zero { spokes, .. }, Facing::Spoke(t)) => Ok(spokes[t]),
            (g, f) => Err(Error::Internal(format!("node {v} has no copy facing {f:?} ({g:?})"))),
        }
    };
    let mut replaced = Vec::with_capacity(inst.m());
    for e in inst.edges() {
        let d = dist(p.tree(e.i), p.tree(e.j));
        let a = Half::from_int(e.a);
        if d < a {
            replaced.push(None);
            continue;
        }
        let end_i = copy_of(e.i, facing(inst, p, e.i, e.j)?)?;
        let end_j = copy_of(e.j, facing(inst, p, e.j, e.i)?)?;
        let lo = if d == a { 0 } else { e.u };
        let f = net.add_edge(end_i, end_j, ExtHalf::int(lo), ExtHalf::int(e.u));
        replaced.push(Some(ReplacedEdge { f, end_i, end_j }));
    }

    let up_side = value.iter().map(|v| v.is_none_or(|x| x.is_integral())).collect();
    Ok(DualNetwork { net, roles, gadgets, replaced, partition: NodePartition::of(inst, p), value, up_side })
}

impl DualNetwork {
    pub fn node_count(&self) -> usize {
        self.net.node_count()
    }

    /// `κ` of a cut of `N_p`, which must be finite here.
    pub fn kappa(&self, cut: &Cut) -> Result<Half> {
        kappa(&self.net, cut)
            .finite()
            .ok_or_else(|| Error::Internal("cut of N_p has κ = −∞".into()))
    }
}

/// `x(e) = y(e')` on `E_p` (where `e'` replaces `e`), 0 elsewhere.
pub fn extract_edge_capacity(dn: &DualNetwork, y: &Circulation) -> EdgeCapacity {
    let x = dn
        .replaced
        .iter()
        .map(|r| r.map_or(Half::ZERO, |r| y.y[r.f]))
        .collect();
    EdgeCapacity { x }
}

/// Rewrites a maximum violating cut so that a small move along it stays in
/// the subtree space, without decreasing `κ`.
///
/// s-type nodes come first, then 0-type nodes in id order; both kinds only
/// touch their own copies, so the order does not change the result.
pub fn normalize_cut(dn: &DualNetwork, raw: &Cut) -> Result<Cut> {
    let before = dn.kappa(raw)?;
    let mut cut = raw.clone();
    for g in &dn.gadgets {
        if let Gadget::Arm { base, tip, .. } = *g {
            let flat = dn.value[base].unwrap() + dn.value[tip].unwrap() == Half::ZERO;
            let sides = [cut.side(base), cut.side(tip)];
            if flat && !sides.contains(&Side::Y) && sides.contains(&Side::Z) {
                cut.set(base, Side::Out);
                cut.set(tip, Side::Out);
            }
        }
    }
    for g in &dn.gadgets {
        let Gadget::Zero { hubs, spokes, .. } = g else { continue };
        let k = hubs.len();
        let flat = |s: usize| dn.value[spokes[s]].unwrap().is_zero();
        let hubs_in_z: Vec<usize> = (0..k).filter(|&s| cut.side(hubs[s]) == Side::Z).collect();
        let becoming = match hubs_in_z.as_slice() {
            &[s] => (0..k).filter(|&t| t != s).all(|t| {
                cut.side(hubs[t]) == Side::Y && cut.side(spokes[t]) == Side::Z && flat(t)
            }),
            _ => false,
        };
        if becoming {
            let s = hubs_in_z[0];
            if flat(s) {
                cut.set(spokes[s], Side::Y);
            }
        } else {
            for s in 0..k {
                cut.set(hubs[s], Side::Out);
                if flat(s) && cut.side(spokes[s]) == Side::Z {
                    cut.set(spokes[s], Side::Out);
                }
            }
        }
    }
    let after = dn.kappa(&cut)?;
    ensure_internal!(after >= before, "normalization decreased κ from {before} to {after}");
    Ok(cut)
}

/// Splits a normalized cut into its `U^↑` and `U^↓` parts, whose `κ` values
/// add up to the whole.
pub fn split_movable(dn: &DualNetwork, normalized: &Cut) -> Result<(MovableCut, MovableCut)> {
    let up = normalized.restrict(|v| dn.up_side[v]);
    let down = normalized.restrict(|v| !dn.up_side[v]);
    let (ku, kd, kw) = (dn.kappa(&up)?, dn.kappa(&down)?, dn.kappa(normalized)?);
    ensure_internal!(ku + kd == kw, "κ is not additive over the split: {ku} + {kd} ≠ {kw}");
    Ok((
        MovableCut { cut: up, direction: Direction::Up, kappa: ku },
        MovableCut { cut: down, direction: Direction::Down, kappa: kd },
    ))
}

/// The violating part with the larger `κ`, preferring the upward one on ties.
pub fn choose_movable(up: MovableCut, down: MovableCut) -> MovableCut {
    if down.kappa > up.kappa {
        down
    } else {
        up
    }
}

/// `p + ½χ̃_{Y,Z}`, read back as a potential.
pub fn apply_cut(inst: &Instance, dn: &DualNetwork, p: &Potential, mc: &MovableCut) -> Result<Potential> {
    let k = inst.k();
    let half_chi = |u: usize| Half::from_doubled(mc.cut.chi(u));
    let mut trees = Vec::with_capacity(inst.n());
    for (v, g) in dn.gadgets.iter().enumerate() {
        let tree = match g {
            Gadget::Terminal { s, node, .. } => {
                let depth = -(dn.value[*node].unwrap() + half_chi(*node));
                if depth.is_negative() {
                    return Err(Error::Contract(format!("terminal {v} would leave its arm")));
                }
                Subtree::point(k, *s, depth)
            }
            Gadget::Arm { s, base, tip, .. } => {
                let l = -(dn.value[*base].unwrap() + half_chi(*base));
                let l2 = dn.value[*tip].unwrap() + half_chi(*tip);
                if l.is_negative() || l2 < l {
                    return Err(Error::Contract(format!("node {v} would get the non-tree [{l}, {l2}] on arm {s}")));
                }
                Subtree::interval(k, *s, l, l2)
            }
            Gadget::Zero { spokes, .. } => {
                let coords = spokes.iter().map(|&u| dn.value[u].unwrap() + half_chi(u)).collect();
                Subtree::new(coords)
                    .map_err(|e| Error::Contract(format!("node {v}: {e}")))?
            }
        };
        trees.push(tree);
    }
    debug_assert_eq!(p.len(), trees.len());
    Potential::new(inst, trees)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circulation::{solve_circulation, CirculationOutcome};
    use crate::fixtures::{STAR, TRIANGLE};
    use crate::instance::parse_instance;
    use crate::subtree::h_value;

    fn star_at(inst: &Instance, l: Half) -> Potential {
        let mut trees = vec![Subtree::origin(3); inst.n()];
        for s in 0..3 {
            trees[inst.terminals()[s]] = Subtree::point(3, s, l);
        }
        Potential::new(inst, trees).unwrap()
    }

    #[test]
    fn star_at_origin_has_no_replaced_edges() {
        let inst = parse_instance(STAR).unwrap();
        let dn = build_dual_network(&inst, &Potential::origin(&inst)).unwrap();
        assert_eq!(dn.node_count(), 3 + 6);
        assert!(dn.replaced.iter().all(Option::is_none));
        // Self-loops first, then three spokes and the hub triangle.
        assert_eq!(dn.net.edge(0).lo, ExtHalf::NegInf);
        assert_eq!(dn.net.edge(0).hi, ExtHalf::int(-1));
        assert_eq!(dn.net.edges().len(), 3 + 3 + 3);
        let spoke = dn.net.edges().iter().find(|e| e.lo == ExtHalf::int(-2)).unwrap();
        assert_eq!(spoke.hi, ExtHalf::int(0));
    }

    #[test]
    fn star_at_unit_depth_replaces_every_edge() {
        let inst = parse_instance(STAR).unwrap();
        let dn = build_dual_network(&inst, &star_at(&inst, Half::ONE)).unwrap();
        for r in &dn.replaced {
            let e = dn.net.edge(r.unwrap().f);
            assert_eq!((e.lo, e.hi), (ExtHalf::int(0), ExtHalf::int(1)));
        }
        assert_eq!(dn.net.edge(0).lo, ExtHalf::int(-1));
        let CirculationOutcome::Feasible(y) = solve_circulation(&dn.net).unwrap() else {
            panic!("optimal potential must certify");
        };
        let x = extract_edge_capacity(&dn, &y);
        assert_eq!(x.x, vec![Half::ONE; 3]);
    }

    #[test]
    fn arm_gadget_bounds() {
        let text = "ntb 4 3 3\nt 0 1 2\nr 1 1 1\nc 3 3\ne 0 3 1 1\ne 1 3 1 1\ne 2 3 1 1\n";
        let inst = parse_instance(text).unwrap();
        let mut trees = vec![Subtree::origin(3); 4];
        trees[0] = Subtree::point(3, 0, Half::from_int(2));
        trees[3] = Subtree::interval(3, 0, Half::ONE, Half::from_doubled(3));
        let p = Potential::new(&inst, trees).unwrap();
        let dn = build_dual_network(&inst, &p).unwrap();
        let Gadget::Arm { edge, .. } = dn.gadgets[3] else { panic!("node 3 is on arm 0") };
        let e = dn.net.edge(edge);
        assert_eq!((e.lo, e.hi), (ExtHalf::int(-3), ExtHalf::int(-3)));
    }

    #[test]
    fn first_star_step_descends_by_half_kappa() {
        let inst = parse_instance(STAR).unwrap();
        let p = Potential::origin(&inst);
        let dn = build_dual_network(&inst, &p).unwrap();
        let CirculationOutcome::Violating { cut, kappa } = solve_circulation(&dn.net).unwrap() else {
            panic!("origin is not optimal");
        };
        let norm = normalize_cut(&dn, &cut).unwrap();
        let (up, down) = split_movable(&dn, &norm).unwrap();
        assert!(down.cut.is_empty());
        assert_eq!(up.kappa, kappa);
        let q = apply_cut(&inst, &dn, &p, &up).unwrap();
        assert_eq!(h_value(&inst, &q).twice(), h_value(&inst, &p).twice() - up.kappa);
    }

    #[test]
    fn triangle_optimum_certifies() {
        let inst = parse_instance(TRIANGLE).unwrap();
        let p = star_at(&inst, Half::HALF);
        let dn = build_dual_network(&inst, &p).unwrap();
        let CirculationOutcome::Feasible(y) = solve_circulation(&dn.net).unwrap() else {
            panic!("depth 1/2 is optimal for the triangle");
        };
        assert_eq!(extract_edge_capacity(&dn, &y).x, vec![Half::HALF; 3]);
    }

    #[test]
    fn terminal_moves_out_along_its_arm() {
        let inst = parse_instance(STAR).unwrap();
        let p = Potential::origin(&inst);
        let dn = build_dual_network(&inst, &p).unwrap();
        let cut = Cut::from_sets(dn.node_count(), &[], &[0]);
        let mc = MovableCut { cut, direction: Direction::Up, kappa: Half::ZERO };
        let q = apply_cut(&inst, &dn, &p, &mc).unwrap();
        assert_eq!(q.tree(0), &Subtree::point(3, 0, Half::HALF));
    }

    #[test]
    fn becoming_arm_type() {
        let inst = parse_instance(STAR).unwrap();
        let p = Potential::origin(&inst);
        let dn = build_dual_network(&inst, &p).unwrap();
        let Gadget::Zero { hubs, spokes, .. } = dn.gadgets[3].clone() else { panic!() };
        // Z = {i^{1,0}, i^2, i^3}, Y = {i^{2,0}, i^{3,0}}; normalization adds i^1 to Y.
        let raw = Cut::from_sets(dn.node_count(), &[hubs[1], hubs[2]], &[hubs[0], spokes[1], spokes[2]]);
        let norm = normalize_cut(&dn, &raw).unwrap();
        assert_eq!(norm.side(spokes[0]), Side::Y);
        let mc = MovableCut { cut: norm, direction: Direction::Up, kappa: Half::ZERO };
        let q = apply_cut(&inst, &dn, &p, &mc).unwrap();
        let expect = Subtree::interval(3, 0, Half::HALF, Half::HALF);
        assert_eq!(q.tree(3), &expect);
    }

    #[test]
    fn rejects_non_proper_or_zero_costs() {
        let inst = parse_instance(STAR).unwrap();
        let mut trees = vec![Subtree::origin(3); 4];
        trees[3] = Subtree::interval(3, 0, Half::HALF, Half::ONE);
        let p = Potential::new(&inst, trees).unwrap();
        assert!(matches!(build_dual_network(&inst, &p), Err(Error::Contract(_))));
        let free = inst.with_costs(&[0, 1, 1]);
        assert!(matches!(build_dual_network(&free, &Potential::origin(&free)), Err(Error::Contract(_))));
    }
}

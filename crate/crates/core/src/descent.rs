//! Cut descent on the dual, cost scaling, and optimality certificates.

use std::fmt;

use serde::Serialize;

use crate::circulation::{solve_circulation, CirculationOutcome};
use crate::dualnet::{
    apply_cut, build_dual_network, choose_movable, extract_edge_capacity, facing, has_positive_costs, normalize_cut,
    split_movable, Direction, Facing,
};
use crate::error::{ensure_internal, Error, Result};
use crate::instance::{check_feasibility, ensure_positive_costs, CostCertificate, Instance};
use crate::numeric::Half;
use crate::subtree::{dist, h_value, properize, Potential, TreeKind};

/// A half-integral edge capacity `x`, indexed like the instance edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeCapacity {
    pub x: Vec<Half>,
}

impl EdgeCapacity {
    pub fn zeros(m: usize) -> Self {
        EdgeCapacity { x: vec![Half::ZERO; m] }
    }

    /// `x(δv)`.
    pub fn degree(&self, inst: &Instance, v: usize) -> Half {
        inst.incident(v).iter().map(|&e| self.x[e]).sum()
    }

    /// `x(δv)` is an integer at every node.
    pub fn has_integral_degrees(&self, inst: &Instance) -> bool {
        (0..inst.n()).all(|v| self.degree(inst, v).is_integral())
    }

    pub fn within_bounds(&self, inst: &Instance) -> bool {
        self.x.len() == inst.m()
            && inst.edges().iter().zip(&self.x).all(|(e, &x)| !x.is_negative() && x <= Half::from_int(e.u))
    }
}

/// One descent iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    /// Scaling phase `t` (costs `⌈a/2^t⌉`).
    pub phase: u32,
    pub iteration: usize,
    /// `h(p)` at the start of the iteration, after properization.
    pub h: Half,
    /// Chosen movable cut; `None` on the certifying iteration.
    pub step: Option<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub kappa_max: Half,
    pub kappa_up: Half,
    pub kappa_down: Half,
    #[serde(serialize_with = "direction_name")]
    pub direction: Direction,
    pub y_size: usize,
    pub z_size: usize,
}

fn direction_name<S: serde::Serializer>(d: &Direction, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&d.to_string())
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phase {} iter {} h={}", self.phase, self.iteration, self.h)?;
        match &self.step {
            Some(s) => write!(
                f,
                " kappa={} (up {}, down {}) move={} |Y|={} |Z|={}",
                s.kappa_max, s.kappa_up, s.kappa_down, s.direction, s.y_size, s.z_size
            ),
            None => f.write_str(" certified"),
        }
    }
}

/// Output of one descent run.
#[derive(Debug, Clone)]
pub struct DescentRun {
    pub x: EdgeCapacity,
    pub p: Potential,
    /// Iterations including the final certifying one.
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: EdgeCapacity,
    /// Optimal for the positive-cost instance [`SolveResult::reduced`].
    pub p: Potential,
    /// `Σ a x` under the positive costs.
    pub cost: Half,
    /// `Σ a x` under the input costs.
    pub original_cost: Half,
    /// `Σ a x + h(p)` on the positive-cost instance.
    pub gap: Half,
    /// Descent iterations per phase, first phase first.
    pub iterations: Vec<usize>,
    /// Phase indices `t`, aligned with `iterations`.
    pub phases: Vec<u32>,
    pub reduced: Instance,
    pub certificate: CostCertificate,
    pub trace: Vec<TraceEntry>,
}

/// Hard per-phase iteration cap `4·n·A + 8`.
pub fn iteration_cap(inst: &Instance) -> usize {
    4 * inst.n() * inst.max_cost().max(0) as usize + 8
}

/// Runs descent from `p0` on an instance with positive costs.
pub fn descend_run(inst: &Instance, p0: &Potential, phase: u32) -> Result<DescentRun> {
    if !has_positive_costs(inst) {
        return Err(Error::Contract("descent needs every edge cost to be positive".into()));
    }
    let cap = iteration_cap(inst);
    let mut p = p0.clone();
    let mut trace = Vec::new();
    for iteration in 1..=cap {
        let proper = properize(inst, &p);
        let h = h_value(inst, &proper);
        ensure_internal!(h <= h_value(inst, &p), "properization increased h");
        p = proper;
        let dn = build_dual_network(inst, &p)?;
        match solve_circulation(&dn.net)? {
            CirculationOutcome::Feasible(y) => {
                let x = extract_edge_capacity(&dn, &y);
                trace.push(TraceEntry { phase, iteration, h, step: None });
                return Ok(DescentRun { x, p, iterations: iteration, trace });
            }
            CirculationOutcome::Violating { cut, kappa } => {
                let norm = normalize_cut(&dn, &cut)?;
                let (up, down) = split_movable(&dn, &norm)?;
                ensure_internal!(up.kappa + down.kappa == kappa, "normalized cut lost maximality");
                let (kappa_up, kappa_down) = (up.kappa, down.kappa);
                let chosen = choose_movable(up, down);
                ensure_internal!(chosen.kappa.is_positive(), "neither movable part is violating");
                let q = apply_cut(inst, &dn, &p, &chosen)?;
                let hq = h_value(inst, &q);
                ensure_internal!(
                    hq.twice() == h.twice() - chosen.kappa,
                    "step changed h from {h} to {hq}, expected a drop of κ/2 = {}/2",
                    chosen.kappa
                );
                trace.push(TraceEntry {
                    phase,
                    iteration,
                    h,
                    step: Some(TraceStep {
                        kappa_max: kappa,
                        kappa_up,
                        kappa_down,
                        direction: chosen.direction,
                        y_size: chosen.cut.y_nodes().len(),
                        z_size: chosen.cut.z_nodes().len(),
                    }),
                });
                p = q;
            }
        }
    }
    Err(Error::IterationGuard(format!(
        "descent did not certify within 4·n·A+8 = {cap} iterations (phase {phase}, h = {})",
        h_value(inst, &p)
    )))
}

/// Descent from `p0` on an instance with positive costs.
pub fn descend(inst: &Instance, p0: &Potential) -> Result<SolveResult> {
    let run = descend_run(inst, p0, 0)?;
    let (_, certificate) = ensure_positive_costs(inst)?;
    finish(inst, inst, certificate, run.x, run.p, vec![run.iterations], vec![0], run.trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub scaling: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { scaling: true }
    }
}

/// Cost-scaled solve of any feasible instance.
pub fn solve_scaled(inst: &Instance) -> Result<SolveResult> {
    solve(inst, SolveOptions::default())
}

/// Screens feasibility, applies the positive-cost reduction and runs descent,
/// scaled or from the origin.
pub fn solve(inst: &Instance, opts: SolveOptions) -> Result<SolveResult> {
    let report = check_feasibility(inst);
    if !report.feasible {
        let list: Vec<String> = report
            .violations
            .iter()
            .map(|v| format!("terminal {} has ν = {} < r = {}", v.terminal, v.nu, v.r))
            .collect();
        return Err(Error::Infeasible(list.join("; ")));
    }
    let (reduced, certificate) = ensure_positive_costs(inst)?;
    if !opts.scaling {
        let run = descend_run(&reduced, &Potential::origin(&reduced), 0)?;
        return finish(inst, &reduced, certificate, run.x, run.p, vec![run.iterations], vec![0], run.trace);
    }
    let big_a = reduced.max_cost();
    let gamma = scaling_depth(big_a);
    let costs: Vec<i64> = reduced.edges().iter().map(|e| e.a).collect();
    let mut p = Potential::origin(&reduced);
    let mut last = None;
    let (mut iterations, mut phases, mut trace) = (Vec::new(), Vec::new(), Vec::new());
    for t in (0..=gamma).rev() {
        let phase_inst = reduced.with_costs(&phase_costs(&costs, t));
        let start = if t == gamma { p } else { p.doubled() };
        let run = descend_run(&phase_inst, &start, t)?;
        iterations.push(run.iterations);
        phases.push(t);
        trace.extend(run.trace);
        p = run.p;
        last = Some(run.x);
    }
    finish(inst, &reduced, certificate, last.expect("at least one phase"), p, iterations, phases, trace)
}

/// Smallest `γ ≥ 0` with `2^γ ≥ A`.
pub fn scaling_depth(big_a: i64) -> u32 {
    let mut gamma = 0;
    while (1i64 << gamma) < big_a {
        gamma += 1;
    }
    gamma
}

/// `⌈a/2^t⌉` per edge.
pub fn phase_costs(costs: &[i64], t: u32) -> Vec<i64> {
    let d = 1i64 << t;
    costs.iter().map(|&a| (a + d - 1).div_euclid(d)).collect()
}

#[allow(clippy::too_many_arguments)]
fn finish(
    original: &Instance,
    reduced: &Instance,
    certificate: CostCertificate,
    x: EdgeCapacity,
    p: Potential,
    iterations: Vec<usize>,
    phases: Vec<u32>,
    trace: Vec<TraceEntry>,
) -> Result<SolveResult> {
    let gap = duality_gap(reduced, &x, &p);
    ensure_internal!(gap.is_zero(), "solver finished with duality gap {gap}");
    ensure_internal!(x.within_bounds(reduced), "solution violates 0 ≤ x ≤ u");
    ensure_internal!(x.has_integral_degrees(reduced), "solution has a fractional x(δi)");
    Ok(SolveResult {
        cost: reduced.cost_of(&x.x),
        original_cost: original.cost_of(&x.x),
        x,
        p,
        gap,
        iterations,
        phases,
        reduced: reduced.clone(),
        certificate,
        trace,
    })
}

/// `Σ a x + h(p)`; nonnegative for feasible `x` and zero iff both are optimal.
pub fn duality_gap(inst: &Instance, x: &EdgeCapacity, p: &Potential) -> Half {
    inst.cost_of(&x.x) + h_value(inst, p)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlacknessFailure {
    /// `bounds`, `proper`, or `C1`..`C5`.
    pub clause: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlacknessReport {
    /// Per clause C1..C5.
    pub clauses: [bool; 5],
    pub bounds: bool,
    pub proper: bool,
    pub failures: Vec<SlacknessFailure>,
    pub gap: Half,
    /// Every check passed, which certifies joint optimality.
    pub pass: bool,
}

/// Checks the complementary slackness conditions C1–C5 for `(x, p)`.
///
/// Edge classes `δ_0 i`, `δ_s i` need positive costs; an instance with a zero
/// cost is first passed through the positive-cost reduction, matching the
/// potentials the solver reports.
pub fn verify_slackness(inst: &Instance, x: &EdgeCapacity, p: &Potential) -> Result<SlacknessReport> {
    let owned;
    let inst = if has_positive_costs(inst) {
        inst
    } else {
        owned = ensure_positive_costs(inst)?.0;
        &owned
    };
    let mut failures = Vec::new();
    let mut clauses = [true; 5];
    let mut fail = |clauses: &mut [bool; 5], c: usize, detail: String| {
        clauses[c - 1] = false;
        failures.push(SlacknessFailure { clause: format!("C{c}"), detail });
    };
    let bounds = x.within_bounds(inst);
    let proper = p.is_proper(inst);
    if !bounds || !proper {
        let mut out = Vec::new();
        if !bounds {
            out.push(SlacknessFailure { clause: "bounds".into(), detail: "x violates 0 ≤ x ≤ u".into() });
        }
        if !proper {
            out.push(SlacknessFailure { clause: "proper".into(), detail: "potential is not proper".into() });
        }
        let gap = if bounds { duality_gap(inst, x, p) } else { Half::ZERO };
        return Ok(SlacknessReport { clauses: [false; 5], bounds, proper, failures: out, gap, pass: false });
    }

    let k = inst.k();
    // x over δ_0 i (index k) and δ_s i (index s) for every node.
    let mut classes = vec![vec![Half::ZERO; k + 1]; inst.n()];
    for (id, e) in inst.edges().iter().enumerate() {
        let d = dist(p.tree(e.i), p.tree(e.j));
        let a = Half::from_int(e.a);
        let xe = x.x[id];
        if d > a && xe != Half::from_int(e.u) {
            fail(&mut clauses, 1, format!("edge {}-{}: dist {d} > a {a} but x = {xe} < u", e.i, e.j));
        }
        if d < a {
            if !xe.is_zero() {
                fail(&mut clauses, 2, format!("edge {}-{}: dist {d} < a {a} but x = {xe}", e.i, e.j));
            }
            continue;
        }
        for (v, w) in [(e.i, e.j), (e.j, e.i)] {
            let slot = match facing(inst, p, v, w)? {
                Facing::Terminal => continue,
                Facing::Base => k,
                Facing::Tip => match p.tree(v).kind() {
                    TreeKind::Arm(s) => s,
                    TreeKind::Zero => unreachable!("tips belong to arm trees"),
                },
                Facing::Spoke(t) => t,
            };
            classes[v][slot] += xe;
        }
    }
    for v in inst.non_terminals() {
        let c = Half::from_int(inst.node_cap(v));
        let tree = p.tree(v);
        match tree.kind() {
            TreeKind::Arm(s) => {
                let (x0, xs) = (classes[v][k], classes[v][s]);
                if x0 != xs || x0 > c {
                    fail(&mut clauses, 3, format!("node {v}: x(δ_0) = {x0}, x(δ_s) = {xs}, c = {c}"));
                } else if tree.size().is_positive() && x0 != c {
                    fail(&mut clauses, 3, format!("node {v}: size > 0 but x(δ_0) = {x0} ≠ c = {c}"));
                }
            }
            TreeKind::Zero => {
                let total: Half = classes[v][..k].iter().sum();
                for s in 0..k {
                    let xs = classes[v][s];
                    if xs > c || xs > total - xs {
                        fail(&mut clauses, 4, format!("node {v}, arm {s}: x(δ_s) = {xs}, rest {}, c = {c}", total - xs));
                    } else if tree.coord(s).is_positive() && xs != c {
                        fail(&mut clauses, 4, format!("node {v}, arm {s}: size_s > 0 but x(δ_s) = {xs} ≠ c"));
                    }
                }
            }
        }
    }
    for (s, &t) in inst.terminals().iter().enumerate() {
        let flow = x.degree(inst, t);
        let r = Half::from_int(inst.req(s));
        if flow < r || (p.tree(t).depth().is_positive() && flow != r) {
            fail(&mut clauses, 5, format!("terminal {t}: x(δs) = {flow}, r = {r}, depth {}", p.tree(t).depth()));
        }
    }
    let gap = duality_gap(inst, x, p);
    let pass = clauses.iter().all(|&c| c);
    Ok(SlacknessReport { clauses, bounds, proper, failures, gap, pass })
}

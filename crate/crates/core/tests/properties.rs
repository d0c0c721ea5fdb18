use proptest::prelude::*;
use rand::Rng;

use fntb::circulation::{kappa, Cut, Side};
use fntb::descent::descend_run;
use fntb::generate::{random_instance, random_instance_unchecked, random_network, random_subtree, rng_from_seed, GenParams};
use fntb::oracle::{brute_force_max_violating, brute_force_opt, OracleBudget};
use fntb::subtree::{dist, h_value};
use fntb::*;

fn small_params(seed: u64) -> GenParams {
    let mut rng = rng_from_seed(seed ^ 0x5eed);
    let k = rng.gen_range(3..=4);
    GenParams {
        n: rng.gen_range(k..=7),
        k,
        p_edge: rng.gen_range(0.2..0.7),
        max_u: 2,
        max_a: 4,
        max_c: 3,
        max_r: 2,
        max_edges: Some(7),
        ..GenParams::default()
    }
}

fn any_instance(seed: u64) -> Instance {
    random_instance_unchecked(&small_params(seed), &mut rng_from_seed(seed)).unwrap()
}

fn random_potential(inst: &Instance, seed: u64) -> Potential {
    let mut rng = rng_from_seed(seed);
    let trees = (0..inst.n())
        .map(|v| match inst.terminal_index(v) {
            Some(s) => Subtree::point(inst.k(), s, Half::from_doubled(rng.gen_range(0..=6))),
            None => random_subtree(inst.k(), 4, &mut rng),
        })
        .collect();
    Potential::new(inst, trees).unwrap()
}

/// Minimum mixed cut `u(F) + c(X)` separating terminal `s` from the other
/// terminals, by enumerating all `F ⊆ E` and `X ⊆ V∖S`.
fn brute_force_nu(inst: &Instance, s: usize) -> i64 {
    let inner: Vec<usize> = inst.non_terminals().collect();
    let mut best = i64::MAX;
    for fmask in 0u32..1 << inst.m() {
        for xmask in 0u32..1 << inner.len() {
            let removed: Vec<bool> = {
                let mut r = vec![false; inst.n()];
                for (b, &v) in inner.iter().enumerate() {
                    r[v] = xmask >> b & 1 == 1;
                }
                r
            };
            let mut seen = vec![false; inst.n()];
            let src = inst.terminals()[s];
            let mut stack = vec![src];
            seen[src] = true;
            while let Some(v) = stack.pop() {
                if v != src && inst.is_terminal(v) {
                    continue;
                }
                for &e in inst.incident(v) {
                    if fmask >> e & 1 == 1 {
                        continue;
                    }
                    let w = inst.edge(e).other(v);
                    if !seen[w] && !removed[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            if inst.terminals().iter().any(|&t| t != src && seen[t]) {
                continue;
            }
            let cost: i64 = (0..inst.m()).filter(|&e| fmask >> e & 1 == 1).map(|e| inst.edge(e).u).sum::<i64>()
                + inner.iter().filter(|&&v| removed[v]).map(|&v| inst.node_cap(v)).sum::<i64>();
            best = best.min(cost);
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn half_pos_splits_abs(d in -1000i64..1000) {
        let a = Half::from_doubled(d);
        prop_assert_eq!(half_pos(a) + half_pos(-a), a.abs());
    }

    #[test]
    fn ntb_text_round_trips(seed in any::<u64>()) {
        let inst = any_instance(seed);
        let back = parse_instance(&inst.to_ntb_text()).unwrap();
        prop_assert_eq!(back.to_ntb_text(), inst.to_ntb_text());
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn positive_cost_reduction(seed in any::<u64>()) {
        let inst = any_instance(seed);
        let (reduced, cert) = ensure_positive_costs(&inst).unwrap();
        prop_assert!(reduced.edges().iter().all(|e| e.a >= 1));
        if cert.zero_edges == 0 {
            prop_assert_eq!(&reduced, &inst);
        }
    }

    #[test]
    fn terminal_cuts_match_enumeration(seed in any::<u64>()) {
        let inst = any_instance(seed);
        prop_assume!(inst.m() + inst.n() <= 14);
        for s in 0..inst.k() {
            prop_assert_eq!(terminal_cut_value(&inst, s), brute_force_nu(&inst, s));
        }
    }

    #[test]
    fn feasibility_matches_oracle(seed in any::<u64>()) {
        let inst = any_instance(seed);
        let oracle = brute_force_opt(&inst, &OracleBudget::default()).unwrap();
        prop_assert_eq!(check_feasibility(&inst).feasible, oracle.is_some());
    }

    #[test]
    fn solver_matches_oracle(seed in any::<u64>()) {
        let params = small_params(seed);
        let Ok(inst) = random_instance(&params, &mut rng_from_seed(seed)) else { return Ok(()) };
        let res = solve_scaled(&inst).unwrap();
        let opt = brute_force_opt(&inst, &OracleBudget::default()).unwrap();
        prop_assert_eq!(Some(res.original_cost), opt);
        prop_assert!(res.gap.is_zero());
    }

    #[test]
    fn optimal_start_certifies_immediately(seed in any::<u64>()) {
        let params = small_params(seed);
        let Ok(inst) = random_instance(&params, &mut rng_from_seed(seed)) else { return Ok(()) };
        let res = solve_scaled(&inst).unwrap();
        let run = descend_run(&res.reduced, &res.p, 0).unwrap();
        prop_assert_eq!(run.iterations, 1);
        prop_assert_eq!(res.reduced.cost_of(&run.x.x), res.cost);
    }

    #[test]
    fn properize_is_idempotent_and_descends(seed in any::<u64>()) {
        let inst = any_instance(seed);
        let p = random_potential(&inst, seed.wrapping_add(1));
        let q = properize(&inst, &p);
        prop_assert!(q.is_proper(&inst));
        prop_assert_eq!(properize(&inst, &q), q.clone());
        prop_assert!(h_value(&inst, &q) <= h_value(&inst, &p));
    }

    #[test]
    fn weak_duality(seed in any::<u64>()) {
        let params = small_params(seed);
        let Ok(inst) = random_instance(&params, &mut rng_from_seed(seed)) else { return Ok(()) };
        let res = solve_scaled(&inst).unwrap();
        let p = random_potential(&res.reduced, seed.wrapping_add(2));
        prop_assert!(!duality_gap(&res.reduced, &res.x, &p).is_negative());
    }

    #[test]
    fn dist_symmetric_and_reflexive(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let k = rng.gen_range(3..=5);
        let a = random_subtree(k, 6, &mut rng);
        let b = random_subtree(k, 6, &mut rng);
        prop_assert_eq!(dist(&a, &b), dist(&b, &a));
        prop_assert!(dist(&a, &a).is_zero());
    }

    #[test]
    fn circulation_dichotomy_with_infinite_bounds(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let nodes = rng.gen_range(1..=7);
        let base = random_network(nodes, &mut rng);
        let mut net = UndirectedNetwork::new(nodes);
        for e in base.edges() {
            let lo = if rng.gen_bool(0.2) { ExtHalf::NegInf } else { e.lo };
            let hi = if rng.gen_bool(0.2) { ExtHalf::PosInf } else { e.hi };
            net.add_edge(e.u, e.v, lo, hi);
        }
        let oracle = brute_force_max_violating(&net, &OracleBudget::default()).unwrap();
        match solve_circulation(&net).unwrap() {
            CirculationOutcome::Feasible(y) => {
                prop_assert!(oracle.is_none());
                prop_assert!(y.is_valid_for(&net) && y.is_half_integral());
            }
            CirculationOutcome::Violating { cut, kappa: k } => {
                prop_assert_eq!(oracle.map(|o| o.1), Some(k));
                prop_assert_eq!(kappa(&net, &cut).finite(), Some(k));
            }
        }
    }

    #[test]
    fn empty_cut_has_zero_kappa(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let net = random_network(rng.gen_range(0..=6), &mut rng);
        prop_assert_eq!(kappa(&net, &Cut::empty(net.node_count())), ExtHalf::int(0));
        let all_out = Cut::from_sides(vec![Side::Out; net.node_count()]);
        prop_assert_eq!(kappa(&net, &all_out), ExtHalf::int(0));
    }

    #[test]
    fn max_multiflow_attains_half_nu(seed in any::<u64>()) {
        let inst = any_instance(seed);
        let mm = max_multiflow(&inst).unwrap();
        prop_assert_eq!(mm.value.doubled(), mm.nu.iter().sum::<i64>());
        let unit = inst.with_costs(&vec![1; inst.m()]).with_reqs(&mm.nu);
        let rep = validate_multiflow(&unit, &mm.flow, Some(&mm.x));
        prop_assert!(rep.pass, "{:?}", rep.issues);
        let tf = mm.flow.terminal_flow(&inst);
        let total: Half = tf.iter().copied().fold(Half::ZERO, |a, b| a + b);
        prop_assert_eq!(total, mm.value.twice());
    }
}

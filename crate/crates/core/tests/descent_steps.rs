//! Step-level checks of the dual network machinery on random proper
//! potentials, not only those visited by the solver.

use proptest::prelude::*;
use rand::Rng;

use fntb::circulation::{Side, CirculationOutcome};
use fntb::dualnet::{apply_cut, build_dual_network, extract_edge_capacity, normalize_cut, split_movable};
use fntb::generate::{random_instance_unchecked, random_subtree, rng_from_seed, GenParams};
use fntb::subtree::h_value;
use fntb::*;

fn positive_instance(seed: u64) -> Instance {
    let mut rng = rng_from_seed(seed);
    let k = rng.gen_range(3..=4);
    let params = GenParams {
        n: rng.gen_range(k..=8),
        k,
        p_edge: rng.gen_range(0.2..0.7),
        max_u: 3,
        max_a: 3,
        max_c: 3,
        max_r: 3,
        ..GenParams::default()
    };
    let inst = random_instance_unchecked(&params, &mut rng).unwrap();
    ensure_positive_costs(&inst).unwrap().0
}

fn random_proper(inst: &Instance, seed: u64) -> Potential {
    let mut rng = rng_from_seed(seed);
    let trees = (0..inst.n())
        .map(|v| match inst.terminal_index(v) {
            Some(s) => Subtree::point(inst.k(), s, Half::from_doubled(rng.gen_range(0..=5))),
            None => random_subtree(inst.k(), 3, &mut rng),
        })
        .collect();
    properize(inst, &Potential::new(inst, trees).unwrap())
}

/// Checks one step at `p`; returns the potential after the chosen move, or
/// `None` once `p` is certified.
fn check_step(inst: &Instance, p: &Potential) -> Result<Option<Potential>, TestCaseError> {
    let dn = build_dual_network(inst, p).unwrap();
    match solve_circulation(&dn.net).unwrap() {
        CirculationOutcome::Feasible(y) => {
            let x = extract_edge_capacity(&dn, &y);
            prop_assert!(x.within_bounds(inst));
            prop_assert!(x.has_integral_degrees(inst));
            let rep = verify_slackness(inst, &x, p).unwrap();
            prop_assert!(rep.clauses.iter().all(|&c| c), "{:?}", rep.failures);
            prop_assert!(duality_gap(inst, &x, p).is_zero());
            Ok(None)
        }
        CirculationOutcome::Violating { cut, kappa } => {
            prop_assert!(kappa.is_positive());
            prop_assert_eq!(dn.kappa(&cut).unwrap(), kappa);
            let norm = normalize_cut(&dn, &cut).unwrap();
            // The raw cut is maximum, so normalization keeps κ exactly.
            prop_assert_eq!(dn.kappa(&norm).unwrap(), kappa);
            prop_assert_eq!(&normalize_cut(&dn, &norm).unwrap(), &norm);
            let (up, down) = split_movable(&dn, &norm).unwrap();
            prop_assert_eq!(up.kappa + down.kappa, kappa);
            for v in 0..dn.node_count() {
                if up.cut.side(v) != Side::Out {
                    prop_assert!(dn.up_side[v]);
                }
                if down.cut.side(v) != Side::Out {
                    prop_assert!(!dn.up_side[v]);
                }
            }
            let h = h_value(inst, p);
            let mut chosen = None;
            for mc in [&up, &down] {
                if !mc.kappa.is_positive() {
                    continue;
                }
                // Both violating parts are movable and descend by κ/2.
                let q = apply_cut(inst, &dn, p, mc).unwrap();
                prop_assert_eq!(h_value(inst, &q).twice(), h.twice() - mc.kappa);
                if chosen.as_ref().is_none_or(|(k, _)| mc.kappa > *k) {
                    chosen = Some((mc.kappa, q));
                }
            }
            let (_, q) = chosen.expect("normalized cut has a violating part");
            Ok(Some(properize(inst, &q)))
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn steps_from_random_potentials(seed in any::<u64>()) {
        let inst = positive_instance(seed);
        prop_assume!(check_feasibility(&inst).feasible);
        let mut p = random_proper(&inst, seed.wrapping_mul(31));
        // Walk until certified; the hard cap mirrors the solver's.
        for _ in 0..fntb::descent::iteration_cap(&inst) + 8 * inst.n() * 6 {
            match check_step(&inst, &p)? {
                Some(q) => p = q,
                None => return Ok(()),
            }
        }
        prop_assert!(false, "walk did not certify");
    }
}

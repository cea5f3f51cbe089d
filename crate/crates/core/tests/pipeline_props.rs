use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qfol_core::affpseudo::{FGAffineGroup, OrbitVerdict};
use qfol_core::hector::{build_suspension, SuspensionPoint};
use qfol_core::localmodel::{build_local_model, dense_leaf_model, LocalModelInput, Presentation};
use qfol_core::oracle::{
    orbit_bfs, random_foliation_spec, random_local_model_input, random_transition, OracleOrbit,
    ShadowContext,
};
use qfol_core::scalarfield::{Scalar, ShadowOrder, SymbolTable, DEFAULT_TOLERANCE};
use qfol_core::torusfol::{deck_group, leaf_space_model, rational_hull};

fn table() -> SymbolTable {
    SymbolTable::new([("l", Some(std::f64::consts::SQRT_2)), ("m", Some(1.7320508075688772))]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn suspension_round_trip_and_cocycle(seed in any::<u64>()) {
        let t = table();
        let order = ShadowOrder::new(&t, DEFAULT_TOLERANCE);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = rng.gen_range(1..=3);
        let gens: Vec<_> = (0..rng.gen_range(1..=3)).map(|_| random_transition(&mut rng, q, 2)).collect();
        let c = build_suspension(gens.clone()).unwrap();
        prop_assert_eq!(c.holonomy_generators(), gens);
        prop_assert!(c.verify_cocycle(&order).unwrap().passed);
    }

    #[test]
    fn glue_is_an_involution(seed in any::<u64>()) {
        let t = table();
        let order = ShadowOrder::new(&t, DEFAULT_TOLERANCE);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = rng.gen_range(1..=2);
        let gens: Vec<_> = (0..rng.gen_range(1..=3)).map(|_| random_transition(&mut rng, q, 1)).collect();
        let c = build_suspension(gens).unwrap();
        for _ in 0..20 {
            let p = SuspensionPoint {
                x: (0..q).map(|_| Scalar::from_ratio(rng.gen_range(-12..=12), 4)).collect(),
                s: num_rational::BigRational::new(rng.gen_range(0..16).into(), 4.into()),
                t: num_rational::BigRational::new(rng.gen_range(1..12).into(), 4.into()),
            };
            if !c.contains(&p, &order).unwrap() {
                continue;
            }
            if let Some(partner) = c.partner(&p, &order).unwrap() {
                prop_assert!(c.contains(&partner, &order).unwrap());
                prop_assert_eq!(c.partner(&partner, &order).unwrap(), Some(p.clone()));
                prop_assert!(c.related(&partner, &p, &order).unwrap());
            }
        }
    }

    #[test]
    fn local_model_invariants(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let input = random_local_model_input(&mut rng, 2, 2, 2, 1);
        let gpd = build_local_model(&input).unwrap();
        let pts = gpd.sample_points(5, seed);
        prop_assert!(gpd.check_action_axioms(2, &pts).passed());
        prop_assert!(gpd.check_block_invariance(3).passed());
    }

    #[test]
    fn dense_leaf_model_matches_deck_group(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=4);
        let spec = random_foliation_spec(&mut rng, n, 2);
        let deck = deck_group(&spec);
        let via_input = build_local_model(&LocalModelInput {
            r: deck.group.dim(),
            d: 0,
            presentation: Presentation::FreeAbelian,
            psi: deck.group.generators().to_vec(),
            rho: vec![],
        })
        .unwrap();
        let dense = dense_leaf_model(&spec);
        prop_assert_eq!(dense.translation_group(), via_input.translation_group());
        let chart = leaf_space_model(&spec);
        prop_assert_eq!(chart.group().translation_group().unwrap(), dense.translation_group());
        // the leaf closure contains the directions, so it is at least p-dimensional
        let hull = rational_hull(&spec);
        prop_assert!(hull.closure_dim >= spec.p());
        prop_assert_eq!(hull.structure_dim, hull.closure_dim - spec.p());
    }

    // the float search never claims an orbit relation the exact kernel denies
    #[test]
    fn oracle_never_contradicts_exact_orbits(a in -4i64..=4, b in -4i64..=4, num in -8i64..=8, den in 1i64..=3) {
        let t = table();
        let ctx = ShadowContext::new(t.clone(), DEFAULT_TOLERANCE, 0).unwrap();
        let g = FGAffineGroup::translations(1, &[vec![Scalar::one()], vec![t.parse("l").unwrap()]]).unwrap();
        let x = [Scalar::from_ratio(num, den)];
        let y = [&(&x[0] + &Scalar::from_int(a)) + &(&Scalar::from_int(b) * &t.parse("l").unwrap())];
        let exact = g.orbit_equal(&x, &y, 8);
        let float = orbit_bfs(&g, &x, &y, &ctx, 8).unwrap();
        prop_assert!(exact.is_equal());
        prop_assert!(matches!(float, OracleOrbit::Found(_)));
        let z = [&y[0] + &Scalar::from_ratio(1, 2)];
        prop_assert_eq!(g.orbit_equal(&x, &z, 8), OrbitVerdict::Unequal);
        let missed = matches!(orbit_bfs(&g, &x, &z, &ctx, 8).unwrap(), OracleOrbit::NotFound { .. });
        prop_assert!(missed);
    }
}

mod common;

use common::{term, RandomDag};
use ontokge::semsim::{ic_resnik, ic_seco, sim_groupwise, sim_resnik_pair, Aggregation, IcFlavor, SimilarityConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dag(seed: u64, extra_roots: f64) -> RandomDag {
    RandomDag::generate(&mut ChaCha8Rng::seed_from_u64(seed), 40, 10, 8, extra_roots)
}

fn config(aggregation: Aggregation, ic_flavor: IcFlavor) -> SimilarityConfig {
    SimilarityConfig { aggregation, ic_flavor }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn six_measures_match_brute_force(seed in any::<u64>()) {
        let d = dag(seed, 0.05);
        let kg = d.kg();
        let tables = [
            (IcFlavor::Seco, ic_seco(&kg).unwrap(), d.ic_seco()),
            (IcFlavor::ResnikCorpus, ic_resnik(&kg, &d.annotations()).unwrap(), d.ic_resnik()),
        ];
        for (flavor, table, oracle) in &tables {
            for (k, expected) in oracle.iter().enumerate() {
                match (table.get(&term(k)), expected) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                    (None, None) => {}
                    other => prop_assert!(false, "IC presence differs for {k}: {other:?}"),
                }
            }
            for a in &d.entities {
                for b in &d.entities {
                    for agg in [Aggregation::Bma, Aggregation::Max, Aggregation::SimGic] {
                        let got = sim_groupwise(&d.term_set(a), &d.term_set(b), config(agg, *flavor), &kg, table).unwrap();
                        let want = d.groupwise(oracle, a, b, agg);
                        prop_assert!((got - want).abs() < 1e-9, "{agg:?} {flavor:?}: {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn pairwise_resnik_matches_intersection_oracle(seed in any::<u64>()) {
        let d = dag(seed, 0.05);
        let kg = d.kg();
        let table = ic_seco(&kg).unwrap();
        let oracle = d.ic_seco();
        for a in 0..d.len() {
            for b in 0..d.len() {
                let got = sim_resnik_pair(&term(a), &term(b), &kg, &table).unwrap();
                prop_assert!((got - d.resnik(&oracle, a, b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetry_and_max_dominates_bma(seed in any::<u64>()) {
        let d = dag(seed, 0.05);
        let kg = d.kg();
        let seco = ic_seco(&kg).unwrap();
        let resnik = ic_resnik(&kg, &d.annotations()).unwrap();
        for a in &d.entities {
            for b in &d.entities {
                let (sa, sb) = (d.term_set(a), d.term_set(b));
                for (flavor, table) in [(IcFlavor::Seco, &seco), (IcFlavor::ResnikCorpus, &resnik)] {
                    let score = |x, y, agg| sim_groupwise(x, y, config(agg, flavor), &kg, table).unwrap();
                    for agg in [Aggregation::Bma, Aggregation::Max, Aggregation::SimGic] {
                        prop_assert_eq!(score(&sa, &sb, agg), score(&sb, &sa, agg));
                    }
                    prop_assert!(score(&sa, &sb, Aggregation::Max) >= score(&sa, &sb, Aggregation::Bma) - 1e-12);
                    let gic = score(&sa, &sb, Aggregation::SimGic);
                    prop_assert!((0.0..=1.0).contains(&gic));
                }
            }
        }
    }

    #[test]
    fn simgic_self_similarity_is_one(seed in any::<u64>()) {
        let d = dag(seed, 0.05);
        let kg = d.kg();
        let seco = ic_seco(&kg).unwrap();
        let oracle = d.ic_seco();
        for a in &d.entities {
            let positive = d.ancestors_of_set(a).iter().any(|&c| oracle[c].unwrap() > 0.0);
            let s = d.term_set(a);
            let gic = sim_groupwise(&s, &s, config(Aggregation::SimGic, IcFlavor::Seco), &kg, &seco).unwrap();
            if positive {
                prop_assert_eq!(gic, 1.0);
            }
        }
    }

    #[test]
    fn information_content_is_antitone(seed in any::<u64>()) {
        let d = dag(seed, 0.05);
        let kg = d.kg();
        let seco = ic_seco(&kg).unwrap();
        let resnik = ic_resnik(&kg, &d.annotations()).unwrap();
        for (child, parents) in d.parents.iter().enumerate() {
            for &p in parents {
                let (c, p) = (term(child), term(p));
                prop_assert!(seco.get(&p).unwrap() <= seco.get(&c).unwrap());
                if let (Some(pi), Some(ci)) = (resnik.get(&p), resnik.get(&c)) {
                    prop_assert!(pi <= ci);
                }
            }
        }
    }

    #[test]
    fn single_root_ic_extremes(seed in any::<u64>()) {
        let d = dag(seed, 0.0);
        let kg = d.kg();
        let seco = ic_seco(&kg).unwrap();
        prop_assert_eq!(seco.get(&term(0)), Some(0.0));
        for leaf in d.leaves() {
            prop_assert_eq!(seco.get(&term(leaf)), Some(1.0));
        }
        prop_assert_eq!(ic_resnik(&kg, &d.annotations()).unwrap().get(&term(0)), Some(0.0));
    }
}

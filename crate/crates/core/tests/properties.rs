//! Property tests for the structural invariants.

mod common;

use proptest::prelude::*;
use randjoin::bits::Bits;
use randjoin::combinatorics::{rank_subset, unrank_subset};
use randjoin::partition::{self, name_to_system_height};
use randjoin::ratio::{ratio, Rational};
use randjoin::schedule::LevelSchedule;
use randjoin::{decode, encode, kg_decode, kg_encode, Error, FiniteTree, PartitionSystem};

use common::custom_q;

/// Strictly increasing levels from 0 with top at most `max_top`, plus densities.
fn schedule_strategy(max_top: u64, max_horizon: usize) -> impl Strategy<Value = LevelSchedule> {
    (1..=max_horizon)
        .prop_flat_map(move |h| prop::collection::vec(1..=3u64, h))
        .prop_filter("top level bound", move |gaps| gaps.iter().sum::<u64>() <= max_top)
        .prop_flat_map(|gaps| {
            let len = gaps.len() + 1;
            (Just(gaps), prop::collection::vec((1i64..=3, 6i64..=40), len))
        })
        .prop_map(|(gaps, q)| {
            let mut levels = vec![0u64];
            for g in gaps {
                levels.push(levels.last().unwrap() + g);
            }
            let q: Vec<Rational> = q.into_iter().map(|(a, b)| ratio(a, b)).collect();
            custom_q(&levels, &q)
        })
}

fn tree_for(s: &LevelSchedule, mask_seed: &[bool]) -> FiniteTree {
    let top = s.top_level() as usize;
    let leaves = (0..1u64 << top).filter(|&i| mask_seed[i as usize % mask_seed.len()] ^ (i % 7 == 3));
    FiniteTree::from_leaf_indices(top, leaves).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bits_text_round_trip(v in prop::collection::vec(any::<bool>(), 0..80)) {
        let b = Bits::from_bools(v);
        let back: Bits = b.to_string().parse().unwrap();
        prop_assert_eq!(back, b);
    }

    #[test]
    fn subset_rank_round_trip(mut sub in prop::collection::btree_set(0u64..64, 0..20)) {
        let sub: Vec<u64> = std::mem::take(&mut sub).into_iter().collect();
        let r = rank_subset(&sub);
        prop_assert_eq!(unrank_subset(64, sub.len() as u64, &r), sub);
    }

    #[test]
    fn pruning_invariants(
        s in schedule_strategy(10, 4),
        mask in prop::collection::vec(any::<bool>(), 1..64),
    ) {
        let t = tree_for(&s, &mask);
        let p = t.prune_to_density(&s).unwrap();
        prop_assert_eq!(&p.prune_to_density(&s).unwrap(), &p);
        for n in 0..=s.horizon() {
            let len = s.level(n) as usize;
            for v in p.nodes_at(len) {
                let d = p.conditional_density(&Bits::from_u64(v, len)).unwrap();
                prop_assert!(&d > s.density(n));
            }
        }
        prop_assert!(p.leaf_indices().all(|x| t.contains_node(x, t.top_level())));
        let bound: Rational = s.densities()[..s.horizon()].iter().sum();
        prop_assert!(t.measure() - p.measure() <= bound);
    }

    #[test]
    fn naming_is_prefix_monotone(
        s in schedule_strategy(8, 4),
        bits in prop::collection::vec(any::<bool>(), 1..400),
        extra in prop::collection::vec(any::<bool>(), 0..16),
    ) {
        let h = s.horizon();
        let Some(u) = s.naming_length(h) else { return Ok(()) };
        let u = u as usize;
        let name: Bits = bits.iter().copied().cycle().take(u).collect();
        let top = name_to_system_height(&name, &s, h).unwrap();
        prop_assert!(top.validate().is_valid());
        for k in 1..h {
            let prefix = name.prefix(s.naming_length(k).unwrap() as usize);
            prop_assert_eq!(name_to_system_height(&prefix, &s, k).unwrap(), top.restrict(k));
        }
        let longer = name.concat(&Bits::from_bools(extra));
        prop_assert_eq!(name_to_system_height(&longer, &s, h).unwrap(), top);
    }

    #[test]
    fn sampled_systems_are_valid_and_text_round_trips(s in schedule_strategy(8, 4), seed in any::<u64>()) {
        let ps = partition::sample_uniform(&s, s.horizon(), seed).unwrap();
        prop_assert!(ps.validate().is_valid());
        prop_assert_eq!(PartitionSystem::parse(&ps.to_text(), &s).unwrap(), ps.clone());
        prop_assert_eq!(partition::sample_uniform(&s, s.horizon(), seed).unwrap(), ps);
    }

    #[test]
    fn tree_text_round_trips(s in schedule_strategy(8, 3), mask in prop::collection::vec(any::<bool>(), 1..40)) {
        let t = tree_for(&s, &mask);
        prop_assert_eq!(FiniteTree::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn encode_decode_round_trip(
        s in schedule_strategy(8, 4),
        mask in prop::collection::vec(any::<bool>(), 1..40),
        seed in any::<u64>(),
        z in prop::collection::vec(any::<bool>(), 4),
    ) {
        let t = tree_for(&s, &mask).prune_to_density(&s).unwrap();
        prop_assume!(!t.is_empty());
        let ps = partition::sample_uniform(&s, s.horizon(), seed).unwrap();
        let z = Bits::from_bools(z[..s.horizon()].to_vec());
        match encode(&z, &ps, &t, &Bits::empty(), &Bits::empty()) {
            Ok((y, trace)) => {
                prop_assert!(t.is_node(&y));
                prop_assert_eq!(trace.steps.len(), z.len());
                prop_assert_eq!(decode(&ps, &y, &Bits::empty(), &Bits::empty()).unwrap(), z);
            }
            Err(Error::CodingFailure { step, .. }) => prop_assert!(step < z.len()),
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }

    #[test]
    fn two_extension_coding_round_trip(
        s in schedule_strategy(8, 4),
        mask in prop::collection::vec(any::<bool>(), 1..40),
        z in prop::collection::vec(any::<bool>(), 4),
    ) {
        let t = tree_for(&s, &mask);
        prop_assume!(!t.is_empty());
        let z = Bits::from_bools(z[..s.horizon()].to_vec());
        match kg_encode(&z, &t, &s) {
            Ok((y, _)) => prop_assert_eq!(kg_decode(&y, &t, &s).unwrap(), z),
            Err(Error::TwoExtension { .. }) => prop_assert!(!t.check_two_extension(&s).holds()),
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }
}

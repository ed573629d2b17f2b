use mqmi::partition::{
    all_partitions, apply_move, classify, coarsenings, is_coarser, moves, xi_set, MoveKind,
    PairClass,
};
use mqmi::Partition;
use proptest::prelude::*;

const LABELS: [&str; 5] = ["A", "B", "C", "D", "E"];

/// Partition whose block of each used label is given by `assign` (`None` leaves it out).
fn from_assignment(assign: &[Option<u8>]) -> Option<Partition> {
    let mut blocks: Vec<Vec<&str>> = vec![Vec::new(); assign.len()];
    for (i, a) in assign.iter().enumerate() {
        if let Some(b) = a {
            blocks[*b as usize % assign.len()].push(LABELS[i]);
        }
    }
    blocks.retain(|b| !b.is_empty());
    if blocks.is_empty() {
        return None;
    }
    Partition::new(&blocks).ok()
}

fn partition_strategy() -> impl Strategy<Value = Partition> {
    prop::collection::vec(prop::option::weighted(0.8, 0u8..5), 5)
        .prop_filter_map("empty", |a| from_assignment(&a))
}

#[test]
fn classify_agrees_with_reachability_on_four_parties() {
    let all = all_partitions(&LABELS[..4]).unwrap();
    let every = [MoveKind::A, MoveKind::B, MoveKind::C];
    for p in &all {
        let reach = coarsenings(p, &every).unwrap();
        for r in &all {
            let reachable = r == p || reach.contains(r);
            assert_eq!(classify(p, r).is_some(), reachable, "{p} vs {r}");
        }
    }
}

#[test]
fn drop_free_classes_match_drop_free_reachability() {
    let all = all_partitions(&LABELS[..4]).unwrap();
    for p in &all {
        let reach = coarsenings(p, &[MoveKind::A, MoveKind::B]).unwrap();
        for r in &all {
            let class = classify(p, r);
            let drop_free = matches!(
                class,
                Some(PairClass::DiscardOnly | PairClass::MergeOnly | PairClass::DiscardMerge)
            );
            assert_eq!(drop_free, reach.contains(r), "{p} vs {r}: {class:?}");
        }
    }
}

#[test]
fn partition_counts_follow_bell_numbers() {
    // Σ_k C(n,k) B_k over nonempty subsets.
    for (n, want) in [(1, 1), (2, 4), (3, 14), (4, 51), (5, 202)] {
        assert_eq!(all_partitions(&LABELS[..n]).unwrap().len(), want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn text_round_trip(p in partition_strategy()) {
        let back: Partition = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn every_move_lands_on_a_coarser_partition(p in partition_strategy()) {
        for m in moves(&p) {
            let r = apply_move(&p, &m).unwrap();
            prop_assert!(is_coarser(&p, &r).is_some());
            prop_assert!(classify(&p, &r).is_some());
            prop_assert!(!r.is_empty());
        }
    }

    #[test]
    fn coarser_is_transitive(p in partition_strategy(), i in 0usize..64, j in 0usize..64) {
        let ms = moves(&p);
        prop_assume!(!ms.is_empty());
        let r = apply_move(&p, &ms[i % ms.len()]).unwrap();
        let ms2 = moves(&r);
        prop_assume!(!ms2.is_empty());
        let s = apply_move(&r, &ms2[j % ms2.len()]).unwrap();
        prop_assert!(is_coarser(&p, &s).is_some());
    }

    #[test]
    fn xi_members_are_coarser_and_meet_one_block(p in partition_strategy(), i in 0usize..64) {
        let cs = coarsenings(&p, &[MoveKind::A]).unwrap();
        prop_assume!(!cs.is_empty());
        let r = &cs[i % cs.len()];
        for t in xi_set(&p, r).unwrap() {
            prop_assert!(t.len() >= 2);
            prop_assert!(is_coarser(&p, &t).is_some(), "{} not coarser than {}", t, p);
            let met = r.blocks().iter().filter(|b| b.iter().any(|x| t.parties().contains(x))).count();
            prop_assert!(met <= 1, "{} meets {} blocks of {}", t, met, r);
        }
    }
}

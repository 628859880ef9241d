use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::address::Address;
use crate::error::Error;

fn overlay_with(bits: u32, ids: &[u64]) -> Overlay {
    let mut overlay = Overlay::new(bits).unwrap();
    for &v in ids {
        let id = overlay.space().id(v).unwrap();
        overlay.join(NodeRecord::up(id, Address::new(format!("n{v}")))).unwrap();
    }
    overlay
}

fn linear_scan_owner(live: &[u64], key: u64) -> u64 {
    let mut sorted = live.to_vec();
    sorted.sort_unstable();
    sorted.iter().copied().find(|&id| id >= key).unwrap_or(sorted[0])
}

fn id(overlay: &Overlay, v: u64) -> RingId {
    overlay.space().id(v).unwrap()
}

#[test]
fn single_node_owns_everything() {
    let overlay = overlay_with(8, &[42]);
    for key in [0, 41, 42, 43, 255] {
        let found = overlay.lookup(id(&overlay, key)).unwrap();
        assert_eq!(found.owner.value(), 42);
        assert!(found.path.is_empty());
    }
}

#[test]
fn wraparound_owner() {
    let overlay = overlay_with(4, &[1, 5, 9, 13]);
    let found = overlay.lookup(id(&overlay, 14)).unwrap();
    assert_eq!(found.owner.value(), 1);
    for start in [1, 5, 9, 13] {
        let found = overlay.lookup_from(id(&overlay, start), id(&overlay, 14)).unwrap();
        assert_eq!(found.owner.value(), 1);
    }
}

#[test]
fn finger_tables_follow_successor_rule() {
    let overlay = overlay_with(4, &[1, 5, 9, 13]);
    let table = overlay.fingers(id(&overlay, 13)).unwrap();
    let values: Vec<u64> = table.entries().iter().map(|r| r.value()).collect();
    // 13+1=14 -> 1, 13+2=15 -> 1, 13+4=1 -> 1, 13+8=5 -> 5
    assert_eq!(values, vec![1, 1, 1, 5]);
    assert_eq!(table.successor().value(), 1);
}

#[test]
fn empty_overlay_errors() {
    let mut overlay = overlay_with(8, &[3]);
    overlay.leave(id(&overlay, 3)).unwrap();
    assert!(matches!(overlay.lookup(id(&overlay, 3)), Err(Error::OverlayEmpty)));
    assert!(matches!(overlay.owner_of(id(&overlay, 3)), Err(Error::OverlayEmpty)));
}

#[test]
fn duplicate_join_conflicts() {
    let mut overlay = overlay_with(8, &[3, 7]);
    let dup_id = NodeRecord::up(id(&overlay, 3), Address::new("fresh"));
    assert!(matches!(overlay.join(dup_id), Err(Error::Conflict(_))));
    let dup_addr = NodeRecord::up(id(&overlay, 9), Address::new("n7"));
    assert!(matches!(overlay.join(dup_addr), Err(Error::Conflict(_))));
    assert!(matches!(overlay.leave(id(&overlay, 100)), Err(Error::NotFound(_))));
}

#[test]
fn join_then_leave_restores_every_lookup() {
    let mut overlay = overlay_with(8, &[10, 60, 130, 200]);
    let before: Vec<_> = (0..256u64).map(|k| overlay.lookup(id(&overlay, k)).unwrap()).collect();
    overlay
        .join(NodeRecord::up(id(&overlay, 90), Address::new("newcomer")))
        .unwrap();
    overlay.leave(id(&overlay, 90)).unwrap();
    let after: Vec<_> = (0..256u64).map(|k| overlay.lookup(id(&overlay, k)).unwrap()).collect();
    assert_eq!(before, after);
}

#[test]
fn failing_owner_moves_key_to_next_live_node() {
    let ids = [10u64, 60, 130, 200];
    let mut overlay = overlay_with(8, &ids);
    let key = id(&overlay, 100);
    assert_eq!(overlay.lookup(key).unwrap().owner.value(), 130);
    overlay.fail(id(&overlay, 130)).unwrap();
    let remaining = [10u64, 60, 200];
    assert_eq!(
        overlay.lookup(key).unwrap().owner.value(),
        linear_scan_owner(&remaining, 100)
    );
    assert!(overlay.fingers(id(&overlay, 130)).is_none());
    for table_owner in remaining {
        for entry in overlay.fingers(id(&overlay, table_owner)).unwrap().entries() {
            assert_ne!(entry.value(), 130);
        }
    }
    overlay.set_health(id(&overlay, 130), Health::Up).unwrap();
    assert_eq!(overlay.lookup(key).unwrap().owner.value(), 130);
}

#[test]
fn random_walk_degenerate_cases() {
    let overlay = overlay_with(8, &[1, 2, 3, 4, 5]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let aware: BTreeSet<_> = [id(&overlay, 3)].into();
    let walk = overlay.random_walk(id(&overlay, 3), &aware, &mut rng).unwrap();
    assert_eq!(walk.contacted, 0);

    let everyone: BTreeSet<_> = overlay.live_ids().iter().copied().collect();
    for start in [1, 2, 5] {
        let walk = overlay.random_walk(id(&overlay, start), &everyone, &mut rng).unwrap();
        assert_eq!(walk.contacted, 0);
    }

    assert!(matches!(
        overlay.random_walk(id(&overlay, 1), &BTreeSet::new(), &mut rng),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn random_walk_is_seeded() {
    let overlay = overlay_with(8, &(0..20).map(|i| i * 10).collect::<Vec<_>>());
    let aware: BTreeSet<_> = [id(&overlay, 70)].into();
    let run = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        overlay.random_walk(id(&overlay, 0), &aware, &mut rng).unwrap()
    };
    assert_eq!(run(5), run(5));
}

#[test]
fn random_walk_mean_matches_geometric_expectation() {
    // Uniform draws with replacement hit a single aware node after N draws
    // on average when the walk starts outside the aware set.
    let overlay = overlay_with(8, &(0..10).map(|i| i * 20 + 3).collect::<Vec<_>>());
    let live = overlay.live_ids().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let walks = 100_000u64;
    let mut total = 0u64;
    for w in 0..walks {
        let target = live[(w % 10) as usize];
        let start = live[((w + 1 + w / 10 % 9) % 10) as usize];
        assert_ne!(start, target);
        let aware: BTreeSet<_> = [target].into();
        total += overlay.random_walk(start, &aware, &mut rng).unwrap().contacted;
    }
    let mean = total as f64 / walks as f64;
    assert!((mean - 10.0).abs() <= 0.5, "mean = {mean}");
}

#[test]
fn mean_path_is_logarithmic() {
    let mut means = Vec::new();
    for n in [16usize, 64, 256] {
        let mut overlay = Overlay::new(32).unwrap();
        for i in 0..n {
            let label = format!("node-{i}");
            let rid = hash_to_ring(label.as_bytes(), 32).unwrap();
            overlay.join(NodeRecord::up(rid, Address::new(label))).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let live = overlay.live_ids().to_vec();
        let mut total = 0usize;
        for _ in 0..10_000 {
            use rand::Rng;
            let key = overlay.space().id(rng.random::<u32>() as u64).unwrap();
            let start = live[rng.random_range(0..live.len())];
            total += overlay.lookup_from(start, key).unwrap().path.len();
        }
        let mean = total as f64 / 10_000.0;
        assert!(mean <= 2.0 * (n as f64).log2(), "n={n} mean={mean}");
        means.push(mean);
    }
    assert!(means[2] / means[0] <= 3.0, "{means:?}");
}

fn check_lookup(overlay: &Overlay, live: &[u64], start: u64, key: u64) {
    let space = overlay.space();
    let found = overlay
        .lookup_from(space.id(start).unwrap(), space.id(key).unwrap())
        .unwrap();
    assert_eq!(found.owner.value(), linear_scan_owner(live, key));
    assert!(found.path.len() <= space.bits() as usize);
    let mut hops = vec![space.id(start).unwrap()];
    hops.extend(found.path.iter().copied());
    let key_id = space.id(key).unwrap();
    for pair in hops.windows(2) {
        assert!(
            space.distance(pair[1], key_id) < space.distance(pair[0], key_id),
            "no progress from {} to {} toward {key}",
            pair[0],
            pair[1]
        );
    }
}

#[test]
fn exhaustive_small_rings_match_linear_scan() {
    // Every subset of a 4-bit ring, every start, every key.
    for mask in 1u32..(1 << 16) {
        let live: Vec<u64> = (0..16).filter(|b| mask & (1 << b) != 0).collect();
        let overlay = overlay_with(4, &live);
        for &start in &live {
            for key in 0..16 {
                check_lookup(&overlay, &live, start, key);
            }
        }
    }
}

proptest! {
    #[test]
    fn lookup_matches_linear_scan(
        ids in proptest::collection::btree_set(0u64..256, 1..64),
        key in 0u64..256,
        start_pick in any::<prop::sample::Index>(),
    ) {
        let live: Vec<u64> = ids.into_iter().collect();
        let overlay = overlay_with(8, &live);
        let start = live[start_pick.index(live.len())];
        check_lookup(&overlay, &live, start, key);
        let again = overlay.lookup_from(id(&overlay, start), id(&overlay, key)).unwrap();
        let first = overlay.lookup_from(id(&overlay, start), id(&overlay, key)).unwrap();
        prop_assert_eq!(again, first);
    }

    #[test]
    fn failure_only_moves_the_failed_nodes_keys(
        ids in proptest::collection::btree_set(0u64..256, 2..40),
        victim_pick in any::<prop::sample::Index>(),
    ) {
        let live: Vec<u64> = ids.into_iter().collect();
        let mut overlay = overlay_with(8, &live);
        let victim = live[victim_pick.index(live.len())];
        let before: Vec<u64> = (0..256).map(|k| overlay.owner_of(id(&overlay, k)).unwrap().value()).collect();
        overlay.fail(id(&overlay, victim)).unwrap();
        for k in 0..256u64 {
            let after = overlay.lookup(id(&overlay, k)).unwrap().owner.value();
            if before[k as usize] == victim {
                let rest: Vec<u64> = live.iter().copied().filter(|&v| v != victim).collect();
                prop_assert_eq!(after, linear_scan_owner(&rest, k));
            } else {
                prop_assert_eq!(after, before[k as usize]);
            }
        }
    }
}

use num_bigint::BigUint;
use proptest::prelude::*;

use taxiwalk::bridgecount::{count_bridges, is_bridge};
use taxiwalk::contourlab::{
    build_contour, contour_to_taxi_walk, count_configurations, reconstruct, sample_configurations, shift,
};
use taxiwalk::walk::{TaxiWalk, TurnWord};
use taxiwalk::walkcount::{count_taxi_walks, enumerate_taxi_walks, fibonacci_bound};
use taxiwalk::{Direction, Letter};

#[test]
fn walk_counts_match_enumeration() {
    for n in 1..=14 {
        let mut seen = 0u64;
        let mut bridges = 0u64;
        enumerate_taxi_walks(n, |w| {
            seen += 1;
            bridges += is_bridge(w.vertices()) as u64;
        });
        assert_eq!(count_taxi_walks(n, 2).unwrap(), BigUint::from(seen), "c_{n}");
        assert_eq!(count_bridges(n, 2).unwrap(), BigUint::from(bridges), "b_{n}");
        assert!(BigUint::from(seen) <= fibonacci_bound(n));
    }
}

#[test]
fn counts_do_not_depend_on_workers() {
    assert_eq!(count_taxi_walks(24, 1).unwrap(), count_taxi_walks(24, 3).unwrap());
}

#[test]
fn contours_cut_open_to_taxi_walks() {
    for (n, m) in [(3, 1), (4, 2), (5, 3)] {
        assert!(count_configurations(n, m).unwrap() > 0);
        for config in sample_configurations(n, m, 40, 11).unwrap() {
            let contour = build_contour(&config).unwrap();
            assert_eq!(contour.len() % 4, 0);
            contour_to_taxi_walk(&contour).unwrap().validate().unwrap();
        }
    }
}

#[test]
fn shifts_reconstruct() {
    for config in sample_configurations(4, 2, 60, 3).unwrap() {
        let contour = build_contour(&config).unwrap();
        for s in Direction::ALL {
            let out = shift(&config, &contour, s);
            let back = reconstruct(&out.shifted, s, contour.gamma()).unwrap();
            assert_eq!(back, config);
        }
    }
}

fn letters() -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(prop_oneof![Just(Letter::S), Just(Letter::T)], 0..40)
}

proptest! {
    #[test]
    fn decoded_walks_reencode(first in prop_oneof![Just(Direction::E), Just(Direction::N)], word in letters()) {
        let word = TurnWord::new(word);
        if let Ok(walk) = TaxiWalk::decode(first, &word) {
            prop_assert!(!word.has_double_turn());
            let again = TaxiWalk::from_vertices(walk.vertices().to_vec()).unwrap();
            prop_assert_eq!(again.turn_word(), &word);
            prop_assert_eq!(again.first_step(), first);
        }
    }
}

//! Stored witnesses replay: the search with the stored seed finds the same matrices,
//! and every symmetry image of each class gets a transported witness.

use quasiperm::core::classify::{counterexample_search, target_sum, Budget};
use quasiperm::core::step::set_density_sum;
use quasiperm::core::SymmetryOp;
use quasiperm::fixtures::{fixtures_dir, WitnessStore};

#[test]
fn stored_witnesses_replay() {
    let store = WitnessStore::load(&fixtures_dir()).unwrap();
    assert_eq!(store.len(), 8);
    for w in store.files() {
        let target = target_sum(w.set);
        assert!(set_density_sum(&w.low, w.set) < target, "{}", w.set);
        assert!(set_density_sum(&w.high, w.set) > target, "{}", w.set);
        let found = counterexample_search(w.set, &Budget::default(), w.seed).unwrap();
        assert_eq!(found.low, w.low, "{}", w.set);
        assert_eq!(found.high, w.high, "{}", w.set);
        assert_eq!(found.low_source, w.low_source);
        assert_eq!(found.high_source, w.high_source);
    }
}

#[test]
fn lookups_cover_all_images() {
    let store = WitnessStore::load(&fixtures_dir()).unwrap();
    for w in store.files() {
        for op in SymmetryOp::ALL {
            for comp in [false, true] {
                let image = w.set.apply_symmetry(op);
                let image = if comp { image.complement() } else { image };
                let (low, high) = store
                    .lookup(image)
                    .unwrap_or_else(|| panic!("no witness for {image}"));
                let target = target_sum(image);
                assert!(set_density_sum(&low, image) < target, "{image}");
                assert!(set_density_sum(&high, image) > target, "{image}");
            }
        }
    }
}

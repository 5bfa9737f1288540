mod common;

use common::{length_bound, path_is_valid, random_config};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sbd_core::config_space::{Configuration, Point};
use sbd_core::path_machinery::{
    build_path, corridor_prob_lower_bound, corridor_step_bound, path_length_bound, Path,
};
use sbd_core::rate_models::{ContactModel, ContactParams, RateModel};

proptest! {
    #[test]
    fn built_paths_are_valid_and_short(seed in any::<u64>(), n in 0usize..=8, d in 1usize..=3, scale in 0.01f64..4.0, r in 0.2f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eta = random_config(&mut rng, n, d, scale);
        let x0 = Point::new((0..d).map(|i| 0.1 * i as f64).collect()).unwrap();
        let path = build_path(&eta, r, &x0);
        prop_assert!(path.is_valid());
        prop_assert!(path_is_valid(&path.vertices, r, &x0));
        prop_assert_eq!(path.vertices.first().unwrap(), &Configuration::empty());
        prop_assert_eq!(path.last().unwrap(), &eta);
        prop_assert_eq!(path_length_bound(&eta, r, &x0), length_bound(&eta, r, &x0));
        prop_assert!(path.len() <= length_bound(&eta, r, &x0));
    }

    #[test]
    fn validator_agrees_with_oracle_on_mutated_paths(seed in any::<u64>(), n in 1usize..=5, drop in any::<usize>(), jitter in -1.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eta = random_config(&mut rng, n, 2, 1.5);
        let x0 = Point::origin(2);
        let mut path = build_path(&eta, 1.0, &x0);
        // drop one vertex and shift another point set
        if path.vertices.len() > 2 {
            let k = 1 + drop % (path.vertices.len() - 2);
            path.vertices.remove(k);
        }
        let k = drop % path.vertices.len();
        let shifted: Vec<Point> = path.vertices[k]
            .iter()
            .map(|p| Point::new(vec![p.coords()[0] + jitter, p.coords()[1]]).unwrap())
            .collect();
        if let Ok(c) = Configuration::new(shifted) {
            path.vertices[k] = c;
        }
        prop_assert_eq!(path.is_valid(), path_is_valid(&path.vertices, 1.0, &x0));
    }

    #[test]
    fn corridor_bound_shrinks_with_radius(seed in any::<u64>(), n in 1usize..=4, a in 0.01f64..0.24) {
        let m = ContactModel::new(ContactParams::default_2d()).unwrap();
        let eta = random_config(&mut ChaCha8Rng::seed_from_u64(seed), n, 2, 0.8);
        let path = build_path(&eta, 1.0, &Point::origin(2));
        let big = corridor_prob_lower_bound(&path, a, &m).unwrap();
        let small = corridor_prob_lower_bound(&path, a / 2.0, &m).unwrap();
        prop_assert!(big > 0.0);
        prop_assert!(small <= big);
    }
}

#[test]
fn corridor_radius_outside_range_is_rejected() {
    let m = ContactModel::new(ContactParams::default_2d()).unwrap();
    assert!(corridor_step_bound(&m, 0.25, 3).is_err());
    assert!(corridor_step_bound(&m, 0.0, 3).is_err());
    let bad = Path::new(
        vec![
            Configuration::empty(),
            Configuration::from_coords([[2.0, 0.0]]).unwrap(),
        ],
        1.0,
        Point::origin(2),
    );
    assert!(corridor_prob_lower_bound(&bad, 0.1, &m).is_err());
    assert_eq!(m.constants().r, 1.0);
}

mod common;

use common::{direct_entropy, random_traffic};
use hexflow::cost_model::TrafficMatrix;
use hexflow::entropy::{cell_entropy, cell_entropy_in, LogBase};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_direct_evaluation_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let t = random_traffic(&mut rng);
        worst = worst.max((cell_entropy(&t) - direct_entropy(&t)).abs());
    }
    assert!(worst <= 1e-12, "max deviation {worst:e}");
}

#[test]
fn two_equal_pairs_is_log_two() {
    let mut t = TrafficMatrix::zeros();
    t.0[0][3] = 5;
    t.0[2][4] = 5;
    assert!((cell_entropy(&t) - std::f64::consts::LN_2).abs() < 1e-15);
    assert!((cell_entropy_in(&t, LogBase::Two) - 1.0).abs() < 1e-15);
}

#[test]
fn uniform_over_all_pairs_is_log_36() {
    let t = TrafficMatrix([[3; 6]; 6]);
    assert!((cell_entropy(&t) - 36f64.ln()).abs() < 1e-12);
}

mod common;

use common::{random_cnf, random_extremal, random_theta};
use nelson_core::oracle::{
    exact_distribution, exact_grad_log_partition, expected_resamples, tv_distance,
    violation_pattern_probabilities,
};
use nelson_core::{ModelParams, ModelParams32};
use proptest::prelude::*;

fn log_z(cs: &nelson_core::ConstraintSet, theta: &[f64]) -> f64 {
    exact_distribution(cs, &ModelParams::new(theta.to_vec())).unwrap().log_partition
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gradient_matches_central_differences(n in 2usize..9, l in 1usize..6, seed in any::<u64>()) {
        let cs = random_extremal(n, l, seed);
        let theta = random_theta(n, seed ^ 1);
        let g = exact_grad_log_partition(&cs, &theta).unwrap();
        let h = 1e-5;
        for i in 0..n {
            let mut up = theta.theta.clone();
            let mut down = theta.theta.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (log_z(&cs, &up) - log_z(&cs, &down)) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() < 1e-6, "coord {i}: fd {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn violation_patterns_sum_to_one(n in 1usize..11, l in 1usize..7, seed in any::<u64>()) {
        let cs = random_cnf(n, l, seed);
        let theta = random_theta(n, seed);
        let q = violation_pattern_probabilities(&cs, &theta).unwrap();
        let total: f64 = q.values().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        if let Ok(r) = expected_resamples(&cs, &theta) {
            prop_assert!((r.q_empty - q[&vec![]]).abs() < 1e-12);
            for (j, &qj) in r.q_single.iter().enumerate() {
                prop_assert!((qj - q.get(&vec![j]).copied().unwrap_or(0.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn distribution_ignores_clause_order(n in 2usize..9, l in 2usize..7, seed in any::<u64>()) {
        let cs = random_cnf(n, l, seed);
        let theta = random_theta(n, seed);
        let mut order: Vec<usize> = (0..l).collect();
        order.reverse();
        order.rotate_left(seed as usize % l);
        let shuffled = cs.with_clause_order(&order);
        match (exact_distribution(&cs, &theta), exact_distribution(&shuffled, &theta)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a.support, &b.support);
                prop_assert!(tv_distance(&a.table(), &b.table()).unwrap() < 1e-14);
                prop_assert!((a.log_partition - b.log_partition).abs() < 1e-12);
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "satisfiability changed under reordering"),
        }
    }
}

#[test]
fn single_and_double_precision_agree() {
    for seed in 0..10 {
        let cs = random_extremal(8, 4, seed);
        let t64 = random_theta(8, seed);
        let t32 = ModelParams32::new(t64.theta.iter().map(|&t| t as f32).collect());
        let a = exact_distribution(&cs, &t64).unwrap();
        let b = exact_distribution(&cs, &t32).unwrap();
        assert_eq!(a.support, b.support);
        for (p, q) in a.probabilities.iter().zip(&b.probabilities) {
            assert!((p - *q as f64).abs() < 1e-5);
        }
    }
}

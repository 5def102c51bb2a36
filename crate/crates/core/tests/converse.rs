use latcomm::converse::{
    entropy_ratio, example1_grid_search, minimize_entropy_ratio, self_similar_partition, verify_converse,
    ConstraintPolytope, SideEntropies,
};
use latcomm::partition::sample::random_zero_error_partition;
use latcomm::partition::{
    check_staircase_bounds, readjust_max_rectangle, readjustment_keeps_order, Label, LabeledPartition, ProbVector,
    TargetFunction,
};
use latcomm::protocol::{induced_partition, sum_rate, BitExchange};

#[test]
fn converse_report_without_grid() {
    let r = verify_converse(None).unwrap();
    assert!(r.passed, "{r:#?}");
    assert!(r.example1.grid.is_none());
    assert_eq!(r.thm5.total_bits, 4.0);
    assert_eq!(r.example1.min_entropy, 1.5);
}

#[test]
fn grid_oracle_agrees_with_the_vertex() {
    let g = example1_grid_search(48, 4).unwrap();
    assert!(g.min_entropy >= 1.5 - 1e-9);
    assert!((g.min_entropy - 1.5).abs() < 1e-12);
    let poly = ConstraintPolytope::quadrant();
    assert!(poly.feasible(&g.argmin_p, &g.argmin_q));
}

#[test]
fn self_similar_and_bit_exchange_agree() {
    for d in 1..=10 {
        let ss = self_similar_partition(0.5, d).unwrap();
        let be = induced_partition(&BitExchange::new(d).unwrap()).unwrap();
        assert!((ss.entropy() - be.entropy()).abs() < 1e-12, "depth {d}");
        assert!((ss.entropy() - sum_rate(&BitExchange::new(d).unwrap()).unwrap()).abs() < 1e-12);
        assert!(check_staircase_bounds(&ss).holds);
    }
}

#[test]
fn unbalanced_splits_cost_more() {
    let best = SideEntropies::new(&self_similar_partition(0.5, 16).unwrap()).h_given_p;
    for v in [0.2, 0.35, 0.65, 0.8] {
        let h = SideEntropies::new(&self_similar_partition(v, 16).unwrap()).h_given_p;
        assert!(h > best, "v = {v}");
        assert!(h < entropy_ratio(v).unwrap());
    }
    let m = minimize_entropy_ratio(1e-8).unwrap();
    assert!((m.v_star - 0.5).abs() < 1e-7);
}

#[test]
fn readjustment_over_many_partitions() {
    let f = TargetFunction::MinIndicator;
    let (mut tried, mut ordered) = (0, 0);
    for seed in 0..1000u64 {
        let part = random_zero_error_partition(seed, 1 + (seed % 4) as u32);
        if part.with_label(Label::P).next().is_none() {
            continue;
        }
        tried += 1;
        let out = readjust_max_rectangle(&part, f).unwrap();
        assert!(out.decided_cells_respect(f));
        LabeledPartition::new(out.cells().to_vec()).unwrap();
        if readjustment_keeps_order(&part, f).unwrap() {
            ordered += 1;
            let before = ProbVector::new(part.probabilities()).unwrap();
            let after = ProbVector::new(out.probabilities()).unwrap();
            assert!(after.majorizes(&before).unwrap(), "seed {seed}");
            assert!(out.entropy() <= part.entropy() + 1e-12);
        }
    }
    assert!(tried > 500);
    assert!(ordered > 100, "{ordered} of {tried}");
}

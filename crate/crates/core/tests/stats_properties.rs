//! Property tests for the statistics core.

use proptest::prelude::*;

use replicheck_core::stats::{f_cdf, one_way_anova, TSquaredVector};
use replicheck_core::verify::filter_tail;

proptest! {
    #[test]
    fn f_cdf_is_monotone_in_x(
        x1 in 0.0..20.0_f64,
        gap in 0.0..20.0_f64,
        d1 in 1..80_usize,
        d2 in 1..80_usize,
    ) {
        let lo = f_cdf(x1, d1, d2).unwrap();
        let hi = f_cdf(x1 + gap, d1, d2).unwrap();
        prop_assert!(hi >= lo - 1e-12, "cdf({x1})={lo} > cdf({}+gap)={hi}", x1);
    }

    #[test]
    fn f_cdf_reflection_symmetry(
        x in 0.01..50.0_f64,
        d1 in 1..60_usize,
        d2 in 1..60_usize,
    ) {
        // P(F ≤ x) = P(1/F ≥ 1/x) with swapped degrees of freedom
        let lhs = f_cdf(x, d1, d2).unwrap();
        let rhs = 1.0 - f_cdf(1.0 / x, d2, d1).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9, "lhs {lhs}, rhs {rhs}");
    }

    #[test]
    fn anova_invariant_under_common_shift(
        seed_values in proptest::collection::vec(0.0..10.0_f64, 12..40),
        shift in -100.0..100.0_f64,
    ) {
        // carve the flat vector into three groups of at least 4
        let third = seed_values.len() / 3;
        let groups: Vec<Vec<f64>> = vec![
            seed_values[..third].to_vec(),
            seed_values[third..2 * third].to_vec(),
            seed_values[2 * third..].to_vec(),
        ];
        let shifted: Vec<Vec<f64>> = groups
            .iter()
            .map(|g| g.iter().map(|v| v + shift).collect())
            .collect();
        let base = one_way_anova(&groups, 0.05).unwrap();
        let moved = one_way_anova(&shifted, 0.05).unwrap();
        if base.f_statistic.is_finite() {
            prop_assert!(
                (base.f_statistic - moved.f_statistic).abs() < 1e-9,
                "F {} vs {}", base.f_statistic, moved.f_statistic
            );
        }
    }

    #[test]
    fn filter_tail_survivors_are_a_bounded_subsequence(
        values in proptest::collection::vec(0.0..1_000.0_f64, 1..200),
        percentile in 51.0..100.0_f64,
    ) {
        let t2 = TSquaredVector::new(values.clone());
        let filtered = filter_tail(&t2, percentile).unwrap();
        // survivors form a subsequence: same values, original order
        let mut cursor = filtered.values.iter().peekable();
        for v in &values {
            if cursor.peek() == Some(&v) {
                cursor.next();
            }
        }
        prop_assert!(cursor.next().is_none(), "not a subsequence");
        let max_dropped =
            ((100.0 - percentile) / 100.0 * values.len() as f64).ceil() as usize + 1;
        prop_assert!(
            values.len() - filtered.values.len() <= max_dropped,
            "dropped {} of {}, cap {max_dropped}",
            values.len() - filtered.values.len(),
            values.len()
        );
    }
}

#[test]
fn anova_p_decreases_as_one_group_shifts_away() {
    // fixed base groups; push the third group's mean out in three steps
    let base: Vec<f64> = (0..20).map(|i| (i % 7) as f64 * 0.5).collect();
    let mut previous = 1.0_f64;
    for shift in [0.5, 1.0, 1.5] {
        let groups = vec![
            base.clone(),
            base.clone(),
            base.iter().map(|v| v + shift).collect(),
        ];
        let p = one_way_anova(&groups, 0.05).unwrap().p_value;
        assert!(
            p < previous,
            "p did not decrease at shift {shift}: {p} vs {previous}"
        );
        previous = p;
    }
}

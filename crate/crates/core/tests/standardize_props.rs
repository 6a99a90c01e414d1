use proptest::prelude::*;
use riforest::{standardize_apply, standardize_fit, validate_params, Dataset, RiForestParams, SplitStrategy};

proptest! {
    #[test]
    fn fit_then_apply_gives_zero_mean_unit_std(
        (n, d, values) in (2usize..60, 1usize..5).prop_flat_map(|(n, d)| {
            (Just(n), Just(d), prop::collection::vec(-1e3f64..1e3, n * d))
        })
    ) {
        let names = (0..d).map(|j| format!("c{j}")).collect();
        let data = Dataset::new(values, n, d, None, names).unwrap();
        let stats = standardize_fit(&data);
        let std = standardize_apply(&data, &stats).unwrap();
        let after = standardize_fit(&std);
        for j in 0..d {
            if stats.stds[j] > 1e-6 {
                prop_assert!(after.means[j].abs() <= 1e-9);
                prop_assert!((after.stds[j] - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn validation_accepts_exactly_the_valid_region(
        trees in 0usize..5,
        psi in 0usize..5,
        bins in 0usize..6,
        alpha in -0.5f64..1.5,
        strategy in prop_oneof![Just(SplitStrategy::Valley), Just(SplitStrategy::Random), Just(SplitStrategy::Blank)],
    ) {
        let p = RiForestParams {
            num_trees: trees,
            subsample_size: psi,
            num_bins: bins,
            entropy_threshold: alpha,
            split_strategy: strategy,
            ..Default::default()
        };
        let min_bins = if strategy == SplitStrategy::Valley { 3 } else { 2 };
        let valid = trees >= 1 && psi >= 1 && bins >= min_bins && alpha > 0.0 && alpha <= 1.0;
        prop_assert_eq!(validate_params(p).is_ok(), valid);
    }
}

use proptest::prelude::*;

use roughpath::brownian::{self, BrownianSample};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Refining then coarsening gives back the coarse sample exactly.
    #[test]
    fn refinement_is_consistent(seed in 0u64..1000, dim in 1usize..4, depth in 1usize..8, extra in 1usize..5) {
        let coarse = BrownianSample::new(dim, depth, 2.0, seed).unwrap();
        let fine = BrownianSample::new(dim, depth + extra, 2.0, seed).unwrap();
        prop_assert_eq!(fine.coarsen(depth).unwrap(), coarse.clone());
        prop_assert_eq!(coarse.refine(depth + extra).unwrap(), fine);
    }

    /// The two lifts differ by `(t-s)/2 Id` at level 2 and agree elsewhere.
    #[test]
    fn ito_and_stratonovich_differ_by_half_time(seed in 0u64..1000) {
        let sample = BrownianSample::new(2, 5, 1.0, seed).unwrap();
        let strat = brownian::stratonovich_lift(&sample, 3, 2.5).unwrap();
        let ito = brownian::ito_lift(&strat).unwrap();
        prop_assert!(strat.is_weak_geometric());
        prop_assert!(!ito.is_weak_geometric());
        let (i, j) = (3, 27);
        let dt = strat.times()[j] - strat.times()[i];
        let (a, b) = (strat.increment(i, j), ito.increment(i, j));
        for k in 0..4 {
            let shift = if k % 3 == 0 { 0.5 * dt } else { 0.0 };
            prop_assert!((a.level(2)[k] - b.level(2)[k] - shift).abs() < 1e-12);
        }
        for k in 0..2 {
            prop_assert!((a.level(1)[k] - b.level(1)[k]).abs() < 1e-14);
        }
    }
}

/// Grid Hölder norms of the Stratonovich lift with `1/p < 1/2` stay bounded
/// under refinement.
#[test]
fn holder_norms_are_stable_under_refinement() {
    let norms: Vec<(f64, f64)> = [6, 8, 10]
        .iter()
        .map(|&depth| {
            let sample = BrownianSample::new(2, depth, 1.0, 21).unwrap();
            let x = brownian::stratonovich_lift(&sample, 2, 2.5).unwrap();
            (x.holder_norm(1).unwrap(), x.holder_norm(2).unwrap())
        })
        .collect();
    for level in 0..2 {
        let v: Vec<f64> = norms.iter().map(|n| if level == 0 { n.0 } else { n.1 }).collect();
        let (lo, hi) = v.iter().fold((f64::MAX, 0.0_f64), |(l, h), x| (l.min(*x), h.max(*x)));
        assert!(hi < 2.0 * lo, "level {}: {v:?}", level + 1);
    }
}

/// The delayed pair approaches its limit in mean, seen on a fixed
/// observation grid of step `2^-6` with delays below it (same samples for
/// every delay). The limit's level 2 carries the `-(t-s)/2`, `+(t-s)/2`
/// antisymmetric correction.
#[test]
fn delayed_pair_approaches_limit_in_mean() {
    let seeds = 16;
    let coarse: Vec<usize> = (0..=64).map(|k| k * 64).collect();
    let mut mean = vec![0.0; 5];
    for seed in 0..seeds {
        let sample = BrownianSample::new(1, 12, 1.0, seed).unwrap();
        let limit = brownian::delayed_pair_limit(&sample, 2.5).unwrap();
        let limit_obs = limit.restrict(&coarse).unwrap();
        for (k, m) in mean.iter_mut().enumerate() {
            let eps = 0.5f64.powi(k as i32 + 7);
            let x = brownian::delayed_pair(&sample, eps, 2.5).unwrap().restrict(&coarse).unwrap();
            *m += x.distance(&limit_obs).unwrap() / seeds as f64;
        }
        let end = limit.increment(0, limit.len() - 1);
        assert!((end.level(2)[2] - end.level(2)[1] - 1.0).abs() < 1e-12);
    }
    assert!(mean.windows(2).all(|w| w[1] < w[0]), "{mean:?}");
    // roughly sqrt(eps): a factor 4 over four halvings
    assert!(mean[4] < 0.4 * mean[0], "{mean:?}");
}

#[test]
fn levy_area_of_the_lift_matches_the_sampler() {
    // the sampler's polygon formula and the lift's level 2 agree
    let sample = BrownianSample::new(2, 8, 1.0, 0).unwrap();
    let x = brownian::piecewise_linear_lift(&sample, 2.5).unwrap();
    let a = brownian::levy_area(&x.increment(0, x.len() - 1)).unwrap();
    let b = brownian::levy_area_samples(1, 8, 1.0, 0).unwrap()[0];
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
}

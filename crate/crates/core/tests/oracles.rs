//! Optimization oracles: closed-form reference configurations must not be
//! beaten by multistart search, and coherence must fall as the exponent
//! grows.

use framepack::energy::energy;
use framepack::kernels::KernelSpec;
use framepack::metrics::coherence;
use framepack::optimizer::{multistart, OptimizerSettings};
use framepack::reference::{half_circle_config, simplex_etf};

fn settings(seed: u64, restarts: usize, max_iters: usize) -> OptimizerSettings {
    OptimizerSettings {
        seed,
        restarts,
        max_iters,
        grad_tol: 1e-9,
        ..OptimizerSettings::default()
    }
}

#[test]
fn half_circle_attains_the_minimum_among_fifty_restarts() {
    for s in [0.0, 1.0, 2.0] {
        let k = KernelSpec::projective_riesz(s);
        for n in 3..=8usize {
            let oracle = energy(&k, &half_circle_config(n).unwrap());
            let run = multistart(&k, 2, n, &settings(1300 + n as u64, 50, 20_000)).unwrap();
            assert!(
                oracle <= run.report.energy + 1e-9 * oracle.abs().max(1.0),
                "s={s} n={n}: oracle {oracle} vs search {}",
                run.report.energy
            );
        }
    }
}

#[test]
fn simplex_is_not_beaten_by_search() {
    for d in [2usize, 3, 4] {
        for s in [0.0, 2.0] {
            let k = KernelSpec::projective_riesz(s);
            let oracle = energy(&k, &simplex_etf(d).unwrap());
            let run = multistart(&k, d, d + 1, &settings(1400 + d as u64, 40, 40_000)).unwrap();
            assert!(
                oracle <= run.report.energy + 1e-9 * oracle.abs().max(1.0),
                "d={d} s={s}: oracle {oracle} vs search {}",
                run.report.energy
            );
        }
    }
}

#[test]
fn coherence_falls_toward_the_packing_limit_as_s_grows() {
    // d=3, N=5: coherence of the putative optimum is non-increasing in s
    // and approaches 1/sqrt(5) from above.
    let target = 1.0 / 5.0_f64.sqrt();
    let mut cohs = Vec::new();
    for s in [2.0, 10.0, 15.0] {
        let run = multistart(
            &KernelSpec::projective_riesz(s),
            3,
            5,
            &settings(1500, 12, 60_000),
        )
        .unwrap();
        cohs.push(coherence(&run.config).unwrap());
    }
    assert!(cohs[1] <= cohs[0] + 5e-3, "{cohs:?}");
    assert!(cohs[2] <= cohs[1] + 5e-3, "{cohs:?}");
    assert!(
        (cohs[2] - target).abs() < (cohs[0] - target).abs(),
        "{cohs:?} does not approach {target}"
    );
}

#[test]
fn coherence_never_beats_the_welch_bound() {
    use framepack::metrics::{frame_bounds, welch_bound};
    use framepack::optimizer::{random_uniform_frame, split_seed};

    // Random frames with N >= d, plus optimized ones, all sit at or above
    // the bound; frame bounds straddle N/d.
    for trial in 0..200u64 {
        let (d, n) = ([2usize, 3, 4, 6][(trial % 4) as usize], 3 + (trial % 9) as usize);
        if n < d {
            continue;
        }
        let x = random_uniform_frame(d, n, split_seed(1600, trial)).unwrap();
        let coh = coherence(&x).unwrap();
        assert!(coh >= welch_bound(d, n) - 1e-12, "d={d} n={n}: {coh}");
        let (lo, hi) = frame_bounds(&x);
        let ratio = n as f64 / d as f64;
        assert!(lo <= ratio + 1e-9 && hi >= ratio - 1e-9);
    }
    for (d, n, seed) in [(3usize, 6usize, 1601u64), (2, 5, 1602), (3, 9, 1603)] {
        let run = multistart(
            &KernelSpec::projective_riesz(2.0),
            d,
            n,
            &settings(seed, 8, 20_000),
        )
        .unwrap();
        let coh = coherence(&run.config).unwrap();
        assert!(coh >= welch_bound(d, n) - 1e-12, "optimized d={d} n={n}: {coh}");
    }
}

#[test]
fn icosahedral_search_output_is_equiangular_to_tolerance() {
    use framepack::kernels::gram_abs;

    let run = multistart(
        &KernelSpec::projective_riesz(2.0),
        3,
        6,
        &settings(1700, 40, 40_000),
    )
    .unwrap();
    let g = gram_abs(&run.config);
    let target = 1.0 / 5.0_f64.sqrt();
    for i in 0..6 {
        for j in (i + 1)..6 {
            assert!(
                (g[i][j] - target).abs() < 2e-3,
                "pair ({i},{j}): {}",
                g[i][j]
            );
        }
    }
}

#[test]
fn computed_minimizer_round_trips_and_matches_reference_file() {
    use framepack::ingest::{compare_to_reference, load_packing, save_packing};
    use framepack::reference::icosahedron_etf6;

    let run = multistart(
        &KernelSpec::projective_riesz(2.0),
        3,
        6,
        &settings(1701, 40, 40_000),
    )
    .unwrap();
    let mut path = std::env::temp_dir();
    path.push(format!("framepack_oracle_{}_min.txt", std::process::id()));
    save_packing(&path, &run.config).unwrap();
    let loaded = load_packing(&path, 3, 6).unwrap();
    let rec_cmp = compare_to_reference(&loaded.config, &icosahedron_etf6(), 1e-6).unwrap();
    assert!(rec_cmp.coherence_diff.abs() < 2e-3, "diff {}", rec_cmp.coherence_diff);
    std::fs::remove_file(&path).ok();
}

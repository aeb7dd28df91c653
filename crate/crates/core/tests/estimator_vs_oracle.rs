#![allow(clippy::needless_range_loop)]

use expmc::oracle::{exact_action, splitting_product, DenseMatrix};
use expmc::{
    dense_expm, entry_estimate, generate, split, tc_estimate, vector_estimate, GenSpec, PathParams, RngStream,
    SegmentSampler, SparseSymmetric, SplitMatrix, Splitting,
};

fn within(x: f64, target: f64, se: f64) -> bool {
    (x - target).abs() <= 4.0 * se + 1e-12 * target.abs().max(1.0)
}

fn path(n: usize) -> SplitMatrix {
    split(&SparseSymmetric::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()).unwrap()
}

fn weighted_small() -> SplitMatrix {
    let a = SparseSymmetric::from_triplets(
        6,
        [
            (0, 1, 0.7),
            (1, 2, 1.3),
            (2, 3, 0.4),
            (3, 4, 2.0),
            (4, 5, 0.9),
            (0, 5, 1.1),
            (1, 4, 0.6),
            (0, 0, 0.5),
            (3, 3, -0.2),
        ],
    )
    .unwrap();
    split(&a).unwrap()
}

#[test]
fn entry_estimates_match_splitting_product() {
    let graphs = [path(5), weighted_small(), split(&generate(&GenSpec::erdos_renyi(10, 0.3, 4)).unwrap()).unwrap()];
    for (g, m) in graphs.iter().enumerate() {
        let n = m.n();
        let v: Vec<f64> = (0..n).map(|i| 0.5 + (i % 3) as f64).collect();
        for s in [Splitting::Lie, Splitting::Strang] {
            let p = PathParams::new(1.0, 8, 200_000, s, 31 + g as u64).unwrap();
            let reference = splitting_product(m, &v, &p).unwrap();
            let i = g % n;
            let e = entry_estimate(m, &v, i, &p).unwrap();
            assert!(within(e.value, reference[i], e.std_error), "graph {g} {s}: {} vs {}", e.value, reference[i]);
        }
    }
}

#[test]
fn vector_estimates_match_splitting_product() {
    let m = weighted_small();
    let v = [1.0, 0.2, 3.0, 0.0, 1.5, 0.7];
    for s in [Splitting::Lie, Splitting::Strang] {
        let p = PathParams::new(0.8, 10, 400_000, s, 9).unwrap();
        let reference = splitting_product(&m, &v, &p).unwrap();
        let mc = vector_estimate(&m, &v, &p).unwrap();
        for i in 0..6 {
            assert!(
                within(mc.values[i], reference[i], mc.entry_std_errors[i]),
                "{s} entry {i}: {} vs {}",
                mc.values[i],
                reference[i]
            );
        }
        let total: f64 = reference.iter().sum();
        assert!(within(mc.functional_mean, total, mc.std_error_global));
    }
}

#[test]
fn entry_and_vector_estimates_agree() {
    let m = weighted_small();
    let v = vec![1.0; 6];
    let p = PathParams::new(1.0, 8, 300_000, Splitting::Strang, 12).unwrap();
    let mc = vector_estimate(&m, &v, &p).unwrap();
    for i in [0, 3] {
        let e = entry_estimate(&m, &v, i, &PathParams { seed: 1000 + i as u64, ..p }).unwrap();
        let se = (e.std_error.powi(2) + mc.entry_std_errors[i].powi(2)).sqrt();
        assert!(within(e.value, mc.values[i], se), "entry {i}: {} vs {}", e.value, mc.values[i]);
    }
}

#[test]
fn regular_graph_estimates_the_true_exponential() {
    let n = 10;
    let ring = split(&SparseSymmetric::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()).unwrap();
    let v: Vec<f64> = (0..n).map(|i| (i * i % 7) as f64).collect();
    let truth = exact_action(&ring, &v, 1.0).unwrap();
    let p = PathParams::new(1.0, 4, 200_000, Splitting::Lie, 3).unwrap();
    let e = entry_estimate(&ring, &v, 2, &p).unwrap();
    assert!(within(e.value, truth[2], e.std_error));
    let tc = tc_estimate(&ring, &p).unwrap();
    // exp(A) 1 = exp(2) 1 on a 2-regular graph, and every path has the same weight.
    assert!((tc.value - n as f64 * 2f64.exp()).abs() < 1e-9);
    assert_eq!(tc.std_error, 0.0);
}

#[test]
fn tc_on_small_world_matches_oracle() {
    let m = split(&generate(&GenSpec::small_world(100, 1, 0.4, 1)).unwrap()).unwrap();
    let p = PathParams::from_dt(1.0, 0.03125, 1_000_000, Splitting::Strang, 2).unwrap();
    let reference: f64 = splitting_product(&m, &vec![1.0; 100], &p).unwrap().iter().sum();
    let tc = tc_estimate(&m, &p).unwrap();
    assert!(within(tc.value, reference, tc.std_error), "{} vs {reference}", tc.value);
    assert!(tc.std_error / tc.value < 1e-3);
}

fn transition_frequencies(m: &SplitMatrix, dt: f64, start: usize, samples: u64, seed: u64) -> Vec<f64> {
    let sampler = SegmentSampler::new(m, dt).unwrap();
    let mut counts = vec![0u64; m.n()];
    for l in 0..samples {
        let mut rng = RngStream::new(seed, l);
        counts[sampler.advance(&mut rng, start).end_state] += 1;
    }
    counts.iter().map(|&c| c as f64 / samples as f64).collect()
}

#[test]
fn one_segment_transitions_follow_heat_kernel() {
    let dt = 0.4;
    let samples = 100_000u64;
    for m in [path(5), weighted_small()] {
        let kernel = dense_expm(&DenseMatrix::laplacian(&m, -dt)).unwrap();
        for start in 0..m.n() {
            let freq = transition_frequencies(&m, dt, start, samples, 50 + start as u64);
            for (j, f) in freq.iter().enumerate() {
                let p = kernel.get(start, j);
                let tol = 4.0 * (p * (1.0 - p) / samples as f64).sqrt() + 1e-12;
                assert!((f - p).abs() <= tol, "{start}->{j}: {f} vs {p}");
            }
        }
    }
}

#[test]
fn transition_probabilities_are_symmetric() {
    let m = weighted_small();
    let samples = 200_000u64;
    let freq: Vec<Vec<f64>> = (0..m.n()).map(|i| transition_frequencies(&m, 0.7, i, samples, 900 + i as u64)).collect();
    for i in 0..m.n() {
        for j in 0..i {
            let p = 0.5 * (freq[i][j] + freq[j][i]);
            let tol = 4.0 * (2.0 * p * (1.0 - p) / samples as f64).sqrt() + 1e-12;
            assert!((freq[i][j] - freq[j][i]).abs() <= tol, "{i},{j}: {} vs {}", freq[i][j], freq[j][i]);
        }
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let m = weighted_small();
    let v = [1.0, 2.0, 0.5, 0.0, 1.0, 3.0];
    let p = PathParams::new(1.0, 5, 50_000, Splitting::Lie, 8).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| (vector_estimate(&m, &v, &p).unwrap(), entry_estimate(&m, &v, 1, &p).unwrap()))
    };
    let (v1, e1) = run(1);
    let (v4, e4) = run(4);
    assert_eq!(v1, v4);
    assert_eq!(e1, e4);
}

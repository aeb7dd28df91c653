use expmc::oracle::{
    commutator_bounds, decompose_error, dense_expm, exact_action, splitting_product, DenseMatrix, Norm,
};
use expmc::{
    generate, loglog_slope, split, vector_estimate, GenSpec, PathParams, SparseSymmetric, SplitMatrix, Splitting,
};

const SWEEP: [f64; 6] = [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.0156];

fn small_world(n: usize, seed: u64) -> SplitMatrix {
    split(&generate(&GenSpec::small_world(n, 1, 0.4, seed)).unwrap()).unwrap()
}

fn split_errors(
    m: &SplitMatrix,
    v: &[f64],
    s: Splitting,
    reduce: impl Fn(&[f64], &[f64]) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let truth = exact_action(m, v, 1.0).unwrap();
    let mut dts = Vec::new();
    let mut errs = Vec::new();
    for dt in SWEEP {
        let p = PathParams::from_dt(1.0, dt, 1, s, 0).unwrap();
        let approx = splitting_product(m, v, &p).unwrap();
        dts.push(p.dt());
        errs.push(reduce(&truth, &approx));
    }
    (dts, errs)
}

#[test]
fn expm_symmetric_and_positive_on_connected_graphs() {
    let m = small_world(60, 3);
    let e = dense_expm(&DenseMatrix::from_split(&m, 1.0)).unwrap();
    let mut asym: f64 = 0.0;
    for i in 0..60 {
        for j in 0..60 {
            asym = asym.max((e.get(i, j) - e.get(j, i)).abs() / e.get(i, j).abs().max(1.0));
            assert!(e.get(i, j) > 0.0);
        }
    }
    assert!(asym < 1e-12, "asymmetry {asym}");
}

#[test]
fn strang_is_second_order_for_nonuniform_v() {
    let m = small_world(100, 11);
    let v: Vec<f64> = (0..100).map(|i| 1.0 + ((i * 37) % 11) as f64 / 5.0).collect();
    let (dts, errs) = split_errors(&m, &v, Splitting::Strang, |a, b| Norm::LInf.distance(a, b));
    let slope = loglog_slope(&dts, &errs).unwrap();
    assert!((1.7..=2.3).contains(&slope), "slope {slope}");
    // Halving dt shrinks the error roughly fourfold once in the asymptotic range.
    let ratio = errs[4] / errs[5];
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn lie_is_first_order_for_an_entry_but_second_order_for_tc() {
    let m = small_world(100, 11);
    let ones = vec![1.0; 100];
    let (dts, entry) = split_errors(&m, &ones, Splitting::Lie, |a, b| (a[0] - b[0]).abs());
    let slope = loglog_slope(&dts, &entry).unwrap();
    assert!((0.8..=1.2).contains(&slope), "entry slope {slope}");

    let total = |a: &[f64], b: &[f64]| (a.iter().sum::<f64>() - b.iter().sum::<f64>()).abs();
    let (dts, tc) = split_errors(&m, &ones, Splitting::Lie, total);
    let slope = loglog_slope(&dts, &tc).unwrap();
    assert!((1.7..=2.3).contains(&slope), "tc slope {slope}");
}

#[test]
fn tc_splitting_error_respects_analytic_bound() {
    let m = small_world(100, 5);
    let ones = vec![1.0; 100];
    let truth: f64 = exact_action(&m, &ones, 1.0).unwrap().iter().sum();
    for dt in SWEEP {
        let p = PathParams::from_dt(1.0, dt, 1, Splitting::Strang, 0).unwrap();
        let split: f64 = splitting_product(&m, &ones, &p).unwrap().iter().sum();
        let bound = commutator_bounds(&m, p.dt(), &ones).unwrap().tc_bound;
        assert_eq!(bound, 2.0 * m.dmax().powi(3) * p.dt().powi(2));
        // The bound is for one step of the per-node average.
        assert!((truth - split).abs() / 100.0 <= bound, "dt {dt}");
    }
}

#[test]
fn regular_graph_has_no_splitting_error() {
    let n = 8;
    let ring = split(&SparseSymmetric::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()).unwrap();
    let v: Vec<f64> = (0..n).map(|i| (i + 1) as f64).collect();
    let p = PathParams::from_dt(1.0, 0.25, 20_000, Splitting::Lie, 1).unwrap();
    let mc = vector_estimate(&ring, &v, &p).unwrap();
    let e = decompose_error(&ring, &v, &p, &mc, Norm::LInf).unwrap();
    assert!(e.eps_split < 1e-10);
    assert_eq!(e.eps_total, e.eps_split + e.eps_stat);
    assert!(e.eps_observed <= e.eps_total + 1e-12);
}

#[test]
fn large_sample_statistical_error_within_error_bars() {
    let a = SparseSymmetric::from_triplets(3, [(0, 1, 1.0), (1, 2, 0.5), (2, 2, 0.3)]).unwrap();
    let m = split(&a).unwrap();
    let v = [1.0, 0.5, 2.0];
    let p = PathParams::new(1.0, 4, 10_000_000, Splitting::Strang, 77).unwrap();
    let mc = vector_estimate(&m, &v, &p).unwrap();
    let e = decompose_error(&m, &v, &p, &mc, Norm::LInf).unwrap();
    let bar = mc.entry_std_errors.iter().copied().fold(0.0, f64::max);
    assert!(e.eps_stat < 4.0 * bar, "eps_stat {} vs se {bar}", e.eps_stat);
}

#[test]
fn splitting_error_vanishes_while_statistical_error_plateaus() {
    let m = small_world(20, 2);
    let ones = vec![1.0; 20];
    let mut split_errs = Vec::new();
    let mut stat_errs = Vec::new();
    for dt in [0.5, 0.125, 0.03125] {
        let p = PathParams::from_dt(1.0, dt, 20_000, Splitting::Lie, 5).unwrap();
        let mc = vector_estimate(&m, &ones, &p).unwrap();
        let e = decompose_error(&m, &ones, &p, &mc, Norm::LInf).unwrap();
        split_errs.push(e.eps_split);
        stat_errs.push(e.eps_stat);
    }
    assert!(split_errs[2] < split_errs[0] / 10.0, "{split_errs:?}");
    // Statistical error stays at the same scale when dt shrinks.
    let (lo, hi) = stat_errs.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    assert!(hi / lo < 5.0, "{stat_errs:?}");
    // And dominates at the finest step.
    assert!(stat_errs[2] > split_errs[2]);
}

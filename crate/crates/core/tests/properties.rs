use std::io::Cursor;

use expmc::graph::{read_matrix_market, write_matrix_market_to};
use expmc::{isim, rank, split, SparseSymmetric};
use proptest::prelude::*;

fn symmetric_matrix() -> impl Strategy<Value = SparseSymmetric> {
    (2usize..12).prop_flat_map(|n| {
        let edges = prop::collection::vec((0..n, 0..n, 0.0f64..3.0), 0..3 * n);
        let diag = prop::collection::vec(-2.0f64..2.0, n);
        (Just(n), edges, diag).prop_map(|(n, edges, diag)| {
            let mut seen = std::collections::HashSet::new();
            let mut t: Vec<(usize, usize, f64)> = Vec::new();
            for (i, j, w) in edges {
                if i != j && seen.insert((i.min(j), i.max(j))) {
                    t.push((i, j, w));
                }
            }
            t.extend(diag.iter().enumerate().map(|(i, &d)| (i, i, d)));
            SparseSymmetric::from_triplets(n, t).unwrap()
        })
    })
}

fn scores(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-5.0f64..5.0, n), prop::collection::vec(-5.0f64..5.0, n))
}

proptest! {
    #[test]
    fn split_reassembles_to_rounding(a in symmetric_matrix()) {
        let m = split(&a).unwrap();
        let n = a.n();
        let dense = a.to_dense();
        // Off-diagonal entries come back bitwise; the diagonal to rounding.
        let back = m.reassemble().to_dense();
        for (x, y) in dense.iter().zip(&back) {
            prop_assert!((x - y).abs() <= 1e-12 * (m.dmax() + x.abs()).max(1.0));
        }
        prop_assert_eq!(m.reassemble().entries().iter().filter(|e| e.0 != e.1).count(), a.edge_count());
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| dense[i * n + j]).sum();
            prop_assert!((m.rate()[i] - off).abs() <= 1e-12 * off.max(1.0));
            prop_assert!((m.d()[i] - m.rate()[i] - dense[i * n + i]).abs() <= 1e-12 * off.max(1.0));
        }
        // L has zero row sums.
        let l1 = m.apply_laplacian(&vec![1.0; n]);
        prop_assert!(l1.iter().all(|x| x.abs() <= 1e-12 * m.dmax().max(1.0)));
    }

    #[test]
    fn matrix_market_round_trips(a in symmetric_matrix()) {
        let mut buf = Vec::new();
        write_matrix_market_to(&a, &mut buf).unwrap();
        let b = read_matrix_market(Cursor::new(buf), "mem").unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn rank_is_a_permutation(v in prop::collection::vec(-10.0f64..10.0, 1..50)) {
        let r = rank(&v).unwrap();
        let mut seen = r.order().to_vec();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..v.len()).collect::<Vec<_>>());
        for w in r.order().windows(2) {
            prop_assert!(v[w[0]] >= v[w[1]]);
        }
    }

    #[test]
    fn isim_symmetric_and_bounded((x, y) in (1usize..40).prop_flat_map(scores), frac in 0.01f64..=1.0) {
        let (rx, ry) = (rank(&x).unwrap(), rank(&y).unwrap());
        let a = isim(&rx, &ry, frac).unwrap();
        let b = isim(&ry, &rx, frac).unwrap();
        prop_assert!((a - b).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(isim(&rx, &rx, frac).unwrap(), 0.0);
    }

    #[test]
    fn isim_ignores_monotone_rescaling((x, y) in (1usize..40).prop_flat_map(scores), scale in 0.1f64..10.0, shift in -3.0f64..3.0) {
        let (rx, ry) = (rank(&x).unwrap(), rank(&y).unwrap());
        let x2: Vec<f64> = x.iter().map(|v| (scale * v + shift).exp()).collect();
        let rx2 = rank(&x2).unwrap();
        prop_assert_eq!(rx.order(), rx2.order());
        prop_assert_eq!(isim(&rx, &ry, 0.5).unwrap(), isim(&rx2, &ry, 0.5).unwrap());
    }
}

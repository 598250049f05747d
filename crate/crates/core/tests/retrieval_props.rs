use proptest::prelude::*;

use neuronarr::align::Square;
use neuronarr::retrieval::{mean_rank, recall_at_k, report, Direction};

fn square(n: usize, v: &[f64]) -> Square {
    let rows: Vec<Vec<f64>> = (0..n).map(|i| v[i * n..(i + 1) * n].to_vec()).collect();
    Square::from_rows(&rows)
}

fn matrix() -> impl Strategy<Value = Square> {
    (1usize..12).prop_flat_map(|n| prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| square(n, &v)))
}

proptest! {
    #[test]
    fn recall_is_monotone_in_k(s in matrix()) {
        let r: Vec<f64> = (1..=s.n).map(|k| recall_at_k(&s, k).unwrap()).collect();
        prop_assert!(r.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*r.last().unwrap(), 100.0);
    }

    #[test]
    fn mean_rank_ignores_monotone_transforms(s in matrix(), a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let mut t = Square::zeros(s.n);
        for i in 0..s.n {
            for j in 0..s.n {
                t.set(i, j, (a * s.get(i, j) + b).exp());
            }
        }
        prop_assert_eq!(mean_rank(&s), mean_rank(&t));
        prop_assert_eq!(recall_at_k(&s, 1).unwrap(), recall_at_k(&t, 1).unwrap());
    }

    #[test]
    fn joint_permutation_leaves_metrics_unchanged(s in matrix(), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut perm: Vec<usize> = (0..s.n).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let mut p = Square::zeros(s.n);
        for i in 0..s.n {
            for j in 0..s.n {
                p.set(i, j, s.get(perm[i], perm[j]));
            }
        }
        let (x, y) = (report(&s, Direction::EegToTopo, "x").unwrap(), report(&p, Direction::EegToTopo, "x").unwrap());
        prop_assert_eq!((x.r1, x.r5, x.r10, x.mean_rank), (y.r1, y.r5, y.r10, y.mean_rank));
    }
}

#[test]
fn reports_clamp_k_to_pool() {
    let s = Square::from_rows(&[vec![0.1, 0.9], vec![0.5, 0.7]]);
    let r = report(&s, Direction::TopoToEeg, "tiny").unwrap();
    assert_eq!((r.r1, r.r5, r.r10, r.mean_rank), (50.0, 100.0, 100.0, 1.5));
    assert!(recall_at_k(&s, 3).is_err());
    assert!(recall_at_k(&s, 0).is_err());
}

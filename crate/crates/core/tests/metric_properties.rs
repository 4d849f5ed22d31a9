use ndarray::Array2;
use proptest::prelude::*;

use cogdiag::mcf::{MasteryMatrix, Normalization};
use cogdiag::metrics::{
    cluster_rows, concept_counts, krippendorff_alpha, reconstruction_metrics, Distance, Label,
};
use cogdiag::report::HeatmapGrid;

fn grid_matrix(m: usize, n: usize, vals: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((m, n), |(i, j)| vals[(i * n + j) % vals.len()])
}

proptest! {
    #[test]
    fn accuracy_and_error_rate_sum_to_one(
        (m, n) in (1usize..8, 1usize..8),
        labels in prop::collection::vec(0u8..=1, 64),
        scores in prop::collection::vec(0.0f64..=1.0, 64),
    ) {
        let x = grid_matrix(m, n, &labels.iter().map(|&l| l as f64).collect::<Vec<_>>());
        let x_hat = grid_matrix(m, n, &scores);
        let w = Array2::ones((m, n));
        let rep = reconstruction_metrics(x_hat.view(), x.view(), w.view(), 0.5).unwrap();
        let errors = x.iter().zip(x_hat.iter()).filter(|(a, b)| (**b >= 0.5) != (**a >= 0.5)).count();
        prop_assert!((rep.accuracy + errors as f64 / (m * n) as f64 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rmse_ignores_joint_permutations(
        (m, n) in (2usize..7, 2usize..7),
        xs in prop::collection::vec(0.0f64..=1.0, 49),
        hs in prop::collection::vec(0.0f64..=1.0, 49),
        rot in (0usize..7, 0usize..7),
    ) {
        let x = grid_matrix(m, n, &xs);
        let h = grid_matrix(m, n, &hs);
        let w = Array2::ones((m, n));
        let perm = |a: &Array2<f64>| Array2::from_shape_fn((m, n), |(i, j)| a[[(i + rot.0) % m, (n - 1 - j + rot.1) % n]]);
        let a = reconstruction_metrics(h.view(), x.view(), w.view(), 0.5).unwrap();
        let b = reconstruction_metrics(perm(&h).view(), perm(&x).view(), w.view(), 0.5).unwrap();
        prop_assert!((a.rmse - b.rmse).abs() <= 1e-12);
        prop_assert_eq!(a.accuracy, b.accuracy);
    }

    #[test]
    fn raising_the_threshold_never_raises_a_count(
        vals in prop::collection::vec(0.0f64..=1.0, 30),
        (lo, hi) in (0.0f64..=1.0, 0.0f64..=1.0),
    ) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let mm = MasteryMatrix::from_raw(grid_matrix(5, 6, &vals), Normalization::Clip);
        let count = |t: f64| {
            let r = concept_counts(&mm, t);
            let mut by_model: Vec<(String, usize)> = r.rows.into_iter().map(|r| (r.model_id, r.mastered_count)).collect();
            by_model.sort();
            by_model
        };
        for ((_, a), (_, b)) in count(lo).iter().zip(count(hi).iter()) {
            prop_assert!(b <= a);
        }
    }

    #[test]
    fn alpha_is_relabeling_invariant(
        codes in prop::collection::vec(prop::collection::vec(prop::option::weighted(0.85, 0u8..5), 3), 5..60),
        shift in 1u8..5,
    ) {
        let to_units = |f: &dyn Fn(u8) -> String| -> Vec<Vec<Option<Label>>> {
            codes.iter().map(|u| u.iter().map(|c| c.map(|c| Label::from([f(c)]))).collect()).collect()
        };
        let a = krippendorff_alpha(&to_units(&|c| format!("v{c}")), Distance::Nominal);
        let b = krippendorff_alpha(&to_units(&|c| format!("w{}", (c + shift) % 5)), Distance::Nominal);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.krippendorff_alpha, b.krippendorff_alpha),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "relabeling changed whether alpha is defined"),
        }
    }

    #[test]
    fn heatmap_color_is_pure_and_monotone(v in -0.5f64..=1.5, w in -0.5f64..=1.5) {
        let g1 = HeatmapGrid::new(vec!["a".into()], vec!["b".into()], Array2::from_elem((1, 1), 0.3), (0.0, 1.0)).unwrap();
        let g2 = HeatmapGrid::new(vec!["x".into(), "y".into()], vec!["z".into()], Array2::from_elem((2, 1), 0.9), (0.0, 1.0)).unwrap();
        prop_assert_eq!(g1.color(v), g2.color(v));
        let rgb = |c: String| (0..3).map(|i| u8::from_str_radix(&c[1 + 2 * i..3 + 2 * i], 16).unwrap()).collect::<Vec<_>>();
        let (lo, hi) = if v <= w { (v, w) } else { (w, v) };
        // both ends of the ramp darken in every channel
        for (a, b) in rgb(g1.color(lo)).into_iter().zip(rgb(g1.color(hi))) {
            prop_assert!(b <= a);
        }
    }
}

#[test]
fn clustering_separates_two_directions() {
    let rows = vec![vec![1.0, 0.1, 0.0], vec![2.0, 0.3, 0.0], vec![0.0, 0.2, 1.0], vec![0.1, 0.0, 3.0]];
    let ids: Vec<String> = (0..4).map(|i| format!("m{i}")).collect();
    let c = cluster_rows(&rows, &ids, 2).unwrap();
    assert_eq!(c.assignments[0], c.assignments[1]);
    assert_eq!(c.assignments[2], c.assignments[3]);
    assert_ne!(c.assignments[0], c.assignments[2]);
}

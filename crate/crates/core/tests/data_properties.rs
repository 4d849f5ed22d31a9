use std::collections::BTreeSet;

use ndarray::Array2;
use proptest::prelude::*;

use cogdiag::data::bank::{load_bank_csv, save_bank_csv, save_bank_json};
use cogdiag::data::responses::{parse_logs_jsonl, write_logs_jsonl};
use cogdiag::data::{aggregate, load_item_bank, BankFormat, Concept, ConceptCatalog, GradingRule, Item, ItemBank, ResponseLog, ResponseMatrix};

fn bank_from(tags: &[Vec<usize>], n_concepts: usize) -> ItemBank {
    let catalog = ConceptCatalog::new(
        (0..n_concepts)
            .map(|c| Concept {
                id: format!("k{c}"),
                label: format!("Concept, \"{c}\""),
            })
            .collect(),
    )
    .unwrap();
    let items = tags
        .iter()
        .enumerate()
        .map(|(i, t)| Item::new(format!("q{i}"), format!("Prompt {i}, with a comma\nand a newline"), ["A", "B", "C", "AC"][i % 4], t.iter().map(|c| format!("k{c}"))))
        .collect();
    ItemBank::new(catalog, items).unwrap()
}

fn tags_strategy() -> impl Strategy<Value = (Vec<Vec<usize>>, usize)> {
    (1usize..8).prop_flat_map(|k| (prop::collection::vec(prop::collection::btree_set(0..k, 1..=k), 1..12), Just(k)))
        .prop_map(|(sets, k)| (sets.into_iter().map(|s| s.into_iter().collect()).collect(), k))
}

proptest! {
    #[test]
    fn qmatrix_is_pure_and_matches_tags((tags, k) in tags_strategy()) {
        let bank = bank_from(&tags, k);
        let q1 = bank.qmatrix();
        let q2 = bank.qmatrix();
        prop_assert_eq!(&q1, &q2);
        for (i, t) in tags.iter().enumerate() {
            for c in 0..k {
                prop_assert_eq!(q1[[i, c]], t.contains(&c) as u8 as f64);
            }
        }
    }

    #[test]
    fn bank_round_trips((tags, k) in tags_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let bank = bank_from(&tags, k);
        let json = dir.path().join("bank.json");
        save_bank_json(&bank, &json).unwrap();
        prop_assert_eq!(&load_item_bank(&json, BankFormat::Json).unwrap(), &bank);
        let (items, concepts) = (dir.path().join("items.csv"), dir.path().join("concepts.csv"));
        save_bank_csv(&bank, &items, &concepts).unwrap();
        prop_assert_eq!(&load_bank_csv(&items, &concepts).unwrap(), &bank);
        prop_assert_eq!(&load_item_bank(&items, BankFormat::Csv).unwrap(), &bank);
    }

    #[test]
    fn response_matrix_round_trips(
        (m, n) in (1usize..6, 1usize..6),
        seed_vals in prop::collection::vec(0.0f64..=1.0, 36),
        seed_w in prop::collection::vec(prop::sample::select(vec![0.0, 0.1, 0.5, 1.0 / 3.0, 1.0]), 36),
    ) {
        let x = Array2::from_shape_fn((m, n), |(i, j)| seed_vals[i * 6 + j]);
        let w = Array2::from_shape_fn((m, n), |(i, j)| seed_w[i * 6 + j]);
        let rm = ResponseMatrix::new(x, w, (0..m).map(|i| format!("item {i}")).collect(), (0..n).map(|j| format!("model,{j}")).collect()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (xp, wp) = (dir.path().join("X.csv"), dir.path().join("W.csv"));
        rm.save_csv(&xp, &wp).unwrap();
        let back = ResponseMatrix::load_csv(&xp, Some(&wp)).unwrap();
        prop_assert_eq!(&back.item_ids, &rm.item_ids);
        prop_assert_eq!(&back.model_ids, &rm.model_ids);
        for (a, b) in back.x.iter().zip(rm.x.iter()).chain(back.w.iter().zip(rm.w.iter())) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn aggregate_ignores_log_and_attempt_order(
        outcomes in prop::collection::vec(prop::collection::vec(any::<bool>(), 4 * 5), 1..5),
        shuffle_seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let bank = bank_from(&[vec![0], vec![1], vec![0, 1], vec![1]], 2);
        let logs: Vec<ResponseLog> = outcomes
            .iter()
            .enumerate()
            .map(|(j, o)| {
                let mut log = ResponseLog::new(format!("m{j}"));
                for i in 0..4 {
                    let key = &bank.items()[i].answer_key;
                    for a in 0..5 {
                        let out = if o[i * 5 + a] { format!("Answer: {key}") } else { "Answer: D".to_string() };
                        log.push(format!("q{i}"), a, out);
                    }
                }
                log
            })
            .collect();
        let base = aggregate(&logs, &bank, GradingRule::ChoiceLetter.grader(), 5).unwrap().matrix;

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(shuffle_seed);
        let mut shuffled = logs.clone();
        shuffled.shuffle(&mut rng);
        for log in &mut shuffled {
            log.entries.shuffle(&mut rng);
        }
        let other = aggregate(&shuffled, &bank, GradingRule::ChoiceLetter.grader(), 5).unwrap().matrix;
        for (col, id) in other.model_ids.iter().enumerate() {
            let j = base.model_ids.iter().position(|b| b == id).unwrap();
            prop_assert_eq!(other.x.column(col), base.x.column(j));
            prop_assert_eq!(other.w.column(col), base.w.column(j));
        }
        // with all attempts present, scores sit on the 1/R grid and W is one
        for v in base.x.iter() {
            prop_assert!(((v * 5.0).round() - v * 5.0).abs() < 1e-12);
        }
        prop_assert!(base.w.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn logs_round_trip(outputs in prop::collection::vec("[ -~]{0,12}", 1..6)) {
        let mut log = ResponseLog::new("model \"x\"");
        for (a, o) in outputs.iter().enumerate() {
            log.push("q0", a, o.clone());
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("logs.jsonl");
        write_logs_jsonl(std::slice::from_ref(&log), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let back = parse_logs_jsonl(&text, "logs").unwrap();
        prop_assert_eq!(back.len(), 1);
        prop_assert_eq!(&back[0].model_id, &log.model_id);
        prop_assert_eq!(&back[0].entries, &log.entries);
    }
}

#[test]
fn partial_coverage_weights() {
    // 5 of 10 attempts present, all correct: X 1.0, W 0.5
    let bank = bank_from(&[vec![0]], 1);
    let mut log = ResponseLog::new("m");
    for a in 0..5 {
        log.push("q0", a, "A");
    }
    let agg = aggregate(&[log], &bank, GradingRule::ChoiceLetter.grader(), 10).unwrap();
    assert_eq!(agg.matrix.x[[0, 0]], 1.0);
    assert_eq!(agg.matrix.w[[0, 0]], 0.5);
}

#[test]
fn unknown_items_are_listed_together() {
    let bank = bank_from(&[vec![0]], 1);
    let mut log = ResponseLog::new("m");
    log.push("nope_b", 0, "A");
    log.push("nope_a", 0, "A");
    let err = aggregate(&[log], &bank, GradingRule::ChoiceLetter.grader(), 10).unwrap_err().to_string();
    assert!(err.contains("nope_a") && err.contains("nope_b"), "{err}");
}

#[test]
fn orphan_concepts_are_reported() {
    let bank = bank_from(&[vec![0], vec![2]], 3);
    assert_eq!(bank.orphan_concepts(), vec!["k1".to_string()]);
    let tags: BTreeSet<_> = bank.items()[1].concepts.iter().cloned().collect();
    assert_eq!(tags, BTreeSet::from(["k2".to_string()]));
}

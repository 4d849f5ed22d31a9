//! Grade raw model outputs against an item bank and aggregate them into the
//! score matrix X and the coverage weights W.
//!
//! ```bash
//! cargo run --example grade_logs
//! ```

use cogdiag::data::{aggregate, Concept, ConceptCatalog, GradingRule, Item, ItemBank, ResponseLog};

fn main() -> cogdiag::Result<()> {
    let catalog = ConceptCatalog::new(vec![
        Concept { id: "ratio".into(), label: "Financial ratios".into() },
        Concept { id: "tvm".into(), label: "Time value of money".into() },
    ])?;
    let bank = ItemBank::new(
        catalog,
        vec![
            Item::new("q1", "Current ratio of a firm with ...", "B", ["ratio"]),
            Item::new("q2", "Present value of an annuity ...", "C", ["tvm"]),
            Item::new("q3", "Which statements hold? (select all)", "AC", ["ratio", "tvm"]),
        ],
    )?;

    let repeats = 4;
    let mut strong = ResponseLog::new("strong");
    let mut sloppy = ResponseLog::new("sloppy");
    for a in 0..repeats {
        strong.push("q1", a, "The answer is B.");
        strong.push("q2", a, "Answer: C");
        strong.push("q3", a, "A, C");
        // misses one attempt per item and waffles on the multi-select
        if a < 3 {
            sloppy.push("q1", a, if a == 0 { "B" } else { "Probably D" });
            sloppy.push("q2", a, "（C）");
            sloppy.push("q3", a, "A");
        }
    }
    sloppy.push("q9", 0, "A");

    match aggregate(&[strong.clone(), sloppy.clone()], &bank, GradingRule::ChoiceLetter.grader(), repeats) {
        Err(e) => println!("rejected as expected: {e}"),
        Ok(_) => unreachable!("q9 is not in the bank"),
    }
    sloppy.entries.retain(|e| e.item_id != "q9");

    let agg = aggregate(&[strong, sloppy], &bank, GradingRule::ChoiceLetter.grader(), repeats)?;
    let m = &agg.matrix;
    println!("item  {}", m.model_ids.join("  "));
    for (i, id) in m.item_ids.iter().enumerate() {
        let cells: Vec<String> = (0..m.n_models()).map(|j| format!("{:.2}/{:.2}", m.x[[i, j]], m.w[[i, j]])).collect();
        println!("{id:<5} {}", cells.join("  "));
    }
    for w in &agg.warnings {
        println!("warning: {w}");
    }
    println!("Q =\n{}", bank.qmatrix());
    Ok(())
}

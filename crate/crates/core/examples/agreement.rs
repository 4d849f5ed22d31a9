//! Krippendorff's alpha for three annotators tagging items with concepts,
//! once with single labels and once with label sets.
//!
//! ```bash
//! cargo run --example agreement
//! ```

use std::collections::BTreeSet;

use cogdiag::metrics::agreement::nominal_units;
use cogdiag::metrics::{krippendorff_alpha, Distance, Label};

fn set(tags: &[&str]) -> Option<Label> {
    Some(tags.iter().map(|t| t.to_string()).collect::<BTreeSet<_>>())
}

fn main() -> cogdiag::Result<()> {
    let single = vec![
        vec![Some("bonds"), Some("bonds"), Some("bonds")],
        vec![Some("equity"), Some("equity"), None],
        vec![Some("tax"), Some("equity"), Some("tax")],
        vec![Some("bonds"), Some("bonds"), Some("equity")],
        vec![Some("tax"), Some("tax"), Some("tax")],
    ];
    let r = krippendorff_alpha(&nominal_units(&single), Distance::Nominal)?;
    println!("nominal alpha {:.4} over {} units", r.krippendorff_alpha, r.n_units);

    let sets = vec![
        vec![set(&["bonds", "rates"]), set(&["bonds"]), set(&["bonds", "rates"])],
        vec![set(&["equity"]), set(&["equity"]), set(&["equity", "tax"])],
        vec![set(&["tax"]), set(&["tax"]), None],
        vec![set(&["rates"]), set(&["bonds"]), set(&["rates"])],
    ];
    for d in [Distance::Nominal, Distance::Jaccard] {
        let r = krippendorff_alpha(&sets, d)?;
        println!("label-set alpha ({d}) {:.4}", r.krippendorff_alpha);
    }
    Ok(())
}

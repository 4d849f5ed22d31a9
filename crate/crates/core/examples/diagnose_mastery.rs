//! Turn a fitted mastery matrix into the per-model concept counts table,
//! a heatmap and a model clustering.
//!
//! ```bash
//! cargo run --release --example diagnose_mastery -- /tmp/heatmap.svg
//! ```

use cogdiag::mcf::{mastery, fit, McfConfig, Normalization, Observations};
use cogdiag::metrics::{cluster_models, concept_counts};
use cogdiag::report::HeatmapGrid;
use cogdiag::sim::{concept_ids, model_ids, simulate, SimConfig};

fn main() -> cogdiag::Result<()> {
    let data = simulate(&SimConfig { items: 90, models: 8, concepts: 12, ..SimConfig::default() })?;
    let w = ndarray::Array2::ones(data.x.dim());
    let obs = Observations::new(data.x.view(), w.view(), data.q.view())?;
    let result = fit(&obs, &McfConfig { latent_skills: 5, ..McfConfig::default() })?;
    let m = mastery(&result.factors, Normalization::MinmaxPerConcept).with_ids(model_ids(8), concept_ids(12))?;

    let counts = concept_counts(&m, 0.5).with_responses(&data.response_matrix());
    print!("{}", counts.render_table());

    let clusters = cluster_models(&m, 3)?;
    for (id, c) in clusters.model_ids.iter().zip(&clusters.assignments) {
        println!("{id} -> cluster {}", c.map_or("-".to_string(), |c| c.to_string()));
    }

    let svg = HeatmapGrid::from_mastery(&m)?.to_svg();
    match std::env::args().nth(1) {
        Some(path) => {
            std::fs::write(&path, &svg).expect("write svg");
            println!("heatmap written to {path}");
        }
        None => println!("heatmap SVG is {} bytes (pass a path to save it)", svg.len()),
    }
    Ok(())
}

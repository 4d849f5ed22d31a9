//! Draw a synthetic benchmark, fit the co-factorization and check how well
//! the fitted mastery matches the planted one.
//!
//! ```bash
//! cargo run --release --example simulate_and_fit
//! ```

use cogdiag::mcf::{mastery, multistart_fit, predict_scores, McfConfig, Normalization, Observations};
use cogdiag::metrics::reconstruction_metrics;
use cogdiag::sim::{recovery_score, simulate, SimConfig};

fn main() -> cogdiag::Result<()> {
    let data = simulate(&SimConfig::default())?;
    let w = ndarray::Array2::ones(data.x.dim());
    println!(
        "X is {}×{}, Q has {} concepts at density {:.3}",
        data.x.nrows(),
        data.x.ncols(),
        data.q.ncols(),
        data.q.mean().unwrap()
    );

    let obs = Observations::new(data.x.view(), w.view(), data.q.view())?;
    let cfg = McfConfig::default();
    let fit = multistart_fit(&obs, &cfg, 2)?;
    println!(
        "best seed {} reached objective {:.4} in {} iterations (converged: {})",
        fit.seed,
        fit.final_objective(),
        fit.iterations_run,
        fit.converged
    );

    let pred = predict_scores(&fit.factors);
    let rep = reconstruction_metrics(pred.scores.view(), data.x.view(), w.view(), 0.5)?;
    println!(
        "accuracy {:.4}  auc {:.4}  rmse {:.4}  ({} cells clipped)",
        rep.accuracy,
        rep.auc.unwrap_or(f64::NAN),
        rep.rmse,
        pred.clipped
    );

    let m = mastery(&fit.factors, Normalization::Clip);
    let rec = recovery_score(&m, &data.p_mastery)?;
    println!("mean per-model Spearman vs planted mastery: {:.3}", rec.overall.unwrap_or(f64::NAN));
    Ok(())
}

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mcf::config::McfConfig;
use crate::mcf::solver::{multistart_fit, predict_scores, Observations};
use crate::metrics::reconstruction_metrics;

/// Latent-skill counts tried when the caller gives none.
pub const DEFAULT_SKILL_GRID: [usize; 4] = [4, 8, 16, 32];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub latent_skills: usize,
    pub beta: f64,
    pub final_objective: f64,
    pub iterations_run: usize,
    pub converged: bool,
    pub accuracy: f64,
    pub auc: Option<f64>,
    pub rmse: f64,
}

/// Fits every (T, β) pair in grid order and reports training reconstruction.
pub fn sweep(
    obs: &Observations,
    base: &McfConfig,
    skills: &[usize],
    betas: &[f64],
    starts: usize,
    binarize_threshold: f64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(skills.len() * betas.len());
    for &t in skills {
        for &beta in betas {
            let cfg = McfConfig {
                latent_skills: t,
                beta,
                ..base.clone()
            };
            let fit = multistart_fit(obs, &cfg, starts)?;
            let pred = predict_scores(&fit.factors);
            let rep = reconstruction_metrics(pred.scores.view(), obs.x, obs.w, binarize_threshold)?;
            rows.push(SweepRow {
                latent_skills: t,
                beta,
                final_objective: fit.final_objective(),
                iterations_run: fit.iterations_run,
                converged: fit.converged,
                accuracy: rep.accuracy,
                auc: rep.auc,
                rmse: rep.rmse,
            });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("latent_skills,beta,final_objective,iterations_run,converged,accuracy,auc,rmse\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.latent_skills,
            r.beta,
            r.final_objective,
            r.iterations_run,
            r.converged,
            r.accuracy,
            r.auc.map(|a| a.to_string()).unwrap_or_default(),
            r.rmse
        ));
    }
    out
}

//! Recover slip and guess rates of a DINA model by EM on simulated binary
//! responses, then infer one model's mastery profile.
//!
//! ```bash
//! cargo run --release --example dina_oracle
//! ```

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cogdiag::dina::{em_fit, infer_profile, simulate_responses, DinaParams, EmConfig, MasteryProfile};

fn main() -> cogdiag::Result<()> {
    // 3 skills, every non-empty skill pattern used by several items
    let q = Array2::from_shape_fn((28, 3), |(i, k)| ((((i % 7) + 1) >> k) & 1) as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let truth = DinaParams::uniform(q.nrows(), 0.1, 0.2)?;
    let profiles: Vec<MasteryProfile> = (0..500).map(|_| MasteryProfile::from_index(rng.random_range(0..8), 3)).collect();
    let x = simulate_responses(q.view(), &profiles, &truth, &mut rng)?;

    let fit = em_fit(x.view(), q.view(), &EmConfig::default())?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!(
        "EM: {} iterations, converged {}, log-likelihood {:.2}",
        fit.iterations_run,
        fit.converged,
        fit.log_likelihood_trace.last().unwrap()
    );
    println!("mean slip {:.3} (true 0.1), mean guess {:.3} (true 0.2)", mean(&fit.params.slip), mean(&fit.params.guess));
    let hits = fit.profiles.iter().zip(&profiles).filter(|(p, t)| p.map == **t).count();
    println!("MAP profile matches the truth for {hits}/{} respondents", profiles.len());

    let answers: Vec<u8> = q.outer_iter().map(|row| (row[2] == 0.0) as u8).collect();
    let inf = infer_profile(&answers, q.view(), &fit.params)?;
    println!("answers every item without skill 2 -> profile {:?} (tie: {})", inf.map.alpha, inf.tie);
    Ok(())
}

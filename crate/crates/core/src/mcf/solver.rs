//! Weighted non-negative co-factorization `X ≈ EU`, `Q ≈ EV` fitted with
//! multiplicative updates.
//!
//! The objective is
//!
//! ```text
//! ‖W∘(X − EU)‖² + β‖Q − EV‖² + λ_E‖E‖² + λ_U‖U‖² + λ_V‖V‖²
//! ```
//!
//! Each update multiplies a factor by the ratio of the negative and positive
//! parts of its gradient, which keeps every entry non-negative and does not
//! increase the objective.

use ndarray::{Array2, ArrayView2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mcf::config::{InitMode, McfConfig};

/// Allowed objective increase between consecutive iterations before a
/// warning is logged.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Latent factors: `e` is items × skills, `u` is skills × models and `v` is
/// skills × concepts.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSet {
    pub e: Array2<f64>,
    pub u: Array2<f64>,
    pub v: Array2<f64>,
}

impl FactorSet {
    pub fn zeros(items: usize, models: usize, concepts: usize, skills: usize) -> Self {
        Self {
            e: Array2::zeros((items, skills)),
            u: Array2::zeros((skills, models)),
            v: Array2::zeros((skills, concepts)),
        }
    }

    pub fn skills(&self) -> usize {
        self.e.ncols()
    }

    pub fn is_nonnegative(&self) -> bool {
        [&self.e, &self.u, &self.v].iter().all(|m| m.iter().all(|&x| x >= 0.0))
    }

    pub fn is_finite(&self) -> bool {
        [&self.e, &self.u, &self.v].iter().all(|m| m.iter().all(|x| x.is_finite()))
    }

    fn check_shapes(&self) -> Result<()> {
        let t = self.e.ncols();
        if self.u.nrows() != t || self.v.nrows() != t {
            return Err(Error::Dimension(format!(
                "factor skill counts disagree: E {:?}, U {:?}, V {:?}",
                self.e.dim(),
                self.u.dim(),
                self.v.dim()
            )));
        }
        Ok(())
    }
}

/// Borrowed fitting inputs with agreeing shapes: X and W are items × models,
/// Q is items × concepts.
#[derive(Debug, Clone, Copy)]
pub struct Observations<'a> {
    pub x: ArrayView2<'a, f64>,
    pub w: ArrayView2<'a, f64>,
    pub q: ArrayView2<'a, f64>,
}

impl<'a> Observations<'a> {
    pub fn new(x: ArrayView2<'a, f64>, w: ArrayView2<'a, f64>, q: ArrayView2<'a, f64>) -> Result<Self> {
        if x.dim() != w.dim() || x.nrows() != q.nrows() {
            return Err(Error::Dimension(format!(
                "X is {:?}, W is {:?}, Q is {:?}; X and W must match and share the item count with Q",
                x.dim(),
                w.dim(),
                q.dim()
            )));
        }
        Ok(Self { x, w, q })
    }

    pub fn items(&self) -> usize {
        self.x.nrows()
    }

    pub fn models(&self) -> usize {
        self.x.ncols()
    }

    pub fn concepts(&self) -> usize {
        self.q.ncols()
    }

    fn check_factors(&self, f: &FactorSet) -> Result<()> {
        f.check_shapes()?;
        if f.e.nrows() != self.items() || f.u.ncols() != self.models() || f.v.ncols() != self.concepts() {
            return Err(Error::Dimension(format!(
                "factors E {:?}, U {:?}, V {:?} do not fit X {:?} and Q {:?}",
                f.e.dim(),
                f.u.dim(),
                f.v.dim(),
                self.x.dim(),
                self.q.dim()
            )));
        }
        Ok(())
    }

    fn check_fit_preconditions(&self) -> Result<()> {
        let in_unit = |m: &ArrayView2<f64>| m.iter().all(|v| (0.0..=1.0).contains(v));
        if !in_unit(&self.x) || !in_unit(&self.w) {
            return Err(Error::Validation("X and W entries must lie in [0, 1]".into()));
        }
        if !self.q.iter().all(|&v| v == 0.0 || v == 1.0) {
            return Err(Error::Validation("Q must be binary".into()));
        }
        if self.w.iter().all(|&v| v == 0.0) {
            return Err(Error::NothingObserved);
        }
        Ok(())
    }
}

fn sq_norm(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum()
}

/// Value of the joint objective at `factors`.
pub fn objective(factors: &FactorSet, obs: &Observations, config: &McfConfig) -> Result<f64> {
    obs.check_factors(factors)?;
    Ok(objective_parts(&factors.e, &factors.u, &factors.v, obs, config))
}

fn objective_parts(e: &Array2<f64>, u: &Array2<f64>, v: &Array2<f64>, obs: &Observations, cfg: &McfConfig) -> f64 {
    let eu = e.dot(u);
    let ev = e.dot(v);
    let mut fit_x = 0.0;
    Zip::from(&obs.x).and(&obs.w).and(&eu).for_each(|&x, &w, &p| {
        let r = w * (x - p);
        fit_x += r * r;
    });
    let mut fit_q = 0.0;
    Zip::from(&obs.q).and(&ev).for_each(|&q, &p| {
        let r = q - p;
        fit_q += r * r;
    });
    fit_x
        + cfg.beta * fit_q
        + cfg.lambda_e * sq_norm(e)
        + cfg.lambda_u * sq_norm(u)
        + cfg.lambda_v * sq_norm(v)
}

/// Analytic gradient of [`objective`] with respect to each factor.
pub fn gradient(factors: &FactorSet, obs: &Observations, config: &McfConfig) -> Result<FactorSet> {
    obs.check_factors(factors)?;
    let FactorSet { e, u, v } = factors;
    let w2 = &obs.w * &obs.w;
    // W∘W∘(X − EU)
    let rx = &w2 * &(&obs.x - &e.dot(u));
    let rq = &obs.q - &e.dot(v);
    let ge = -2.0 * rx.dot(&u.t()) - 2.0 * config.beta * rq.dot(&v.t()) + 2.0 * config.lambda_e * e;
    let gu = -2.0 * e.t().dot(&rx) + 2.0 * config.lambda_u * u;
    let gv = -2.0 * config.beta * e.t().dot(&rq) + 2.0 * config.lambda_v * v;
    Ok(FactorSet { e: ge, u: gu, v: gv })
}

/// Draws starting factors from the configured priors (or uniform on (0, 1]).
pub fn initialize(items: usize, models: usize, concepts: usize, config: &McfConfig) -> FactorSet {
    let t = config.latent_skills;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut draw = |rows: usize, cols: usize, prior: &crate::mcf::GammaPrior| -> Array2<f64> {
        match config.init {
            InitMode::GammaPrior => {
                let dist = prior.distribution();
                Array2::from_shape_simple_fn((rows, cols), || rng.sample(dist))
            }
            InitMode::Uniform => Array2::from_shape_simple_fn((rows, cols), || 1.0 - rng.random::<f64>()),
        }
    };
    let e = draw(items, t, &config.prior_e);
    let u = draw(t, models, &config.prior_u);
    let v = draw(t, concepts, &config.prior_v);
    FactorSet { e, u, v }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub factors: FactorSet,
    /// Objective at the initial point followed by one value per iteration.
    pub objective_trace: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    pub seed: u64,
}

impl FitResult {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the initial objective")
    }
}

/// `base ← base ∘ numer / (denom + ε)`
fn mu_step(base: &mut Array2<f64>, numer: &Array2<f64>, denom: &Array2<f64>, eps: f64) {
    Zip::from(base).and(numer).and(denom).for_each(|b, &n, &d| {
        *b *= n / (d + eps);
    });
}

fn ensure_finite(m: &Array2<f64>, factor: &'static str, iteration: usize) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { factor, iteration })
    }
}

/// Fits from the seeded initialization in `config`.
pub fn fit(obs: &Observations, config: &McfConfig) -> Result<FitResult> {
    config.validate()?;
    obs.check_fit_preconditions()?;
    let init = initialize(obs.items(), obs.models(), obs.concepts(), config);
    fit_from(obs, config, init)
}

/// Runs the multiplicative updates from caller-supplied starting factors.
pub fn fit_from(obs: &Observations, config: &McfConfig, init: FactorSet) -> Result<FitResult> {
    config.validate()?;
    obs.check_factors(&init)?;
    if !init.is_nonnegative() || !init.is_finite() {
        return Err(Error::Precondition("initial factors must be finite and non-negative".into()));
    }
    let FactorSet { mut e, mut u, mut v } = init;
    let beta = config.beta;
    let eps = config.epsilon;
    let w2 = &obs.w * &obs.w;
    let w2x = &w2 * &obs.x;
    let bq = beta * &obs.q;

    let mut trace = Vec::with_capacity(config.max_iters.min(10_000) + 1);
    let mut current = objective_parts(&e, &u, &v, obs, config);
    trace.push(current);
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=config.max_iters {
        // E
        let eu = e.dot(&u);
        let numer = w2x.dot(&u.t()) + bq.dot(&v.t());
        let denom = (&w2 * &eu).dot(&u.t()) + beta * e.dot(&v.dot(&v.t())) + config.lambda_e * &e;
        mu_step(&mut e, &numer, &denom, eps);
        ensure_finite(&e, "E", it)?;

        // U
        let eu = e.dot(&u);
        let numer = e.t().dot(&w2x);
        let denom = e.t().dot(&(&w2 * &eu)) + config.lambda_u * &u;
        mu_step(&mut u, &numer, &denom, eps);
        ensure_finite(&u, "U", it)?;

        // V
        let numer = e.t().dot(&bq);
        let denom = beta * e.t().dot(&e).dot(&v) + config.lambda_v * &v;
        mu_step(&mut v, &numer, &denom, eps);
        ensure_finite(&v, "V", it)?;

        let next = objective_parts(&e, &u, &v, obs, config);
        if !next.is_finite() {
            return Err(Error::NonFinite {
                factor: "objective",
                iteration: it,
            });
        }
        if next > current + MONOTONE_SLACK {
            log::warn!("objective rose from {current} to {next} at iteration {it}");
        }
        trace.push(next);
        iterations = it;
        let rel = if current > 0.0 { (current - next) / current } else { 0.0 };
        current = next;
        if rel < config.tol {
            converged = true;
            break;
        }
    }

    Ok(FitResult {
        factors: FactorSet { e, u, v },
        objective_trace: trace,
        iterations_run: iterations,
        converged,
        seed: config.seed,
    })
}

/// Fits `starts` times with seeds `seed, seed + 1, …` and keeps the run
/// with the lowest final objective (ties go to the smaller seed).
///
/// Starts run on the rayon pool; selection does not depend on scheduling.
pub fn multistart_fit(obs: &Observations, config: &McfConfig, starts: usize) -> Result<FitResult> {
    if starts == 0 {
        return Err(Error::Precondition("multistart needs at least one start".into()));
    }
    config.validate()?;
    obs.check_fit_preconditions()?;
    let results: Vec<Result<FitResult>> = (0..starts as u64)
        .into_par_iter()
        .map(|s| {
            let cfg = McfConfig {
                seed: config.seed.wrapping_add(s),
                ..config.clone()
            };
            fit(obs, &cfg)
        })
        .collect();

    let mut best: Option<FitResult> = None;
    let mut first_err = None;
    for r in results {
        match r {
            Ok(fr) => {
                let better = match &best {
                    None => true,
                    Some(b) => fr.final_objective().total_cmp(&b.final_objective()).is_lt(),
                };
                if better {
                    best = Some(fr);
                }
            }
            Err(e) => {
                log::warn!("multistart run failed: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one start ran"))
}

/// Clipped reconstruction `clip(EU, 0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub scores: Array2<f64>,
    /// Cells of `EU` that fell outside [0, 1].
    pub clipped: usize,
}

pub fn predict_scores(factors: &FactorSet) -> Prediction {
    let mut clipped = 0;
    let scores = factors.e.dot(&factors.u).mapv(|v| {
        if !(0.0..=1.0).contains(&v) {
            clipped += 1;
        }
        v.clamp(0.0, 1.0)
    });
    Prediction { scores, clipped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn obs<'a>(x: &'a Array2<f64>, w: &'a Array2<f64>, q: &'a Array2<f64>) -> Observations<'a> {
        Observations::new(x.view(), w.view(), q.view()).unwrap()
    }

    #[test]
    fn zero_factors() {
        let x = array![[0.5, 1.0], [0.0, 0.25]];
        let w = array![[1.0, 0.5], [1.0, 1.0]];
        let q = array![[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]];
        let cfg = McfConfig {
            beta: 1.0,
            lambda_e: 0.0,
            lambda_u: 0.0,
            lambda_v: 0.0,
            ..McfConfig::with_skills(2)
        };
        let f = FactorSet::zeros(2, 2, 3, 2);
        // ‖W∘X‖² = 0.25 + 0.25 + 0 + 0.0625; ‖Q‖² = 3
        assert_eq!(objective(&f, &obs(&x, &w, &q), &cfg).unwrap(), 0.5625 + 3.0);

        let z = Array2::zeros((2, 2));
        let zq = Array2::zeros((2, 3));
        assert_eq!(objective(&f, &obs(&z, &w, &zq), &cfg).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let x = Array2::zeros((3, 2));
        let w = Array2::ones((3, 2));
        let q = Array2::zeros((3, 4));
        let f = FactorSet::zeros(3, 2, 5, 2);
        assert!(matches!(
            objective(&f, &obs(&x, &w, &q), &McfConfig::with_skills(2)),
            Err(Error::Dimension(_))
        ));
        assert!(Observations::new(x.view(), Array2::ones((2, 2)).view(), q.view()).is_err());
    }

    #[test]
    fn max_iters_zero_returns_initial_factors() {
        let x = array![[0.2, 0.9], [0.4, 0.1]];
        let w = Array2::ones((2, 2));
        let q = array![[1.0], [0.0]];
        let cfg = McfConfig {
            max_iters: 0,
            seed: 3,
            ..McfConfig::with_skills(2)
        };
        let r = fit(&obs(&x, &w, &q), &cfg).unwrap();
        assert_eq!(r.objective_trace.len(), 1);
        assert!(!r.converged);
        assert_eq!(r.iterations_run, 0);
        assert_eq!(r.factors, initialize(2, 2, 1, &cfg));
    }

    #[test]
    fn all_zero_weights_rejected() {
        let x = Array2::zeros((2, 2));
        let w = Array2::zeros((2, 2));
        let q = array![[1.0], [1.0]];
        assert!(matches!(
            fit(&obs(&x, &w, &q), &McfConfig::with_skills(1)),
            Err(Error::NothingObserved)
        ));
    }

    #[test]
    fn rank_one_planted_instance_is_recovered() {
        let e = array![[0.2], [0.5], [0.9], [0.4], [0.7]];
        let u = array![[0.3, 1.0, 0.6, 0.8]];
        let x = e.dot(&u);
        let w = Array2::ones(x.dim());
        let q = Array2::zeros((5, 2));
        let cfg = McfConfig {
            beta: 0.0,
            lambda_e: 0.0,
            lambda_u: 0.0,
            lambda_v: 0.0,
            tol: 1e-14,
            max_iters: 20_000,
            ..McfConfig::with_skills(1)
        };
        let r = fit(&obs(&x, &w, &q), &cfg).unwrap();
        let resid = sq_norm(&(&x - &r.factors.e.dot(&r.factors.u)));
        assert!(resid <= 1e-6, "residual {resid}");
        let pred = predict_scores(&r.factors);
        for (a, b) in pred.scores.iter().zip(x.iter()) {
            assert!((a - b).abs() <= 1e-3);
        }
    }

    #[test]
    fn prediction_dot_product_and_clip() {
        let f = FactorSet {
            e: array![[1.0, 0.0], [2.0, 2.0]],
            u: array![[0.7], [0.3]],
            v: Array2::zeros((2, 1)),
        };
        let p = predict_scores(&f);
        assert!((p.scores[[0, 0]] - 0.7).abs() < 1e-15);
        assert_eq!(p.scores[[1, 0]], 1.0);
        assert_eq!(p.clipped, 1);
    }

    #[test]
    fn multistart_rejects_zero_starts_and_matches_fit_for_one() {
        let x = array![[0.2, 0.9, 0.5], [0.4, 0.1, 0.8], [1.0, 0.7, 0.3]];
        let w = Array2::ones((3, 3));
        let q = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let o = obs(&x, &w, &q);
        let cfg = McfConfig {
            seed: 42,
            max_iters: 200,
            ..McfConfig::with_skills(2)
        };
        assert!(matches!(multistart_fit(&o, &cfg, 0), Err(Error::Precondition(_))));
        let single = fit(&o, &cfg).unwrap();
        let multi = multistart_fit(&o, &cfg, 1).unwrap();
        assert_eq!(single, multi);
        assert_eq!(single.factors, multi.factors);
    }
}

//! DINA (deterministic inputs, noisy "and" gate) model: brute-force profile
//! inference over all `2^K` mastery profiles and EM estimation of per-item
//! slip and guess.
//!
//! A learner with profile `α` answers item `i` correctly with probability
//! `1 − sᵢ` when `α` covers every skill the item requires and `gᵢ` otherwise.
//! Profiles are indexed by bitmask: bit `k` of the index is `α_k`.

use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest skill count handled by exhaustive enumeration.
pub const MAX_SKILLS: usize = 16;
/// Bounds applied to estimated slip and guess.
pub const PARAM_FLOOR: f64 = 0.001;
pub const PARAM_CEIL: f64 = 0.999;
pub const DINA_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DinaParams {
    pub slip: Vec<f64>,
    pub guess: Vec<f64>,
}

impl DinaParams {
    pub fn uniform(items: usize, slip: f64, guess: f64) -> Result<Self> {
        let p = Self {
            slip: vec![slip; items],
            guess: vec![guess; items],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn items(&self) -> usize {
        self.slip.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.slip.len() != self.guess.len() {
            return Err(Error::Dimension(format!(
                "{} slip values but {} guess values",
                self.slip.len(),
                self.guess.len()
            )));
        }
        for (i, (&s, &g)) in self.slip.iter().zip(&self.guess).enumerate() {
            if !(0.0..1.0).contains(&s) || !(0.0..1.0).contains(&g) || s + g >= 1.0 {
                return Err(Error::InvalidConfig(format!(
                    "item {i}: slip {s} and guess {g} must lie in [0, 1) with slip + guess < 1"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MasteryProfile {
    pub alpha: Vec<u8>,
}

impl MasteryProfile {
    pub fn from_index(index: usize, skills: usize) -> Self {
        Self {
            alpha: (0..skills).map(|k| ((index >> k) & 1) as u8).collect(),
        }
    }

    pub fn index(&self) -> usize {
        self.alpha.iter().enumerate().map(|(k, &a)| (a as usize) << k).sum()
    }

    pub fn mastered(&self) -> usize {
        self.alpha.iter().filter(|&&a| a == 1).count()
    }
}

/// Whether `alpha` covers every skill required by `q_row`.
fn covers(alpha_bits: usize, required_bits: usize) -> bool {
    alpha_bits & required_bits == required_bits
}

fn row_bits(q_row: impl IntoIterator<Item = f64>) -> usize {
    q_row
        .into_iter()
        .enumerate()
        .filter(|(_, v)| *v > 0.0)
        .map(|(k, _)| 1usize << k)
        .sum()
}

/// Probability of a correct response.
pub fn dina_response_prob(alpha: &MasteryProfile, q_row: &[u8], slip: f64, guess: f64) -> f64 {
    let all = alpha.alpha.iter().zip(q_row).all(|(&a, &q)| q == 0 || a == 1);
    if all {
        1.0 - slip
    } else {
        guess
    }
}

fn check_q(q: &ArrayView2<f64>) -> Result<Vec<usize>> {
    let k = q.ncols();
    if k > MAX_SKILLS {
        return Err(Error::TooManySkills {
            skills: k,
            limit: MAX_SKILLS,
        });
    }
    if k == 0 {
        return Err(Error::Precondition("Q has no skill columns".into()));
    }
    let mut bits = Vec::with_capacity(q.nrows());
    for (i, row) in q.outer_iter().enumerate() {
        if row.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::Validation(format!("Q row {i} is not binary")));
        }
        let b = row_bits(row.iter().copied());
        if b == 0 {
            return Err(Error::Validation(format!("Q row {i} requires no skill")));
        }
        bits.push(b);
    }
    Ok(bits)
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn ln_or_neg_inf(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Log-likelihood of one response vector under every profile.
fn profile_log_likelihoods(responses: &[u8], q_bits: &[usize], params: &DinaParams, skills: usize) -> Vec<f64> {
    (0..1usize << skills)
        .map(|l| {
            let mut ll = 0.0;
            for (i, &x) in responses.iter().enumerate() {
                let p = if covers(l, q_bits[i]) { 1.0 - params.slip[i] } else { params.guess[i] };
                ll += if x == 1 { ln_or_neg_inf(p) } else { ln_or_neg_inf(1.0 - p) };
            }
            ll
        })
        .collect()
}

/// Picks the MAP profile: highest posterior, then fewest mastered skills,
/// then lexicographically smallest `α`. Returns the index and whether more
/// than one profile attains the maximum.
fn map_profile(log_post: &[f64], skills: usize) -> (usize, bool) {
    let best = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut winners: Vec<MasteryProfile> = log_post
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .map(|(l, _)| MasteryProfile::from_index(l, skills))
        .collect();
    let tie = winners.len() > 1;
    winners.sort_by(|a, b| a.mastered().cmp(&b.mastered()).then_with(|| a.alpha.cmp(&b.alpha)));
    (winners[0].index(), tie)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileInference {
    pub map: MasteryProfile,
    /// Posterior over all `2^K` profiles, indexed by bitmask.
    pub posterior: Vec<f64>,
    /// Several profiles share the maximal posterior.
    pub tie: bool,
}

fn posterior_from_loglik(ll: &[f64], skills: usize) -> Result<ProfileInference> {
    let z = log_sum_exp(ll);
    if z == f64::NEG_INFINITY {
        return Err(Error::Degenerate("no mastery profile is consistent with the responses".into()));
    }
    let posterior: Vec<f64> = ll.iter().map(|v| (v - z).exp()).collect();
    let (idx, tie) = map_profile(ll, skills);
    Ok(ProfileInference {
        map: MasteryProfile::from_index(idx, skills),
        posterior,
        tie,
    })
}

/// Exhaustive posterior over profiles for one learner's binary responses,
/// under a uniform prior.
pub fn infer_profile(responses: &[u8], q: ArrayView2<f64>, params: &DinaParams) -> Result<ProfileInference> {
    let q_bits = check_q(&q)?;
    params.validate()?;
    if responses.len() != q.nrows() || params.items() != q.nrows() {
        return Err(Error::Dimension(format!(
            "{} responses, {} Q rows, {} item parameters",
            responses.len(),
            q.nrows(),
            params.items()
        )));
    }
    if responses.iter().any(|&x| x > 1) {
        return Err(Error::Validation("responses must be binary".into()));
    }
    let ll = profile_log_likelihoods(responses, &q_bits, params, q.ncols());
    posterior_from_loglik(&ll, q.ncols())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DinaFit {
    pub params: DinaParams,
    /// Per model, in column order of the response matrix.
    pub profiles: Vec<ProfileInference>,
    /// Marginal log-likelihood at the start and after every EM step.
    pub log_likelihood_trace: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub max_iters: usize,
    /// Stop once the log-likelihood gain drops below `tol · max(1, |ℓ|)`.
    pub tol: f64,
    pub initial_slip: f64,
    pub initial_guess: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol: 1e-10,
            initial_slip: 0.2,
            initial_guess: 0.2,
        }
    }
}

/// Maximizes `a·ln(1−s) + b·ln(s) + c·ln(g) + d·ln(1−g)` over
/// `s, g ∈ [FLOOR, CEIL]` with `s + g ≤ CEIL`.
///
/// `a`: expected correct among masters, `b`: expected incorrect among masters,
/// `c`: expected correct among non-masters, `d`: expected incorrect among non-masters.
fn m_step_item(a: f64, b: f64, c: f64, d: f64, prev: (f64, f64)) -> (f64, f64, bool) {
    let n1 = a + b;
    let n0 = c + d;
    let raw_s = if n1 > 0.0 { b / n1 } else { prev.0 };
    let raw_g = if n0 > 0.0 { c / n0 } else { prev.1 };
    let s = raw_s.clamp(PARAM_FLOOR, PARAM_CEIL);
    let g = raw_g.clamp(PARAM_FLOOR, PARAM_CEIL);
    let mut clamped = s != raw_s || g != raw_g;
    if s + g <= PARAM_CEIL {
        return (s, g, clamped);
    }
    clamped = true;
    // optimum lies on the edge g = CEIL − s; the objective is concave along it
    let f = |s: f64| {
        let g = PARAM_CEIL - s;
        a * (1.0 - s).ln() + b * s.ln() + c * g.ln() + d * (1.0 - g).ln()
    };
    let (mut lo, mut hi) = (PARAM_FLOOR, PARAM_CEIL - PARAM_FLOOR);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let s = (lo + hi) / 2.0;
    (s, PARAM_CEIL - s, clamped)
}

/// EM for slip/guess with a uniform profile prior. `x` is items × models
/// and must be binary.
pub fn em_fit(x: ArrayView2<f64>, q: ArrayView2<f64>, config: &EmConfig) -> Result<DinaFit> {
    let q_bits = check_q(&q)?;
    let (m, n) = x.dim();
    if q.nrows() != m {
        return Err(Error::Dimension(format!("X has {m} items but Q has {} rows", q.nrows())));
    }
    if x.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::Validation("DINA needs binary responses; binarize X first".into()));
    }
    let skills = q.ncols();
    let n_profiles = 1usize << skills;
    let mut params = DinaParams::uniform(m, config.initial_slip, config.initial_guess)?;
    let columns: Vec<Vec<u8>> = (0..n).map(|j| x.column(j).iter().map(|&v| v as u8).collect()).collect();
    let log_prior = -(n_profiles as f64).ln();

    // returns (marginal log-likelihood, per-model log-likelihood rows)
    let e_step = |params: &DinaParams| -> (f64, Vec<Vec<f64>>) {
        let mut total = 0.0;
        let lls: Vec<Vec<f64>> = columns
            .iter()
            .map(|resp| {
                let ll = profile_log_likelihoods(resp, &q_bits, params, skills);
                total += log_prior + log_sum_exp(&ll);
                ll
            })
            .collect();
        (total, lls)
    };

    let (mut current, mut lls) = e_step(&params);
    let mut trace = vec![current];
    let mut warnings = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=config.max_iters {
        // expected counts per item
        let mut stats = vec![[0.0f64; 4]; m];
        for (resp, ll) in columns.iter().zip(&lls) {
            let z = log_sum_exp(ll);
            let post: Vec<f64> = ll.iter().map(|v| (v - z).exp()).collect();
            for i in 0..m {
                let master_mass: f64 = (0..n_profiles).filter(|&l| covers(l, q_bits[i])).map(|l| post[l]).sum();
                let other = 1.0 - master_mass;
                let s = &mut stats[i];
                if resp[i] == 1 {
                    s[0] += master_mass;
                    s[2] += other;
                } else {
                    s[1] += master_mass;
                    s[3] += other;
                }
            }
        }
        let mut next = params.clone();
        for (i, st) in stats.iter().enumerate() {
            let (s, g, clamped) = m_step_item(st[0], st[1], st[2], st[3], (params.slip[i], params.guess[i]));
            if clamped && !warnings.iter().any(|w: &String| w.starts_with(&format!("item {i}:"))) {
                let msg = format!("item {i}: slip/guess clamped to [{PARAM_FLOOR}, {PARAM_CEIL}] with slip + guess < 1");
                log::warn!("{msg}");
                warnings.push(msg);
            }
            next.slip[i] = s;
            next.guess[i] = g;
        }
        params = next;
        let (ll_total, new_lls) = e_step(&params);
        lls = new_lls;
        trace.push(ll_total);
        iterations = it;
        let gain = ll_total - current;
        current = ll_total;
        if gain.abs() < config.tol * current.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    let profiles = lls
        .iter()
        .map(|ll| posterior_from_loglik(ll, skills))
        .collect::<Result<Vec<_>>>()?;
    Ok(DinaFit {
        params,
        profiles,
        log_likelihood_trace: trace,
        iterations_run: iterations,
        converged,
        warnings,
    })
}

/// Draws binary responses (items × learners) for the given profiles.
pub fn simulate_responses<R: Rng>(
    q: ArrayView2<f64>,
    profiles: &[MasteryProfile],
    params: &DinaParams,
    rng: &mut R,
) -> Result<Array2<f64>> {
    let q_bits = check_q(&q)?;
    params.validate()?;
    let mut x = Array2::zeros((q.nrows(), profiles.len()));
    for (j, p) in profiles.iter().enumerate() {
        let bits = p.index();
        for i in 0..q.nrows() {
            let prob = if covers(bits, q_bits[i]) { 1.0 - params.slip[i] } else { params.guess[i] };
            x[[i, j]] = (rng.random::<f64>() < prob) as u8 as f64;
        }
    }
    Ok(x)
}

#[derive(Serialize)]
struct DinaFile<'a> {
    format_version: u64,
    model_ids: &'a [String],
    #[serde(flatten)]
    fit: &'a DinaFit,
}

pub fn save_fit_json(fit: &DinaFit, model_ids: &[String], path: &Path) -> Result<()> {
    crate::mcf::io::write_json(
        &DinaFile {
            format_version: DINA_FORMAT_VERSION,
            model_ids,
            fit,
        },
        path,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn profile(a: &[u8]) -> MasteryProfile {
        MasteryProfile { alpha: a.to_vec() }
    }

    #[test]
    fn response_probability_gate() {
        assert!((dina_response_prob(&profile(&[1, 1, 0]), &[1, 1, 0], 0.1, 0.2) - 0.9).abs() < 1e-15);
        assert_eq!(dina_response_prob(&profile(&[1, 0, 0]), &[1, 1, 0], 0.1, 0.2), 0.2);
        assert_eq!(dina_response_prob(&profile(&[1, 1]), &[1, 1], 0.0, 0.0), 1.0);
    }

    #[test]
    fn noiseless_map_is_the_planted_profile() {
        let q = array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0], [0.0, 1.0, 1.0]];
        let params = DinaParams::uniform(5, 0.0, 0.0).unwrap();
        for l in 0..8 {
            let planted = MasteryProfile::from_index(l, 3);
            let resp: Vec<u8> = q
                .outer_iter()
                .map(|r| {
                    let row: Vec<u8> = r.iter().map(|&v| v as u8).collect();
                    dina_response_prob(&planted, &row, 0.0, 0.0) as u8
                })
                .collect();
            let inf = infer_profile(&resp, q.view(), &params).unwrap();
            assert_eq!(inf.map, planted);
            assert!(!inf.tie);
            assert!((inf.posterior.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn ties_go_to_fewest_mastered_with_flag() {
        // two skills, items only require skill 0, all correct, noiseless:
        // L(1,0) = L(1,1) = 1, L(0,0) = L(0,1) = 0
        let q = array![[1.0, 0.0], [1.0, 0.0]];
        let params = DinaParams::uniform(2, 0.0, 0.0).unwrap();
        let inf = infer_profile(&[1, 1], q.view(), &params).unwrap();
        assert!(inf.tie);
        assert_eq!(inf.map, profile(&[1, 0]));
        assert_eq!(inf.posterior, vec![0.0, 0.5, 0.0, 0.5]);
    }

    #[test]
    fn too_many_skills() {
        let q = Array2::ones((2, 17));
        let params = DinaParams::uniform(2, 0.1, 0.1).unwrap();
        assert!(matches!(
            infer_profile(&[1, 0], q.view(), &params),
            Err(Error::TooManySkills { skills: 17, .. })
        ));
    }

    #[test]
    fn em_with_zero_iterations_keeps_initial_params() {
        let q = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let x = array![[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let cfg = EmConfig {
            max_iters: 0,
            ..EmConfig::default()
        };
        let fit = em_fit(x.view(), q.view(), &cfg).unwrap();
        assert_eq!(fit.params, DinaParams::uniform(3, 0.2, 0.2).unwrap());
        assert_eq!(fit.log_likelihood_trace.len(), 1);
    }

    #[test]
    fn constant_item_is_clamped_with_warning() {
        let q = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        // item 0 answered correctly by everyone
        let x = array![[1.0, 1.0, 1.0, 1.0], [1.0, 0.0, 1.0, 0.0], [0.0, 0.0, 1.0, 0.0]];
        let fit = em_fit(x.view(), q.view(), &EmConfig::default()).unwrap();
        assert!(fit.warnings.iter().any(|w| w.starts_with("item 0:")));
        fit.params.validate().unwrap();
        for (s, g) in fit.params.slip.iter().zip(&fit.params.guess) {
            assert!(s + g < 1.0);
        }
    }

    #[test]
    fn edge_m_step_is_feasible() {
        let (s, g, clamped) = m_step_item(10.0, 0.0, 10.0, 0.0, (0.2, 0.2));
        assert!(clamped);
        assert!(s >= PARAM_FLOOR && g >= PARAM_FLOOR && s + g <= PARAM_CEIL + 1e-15);
    }
}

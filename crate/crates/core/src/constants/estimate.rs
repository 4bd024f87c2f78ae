//! Multistart search for the infimum of `omega_ratio` over pinched forms.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::functional::{omega_ratio, psi, region_of, Mode, REGION_TOLERANCE};
use super::remark::remark_candidate;
use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::quadrature::{fiber_rule, SphereRule};
use crate::tensor::{sc, BilinearForm};

/// The best value found is an upper bound on the true infimum.
pub const ESTIMATE_LABEL: &str = "empirical upper estimate";

const NORM_RANGE: (f64, f64) = (1e-2, 1e2);

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateConfig {
    pub n: usize,
    pub p: usize,
    pub mode: Mode,
    pub delta: f64,
    /// Total objective evaluations, rejection draws included.
    pub budget: usize,
    pub seed: u64,
    /// Circle nodes for `p = 2`.
    pub fiber_nodes: usize,
    /// Tensor-rule level for `p > 2`.
    pub fiber_level: usize,
    /// Random starts in addition to the explicit candidate.
    pub starts: usize,
}

impl EstimateConfig {
    pub fn new(n: usize, p: usize, mode: Mode, delta: f64, budget: usize, seed: u64) -> Self {
        Self { n, p, mode, delta, budget, seed, fiber_nodes: 64, fiber_level: 2, starts: (budget / 2500).clamp(2, 16) }
    }
}

#[derive(Debug, Clone)]
pub struct ConstantEstimate {
    pub config: EstimateConfig,
    pub estimated_min: f64,
    /// Minimizer, rescaled to `psi = 1` in scale-invariant modes.
    pub argmin_form: BilinearForm,
    /// Rejection draws spent finding starts.
    pub sample_count: usize,
    pub admissible_samples: usize,
    /// Smallest ratio among admissible samples.
    pub min_sample_ratio: f64,
    pub evaluations: usize,
    pub winning_start: usize,
    /// Ratio at the explicit split-form candidate, when it is admissible.
    pub candidate_ratio: Option<f64>,
    pub wall_time: f64,
    pub label: &'static str,
}

/// `|sc(beta)| >= delta^2 |beta|^2`.
pub fn constraint_holds(beta: &BilinearForm, delta: f64) -> bool {
    sc(beta).abs() >= delta * delta * beta.norm_squared() * (1.0 - 1e-12)
}

struct Problem {
    n: usize,
    p: usize,
    mode: Mode,
    delta: f64,
    rule: SphereRule,
}

impl Problem {
    fn value(&self, beta: &BilinearForm) -> f64 {
        if !self.mode.is_scale_invariant() {
            let norm = beta.norm();
            if !(NORM_RANGE.0..=NORM_RANGE.1).contains(&norm) {
                return f64::INFINITY;
            }
        }
        omega_ratio(beta, self.mode, self.delta, &self.rule).unwrap_or(f64::INFINITY)
    }

    fn objective(&self, x: &[f64]) -> f64 {
        match BilinearForm::from_params(self.n, self.p, x) {
            Ok(beta) => self.value(&beta),
            Err(_) => f64::INFINITY,
        }
    }

    /// Rescales to `psi = 1` where the ratio does not depend on scale.
    fn normalize(&self, beta: BilinearForm) -> BilinearForm {
        if !self.mode.is_scale_invariant() {
            return beta;
        }
        let region = match region_of(&beta, self.mode, REGION_TOLERANCE) {
            Ok(r) => r,
            Err(_) => return beta,
        };
        match psi(&beta, &region, &self.rule) {
            Ok(v) if v > 0.0 => beta.scaled(v.powf(-1.0 / self.n as f64)),
            _ => beta,
        }
    }
}

/// Rejection-sampled Gaussian starts plus the admissible split form with
/// the smallest ratio, each refined by Nelder–Mead in parallel. The winner
/// is the smallest `(value, start index)`, so the result does not depend on
/// the number of worker threads.
pub fn estimate_constant(config: &EstimateConfig) -> Result<ConstantEstimate> {
    let clock = Instant::now();
    let (n, p, delta) = (config.n, config.p, config.delta);
    if p < 2 || 2 * p > n {
        return Err(Error::Codimension { n, p });
    }
    if !(delta > 0.0) {
        return Err(Error::Condition(format!("delta must be positive, got {delta}")));
    }
    if config.budget < 100 {
        return Err(Error::Condition(format!("budget must be at least 100, got {}", config.budget)));
    }
    // |sc| <= (n - 1) |beta|^2, with equality only on umbilic forms
    if delta * delta > (n as f64 - 1.0) {
        return Err(Error::EmptyDomain(format!("delta^2 = {} exceeds n - 1 = {}", delta * delta, n - 1)));
    }
    let problem = Problem { n, p, mode: config.mode, delta, rule: fiber_rule(p, config.fiber_nodes, config.fiber_level)? };
    let dim = BilinearForm::parameter_count(n, p);

    let mut evaluations = 0usize;
    let mut starts: Vec<Vec<f64>> = Vec::new();

    let mut candidate: Option<(f64, Vec<f64>)> = None;
    for l in 1..n {
        let beta = remark_candidate(n, p, l)?;
        evaluations += 1;
        let v = problem.value(&beta);
        if v.is_finite() && candidate.as_ref().is_none_or(|(best, _)| v < *best) {
            candidate = Some((v, beta.to_params()));
        }
    }
    if let Some((_, x)) = &candidate {
        starts.push(x.clone());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut sample_count = 0usize;
    let mut admissible_samples = 0usize;
    let mut min_sample_ratio = f64::INFINITY;
    let draw_cap = config.budget / 2;
    let mut random_starts = 0usize;
    while random_starts < config.starts && sample_count < draw_cap {
        let mut x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if !config.mode.is_scale_invariant() {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let target = 10f64.powf(rng.random_range(NORM_RANGE.0.log10()..NORM_RANGE.1.log10()));
            x.iter_mut().for_each(|v| *v *= target / norm);
        }
        sample_count += 1;
        evaluations += 1;
        let v = problem.objective(&x);
        if v.is_finite() {
            admissible_samples += 1;
            min_sample_ratio = min_sample_ratio.min(v);
            starts.push(x);
            random_starts += 1;
        }
    }
    if starts.is_empty() {
        return Err(Error::EmptyDomain(format!("no admissible form in {sample_count} draws")));
    }

    // reserve one rescoring evaluation per start plus the candidate
    let reserve = starts.len() + 1;
    let per_start = (config.budget.saturating_sub(evaluations + reserve) / starts.len()).max(dim + 2);
    let nm = NelderMead { max_evaluations: per_start, ..Default::default() };
    let results: Vec<_> = starts.par_iter().map(|x0| nm.minimize(|x| problem.objective(x), x0)).collect();
    evaluations += results.iter().map(|r| r.evaluations).sum::<usize>();

    // re-evaluate after normalization; the raw candidate competes as well
    let rescore = |x: &[f64], idx: usize| {
        let beta = problem.normalize(BilinearForm::from_params(n, p, x).expect("parameter count fixed"));
        let v = problem.value(&beta);
        v.is_finite().then_some((v, idx, beta))
    };
    let mut contenders: Vec<(f64, usize, BilinearForm)> =
        results.iter().enumerate().filter_map(|(i, r)| rescore(&r.x, i)).collect();
    evaluations += results.len();
    let mut candidate_ratio = None;
    if let Some((_, x)) = &candidate {
        evaluations += 1;
        if let Some(c) = rescore(x, 0) {
            candidate_ratio = Some(c.0);
            contenders.push(c);
        }
    }
    let (estimated_min, winning_start, argmin_form) = contenders
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .ok_or_else(|| Error::EmptyDomain("every refined start left the admissible set".into()))?;

    Ok(ConstantEstimate {
        config: config.clone(),
        estimated_min,
        argmin_form,
        sample_count,
        admissible_samples,
        min_sample_ratio,
        evaluations,
        winning_start,
        candidate_ratio,
        wall_time: clock.elapsed().as_secs_f64(),
        label: ESTIMATE_LABEL,
    })
}

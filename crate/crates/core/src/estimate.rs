//! Monte Carlo estimates on `Z_n^d`: percolation probability, critical
//! probability and critical length.
//!
//! Randomness: trial `t` of a run with seed `s` draws from ChaCha8 seeded
//! with `s` on stream `t`. Each site receives one uniform in index order and
//! belongs to the initial set at density `p` iff its uniform is below `p`, so
//! all densities share the same draws (monotone coupling). Trials run in
//! parallel and only their per-trial outcomes are aggregated, in trial order,
//! so results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::family::UpdateFamily;
use crate::simulate::{RuleSet, SimError, SiteSet, Torus, TorusDynamics};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959964;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("side length must be at least 1")]
    Length,
    #[error(transparent)]
    Sim(#[from] SimError),
}

type Result<T> = std::result::Result<T, EstimateError>;

#[derive(Clone, Debug)]
pub struct TrialPlan {
    pub family: UpdateFamily,
    pub n: usize,
    pub p: f64,
    pub trials: u64,
    pub seed: u64,
}

impl TrialPlan {
    pub fn new(family: UpdateFamily, n: usize, p: f64, trials: u64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(EstimateError::Probability(p));
        }
        if trials == 0 {
            return Err(EstimateError::NoTrials);
        }
        if n == 0 {
            return Err(EstimateError::Length);
        }
        Ok(TrialPlan { family, n, p, trials, seed })
    }
}

/// A point estimate with a 95% confidence interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// The RNG of trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One uniform in `[0, 1)` per site, in index order.
pub fn site_uniforms(seed: u64, trial: u64, sites: usize) -> Vec<f64> {
    let mut rng = trial_rng(seed, trial);
    (0..sites).map(|_| rng.gen::<f64>()).collect()
}

/// The `p`-random initial set of a trial.
pub fn random_set(seed: u64, trial: u64, sites: usize, p: f64) -> SiteSet {
    let u = site_uniforms(seed, trial, sites);
    SiteSet::from_indices(sites, (0..sites).filter(|&i| u[i] < p))
}

/// Seed for a derived sub-run (one value of `n`, say), by a SplitMix64 step
/// over the pair.
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    let mut z = seed ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Wilson score interval for `k` successes in `t` trials.
pub fn wilson(k: u64, t: u64) -> Estimate {
    let tf = t as f64;
    let phat = k as f64 / tf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / tf;
    let center = (phat + z2 / (2.0 * tf)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / tf + z2 / (4.0 * tf * tf)).sqrt() / denom;
    Estimate {
        estimate: phat,
        ci_lo: (center - half).max(0.0).min(phat),
        ci_hi: (center + half).min(1.0).max(phat),
        std_error: (phat * (1.0 - phat) / tf).sqrt(),
        trials: t,
    }
}

fn dynamics(family: &UpdateFamily, n: usize) -> Result<TorusDynamics> {
    let torus = Torus::new(family.dimension(), n)?;
    Ok(TorusDynamics::new(&RuleSet::from_family(family), torus)?)
}

pub fn percolation_probability(plan: &TrialPlan) -> Result<Estimate> {
    let dynm = dynamics(&plan.family, plan.n)?;
    let sites = dynm.torus().sites();
    let hits: u64 = (0..plan.trials)
        .into_par_iter()
        .map(|t| u64::from(dynm.percolates(&random_set(plan.seed, t, sites, plan.p))))
        .sum();
    Ok(wilson(hits, plan.trials))
}

/// The threshold of one trial: the least `theta` such that the set of
/// sites with uniform `<= theta` percolates. The trial percolates at
/// density `p` iff `p > theta`.
pub fn trial_threshold(dynm: &TorusDynamics, seed: u64, trial: u64) -> f64 {
    let sites = dynm.torus().sites();
    let u = site_uniforms(seed, trial, sites);
    let mut order: Vec<usize> = (0..sites).collect();
    order.sort_by(|&a, &b| u[a].total_cmp(&u[b]));
    match dynm.completion_step(&order) {
        Some(k) => u[order[k]],
        None => 1.0,
    }
}

/// Per-trial thresholds, in trial order.
pub fn trial_thresholds(family: &UpdateFamily, n: usize, trials: u64, seed: u64) -> Result<Vec<f64>> {
    let dynm = dynamics(family, n)?;
    Ok((0..trials).into_par_iter().map(|t| trial_threshold(&dynm, seed, t)).collect())
}

/// Bisection on `p` for empirical percolation probability 1/2.
///
/// Every trial's threshold is computed exactly once, which makes the
/// empirical probability at any `p` a count over shared draws; the bisection
/// then runs to `tolerance` without further sampling. The interval is the
/// order-statistic 95% interval of the median threshold, widened to include
/// the final bisection bracket.
pub fn critical_probability(
    family: &UpdateFamily,
    n: usize,
    trials: u64,
    tolerance: f64,
    seed: u64,
) -> Result<Estimate> {
    if !(tolerance > 0.0) {
        return Err(EstimateError::Tolerance(tolerance));
    }
    if trials == 0 {
        return Err(EstimateError::NoTrials);
    }
    if n == 0 {
        return Err(EstimateError::Length);
    }
    let thetas = trial_thresholds(family, n, trials, seed)?;
    Ok(pc_from_thresholds(&thetas, tolerance))
}

pub fn pc_from_thresholds(thetas: &[f64], tolerance: f64) -> Estimate {
    let t = thetas.len();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        let hits = thetas.iter().filter(|&&th| th < mid).count();
        if 2 * hits >= t {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let est = 0.5 * (lo + hi);
    let mut sorted = thetas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tf = t as f64;
    let spread = 0.5 * Z95 * tf.sqrt();
    let j = ((0.5 * tf - spread).floor().max(1.0) as usize).min(t) - 1;
    let k = ((0.5 * tf + spread).ceil().max(1.0) as usize).min(t) - 1;
    let (qlo, qhi) = (sorted[j], sorted[k]);
    let se_median = (qhi - qlo) / (2.0 * Z95);
    let se_bracket = 0.5 * (hi - lo);
    Estimate {
        estimate: est,
        ci_lo: qlo.min(lo),
        ci_hi: qhi.max(hi),
        std_error: (se_median * se_median + se_bracket * se_bracket).sqrt(),
        trials: t as u64,
    }
}

/// Result of the critical-length search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LengthEstimate {
    /// Largest side length found with percolation probability at most 1/2.
    pub length: usize,
    /// True if no crossing was found up to the search limit, in which case
    /// `length` is that limit and only a lower bound.
    pub at_least: bool,
    /// Probability estimate at `length` (absent when `length` is 0).
    pub probability: Option<Estimate>,
}

/// Doubling and then bisection over `n` for the largest side length at
/// which the percolation probability is at most 1/2. Each `n` uses its own
/// seed, derived from `seed` and `n`.
pub fn critical_length(
    family: &UpdateFamily,
    p: f64,
    n_max: usize,
    trials: u64,
    seed: u64,
) -> Result<LengthEstimate> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EstimateError::Probability(p));
    }
    if trials == 0 {
        return Err(EstimateError::NoTrials);
    }
    if p >= 1.0 {
        return Ok(LengthEstimate { length: 0, at_least: false, probability: None });
    }
    let prob = |n: usize| -> Result<Estimate> {
        percolation_probability(&TrialPlan::new(family.clone(), n, p, trials, derive_seed(seed, n as u64))?)
    };
    let mut below: Option<(usize, Estimate)> = None;
    let mut n = 1usize;
    let above = loop {
        let e = prob(n)?;
        if e.estimate > 0.5 {
            break Some(n);
        }
        if let Some((_, prev)) = &below {
            if e.estimate > prev.estimate + 0.25 || e.estimate + 0.25 < prev.estimate {
                log::warn!("percolation probability is far from monotone in n near n = {n}");
            }
        }
        below = Some((n, e));
        if n >= n_max {
            break None;
        }
        n = (n * 2).min(n_max);
    };
    let Some(mut hi) = above else {
        let (len, e) = below.expect("at least one size tested");
        return Ok(LengthEstimate { length: len, at_least: true, probability: Some(e) });
    };
    let Some((mut lo, mut lo_est)) = below else {
        return Ok(LengthEstimate { length: 0, at_least: false, probability: None });
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let e = prob(mid)?;
        if e.estimate > 0.5 {
            hi = mid;
        } else {
            lo = mid;
            lo_est = e;
        }
    }
    Ok(LengthEstimate { length: lo, at_least: false, probability: Some(lo_est) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepMode {
    /// Critical probability at each `n`.
    Pc { trials: u64, tolerance: f64 },
    /// Percolation probability at a fixed density.
    ProbAtP { p: f64, trials: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub family_id: String,
    pub n: usize,
    /// The density for probability rows, or the string `pc`.
    pub p_or_pc: String,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: u64,
    pub seed: u64,
}

/// One row per side length. Row `n` runs with `derive_seed(seed, n)`, which
/// is recorded in the row.
pub fn sweep(
    family: &UpdateFamily,
    family_id: &str,
    ns: &[usize],
    mode: SweepMode,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    ns.iter()
        .map(|&n| {
            let row_seed = derive_seed(seed, n as u64);
            let (label, e) = match mode {
                SweepMode::Pc { trials, tolerance } => {
                    ("pc".to_string(), critical_probability(family, n, trials, tolerance, row_seed)?)
                }
                SweepMode::ProbAtP { p, trials } => {
                    let plan = TrialPlan::new(family.clone(), n, p, trials, row_seed)?;
                    (p.to_string(), percolation_probability(&plan)?)
                }
            };
            Ok(SweepRow {
                family_id: family_id.to_string(),
                n,
                p_or_pc: label,
                estimate: e.estimate,
                ci_lo: e.ci_lo,
                ci_hi: e.ci_hi,
                trials: e.trials,
                seed: row_seed,
            })
        })
        .collect()
}

/// CSV with a header row, columns in [`SweepRow`] field order.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(["family_id", "n", "p_or_pc", "estimate", "ci_lo", "ci_hi", "trials", "seed"])
            .expect("in-memory write");
    }
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

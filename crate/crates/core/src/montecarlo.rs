//! Seeded, parallel Monte Carlo estimation on compiled gadgets.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::compiled::{FaultMap, Sampler};
use crate::error::{Error, Result};
use crate::exec::ExecOptions;
use crate::gadgets::{self, Gadget, Mode};
use crate::noise::NoiseModel;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`; independent of how trials are
/// split across workers.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k as f64 == n {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialPlan {
    pub gadget: Gadget,
    pub level: u32,
    pub mode: Mode,
    pub model: NoiseModel<f64>,
    pub trials: u64,
    pub seed: u64,
    pub opts: ExecOptions,
    pub jobs: usize,
}

impl TrialPlan {
    pub fn new(gadget: Gadget, level: u32, p_e: f64) -> Self {
        Self {
            gadget,
            level,
            mode: Mode::Faithful,
            model: NoiseModel::depolarizing(p_e),
            trials: 10_000,
            seed: 0,
            opts: ExecOptions::default(),
            jobs: 1,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs;
        self
    }

    pub fn with_options(mut self, opts: ExecOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn with_model(mut self, model: NoiseModel<f64>) -> Self {
        self.model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.gadget.validate(self.level, self.mode)?;
        if self.trials == 0 {
            return Err(Error::InvalidPlan("trials must be positive".into()));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidPlan("jobs must be positive".into()));
        }
        Ok(())
    }

    pub fn compile(&self) -> Result<FaultMap> {
        FaultMap::compile(&gadgets::build(self.gadget, self.level, self.mode)?)
    }
}

/// Raw counts of a batch of trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialCounts {
    pub trials: u64,
    pub accepts: u64,
    pub logical_errors: u64,
    pub frame_errors: u64,
    pub retries: u64,
}

impl TrialCounts {
    fn add(&mut self, o: &TrialCounts) {
        self.trials += o.trials;
        self.accepts += o.accepts;
        self.logical_errors += o.logical_errors;
        self.frame_errors += o.frame_errors;
        self.retries += o.retries;
    }
}

/// Runs `trials` seeded trials of a compiled circuit over `jobs` threads.
pub fn run_compiled(
    map: &FaultMap,
    model: &NoiseModel<f64>,
    opts: ExecOptions,
    trials: u64,
    seed: u64,
    jobs: usize,
) -> Result<TrialCounts> {
    // fail early on a bad model
    Sampler::new(map, model, opts)?;
    let jobs = jobs.clamp(1, trials.max(1) as usize);
    let chunk = trials.div_ceil(jobs as u64);
    let parts: Vec<TrialCounts> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs as u64)
            .map(|j| {
                let (start, end) = (j * chunk, ((j + 1) * chunk).min(trials));
                s.spawn(move || {
                    let mut sampler = Sampler::new(map, model, opts).expect("validated above");
                    let mut c = TrialCounts::default();
                    for i in start..end {
                        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i));
                        let t = sampler.sample(&mut rng);
                        c.trials += 1;
                        c.accepts += t.accepted as u64;
                        c.logical_errors += t.logical_error as u64;
                        c.frame_errors += t.frame_error as u64;
                        c.retries += t.retries;
                    }
                    c
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut total = TrialCounts::default();
    for p in &parts {
        total.add(p);
    }
    Ok(total)
}

/// One row of simulation output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub gadget: String,
    pub level: u32,
    pub p_e: f64,
    pub trials: u64,
    pub accepts: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub cond_err: f64,
    pub cond_err_lo: f64,
    pub cond_err_hi: f64,
    pub frame_rate: f64,
    pub seed: u64,
}

impl EstimateReport {
    pub fn from_counts(gadget: Gadget, level: u32, p_e: f64, seed: u64, c: &TrialCounts) -> Self {
        let (ci_low, ci_high) = wilson(c.accepts, c.trials, Z95);
        let (cond_err_lo, cond_err_hi) = wilson(c.logical_errors, c.accepts, Z95);
        let ratio = |k: u64, n: u64| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        Self {
            gadget: gadget.name().to_string(),
            level,
            p_e,
            trials: c.trials,
            accepts: c.accepts,
            p_hat: ratio(c.accepts, c.trials),
            ci_low,
            ci_high,
            cond_err: ratio(c.logical_errors, c.accepts),
            cond_err_lo,
            cond_err_hi,
            frame_rate: ratio(c.frame_errors, c.accepts),
            seed,
        }
    }
}

pub fn run_trials(plan: &TrialPlan) -> Result<EstimateReport> {
    plan.validate()?;
    let map = plan.compile()?;
    let c = run_compiled(&map, &plan.model, plan.opts, plan.trials, plan.seed, plan.jobs)?;
    Ok(EstimateReport::from_counts(
        plan.gadget,
        plan.level,
        plan.model.p_e,
        plan.seed,
        &c,
    ))
}

/// The plan's model rescaled to `p_e`, keeping the shape of the table and
/// the ratio `p_M / p_e`.
fn model_at(template: &NoiseModel<f64>, p_e: f64) -> NoiseModel<f64> {
    if template.p_e > 0.0 {
        template.scaled(p_e / template.p_e)
    } else {
        NoiseModel::depolarizing(p_e)
    }
}

/// Sweeps `p_grid`, compiling the gadget once. Every point uses the plan's
/// seed.
pub fn estimate_logical_error_curve(plan: &TrialPlan, p_grid: &[f64]) -> Result<Vec<EstimateReport>> {
    plan.validate()?;
    let map = plan.compile()?;
    p_grid
        .iter()
        .map(|&p| {
            let m = model_at(&plan.model, p);
            let c = run_compiled(&map, &m, plan.opts, plan.trials, plan.seed, plan.jobs)?;
            Ok(EstimateReport::from_counts(
                plan.gadget,
                plan.level,
                p,
                plan.seed,
                &c,
            ))
        })
        .collect()
}

/// A crossing of two logical-error curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub p_cross: f64,
    /// Final bracket.
    pub lo: f64,
    pub hi: f64,
    /// The sign of the difference was statistically clear at every
    /// bisection step.
    pub resolved: bool,
    /// Leading-order threshold of the same noise model, for reference.
    pub analytic: f64,
    /// `(p_e, lower-level report, higher-level report)` per evaluation.
    pub evaluations: Vec<(f64, EstimateReport, EstimateReport)>,
}

/// Bisects for the physical error rate where the conditional logical error
/// of `levels.1` overtakes that of `levels.0`. Brackets are geometric.
pub fn find_empirical_threshold(
    template: &TrialPlan,
    levels: (u32, u32),
    p_lo: f64,
    p_hi: f64,
    steps: u32,
) -> Result<ThresholdEstimate> {
    if !(p_lo > 0.0 && p_lo < p_hi && p_hi < 1.0) {
        return Err(Error::Domain(format!("bad bracket [{p_lo}, {p_hi}]")));
    }
    let low = TrialPlan {
        level: levels.0,
        ..template.clone()
    };
    let high = TrialPlan {
        level: levels.1,
        ..template.clone()
    };
    low.validate()?;
    high.validate()?;
    let (map_lo, map_hi) = (low.compile()?, high.compile()?);
    let mut evaluations = Vec::new();
    let mut resolved = true;
    let eval = |p: f64, evaluations: &mut Vec<_>| -> Result<(f64, bool)> {
        let m = model_at(&template.model, p);
        let a = run_compiled(
            &map_lo,
            &m,
            template.opts,
            template.trials,
            template.seed,
            template.jobs,
        )?;
        let b = run_compiled(
            &map_hi,
            &m,
            template.opts,
            template.trials,
            template.seed,
            template.jobs,
        )?;
        let ra = EstimateReport::from_counts(template.gadget, levels.0, p, template.seed, &a);
        let rb = EstimateReport::from_counts(template.gadget, levels.1, p, template.seed, &b);
        let diff = rb.cond_err - ra.cond_err;
        let clear = rb.cond_err_lo > ra.cond_err_hi || ra.cond_err_lo > rb.cond_err_hi;
        evaluations.push((p, ra, rb));
        Ok((diff, clear))
    };
    let (d_lo, c_lo) = eval(p_lo, &mut evaluations)?;
    let (d_hi, c_hi) = eval(p_hi, &mut evaluations)?;
    resolved &= c_lo && c_hi;
    if d_lo.signum() == d_hi.signum() || d_lo == 0.0 || d_hi == 0.0 {
        return Err(Error::NoCrossing { lo: p_lo, hi: p_hi });
    }
    let (mut lo, mut hi) = (p_lo, p_hi);
    for _ in 0..steps {
        let mid = (lo * hi).sqrt();
        let (d, clear) = eval(mid, &mut evaluations)?;
        resolved &= clear;
        if d.signum() == d_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let analytic = analytic::threshold(&template.model)
        .map(|t| t.p_th)
        .unwrap_or(f64::NAN);
    Ok(ThresholdEstimate {
        p_cross: (lo * hi).sqrt(),
        lo,
        hi,
        resolved,
        analytic,
        evaluations,
    })
}

/// Accepted runs grouped by their residual logical frame, reduced modulo
/// the ideal stabilizer group. The identity class is labelled by `I…I`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameCensus {
    pub trials: u64,
    pub accepts: u64,
    pub classes: BTreeMap<String, u64>,
}

impl FrameCensus {
    /// Fraction of accepted runs with a frame outside the stabilizer group.
    pub fn nontrivial_rate(&self) -> f64 {
        if self.accepts == 0 {
            return 0.0;
        }
        let trivial = self
            .classes
            .iter()
            .filter(|(k, _)| k.chars().all(|c| c == 'I'))
            .map(|(_, v)| *v)
            .sum::<u64>();
        (self.accepts - trivial) as f64 / self.accepts as f64
    }
}

/// Single-threaded census; each trial is seeded as in [`run_trials`].
pub fn frame_error_census(plan: &TrialPlan) -> Result<FrameCensus> {
    plan.validate()?;
    let map = plan.compile()?;
    let mut sampler = Sampler::new(&map, &plan.model, plan.opts)?;
    let mut census = FrameCensus::default();
    for i in 0..plan.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(plan.seed, i));
        census.trials += 1;
        if let Some(frame) = sampler.sample_frame(&mut rng) {
            census.accepts += 1;
            let label = map.circuit().reduce_frame(&frame).letters();
            *census.classes.entry(label).or_default() += 1;
        }
    }
    Ok(census)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        let (lo, hi) = wilson(0, 10, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.277_532).abs() < 1e-5);
        let (lo, hi) = wilson(50, 100, Z95);
        assert!((lo - 0.403_831).abs() < 1e-5 && (hi - 0.596_169).abs() < 1e-5);
        assert_eq!(wilson(0, 0, Z95), (0.0, 1.0));
    }

    #[test]
    fn results_do_not_depend_on_job_count() {
        let plan = TrialPlan::new(Gadget::CzSingle, 1, 3e-3)
            .with_trials(3000)
            .with_seed(9);
        let a = run_trials(&plan).unwrap();
        let b = run_trials(&plan.clone().with_jobs(4)).unwrap();
        assert_eq!(a, b);
        let c = run_trials(&plan.with_seed(10)).unwrap();
        assert_ne!(a.accepts, c.accepts);
    }

    #[test]
    fn noiseless_plan_accepts_everything() {
        let plan = TrialPlan::new(Gadget::Hexa, 2, 0.0)
            .with_mode(Mode::Fast)
            .with_trials(50);
        let r = run_trials(&plan).unwrap();
        assert_eq!((r.accepts, r.cond_err, r.frame_rate), (50, 0.0, 0.0));
        let census = frame_error_census(&plan).unwrap();
        assert_eq!(census.classes.get("IIIIII"), Some(&50));
        assert_eq!(census.nontrivial_rate(), 0.0);
    }

    #[test]
    fn acceptance_falls_with_noise() {
        let plan = TrialPlan::new(Gadget::CzSingle, 1, 1e-3).with_trials(4000);
        let r = estimate_logical_error_curve(&plan, &[1e-3, 1e-2]).unwrap();
        assert!(r[0].p_hat > r[1].p_hat);
        assert!(r[1].cond_err >= r[0].cond_err);
    }

    #[test]
    fn invalid_plans_are_rejected() {
        assert!(run_trials(&TrialPlan::new(Gadget::Hexa, 1, 1e-3)).is_err());
        assert!(run_trials(&TrialPlan::new(Gadget::CzSingle, 1, 1e-3).with_trials(0)).is_err());
        assert!(run_trials(&TrialPlan::new(Gadget::CzSingle, 1, 2.0)).is_err());
    }

    #[test]
    fn crossing_needs_a_sign_change() {
        let plan = TrialPlan::new(Gadget::Readout, 1, 1e-3)
            .with_mode(Mode::Fast)
            .with_trials(2000);
        let r = find_empirical_threshold(&plan, (1, 2), 1e-3, 2e-3, 2);
        assert!(matches!(r, Err(Error::NoCrossing { .. })));
    }
}

//! SNR sweeps with deterministic parallel trial execution.
//!
//! Every trial draws its bits, channel and noise from streams keyed by
//! `(master_seed, trial_index, purpose)`. Noise is drawn as a unit-variance
//! sequence and scaled by the SNR, so all SNR points of a sweep share the
//! same bits, channels and noise shapes. Trials run in fixed-size batches;
//! the stopping rule walks each batch in trial order, so results do not
//! depend on the worker count.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::channel::{noise_variance, sample_realization, ChannelConfig};
use crate::detectors::{detect, DetectorMode};
use crate::error::{Error, Result};
use crate::mapping::{map_bits, stack_choices, Constellation, FrameParams, Normalization};
use crate::metrics::MetricsRecord;
use crate::numerics::{cn_sample, Complex, Purpose, RngStream};
use crate::transform::TransformConvention;

/// Trials evaluated per parallel batch.
pub const BATCH_SIZE: u64 = 256;

/// Largest effective channel (entries) a sweep will allocate per trial.
pub const MAX_CHANNEL_ENTRIES: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub schemes: Vec<FrameParams>,
    pub channel: ChannelConfig,
    /// Ascending SNR points in dB.
    pub snr_db: Vec<f64>,
    pub max_trials: u64,
    /// Stop a point once this many bit errors are seen; 0 disables.
    pub min_bit_errors: u64,
    pub master_seed: u64,
    pub normalization: Normalization,
    pub detector: DetectorMode,
    pub convention: TransformConvention,
    /// When false the receiver sees `H_eff s*` exactly.
    pub noise: bool,
    /// `T_s` used for throughput.
    pub symbol_duration: f64,
}

impl SweepPlan {
    pub fn new(schemes: Vec<FrameParams>, snr_db: Vec<f64>) -> Self {
        SweepPlan {
            schemes,
            channel: ChannelConfig::default(),
            snr_db,
            max_trials: 100_000,
            min_bit_errors: 500,
            master_seed: 0,
            normalization: Normalization::UnitEnergy,
            detector: DetectorMode::PerGrid,
            convention: TransformConvention::Unitary,
            noise: true,
            symbol_duration: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::param("scheme", "at least one scheme is required"));
        }
        if self.snr_db.is_empty() {
            return Err(Error::param("snr_db", "at least one SNR point is required"));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::param("snr_db", "SNR points must be finite"));
        }
        if self.snr_db.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::param("snr_db", "SNR points must be sorted ascending"));
        }
        if self.max_trials == 0 {
            return Err(Error::param("max_trials", "must be at least 1"));
        }
        if !(self.symbol_duration > 0.0) {
            return Err(Error::param("symbol_duration", "must be positive"));
        }
        for p in &self.schemes {
            p.validate()?;
            self.channel.validate(p)?;
            let entries = p.n_r * p.branches() * p.grid_points() * p.grid_points();
            if entries > MAX_CHANNEL_ENTRIES {
                return Err(Error::param(
                    "scheme",
                    format!(
                        "{} needs a {}x{} effective channel, too large to simulate",
                        p.label(),
                        p.n_r * p.grid_points(),
                        p.branches() * p.grid_points()
                    ),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub sent_bits: u64,
    pub error_bits: u64,
}

/// One frame through bits -> mapping -> channel -> detection.
pub fn run_trial(plan: &SweepPlan, params: &FrameParams, snr_db: f64, trial_index: u64) -> Result<TrialOutcome> {
    if trial_index >= plan.max_trials {
        return Err(Error::param(
            "trial_index",
            format!("{trial_index} is not below max_trials = {}", plan.max_trials),
        ));
    }
    let constellation = Constellation::qam(params.mod_order, plan.normalization)?;
    let seed = plan.master_seed;

    let bits = RngStream::for_trial(seed, trial_index, Purpose::Bits).bits(params.bits_per_frame());
    let choices = map_bits(&bits, params, &constellation)?;
    let s_star = stack_choices(&choices, &constellation, params)?;

    let mut channel_rng = RngStream::for_trial(seed, trial_index, Purpose::Channel);
    let realization = sample_realization(&plan.channel, &mut channel_rng, params, plan.convention)?;
    let h = realization.h_eff();

    let mut y = vec![Complex::new(0.0, 0.0); h.rows()];
    for (i, c) in choices.iter().enumerate() {
        let col = i * params.branches() + c.branch;
        let x = s_star[col];
        for (r, v) in y.iter_mut().enumerate() {
            *v += h[(r, col)] * x;
        }
    }
    if plan.noise {
        let n0 = noise_variance(constellation.mean_energy(), snr_db);
        let mut noise_rng = RngStream::for_trial(seed, trial_index, Purpose::Noise);
        let sigma = n0.sqrt();
        for (v, w) in y.iter_mut().zip(cn_sample(&mut noise_rng, h.rows(), 1.0)?) {
            *v += w * sigma;
        }
    }

    let result = detect(plan.detector, &y, h, &constellation, params)?;
    let error_bits = bits.iter().zip(&result.bits).filter(|(a, b)| a != b).count() as u64;
    Ok(TrialOutcome {
        sent_bits: bits.len() as u64,
        error_bits,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Scheme-major: all SNR points of `schemes[0]`, then `schemes[1]`, ...
    pub records: Vec<MetricsRecord>,
    pub elapsed: Vec<Duration>,
    pub master_seed: u64,
}

fn run_point(plan: &SweepPlan, params: &FrameParams, snr_db: f64) -> Result<MetricsRecord> {
    let mut record = MetricsRecord::new(params, snr_db, plan.symbol_duration)?;
    let mut next = 0u64;
    while next < plan.max_trials {
        let end = (next + BATCH_SIZE).min(plan.max_trials);
        let outcomes: Vec<TrialOutcome> = (next..end)
            .into_par_iter()
            .map(|t| run_trial(plan, params, snr_db, t))
            .collect::<Result<_>>()?;
        for o in outcomes {
            record.accumulate(o.sent_bits, o.error_bits)?;
            if plan.min_bit_errors > 0 && record.bit_errors >= plan.min_bit_errors {
                return Ok(record);
            }
        }
        next = end;
    }
    Ok(record)
}

/// Runs every (scheme, SNR) point of `plan` on a pool of `workers` threads
/// (0 lets rayon choose).
pub fn run_sweep(plan: &SweepPlan, workers: usize) -> Result<SweepResult> {
    plan.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))?;
    pool.install(|| {
        let mut records = Vec::with_capacity(plan.schemes.len() * plan.snr_db.len());
        let mut elapsed = Vec::with_capacity(records.capacity());
        for params in &plan.schemes {
            for &snr in &plan.snr_db {
                let start = Instant::now();
                records.push(run_point(plan, params, snr)?);
                elapsed.push(start.elapsed());
            }
        }
        Ok(SweepResult {
            records,
            elapsed,
            master_seed: plan.master_seed,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_plan() -> SweepPlan {
        let mut plan = SweepPlan::new(vec![FrameParams::mbm(2, 2, 4, 2, 2).unwrap()], vec![10.0]);
        plan.channel = ChannelConfig { paths: 2, ..Default::default() };
        plan.max_trials = 50;
        plan.master_seed = 17;
        plan
    }

    #[test]
    fn noiseless_flat_trial_is_error_free() {
        let mut plan = small_plan();
        plan.channel = ChannelConfig::flat();
        plan.noise = false;
        for t in 0..50 {
            let o = run_trial(&plan, &plan.schemes[0], 0.0, t).unwrap();
            assert_eq!(o, TrialOutcome { sent_bits: 16, error_bits: 0 });
        }
    }

    #[test]
    fn trial_is_deterministic() {
        let plan = small_plan();
        let a = run_trial(&plan, &plan.schemes[0], 3.0, 7).unwrap();
        let b = run_trial(&plan, &plan.schemes[0], 3.0, 7).unwrap();
        assert_eq!(a, b);
        assert!(run_trial(&plan, &plan.schemes[0], 3.0, 50).is_err());
    }

    #[test]
    fn stopping_rules() {
        let mut plan = small_plan();
        plan.min_bit_errors = 0;
        let r = run_sweep(&plan, 2).unwrap();
        assert_eq!(r.records[0].trials, 50);
        assert_eq!(r.records[0].bits_sent, 50 * 16);

        plan.snr_db = vec![-10.0];
        plan.min_bit_errors = 20;
        let r = run_sweep(&plan, 2).unwrap();
        assert!(r.records[0].bit_errors >= 20);
        assert!(r.records[0].trials < 50);
    }

    #[test]
    fn worker_count_invariance() {
        let mut plan = small_plan();
        plan.snr_db = vec![0.0, 6.0];
        plan.max_trials = 600;
        plan.min_bit_errors = 100;
        let a = run_sweep(&plan, 1).unwrap();
        let b = run_sweep(&plan, 4).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn plan_validation() {
        let mut plan = small_plan();
        plan.snr_db = vec![5.0, 0.0];
        assert!(plan.validate().is_err());
        plan.snr_db = vec![];
        assert!(plan.validate().is_err());
        let mut plan = small_plan();
        plan.max_trials = 0;
        assert!(plan.validate().is_err());
        let mut plan = small_plan();
        plan.schemes = vec![FrameParams::mbm(4, 4, 4, 16, 1).unwrap()];
        plan.channel = ChannelConfig::flat();
        assert!(plan.validate().is_err());
    }
}

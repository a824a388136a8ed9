//! Fixtures shared by the criterion benches.

use otfs_mbm::channel::ChannelConfig;
use otfs_mbm::montecarlo::SweepPlan;
use otfs_mbm::FrameParams;

/// The three equal-rate (80 bits/frame) schemes on a 4x4 grid with `n_r`
/// receive antennas.
pub fn equal_rate_schemes(n_r: usize) -> Vec<FrameParams> {
    vec![
        FrameParams::mbm(4, 4, 4, 3, n_r).expect("valid"),
        FrameParams::sm(4, 4, 8, 4, n_r).expect("valid"),
        FrameParams::otfs(4, 4, 32, n_r).expect("valid"),
    ]
}

pub fn plan(schemes: Vec<FrameParams>, snr_db: f64, trials: u64) -> SweepPlan {
    let mut plan = SweepPlan::new(schemes, vec![snr_db]);
    plan.channel = ChannelConfig::default();
    plan.max_trials = trials;
    plan.min_bit_errors = 0;
    plan.master_seed = 1;
    plan
}

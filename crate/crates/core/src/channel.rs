//! Doubly-dispersive Rayleigh channels in the delay-Doppler domain.
//!
//! Each (receive antenna, branch) pair gets a time-domain `NM x NM` block
//! `G = Σ h_i Δ^{k_i} Π^{l_i}`, where `Π` is the cyclic one-sample delay and
//! `Δ = diag(exp(j2πn/NM))`. The effective DD channel of a block is
//! `(F_N ⊗ I_M) G (F_Nᴴ ⊗ I_M)`.
//!
//! Layout of the full effective channel `H_eff`: row `i * N_R + z` is grid
//! point `i` at receive antenna `z`, column `i * B + b` is grid point `i` on
//! branch `b`. Columns therefore line up with the stacked frame vector `s*`.

use std::f64::consts::PI;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::FrameParams;
use crate::numerics::{cn_sample, dft_matrix, kron, Complex, ComplexMatrix, RngStream, ZERO};
use crate::transform::{apply_kron_identity, deinterleave, interleave, TransformConvention};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TapPlacement {
    /// Path 0 at (0, 0); the other delays are drawn without replacement
    /// from `1..min(M, 2P)`, Dopplers uniformly from `-span..=span`.
    #[default]
    Random,
    /// Delays `0..P`, path 0 with zero Doppler, other Dopplers uniform.
    Fixed,
}

/// How channel realisations of different branches and antennas relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Correlation {
    /// One tap set per frame, independent gains per block.
    #[default]
    IndependentGainsSharedTaps,
    /// Taps and gains drawn independently per block.
    FullyIndependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub paths: usize,
    #[serde(default)]
    pub placement: TapPlacement,
    #[serde(default)]
    pub correlation: Correlation,
    /// Largest Doppler tap magnitude; `None` means `⌊N/2⌋`.
    #[serde(default)]
    pub doppler_span: Option<usize>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            paths: 4,
            placement: TapPlacement::Random,
            correlation: Correlation::IndependentGainsSharedTaps,
            doppler_span: None,
        }
    }
}

impl ChannelConfig {
    /// Single path at taps (0, 0): a flat Rayleigh gain per block.
    pub fn flat() -> Self {
        ChannelConfig {
            paths: 1,
            ..Default::default()
        }
    }

    pub fn validate(&self, params: &FrameParams) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::param("paths", "at least one propagation path is required"));
        }
        if self.paths > params.m {
            return Err(Error::param(
                "paths",
                format!(
                    "{} paths need distinct delay taps but the grid has only M = {} delay bins",
                    self.paths, params.m
                ),
            ));
        }
        if let Some(span) = self.doppler_span {
            if span > params.n / 2 {
                return Err(Error::param(
                    "doppler_span",
                    format!("Doppler span {span} exceeds ⌊N/2⌋ = {}", params.n / 2),
                ));
            }
        }
        Ok(())
    }

    fn span(&self, params: &FrameParams) -> i64 {
        self.doppler_span.unwrap_or(params.n / 2) as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    /// Delay tap `l_i` in `0..M`.
    pub delay: usize,
    /// Doppler tap `k_i` in `-⌊N/2⌋..=⌊N/2⌋`.
    pub doppler: i64,
    pub gain: Complex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathProfile {
    pub paths: Vec<Path>,
}

impl PathProfile {
    pub fn new(paths: Vec<Path>, params: &FrameParams) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::param("paths", "profile needs at least one path"));
        }
        let half = (params.n / 2) as i64;
        for (i, p) in paths.iter().enumerate() {
            if p.delay >= params.m || p.doppler.abs() > half {
                return Err(Error::param(
                    "paths",
                    format!("path {i} taps ({}, {}) are off the grid", p.delay, p.doppler),
                ));
            }
            if paths[..i].iter().any(|q| q.delay == p.delay) {
                return Err(Error::param("paths", format!("duplicate delay tap {}", p.delay)));
            }
        }
        Ok(PathProfile { paths })
    }

    /// Profile with the given taps and a fresh CN(0, 1/P) gain per path.
    fn with_gains(taps: &[(usize, i64)], stream: &mut RngStream) -> Self {
        let gains = cn_sample(stream, taps.len(), 1.0 / taps.len() as f64).expect("positive variance");
        PathProfile {
            paths: taps
                .iter()
                .zip(gains)
                .map(|(&(delay, doppler), gain)| Path { delay, doppler, gain })
                .collect(),
        }
    }
}

fn sample_taps(cfg: &ChannelConfig, stream: &mut RngStream, params: &FrameParams) -> Vec<(usize, i64)> {
    let p = cfg.paths;
    let span = cfg.span(params);
    let doppler = |stream: &mut RngStream| stream.random_range(-span..=span);
    let mut taps = vec![(0usize, 0i64)];
    match cfg.placement {
        TapPlacement::Random => {
            let pool = params.m.min(2 * p);
            for d in index::sample(stream, pool - 1, p - 1).into_iter() {
                taps.push((d + 1, 0));
            }
        }
        TapPlacement::Fixed => taps.extend((1..p).map(|d| (d, 0))),
    }
    for tap in taps.iter_mut().skip(1) {
        tap.1 = doppler(stream);
    }
    taps
}

/// Draws one path profile: taps per the placement rule, gains CN(0, 1/P).
pub fn sample_profile(cfg: &ChannelConfig, stream: &mut RngStream, params: &FrameParams) -> Result<PathProfile> {
    cfg.validate(params)?;
    let taps = sample_taps(cfg, stream, params);
    Ok(PathProfile::with_gains(&taps, stream))
}

/// Time-domain channel block `Σ h_i Δ^{k_i} Π^{l_i}`.
pub fn build_block(profile: &PathProfile, params: &FrameParams) -> Result<ComplexMatrix> {
    let nm = params.grid_points();
    let mut g = ComplexMatrix::zeros(nm, nm);
    for p in &profile.paths {
        if p.delay >= params.m {
            return Err(Error::param("paths", format!("delay tap {} is off the grid", p.delay)));
        }
        let k = p.doppler.rem_euclid(nm as i64) as usize;
        for n in 0..nm {
            let phase = 2.0 * PI * ((k * n) % nm) as f64 / nm as f64;
            g[(n, (n + nm - p.delay) % nm)] += p.gain * Complex::from_polar(1.0, phase);
        }
    }
    Ok(g)
}

/// DD-domain view of one block: `(F_N ⊗ I_M) G (F_Nᴴ ⊗ I_M)`, with the
/// transmit side following `convention`.
pub fn dd_block(g: &ComplexMatrix, params: &FrameParams, convention: TransformConvention) -> ComplexMatrix {
    let (n, m, nm) = (params.n, params.m, params.grid_points());
    let f = dft_matrix(n).expect("n >= 1");
    let tx = match convention {
        TransformConvention::Unitary => f.adjoint(),
        TransformConvention::Transpose => f.transpose(),
    };
    let mut out = ComplexMatrix::zeros(nm, nm);
    let mut unit = vec![ZERO; nm];
    for col in 0..nm {
        unit[col] = Complex::new(1.0, 0.0);
        let time = apply_kron_identity(&tx, &unit, m).expect("square operator");
        unit[col] = ZERO;
        let faded = g.mul_vec(&time).expect("block is NM x NM");
        let dd = apply_kron_identity(&f, &faded, m).expect("square operator");
        for (row, v) in dd.into_iter().enumerate() {
            out[(row, col)] = v;
        }
    }
    out
}

/// Channel blocks for every (receive antenna, branch) pair and the derived
/// effective DD channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    params: FrameParams,
    convention: TransformConvention,
    /// Time-domain blocks, `blocks[z * B + b]`.
    blocks: Vec<ComplexMatrix>,
    h_eff: ComplexMatrix,
}

impl ChannelRealization {
    pub fn params(&self) -> &FrameParams {
        &self.params
    }

    pub fn block(&self, rx: usize, branch: usize) -> &ComplexMatrix {
        &self.blocks[rx * self.params.branches() + branch]
    }

    pub fn h_eff(&self) -> &ComplexMatrix {
        &self.h_eff
    }

    /// Full time-domain channel: receive antenna `z` is block row `z`,
    /// branch `b` is block column `b`.
    pub fn h_m(&self) -> ComplexMatrix {
        let nm = self.params.grid_points();
        let b = self.params.branches();
        ComplexMatrix::from_fn(self.params.n_r * nm, b * nm, |r, c| {
            self.block(r / nm, c / nm)[(r % nm, c % nm)]
        })
    }

    /// Effective channel recomputed literally from dense Kronecker operators:
    /// `(F_N ⊗ I_{N_R M}) · H_M · (F_Nᴴ ⊗ I_{B M})`, with the
    /// antenna/branch interleaving made explicit. Reference route for tests.
    pub fn h_eff_dense(&self) -> ComplexMatrix {
        let p = &self.params;
        let (b, nr) = (p.branches(), p.n_r);
        let f = dft_matrix(p.n).expect("n >= 1");
        let tx = match self.convention {
            TransformConvention::Unitary => f.adjoint(),
            TransformConvention::Transpose => f.transpose(),
        };
        let rx_op = kron(&f, &ComplexMatrix::identity(nr * p.m)).expect("non-empty");
        let tx_op = kron(&tx, &ComplexMatrix::identity(b * p.m)).expect("non-empty");
        let h_m = self.h_m();
        let cols = b * p.grid_points();
        let mut out = ComplexMatrix::zeros(nr * p.grid_points(), cols);
        for c in 0..cols {
            let time = deinterleave(&tx_op.column(c), b);
            let rx = interleave(&h_m.mul_vec(&time).expect("dims"), nr);
            for (r, v) in rx_op.mul_vec(&rx).expect("dims").into_iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        out
    }
}

/// Assembles a realization from `N_R * B` time-domain blocks ordered
/// `blocks[z * B + b]`.
pub fn assemble_h(
    blocks: Vec<ComplexMatrix>,
    params: &FrameParams,
    convention: TransformConvention,
) -> Result<ChannelRealization> {
    let nm = params.grid_points();
    let (b, nr) = (params.branches(), params.n_r);
    if blocks.len() != nr * b {
        return Err(Error::dim(format!(
            "{} channel blocks supplied, expected N_R x B = {}",
            blocks.len(),
            nr * b
        )));
    }
    if let Some(bad) = blocks.iter().find(|g| g.rows() != nm || g.cols() != nm) {
        return Err(Error::dim(format!(
            "channel block is {}x{}, expected {nm}x{nm}",
            bad.rows(),
            bad.cols()
        )));
    }
    let mut h_eff = ComplexMatrix::zeros(nr * nm, b * nm);
    for z in 0..nr {
        for br in 0..b {
            let d = dd_block(&blocks[z * b + br], params, convention);
            for i_out in 0..nm {
                for i_in in 0..nm {
                    h_eff[(i_out * nr + z, i_in * b + br)] = d[(i_out, i_in)];
                }
            }
        }
    }
    Ok(ChannelRealization {
        params: *params,
        convention,
        blocks,
        h_eff,
    })
}

/// Draws a complete realization for one frame.
pub fn sample_realization(
    cfg: &ChannelConfig,
    stream: &mut RngStream,
    params: &FrameParams,
    convention: TransformConvention,
) -> Result<ChannelRealization> {
    cfg.validate(params)?;
    let count = params.n_r * params.branches();
    let blocks = match cfg.correlation {
        Correlation::IndependentGainsSharedTaps => {
            let taps = sample_taps(cfg, stream, params);
            (0..count)
                .map(|_| build_block(&PathProfile::with_gains(&taps, stream), params))
                .collect::<Result<Vec<_>>>()?
        }
        Correlation::FullyIndependent => (0..count)
            .map(|_| build_block(&sample_profile(cfg, stream, params)?, params))
            .collect::<Result<Vec<_>>>()?,
    };
    assemble_h(blocks, params, convention)
}

/// `N0 = Es / 10^(snr_db / 10)`. Infinite SNR gives zero noise.
pub fn noise_variance(symbol_energy: f64, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        symbol_energy / 10f64.powf(snr_db / 10.0)
    }
}

/// `ȳ = H_eff s* + w` with `w ~ CN(0, N0 I)`. An SNR of `+∞` disables the
/// noise and leaves `stream` untouched.
pub fn apply_channel(
    h_eff: &ComplexMatrix,
    s_star: &[Complex],
    snr_db: f64,
    symbol_energy: f64,
    stream: &mut RngStream,
) -> Result<Vec<Complex>> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::param("snr_db", format!("SNR must be finite or +inf, got {snr_db}")));
    }
    if s_star.len() != h_eff.cols() {
        return Err(Error::dim(format!(
            "stacked frame of length {} against a channel with {} columns",
            s_star.len(),
            h_eff.cols()
        )));
    }
    let mut y = vec![ZERO; h_eff.rows()];
    for (c, &x) in s_star.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        for (r, yr) in y.iter_mut().enumerate() {
            *yr += h_eff[(r, c)] * x;
        }
    }
    let n0 = noise_variance(symbol_energy, snr_db);
    if n0 > 0.0 {
        for (yr, w) in y.iter_mut().zip(cn_sample(stream, h_eff.rows(), n0)?) {
            *yr += w;
        }
    }
    Ok(y)
}

//! Simulation config files.
//!
//! Configs are TOML. Only `[system]` and at least one `[[scheme]]` are
//! required:
//!
//! ```toml
//! [system]
//! N = 4            # Doppler bins
//! M = 4            # delay bins
//! N_R = 3          # receive antennas
//!
//! [[scheme]]
//! kind = "otfs-mbm"  # otfs | otfs-sm | otfs-mbm
//! M_q = 4
//! n_RF = 3           # otfs-mbm only
//!
//! [[scheme]]
//! kind = "otfs-sm"
//! M_q = 8
//! N_T = 4            # otfs-sm only
//!
//! [channel]
//! paths = 4                                  # default min(4, M)
//! placement = "random"                       # random | fixed
//! correlation = "independent-gains-shared-taps"  # or fully-independent
//! doppler_span = 2                           # default ⌊N/2⌋
//!
//! [sweep]
//! snr_db = [0, 5, 10, 15, 20]   # or { start = 0, stop = 20, step = 5 }
//! max_trials = 100000
//! min_bit_errors = 500          # 0 disables early stopping
//! seed = 0
//! noise = true
//! symbol_duration = 1.0         # T_s for throughput
//!
//! [receiver]
//! detector = "per-grid"         # per-grid | residual-cancellation | joint-oracle
//! normalization = "unit-energy" # unit-energy | raw
//! transform = "unitary"         # unitary | transpose
//!
//! [analysis]
//! energy_per_bit = 1.0
//!
//! [output]
//! path = "results.csv"
//! ```
//!
//! Unknown keys, type mismatches and invalid values are reported with the
//! offending key and its line number.

use std::ops::Range;
use std::path::PathBuf;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use toml::Spanned;

use crate::channel::{ChannelConfig, Correlation, TapPlacement};
use crate::detectors::DetectorMode;
use crate::error::{Error, Result};
use crate::mapping::{FrameParams, Normalization, Scheme};
use crate::montecarlo::SweepPlan;
use crate::transform::TransformConvention;

pub const DEFAULT_SNR_DB: [f64; 5] = [0.0, 5.0, 10.0, 15.0, 20.0];
pub const DEFAULT_MAX_TRIALS: u64 = 100_000;
pub const DEFAULT_MIN_BIT_ERRORS: u64 = 500;
pub const DEFAULT_PATHS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub schemes: Vec<FrameParams>,
    pub channel: ChannelConfig,
    pub snr_db: Vec<f64>,
    pub max_trials: u64,
    pub min_bit_errors: u64,
    pub master_seed: u64,
    pub noise: bool,
    pub symbol_duration: f64,
    pub energy_per_bit: f64,
    pub normalization: Normalization,
    pub detector: DetectorMode,
    pub convention: TransformConvention,
    pub output: Option<PathBuf>,
    /// First 16 hex digits of the SHA-256 of the config text.
    pub hash: String,
}

impl SimConfig {
    pub fn sweep_plan(&self) -> SweepPlan {
        SweepPlan {
            schemes: self.schemes.clone(),
            channel: self.channel,
            snr_db: self.snr_db.clone(),
            max_trials: self.max_trials,
            min_bit_errors: self.min_bit_errors,
            master_seed: self.master_seed,
            normalization: self.normalization,
            detector: self.detector,
            convention: self.convention,
            noise: self.noise,
            symbol_duration: self.symbol_duration,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: Spanned<RawSystem>,
    #[serde(rename = "scheme")]
    schemes: Spanned<Vec<Spanned<RawScheme>>>,
    channel: Option<RawChannel>,
    sweep: Option<RawSweep>,
    receiver: Option<RawReceiver>,
    analysis: Option<RawAnalysis>,
    output: Option<RawOutput>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(rename = "N")]
    n: Spanned<usize>,
    #[serde(rename = "M")]
    m: Spanned<usize>,
    #[serde(rename = "N_R")]
    n_r: Spanned<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    kind: Spanned<Scheme>,
    #[serde(rename = "M_q")]
    mod_order: Spanned<usize>,
    #[serde(rename = "n_RF")]
    n_rf: Option<Spanned<u32>>,
    #[serde(rename = "N_T")]
    n_t: Option<Spanned<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    paths: Option<Spanned<usize>>,
    #[serde(default)]
    placement: TapPlacement,
    #[serde(default)]
    correlation: Correlation,
    doppler_span: Option<Spanned<usize>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SnrSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    snr_db: Option<Spanned<SnrSpec>>,
    max_trials: Option<Spanned<u64>>,
    min_bit_errors: Option<u64>,
    seed: Option<u64>,
    noise: Option<bool>,
    symbol_duration: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReceiver {
    #[serde(default)]
    detector: DetectorMode,
    #[serde(default)]
    normalization: Normalization,
    #[serde(default)]
    transform: TransformConvention,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    energy_per_bit: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
}

fn line_of(text: &str, span: Range<usize>) -> usize {
    text[..span.start.min(text.len())].matches('\n').count() + 1
}

struct Locator<'a> {
    text: &'a str,
}

impl Locator<'_> {
    fn err(&self, span: Range<usize>, message: impl Into<String>) -> Error {
        Error::Config {
            line: line_of(self.text, span),
            message: message.into(),
        }
    }
}

pub fn config_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(&digest[..8])
}

fn expand_snr(spec: &SnrSpec) -> std::result::Result<Vec<f64>, String> {
    let points = match spec {
        SnrSpec::List(v) => v.clone(),
        SnrSpec::Range { start, stop, step } => {
            if !(*step > 0.0) || stop < start {
                return Err("range needs step > 0 and stop >= start".into());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + i as f64 * step).collect()
        }
    };
    if points.is_empty() {
        return Err("at least one SNR point is required".into());
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err("SNR points must be finite".into());
    }
    if points.windows(2).any(|w| w[0] > w[1]) {
        return Err("SNR points must be sorted ascending".into());
    }
    Ok(points)
}

/// Parses and fully validates a config.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let loc = Locator { text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(1, |s| line_of(text, s));
        Error::Config {
            line,
            message: e.message().trim().to_string(),
        }
    })?;

    let system = raw.system.get_ref();
    let (n, m, n_r) = (*system.n.get_ref(), *system.m.get_ref(), *system.n_r.get_ref());

    if raw.schemes.get_ref().is_empty() {
        return Err(loc.err(raw.schemes.span(), "at least one [[scheme]] is required"));
    }
    let mut schemes = Vec::new();
    for entry in raw.schemes.get_ref() {
        let s = entry.get_ref();
        let kind = *s.kind.get_ref();
        let n_rf = match (kind, &s.n_rf) {
            (Scheme::OtfsMbm, Some(v)) => *v.get_ref(),
            (Scheme::OtfsMbm, None) => {
                return Err(loc.err(entry.span(), "key `n_RF` is required for otfs-mbm"));
            }
            (_, Some(v)) => return Err(loc.err(v.span(), format!("key `n_RF` is not valid for {kind}"))),
            (_, None) => 0,
        };
        let n_t = match (kind, &s.n_t) {
            (Scheme::OtfsSm, Some(v)) => *v.get_ref(),
            (Scheme::OtfsSm, None) => {
                return Err(loc.err(entry.span(), "key `N_T` is required for otfs-sm"));
            }
            (Scheme::OtfsMbm, Some(v)) if *v.get_ref() == 1 => 1,
            (Scheme::Otfs, Some(v)) if *v.get_ref() == 1 => 1,
            (_, Some(v)) => return Err(loc.err(v.span(), format!("key `N_T` must be 1 for {kind}"))),
            (_, None) => 1,
        };
        let params = FrameParams {
            n,
            m,
            mod_order: *s.mod_order.get_ref(),
            n_rf,
            n_t,
            n_r,
            scheme: kind,
        };
        if let Err(e) = params.validate() {
            let span = match &e {
                Error::Parameter { name: "N", .. } => system.n.span(),
                Error::Parameter { name: "M", .. } => system.m.span(),
                Error::Parameter { name: "N_R", .. } => system.n_r.span(),
                Error::Parameter { name: "M_q", .. } => s.mod_order.span(),
                Error::Parameter { name: "n_RF", .. } => s.n_rf.as_ref().map_or(entry.span(), Spanned::span),
                Error::Parameter { name: "N_T", .. } => s.n_t.as_ref().map_or(entry.span(), Spanned::span),
                _ => entry.span(),
            };
            return Err(loc.err(span, e.to_string()));
        }
        schemes.push(params);
    }

    let mut channel = ChannelConfig {
        paths: DEFAULT_PATHS.min(m),
        ..Default::default()
    };
    let mut paths_span = raw.system.span();
    let mut span_span = raw.system.span();
    if let Some(c) = &raw.channel {
        if let Some(p) = &c.paths {
            channel.paths = *p.get_ref();
            paths_span = p.span();
        }
        if let Some(d) = &c.doppler_span {
            channel.doppler_span = Some(*d.get_ref());
            span_span = d.span();
        }
        channel.placement = c.placement;
        channel.correlation = c.correlation;
    }
    for p in &schemes {
        if let Err(e) = channel.validate(p) {
            let span = match e {
                Error::Parameter { name: "doppler_span", .. } => span_span.clone(),
                _ => paths_span.clone(),
            };
            return Err(loc.err(span, e.to_string()));
        }
    }

    let mut snr_db = DEFAULT_SNR_DB.to_vec();
    let mut max_trials = DEFAULT_MAX_TRIALS;
    let mut min_bit_errors = DEFAULT_MIN_BIT_ERRORS;
    let mut master_seed = 0;
    let mut noise = true;
    let mut symbol_duration = 1.0;
    if let Some(sw) = &raw.sweep {
        if let Some(spec) = &sw.snr_db {
            snr_db = expand_snr(spec.get_ref())
                .map_err(|msg| loc.err(spec.span(), format!("invalid `snr_db`: {msg}")))?;
        }
        if let Some(t) = &sw.max_trials {
            if *t.get_ref() == 0 {
                return Err(loc.err(t.span(), "invalid `max_trials`: must be at least 1"));
            }
            max_trials = *t.get_ref();
        }
        if let Some(t) = &sw.symbol_duration {
            if !(*t.get_ref() > 0.0) {
                return Err(loc.err(t.span(), "invalid `symbol_duration`: must be positive"));
            }
            symbol_duration = *t.get_ref();
        }
        min_bit_errors = sw.min_bit_errors.unwrap_or(min_bit_errors);
        master_seed = sw.seed.unwrap_or(master_seed);
        noise = sw.noise.unwrap_or(noise);
    }

    let receiver = raw.receiver.unwrap_or(RawReceiver {
        detector: DetectorMode::default(),
        normalization: Normalization::default(),
        transform: TransformConvention::default(),
    });

    Ok(SimConfig {
        schemes,
        channel,
        snr_db,
        max_trials,
        min_bit_errors,
        master_seed,
        noise,
        symbol_duration,
        energy_per_bit: raw.analysis.and_then(|a| a.energy_per_bit).unwrap_or(1.0),
        normalization: receiver.normalization,
        detector: receiver.detector,
        convention: receiver.transform,
        output: raw.output.and_then(|o| o.path),
        hash: config_hash(text),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[system]
N = 2
M = 2
N_R = 2

[[scheme]]
kind = \"otfs-mbm\"
M_q = 4
n_RF = 2
";

    fn config_error(text: &str) -> (usize, String) {
        match parse_config(text).unwrap_err() {
            Error::Config { line, message } => (line, message),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.schemes, vec![FrameParams::mbm(2, 2, 4, 2, 2).unwrap()]);
        assert_eq!(c.channel.paths, 2);
        assert_eq!(c.snr_db, DEFAULT_SNR_DB.to_vec());
        assert_eq!(c.max_trials, DEFAULT_MAX_TRIALS);
        assert_eq!(c.min_bit_errors, DEFAULT_MIN_BIT_ERRORS);
        assert_eq!(c.detector, DetectorMode::PerGrid);
        assert_eq!(c.normalization, Normalization::UnitEnergy);
        assert!(c.noise);
        assert_eq!(c.hash.len(), 16);
    }

    #[test]
    fn bad_modulation_order_names_key_and_line() {
        let text = MINIMAL.replace("M_q = 4", "M_q = 3");
        let (line, msg) = config_error(&text);
        assert_eq!(line, 8);
        assert!(msg.contains("M_q") && msg.contains("power of two"), "{msg}");
    }

    #[test]
    fn unknown_key_rejected() {
        let text = MINIMAL.replace("N_R = 2", "N_R = 2\nfoo = 1");
        let (line, msg) = config_error(&text);
        assert_eq!(line, 5);
        assert!(msg.contains("foo"), "{msg}");
    }

    #[test]
    fn type_mismatch_rejected() {
        let text = MINIMAL.replace("M = 2", "M = \"two\"");
        let (line, _) = config_error(&text);
        assert_eq!(line, 3);
    }

    #[test]
    fn scheme_specific_keys() {
        let (line, msg) = config_error(&MINIMAL.replace("n_RF = 2", ""));
        assert!(msg.contains("n_RF"), "{msg}");
        assert_eq!(line, 6);
        let text = MINIMAL.replace("otfs-mbm", "otfs-sm");
        let (_, msg) = config_error(&text);
        assert!(msg.contains("n_RF") || msg.contains("N_T"), "{msg}");
        let text = MINIMAL.replace("otfs-mbm", "otfs-sm").replace("n_RF = 2", "N_T = 3");
        let (line, msg) = config_error(&text);
        assert!(msg.contains("N_T"), "{msg}");
        assert_eq!(line, 9);
    }

    #[test]
    fn full_config() {
        let text = "\
[system]
N = 4
M = 4
N_R = 3
[[scheme]]
kind = \"otfs-sm\"
M_q = 8
N_T = 4
[[scheme]]
kind = \"otfs\"
M_q = 32
[channel]
paths = 3
placement = \"fixed\"
correlation = \"fully-independent\"
doppler_span = 1
[sweep]
snr_db = { start = 0, stop = 10, step = 2.5 }
max_trials = 10
min_bit_errors = 0
seed = 99
noise = false
symbol_duration = 0.001
[receiver]
detector = \"residual-cancellation\"
normalization = \"raw\"
transform = \"transpose\"
[analysis]
energy_per_bit = 2.0
[output]
path = \"out.csv\"
";
        let c = parse_config(text).unwrap();
        assert_eq!(c.schemes[0], FrameParams::sm(4, 4, 8, 4, 3).unwrap());
        assert_eq!(c.schemes[1], FrameParams::otfs(4, 4, 32, 3).unwrap());
        assert_eq!(c.channel.paths, 3);
        assert_eq!(c.channel.placement, TapPlacement::Fixed);
        assert_eq!(c.channel.correlation, Correlation::FullyIndependent);
        assert_eq!(c.channel.doppler_span, Some(1));
        assert_eq!(c.snr_db, vec![0.0, 2.5, 5.0, 7.5, 10.0]);
        assert_eq!((c.max_trials, c.min_bit_errors, c.master_seed), (10, 0, 99));
        assert!(!c.noise);
        assert_eq!(c.symbol_duration, 0.001);
        assert_eq!(c.detector, DetectorMode::ResidualCancellation);
        assert_eq!(c.normalization, Normalization::Raw);
        assert_eq!(c.convention, TransformConvention::Transpose);
        assert_eq!(c.energy_per_bit, 2.0);
        assert_eq!(c.output, Some(PathBuf::from("out.csv")));
        let plan = c.sweep_plan();
        assert_eq!(plan.master_seed, 99);
        plan.validate().unwrap();
    }

    #[test]
    fn invalid_sweep_and_channel_values() {
        let text = format!("{MINIMAL}[sweep]\nsnr_db = [10, 0]\n");
        let (line, msg) = config_error(&text);
        assert_eq!(line, 11);
        assert!(msg.contains("snr_db"));

        let text = format!("{MINIMAL}[channel]\npaths = 3\n");
        let (line, msg) = config_error(&text);
        assert_eq!(line, 11);
        assert!(msg.contains("paths"));

        let text = format!("{MINIMAL}[sweep]\nmax_trials = 0\n");
        assert_eq!(config_error(&text).0, 11);

        let text = format!("{MINIMAL}[receiver]\ndetector = \"zf\"\n");
        assert_eq!(config_error(&text).0, 11);
    }

    #[test]
    fn detector_names() {
        for name in ["per-grid", "paper-literal"] {
            let c = parse_config(&format!("{MINIMAL}[receiver]\ndetector = \"{name}\"\n")).unwrap();
            assert_eq!(c.detector, DetectorMode::PerGrid);
        }
    }

    #[test]
    fn hash_tracks_text() {
        assert_eq!(config_hash("a"), config_hash("a"));
        assert_ne!(config_hash("a"), config_hash("b"));
    }
}

//! Closed-form efficiency figures and BER accumulation.

use crate::error::{Error, Result};
use crate::mapping::{FrameParams, Scheme};

/// Information bits per frame.
///
/// OTFS-MBM: `NM (log2 M_q + n_RF)`; OTFS-SM: `NM log2(M_q N_T)`;
/// OTFS: `NM log2 M_q`.
pub fn spectral_efficiency(params: &FrameParams) -> Result<u64> {
    params.validate()?;
    let nm = params.grid_points() as u64;
    let sym = params.mod_order.trailing_zeros() as u64;
    Ok(match params.scheme {
        Scheme::OtfsMbm => nm * (sym + params.n_rf as u64),
        Scheme::OtfsSm => nm * (params.mod_order * params.n_t).trailing_zeros() as u64,
        Scheme::Otfs => nm * sym,
    })
}

/// `(1 - ber) η / T_s` in bits per second.
pub fn throughput(ber: f64, eta: f64, symbol_duration: f64) -> Result<f64> {
    if !(symbol_duration > 0.0) {
        return Err(Error::param("T_s", format!("symbol duration must be positive, got {symbol_duration}")));
    }
    if !(0.0..=1.0).contains(&ber) {
        return Err(Error::param("ber", format!("must lie in [0, 1], got {ber}")));
    }
    Ok((1.0 - ber) * eta / symbol_duration)
}

/// Energy saving of OTFS-MBM over a scheme carrying `eta_d` bits, in percent:
/// `(1 - η_d / η_MBM) E_b · 100`.
pub fn energy_saving(eta_d: f64, eta_mbm: f64, energy_per_bit: f64) -> Result<f64> {
    if eta_mbm == 0.0 {
        return Err(Error::param("eta_mbm", "OTFS-MBM spectral efficiency must be non-zero"));
    }
    Ok((1.0 - eta_d / eta_mbm) * energy_per_bit * 100.0)
}

/// Counters for one (scheme, SNR) point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub label: String,
    pub scheme: Scheme,
    pub snr_db: f64,
    pub trials: u64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    /// Bits per frame.
    pub eta: u64,
    /// `T_s` in seconds.
    pub symbol_duration: f64,
    pub energy_per_bit: f64,
}

impl MetricsRecord {
    pub fn new(params: &FrameParams, snr_db: f64, symbol_duration: f64) -> Result<Self> {
        if !(symbol_duration > 0.0) {
            return Err(Error::param("T_s", "symbol duration must be positive"));
        }
        Ok(MetricsRecord {
            label: params.label(),
            scheme: params.scheme,
            snr_db,
            trials: 0,
            bits_sent: 0,
            bit_errors: 0,
            eta: spectral_efficiency(params)?,
            symbol_duration,
            energy_per_bit: 1.0,
        })
    }

    /// Adds one trial's counts.
    pub fn accumulate(&mut self, sent_bits: u64, error_bits: u64) -> Result<()> {
        if error_bits > sent_bits {
            return Err(Error::param(
                "error_bits",
                format!("{error_bits} bit errors exceed {sent_bits} bits sent"),
            ));
        }
        self.trials += 1;
        self.bits_sent += sent_bits;
        self.bit_errors += error_bits;
        Ok(())
    }

    /// Counter addition; order-independent.
    pub fn merge(&mut self, other: &MetricsRecord) {
        self.trials += other.trials;
        self.bits_sent += other.bits_sent;
        self.bit_errors += other.bit_errors;
    }

    pub fn ber(&self) -> f64 {
        if self.bits_sent == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits_sent as f64
        }
    }

    pub fn throughput(&self) -> f64 {
        (1.0 - self.ber()) * self.eta as f64 / self.symbol_duration
    }

    /// Wilson score interval for the BER at normal quantile `z`.
    pub fn ber_interval(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.bit_errors, self.bits_sent, z)
    }
}

pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

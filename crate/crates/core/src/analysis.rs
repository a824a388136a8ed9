//! Closed-form comparisons that need no simulation: bits per frame,
//! throughput as a function of BER, and energy saving of OTFS-MBM.

use std::fmt::Write;

use crate::config::SimConfig;
use crate::error::Result;
use crate::mapping::{FrameParams, Scheme};
use crate::metrics::{energy_saving, spectral_efficiency, throughput};

/// BER values at which the throughput table is evaluated.
pub const BER_GRID: [f64; 6] = [0.0, 1e-4, 1e-3, 1e-2, 1e-1, 0.5];

#[derive(Debug, Clone, PartialEq)]
pub struct EtaRow {
    pub label: String,
    pub bits_per_frame: u64,
    /// `throughput` at each entry of [`BER_GRID`].
    pub throughput: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SavingRow {
    pub mbm: String,
    pub reference: String,
    /// Percent.
    pub saving: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub eta: Vec<EtaRow>,
    pub savings: Vec<SavingRow>,
}

pub fn analyze(schemes: &[FrameParams], symbol_duration: f64, energy_per_bit: f64) -> Result<Analysis> {
    let mut eta = Vec::with_capacity(schemes.len());
    for p in schemes {
        p.validate()?;
        let bits = spectral_efficiency(p)?;
        let throughput = BER_GRID
            .iter()
            .map(|&ber| throughput(ber, bits as f64, symbol_duration))
            .collect::<Result<_>>()?;
        eta.push(EtaRow {
            label: p.label(),
            bits_per_frame: bits,
            throughput,
        });
    }

    let mut savings = Vec::new();
    for (mbm, m_row) in schemes.iter().zip(&eta) {
        if mbm.scheme != Scheme::OtfsMbm {
            continue;
        }
        for (other, o_row) in schemes.iter().zip(&eta) {
            if other.scheme == Scheme::OtfsMbm {
                continue;
            }
            savings.push(SavingRow {
                mbm: m_row.label.clone(),
                reference: o_row.label.clone(),
                saving: energy_saving(o_row.bits_per_frame as f64, m_row.bits_per_frame as f64, energy_per_bit)?,
            });
        }
    }
    Ok(Analysis { eta, savings })
}

pub fn analyze_config(cfg: &SimConfig) -> Result<Analysis> {
    analyze(&cfg.schemes, cfg.symbol_duration, cfg.energy_per_bit)
}

impl Analysis {
    /// Plain-text report; energy savings to one decimal place.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let width = self.eta.iter().map(|r| r.label.len()).max().unwrap_or(0).max(6);
        let _ = writeln!(out, "{:<width$}  bits/frame", "scheme");
        for r in &self.eta {
            let _ = writeln!(out, "{:<width$}  {}", r.label, r.bits_per_frame);
        }

        let _ = writeln!(out, "\nthroughput (bits/s) vs BER");
        let _ = write!(out, "{:<width$}", "scheme");
        for ber in BER_GRID {
            let _ = write!(out, "  {:>12}", format!("{ber:e}"));
        }
        out.push('\n');
        for r in &self.eta {
            let _ = write!(out, "{:<width$}", r.label);
            for t in &r.throughput {
                let _ = write!(out, "  {t:>12.4}");
            }
            out.push('\n');
        }

        if !self.savings.is_empty() {
            let _ = writeln!(out, "\nenergy saving of OTFS-MBM");
            for s in &self.savings {
                let _ = writeln!(out, "{} vs {}: {:.1}%", s.mbm, s.reference, s.saving);
            }
        }
        out
    }
}

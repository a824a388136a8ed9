//! CSV result files.
//!
//! One row per (scheme, SNR) point, in sweep order. Floats use the shortest
//! representation that parses back to the same value.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::SweepResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: String,
    pub snr_db: f64,
    pub trials: u64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub eta_bits_per_frame: u64,
    pub throughput: f64,
    pub seed: u64,
}

/// Written as a leading `#` comment line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub config_hash: String,
    pub master_seed: u64,
}

pub fn rows_from(result: &SweepResult) -> Vec<ResultRow> {
    result
        .records
        .iter()
        .map(|r| ResultRow {
            scheme: r.label.clone(),
            snr_db: r.snr_db,
            trials: r.trials,
            bits_sent: r.bits_sent,
            bit_errors: r.bit_errors,
            ber: r.ber(),
            eta_bits_per_frame: r.eta,
            throughput: r.throughput(),
            seed: result.master_seed,
        })
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        other => Error::Io(format!("{other:?}")),
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], provenance: Option<&Provenance>, mut out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::param("rows", "nothing to write"));
    }
    if let Some(p) = provenance {
        writeln!(
            out,
            "# otfs-mbm results; config-sha256={}; master-seed={}",
            p.config_hash, p.master_seed
        )?;
    }
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, rows: &[ResultRow], provenance: Option<&Provenance>) -> Result<()> {
    let file = File::create(path)?;
    write_csv(rows, provenance, BufWriter::new(file))
}

/// Parses a results file, skipping `#` comment lines.
pub fn read_csv(text: &str) -> Result<Vec<ResultRow>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(ber: f64) -> ResultRow {
        ResultRow {
            scheme: "otfs-mbm(M_q=4,n_RF=3)".into(),
            snr_db: 12.5,
            trials: 10,
            bits_sent: 800,
            bit_errors: 8,
            ber,
            eta_bits_per_frame: 80,
            throughput: 79.2,
            seed: 3,
        }
    }

    fn render(rows: &[ResultRow], prov: Option<&Provenance>) -> String {
        let mut buf = Vec::new();
        write_csv(rows, prov, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn single_row_file() {
        let text = render(&[row(0.01)], None);
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("scheme,snr_db,trials,bits_sent,bit_errors,ber,eta_bits_per_frame,throughput,seed\n"));
    }

    #[test]
    fn full_precision_round_trip() {
        let prov = Provenance {
            config_hash: "abc".into(),
            master_seed: 3,
        };
        let rows = vec![row(0.0123456789), row(1.0 / 3.0)];
        let text = render(&rows, Some(&prov));
        assert!(text.starts_with("# otfs-mbm results; config-sha256=abc; master-seed=3\n"));
        assert_eq!(read_csv(&text).unwrap(), rows);
        assert_eq!(render(&rows, Some(&prov)), text);
    }

    #[test]
    fn empty_rows_rejected() {
        assert!(write_csv(&[], None, Vec::new()).is_err());
    }

    #[test]
    fn io_failure_surfaces() {
        let err = write_csv_file(Path::new("/nonexistent-dir/x.csv"), &[row(0.0)], None).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}

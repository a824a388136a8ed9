//! Quick built-in sanity checks, runnable from the CLI without a test harness.

use crate::analysis::analyze;
use crate::channel::{apply_channel, sample_realization, ChannelConfig};
use crate::detectors::{detect_per_grid, joint_ml_oracle};
use crate::error::Result;
use crate::mapping::{map_bits, stack_choices, unmap_choices, Constellation, FrameParams, Normalization};
use crate::numerics::{dft_matrix, Complex, ComplexMatrix, RngStream};
use crate::transform::{isfft, sfft, DDGridSignal, TransformConvention};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn dft_unitarity() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for n in 1..=32 {
        let f = dft_matrix(n)?;
        let g = f.adjoint().matmul(&f)?;
        worst = worst.max(g.max_abs_diff(&ComplexMatrix::identity(n)));
    }
    Ok((worst < 1e-12, format!("max |FᴴF - I| = {worst:.2e} for n <= 32")))
}

fn transform_round_trip() -> Result<(bool, String)> {
    let mut rng = RngStream::new(0, 1);
    let mut worst = 0.0f64;
    for (n, m) in [(1, 1), (2, 2), (4, 8), (16, 16), (3, 5)] {
        let data = crate::numerics::cn_sample(&mut rng, n * m, 1.0)?;
        let x = DDGridSignal::new(n, m, data.clone())?;
        let back = sfft(&isfft(&x));
        let err = back.data.iter().zip(&data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst = worst.max(err);
    }
    Ok((worst < 1e-12, format!("max |SFFT(ISFFT(x)) - x| = {worst:.2e}")))
}

fn mapping_example() -> Result<(bool, String)> {
    let p = FrameParams::mbm(2, 2, 4, 2, 1)?;
    let raw = Constellation::qam(4, Normalization::Raw)?;
    let bits: Vec<u8> = "0111001100011101".bytes().map(|b| b - b'0').collect();
    let choices = map_bits(&bits, &p, &raw)?;
    let got: Vec<(usize, Complex)> = choices.iter().map(|c| (c.branch, raw.point(c.symbol))).collect();
    let want = vec![
        (1, Complex::new(1.0, -1.0)),
        (0, Complex::new(1.0, -1.0)),
        (0, Complex::new(-1.0, -1.0)),
        (3, Complex::new(-1.0, -1.0)),
    ];
    let round_trip = unmap_choices(&choices, &p, &raw)? == bits;
    let shown: Vec<String> = got.iter().map(|(b, x)| format!("{b}:{x}")).collect();
    Ok((got == want && round_trip, format!("branch:symbol {}", shown.join(" "))))
}

fn oracle_equivalence() -> Result<(bool, String)> {
    let c = Constellation::qam(4, Normalization::UnitEnergy)?;
    let cfg = ChannelConfig::flat();
    let mut agree = 0;
    let total = 40;
    for t in 0..total {
        let (n, m) = if t % 2 == 0 { (1, 2) } else { (2, 1) };
        let p = FrameParams::mbm(n, m, 4, 1 + (t % 2) as u32, 1 + (t % 3) as usize)?;
        let mut s = RngStream::new(11, t);
        let r = sample_realization(&cfg, &mut s, &p, TransformConvention::Unitary)?;
        let bits = s.bits(p.bits_per_frame());
        let tx = map_bits(&bits, &p, &c)?;
        let y = apply_channel(r.h_eff(), &stack_choices(&tx, &c, &p)?, 5.0, 1.0, &mut s)?;
        if detect_per_grid(&y, r.h_eff(), &c, &p)?.choices == joint_ml_oracle(&y, r.h_eff(), &c, &p)?.choices {
            agree += 1;
        }
    }
    Ok((agree == total, format!("{agree}/{total} flat-channel frames agree")))
}

fn noiseless_recovery() -> Result<(bool, String)> {
    let cfg = ChannelConfig::flat();
    let schemes = [
        FrameParams::mbm(4, 4, 4, 3, 2)?,
        FrameParams::sm(4, 4, 8, 4, 2)?,
        FrameParams::otfs(4, 4, 32, 2)?,
    ];
    let mut errors = 0usize;
    let mut sent = 0usize;
    for p in &schemes {
        let c = Constellation::qam(p.mod_order, Normalization::UnitEnergy)?;
        for t in 0..20 {
            let mut s = RngStream::new(12, t);
            let r = sample_realization(&cfg, &mut s, p, TransformConvention::Unitary)?;
            let bits = s.bits(p.bits_per_frame());
            let tx = map_bits(&bits, p, &c)?;
            let y = apply_channel(r.h_eff(), &stack_choices(&tx, &c, p)?, f64::INFINITY, 1.0, &mut s)?;
            let rx = detect_per_grid(&y, r.h_eff(), &c, p)?;
            errors += bits.iter().zip(&rx.bits).filter(|(a, b)| a != b).count();
            sent += bits.len();
        }
    }
    Ok((errors == 0, format!("{errors} bit errors in {sent} bits")))
}

fn energy_saving_values() -> Result<(bool, String)> {
    let a = analyze(
        &[
            FrameParams::mbm(4, 4, 8, 16, 1)?,
            FrameParams::sm(4, 4, 8, 16, 1)?,
            FrameParams::otfs(4, 4, 8, 1)?,
        ],
        1.0,
        1.0,
    )?;
    let got: Vec<String> = a.savings.iter().map(|s| format!("{:.1}", s.saving)).collect();
    Ok((got == ["63.2", "84.2"], format!("savings vs SM, OTFS: {}%", got.join("%, "))))
}

pub fn run_selftest() -> Vec<Check> {
    vec![
        check("dft-unitarity", dft_unitarity),
        check("transform-round-trip", transform_round_trip),
        check("mapping-example", mapping_example),
        check("oracle-equivalence", oracle_equivalence),
        check("noiseless-recovery", noiseless_recovery),
        check("energy-saving", energy_saving_values),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_selftest() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}

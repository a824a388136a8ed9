//! Bit-to-grid mapping for OTFS, OTFS-SM and OTFS-MBM frames.
//!
//! Every DD grid point carries `index_bits + log2(M_q)` bits. The leading
//! index bits pick the active branch (mirror activation pattern for MBM,
//! transmit antenna for SM, nothing for plain OTFS), most significant bit
//! first. The remaining bits pick a QAM point.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Complex, ComplexMatrix, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "otfs")]
    Otfs,
    #[serde(rename = "otfs-sm")]
    OtfsSm,
    #[serde(rename = "otfs-mbm")]
    OtfsMbm,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::OtfsMbm, Scheme::OtfsSm, Scheme::Otfs];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Otfs => "otfs",
            Scheme::OtfsSm => "otfs-sm",
            Scheme::OtfsMbm => "otfs-mbm",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "otfs" => Ok(Scheme::Otfs),
            "otfs-sm" => Ok(Scheme::OtfsSm),
            "otfs-mbm" => Ok(Scheme::OtfsMbm),
            other => Err(Error::param(
                "scheme",
                format!("unknown scheme `{other}` (expected otfs, otfs-sm or otfs-mbm)"),
            )),
        }
    }
}

/// Largest mirror count accepted. Frames with this many mirrors are only
/// usable for closed-form analysis; simulation needs a much smaller value.
pub const MAX_MIRRORS: u32 = 24;

/// Static configuration of one scheme on an `N x M` delay-Doppler grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameParams {
    /// Doppler bins.
    pub n: usize,
    /// Delay bins.
    pub m: usize,
    /// QAM order `M_q`.
    pub mod_order: usize,
    /// RF mirror count (OTFS-MBM only, 0 otherwise).
    pub n_rf: u32,
    /// Transmit antennas (OTFS-SM only, 1 otherwise).
    pub n_t: usize,
    /// Receive antennas.
    pub n_r: usize,
    pub scheme: Scheme,
}

impl FrameParams {
    pub fn otfs(n: usize, m: usize, mod_order: usize, n_r: usize) -> Result<Self> {
        FrameParams {
            n,
            m,
            mod_order,
            n_rf: 0,
            n_t: 1,
            n_r,
            scheme: Scheme::Otfs,
        }
        .validated()
    }

    pub fn sm(n: usize, m: usize, mod_order: usize, n_t: usize, n_r: usize) -> Result<Self> {
        FrameParams {
            n,
            m,
            mod_order,
            n_rf: 0,
            n_t,
            n_r,
            scheme: Scheme::OtfsSm,
        }
        .validated()
    }

    pub fn mbm(n: usize, m: usize, mod_order: usize, n_rf: u32, n_r: usize) -> Result<Self> {
        FrameParams {
            n,
            m,
            mod_order,
            n_rf,
            n_t: 1,
            n_r,
            scheme: Scheme::OtfsMbm,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("N", "Doppler bin count must be at least 1"));
        }
        if self.m == 0 {
            return Err(Error::param("M", "delay bin count must be at least 1"));
        }
        if self.n_r == 0 {
            return Err(Error::param("N_R", "receive antenna count must be at least 1"));
        }
        if self.mod_order < 4 || !self.mod_order.is_power_of_two() {
            return Err(Error::param(
                "M_q",
                format!(
                    "modulation order {} is not a power of two >= 4 \
                     (each QAM rail needs a power-of-two level count)",
                    self.mod_order
                ),
            ));
        }
        match self.scheme {
            Scheme::OtfsMbm => {
                if self.n_rf == 0 || self.n_rf > MAX_MIRRORS {
                    return Err(Error::param(
                        "n_RF",
                        format!("mirror count must be in 1..={MAX_MIRRORS}, got {}", self.n_rf),
                    ));
                }
                if self.n_t != 1 {
                    return Err(Error::param("N_T", "OTFS-MBM uses a single transmit antenna"));
                }
            }
            Scheme::OtfsSm => {
                if self.n_t == 0 || !self.n_t.is_power_of_two() {
                    return Err(Error::param(
                        "N_T",
                        format!("transmit antenna count must be a power of two, got {}", self.n_t),
                    ));
                }
                if self.n_rf != 0 {
                    return Err(Error::param("n_RF", "only OTFS-MBM uses RF mirrors"));
                }
            }
            Scheme::Otfs => {
                if self.n_t != 1 {
                    return Err(Error::param("N_T", "plain OTFS uses a single transmit antenna"));
                }
                if self.n_rf != 0 {
                    return Err(Error::param("n_RF", "only OTFS-MBM uses RF mirrors"));
                }
            }
        }
        Ok(())
    }

    /// Number of DD grid points `NM`.
    pub fn grid_points(&self) -> usize {
        self.n * self.m
    }

    /// Per-grid branch count `B`: `2^n_RF`, `N_T` or 1.
    pub fn branches(&self) -> usize {
        match self.scheme {
            Scheme::OtfsMbm => 1 << self.n_rf,
            Scheme::OtfsSm => self.n_t,
            Scheme::Otfs => 1,
        }
    }

    pub fn index_bits(&self) -> usize {
        match self.scheme {
            Scheme::OtfsMbm => self.n_rf as usize,
            Scheme::OtfsSm => self.n_t.trailing_zeros() as usize,
            Scheme::Otfs => 0,
        }
    }

    pub fn symbol_bits(&self) -> usize {
        self.mod_order.trailing_zeros() as usize
    }

    pub fn bits_per_grid(&self) -> usize {
        self.index_bits() + self.symbol_bits()
    }

    /// Bits carried by one frame (the spectral efficiency η).
    pub fn bits_per_frame(&self) -> usize {
        self.grid_points() * self.bits_per_grid()
    }

    /// Short human-readable label, e.g. `otfs-mbm(M_q=4,n_RF=3)`.
    pub fn label(&self) -> String {
        match self.scheme {
            Scheme::OtfsMbm => format!("otfs-mbm(M_q={},n_RF={})", self.mod_order, self.n_rf),
            Scheme::OtfsSm => format!("otfs-sm(M_q={},N_T={})", self.mod_order, self.n_t),
            Scheme::Otfs => format!("otfs(M_q={})", self.mod_order),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Mean symbol energy 1.
    #[default]
    UnitEnergy,
    /// Odd-integer lattice `{±1, ±3, ...} + j{±1, ±3, ...}`.
    Raw,
}

/// Gray-labelled square or rectangular QAM alphabet.
///
/// The point at index `v` carries the bit label `v` (MSB first). The high
/// `ceil(log2 M_q / 2)` label bits select the in-phase level and the low bits
/// the quadrature level, each Gray coded. In-phase levels ascend with the
/// decoded value and quadrature levels descend, so 4-QAM maps
/// `00 -> -1+j`, `01 -> -1-j`, `10 -> 1+j`, `11 -> 1-j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits: usize,
    points: Vec<Complex>,
    normalization: Normalization,
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

impl Constellation {
    pub fn qam(order: usize, normalization: Normalization) -> Result<Self> {
        if order < 4 || !order.is_power_of_two() {
            return Err(Error::param(
                "M_q",
                format!("modulation order {order} is not a power of two >= 4"),
            ));
        }
        let bits = order.trailing_zeros() as usize;
        let i_bits = bits.div_ceil(2);
        let q_bits = bits - i_bits;
        let (i_levels, q_levels) = (1usize << i_bits, 1usize << q_bits);
        let scale = match normalization {
            Normalization::Raw => 1.0,
            Normalization::UnitEnergy => {
                let energy = ((i_levels * i_levels - 1) + (q_levels * q_levels - 1)) as f64 / 3.0;
                1.0 / energy.sqrt()
            }
        };
        let points = (0..order)
            .map(|label| {
                let i_idx = gray_decode(label >> q_bits) as f64;
                let q_idx = gray_decode(label & (q_levels - 1)) as f64;
                let re = 2.0 * i_idx - (i_levels as f64 - 1.0);
                let im = -(2.0 * q_idx - (q_levels as f64 - 1.0));
                Complex::new(re * scale, im * scale)
            })
            .collect();
        Ok(Constellation {
            order,
            bits,
            points,
            normalization,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn points(&self) -> &[Complex] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex {
        self.points[index]
    }

    /// Mean symbol energy `Es`.
    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(Complex::norm_sqr).sum::<f64>() / self.order as f64
    }
}

/// Symbol and active-branch choice for one grid point. Both indices are
/// zero-based: `symbol` is `q - 1` and `branch` is `ϖ - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GridChoice {
    pub symbol: usize,
    pub branch: usize,
}

impl GridChoice {
    pub fn new(symbol: usize, branch: usize) -> Self {
        GridChoice { symbol, branch }
    }
}

/// Mapped frame: per-grid choices, the `B x NM` transmission matrix and its
/// column stack.
#[derive(Debug, Clone, PartialEq)]
pub struct DDFrame {
    pub choices: Vec<GridChoice>,
    pub s: ComplexMatrix,
    pub s_star: Vec<Complex>,
}

fn bits_to_value(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b & 1))
}

fn push_value_bits(out: &mut Vec<u8>, value: usize, width: usize) {
    out.extend((0..width).rev().map(|i| ((value >> i) & 1) as u8));
}

fn check_constellation(params: &FrameParams, constellation: &Constellation) -> Result<()> {
    if constellation.order() != params.mod_order {
        return Err(Error::param(
            "M_q",
            format!(
                "constellation order {} does not match frame order {}",
                constellation.order(),
                params.mod_order
            ),
        ));
    }
    Ok(())
}

/// Splits a frame's bits into `NM` per-grid chunks in grid order.
pub fn segment_bits<'a>(bits: &'a [u8], params: &FrameParams) -> Result<Vec<&'a [u8]>> {
    let expected = params.bits_per_frame();
    if bits.len() != expected {
        return Err(Error::BitCount {
            expected,
            actual: bits.len(),
        });
    }
    Ok(bits.chunks(params.bits_per_grid()).collect())
}

pub fn map_chunk(chunk: &[u8], params: &FrameParams, constellation: &Constellation) -> Result<GridChoice> {
    check_constellation(params, constellation)?;
    if chunk.len() != params.bits_per_grid() {
        return Err(Error::BitCount {
            expected: params.bits_per_grid(),
            actual: chunk.len(),
        });
    }
    let (index, symbol) = chunk.split_at(params.index_bits());
    Ok(GridChoice {
        branch: bits_to_value(index),
        symbol: bits_to_value(symbol),
    })
}

/// `segment_bits` followed by `map_chunk` on every chunk.
pub fn map_bits(bits: &[u8], params: &FrameParams, constellation: &Constellation) -> Result<Vec<GridChoice>> {
    segment_bits(bits, params)?
        .into_iter()
        .map(|chunk| map_chunk(chunk, params, constellation))
        .collect()
}

fn check_choices(choices: &[GridChoice], params: &FrameParams) -> Result<()> {
    if choices.len() != params.grid_points() {
        return Err(Error::dim(format!(
            "{} grid choices for {} grid points",
            choices.len(),
            params.grid_points()
        )));
    }
    let b = params.branches();
    if let Some(bad) = choices.iter().find(|c| c.branch >= b || c.symbol >= params.mod_order) {
        return Err(Error::dim(format!("grid choice {bad:?} out of range")));
    }
    Ok(())
}

/// Stacked vector `S*` only, without materialising `S`.
pub fn stack_choices(
    choices: &[GridChoice],
    constellation: &Constellation,
    params: &FrameParams,
) -> Result<Vec<Complex>> {
    check_constellation(params, constellation)?;
    check_choices(choices, params)?;
    let b = params.branches();
    let mut s_star = vec![ZERO; b * choices.len()];
    for (i, c) in choices.iter().enumerate() {
        s_star[i * b + c.branch] = constellation.point(c.symbol);
    }
    Ok(s_star)
}

pub fn assemble_frame(
    choices: &[GridChoice],
    constellation: &Constellation,
    params: &FrameParams,
) -> Result<DDFrame> {
    let s_star = stack_choices(choices, constellation, params)?;
    let b = params.branches();
    let nm = choices.len();
    let s = ComplexMatrix::from_fn(b, nm, |row, col| s_star[col * b + row]);
    Ok(DDFrame {
        choices: choices.to_vec(),
        s,
        s_star,
    })
}

pub fn unmap_choices(
    choices: &[GridChoice],
    params: &FrameParams,
    constellation: &Constellation,
) -> Result<Vec<u8>> {
    check_constellation(params, constellation)?;
    check_choices(choices, params)?;
    let mut bits = Vec::with_capacity(params.bits_per_frame());
    for c in choices {
        push_value_bits(&mut bits, c.branch, params.index_bits());
        push_value_bits(&mut bits, c.symbol, params.symbol_bits());
    }
    Ok(bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    fn table_params() -> FrameParams {
        FrameParams::mbm(2, 2, 4, 2, 1).unwrap()
    }

    #[test]
    fn segment_table_bits() {
        let b = bits("0111001100011101");
        let chunks = segment_bits(&b, &table_params()).unwrap();
        let expected: Vec<Vec<u8>> = ["0111", "0011", "0001", "1101"].iter().map(|s| bits(s)).collect();
        assert_eq!(chunks, expected);
    }

    #[test]
    fn segment_sizes() {
        let p = FrameParams::otfs(1, 1, 4, 1).unwrap();
        assert_eq!(segment_bits(&[1, 0], &p).unwrap().len(), 1);

        let p = FrameParams::mbm(4, 4, 4, 3, 3).unwrap();
        let v = vec![0u8; 80];
        let chunks = segment_bits(&v, &p).unwrap();
        assert_eq!(chunks.len(), 16);
        assert!(chunks.iter().all(|c| c.len() == 5));

        let err = segment_bits(&v[..79], &p).unwrap_err();
        assert_eq!(err, Error::BitCount { expected: 80, actual: 79 });
        assert!(err.to_string().contains("80"));
    }

    #[test]
    fn map_table_chunks() {
        let p = table_params();
        let raw = Constellation::qam(4, Normalization::Raw).unwrap();
        let cases = [
            ("0111", 1, Complex::new(1.0, -1.0)),
            ("0011", 0, Complex::new(1.0, -1.0)),
            ("0001", 0, Complex::new(-1.0, -1.0)),
            ("1101", 3, Complex::new(-1.0, -1.0)),
            ("0000", 0, Complex::new(-1.0, 1.0)),
        ];
        for (chunk, branch, point) in cases {
            let c = map_chunk(&bits(chunk), &p, &raw).unwrap();
            assert_eq!(c.branch, branch, "{chunk}");
            assert_eq!(raw.point(c.symbol), point, "{chunk}");
        }
    }

    #[test]
    fn table_frame_matrix() {
        let p = table_params();
        let raw = Constellation::qam(4, Normalization::Raw).unwrap();
        let choices = map_bits(&bits("0111001100011101"), &p, &raw).unwrap();
        let frame = assemble_frame(&choices, &raw, &p).unwrap();
        let z = ZERO;
        let a = Complex::new(1.0, -1.0);
        let d = Complex::new(-1.0, -1.0);
        let expected = ComplexMatrix::from_rows(&[
            vec![z, a, d, z],
            vec![a, z, z, z],
            vec![z, z, z, z],
            vec![z, z, z, d],
        ])
        .unwrap();
        assert_eq!(frame.s, expected);
        for i in 0..4 {
            assert_eq!(&frame.s_star[i * 4..(i + 1) * 4], frame.s.column(i).as_slice());
        }
        assert_eq!(
            unmap_choices(&choices, &p, &raw).unwrap(),
            bits("0111001100011101")
        );
    }

    #[test]
    fn single_grid_basis_column() {
        let p = FrameParams::mbm(1, 1, 4, 2, 1).unwrap();
        let mut c = Constellation::qam(4, Normalization::Raw).unwrap();
        // Unit point for the e1 example.
        c.points[0] = Complex::new(1.0, 0.0);
        let frame = assemble_frame(&[GridChoice::new(0, 0)], &c, &p).unwrap();
        assert_eq!(frame.s.column(0), vec![Complex::new(1.0, 0.0), ZERO, ZERO, ZERO]);
    }

    #[test]
    fn unmap_fourth_grid() {
        let p = FrameParams::mbm(1, 1, 4, 2, 1).unwrap();
        let raw = Constellation::qam(4, Normalization::Raw).unwrap();
        let sym = raw.points().iter().position(|&x| x == Complex::new(-1.0, -1.0)).unwrap();
        assert_eq!(unmap_choices(&[GridChoice::new(sym, 3)], &p, &raw).unwrap(), bits("1101"));
    }

    #[test]
    fn constellations_are_unit_energy_and_distinct() {
        for order in [4, 8, 16, 32, 64, 128, 256] {
            let c = Constellation::qam(order, Normalization::UnitEnergy).unwrap();
            assert!((c.mean_energy() - 1.0).abs() < 1e-12, "order {order}");
            for (i, a) in c.points().iter().enumerate() {
                for b in &c.points()[i + 1..] {
                    assert!((a - b).norm() > 1e-6);
                }
            }
        }
        assert!(Constellation::qam(3, Normalization::Raw).is_err());
        assert!(Constellation::qam(2, Normalization::Raw).is_err());
    }

    #[test]
    fn rectangular_shapes() {
        let c8 = Constellation::qam(8, Normalization::Raw).unwrap();
        let mut re: Vec<i64> = c8.points().iter().map(|p| p.re as i64).collect();
        re.sort();
        re.dedup();
        assert_eq!(re, vec![-3, -1, 1, 3]);
        let c32 = Constellation::qam(32, Normalization::Raw).unwrap();
        let mut im: Vec<i64> = c32.points().iter().map(|p| p.im as i64).collect();
        im.sort();
        im.dedup();
        assert_eq!(im, vec![-3, -1, 1, 3]);
    }

    #[test]
    fn gray_neighbours_differ_by_one_bit() {
        for order in [4, 8, 16, 32, 64] {
            let c = Constellation::qam(order, Normalization::Raw).unwrap();
            for (i, a) in c.points().iter().enumerate() {
                for (j, b) in c.points().iter().enumerate() {
                    if ((a - b).norm() - 2.0).abs() < 1e-9 {
                        assert_eq!((i ^ j).count_ones(), 1, "order {order}: {i} vs {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn bits_per_frame_matches_efficiency() {
        let mbm = FrameParams::mbm(4, 4, 4, 3, 1).unwrap();
        assert_eq!(mbm.bits_per_frame(), 80);
        let sm = FrameParams::sm(4, 4, 8, 4, 1).unwrap();
        assert_eq!(sm.bits_per_frame(), 16 * 5);
        let otfs = FrameParams::otfs(4, 4, 32, 1).unwrap();
        assert_eq!(otfs.bits_per_frame(), 80);
    }

    #[test]
    fn param_validation() {
        assert!(FrameParams::mbm(0, 2, 4, 2, 1).is_err());
        assert!(FrameParams::mbm(2, 2, 4, 0, 1).is_err());
        assert!(FrameParams::sm(2, 2, 4, 3, 1).is_err());
        assert!(FrameParams::otfs(2, 2, 6, 1).is_err());
        assert!(FrameParams::otfs(2, 2, 4, 0).is_err());
        let err = FrameParams::otfs(2, 2, 3, 1).unwrap_err().to_string();
        assert!(err.contains("M_q") && err.contains("power of two"));
    }
}

//! ISFFT / SFFT and the DD <-> time-domain frame operators.
//!
//! Grids are stored row-major with the Doppler index as the row:
//! entry `(k, l)` lives at `k * M + l`. This is also the grid order used by
//! the stacked frame vector, so grid point `i` is `(i / M, i % M)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::FrameParams;
use crate::numerics::{dft_matrix, Complex, ComplexMatrix, ZERO};

/// Delay-Doppler grid `x[k, l]`, `k` Doppler, `l` delay.
#[derive(Debug, Clone, PartialEq)]
pub struct DDGridSignal {
    pub n: usize,
    pub m: usize,
    pub data: Vec<Complex>,
}

/// Time-frequency grid `X[n, m]` with critical sampling `T * Δf = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TFGridSignal {
    pub n: usize,
    pub m: usize,
    pub data: Vec<Complex>,
    /// Δf in Hz.
    pub subcarrier_spacing: f64,
}

impl DDGridSignal {
    pub fn new(n: usize, m: usize, data: Vec<Complex>) -> Result<Self> {
        check_grid(n, m, &data)?;
        Ok(DDGridSignal { n, m, data })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        DDGridSignal {
            n,
            m,
            data: vec![ZERO; n * m],
        }
    }

    pub fn get(&self, k: usize, l: usize) -> Complex {
        self.data[k * self.m + l]
    }

    pub fn set(&mut self, k: usize, l: usize, value: Complex) {
        self.data[k * self.m + l] = value;
    }
}

impl TFGridSignal {
    pub fn new(n: usize, m: usize, data: Vec<Complex>, subcarrier_spacing: f64) -> Result<Self> {
        check_grid(n, m, &data)?;
        if !(subcarrier_spacing > 0.0 && subcarrier_spacing.is_finite()) {
            return Err(Error::param("subcarrier_spacing", "must be positive and finite"));
        }
        Ok(TFGridSignal {
            n,
            m,
            data,
            subcarrier_spacing,
        })
    }

    /// Slot duration `T = 1 / Δf`.
    pub fn slot_duration(&self) -> f64 {
        1.0 / self.subcarrier_spacing
    }

    pub fn get(&self, n: usize, m: usize) -> Complex {
        self.data[n * self.m + m]
    }
}

fn check_grid(n: usize, m: usize, data: &[Complex]) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::dim("grid dimensions must be non-zero"));
    }
    if data.len() != n * m {
        return Err(Error::dim(format!("{} entries for a {n}x{m} grid", data.len())));
    }
    if data.iter().any(|z| !z.is_finite()) {
        return Err(Error::dim("grid entries must be finite"));
    }
    Ok(())
}

/// `left * grid * right` for an `n x m` row-major grid.
fn sandwich(left: &ComplexMatrix, grid: &[Complex], right: &ComplexMatrix, n: usize, m: usize) -> Vec<Complex> {
    let g = ComplexMatrix::from_vec(n, m, grid.to_vec()).expect("grid shape checked by caller");
    left.matmul(&g)
        .and_then(|t| t.matmul(right))
        .expect("square transform matrices")
        .as_slice()
        .to_vec()
}

/// Inverse symplectic finite Fourier transform, `X = F_Nᴴ x F_M`.
///
/// The output carries Δf = 1 (normalised units); use
/// [`TFGridSignal::subcarrier_spacing`] to attach a physical value.
pub fn isfft(x: &DDGridSignal) -> TFGridSignal {
    let fn_h = dft_matrix(x.n).expect("n >= 1").adjoint();
    let fm = dft_matrix(x.m).expect("m >= 1");
    TFGridSignal {
        n: x.n,
        m: x.m,
        data: sandwich(&fn_h, &x.data, &fm, x.n, x.m),
        subcarrier_spacing: 1.0,
    }
}

/// Symplectic finite Fourier transform, `y = F_N Y F_Mᴴ`.
pub fn sfft(y: &TFGridSignal) -> DDGridSignal {
    let fn_ = dft_matrix(y.n).expect("n >= 1");
    let fm_h = dft_matrix(y.m).expect("m >= 1").adjoint();
    DDGridSignal {
        n: y.n,
        m: y.m,
        data: sandwich(&fn_, &y.data, &fm_h, y.n, y.m),
    }
}

/// Which matrix the transmitter applies across the Doppler axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformConvention {
    /// `F_Nᴴ`, the exact inverse of the receiver's `F_N`.
    #[default]
    Unitary,
    /// `F_Nᵀ` taken literally. With the symmetric DFT this is `F_N` itself,
    /// so a unit channel reverses the Doppler axis.
    Transpose,
}

/// Applies `(a ⊗ I_block)` to `v`.
pub fn apply_kron_identity(a: &ComplexMatrix, v: &[Complex], block: usize) -> Result<Vec<Complex>> {
    if v.len() != a.cols() * block {
        return Err(Error::dim(format!(
            "vector of length {} does not match a {}x{} ⊗ I_{block} operator",
            v.len(),
            a.rows(),
            a.cols()
        )));
    }
    let mut out = vec![ZERO; a.rows() * block];
    for r in 0..a.rows() {
        let dst = &mut out[r * block..(r + 1) * block];
        for (c, &coef) in a.row(r).iter().enumerate() {
            for (o, &x) in dst.iter_mut().zip(&v[c * block..(c + 1) * block]) {
                *o += coef * x;
            }
        }
    }
    Ok(out)
}

fn transmit_matrix(n: usize, convention: TransformConvention) -> ComplexMatrix {
    let f = dft_matrix(n).expect("n >= 1");
    match convention {
        TransformConvention::Unitary => f.adjoint(),
        TransformConvention::Transpose => f.transpose(),
    }
}

/// Stacked DD frame to the time domain: `(F_Nᴴ ⊗ I_{B·M}) s*`.
///
/// The output is interleaved by branch: sample `t` of branch `b` sits at
/// `t * B + b`.
pub fn dd_to_time(s_star: &[Complex], params: &FrameParams, convention: TransformConvention) -> Result<Vec<Complex>> {
    let expected = params.branches() * params.grid_points();
    if s_star.len() != expected {
        return Err(Error::dim(format!(
            "stacked DD vector has length {}, expected {expected}",
            s_star.len()
        )));
    }
    apply_kron_identity(
        &transmit_matrix(params.n, convention),
        s_star,
        params.branches() * params.m,
    )
}

/// Received time-domain samples back to the DD domain: `(F_N ⊗ I_{N_R·M}) r`.
///
/// Input and output are interleaved by receive antenna (`t * N_R + z`).
pub fn time_to_dd(r: &[Complex], params: &FrameParams) -> Result<Vec<Complex>> {
    let expected = params.n_r * params.grid_points();
    if r.len() != expected {
        return Err(Error::dim(format!(
            "received vector has length {}, expected {expected}",
            r.len()
        )));
    }
    apply_kron_identity(&dft_matrix(params.n)?, r, params.n_r * params.m)
}

/// Group-major `[g * len + t]` to interleaved `[t * groups + g]`.
pub fn interleave(v: &[Complex], groups: usize) -> Vec<Complex> {
    let len = v.len() / groups;
    let mut out = vec![ZERO; v.len()];
    for g in 0..groups {
        for t in 0..len {
            out[t * groups + g] = v[g * len + t];
        }
    }
    out
}

/// Inverse of [`interleave`].
pub fn deinterleave(v: &[Complex], groups: usize) -> Vec<Complex> {
    let len = v.len() / groups;
    let mut out = vec![ZERO; v.len()];
    for g in 0..groups {
        for t in 0..len {
            out[g * len + t] = v[t * groups + g];
        }
    }
    out
}

//! Maximum-likelihood detection of symbol and active-branch indices.
//!
//! The per-grid detector evaluates `‖ȳ − h_{i,b} x_q‖²` against the whole
//! received vector for every grid point `i`, so energy leaking from other
//! grid points is left in the residual. Ties resolve to the lowest branch,
//! then the lowest symbol.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{stack_choices, unmap_choices, Constellation, FrameParams, GridChoice, Scheme};
use crate::numerics::{norm_sqr, Complex, ComplexMatrix, ZERO};

/// Hypothesis count above which [`joint_ml_oracle`] refuses to run.
pub const ORACLE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorMode {
    /// Per-grid ML against the full received vector; other grid points'
    /// contributions are left in as interference.
    #[default]
    #[serde(alias = "paper-literal")]
    PerGrid,
    /// Per-grid ML followed by one pass in which every grid point is
    /// re-detected after subtracting the other grid points' estimates.
    ResidualCancellation,
    /// Exhaustive joint search over the whole frame.
    JointOracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub choices: Vec<GridChoice>,
    pub bits: Vec<u8>,
    /// Winning metric per grid point, `‖ȳ_i − h x‖²` for the per-grid
    /// detectors (where `ȳ_i` is the vector that grid point was matched
    /// against).
    pub grid_metrics: Vec<f64>,
    /// `‖ȳ − H_eff ŝ*‖²` of the detected frame.
    pub residual: f64,
}

impl DetectionResult {
    /// Estimated symbol indices `q̂` (one-based).
    pub fn symbol_indices(&self) -> Vec<usize> {
        self.choices.iter().map(|c| c.symbol + 1).collect()
    }

    /// Estimated branch indices `ϖ̂` (one-based).
    pub fn branch_indices(&self) -> Vec<usize> {
        self.choices.iter().map(|c| c.branch + 1).collect()
    }
}

fn check_dims(y: &[Complex], h_eff: &ComplexMatrix, params: &FrameParams) -> Result<()> {
    let rows = params.n_r * params.grid_points();
    let cols = params.branches() * params.grid_points();
    if h_eff.rows() != rows || h_eff.cols() != cols {
        return Err(Error::dim(format!(
            "effective channel is {}x{}, expected {rows}x{cols}",
            h_eff.rows(),
            h_eff.cols()
        )));
    }
    if y.len() != rows {
        return Err(Error::dim(format!(
            "received vector has length {}, expected {rows}",
            y.len()
        )));
    }
    Ok(())
}

/// `Hᴴ y` and the squared column norms of `H`.
fn correlate(y: &[Complex], h: &ComplexMatrix) -> (Vec<Complex>, Vec<f64>) {
    let mut corr = vec![ZERO; h.cols()];
    let mut energy = vec![0.0; h.cols()];
    for (r, &yr) in y.iter().enumerate() {
        for ((c, e), &hrc) in corr.iter_mut().zip(energy.iter_mut()).zip(h.row(r)) {
            *c += hrc.conj() * yr;
            *e += hrc.norm_sqr();
        }
    }
    (corr, energy)
}

/// Best `(branch, symbol)` for one grid point given `‖y‖²`, `hᴴy` and
/// `‖h‖²` of each of its branch columns.
fn best_for_grid(y_energy: f64, corr: &[Complex], energy: &[f64], points: &[Complex]) -> (GridChoice, f64) {
    let mut best = (GridChoice::default(), f64::INFINITY);
    for (b, (&c, &e)) in corr.iter().zip(energy).enumerate() {
        for (q, x) in points.iter().enumerate() {
            let metric = y_energy - 2.0 * (x.conj() * c).re + x.norm_sqr() * e;
            if metric < best.1 {
                best = (GridChoice::new(q, b), metric);
            }
        }
    }
    (best.0, best.1.max(0.0))
}

/// `‖y − H s*‖²` for a frame hypothesis.
pub fn frame_residual(
    y: &[Complex],
    h_eff: &ComplexMatrix,
    choices: &[GridChoice],
    constellation: &Constellation,
    params: &FrameParams,
) -> Result<f64> {
    check_dims(y, h_eff, params)?;
    let s = stack_choices(choices, constellation, params)?;
    let hs = h_eff.mul_vec(&s)?;
    Ok(y.iter().zip(&hs).map(|(a, b)| (a - b).norm_sqr()).sum())
}

fn finish(
    y: &[Complex],
    h_eff: &ComplexMatrix,
    choices: Vec<GridChoice>,
    grid_metrics: Vec<f64>,
    constellation: &Constellation,
    params: &FrameParams,
) -> Result<DetectionResult> {
    let residual = frame_residual(y, h_eff, &choices, constellation, params)?;
    Ok(DetectionResult {
        bits: unmap_choices(&choices, params, constellation)?,
        choices,
        grid_metrics,
        residual,
    })
}

/// Per-grid ML: for every grid point `i`, the `(q, ϖ)` minimising
/// `‖ȳ − h_{i,ϖ} x_q‖²` where `h_{i,ϖ}` is column `i·B + ϖ` of `H_eff`.
pub fn detect_per_grid(
    y: &[Complex],
    h_eff: &ComplexMatrix,
    constellation: &Constellation,
    params: &FrameParams,
) -> Result<DetectionResult> {
    check_dims(y, h_eff, params)?;
    let b = params.branches();
    let (corr, energy) = correlate(y, h_eff);
    let y_energy = norm_sqr(y);
    let (choices, metrics) = (0..params.grid_points())
        .map(|i| {
            let cols = i * b..(i + 1) * b;
            best_for_grid(y_energy, &corr[cols.clone()], &energy[cols], constellation.points())
        })
        .unzip();
    finish(y, h_eff, choices, metrics, constellation, params)
}

fn expect_scheme(params: &FrameParams, expected: Scheme) -> Result<()> {
    if params.scheme != expected {
        return Err(Error::SchemeMismatch {
            expected: expected.name(),
            actual: params.scheme.name(),
        });
    }
    Ok(())
}

/// Per-grid ML over transmit antennas.
pub fn detect_sm(
    y: &[Complex],
    h_eff: &ComplexMatrix,
    constellation: &Constellation,
    params: &FrameParams,
) -> Result<DetectionResult> {
    expect_scheme(params, Scheme::OtfsSm)?;
    detect_per_grid(y, h_eff, constellation, params)
}

/// Per-grid ML with a single branch.
pub fn detect_otfs(
    y: &[Complex],
    h_eff: &ComplexMatrix,
    constellation: &Constellation,
    params: &FrameParams,
) -> Result<DetectionResult> {
    expect_scheme(params, Scheme::Otfs)?;
    detect_per_grid(y, h_eff, constellation, params)
}

/// Per-grid ML, then one Jacobi-style refinement in which grid point `i` is
/// matched against `ȳ − Σ_{j≠i} h_{j,ϖ̂_j} x̂_j`.
pub fn detect_residual_cancellation(
    y: &[Complex],
    h_eff: &ComplexMatrix,
    constellation: &Constellation,
    params: &FrameParams,
) -> Result<DetectionResult> {
    let first = detect_per_grid(y, h_eff, constellation, params)?;
    let b = params.branches();
    let s = stack_choices(&first.choices, constellation, params)?;
    let hs = h_eff.mul_vec(&s)?;
    let residual: Vec<Complex> = y.iter().zip(&hs).map(|(a, b)| a - b).collect();

    let mut choices = Vec::with_capacity(params.grid_points());
    let mut metrics = Vec::with_capacity(params.grid_points());
    let mut y_i = vec![ZERO; y.len()];
    for (i, prev) in first.choices.iter().enumerate() {
        let x_prev = constellation.point(prev.symbol);
        let col_prev = i * b + prev.branch;
        for (r, v) in y_i.iter_mut().enumerate() {
            *v = residual[r] + h_eff[(r, col_prev)] * x_prev;
        }
        let mut corr = vec![ZERO; b];
        let mut energy = vec![0.0; b];
        for (r, &v) in y_i.iter().enumerate() {
            for br in 0..b {
                let h = h_eff[(r, i * b + br)];
                corr[br] += h.conj() * v;
                energy[br] += h.norm_sqr();
            }
        }
        let (choice, metric) = best_for_grid(norm_sqr(&y_i), &corr, &energy, constellation.points());
        choices.push(choice);
        metrics.push(metric);
    }
    finish(y, h_eff, choices, metrics, constellation, params)
}

/// Exhaustive joint ML over all `(M_q·B)^{NM}` frame hypotheses.
pub fn joint_ml_oracle(
    y: &[Complex],
    h_eff: &ComplexMatrix,
    constellation: &Constellation,
    params: &FrameParams,
) -> Result<DetectionResult> {
    check_dims(y, h_eff, params)?;
    let nm = params.grid_points();
    let b = params.branches();
    let per_grid = params.mod_order * b;
    let hypotheses = (per_grid as f64).powi(nm as i32);
    if hypotheses > ORACLE_LIMIT {
        return Err(Error::SearchSpace {
            hypotheses,
            limit: ORACLE_LIMIT,
        });
    }

    // contributions[i][b * M_q + q] = h_{i,b} x_q
    let contributions: Vec<Vec<Vec<Complex>>> = (0..nm)
        .map(|i| {
            (0..b)
                .flat_map(|br| {
                    let col = h_eff.column(i * b + br);
                    constellation
                        .points()
                        .iter()
                        .map(move |&x| col.iter().map(|h| h * x).collect())
                        .collect::<Vec<_>>()
                })
                .collect()
        })
        .collect();

    let mut digits = vec![0usize; nm];
    let mut best_digits = digits.clone();
    let mut best = f64::INFINITY;
    let mut acc = vec![ZERO; y.len()];
    loop {
        acc.copy_from_slice(y);
        for (i, &d) in digits.iter().enumerate() {
            for (a, v) in acc.iter_mut().zip(&contributions[i][d]) {
                *a -= v;
            }
        }
        let metric = norm_sqr(&acc);
        if metric < best {
            best = metric;
            best_digits.copy_from_slice(&digits);
        }
        // Odometer with grid 0 most significant, so enumeration order
        // matches the per-grid tie-break.
        let mut pos = nm;
        loop {
            if pos == 0 {
                let choices: Vec<GridChoice> = best_digits
                    .iter()
                    .map(|&d| GridChoice::new(d % params.mod_order, d / params.mod_order))
                    .collect();
                let metrics = grid_metrics_for(y, &contributions, &best_digits);
                return finish(y, h_eff, choices, metrics, constellation, params);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < per_grid {
                break;
            }
            digits[pos] = 0;
        }
    }
}

fn grid_metrics_for(y: &[Complex], contributions: &[Vec<Vec<Complex>>], digits: &[usize]) -> Vec<f64> {
    digits
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            y.iter()
                .zip(&contributions[i][d])
                .map(|(a, b)| (a - b).norm_sqr())
                .sum()
        })
        .collect()
}

/// Dispatches on the configured detector.
pub fn detect(
    mode: DetectorMode,
    y: &[Complex],
    h_eff: &ComplexMatrix,
    constellation: &Constellation,
    params: &FrameParams,
) -> Result<DetectionResult> {
    match mode {
        DetectorMode::PerGrid => detect_per_grid(y, h_eff, constellation, params),
        DetectorMode::ResidualCancellation => detect_residual_cancellation(y, h_eff, constellation, params),
        DetectorMode::JointOracle => joint_ml_oracle(y, h_eff, constellation, params),
    }
}

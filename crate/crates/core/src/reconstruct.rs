//! Recovery of the coefficient tensor from spike times.
//!
//! Each consecutive spike pair `(t_l, t_{l+1})` of sensor `i` measures
//! `b = int y_i = sum_{j,k} a_ij F_k C_jk`, where `F_k` integrates the `k`-th
//! temporal exponential over the interval and `C` is the `J x K` proxy
//! coefficient matrix. Row `(i, l)` of the system is `vec(a_i F^T)`, laid out
//! as `j * K + k`.
//!
//! The video is real, so `C` is conjugate-symmetric under
//! `(j, k) -> (J-1-j, K-1-k)`. The solver works over the non-redundant half,
//! which turns the complex system with real right-hand side into a real
//! least-squares problem with exactly `J K` real unknowns.

use std::f64::consts::TAU;

use faer::{c64, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sensor::{build_mixing, MixingMatrix, SensorGrid};
use crate::tem::{SpikeTrain, TemParams};
use crate::video::{BandlimitParams, CoefficientTensor};

/// Relative singular-value cutoff used for solving and rank reporting.
pub const DEFAULT_RCOND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub sensor_id: usize,
    pub interval: (f64, f64),
    /// `int_{t_l}^{t_{l+1}} y_i(u) du = 2 kappa delta - beta (t_{l+1} - t_l)`.
    pub b: f64,
}

/// One measurement per consecutive spike pair.
pub fn measurements_from_spikes(train: &SpikeTrain, params: &TemParams) -> Vec<Measurement> {
    train
        .times()
        .windows(2)
        .map(|w| Measurement {
            sensor_id: train.sensor_id,
            interval: (w[0], w[1]),
            b: params.quantum() - params.beta * (w[1] - w[0]),
        })
        .collect()
}

/// `F_k = int_{t0}^{t1} exp(j 2 pi (k - K0) u / T) du` for `k = 0..2K0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardBlock {
    entries: Vec<Complex64>,
}

impl ForwardBlock {
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }
}

pub fn forward_block(t0: f64, t1: f64, k0: usize, period: f64) -> Result<ForwardBlock> {
    if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
        return Err(Error::DegenerateInterval { t0, t1 });
    }
    let half = 0.5 * (t1 - t0);
    let mid = 0.5 * (t0 + t1);
    let entries = (-(k0 as i64)..=k0 as i64)
        .map(|k| {
            if k == 0 {
                return Complex64::new(t1 - t0, 0.0);
            }
            // (e^{jw t1} - e^{jw t0}) / (jw) = e^{jw mid} 2 sin(w half) / w
            let omega = TAU * k as f64 / period;
            let phase = TAU * ((mid / period).rem_euclid(1.0) * k as f64);
            Complex64::cis(phase) * (2.0 * (omega * half).sin() / omega)
        })
        .collect();
    Ok(ForwardBlock { entries })
}

/// The stacked rank-one sensing system.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    rows: Mat<c64>,
    rhs: Vec<f64>,
    sensor_ids: Vec<usize>,
    num_sensors: usize,
    params: BandlimitParams,
}

impl LinearSystem {
    pub fn rows(&self) -> &Mat<c64> {
        &self.rows
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Sensor that produced each row.
    pub fn sensor_ids(&self) -> &[usize] {
        &self.sensor_ids
    }

    pub fn num_sensors(&self) -> usize {
        self.num_sensors
    }

    pub fn params(&self) -> &BandlimitParams {
        &self.params
    }

    /// Number of measurements `m`.
    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    /// Applies the rows to `vec(C)` of `tensor`, giving the predicted
    /// measurements.
    pub fn apply(&self, tensor: &CoefficientTensor) -> Result<Vec<Complex64>> {
        if tensor.params().dims() != self.params.dims() {
            return Err(Error::ShapeMismatch(
                "tensor does not match system shape".into(),
            ));
        }
        let x = vec_proxy(tensor);
        Ok((0..self.rows.nrows())
            .map(|r| (0..x.len()).map(|c| self.rows[(r, c)] * x[c]).sum())
            .collect())
    }
}

/// `vec(C)` in `j * K + k` order.
fn vec_proxy(tensor: &CoefficientTensor) -> Vec<Complex64> {
    let p = tensor.params();
    let (jn, kn) = (p.spatial_count(), p.temporal_count());
    let v = tensor.values();
    (0..jn * kn).map(|n| v[(n % kn) * jn + n / kn]).collect()
}

fn tensor_from_vec(params: BandlimitParams, x: &[Complex64]) -> Result<CoefficientTensor> {
    let (jn, kn) = (params.spatial_count(), params.temporal_count());
    let values = (0..jn * kn).map(|n| x[(n % jn) * kn + n / jn]).collect();
    CoefficientTensor::from_values(params, values, true)
}

/// Stacks `vec(a_i F_l^T)` rows for every spike pair of every train, in train
/// order. Each train's `sensor_id` selects its row of `A`.
pub fn assemble_system(
    mixing: &MixingMatrix,
    trains: &[SpikeTrain],
    params: &[TemParams],
    blp: &BandlimitParams,
) -> Result<LinearSystem> {
    blp.validate()?;
    if trains.len() != params.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} spike trains but {} TEM parameter sets",
            trains.len(),
            params.len()
        )));
    }
    let (jn, kn) = (blp.spatial_count(), blp.temporal_count());
    if mixing.ncols() != jn {
        return Err(Error::ShapeMismatch(format!(
            "mixing matrix has {} columns, bandwidths need J = {jn}",
            mixing.ncols()
        )));
    }
    let mut blocks = Vec::new();
    let mut rhs = Vec::new();
    let mut sensor_ids = Vec::new();
    for (train, p) in trains.iter().zip(params) {
        if train.sensor_id >= mixing.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "sensor {} has no row in a {}-row mixing matrix",
                train.sensor_id,
                mixing.nrows()
            )));
        }
        p.validate()?;
        for m in measurements_from_spikes(train, p) {
            let f = forward_block(m.interval.0, m.interval.1, blp.k0, blp.period_t)
                .map_err(|e| e.at_sensor(train.sensor_id))?;
            blocks.push((train.sensor_id, f));
            rhs.push(m.b);
            sensor_ids.push(train.sensor_id);
        }
    }
    let a = mixing.entries();
    let rows = Mat::from_fn(blocks.len(), jn * kn, |r, c| {
        let (i, ref f) = blocks[r];
        a[(i, c / kn)] * f.entries[c % kn]
    });
    Ok(LinearSystem {
        rows,
        rhs,
        sensor_ids,
        num_sensors: mixing.nrows(),
        params: *blp,
    })
}

#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    pub estimate: CoefficientTensor,
    /// Numerical rank at the solve cutoff.
    pub rank: usize,
    /// `||M x - b||_2` of the returned solution.
    pub residual_norm: f64,
    /// Set by [`ReconstructionReport::score_against`].
    pub relative_coeff_mse: Option<f64>,
    /// `sigma_max / sigma_min`; infinite for underdetermined systems.
    pub condition_estimate: f64,
    pub unknowns: usize,
    pub measurements: usize,
}

impl ReconstructionReport {
    /// Records and returns the relative coefficient error against `truth`.
    pub fn score_against(&mut self, truth: &CoefficientTensor) -> Result<f64> {
        let mse = coefficient_mse(&self.estimate, truth)?;
        self.relative_coeff_mse = Some(mse);
        Ok(mse)
    }
}

/// Real design matrix over the non-redundant half of `vec(C)`.
///
/// For `n < h = (N-1)/2` with partner `m = N-1-n`, the unknowns are
/// `sqrt2 Re z_n` and `sqrt2 Im z_n`; the last unknown is the real centre
/// entry. The `sqrt2` scaling makes the Euclidean norm of the unknowns equal
/// the Frobenius norm of the tensor, so the minimum-norm solution is minimum
/// norm in coefficient space.
fn real_design(rows: &Mat<c64>) -> Mat<f64> {
    let n = rows.ncols();
    let h = n / 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Mat::from_fn(rows.nrows(), n, |r, c| {
        if c == n - 1 {
            return rows[(r, h)].re;
        }
        let idx = c / 2;
        let (zn, zm) = (rows[(r, idx)], rows[(r, n - 1 - idx)]);
        if c % 2 == 0 {
            (zn.re + zm.re) * s
        } else {
            (zm.im - zn.im) * s
        }
    })
}

fn unknowns_to_vec(u: &[f64]) -> Vec<Complex64> {
    let n = u.len();
    let h = n / 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for idx in 0..h {
        let z = Complex64::new(u[2 * idx] * s, u[2 * idx + 1] * s);
        x[idx] = z;
        x[n - 1 - idx] = z.conj();
    }
    x[h] = Complex64::new(u[n - 1], 0.0);
    x
}

/// Minimum-norm least-squares solution by SVD truncated at `rcond * sigma_max`.
pub fn solve(
    system: &LinearSystem,
    blp: &BandlimitParams,
    rcond: f64,
) -> Result<ReconstructionReport> {
    if system.is_empty() {
        return Err(Error::InsufficientData);
    }
    if blp.dims() != system.params.dims() {
        return Err(Error::ShapeMismatch(
            "bandwidths differ from the assembled system".into(),
        ));
    }
    if !(rcond.is_finite() && rcond >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "rcond must be nonnegative, got {rcond}"
        )));
    }
    let design = real_design(&system.rows);
    let (m, n) = (design.nrows(), design.ncols());
    let svd = design
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    let s = svd.S().column_vector();
    let (u, v) = (svd.U(), svd.V());
    let sigmas: Vec<f64> = (0..s.nrows()).map(|i| s[i]).collect();
    let sigma_max = sigmas.iter().copied().fold(0.0, f64::max);
    let cutoff = rcond * sigma_max;

    let mut solution = vec![0.0; n];
    let mut rank = 0;
    for (i, &sigma) in sigmas.iter().enumerate() {
        if sigma_max == 0.0 || sigma <= cutoff {
            continue;
        }
        rank += 1;
        let proj: f64 = (0..m).map(|r| u[(r, i)] * system.rhs[r]).sum::<f64>() / sigma;
        for (c, x) in solution.iter_mut().enumerate() {
            *x += v[(c, i)] * proj;
        }
    }
    let residual_norm = (0..m)
        .map(|r| {
            let pred: f64 = (0..n).map(|c| design[(r, c)] * solution[c]).sum();
            (pred - system.rhs[r]).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    let sigma_min = if m < n {
        0.0
    } else {
        sigmas.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let estimate = tensor_from_vec(*blp, &unknowns_to_vec(&solution))?;
    Ok(ReconstructionReport {
        estimate,
        rank,
        residual_norm,
        relative_coeff_mse: None,
        condition_estimate: if sigma_min > 0.0 {
            sigma_max / sigma_min
        } else {
            f64::INFINITY
        },
        unknowns: n,
        measurements: m,
    })
}

/// `||est - truth||_F^2 / ||truth||_F^2`.
pub fn coefficient_mse(estimate: &CoefficientTensor, truth: &CoefficientTensor) -> Result<f64> {
    if estimate.params().dims() != truth.params().dims() {
        return Err(Error::ShapeMismatch(format!(
            "estimate {:?} vs truth {:?}",
            estimate.params().dims(),
            truth.params().dims()
        )));
    }
    let denom = truth.frobenius_norm_sq();
    if denom == 0.0 {
        return Err(Error::DivisionByZero);
    }
    let num: f64 = estimate
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(num / denom)
}

/// Assembles and solves in one go for a grid whose sensors produced `trains`.
pub fn reconstruct(
    grid: &SensorGrid,
    trains: &[SpikeTrain],
    params: &[TemParams],
    rcond: f64,
) -> Result<ReconstructionReport> {
    let mixing = build_mixing(grid);
    let system = assemble_system(&mixing, trains, params, grid.params())?;
    solve(&system, grid.params(), rcond)
}

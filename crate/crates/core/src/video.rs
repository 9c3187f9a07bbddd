//! Periodic bandlimited video: a finite 3D Fourier series in `(t, d1, d2)`,
//! plus the 1D temporal signals seen at fixed spatial directions.
//!
//! Coefficients are stored row-major over `(k0, k1, k2)`, each axis offset so
//! that storage index `m` holds frequency `m - K`. With this layout the
//! conjugate-symmetric partner of flat index `n` is `N - 1 - n`.

use std::f64::consts::TAU;

use faer::{c64, Mat};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::sensor::IndexMap;

/// Relative tolerance for accepting a tensor or signal as conjugate-symmetric.
const HERMITIAN_TOL: f64 = 1e-9;

/// Bandwidths and periods of the scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandlimitParams {
    /// Temporal bandwidth index `K0`.
    pub k0: usize,
    /// Spatial bandwidth index along the first axis.
    pub k1: usize,
    /// Spatial bandwidth index along the second axis.
    pub k2: usize,
    /// Temporal period `T`.
    pub period_t: f64,
    /// Spatial period `D1`.
    pub period_d1: f64,
    /// Spatial period `D2`.
    pub period_d2: f64,
}

impl BandlimitParams {
    pub fn new(
        k0: usize,
        k1: usize,
        k2: usize,
        period_t: f64,
        period_d1: f64,
        period_d2: f64,
    ) -> Result<Self> {
        let params = Self {
            k0,
            k1,
            k2,
            period_t,
            period_d1,
            period_d2,
        };
        params.validate()?;
        Ok(params)
    }

    /// Same bandwidth on every axis, unit periods.
    pub fn cube(k: usize) -> Self {
        Self {
            k0: k,
            k1: k,
            k2: k,
            period_t: 1.0,
            period_d1: 1.0,
            period_d2: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("T", self.period_t),
            ("D1", self.period_d1),
            ("D2", self.period_d2),
        ] {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "period {name} must be positive and finite, got {p}"
                )));
            }
        }
        Ok(())
    }

    /// `K = 2K0 + 1`, the number of temporal coefficients per proxy signal.
    pub fn temporal_count(&self) -> usize {
        2 * self.k0 + 1
    }

    /// `J = (2K1 + 1)(2K2 + 1)`, the number of proxy signals.
    pub fn spatial_count(&self) -> usize {
        (2 * self.k1 + 1) * (2 * self.k2 + 1)
    }

    /// `K * J`.
    pub fn coefficient_count(&self) -> usize {
        self.temporal_count() * self.spatial_count()
    }

    /// Storage shape `(2K0+1, 2K1+1, 2K2+1)`.
    pub fn dims(&self) -> [usize; 3] {
        [2 * self.k0 + 1, 2 * self.k1 + 1, 2 * self.k2 + 1]
    }

    pub fn index_map(&self) -> IndexMap {
        IndexMap::new(self.k1, self.k2)
    }
}

/// The 3D Fourier series coefficients of a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTensor {
    params: BandlimitParams,
    values: Vec<Complex64>,
    real: bool,
}

impl CoefficientTensor {
    /// All-zero tensor, flagged real.
    pub fn zeros(params: BandlimitParams) -> Self {
        Self {
            params,
            values: vec![Complex64::new(0.0, 0.0); params.coefficient_count()],
            real: true,
        }
    }

    /// Wraps row-major `(k0, k1, k2)` values. With `real` set the values must
    /// already be conjugate-symmetric up to rounding; they are then made
    /// exactly symmetric.
    pub fn from_values(
        params: BandlimitParams,
        values: Vec<Complex64>,
        real: bool,
    ) -> Result<Self> {
        params.validate()?;
        if values.len() != params.coefficient_count() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coefficients, got {}",
                params.coefficient_count(),
                values.len()
            )));
        }
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite("coefficient tensor"));
        }
        let mut tensor = Self {
            params,
            values,
            real,
        };
        if real {
            let asym = hermitian_defect(&tensor.values);
            let scale = tensor.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if asym > HERMITIAN_TOL * (1.0 + scale) {
                return Err(Error::InvalidParams(format!(
                    "coefficients flagged real are not conjugate-symmetric (defect {asym:e})"
                )));
            }
            symmetrize(&mut tensor.values);
        }
        Ok(tensor)
    }

    /// Rebuilds a tensor from a `J x K` proxy-coefficient matrix, the inverse of
    /// [`proxy_coefficients`].
    pub fn from_proxy(params: BandlimitParams, proxy: &Mat<c64>, real: bool) -> Result<Self> {
        let (jn, kn) = (params.spatial_count(), params.temporal_count());
        if proxy.nrows() != jn || proxy.ncols() != kn {
            return Err(Error::ShapeMismatch(format!(
                "proxy matrix is {}x{}, expected {jn}x{kn}",
                proxy.nrows(),
                proxy.ncols()
            )));
        }
        let mut values = Vec::with_capacity(jn * kn);
        for k in 0..kn {
            for j in 0..jn {
                values.push(proxy[(j, k)]);
            }
        }
        Self::from_values(params, values, real)
    }

    pub fn params(&self) -> &BandlimitParams {
        &self.params
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Flat storage index of frequency `(k0, k1, k2)`.
    pub fn flat_index(&self, k0: i64, k1: i64, k2: i64) -> Option<usize> {
        let p = &self.params;
        let (m0, m1, m2) = (offset(k0, p.k0)?, offset(k1, p.k1)?, offset(k2, p.k2)?);
        let [_, n1, n2] = p.dims();
        Some((m0 * n1 + m1) * n2 + m2)
    }

    pub fn get(&self, k0: i64, k1: i64, k2: i64) -> Option<Complex64> {
        self.flat_index(k0, k1, k2).map(|n| self.values[n])
    }

    /// Sets one coefficient. On a real tensor the conjugate partner is set too,
    /// and the zero-frequency entry keeps only its real part.
    pub fn set(&mut self, k0: i64, k1: i64, k2: i64, value: Complex64) -> Result<()> {
        let n = self
            .flat_index(k0, k1, k2)
            .ok_or_else(|| Error::OutOfRange(format!("frequency ({k0}, {k1}, {k2})")))?;
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NonFinite("coefficient"));
        }
        let mirror = self.values.len() - 1 - n;
        if self.real {
            if n == mirror {
                self.values[n] = Complex64::new(value.re, 0.0);
            } else {
                self.values[n] = value;
                self.values[mirror] = value.conj();
            }
        } else {
            self.values[n] = value;
        }
        Ok(())
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

fn offset(k: i64, half: usize) -> Option<usize> {
    let m = k + half as i64;
    (0..=2 * half as i64).contains(&m).then_some(m as usize)
}

fn hermitian_defect(values: &[Complex64]) -> f64 {
    let n = values.len();
    (0..n)
        .map(|i| (values[i] - values[n - 1 - i].conj()).norm())
        .fold(0.0, f64::max)
}

/// Averages each entry with the conjugate of its mirror so that symmetry holds
/// bitwise.
fn symmetrize(values: &mut [Complex64]) {
    let n = values.len();
    for i in 0..n / 2 {
        let avg = (values[i] + values[n - 1 - i].conj()) * 0.5;
        values[i] = avg;
        values[n - 1 - i] = avg.conj();
    }
    if n % 2 == 1 {
        values[n / 2].im = 0.0;
    }
}

/// `exp(j 2 pi x k / period)` for `k = -half..=half`.
fn harmonics(half: usize, x: f64, period: f64) -> Vec<Complex64> {
    let frac = (x / period).rem_euclid(1.0);
    (-(half as i64)..=half as i64)
        .map(|k| Complex64::cis(TAU * frac * k as f64))
        .collect()
}

/// A real-valued periodic bandlimited scene.
#[derive(Debug, Clone, PartialEq)]
pub struct BandlimitedVideo {
    coefficients: CoefficientTensor,
}

impl BandlimitedVideo {
    pub fn new(coefficients: CoefficientTensor) -> Result<Self> {
        if !coefficients.is_real() {
            return Err(Error::InvalidParams(
                "a video must have conjugate-symmetric (real) coefficients".into(),
            ));
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &CoefficientTensor {
        &self.coefficients
    }

    pub fn params(&self) -> &BandlimitParams {
        self.coefficients.params()
    }

    /// `sum |c|`, an upper bound on `|y|` everywhere.
    pub fn amplitude_bound(&self) -> f64 {
        self.coefficients.values.iter().map(|c| c.norm()).sum()
    }

    pub fn eval(&self, d1: f64, d2: f64, t: f64) -> f64 {
        eval_video(self, d1, d2, t)
    }

    pub fn pixel_signal(&self, d1: f64, d2: f64) -> PixelSignal1D {
        pixel_signal(self, d1, d2)
    }
}

/// Evaluates the triple Fourier sum at one point.
pub fn eval_video(video: &BandlimitedVideo, d1: f64, d2: f64, t: f64) -> f64 {
    let p = video.params();
    let e0 = harmonics(p.k0, t, p.period_t);
    let e1 = harmonics(p.k1, d1, p.period_d1);
    let e2 = harmonics(p.k2, d2, p.period_d2);
    let values = video.coefficients.values();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut n = 0;
    for a in &e0 {
        for b in &e1 {
            let ab = a * b;
            for c in &e2 {
                sum += values[n] * ab * c;
                n += 1;
            }
        }
    }
    debug_assert!(
        sum.im.abs() < 1e-10 * (1.0 + sum.re.abs()),
        "imaginary residue {} in real video evaluation",
        sum.im
    );
    sum.re
}

/// Temporal coefficients of the signal seen at direction `(d1, d2)`.
pub fn pixel_signal(video: &BandlimitedVideo, d1: f64, d2: f64) -> PixelSignal1D {
    let p = video.params();
    let e1 = harmonics(p.k1, d1, p.period_d1);
    let e2 = harmonics(p.k2, d2, p.period_d2);
    let j_count = p.spatial_count();
    let values = video.coefficients.values();
    let mut coeffs: Vec<Complex64> = values
        .chunks_exact(j_count)
        .map(|slab| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut n = 0;
            for b in &e1 {
                for c in &e2 {
                    acc += slab[n] * b * c;
                    n += 1;
                }
            }
            acc
        })
        .collect();
    symmetrize(&mut coeffs);
    PixelSignal1D {
        coeffs,
        period: p.period_t,
    }
}

/// The `J x K` matrix whose row `j` holds the temporal coefficients of proxy
/// signal `j` (spatial frequency `(k1(j), k2(j))`).
pub fn proxy_coefficients(video: &BandlimitedVideo, index_map: &IndexMap) -> Result<Mat<c64>> {
    let p = video.params();
    if index_map.k1() != p.k1 || index_map.k2() != p.k2 {
        return Err(Error::ShapeMismatch(format!(
            "index map ({}, {}) does not match video bandwidths ({}, {})",
            index_map.k1(),
            index_map.k2(),
            p.k1,
            p.k2
        )));
    }
    let (jn, kn) = (p.spatial_count(), p.temporal_count());
    let values = video.coefficients.values();
    Ok(Mat::from_fn(jn, kn, |j, k| values[k * jn + j]))
}

/// Fills a video with i.i.d. complex Gaussian coefficients on the
/// non-redundant half and mirrors the rest. The per-coefficient variance is
/// `1 / (K J)` so the signal has unit mean power.
pub fn random_video(params: BandlimitParams, seed: u64) -> Result<BandlimitedVideo> {
    params.validate()?;
    let n = params.coefficient_count();
    let sigma = 1.0 / (n as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let component = Normal::new(0.0, sigma / std::f64::consts::SQRT_2).expect("valid std");
    let dc = Normal::new(0.0, sigma).expect("valid std");
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n / 2 {
        let v = Complex64::new(component.sample(&mut rng), component.sample(&mut rng));
        values[i] = v;
        values[n - 1 - i] = v.conj();
    }
    values[n / 2] = Complex64::new(dc.sample(&mut rng), 0.0);
    BandlimitedVideo::new(CoefficientTensor {
        params,
        values,
        real: true,
    })
}

/// A stack of real frames indexed `[p][q][r]`: row `p`, column `q`, frame `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCube {
    n1: usize,
    n2: usize,
    nt: usize,
    data: Vec<f64>,
}

impl FrameCube {
    pub fn new(n1: usize, n2: usize, nt: usize, data: Vec<f64>) -> Result<Self> {
        if n1 == 0 || n2 == 0 || nt == 0 {
            return Err(Error::InvalidParams(
                "frame cube dimensions must be nonzero".into(),
            ));
        }
        if data.len() != n1 * n2 * nt {
            return Err(Error::ShapeMismatch(format!(
                "{n1}x{n2}x{nt} cube needs {} values, got {}",
                n1 * n2 * nt,
                data.len()
            )));
        }
        Ok(Self { n1, n2, nt, data })
    }

    pub fn from_fn(
        n1: usize,
        n2: usize,
        nt: usize,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(n1 * n2 * nt);
        for p in 0..n1 {
            for q in 0..n2 {
                for r in 0..nt {
                    data.push(f(p, q, r));
                }
            }
        }
        Self { n1, n2, nt, data }
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.n1, self.n2, self.nt]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, p: usize, q: usize, r: usize) -> f64 {
        self.data[(p * self.n2 + q) * self.nt + r]
    }
}

/// Applies `matrix` (`out_len x dims[axis]`, row-major) along one axis of a
/// row-major 3D array.
fn apply_along_axis(
    data: &[Complex64],
    dims: [usize; 3],
    axis: usize,
    matrix: &[Complex64],
    out_len: usize,
) -> (Vec<Complex64>, [usize; 3]) {
    let in_len = dims[axis];
    debug_assert_eq!(matrix.len(), out_len * in_len);
    let mut out_dims = dims;
    out_dims[axis] = out_len;
    let stride = |d: [usize; 3]| [d[1] * d[2], d[2], 1];
    let (si, so) = (stride(dims), stride(out_dims));
    let mut out = vec![Complex64::new(0.0, 0.0); out_dims.iter().product()];
    for a in 0..out_dims[0] {
        for b in 0..out_dims[1] {
            for c in 0..out_dims[2] {
                let idx = [a, b, c];
                let row = &matrix[idx[axis] * in_len..(idx[axis] + 1) * in_len];
                let base: usize = (0..3)
                    .filter(|&ax| ax != axis)
                    .map(|ax| idx[ax] * si[ax])
                    .sum();
                let acc: Complex64 = row
                    .iter()
                    .enumerate()
                    .map(|(i, m)| m * data[base + i * si[axis]])
                    .sum();
                out[a * so[0] + b * so[1] + c] = acc;
            }
        }
    }
    (out, out_dims)
}

/// Matrix with entry `(row, col) = exp(sign j 2 pi row_freq * col / n)` where
/// rows run over frequencies `-half..=half` (analysis) or the roles are
/// swapped (synthesis).
fn dft_table(half: usize, n: usize, analysis: bool) -> Vec<Complex64> {
    let kn = 2 * half + 1;
    let phase = |k: usize, s: usize| {
        let k = k as i64 - half as i64;
        // reduce k*s mod n exactly before converting to an angle
        let r = (k * s as i64).rem_euclid(n as i64) as f64 / n as f64;
        Complex64::cis(TAU * r)
    };
    if analysis {
        let scale = 1.0 / n as f64;
        let mut m = Vec::with_capacity(kn * n);
        for k in 0..kn {
            for s in 0..n {
                m.push(phase(k, s).conj() * scale);
            }
        }
        m
    } else {
        let mut m = Vec::with_capacity(n * kn);
        for s in 0..n {
            for k in 0..kn {
                m.push(phase(k, s));
            }
        }
        m
    }
}

/// Interprets a frame cube as critical samples of a periodic bandlimited
/// video: the coefficients are the centered 3D DFT scaled by `1/(n1 n2 nt)`.
pub fn from_frames(
    frames: &FrameCube,
    period_t: f64,
    period_d1: f64,
    period_d2: f64,
) -> Result<BandlimitedVideo> {
    let [n1, n2, nt] = frames.dims();
    for (axis, len) in [("n1", n1), ("n2", n2), ("nt", nt)] {
        if len % 2 == 0 {
            return Err(Error::EvenDimension { axis, len });
        }
    }
    if frames.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("frame cube"));
    }
    let params = BandlimitParams::new(
        (nt - 1) / 2,
        (n1 - 1) / 2,
        (n2 - 1) / 2,
        period_t,
        period_d1,
        period_d2,
    )?;
    let data: Vec<Complex64> = frames
        .data
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    let (data, dims) =
        apply_along_axis(&data, [n1, n2, nt], 0, &dft_table(params.k1, n1, true), n1);
    let (data, dims) = apply_along_axis(&data, dims, 1, &dft_table(params.k2, n2, true), n2);
    let (data, _) = apply_along_axis(&data, dims, 2, &dft_table(params.k0, nt, true), nt);
    // [k1][k2][k0] -> [k0][k1][k2]
    let values = (0..nt)
        .flat_map(|k0| (0..n1 * n2).map(move |j| (k0, j)))
        .map(|(k0, j)| data[j * nt + k0])
        .collect();
    BandlimitedVideo::new(CoefficientTensor::from_values(params, values, true)?)
}

/// Samples the video on the uniform grid `d1 = p D1/n1`, `d2 = q D2/n2`,
/// `t = r T/nt`.
pub fn render(video: &BandlimitedVideo, n1: usize, n2: usize, nt: usize) -> Result<FrameCube> {
    if n1 == 0 || n2 == 0 || nt == 0 {
        return Err(Error::InvalidParams(
            "render grid dimensions must be nonzero".into(),
        ));
    }
    let p = video.params();
    let [kn, m1, m2] = p.dims();
    let values = video.coefficients.values();
    // [k0][k1][k2] -> [k1][k2][k0]
    let permuted: Vec<Complex64> = (0..m1 * m2)
        .flat_map(|j| (0..kn).map(move |k0| (j, k0)))
        .map(|(j, k0)| values[k0 * m1 * m2 + j])
        .collect();
    let (data, dims) =
        apply_along_axis(&permuted, [m1, m2, kn], 0, &dft_table(p.k1, n1, false), n1);
    let (data, dims) = apply_along_axis(&data, dims, 1, &dft_table(p.k2, n2, false), n2);
    let (data, _) = apply_along_axis(&data, dims, 2, &dft_table(p.k0, nt, false), nt);
    FrameCube::new(n1, n2, nt, data.iter().map(|v| v.re).collect())
}

/// One sensor's input: `2K0+1` conjugate-symmetric Fourier coefficients over
/// period `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelSignal1D {
    coeffs: Vec<Complex64>,
    period: f64,
}

impl PixelSignal1D {
    pub fn new(coeffs: Vec<Complex64>, period: f64) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::EvenDimension {
                axis: "signal coefficients",
                len: coeffs.len(),
            });
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidParams(format!(
                "period must be positive, got {period}"
            )));
        }
        if coeffs
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite("signal coefficients"));
        }
        let scale = coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if hermitian_defect(&coeffs) > HERMITIAN_TOL * (1.0 + scale) {
            return Err(Error::InvalidParams(
                "signal coefficients are not conjugate-symmetric".into(),
            ));
        }
        let mut coeffs = coeffs;
        symmetrize(&mut coeffs);
        Ok(Self { coeffs, period })
    }

    /// Constant signal.
    pub fn constant(value: f64, k0: usize, period: f64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * k0 + 1];
        coeffs[k0] = Complex64::new(value, 0.0);
        Self { coeffs, period }
    }

    pub fn k0(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Coefficients for `k = -K0..=K0`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Mean value `c_0`.
    pub fn dc(&self) -> f64 {
        self.coeffs[self.k0()].re
    }

    /// `sum_{k != 0} |c_k|`, bounding the oscillation around the mean.
    pub fn amplitude_bound(&self) -> f64 {
        let k0 = self.k0();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k0)
            .map(|(_, c)| c.norm())
            .sum()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let e = harmonics(self.k0(), t, self.period);
        let sum: Complex64 = self.coeffs.iter().zip(&e).map(|(c, e)| c * e).sum();
        debug_assert!(sum.im.abs() < 1e-10 * (1.0 + sum.re.abs()));
        sum.re
    }

    /// Closed-form `int_0^t y(u) du`.
    pub fn antiderivative(&self, t: f64) -> f64 {
        let k0 = self.k0() as i64;
        let mut sum = Complex64::new(self.dc() * t, 0.0);
        let frac = (t / self.period).rem_euclid(1.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = i as i64 - k0;
            if k == 0 {
                continue;
            }
            let omega = TAU * k as f64 / self.period;
            let rotated = Complex64::cis(TAU * frac * k as f64) - 1.0;
            sum += c * rotated / Complex64::new(0.0, omega);
        }
        debug_assert!(sum.im.abs() < 1e-10 * (1.0 + sum.re.abs()));
        sum.re
    }

    /// `int_{t0}^{t1} y(u) du`.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        self.antiderivative(t1) - self.antiderivative(t0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_video_is_constant() {
        let params = BandlimitParams::cube(2);
        let mut t = CoefficientTensor::zeros(params);
        t.set(0, 0, 0, c(1.0, 0.0)).unwrap();
        let v = BandlimitedVideo::new(t).unwrap();
        for (d1, d2, tt) in [(0.0, 0.0, 0.0), (0.3, 0.7, 0.11), (-4.2, 9.1, 123.4)] {
            assert!((v.eval(d1, d2, tt) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn temporal_cosine() {
        let params = BandlimitParams::cube(1);
        let mut t = CoefficientTensor::zeros(params);
        t.set(1, 0, 0, c(0.5, 0.0)).unwrap();
        assert_eq!(t.get(-1, 0, 0), Some(c(0.5, 0.0)));
        let v = BandlimitedVideo::new(t).unwrap();
        assert!((v.eval(0.4, 0.2, 0.0) - 1.0).abs() < 1e-14);
        assert!(v.eval(0.4, 0.2, 0.25).abs() < 1e-14);
    }

    #[test]
    fn set_on_real_tensor_mirrors() {
        let mut t = CoefficientTensor::zeros(BandlimitParams::cube(1));
        t.set(1, -1, 0, c(0.2, 0.3)).unwrap();
        assert_eq!(t.get(-1, 1, 0), Some(c(0.2, -0.3)));
        t.set(0, 0, 0, c(2.0, 5.0)).unwrap();
        assert_eq!(t.get(0, 0, 0), Some(c(2.0, 0.0)));
        assert!(t.set(2, 0, 0, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn non_hermitian_values_rejected_when_real() {
        let params = BandlimitParams::cube(0);
        let mut values = vec![c(0.0, 0.0); 1];
        values[0] = c(1.0, 1.0);
        assert!(CoefficientTensor::from_values(params, values.clone(), true).is_err());
        assert!(CoefficientTensor::from_values(params, values, false).is_ok());
    }

    #[test]
    fn spatially_flat_video_gives_same_pixel_everywhere() {
        let params = BandlimitParams::cube(2);
        let mut t = CoefficientTensor::zeros(params);
        t.set(0, 0, 0, c(0.7, 0.0)).unwrap();
        t.set(1, 0, 0, c(0.1, -0.2)).unwrap();
        t.set(2, 0, 0, c(0.05, 0.03)).unwrap();
        let v = BandlimitedVideo::new(t).unwrap();
        let a = v.pixel_signal(0.0, 0.0);
        for (d1, d2) in [(0.1, 0.9), (0.5, 0.5), (0.77, 0.01)] {
            let b = v.pixel_signal(d1, d2);
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((x - y).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_video_pixel_coefficients() {
        let params = BandlimitParams::cube(2);
        let mut t = CoefficientTensor::zeros(params);
        t.set(0, 0, 0, c(3.5, 0.0)).unwrap();
        let v = BandlimitedVideo::new(t).unwrap();
        let s = v.pixel_signal(0.3, 0.6);
        let expected = [0.0, 0.0, 3.5, 0.0, 0.0];
        for (got, want) in s.coeffs().iter().zip(expected) {
            assert!((got - c(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn proxy_of_constant_video() {
        let params = BandlimitParams::cube(1);
        let mut t = CoefficientTensor::zeros(params);
        t.set(0, 0, 0, c(2.0, 0.0)).unwrap();
        let v = BandlimitedVideo::new(t).unwrap();
        let m = proxy_coefficients(&v, &params.index_map()).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (9, 3));
        let j = params.index_map().index_of(0, 0).unwrap() - 1;
        for r in 0..9 {
            for k in 0..3 {
                let want = if (r, k) == (j, 1) { 2.0 } else { 0.0 };
                assert_eq!(m[(r, k)], c(want, 0.0));
            }
        }
    }

    #[test]
    fn proxy_reshape_is_bitwise_bijective() {
        let params = BandlimitParams::new(2, 1, 3, 1.0, 2.0, 0.5).unwrap();
        let v = random_video(params, 11).unwrap();
        let m = proxy_coefficients(&v, &params.index_map()).unwrap();
        let back = CoefficientTensor::from_proxy(params, &m, true).unwrap();
        assert_eq!(&back, v.coefficients());
    }

    #[test]
    fn proxy_rejects_mismatched_index_map() {
        let v = random_video(BandlimitParams::cube(1), 0).unwrap();
        assert!(proxy_coefficients(&v, &IndexMap::new(2, 1)).is_err());
    }

    #[test]
    fn random_video_determinism() {
        let params = BandlimitParams::cube(2);
        let a = random_video(params, 5).unwrap();
        let b = random_video(params, 5).unwrap();
        let c = random_video(params, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn from_frames_constant_and_cosine() {
        let frames = FrameCube::from_fn(3, 5, 7, |_, _, _| 3.0);
        let v = from_frames(&frames, 1.0, 1.0, 1.0).unwrap();
        for (n, val) in v.coefficients().values().iter().enumerate() {
            let want = if n == v.coefficients().values().len() / 2 {
                3.0
            } else {
                0.0
            };
            assert!((val - c(want, 0.0)).norm() < 1e-14);
        }

        let nt = 9;
        let frames = FrameCube::from_fn(3, 3, nt, |_, _, r| (TAU * r as f64 / nt as f64).cos());
        let v = from_frames(&frames, 1.0, 1.0, 1.0).unwrap();
        let t = v.coefficients();
        for k0 in -4..=4i64 {
            for k1 in -1..=1i64 {
                for k2 in -1..=1i64 {
                    let want = if k0.abs() == 1 && k1 == 0 && k2 == 0 {
                        0.5
                    } else {
                        0.0
                    };
                    assert!((t.get(k0, k1, k2).unwrap() - c(want, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn from_frames_rejects_even_and_nonfinite() {
        let even = FrameCube::from_fn(3, 4, 3, |_, _, _| 1.0);
        assert!(matches!(
            from_frames(&even, 1.0, 1.0, 1.0),
            Err(Error::EvenDimension { axis: "n2", len: 4 })
        ));
        let nan = FrameCube::from_fn(3, 3, 3, |p, _, _| if p == 1 { f64::NAN } else { 0.0 });
        assert!(matches!(
            from_frames(&nan, 1.0, 1.0, 1.0),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn antiderivative_closed_forms() {
        let s = PixelSignal1D::constant(1.0, 3, 1.0);
        assert!((s.antiderivative(0.3) - 0.3).abs() < 1e-15);

        let cosine = PixelSignal1D::new(vec![c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0)], 1.0).unwrap();
        let want = 1.0 / TAU;
        assert!((cosine.antiderivative(0.25) - want).abs() < 1e-15);
        assert!((want - 0.1591549).abs() < 1e-7);
    }

    #[test]
    fn pixel_signal_rejects_asymmetric() {
        assert!(PixelSignal1D::new(vec![c(0.5, 0.0), c(0.0, 0.0), c(0.2, 0.0)], 1.0).is_err());
        assert!(PixelSignal1D::new(vec![c(0.5, 0.0), c(0.0, 0.0)], 1.0).is_err());
    }
}

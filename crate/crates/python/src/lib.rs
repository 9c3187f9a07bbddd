//! Python bindings: scenes, sensor grids, encoding, reconstruction and sweeps.
//!
//! Errors from bad input surface as `ValueError`; numerical failures (for
//! example a bias too small for the input) as `ArithmeticError`.

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use vtem::harness::{self, SweepConfig, SweepMode};
use vtem::{Complex64, Error};

fn to_py(err: Error) -> PyErr {
    match (&err, err.exit_code()) {
        (Error::Io(_), _) => PyIOError::new_err(err.to_string()),
        (_, 3) => PyArithmeticError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

/// Bandwidths `K0, K1, K2` and periods `T, D1, D2` of a scene.
#[pyclass(
    name = "BandlimitParams",
    module = "pyvtem",
    frozen,
    eq,
    from_py_object
)]
#[derive(Clone, Copy, PartialEq)]
pub struct PyBandlimitParams(pub vtem::BandlimitParams);

#[pymethods]
impl PyBandlimitParams {
    #[new]
    #[pyo3(signature = (k0, k1, k2, period_t = 1.0, period_d1 = 1.0, period_d2 = 1.0))]
    fn new(
        k0: usize,
        k1: usize,
        k2: usize,
        period_t: f64,
        period_d1: f64,
        period_d2: f64,
    ) -> PyResult<Self> {
        vtem::BandlimitParams::new(k0, k1, k2, period_t, period_d1, period_d2)
            .map(Self)
            .map_err(to_py)
    }

    /// Equal bandwidth `k` on every axis, unit periods.
    #[staticmethod]
    fn cube(k: usize) -> Self {
        Self(vtem::BandlimitParams::cube(k))
    }

    #[getter]
    fn k0(&self) -> usize {
        self.0.k0
    }
    #[getter]
    fn k1(&self) -> usize {
        self.0.k1
    }
    #[getter]
    fn k2(&self) -> usize {
        self.0.k2
    }
    #[getter]
    fn periods(&self) -> (f64, f64, f64) {
        (self.0.period_t, self.0.period_d1, self.0.period_d2)
    }
    #[getter]
    fn coefficient_count(&self) -> usize {
        self.0.coefficient_count()
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!(
            "BandlimitParams(k0={}, k1={}, k2={}, period_t={}, period_d1={}, period_d2={})",
            p.k0, p.k1, p.k2, p.period_t, p.period_d1, p.period_d2
        )
    }
}

/// A real periodic bandlimited scene.
#[pyclass(name = "Video", module = "pyvtem", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyVideo(pub vtem::BandlimitedVideo);

#[pymethods]
impl PyVideo {
    #[staticmethod]
    #[pyo3(signature = (params, seed = 0))]
    fn random(params: &PyBandlimitParams, seed: u64) -> PyResult<Self> {
        vtem::random_video(params.0, seed).map(Self).map_err(to_py)
    }

    /// Fits a scene to `frames[p][q][r]` sampled on the uniform grid.
    #[staticmethod]
    #[pyo3(signature = (frames, period_t = 1.0, period_d1 = 1.0, period_d2 = 1.0))]
    fn from_frames(
        frames: Vec<Vec<Vec<f64>>>,
        period_t: f64,
        period_d1: f64,
        period_d2: f64,
    ) -> PyResult<Self> {
        let n1 = frames.len();
        let n2 = frames.first().map_or(0, Vec::len);
        let nt = frames.first().and_then(|f| f.first()).map_or(0, Vec::len);
        if frames
            .iter()
            .any(|f| f.len() != n2 || f.iter().any(|r| r.len() != nt))
        {
            return Err(PyValueError::new_err(
                "frames must be a rectangular n1 x n2 x nt list",
            ));
        }
        let cube = vtem::FrameCube::from_fn(n1, n2, nt, |p, q, r| frames[p][q][r]);
        vtem::from_frames(&cube, period_t, period_d1, period_d2)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        vtem::io::video_from_json(text).map(Self).map_err(to_py)
    }

    fn to_json(&self) -> PyResult<String> {
        vtem::io::tensor_to_json(self.0.coefficients()).map_err(to_py)
    }

    #[getter]
    fn params(&self) -> PyBandlimitParams {
        PyBandlimitParams(*self.0.params())
    }

    /// Coefficients in `(k0, k1, k2)` row-major order.
    #[getter]
    fn coefficients(&self) -> Vec<Complex64> {
        self.0.coefficients().values().to_vec()
    }

    fn amplitude_bound(&self) -> f64 {
        self.0.amplitude_bound()
    }

    fn eval(&self, d1: f64, d2: f64, t: f64) -> f64 {
        self.0.eval(d1, d2, t)
    }

    /// Temporal Fourier coefficients of the pixel at `(d1, d2)`, `-K0..=K0`.
    fn pixel_signal(&self, d1: f64, d2: f64) -> Vec<Complex64> {
        self.0.pixel_signal(d1, d2).coeffs().to_vec()
    }

    /// Samples on a uniform `n1 x n2 x nt` grid, as nested lists.
    fn render(&self, n1: usize, n2: usize, nt: usize) -> PyResult<Vec<Vec<Vec<f64>>>> {
        let cube = vtem::render(&self.0, n1, n2, nt).map_err(to_py)?;
        Ok((0..n1)
            .map(|p| {
                (0..n2)
                    .map(|q| (0..nt).map(|r| cube.get(p, q, r)).collect())
                    .collect()
            })
            .collect())
    }
}

#[pyclass(name = "SensorGrid", module = "pyvtem", frozen, from_py_object)]
#[derive(Clone)]
pub struct PySensorGrid(pub vtem::SensorGrid);

#[pymethods]
impl PySensorGrid {
    #[staticmethod]
    fn uniform(n1: usize, n2: usize, params: &PyBandlimitParams) -> PyResult<Self> {
        vtem::uniform_grid(n1, n2, params.0)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_points(points: Vec<(f64, f64)>, params: &PyBandlimitParams) -> PyResult<Self> {
        vtem::SensorGrid::from_points(&points, params.0)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn directions(&self) -> Vec<(f64, f64)> {
        self.0
            .directions()
            .iter()
            .map(|d| (d.d1(), d.d2()))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "TemParams", module = "pyvtem", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyTemParams(pub vtem::TemParams);

#[pymethods]
impl PyTemParams {
    #[new]
    fn new(kappa: f64, delta: f64, beta: f64) -> PyResult<Self> {
        vtem::TemParams::new(kappa, delta, beta)
            .map(Self)
            .map_err(to_py)
    }
    #[getter]
    fn kappa(&self) -> f64 {
        self.0.kappa
    }
    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta
    }
}

#[pyclass(name = "SpikeTrain", module = "pyvtem", frozen, from_py_object)]
#[derive(Clone)]
pub struct PySpikeTrain(pub vtem::SpikeTrain);

#[pymethods]
impl PySpikeTrain {
    #[new]
    fn new(sensor_id: usize, times: Vec<f64>, window: (f64, f64)) -> PyResult<Self> {
        vtem::SpikeTrain::new(sensor_id, times, window)
            .map(Self)
            .map_err(to_py)
    }
    #[getter]
    fn sensor_id(&self) -> usize {
        self.0.sensor_id
    }
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times().to_vec()
    }
    #[getter]
    fn window(&self) -> (f64, f64) {
        self.0.window()
    }
    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "Report", module = "pyvtem", frozen)]
pub struct PyReport(pub vtem::ReconstructionReport);

#[pymethods]
impl PyReport {
    #[getter]
    fn estimate(&self) -> PyResult<PyVideo> {
        vtem::BandlimitedVideo::new(self.0.estimate.clone())
            .map(PyVideo)
            .map_err(to_py)
    }
    #[getter]
    fn rank(&self) -> usize {
        self.0.rank
    }
    #[getter]
    fn residual_norm(&self) -> f64 {
        self.0.residual_norm
    }
    #[getter]
    fn relative_coeff_mse(&self) -> Option<f64> {
        self.0.relative_coeff_mse
    }
    #[getter]
    fn condition_estimate(&self) -> f64 {
        self.0.condition_estimate
    }
    #[getter]
    fn unknowns(&self) -> usize {
        self.0.unknowns
    }
    #[getter]
    fn measurements(&self) -> usize {
        self.0.measurements
    }
    fn to_json(&self) -> PyResult<String> {
        vtem::io::report_to_json(&self.0).map_err(to_py)
    }
}

/// Encodes every sensor with a threshold calibrated to `spikes` spikes.
/// Returns the spike trains and the per-sensor parameters used.
#[pyfunction]
#[pyo3(signature = (video, grid, spikes, kappa = 1.0, beta = None, window = None))]
fn encode(
    py: Python<'_>,
    video: &PyVideo,
    grid: &PySensorGrid,
    spikes: usize,
    kappa: f64,
    beta: Option<f64>,
    window: Option<(f64, f64)>,
) -> PyResult<(Vec<PySpikeTrain>, Vec<PyTemParams>)> {
    let window = window.unwrap_or((0.0, video.0.params().period_t));
    let (trains, params) = py
        .detach(|| harness::calibrated_encode(&video.0, &grid.0, kappa, beta, spikes, window))
        .map_err(to_py)?;
    Ok((
        trains.into_iter().map(PySpikeTrain).collect(),
        params.into_iter().map(PyTemParams).collect(),
    ))
}

/// Encodes with explicit per-sensor parameters.
#[pyfunction]
#[pyo3(signature = (video, grid, params, window = None))]
fn encode_array(
    py: Python<'_>,
    video: &PyVideo,
    grid: &PySensorGrid,
    params: Vec<PyTemParams>,
    window: Option<(f64, f64)>,
) -> PyResult<Vec<PySpikeTrain>> {
    let window = window.unwrap_or((0.0, video.0.params().period_t));
    let params: Vec<vtem::TemParams> = params.into_iter().map(|p| p.0).collect();
    py.detach(|| vtem::encode_array(&video.0, &grid.0, &params, window))
        .map(|t| t.into_iter().map(PySpikeTrain).collect())
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (grid, trains, params, rcond = vtem::DEFAULT_RCOND, truth = None))]
fn reconstruct(
    py: Python<'_>,
    grid: &PySensorGrid,
    trains: Vec<PySpikeTrain>,
    params: Vec<PyTemParams>,
    rcond: f64,
    truth: Option<&PyVideo>,
) -> PyResult<PyReport> {
    let trains: Vec<vtem::SpikeTrain> = trains.into_iter().map(|t| t.0).collect();
    let params: Vec<vtem::TemParams> = params.into_iter().map(|p| p.0).collect();
    let mut report = py
        .detach(|| vtem::reconstruct(&grid.0, &trains, &params, rcond))
        .map_err(to_py)?;
    if let Some(truth) = truth {
        report
            .score_against(truth.0.coefficients())
            .map_err(to_py)?;
    }
    Ok(PyReport(report))
}

/// `(satisfied, useful_pairs)` for the spike-count sufficient condition.
#[pyfunction]
#[pyo3(signature = (spike_counts, j_count, k_count, strict = false))]
fn feasibility(
    spike_counts: Vec<usize>,
    j_count: usize,
    k_count: usize,
    strict: bool,
) -> (bool, usize) {
    let f = vtem::feasibility(&spike_counts, j_count, k_count, strict);
    (f.satisfied, f.useful_pairs)
}

#[pyfunction]
fn coefficient_mse(estimate: &PyVideo, truth: &PyVideo) -> PyResult<f64> {
    vtem::coefficient_mse(estimate.0.coefficients(), truth.0.coefficients()).map_err(to_py)
}

/// Runs a sweep and returns one dict per cell, in the CSV column order.
#[pyfunction]
#[pyo3(signature = (mode = "spikes", grids = None, targets = None, params = None, seed = 0,
                    kappa = 1.0, beta = None, rcond = vtem::DEFAULT_RCOND, window = None))]
#[allow(clippy::too_many_arguments)]
fn run_sweep<'py>(
    py: Python<'py>,
    mode: &str,
    grids: Option<Vec<(usize, usize)>>,
    targets: Option<Vec<usize>>,
    params: Option<PyBandlimitParams>,
    seed: u64,
    kappa: f64,
    beta: Option<f64>,
    rcond: f64,
    window: Option<(f64, f64)>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mode: SweepMode = mode.parse().map_err(to_py)?;
    let mut config = SweepConfig::new(mode);
    if let Some(g) = grids {
        config.grids = g;
    }
    if let Some(t) = targets {
        config.pair_targets = t;
    }
    if let Some(p) = params {
        config.params = p.0;
    }
    config.seed = seed;
    config.kappa = kappa;
    config.beta = beta;
    config.rcond = rcond;
    config.window = window;
    let records = py.detach(|| harness::run_sweep(&config)).map_err(to_py)?;
    records
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("grid_n1", r.grid_n1)?;
            d.set_item("grid_n2", r.grid_n2)?;
            d.set_item("spike_pairs_target", r.spike_pairs_target)?;
            d.set_item("useful_pairs", r.useful_pairs)?;
            d.set_item("condition_strict", r.condition_strict)?;
            d.set_item("condition_nonstrict", r.condition_nonstrict)?;
            d.set_item("rank", r.rank)?;
            d.set_item("relative_mse", r.relative_mse)?;
            d.set_item("wall_time_s", r.wall_time_s)?;
            d.set_item("error", r.error.clone())?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn pyvtem(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBandlimitParams>()?;
    m.add_class::<PyVideo>()?;
    m.add_class::<PySensorGrid>()?;
    m.add_class::<PyTemParams>()?;
    m.add_class::<PySpikeTrain>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(encode_array, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(feasibility, m)?)?;
    m.add_function(wrap_pyfunction!(coefficient_mse, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add("DEFAULT_RCOND", vtem::DEFAULT_RCOND)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pyo3::ffi::c_str;

    fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyModule>)>(f: F) {
        Python::attach(|py| {
            let m = PyModule::new(py, "pyvtem").unwrap();
            pyvtem(&m).unwrap();
            f(py, &m);
        });
    }

    #[test]
    fn roundtrip_from_python() {
        with_module(|py, m| {
            let locals = PyDict::new(py);
            locals.set_item("v", m).unwrap();
            py.run(
                c_str!(
                    r#"
p = v.BandlimitParams.cube(1)
truth = v.Video.random(p, 3)
grid = v.SensorGrid.uniform(3, 3, p)
trains, params = v.encode(truth, grid, 5)
rep = v.reconstruct(grid, trains, params, truth=truth)
assert rep.rank == 27, rep.rank
assert rep.relative_coeff_mse < 1e-10
assert v.coefficient_mse(rep.estimate, truth) < 1e-10
assert v.feasibility([10] * 81, 81, 9, strict=True) == (False, 729)
"#
                ),
                None,
                Some(&locals),
            )
            .unwrap();
        });
    }

    #[test]
    fn errors_map_to_python_exceptions() {
        with_module(|py, m| {
            let locals = PyDict::new(py);
            locals.set_item("v", m).unwrap();
            py.run(
                c_str!(
                    r#"
try:
    v.BandlimitParams(1, 1, 1, period_t=-1.0)
    raise SystemExit("accepted a negative period")
except ValueError:
    pass
p = v.BandlimitParams.cube(1)
video = v.Video.random(p, 0)
grid = v.SensorGrid.uniform(1, 1, p)
try:
    v.encode(video, grid, 5, beta=-100.0)
    raise SystemExit("accepted a non-spiking bias")
except ArithmeticError:
    pass
"#
                ),
                None,
                Some(&locals),
            )
            .unwrap();
        });
    }

    #[test]
    fn sweep_rows_are_dicts() {
        with_module(|py, m| {
            let rows = m
                .getattr("run_sweep")
                .unwrap()
                .call(
                    (
                        "spikes",
                        vec![(3usize, 3usize)],
                        vec![1usize, 3],
                        PyBandlimitParams::cube(1),
                    ),
                    None,
                )
                .unwrap();
            let rows: Vec<Bound<'_, PyDict>> = rows.extract().unwrap();
            assert_eq!(rows.len(), 2);
            let mse: f64 = rows[1]
                .get_item("relative_mse")
                .unwrap()
                .unwrap()
                .extract()
                .unwrap();
            assert!(mse < 1e-10);
            let _ = py;
        });
    }
}

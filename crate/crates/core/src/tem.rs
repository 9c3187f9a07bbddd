//! Integrate-and-fire time encoding of 1D periodic bandlimited signals.
//!
//! A machine with parameters `(kappa, delta, beta)` integrates `(y + beta) / kappa`
//! from `-delta`; when the integrator reaches `delta` it records a spike and
//! resets to `-delta`. Consecutive spikes `t_l < t_{l+1}` therefore satisfy
//!
//! ```text
//! int_{t_l}^{t_{l+1}} y(u) du = 2 kappa delta - beta (t_{l+1} - t_l)
//! ```
//!
//! The integrator starts at `-delta` at the beginning of the observation
//! window.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sensor::SensorGrid;
use crate::video::{BandlimitedVideo, PixelSignal1D};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemParams {
    pub kappa: f64,
    pub delta: f64,
    pub beta: f64,
}

impl TemParams {
    pub fn new(kappa: f64, delta: f64, beta: f64) -> Result<Self> {
        let params = Self { kappa, delta, beta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::InvalidParams(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidParams(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if !self.beta.is_finite() {
            return Err(Error::NonFinite("beta"));
        }
        Ok(())
    }

    /// `2 kappa delta`, the integral of `y + beta` between consecutive spikes.
    pub fn quantum(&self) -> f64 {
        2.0 * self.kappa * self.delta
    }
}

/// Spike times of one sensor within an observation window.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTrain {
    pub sensor_id: usize,
    times: Vec<f64>,
    window: (f64, f64),
}

impl SpikeTrain {
    pub fn new(sensor_id: usize, times: Vec<f64>, window: (f64, f64)) -> Result<Self> {
        check_window(window)?;
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("spike times"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams(format!(
                "spike times of sensor {sensor_id} are not strictly increasing"
            )));
        }
        if times.iter().any(|&t| t < window.0 || t > window.1) {
            return Err(Error::OutOfRange(format!(
                "spike of sensor {sensor_id} outside window [{}, {}]",
                window.0, window.1
            )));
        }
        Ok(Self {
            sensor_id,
            times,
            window,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn check_window(window: (f64, f64)) -> Result<()> {
    let (start, end) = window;
    if !(start.is_finite() && end.is_finite()) {
        return Err(Error::NonFinite("window"));
    }
    if end <= start {
        return Err(Error::WindowEmpty { start, end });
    }
    Ok(())
}

/// `int_0^t y(u) du` in closed form.
pub fn antiderivative(sig: &PixelSignal1D, t: f64) -> f64 {
    sig.antiderivative(t)
}

/// Conservative positivity check: `beta + c_0 - sum_{k != 0} |c_k| > 0`.
fn check_bias(sig: &PixelSignal1D, beta: f64) -> Result<()> {
    let min_input = sig.dc() - sig.amplitude_bound();
    if beta + min_input <= 0.0 {
        return Err(Error::NonSpikingInput { beta, min_input });
    }
    Ok(())
}

/// Simulates the machine exactly over `window`.
///
/// Spike `n` is the root of `G(t) = n * 2 kappa delta`, where `G` is the
/// closed-form integral of `y + beta` from the window start. `G` is strictly
/// increasing, so each root is bracketed by stepping at most one quantum's
/// worth of time, refined by bisection and polished with a Newton step.
pub fn encode(sig: &PixelSignal1D, params: &TemParams, window: (f64, f64)) -> Result<SpikeTrain> {
    params.validate()?;
    check_window(window)?;
    check_bias(sig, params.beta)?;
    let (start, end) = window;
    let beta = params.beta;
    let y_start = sig.antiderivative(start);
    let g = |t: f64| sig.antiderivative(t) - y_start + beta * (t - start);

    let quantum = params.quantum();
    let max_rate = beta + sig.dc() + sig.amplitude_bound();
    let step = quantum / max_rate;
    let total = g(end);
    // A spike landing exactly on the window end survives rounding.
    let slack = 16.0 * f64::EPSILON * (total.abs() + quantum);
    let resolution = 1e-12 * sig.period();

    let mut times: Vec<f64> = Vec::new();
    let mut lo = start;
    for n in 1usize.. {
        let level = n as f64 * quantum;
        if level > total + slack {
            break;
        }
        let mut hi = lo + step;
        while hi < end && g(hi) < level {
            lo = hi;
            hi += step;
        }
        let mut hi = hi.min(end);
        if g(hi) < level {
            // within slack of the window end
            times.push(end);
            break;
        }
        while hi - lo > resolution {
            let mid = 0.5 * (lo + hi);
            if g(mid) < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut t = 0.5 * (lo + hi);
        let polished = t - (g(t) - level) / (sig.eval(t) + beta);
        if polished.is_finite() && (polished - t).abs() <= resolution {
            t = polished;
        }
        let t = t.clamp(start, end);
        if times.last().is_some_and(|&prev| t <= prev) {
            return Err(Error::Numerical(format!(
                "spike {n} at {t} does not advance past the previous spike"
            )));
        }
        times.push(t);
        if t >= end {
            break;
        }
        lo = t;
    }
    SpikeTrain::new(0, times, window)
}

/// Threshold that makes the machine fire about `target_spikes` times over
/// `window`: `delta = (c_0 + beta) L / (2 kappa target)`.
pub fn calibrate_threshold(
    sig: &PixelSignal1D,
    kappa: f64,
    beta: f64,
    target_spikes: usize,
    window: (f64, f64),
) -> Result<f64> {
    if target_spikes == 0 {
        return Err(Error::InvalidParams(
            "target spike count must be at least 1".into(),
        ));
    }
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::InvalidParams(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    check_window(window)?;
    check_bias(sig, beta)?;
    let length = window.1 - window.0;
    Ok((sig.dc() + beta) * length / (2.0 * kappa * target_spikes as f64))
}

/// Encodes every sensor of `grid`; train `i` carries `sensor_id = i`.
pub fn encode_array(
    video: &BandlimitedVideo,
    grid: &SensorGrid,
    params: &[TemParams],
    window: (f64, f64),
) -> Result<Vec<SpikeTrain>> {
    if params.len() != grid.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} TEM parameter sets for {} sensors",
            params.len(),
            grid.len()
        )));
    }
    grid.directions()
        .par_iter()
        .zip(params.par_iter())
        .enumerate()
        .map(|(i, (dir, p))| {
            let sig = video.pixel_signal(dir.d1(), dir.d2());
            let mut train = encode(&sig, p, window).map_err(|e| e.at_sensor(i))?;
            train.sensor_id = i;
            Ok(train)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn cosine() -> PixelSignal1D {
        PixelSignal1D::new(
            vec![
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_input_spikes_uniformly() {
        let sig = PixelSignal1D::constant(0.0, 2, 1.0);
        let params = TemParams::new(1.0, 0.05, 1.0).unwrap();
        let train = encode(&sig, &params, (0.0, 1.0)).unwrap();
        assert_eq!(train.len(), 10);
        for (n, t) in train.times().iter().enumerate() {
            assert!((t - 0.1 * (n + 1) as f64).abs() < 1e-12, "spike {n} at {t}");
        }
    }

    #[test]
    fn unit_input_halves_spacing() {
        let sig = PixelSignal1D::constant(1.0, 2, 1.0);
        let params = TemParams::new(1.0, 0.05, 1.0).unwrap();
        let train = encode(&sig, &params, (0.0, 1.0)).unwrap();
        assert_eq!(train.len(), 20);
        for w in train.times().windows(2) {
            assert!((w[1] - w[0] - 0.05).abs() < 1e-12);
        }
    }

    #[test]
    fn encode_errors() {
        let sig = cosine();
        let params = TemParams::new(1.0, 0.05, 0.5).unwrap();
        assert!(matches!(
            encode(&sig, &params, (0.0, 1.0)),
            Err(Error::NonSpikingInput { .. })
        ));
        let params = TemParams::new(1.0, 0.05, 2.0).unwrap();
        assert!(matches!(
            encode(&sig, &params, (1.0, 1.0)),
            Err(Error::WindowEmpty { .. })
        ));
        assert!(TemParams::new(0.0, 0.1, 1.0).is_err());
        assert!(TemParams::new(1.0, -0.1, 1.0).is_err());
    }

    #[test]
    fn pair_integrals_match_quantum() {
        let sig = cosine();
        let params = TemParams::new(0.7, 0.03, 1.5).unwrap();
        let train = encode(&sig, &params, (0.2, 2.3)).unwrap();
        assert!(train.len() > 10);
        for w in train.times().windows(2) {
            let lhs = sig.integral(w[0], w[1]) + params.beta * (w[1] - w[0]);
            assert!((lhs - params.quantum()).abs() < 1e-12 * params.quantum());
        }
    }

    #[test]
    fn calibration_examples() {
        let sig = PixelSignal1D::constant(0.0, 1, 1.0);
        let d = calibrate_threshold(&sig, 1.0, 1.0, 10, (0.0, 1.0)).unwrap();
        assert!((d - 0.05).abs() < 1e-15);
        let d2 = calibrate_threshold(&sig, 1.0, 1.0, 20, (0.0, 1.0)).unwrap();
        assert!((d2 - d / 2.0).abs() < 1e-15);
        assert!(calibrate_threshold(&sig, 1.0, 1.0, 0, (0.0, 1.0)).is_err());
        assert!(matches!(
            calibrate_threshold(&sig, 1.0, -1.0, 3, (0.0, 1.0)),
            Err(Error::NonSpikingInput { .. })
        ));
    }

    #[test]
    fn spike_train_validation() {
        assert!(SpikeTrain::new(0, vec![0.1, 0.1], (0.0, 1.0)).is_err());
        assert!(SpikeTrain::new(0, vec![0.1, 1.5], (0.0, 1.0)).is_err());
        assert!(SpikeTrain::new(0, vec![], (0.0, 1.0)).is_ok());
    }
}

//! Threshold-calibrated encoding and the grid-size / spike-rate sweeps.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::reconstruct::{reconstruct, DEFAULT_RCOND};
use crate::sensor::{feasibility, uniform_grid, SensorGrid};
use crate::tem::{calibrate_threshold, encode, SpikeTrain, TemParams};
use crate::video::{random_video, BandlimitParams, BandlimitedVideo};

/// Bias that keeps every sensor's input positive: `1 + sum |c|`.
pub fn default_bias(video: &BandlimitedVideo) -> f64 {
    1.0 + video.amplitude_bound()
}

/// Encodes every sensor with its threshold calibrated to `target_spikes`
/// spikes over `window`. `beta` defaults to [`default_bias`].
pub fn calibrated_encode(
    video: &BandlimitedVideo,
    grid: &SensorGrid,
    kappa: f64,
    beta: Option<f64>,
    target_spikes: usize,
    window: (f64, f64),
) -> Result<(Vec<SpikeTrain>, Vec<TemParams>)> {
    let beta = beta.unwrap_or_else(|| default_bias(video));
    let per_sensor: Vec<(SpikeTrain, TemParams)> = grid
        .directions()
        .par_iter()
        .enumerate()
        .map(|(i, dir)| {
            let sig = video.pixel_signal(dir.d1(), dir.d2());
            let delta = calibrate_threshold(&sig, kappa, beta, target_spikes, window)
                .map_err(|e| e.at_sensor(i))?;
            let params = TemParams::new(kappa, delta, beta).map_err(|e| e.at_sensor(i))?;
            let mut train = encode(&sig, &params, window).map_err(|e| e.at_sensor(i))?;
            train.sensor_id = i;
            Ok((train, params))
        })
        .collect::<Result<_>>()?;
    Ok(per_sensor.into_iter().unzip())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Fixed grids, varying spike pairs per sensor.
    Spikes,
    /// Fixed spike pairs per sensor, varying grids.
    Tems,
}

impl SweepMode {
    pub fn default_grids(self) -> Vec<(usize, usize)> {
        match self {
            SweepMode::Spikes => vec![(9, 5), (9, 9), (9, 15)],
            SweepMode::Tems => (5..=15).map(|n| (n, n)).collect(),
        }
    }

    pub fn default_pair_targets(self) -> Vec<usize> {
        match self {
            SweepMode::Spikes => (1..=15).collect(),
            SweepMode::Tems => vec![5, 9, 15],
        }
    }
}

impl std::str::FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spikes" | "sweep_spikes" => Ok(SweepMode::Spikes),
            "tems" | "sweep_tems" => Ok(SweepMode::Tems),
            other => Err(Error::Parse(format!("unknown sweep mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub mode: SweepMode,
    pub grids: Vec<(usize, usize)>,
    /// Spike pairs per sensor; each sensor is calibrated to `pairs + 1` spikes.
    pub pair_targets: Vec<usize>,
    pub params: BandlimitParams,
    pub kappa: f64,
    /// `None` uses [`default_bias`].
    pub beta: Option<f64>,
    pub seed: u64,
    pub rcond: f64,
    /// `None` observes one period `[0, T]`.
    pub window: Option<(f64, f64)>,
    /// When false, `wall_time_s` is written as zero so output bytes depend
    /// only on the configuration.
    pub record_timing: bool,
}

impl SweepConfig {
    /// The default experiment for `mode` on a `9 x 9 x 9` coefficient scene.
    pub fn new(mode: SweepMode) -> Self {
        Self {
            mode,
            grids: mode.default_grids(),
            pair_targets: mode.default_pair_targets(),
            params: BandlimitParams::cube(4),
            kappa: 1.0,
            beta: None,
            seed: 0,
            rcond: DEFAULT_RCOND,
            window: None,
            record_timing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.grids.is_empty() || self.pair_targets.is_empty() {
            return Err(Error::InvalidParams(
                "sweep needs at least one grid and one target".into(),
            ));
        }
        if self.grids.iter().any(|&(a, b)| a == 0 || b == 0) {
            return Err(Error::InvalidParams("grid sizes must be positive".into()));
        }
        if self.pair_targets.contains(&0) {
            return Err(Error::InvalidParams(
                "spike-pair targets must be positive".into(),
            ));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::InvalidParams(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    pub fn window(&self) -> (f64, f64) {
        self.window.unwrap_or((0.0, self.params.period_t))
    }
}

/// One `(grid, target)` cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub grid_n1: usize,
    pub grid_n2: usize,
    pub spike_pairs_target: usize,
    pub useful_pairs: usize,
    pub condition_strict: bool,
    pub condition_nonstrict: bool,
    pub rank: usize,
    pub relative_mse: f64,
    pub wall_time_s: f64,
    /// Why the cell failed, if it did. Failed cells carry `NaN` error.
    pub error: Option<String>,
}

pub const SWEEP_HEADER: &str = "grid_n1,grid_n2,spike_pairs_target,useful_pairs,condition_strict,condition_nonstrict,rank,relative_mse,wall_time_s";

/// Encodes `video` on an `n1 x n2` grid at `pairs + 1` spikes per sensor and
/// reconstructs.
pub fn run_cell(
    video: &BandlimitedVideo,
    n1: usize,
    n2: usize,
    pairs: usize,
    config: &SweepConfig,
) -> SweepRecord {
    let start = Instant::now();
    let outcome = (|| {
        let grid = uniform_grid(n1, n2, config.params)?;
        let (trains, params) = calibrated_encode(
            video,
            &grid,
            config.kappa,
            config.beta,
            pairs + 1,
            config.window(),
        )?;
        let counts: Vec<usize> = trains.iter().map(SpikeTrain::len).collect();
        let (jn, kn) = (
            config.params.spatial_count(),
            config.params.temporal_count(),
        );
        let strict = feasibility(&counts, jn, kn, true);
        let loose = feasibility(&counts, jn, kn, false);
        let mut report = reconstruct(&grid, &trains, &params, config.rcond)?;
        let mse = report.score_against(video.coefficients())?;
        Ok::<_, Error>((strict, loose, report.rank, mse))
    })();
    let wall_time_s = if config.record_timing {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    };
    let mut record = SweepRecord {
        grid_n1: n1,
        grid_n2: n2,
        spike_pairs_target: pairs,
        useful_pairs: 0,
        condition_strict: false,
        condition_nonstrict: false,
        rank: 0,
        relative_mse: f64::NAN,
        wall_time_s,
        error: None,
    };
    match outcome {
        Ok((strict, loose, rank, mse)) => {
            record.useful_pairs = strict.useful_pairs;
            record.condition_strict = strict.satisfied;
            record.condition_nonstrict = loose.satisfied;
            record.rank = rank;
            record.relative_mse = mse;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// Runs every `(grid, target)` cell on one random scene drawn from `seed`.
/// Records come back ordered by grid, then target. Cell failures are kept
/// in the record rather than aborting the sweep.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let video = random_video(config.params, config.seed)?;
    sweep_video(&video, config)
}

/// [`run_sweep`] on a given scene.
pub fn sweep_video(video: &BandlimitedVideo, config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    if video.params().dims() != config.params.dims() {
        return Err(Error::ShapeMismatch(
            "video bandwidths differ from sweep config".into(),
        ));
    }
    let cells: Vec<(usize, usize, usize)> = config
        .grids
        .iter()
        .flat_map(|&(n1, n2)| config.pair_targets.iter().map(move |&p| (n1, n2, p)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(n1, n2, p)| run_cell(video, n1, n2, p, config))
        .collect())
}

pub fn write_sweep_csv<W: Write>(mut w: W, records: &[SweepRecord]) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.grid_n1,
            r.grid_n2,
            r.spike_pairs_target,
            r.useful_pairs,
            r.condition_strict,
            r.condition_nonstrict,
            r.rank,
            fmt_f64(r.relative_mse),
            fmt_f64(r.wall_time_s)
        )?;
    }
    Ok(())
}

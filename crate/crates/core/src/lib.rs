//! Time encoding of periodic bandlimited video with arrays of integrate-and-fire
//! sensors, and exact reconstruction of the video from the spike times.
//!
//! The pipeline is:
//!
//! 1. [`video`]: a scene is a finite 3D Fourier series over periods `(T, D1, D2)`.
//! 2. [`sensor`]: each sensor watches one spatial direction; its input is a 1D
//!    periodic bandlimited signal, a known mixture of per-spatial-frequency
//!    proxy signals.
//! 3. [`tem`]: each sensor integrates its biased input and fires whenever the
//!    integral hits the threshold.
//! 4. [`reconstruct`]: consecutive spike pairs give linear constraints on the
//!    Fourier coefficients; stacking them gives a rank-one sensing system that
//!    is solved by truncated SVD.
//! 5. [`harness`]: parameter sweeps over grid size and spike rate.

pub mod error;
pub mod harness;
pub mod io;
pub mod reconstruct;
pub mod sensor;
pub mod tem;
pub mod video;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use reconstruct::{
    assemble_system, coefficient_mse, forward_block, measurements_from_spikes, reconstruct, solve,
    ForwardBlock, LinearSystem, Measurement, ReconstructionReport, DEFAULT_RCOND,
};
pub use sensor::{
    build_mixing, feasibility, full_rank_check, subset_independence_check, uniform_grid,
    Feasibility, IndexMap, MixingMatrix, RankCheck, SensorDirection, SensorGrid,
};
pub use tem::{antiderivative, calibrate_threshold, encode, encode_array, SpikeTrain, TemParams};
pub use video::{
    eval_video, from_frames, pixel_signal, proxy_coefficients, random_video, render,
    BandlimitParams, BandlimitedVideo, CoefficientTensor, FrameCube, PixelSignal1D,
};

/// Re-exported so callers can work with mixing matrices and system rows.
pub use faer;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vtem::harness::{calibrated_encode, run_sweep, write_sweep_csv, SweepConfig, SweepMode};
use vtem::io::{
    read_frames_csv, read_grid_csv, read_spikes_csv, report_to_json, tensor_to_json,
    video_from_json, write_grid_csv, write_spikes_csv,
};
use vtem::{
    from_frames, random_video, reconstruct, uniform_grid, BandlimitParams, Error, Result,
    SensorGrid, DEFAULT_RCOND,
};

#[derive(Parser)]
#[command(
    name = "vtem",
    version,
    about = "Time encoding and reconstruction of bandlimited video"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random real scene and write its coefficient JSON.
    Synth {
        #[command(flatten)]
        band: Band,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a scene to a frame-cube CSV (odd dimensions).
    Ingest {
        frames: PathBuf,
        /// Override the periods in the CSV header.
        #[arg(long, value_parser = parse_triple)]
        periods: Option<(f64, f64, f64)>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a scene with a grid of calibrated integrate-and-fire sensors.
    Encode {
        video: PathBuf,
        /// `N1xN2` for a uniform grid, or a `sensor_id,d1,d2` CSV file.
        #[arg(long)]
        grid: String,
        /// Target spikes per sensor.
        #[arg(long)]
        spikes: usize,
        #[arg(long, value_parser = parse_pair)]
        window: Option<(f64, f64)>,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Defaults to one plus the scene's amplitude bound.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the sensor directions.
        #[arg(long)]
        grid_out: Option<PathBuf>,
    },
    /// Recover the coefficients from a spike CSV.
    Reconstruct {
        spikes: PathBuf,
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        band: Band,
        #[arg(long, default_value_t = DEFAULT_RCOND)]
        rcond: f64,
        /// Ground-truth coefficient JSON; adds the relative error to the report.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Report JSON.
        #[arg(long)]
        out: PathBuf,
        /// Coefficient JSON; defaults to the report path with `.coeffs.json`.
        #[arg(long)]
        coeffs_out: Option<PathBuf>,
    },
    /// Sweep grid sizes and spike rates, writing one CSV row per cell.
    Sweep {
        #[arg(long, default_value = "spikes")]
        mode: SweepMode,
        /// Comma-separated `N1xN2` list; defaults depend on the mode.
        #[arg(long)]
        grids: Option<String>,
        /// Spike pairs per sensor: `a-b` or a comma-separated list.
        #[arg(long)]
        targets: Option<String>,
        #[command(flatten)]
        band: Band,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_RCOND)]
        rcond: f64,
        #[arg(long, value_parser = parse_pair)]
        window: Option<(f64, f64)>,
        /// Write zero wall times so the CSV is byte-reproducible.
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Band {
    #[arg(long, default_value_t = 4)]
    k0: usize,
    #[arg(long, default_value_t = 4)]
    k1: usize,
    #[arg(long, default_value_t = 4)]
    k2: usize,
    /// `T,D1,D2`.
    #[arg(long, value_parser = parse_triple, default_value = "1,1,1")]
    periods: (f64, f64, f64),
}

impl Band {
    fn params(&self) -> Result<BandlimitParams> {
        let (t, d1, d2) = self.periods;
        BandlimitParams::new(self.k0, self.k1, self.k2, t, d1, d2)
    }
}

fn parse_floats(s: &str, n: usize) -> std::result::Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != n {
        return Err(format!(
            "expected {n} comma-separated numbers, got {}",
            v.len()
        ));
    }
    Ok(v)
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let v = parse_floats(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_triple(s: &str) -> std::result::Result<(f64, f64, f64), String> {
    let v = parse_floats(s, 3)?;
    Ok((v[0], v[1], v[2]))
}

fn parse_grid_size(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::Parse(format!("grid {s:?} is not N1xN2")))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("grid {s:?} is not N1xN2")))
    };
    Ok((parse(a)?, parse(b)?))
}

fn parse_targets(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("bad target list {s:?}"));
    if let Some((a, b)) = s.split_once('-') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect()
}

fn load_grid(grid_arg: &str, params: BandlimitParams) -> Result<SensorGrid> {
    if Path::new(grid_arg).is_file() {
        return read_grid_csv(BufReader::new(File::open(grid_arg)?), params);
    }
    let (n1, n2) = parse_grid_size(grid_arg)?;
    uniform_grid(n1, n2, params)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { band, seed, out } => {
            let video = random_video(band.params()?, seed)?;
            write_text(&out, &tensor_to_json(video.coefficients())?)
        }
        Command::Ingest {
            frames,
            periods,
            out,
        } => {
            let file = read_frames_csv(BufReader::new(File::open(frames)?))?;
            let (t, d1, d2) = periods.unwrap_or((file.period_t, file.period_d1, file.period_d2));
            let video = from_frames(&file.frames, t, d1, d2)?;
            write_text(&out, &tensor_to_json(video.coefficients())?)
        }
        Command::Encode {
            video,
            grid,
            spikes,
            window,
            kappa,
            beta,
            out,
            grid_out,
        } => {
            let video = video_from_json(&std::fs::read_to_string(video)?)?;
            let grid = load_grid(&grid, *video.params())?;
            let window = window.unwrap_or((0.0, video.params().period_t));
            let (trains, params) = calibrated_encode(&video, &grid, kappa, beta, spikes, window)?;
            let mut w = BufWriter::new(File::create(out)?);
            write_spikes_csv(&mut w, &trains, &params)?;
            w.flush()?;
            if let Some(path) = grid_out {
                let mut w = BufWriter::new(File::create(path)?);
                write_grid_csv(&mut w, &grid)?;
                w.flush()?;
            }
            Ok(())
        }
        Command::Reconstruct {
            spikes,
            grid,
            band,
            rcond,
            truth,
            out,
            coeffs_out,
        } => {
            let params = band.params()?;
            let file = read_spikes_csv(BufReader::new(File::open(spikes)?))?;
            let grid = load_grid(&grid, params)?;
            let mut report = reconstruct(&grid, &file.trains, &file.params, rcond)?;
            if let Some(truth) = truth {
                let truth = video_from_json(&std::fs::read_to_string(truth)?)?;
                report.score_against(truth.coefficients())?;
            }
            write_text(&out, &report_to_json(&report)?)?;
            let coeffs_out = coeffs_out.unwrap_or_else(|| out.with_extension("coeffs.json"));
            write_text(&coeffs_out, &tensor_to_json(&report.estimate)?)
        }
        Command::Sweep {
            mode,
            grids,
            targets,
            band,
            seed,
            kappa,
            beta,
            rcond,
            window,
            no_timing,
            out,
        } => {
            let mut config = SweepConfig::new(mode);
            if let Some(grids) = grids {
                config.grids = grids
                    .split(',')
                    .map(parse_grid_size)
                    .collect::<Result<_>>()?;
            }
            if let Some(targets) = targets {
                config.pair_targets = parse_targets(&targets)?;
            }
            config.params = band.params()?;
            config.seed = seed;
            config.kappa = kappa;
            config.beta = beta;
            config.rcond = rcond;
            config.window = window;
            config.record_timing = !no_timing;
            let records = run_sweep(&config)?;
            for r in records.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "warning: cell {}x{} @ {} pairs failed: {}",
                    r.grid_n1,
                    r.grid_n2,
                    r.spike_pairs_target,
                    r.error.as_deref().unwrap_or_default()
                );
            }
            let mut w = BufWriter::new(File::create(out)?);
            write_sweep_csv(&mut w, &records)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

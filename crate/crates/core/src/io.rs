//! On-disk formats: coefficient-tensor JSON, frame-cube CSV, spike CSV, grid
//! CSV and the reconstruction report.
//!
//! Floats are written with 17 significant digits so every file round-trips
//! bitwise.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reconstruct::ReconstructionReport;
use crate::sensor::SensorGrid;
use crate::tem::{SpikeTrain, TemParams};
use crate::video::{BandlimitParams, BandlimitedVideo, CoefficientTensor, FrameCube};

/// `v` with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// JSON formatter that writes every float with 17 significant digits.
struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    #[serde(rename = "K0")]
    k0: usize,
    #[serde(rename = "K1")]
    k1: usize,
    #[serde(rename = "K2")]
    k2: usize,
    #[serde(rename = "T")]
    period_t: f64,
    #[serde(rename = "D1")]
    period_d1: f64,
    #[serde(rename = "D2")]
    period_d2: f64,
    re: Vec<f64>,
    im: Vec<f64>,
}

pub fn tensor_to_json(tensor: &CoefficientTensor) -> Result<String> {
    let p = tensor.params();
    to_json(&TensorJson {
        k0: p.k0,
        k1: p.k1,
        k2: p.k2,
        period_t: p.period_t,
        period_d1: p.period_d1,
        period_d2: p.period_d2,
        re: tensor.values().iter().map(|v| v.re).collect(),
        im: tensor.values().iter().map(|v| v.im).collect(),
    })
}

/// Parses a tensor; `real` requests the conjugate-symmetry check.
pub fn tensor_from_json(text: &str, real: bool) -> Result<CoefficientTensor> {
    let raw: TensorJson = serde_json::from_str(text)?;
    if raw.re.len() != raw.im.len() {
        return Err(Error::Parse(format!(
            "re has {} entries but im has {}",
            raw.re.len(),
            raw.im.len()
        )));
    }
    let params = BandlimitParams::new(
        raw.k0,
        raw.k1,
        raw.k2,
        raw.period_t,
        raw.period_d1,
        raw.period_d2,
    )?;
    let values = raw
        .re
        .iter()
        .zip(&raw.im)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    CoefficientTensor::from_values(params, values, real)
}

pub fn video_from_json(text: &str) -> Result<BandlimitedVideo> {
    BandlimitedVideo::new(tensor_from_json(text, true)?)
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} {field:?}")))
}

fn parse_usize(field: &str, what: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} {field:?}")))
}

/// Frame cube plus the periods from its header line.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFile {
    pub frames: FrameCube,
    pub period_t: f64,
    pub period_d1: f64,
    pub period_d2: f64,
}

/// Reads a frame cube: a header `n1,n2,nt,T,D1,D2` (optionally preceded by a
/// line naming those columns), then `nt` blocks of `n1` rows with `n2`
/// columns each. Blank lines and `#` comments are ignored.
pub fn read_frames_csv<R: BufRead>(reader: R) -> Result<FrameFile> {
    let mut lines = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        lines.push(trimmed.to_string());
    }
    let mut it = lines.into_iter();
    let mut header = it
        .next()
        .ok_or_else(|| Error::Parse("empty frame file".into()))?;
    if header
        .replace(' ', "")
        .eq_ignore_ascii_case("n1,n2,nt,T,D1,D2")
    {
        header = it
            .next()
            .ok_or_else(|| Error::Parse("frame file has no header values".into()))?;
    }
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() != 6 {
        return Err(Error::Parse(format!(
            "header needs 6 fields, got {header:?}"
        )));
    }
    let n1 = parse_usize(fields[0], "n1")?;
    let n2 = parse_usize(fields[1], "n2")?;
    let nt = parse_usize(fields[2], "nt")?;
    let period_t = parse_f64(fields[3], "T")?;
    let period_d1 = parse_f64(fields[4], "D1")?;
    let period_d2 = parse_f64(fields[5], "D2")?;

    let rows: Vec<String> = it.collect();
    if rows.len() != n1 * nt {
        return Err(Error::Parse(format!(
            "expected {} data rows ({nt} frames of {n1}), found {}",
            n1 * nt,
            rows.len()
        )));
    }
    let mut data = vec![0.0; n1 * n2 * nt];
    for (line_no, row) in rows.iter().enumerate() {
        let (r, p) = (line_no / n1, line_no % n1);
        let values: Vec<&str> = row.split(',').collect();
        if values.len() != n2 {
            return Err(Error::Parse(format!(
                "frame {r} row {p} has {} columns, expected {n2}",
                values.len()
            )));
        }
        for (q, v) in values.iter().enumerate() {
            data[(p * n2 + q) * nt + r] = parse_f64(v, "pixel value")?;
        }
    }
    Ok(FrameFile {
        frames: FrameCube::new(n1, n2, nt, data)?,
        period_t,
        period_d1,
        period_d2,
    })
}

pub fn write_frames_csv<W: Write>(
    mut w: W,
    frames: &FrameCube,
    period_t: f64,
    period_d1: f64,
    period_d2: f64,
) -> Result<()> {
    let [n1, n2, nt] = frames.dims();
    writeln!(
        w,
        "{n1},{n2},{nt},{},{},{}",
        fmt_f64(period_t),
        fmt_f64(period_d1),
        fmt_f64(period_d2)
    )?;
    for r in 0..nt {
        for p in 0..n1 {
            let row: Vec<String> = (0..n2).map(|q| fmt_f64(frames.get(p, q, r))).collect();
            writeln!(w, "{}", row.join(","))?;
        }
    }
    Ok(())
}

/// Spike trains together with the TEM parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeFile {
    pub trains: Vec<SpikeTrain>,
    pub params: Vec<TemParams>,
}

/// Writes `sensor_id,spike_time` rows; each sensor's block is introduced by
/// `# sensor=..,kappa=..,delta=..,beta=..,t0=..,t1=..`.
pub fn write_spikes_csv<W: Write>(
    mut w: W,
    trains: &[SpikeTrain],
    params: &[TemParams],
) -> Result<()> {
    if trains.len() != params.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} trains but {} parameter sets",
            trains.len(),
            params.len()
        )));
    }
    writeln!(w, "sensor_id,spike_time")?;
    for (train, p) in trains.iter().zip(params) {
        let (t0, t1) = train.window();
        writeln!(
            w,
            "# sensor={},kappa={},delta={},beta={},t0={},t1={}",
            train.sensor_id,
            fmt_f64(p.kappa),
            fmt_f64(p.delta),
            fmt_f64(p.beta),
            fmt_f64(t0),
            fmt_f64(t1)
        )?;
        for t in train.times() {
            writeln!(w, "{},{}", train.sensor_id, fmt_f64(*t))?;
        }
    }
    Ok(())
}

struct BlockHeader {
    params: TemParams,
    window: (f64, f64),
}

fn parse_block_header(line: &str) -> Result<(usize, BlockHeader)> {
    let mut kv = BTreeMap::new();
    for part in line.trim_start_matches('#').split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad sensor header field {part:?}")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |key: &str| {
        kv.get(key)
            .ok_or_else(|| Error::Parse(format!("sensor header missing {key}: {line:?}")))
    };
    let sensor = parse_usize(get("sensor")?, "sensor id")?;
    let params = TemParams {
        kappa: parse_f64(get("kappa")?, "kappa")?,
        delta: parse_f64(get("delta")?, "delta")?,
        beta: parse_f64(get("beta")?, "beta")?,
    };
    params.validate()?;
    let window = (parse_f64(get("t0")?, "t0")?, parse_f64(get("t1")?, "t1")?);
    Ok((sensor, BlockHeader { params, window }))
}

/// Reads the format written by [`write_spikes_csv`]. Trains come back in file
/// order; every spike row must follow the header of its own sensor.
pub fn read_spikes_csv<R: BufRead>(reader: R) -> Result<SpikeFile> {
    let mut blocks: Vec<(usize, BlockHeader, Vec<f64>)> = Vec::new();
    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.eq_ignore_ascii_case("sensor_id,spike_time") {
            continue;
        }
        if trimmed.starts_with('#') {
            let (sensor, header) = parse_block_header(trimmed)?;
            if blocks.iter().any(|(s, _, _)| *s == sensor) {
                return Err(Error::Parse(format!("sensor {sensor} appears twice")));
            }
            blocks.push((sensor, header, Vec::new()));
            continue;
        }
        let (id, time) = trimmed.split_once(',').ok_or_else(|| {
            Error::Parse(format!("line {}: expected sensor_id,spike_time", no + 1))
        })?;
        let id = parse_usize(id, "sensor id")?;
        let time = parse_f64(time, "spike time")?;
        match blocks.last_mut() {
            Some((sensor, _, times)) if *sensor == id => times.push(time),
            _ => {
                return Err(Error::Parse(format!(
                    "line {}: spike for sensor {id} outside its parameter block",
                    no + 1
                )))
            }
        }
    }
    let mut trains = Vec::with_capacity(blocks.len());
    let mut params = Vec::with_capacity(blocks.len());
    for (sensor, header, times) in blocks {
        trains.push(SpikeTrain::new(sensor, times, header.window)?);
        params.push(header.params);
    }
    Ok(SpikeFile { trains, params })
}

pub fn write_grid_csv<W: Write>(mut w: W, grid: &SensorGrid) -> Result<()> {
    writeln!(w, "sensor_id,d1,d2")?;
    for (i, d) in grid.directions().iter().enumerate() {
        writeln!(w, "{i},{},{}", fmt_f64(d.d1()), fmt_f64(d.d2()))?;
    }
    Ok(())
}

/// Reads `sensor_id,d1,d2` rows; ids must run `0..I` in order.
pub fn read_grid_csv<R: BufRead>(reader: R, params: BandlimitParams) -> Result<SensorGrid> {
    let mut points = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty()
            || trimmed.starts_with('#')
            || trimmed.eq_ignore_ascii_case("sensor_id,d1,d2")
        {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!(
                "grid row needs 3 fields: {trimmed:?}"
            )));
        }
        let id = parse_usize(fields[0], "sensor id")?;
        if id != points.len() {
            return Err(Error::Parse(format!(
                "grid sensor ids must be 0..I in order, got {id}"
            )));
        }
        points.push((parse_f64(fields[1], "d1")?, parse_f64(fields[2], "d2")?));
    }
    SensorGrid::from_points(&points, params)
}

#[derive(Serialize)]
struct ReportJson {
    rank: usize,
    residual_norm: f64,
    relative_coeff_mse: Option<f64>,
    condition_estimate: f64,
    unknowns: usize,
    measurements: usize,
}

/// Summary numbers of a reconstruction; the estimate itself goes through
/// [`tensor_to_json`]. Infinite condition numbers are written as `null`.
pub fn report_to_json(report: &ReconstructionReport) -> Result<String> {
    to_json(&ReportJson {
        rank: report.rank,
        residual_norm: report.residual_norm,
        relative_coeff_mse: report.relative_coeff_mse,
        condition_estimate: report.condition_estimate,
        unknowns: report.unknowns,
        measurements: report.measurements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::video::random_video;

    #[test]
    fn tensor_json_roundtrips_bitwise() {
        let params = BandlimitParams::new(1, 2, 0, 0.5, 2.0, 3.0).unwrap();
        let v = random_video(params, 21).unwrap();
        let text = tensor_to_json(v.coefficients()).unwrap();
        assert!(text.contains("\"K0\":1") && text.contains("\"re\":["));
        let back = video_from_json(&text).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn frames_csv_roundtrip_and_named_header() {
        let cube = FrameCube::from_fn(3, 5, 3, |p, q, r| (p * 100 + q * 10 + r) as f64 * 0.5);
        let mut buf = Vec::new();
        write_frames_csv(&mut buf, &cube, 1.0, 2.0, 3.0).unwrap();
        let back = read_frames_csv(buf.as_slice()).unwrap();
        assert_eq!(back.frames, cube);
        assert_eq!(
            (back.period_t, back.period_d1, back.period_d2),
            (1.0, 2.0, 3.0)
        );

        let text = "n1,n2,nt,T,D1,D2\n1,1,1,1,1,1\n4.5\n";
        let f = read_frames_csv(text.as_bytes()).unwrap();
        assert_eq!(f.frames.data(), &[4.5]);
    }

    #[test]
    fn frames_csv_rejects_bad_shapes() {
        assert!(matches!(
            read_frames_csv("1,1,2,1,1,1\n1\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            read_frames_csv("1,2,1,1,1,1\n1\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            read_frames_csv("".as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn spikes_csv_roundtrip() {
        let trains = vec![
            SpikeTrain::new(0, vec![0.1, 0.30000000000000004, 0.9], (0.0, 1.0)).unwrap(),
            SpikeTrain::new(1, vec![], (0.0, 1.0)).unwrap(),
        ];
        let params = vec![
            TemParams::new(1.0, 0.05, 2.5).unwrap(),
            TemParams::new(1.0, 0.07, 2.5).unwrap(),
        ];
        let mut buf = Vec::new();
        write_spikes_csv(&mut buf, &trains, &params).unwrap();
        let back = read_spikes_csv(buf.as_slice()).unwrap();
        assert_eq!(back.trains, trains);
        assert_eq!(back.params, params);
    }

    #[test]
    fn malformed_spikes_csv() {
        let orphan = "sensor_id,spike_time\n0,0.5\n";
        assert!(matches!(
            read_spikes_csv(orphan.as_bytes()),
            Err(Error::Parse(_))
        ));
        let garbage = "# sensor=0,kappa=1,delta=0.1,beta=1,t0=0,t1=1\n0,abc\n";
        assert!(matches!(
            read_spikes_csv(garbage.as_bytes()),
            Err(Error::Parse(_))
        ));
        let missing = "# sensor=0,kappa=1,beta=1,t0=0,t1=1\n";
        assert!(matches!(
            read_spikes_csv(missing.as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn grid_csv_roundtrip() {
        let params = BandlimitParams::cube(1);
        let grid = crate::sensor::uniform_grid(2, 3, params).unwrap();
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &grid).unwrap();
        assert_eq!(read_grid_csv(buf.as_slice(), params).unwrap(), grid);
    }
}

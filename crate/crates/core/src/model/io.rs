//! CSV form of a [`SimulationRecord`]: `time,w,y,accepted,bid_level` plus a
//! `key=value` sidecar with the same stem and extension `.meta`.

use std::path::{Path, PathBuf};

use super::{ModelParams, ResponseKind, SimulationRecord};
use crate::error::{Error, Result};
use crate::kv::{self, KeyValues};

pub const RECORD_HEADER: [&str; 5] = ["time", "w", "y", "accepted", "bid_level"];

pub fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta")
}

pub fn record_metadata(rec: &SimulationRecord) -> KeyValues {
    let p = &rec.params;
    let mut m = KeyValues::new();
    m.insert("sigma".into(), p.sigma.to_string());
    m.insert("mu".into(), p.mu.to_string());
    m.insert("horizon".into(), p.horizon.to_string());
    m.insert("bins".into(), p.bins.to_string());
    m.insert("p0".into(), p.p0.to_string());
    m.insert("seed".into(), p.seed.to_string());
    m.insert("u0".into(), rec.u0.to_string());
    m.insert("response".into(), rec.response.to_string());
    m
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(|e| csv_error(path, e))
}

pub(crate) fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(|e| csv_error(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse { path: path.to_path_buf(), line, message: format!("{other:?}") },
    }
}

pub(crate) fn parse_field<T: std::str::FromStr>(
    path: &Path,
    row: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<T> {
    let line = row.position().map(|p| p.line()).unwrap_or(0);
    let raw = row.get(idx).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("missing column `{name}`"),
    })?;
    raw.trim().parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("cannot parse `{raw}` as {name}"),
    })
}

/// Writes the record CSV and its metadata sidecar.
pub fn write_record(rec: &SimulationRecord, csv_path: &Path) -> Result<()> {
    let mut w = csv_writer(csv_path)?;
    let wrap = |e: csv::Error| csv_error(csv_path, e);
    w.write_record(RECORD_HEADER).map_err(wrap)?;
    let mut event = 0;
    for i in 0..rec.skeleton_times.len() {
        let accepted = rec.accepted[i];
        let bid = if accepted {
            let b = rec.bid_levels[event].to_string();
            event += 1;
            b
        } else {
            String::new()
        };
        w.write_record([
            rec.skeleton_times[i].to_string(),
            rec.w_values[i].to_string(),
            rec.y_values[i].to_string(),
            u8::from(accepted).to_string(),
            bid,
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(csv_path, e))?;
    kv::write(&meta_path(csv_path), &record_metadata(rec))
}

/// Reads a record written by [`write_record`].
pub fn read_record(csv_path: &Path) -> Result<SimulationRecord> {
    let meta = kv::read(&meta_path(csv_path))?;
    let params = ModelParams {
        sigma: kv::get(&meta, "sigma")?,
        mu: kv::get(&meta, "mu")?,
        horizon: kv::get(&meta, "horizon")?,
        bins: kv::get(&meta, "bins")?,
        p0: kv::get(&meta, "p0")?,
        seed: kv::get(&meta, "seed")?,
    };
    let response: ResponseKind = kv::get::<String>(&meta, "response")?.parse()?;
    let mut rec = SimulationRecord {
        params,
        response,
        u0: kv::get(&meta, "u0")?,
        skeleton_times: Vec::new(),
        w_values: Vec::new(),
        y_values: Vec::new(),
        accepted: Vec::new(),
        event_times: Vec::new(),
        bid_levels: Vec::new(),
    };
    let mut r = csv_reader(csv_path)?;
    check_header(csv_path, &mut r, &RECORD_HEADER)?;
    for row in r.records() {
        let row = row.map_err(|e| csv_error(csv_path, e))?;
        let t: f64 = parse_field(csv_path, &row, 0, "time")?;
        rec.skeleton_times.push(t);
        rec.w_values.push(parse_field(csv_path, &row, 1, "w")?);
        rec.y_values.push(parse_field(csv_path, &row, 2, "y")?);
        let accepted = parse_field::<u8>(csv_path, &row, 3, "accepted")? == 1;
        rec.accepted.push(accepted);
        if accepted {
            rec.event_times.push(t);
            rec.bid_levels.push(parse_field(csv_path, &row, 4, "bid_level")?);
        }
    }
    Ok(rec)
}

pub(crate) fn check_header<R: std::io::Read>(path: &Path, r: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let headers = r.headers().map_err(|e| csv_error(path, e))?;
    if headers.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header `{}`", expected.join(",")),
        });
    }
    Ok(())
}

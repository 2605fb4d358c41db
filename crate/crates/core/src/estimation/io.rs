//! Event-stream input and estimate output.
//!
//! Input is either a simulation record CSV (`time,w,y,accepted,bid_level`, only
//! accepted rows are kept) or a minimal `time[,bid_level]` CSV. The horizon
//! comes from the `horizon` key of the `.meta` sidecar unless given explicitly.

use std::path::Path;

use super::{EstimationResult, EventStream};
use crate::error::{Error, Result};
use crate::kv;
use crate::model::io::{csv_error, csv_reader, csv_writer, meta_path, parse_field, RECORD_HEADER};

pub fn read_event_stream(path: &Path, horizon: Option<f64>) -> Result<EventStream> {
    let horizon = match horizon {
        Some(h) => h,
        None => {
            let meta = meta_path(path);
            if !meta.exists() {
                return Err(Error::Config(format!("no horizon given and no metadata file {}", meta.display())));
            }
            kv::get(&kv::read(&meta)?, "horizon")?
        }
    };
    let mut r = csv_reader(path)?;
    let headers: Vec<String> =
        r.headers().map_err(|e| csv_error(path, e))?.iter().map(|s| s.trim().to_string()).collect();
    let layout = if headers == RECORD_HEADER {
        Layout::Record
    } else if headers == ["time"] {
        Layout::Minimal { bids: false }
    } else if headers == ["time", "bid_level"] {
        Layout::Minimal { bids: true }
    } else {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("unrecognized header `{}`", headers.join(",")),
        });
    };
    let mut times = Vec::new();
    let mut bids = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        match layout {
            Layout::Record => {
                if parse_field::<u8>(path, &row, 3, "accepted")? == 1 {
                    times.push(parse_field(path, &row, 0, "time")?);
                    bids.push(parse_field(path, &row, 4, "bid_level")?);
                }
            }
            Layout::Minimal { bids: with_bids } => {
                times.push(parse_field(path, &row, 0, "time")?);
                if with_bids {
                    bids.push(parse_field(path, &row, 1, "bid_level")?);
                }
            }
        }
    }
    let has_bids = matches!(layout, Layout::Record | Layout::Minimal { bids: true });
    EventStream::new(times, horizon, has_bids.then_some(bids))
}

#[derive(Clone, Copy)]
enum Layout {
    Record,
    Minimal { bids: bool },
}

/// Writes rows of floats under `header`.
pub fn write_columns(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a float table written by [`write_columns`], checking the header.
pub fn read_columns(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv_reader(path)?;
    crate::model::io::check_header(path, &mut r, header)?;
    let mut rows = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let values = (0..header.len()).map(|i| parse_field(path, &row, i, header[i])).collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    Ok(rows)
}

pub const H_HAT_HEADER: [&str; 2] = ["u", "h_hat"];
pub const H_INV_HEADER: [&str; 2] = ["t", "h_inv_hat"];

pub fn write_h_hat(result: &EstimationResult, path: &Path) -> Result<()> {
    write_columns(path, &H_HAT_HEADER, result.h_hat_steps().into_iter().map(|(u, v)| vec![u, v]))
}

pub fn write_h_inverse(result: &EstimationResult, path: &Path) -> Result<()> {
    write_columns(path, &H_INV_HEADER, result.h_inv_steps().into_iter().map(|(t, v)| vec![t, v]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::estimate;

    #[test]
    fn minimal_csv_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("flow.csv");
        std::fs::write(&p, "time,bid_level\n0.5,10\n1.5,11\n").unwrap();
        assert!(matches!(read_event_stream(&p, None), Err(Error::Config(_))));
        std::fs::write(meta_path(&p), "horizon=2\n").unwrap();
        let s = read_event_stream(&p, None).unwrap();
        assert_eq!(s.event_times(), &[0.5, 1.5]);
        assert_eq!(s.bid_levels().unwrap(), &[10, 11]);
        assert_eq!(read_event_stream(&p, Some(4.0)).unwrap().horizon(), 4.0);
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("flow.csv");
        std::fs::write(&p, "time\n0.5\nabc\n").unwrap();
        match read_event_stream(&p, Some(1.0)) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        std::fs::write(&p, "when\n0.5\n").unwrap();
        assert!(matches!(read_event_stream(&p, Some(1.0)), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn estimate_tables_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = EventStream::new(vec![0.2, 0.4, 1.1, 1.7, 2.9], 3.0, None).unwrap();
        let est = estimate(&s, 3).unwrap();
        let hp = dir.path().join("h.csv");
        write_h_hat(&est, &hp).unwrap();
        let rows = read_columns(&hp, &H_HAT_HEADER).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2][1], est.h_hat(0.9).unwrap());
        let ip = dir.path().join("hinv.csv");
        write_h_inverse(&est, &ip).unwrap();
        let rows = read_columns(&ip, &H_INV_HEADER).unwrap();
        assert_eq!(rows.last().unwrap()[1], 1.0);
    }
}

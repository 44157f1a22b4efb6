use std::path::Path;

use super::{BivariateSignal, EllipseTrack};
use crate::io::{create_csv, format_err, io_err, open_csv};
use crate::Result;

pub const SIGNAL_HEADER: [&str; 3] = ["n", "u", "v"];
pub const TRACK_HEADER: [&str; 5] = ["n", "a", "theta", "chi", "f"];

pub fn write_signal_csv(path: &Path, signal: &BivariateSignal) -> Result<()> {
    let mut w = create_csv(path)?;
    w.write_record(SIGNAL_HEADER)?;
    for (i, (u, v)) in signal.u().iter().zip(signal.v()).enumerate() {
        w.serialize((i, u, v))?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn read_signal_csv(path: &Path) -> Result<BivariateSignal> {
    let mut reader = open_csv(path, &SIGNAL_HEADER)?;
    let mut u = Vec::new();
    let mut v = Vec::new();
    for (i, row) in reader.deserialize::<(usize, f64, f64)>().enumerate() {
        let (n, a, b) = row?;
        if n != i {
            return Err(format_err(path, format!("row {i} carries sample index {n}")));
        }
        u.push(a);
        v.push(b);
    }
    BivariateSignal::new(u, v).map_err(|e| format_err(path, e.to_string()))
}

pub fn write_track_csv(path: &Path, track: &EllipseTrack) -> Result<()> {
    let mut w = create_csv(path)?;
    w.write_record(TRACK_HEADER)?;
    for i in 0..track.len() {
        w.serialize((i, track.amplitude[i], track.orientation[i], track.ellipticity[i], track.frequency[i]))?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

//! Configuration files, checkpoints and CSV time series.

mod checkpoint;
mod config_file;
mod csv;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint, MAGIC, VERSION};
pub use config_file::{init_kind_name, RunConfig, KEYS};
pub use csv::{time_series_csv, time_series_header, Table};

/// Shortest representation that parses back to the same `f64`; exponent form
/// outside `[1e-5, 1e16)`.
pub fn fmt_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

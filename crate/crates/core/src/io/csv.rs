use std::path::Path;

use super::fmt_float;
use crate::diagnostics::EnergyReport;
use crate::error::{Error, Result};

/// A header plus rows of numbers, rendered with [`fmt_float`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| fmt_float(*v))).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flushing to memory")).expect("ASCII output")
    }

    /// Parses numeric CSV with a header line.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |e: csv::Error| Error::InvalidInput(format!("CSV: {e}"));
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = reader.headers().map_err(bad)?.clone();
        if header.is_empty() {
            return Err(Error::InvalidInput("CSV has no header".into()));
        }
        let mut table = Table::new(header.iter());
        for record in reader.records() {
            let record = record.map_err(bad)?;
            let line = record.position().map_or(0, |p| p.line());
            let row = record
                .iter()
                .map(|c| {
                    c.parse::<f64>()
                        .map_err(|e| Error::InvalidInput(format!("line {line}: {c:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Values of the named column.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidInput(format!("no column {name:?}")))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Columns of the diagnostic time series for the given `E_j` orders.
pub fn time_series_header(energy_orders: &[u32]) -> Vec<String> {
    let mut h: Vec<String> = vec!["t".into(), "E_phys".into(), "dissipation".into()];
    h.extend(energy_orders.iter().map(|j| format!("E_{j}")));
    h.extend(
        [
            "E_N_cfg",
            "X_tilde",
            "cross1",
            "cross2",
            "cross3",
            "X",
            "mass_residual",
            "momentum_residual_x",
            "momentum_residual_y",
            "momentum_residual_z",
            "mean_h_residual_x",
            "mean_h_residual_y",
            "mean_h_residual_z",
            "div_h_L2",
            "rho_min",
            "rho_max",
        ]
        .map(String::from),
    );
    h
}

/// One row per report; `X` uses each report's own `delta_*`.
pub fn time_series_csv(reports: &[EnergyReport], energy_orders: &[u32]) -> Table {
    let mut table = Table::new(time_series_header(energy_orders));
    for r in reports {
        let c = &r.composite;
        let res = &r.residuals;
        let mut row = vec![r.time, r.e_phys, r.dissipation];
        row.extend(&r.energies);
        row.extend([c.e_n, c.x_tilde, c.cross[0], c.cross[1], c.cross[2], c.x, res.mass]);
        row.extend(res.momentum);
        row.extend(res.mean_h);
        row.extend([res.div_h, r.rho_min, r.rho_max]);
        table.push(row);
    }
    table
}

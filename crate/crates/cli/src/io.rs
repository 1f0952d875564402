//! Dataset tables and their CSV and JSON forms.
//!
//! Every dataset is first laid out as a [`Table`] of string cells. Floats are
//! written in Rust's shortest round-trip form and exact values as `p/q`, so
//! parsing a table back gives bit-identical values in either format.

use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use adiff_core::correlation::{CorrelationSeries, SeriesKind};
use adiff_core::distribution::{DistributionFunction, DistributionMeta};
use adiff_core::exact::{format_rational, parse_rational, ExactComplex};
use adiff_core::random::LagBand;
use adiff_core::spectral::{BraggPeak, CyclotomicValue, Frequency, PurePointSpectrum};
use adiff_core::substitution::Symbol;
use adiff_core::window::{SymbolicWindow, WeightedComb};
use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("schema mismatch: expected columns {expected:?}, found {found:?}")]
    Schema { expected: Vec<String>, found: Vec<String> },
    #[error("row {row}, column '{column}': {message}")]
    Cell { row: usize, column: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] adiff_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type IoResult<T> = std::result::Result<T, IoError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn expect_columns(&self, expected: &[&str]) -> IoResult<()> {
        if self.columns.iter().map(String::as_str).ne(expected.iter().copied()) {
            return Err(IoError::Schema {
                expected: expected.iter().map(|c| c.to_string()).collect(),
                found: self.columns.clone(),
            });
        }
        Ok(())
    }

    fn cell<T: FromStr>(&self, row: usize, column: usize) -> IoResult<T>
    where
        T::Err: std::fmt::Display,
    {
        self.rows[row][column].parse().map_err(|e: T::Err| IoError::Cell {
            row,
            column: self.columns[column].clone(),
            message: e.to_string(),
        })
    }

    fn text(&self, row: usize, column: usize) -> &str {
        &self.rows[row][column]
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> IoResult<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> IoResult<Self> {
        let mut input = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let columns: Vec<String> = input.headers()?.iter().map(str::to_string).collect();
        let rows = input
            .records()
            .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()?;
        Ok(Self { columns, rows })
    }

    pub fn write_json<W: Write>(&self, mut writer: W) -> IoResult<()> {
        serde_json::to_writer_pretty(&mut writer, self)?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> IoResult<Self> {
        let table: Table = serde_json::from_reader(reader)?;
        if let Some(bad) = table.rows.iter().position(|r| r.len() != table.columns.len()) {
            return Err(IoError::Invalid(format!("row {bad} has the wrong number of cells")));
        }
        Ok(table)
    }

    pub fn write<W: Write>(&self, format: Format, writer: W) -> IoResult<()> {
        match format {
            Format::Csv => self.write_csv(writer),
            Format::Json => self.write_json(writer),
        }
    }

    pub fn read<R: Read>(format: Format, reader: R) -> IoResult<Self> {
        match format {
            Format::Csv => Self::read_csv(reader),
            Format::Json => Self::read_json(reader),
        }
    }
}

pub fn fmt_f64(value: f64) -> String {
    format!("{value:?}")
}

fn fmt_opt_rational(value: Option<&num_rational::BigRational>) -> String {
    value.map(format_rational).unwrap_or_default()
}

fn parse_exact(table: &Table, row: usize, re: usize, im: usize) -> IoResult<Option<ExactComplex>> {
    let (a, b) = (table.text(row, re), table.text(row, im));
    if a.is_empty() && b.is_empty() {
        return Ok(None);
    }
    let parse = |s: &str, c: usize| {
        parse_rational(s).map_err(|e| IoError::Cell {
            row,
            column: table.columns[c].clone(),
            message: e.to_string(),
        })
    };
    Ok(Some(Complex::new(parse(a, re)?, parse(b, im)?)))
}

// Windows -------------------------------------------------------------------

pub const WINDOW_COLUMNS: [&str; 4] = ["n", "symbol", "re_w", "im_w"];

pub fn window_table(window: &SymbolicWindow, comb: &WeightedComb) -> IoResult<Table> {
    if window.len() != comb.len() || window.first_index() != -(comb.half_length() as i64) {
        return Err(IoError::Invalid("window and comb cover different ranges".into()));
    }
    let mut table = Table::new(&WINDOW_COLUMNS);
    for (i, (s, w)) in window.symbols().iter().zip(comb.weights()).enumerate() {
        table.push(vec![
            (window.first_index() + i as i64).to_string(),
            window.symbol_name(*s).to_string(),
            fmt_f64(w.re),
            fmt_f64(w.im),
        ]);
    }
    Ok(table)
}

pub fn parse_window(
    table: &Table,
    alphabet: Arc<[String]>,
    provenance: &str,
) -> IoResult<(SymbolicWindow, WeightedComb)> {
    table.expect_columns(&WINDOW_COLUMNS)?;
    if table.rows.is_empty() {
        return Err(IoError::Invalid("empty window".into()));
    }
    let first: i64 = table.cell(0, 0)?;
    let mut symbols = Vec::with_capacity(table.rows.len());
    let mut weights = Vec::with_capacity(table.rows.len());
    for row in 0..table.rows.len() {
        let n: i64 = table.cell(row, 0)?;
        if n != first + row as i64 {
            return Err(IoError::Cell {
                row,
                column: "n".into(),
                message: format!("expected index {}", first + row as i64),
            });
        }
        let name = table.text(row, 1);
        let index = alphabet.iter().position(|a| a == name).ok_or_else(|| IoError::Cell {
            row,
            column: "symbol".into(),
            message: format!("'{name}' is not in the alphabet"),
        })?;
        symbols.push(Symbol(index as u8));
        weights.push(Complex64::new(table.cell(row, 2)?, table.cell(row, 3)?));
    }
    let window = SymbolicWindow::new(alphabet, first, symbols);
    let comb = WeightedComb::new(weights, provenance)?;
    Ok((window, comb))
}

// Correlation series ----------------------------------------------------------

pub const SERIES_COLUMNS: [&str; 11] = [
    "m",
    "re_eta",
    "im_eta",
    "re_theta",
    "im_theta",
    "eta_exact_re",
    "eta_exact_im",
    "theta_exact_re",
    "theta_exact_im",
    "kind",
    "normalisation",
];

pub fn series_table(series: &CorrelationSeries) -> Table {
    let mut table = Table::new(&SERIES_COLUMNS);
    let normalisation = series.normalisation().map(|n| n.to_string()).unwrap_or_default();
    for m in series.lags() {
        let eta = series.eta(m).expect("lag in range");
        let theta = series.theta(m);
        let exact_eta = series.exact_eta(m);
        let exact_theta = series.exact_theta(m);
        table.push(vec![
            m.to_string(),
            fmt_f64(eta.re),
            fmt_f64(eta.im),
            theta.map(|t| fmt_f64(t.re)).unwrap_or_default(),
            theta.map(|t| fmt_f64(t.im)).unwrap_or_default(),
            fmt_opt_rational(exact_eta.map(|c| &c.re)),
            fmt_opt_rational(exact_eta.map(|c| &c.im)),
            fmt_opt_rational(exact_theta.map(|c| &c.re)),
            fmt_opt_rational(exact_theta.map(|c| &c.im)),
            series.kind().as_str().to_string(),
            normalisation.clone(),
        ]);
    }
    table
}

pub fn parse_series(table: &Table, label: &str) -> IoResult<CorrelationSeries> {
    table.expect_columns(&SERIES_COLUMNS)?;
    let rows = table.rows.len();
    if rows % 2 == 0 {
        return Err(IoError::Invalid(format!("{rows} rows cannot cover [-M, M]")));
    }
    let max_lag = (rows / 2) as i64;
    let kind = match table.text(0, 9) {
        "exact" => SeriesKind::Exact,
        "empirical" => SeriesKind::Empirical,
        other => return Err(IoError::Invalid(format!("unknown series kind '{other}'"))),
    };
    let has_theta = !table.text(0, 3).is_empty();
    let mut eta = Vec::with_capacity(rows);
    let mut theta = Vec::with_capacity(rows);
    let mut exact_eta = Vec::with_capacity(rows);
    let mut exact_theta = Vec::with_capacity(rows);
    for row in 0..rows {
        let m: i64 = table.cell(row, 0)?;
        if m != row as i64 - max_lag {
            return Err(IoError::Cell {
                row,
                column: "m".into(),
                message: format!("expected lag {}", row as i64 - max_lag),
            });
        }
        if table.text(row, 9) != table.text(0, 9) {
            return Err(IoError::Invalid("mixed series kinds".into()));
        }
        eta.push(Complex64::new(table.cell(row, 1)?, table.cell(row, 2)?));
        if has_theta {
            theta.push(Complex64::new(table.cell(row, 3)?, table.cell(row, 4)?));
        }
        if kind == SeriesKind::Exact {
            exact_eta.push(parse_exact(table, row, 5, 6)?.ok_or_else(|| {
                IoError::Invalid(format!("exact series lacks exact η at row {row}"))
            })?);
            if has_theta {
                exact_theta.push(parse_exact(table, row, 7, 8)?.ok_or_else(|| {
                    IoError::Invalid(format!("exact series lacks exact ϑ at row {row}"))
                })?);
            }
        }
    }
    let series = match kind {
        SeriesKind::Exact => CorrelationSeries::exact(label, exact_eta, has_theta.then_some(exact_theta))?,
        SeriesKind::Empirical => {
            let normalisation: usize = table.cell(0, 10)?;
            CorrelationSeries::empirical(label, eta.clone(), has_theta.then_some(theta), normalisation)?
        }
    };
    if series.eta_values() != eta.as_slice() {
        return Err(IoError::Invalid("floating columns disagree with exact values".into()));
    }
    Ok(series)
}

// Distribution functions -------------------------------------------------------

pub const DISTRIBUTION_COLUMNS: [&str; 3] = ["x", "F", "dF"];

/// `dF` on row i is F(x_{i+1}) − F(x_i); the last row leaves it empty.
pub fn distribution_table(f: &DistributionFunction) -> Table {
    let mut table = Table::new(&DISTRIBUTION_COLUMNS);
    for (i, v) in f.values().iter().enumerate() {
        table.push(vec![
            fmt_f64(f.x(i)),
            fmt_f64(*v),
            f.increments().get(i).map(|d| fmt_f64(*d)).unwrap_or_default(),
        ]);
    }
    table
}

pub fn parse_distribution(table: &Table, meta: DistributionMeta) -> IoResult<DistributionFunction> {
    table.expect_columns(&DISTRIBUTION_COLUMNS)?;
    let rows = table.rows.len();
    if rows < 2 {
        return Err(IoError::Invalid("a distribution needs at least two grid points".into()));
    }
    let grid = rows - 1;
    let mut values = Vec::with_capacity(rows);
    let mut increments = Vec::with_capacity(grid);
    for row in 0..rows {
        let x: f64 = table.cell(row, 0)?;
        if x != row as f64 / grid as f64 {
            return Err(IoError::Cell {
                row,
                column: "x".into(),
                message: format!("expected {row}/{grid}"),
            });
        }
        values.push(table.cell(row, 1)?);
        if row < grid {
            increments.push(table.cell(row, 2)?);
        } else if !table.text(row, 2).is_empty() {
            return Err(IoError::Invalid("last row must not carry an increment".into()));
        }
    }
    Ok(DistributionFunction::from_parts(values, increments, meta)?)
}

// Spectra ------------------------------------------------------------------

pub const RATIONAL_SPECTRUM_COLUMNS: [&str; 4] = ["k_num", "k_den", "intensity", "exact"];
pub const REAL_SPECTRUM_COLUMNS: [&str; 2] = ["k", "intensity"];

/// Coefficients of a cyclotomic value as space-separated `re;im` pairs.
fn format_cyclotomic(value: &CyclotomicValue) -> String {
    value
        .coefficients
        .iter()
        .map(|c| format!("{};{}", format_rational(&c.re), format_rational(&c.im)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_cyclotomic(text: &str) -> IoResult<CyclotomicValue> {
    let coefficients = text
        .split(' ')
        .map(|pair| {
            let (re, im) = pair
                .split_once(';')
                .ok_or_else(|| IoError::Invalid(format!("bad coefficient '{pair}'")))?;
            Ok(Complex::new(parse_rational(re)?, parse_rational(im)?))
        })
        .collect::<IoResult<Vec<_>>>()?;
    Ok(CyclotomicValue {
        order: coefficients.len(),
        coefficients,
    })
}

pub fn spectrum_table(spectrum: &PurePointSpectrum) -> Table {
    if spectrum.all_rational() {
        let mut table = Table::new(&RATIONAL_SPECTRUM_COLUMNS);
        for p in &spectrum.peaks {
            let Frequency::Rational { num, den } = p.frequency else { unreachable!() };
            table.push(vec![
                num.to_string(),
                den.to_string(),
                fmt_f64(p.intensity),
                p.exact.as_ref().map(format_cyclotomic).unwrap_or_default(),
            ]);
        }
        table
    } else {
        let mut table = Table::new(&REAL_SPECTRUM_COLUMNS);
        for p in &spectrum.peaks {
            table.push(vec![fmt_f64(p.frequency.value()), fmt_f64(p.intensity)]);
        }
        table
    }
}

pub fn parse_spectrum(table: &Table, module: &str) -> IoResult<PurePointSpectrum> {
    let rational = table.columns.len() == RATIONAL_SPECTRUM_COLUMNS.len();
    if rational {
        table.expect_columns(&RATIONAL_SPECTRUM_COLUMNS)?;
    } else {
        table.expect_columns(&REAL_SPECTRUM_COLUMNS)?;
    }
    let peaks = (0..table.rows.len())
        .map(|row| {
            if rational {
                let exact = match table.text(row, 3) {
                    "" => None,
                    text => Some(parse_cyclotomic(text)?),
                };
                Ok(BraggPeak {
                    frequency: Frequency::Rational {
                        num: table.cell(row, 0)?,
                        den: table.cell(row, 1)?,
                    },
                    intensity: table.cell(row, 2)?,
                    exact,
                })
            } else {
                Ok(BraggPeak {
                    frequency: Frequency::Real { value: table.cell(row, 0)? },
                    intensity: table.cell(row, 1)?,
                    exact: None,
                })
            }
        })
        .collect::<IoResult<Vec<_>>>()?;
    Ok(PurePointSpectrum {
        peaks,
        module: module.to_string(),
    })
}

// Monte Carlo bands -----------------------------------------------------------

pub const BAND_COLUMNS: [&str; 8] = [
    "m",
    "re_mean",
    "im_mean",
    "stderr",
    "re_predicted",
    "im_predicted",
    "band",
    "pass",
];

pub fn band_table(bands: &[LagBand]) -> Table {
    let mut table = Table::new(&BAND_COLUMNS);
    for b in bands {
        table.push(vec![
            b.m.to_string(),
            fmt_f64(b.mean.re),
            fmt_f64(b.mean.im),
            fmt_f64(b.stderr),
            fmt_f64(b.predicted.re),
            fmt_f64(b.predicted.im),
            fmt_f64(b.band),
            b.pass.to_string(),
        ]);
    }
    table
}

pub fn parse_bands(table: &Table) -> IoResult<Vec<LagBand>> {
    table.expect_columns(&BAND_COLUMNS)?;
    (0..table.rows.len())
        .map(|row| {
            Ok(LagBand {
                m: table.cell(row, 0)?,
                mean: Complex64::new(table.cell(row, 1)?, table.cell(row, 2)?),
                stderr: table.cell(row, 3)?,
                predicted: Complex64::new(table.cell(row, 4)?, table.cell(row, 5)?),
                band: table.cell(row, 6)?,
                pass: table.cell(row, 7)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use adiff_core::correlation::{empirical_autocorrelation, rs_exact_eta_theta, tm_exact_eta};
    use adiff_core::distribution::volterra_iterate;
    use adiff_core::periodic::homometric_pair;
    use adiff_core::spectral::{pd_bragg_spectrum, periodic_diffraction};
    use adiff_core::window::{make_comb, signed_weights, tm_window};

    fn both_ways(table: &Table) -> [Table; 2] {
        let mut csv = Vec::new();
        table.write_csv(&mut csv).unwrap();
        assert!(!csv.contains(&b'\r'));
        let mut json = Vec::new();
        table.write_json(&mut json).unwrap();
        [
            Table::read_csv(csv.as_slice()).unwrap(),
            Table::read_json(json.as_slice()).unwrap(),
        ]
    }

    #[test]
    fn window_round_trip() {
        let window = tm_window(20);
        let comb = make_comb(&window, &signed_weights()).unwrap();
        for t in both_ways(&window_table(&window, &comb).unwrap()) {
            let (w, c) = parse_window(&t, window.alphabet().clone(), &comb.provenance).unwrap();
            assert_eq!(w, window);
            assert_eq!(c, comb);
        }
    }

    #[test]
    fn exact_series_round_trip() {
        for series in [tm_exact_eta(40), rs_exact_eta_theta(40)] {
            for t in both_ways(&series_table(&series)) {
                assert_eq!(parse_series(&t, &series.label).unwrap(), series);
            }
        }
    }

    #[test]
    fn empirical_series_round_trip() {
        let comb = make_comb(&tm_window(300), &signed_weights()).unwrap();
        let series = empirical_autocorrelation(&comb, 12).unwrap();
        for t in both_ways(&series_table(&series)) {
            assert_eq!(parse_series(&t, &series.label).unwrap(), series);
        }
    }

    #[test]
    fn distribution_round_trip() {
        let f = volterra_iterate(1024, 5).unwrap();
        for t in both_ways(&distribution_table(&f)) {
            assert_eq!(parse_distribution(&t, f.meta.clone()).unwrap(), f);
        }
    }

    #[test]
    fn spectrum_round_trip() {
        let (a, _) = homometric_pair();
        let periodic = periodic_diffraction(&a);
        let pd = pd_bragg_spectrum(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 4).unwrap();
        for s in [periodic, pd] {
            for t in both_ways(&spectrum_table(&s)) {
                assert_eq!(parse_spectrum(&t, &s.module).unwrap(), s);
            }
        }
    }

    #[test]
    fn schema_mismatch_rejected() {
        let t = distribution_table(&volterra_iterate(1024, 0).unwrap());
        assert!(matches!(parse_series(&t, "x"), Err(IoError::Schema { .. })));
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["x", "F"]);
        t.push(vec!["0.0".into(), "0.1".into()]);
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "x,F\n0.0,0.1\n");
    }
}

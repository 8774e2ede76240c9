//! CSV emission at 12 significant digits and the matching reader.

use std::fs::File;
use std::path::Path;

use crate::CliError;

pub const SIGNIFICANT_DIGITS: i32 = 12;

/// Shortest decimal rendering of `x` rounded to 12 significant digits;
/// scientific notation outside `[1e-5, 1e12)`.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    } else {
        let s = format!("{:.*e}", (SIGNIFICANT_DIGITS - 1) as usize, x);
        let (mantissa, exponent) = s.split_once('e').expect("scientific format");
        format!("{}e{exponent}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rows of optional values; `None` is written as an empty field.
pub struct CsvTable {
    writer: csv::Writer<File>,
}

impl CsvTable {
    /// Opens the file immediately so unwritable paths fail before any work.
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, CliError> {
        let mut writer = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    pub fn row(&mut self, values: &[Option<f64>]) -> Result<(), CliError> {
        let fields: Vec<String> = values.iter().map(|v| v.map(format_sig).unwrap_or_default()).collect();
        self.writer.write_record(&fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush()?;
        Ok(())
    }
}

/// Parsed rows; empty fields read back as `None`.
pub type Rows = Vec<Vec<Option<f64>>>;

/// Header and rows of a CSV written by [`CsvTable`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Rows), CliError> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| {
                if f.is_empty() {
                    Ok(None)
                } else {
                    f.parse().map(Some).map_err(|_| CliError::Io(format!("bad number `{f}`")))
                }
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(1.875), "1.875");
        assert_eq!(format_sig(0.1 + 0.2), "0.3");
        assert_eq!(format_sig(-2.0), "-2");
        assert_eq!(format_sig(14.911111111111111), "14.9111111111");
        assert_eq!(format_sig(1.2566370614359172e7), "12566370.6144");
        assert_eq!(format_sig(3.0e-9), "3e-9");
        assert_eq!(format_sig(0.0), "0");
    }
}

//! CSV and JSON writers. Floats are printed with 12 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::CliError;

/// `x` with 12 significant digits, trailing zeros trimmed; scientific
/// notation outside 1e-5 ≤ |x| < 1e12.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn open(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Writes a header and rows of numbers.
pub fn write_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(open(out)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| sig12(x)))?;
    }
    w.flush().map_err(|e| CliError::Io { path: out.map(|p| p.display().to_string()).unwrap_or("stdout".into()), source: e })?;
    Ok(())
}

pub fn write_text(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    let mut w = open(out)?;
    let label = || out.map(|p| p.display().to_string()).unwrap_or("stdout".into());
    w.write_all(text.as_bytes()).and_then(|_| w.write_all(b"\n")).and_then(|_| w.flush()).map_err(|e| CliError::Io { path: label(), source: e })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(-2.5), "-2.5");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(-1.0 / std::f64::consts::PI), "-0.318309886184");
        assert_eq!(sig12(123456.7890123456), "123456.789012");
        assert_eq!(sig12(1.5e-9), "1.5e-9");
        assert_eq!(sig12(2.0e15), "2e15");
        assert_eq!(sig12(10.0), "10");
    }
}

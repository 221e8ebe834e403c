//! Deterministic output: every float is printed with 17 significant digits
//! in scientific notation, so identical configurations produce byte-identical
//! files.

use std::io::{self, Write};
use std::path::Path;

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// serde_json formatter that routes all floats through [`fmt_float`].
pub struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        writer.write_all(fmt_float(value).as_bytes())
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf)?)
}

/// Write to the given path, or to stdout when no path is set.
pub fn emit(out: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content)?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_significant_digits() {
        assert_eq!(fmt_float(std::f64::consts::PI), "3.1415926535897931e0");
        assert_eq!(fmt_float(-0.125), "-1.2500000000000000e-1");
    }

    #[test]
    fn json_floats_use_the_fixed_format() {
        #[derive(serde::Serialize)]
        struct T {
            x: f64,
            y: Option<f64>,
        }
        let s = to_json_string(&T { x: 2.0, y: None }).unwrap();
        assert_eq!(s, "{\"x\":2.0000000000000000e0,\"y\":null}");
    }
}

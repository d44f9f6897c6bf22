use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

/// Compact JSON with every float written to 17 significant digits.
struct Sci;

impl Formatter for Sci {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sci);
    value.serialize(&mut ser).expect("serializable value");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = to_json(value);
    text.push('\n');
    fs::write(path, text)
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_writer(path: &Path) -> io::Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_writer(fs::File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_scientific_notation() {
        let s = to_json(&serde_json::json!({"a": 0.5, "b": [1.0, -2.5e-7], "c": 3, "d": f64::NAN}));
        assert_eq!(s, r#"{"a":5.0000000000000000e-1,"b":[1.0000000000000000e0,-2.4999999999999999e-7],"c":3,"d":null}"#);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["b"][1].as_f64().unwrap(), -2.5e-7);
    }
}

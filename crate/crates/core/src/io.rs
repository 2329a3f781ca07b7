//! Point files and run reports.
//!
//! A point file is UTF-8 CSV whose first line is exactly `x,y`, followed by
//! one `<decimal>,<decimal>` pair per line (LF or CRLF).

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{Dataset, FitConfig, FitReport};
use crate::selection::{CandidateRow, LambdaSweep};

/// Parses point-file text into a dataset.
pub fn parse_points(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::None)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    match records.next() {
        Some(Ok(header)) if header.len() == 2 && &header[0] == "x" && &header[1] == "y" => {}
        Some(Ok(header)) => {
            return Err(Error::Parse(format!(
                "first line must be exactly `x,y`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            )))
        }
        Some(Err(e)) => return Err(Error::Parse(e.to_string())),
        None => return Err(Error::Parse("missing `x,y` header".into())),
    }
    let mut points = Vec::new();
    for (i, record) in records.enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
        let field = |k: usize| -> Result<f64> {
            let raw = &record[k];
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    Error::Parse(format!("line {line}: `{raw}` is not a finite decimal"))
                })
        };
        points.push((field(0)?, field(1)?));
    }
    Dataset::new(points)
}

pub fn read_points(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_points(&text)
}

/// Writes points with shortest round-trip decimal formatting.
pub fn write_points<W: Write>(mut out: W, points: &[(f64, f64)]) -> Result<()> {
    writeln!(out, "x,y")?;
    for (x, y) in points {
        writeln!(out, "{x},{y}")?;
    }
    Ok(())
}

/// Machine-readable summary of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_points: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<CandidateRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<LambdaSweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_config: Option<FitConfig>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            fit: None,
            reference_points: None,
            candidates: None,
            sweep: None,
            chosen_lambda: None,
            sweep_config: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Number {
    Finite(f64),
    Tag(String),
}

fn encode(value: f64) -> Number {
    if value.is_finite() {
        Number::Finite(value)
    } else if value.is_nan() {
        Number::Tag("nan".into())
    } else if value > 0.0 {
        Number::Tag("inf".into())
    } else {
        Number::Tag("-inf".into())
    }
}

fn decode<E: serde::de::Error>(number: Number) -> std::result::Result<f64, E> {
    match number {
        Number::Finite(v) => Ok(v),
        Number::Tag(tag) => match tag.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(E::custom(format!("unexpected number tag `{other}`"))),
        },
    }
}

/// Floats that may be non-finite, written as `"inf"`, `"-inf"` or `"nan"`.
pub mod sentinel {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        super::encode(*value).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        super::decode(super::Number::deserialize(d)?)
    }
}

/// Optional variant of [`sentinel`]; `None` is `null`.
pub mod sentinel_opt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(value: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        value.map(super::encode).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<super::Number>::deserialize(d)?
            .map(super::decode)
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lf_and_crlf() {
        let a = parse_points("x,y\n0.5,1\n1.5,-2e-3\n").unwrap();
        let b = parse_points("x,y\r\n0.5,1\r\n1.5,-2e-3\r\n").unwrap();
        assert_eq!(a.points(), &[(0.5, 1.0), (1.5, -0.002)]);
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_points("").is_err());
        assert!(parse_points("X,Y\n1,2\n").is_err());
        assert!(parse_points("x,y\n1,2,3\n").is_err());
        assert!(parse_points("x,y\n1;2\n").is_err());
        assert!(parse_points("x,y\n1,abc\n").is_err());
        assert!(parse_points("x,y\n1,inf\n").is_err());
        assert_eq!(parse_points("x,y\n"), Err(Error::EmptyInput));
    }

    #[test]
    fn write_then_parse_is_exact() {
        let pts = vec![(0.1, 1.0 / 3.0), (2.0f64.sqrt(), -1e-300), (1e22, 5e-324)];
        let mut buf = Vec::new();
        write_points(&mut buf, &pts).unwrap();
        let back = parse_points(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.points(), pts.as_slice());
    }

    #[test]
    fn sentinel_round_trip() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct T {
            #[serde(with = "sentinel")]
            a: f64,
            #[serde(with = "sentinel_opt")]
            b: Option<f64>,
            #[serde(with = "sentinel_opt")]
            c: Option<f64>,
        }
        let t = T {
            a: f64::INFINITY,
            b: Some(0.25),
            c: None,
        };
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"a":"inf","b":0.25,"c":null}"#);
        assert_eq!(serde_json::from_str::<T>(&json).unwrap(), t);
    }
}

//! CSV and JSON files.
//!
//! Every CSV starts with a `# config: {...}` comment line holding the
//! resolved configuration; readers skip `#` lines.

use std::fs;
use std::path::Path;

use serde::Serialize;
use stabilize_core::{Configuration, MarkedPoint, Point};

use crate::error::{Error, Result};

fn comment_line(echo: Option<&serde_json::Value>) -> Result<String> {
    Ok(match echo {
        Some(v) => format!("# config: {}\n", serde_json::to_string(v)?),
        None => String::new(),
    })
}

/// Writes text, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Configuration as CSV with columns `x0, .., x{d-1}, mark`.
pub fn configuration_csv(config: &Configuration, echo: Option<&serde_json::Value>) -> Result<String> {
    let dim = config.dim().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    header.push("mark".into());
    w.write_record(&header)?;
    for p in config.items() {
        let mut rec: Vec<String> = p.point.coords().iter().map(|v| v.to_string()).collect();
        rec.push(p.mark.to_string());
        w.write_record(&rec)?;
    }
    let body = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(comment_line(echo)? + &String::from_utf8_lossy(&body))
}

/// Parses a configuration CSV. Columns named `x<k>` are coordinates; an
/// optional `mark` column defaults to 1.
pub fn parse_configuration(text: &str) -> Result<Configuration> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    let mut coord_cols: Vec<(usize, usize)> = header
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.strip_prefix('x').and_then(|k| k.parse::<usize>().ok()).map(|k| (k, i)))
        .collect();
    coord_cols.sort_unstable();
    if coord_cols.is_empty() || coord_cols.iter().enumerate().any(|(j, (k, _))| j != *k) {
        return Err(Error::Config("configuration CSV needs columns x0, x1, ...".into()));
    }
    let mark_col = header.iter().position(|h| h == "mark");
    let mut items = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Config("short CSV row".into()))?
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number: {e}")))
        };
        let coords = coord_cols.iter().map(|(_, i)| num(*i)).collect::<Result<Vec<f64>>>()?;
        let mark = match mark_col {
            Some(i) => num(i)?,
            None => 1.0,
        };
        items.push(MarkedPoint::new(Point::new(&coords)?, mark)?);
    }
    Ok(Configuration::new(items)?)
}

/// Reads a configuration CSV file.
pub fn read_configuration(path: &Path) -> Result<Configuration> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_configuration(&text)
}

/// Serializable records as CSV (header from field names).
pub fn records_csv<T: Serialize>(rows: &[T], echo: Option<&serde_json::Value>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let body = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(comment_line(echo)? + &String::from_utf8_lossy(&body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use stabilize_core::processes::sample_binomial;
    use stabilize_core::{MarkDistribution, RandomStream, SpaceDescriptor};

    #[test]
    fn configuration_round_trip() {
        let space = SpaceDescriptor::unit_cube(3);
        let marks = MarkDistribution::HalfNormal { sigma: 1.0 };
        let c = sample_binomial(&space, 25, &marks, &mut RandomStream::new(3).sampler()).unwrap();
        let echo = serde_json::json!({"seed": 3});
        let text = configuration_csv(&c, Some(&echo)).unwrap();
        assert!(text.starts_with("# config: {\"seed\":3}\n"));
        assert_eq!(parse_configuration(&text).unwrap(), c);
    }

    #[test]
    fn marks_default_and_bad_headers() {
        let c = parse_configuration("x0,x1\n0,1\n1,0\n").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.mark(0), 1.0);
        assert!(parse_configuration("x1,y\n0,1\n").is_err());
        assert!(parse_configuration("x0,x1\n0,abc\n").is_err());
    }
}

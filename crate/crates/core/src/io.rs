//! CSV ingestion. The first row is a header; the response column is picked by
//! name and every other column becomes a regressor, in file order. Empty or
//! unparseable cells are rejected with the offending line number.

use std::io::Read;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::design::RawDesign;
use crate::error::{GreedyError, Result};

/// A parsed data file: the design plus the regressor names.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub design: RawDesign,
    pub features: Vec<String>,
    pub target: String,
}

pub fn read_csv_path(path: impl AsRef<Path>, target: &str) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| GreedyError::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_csv(file, target)
}

pub fn read_csv<R: Read>(reader: R, target: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| parse_error(1, e.to_string()))?
        .clone();
    if header.is_empty() {
        return Err(parse_error(1, "missing header row".into()));
    }
    let target_col = header
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| GreedyError::MissingColumn(target.to_string()))?;
    let features: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != target_col)
        .map(|(_, h)| h.to_string())
        .collect();
    if features.is_empty() {
        return Err(parse_error(1, "no regressor columns besides the target".into()));
    }

    let width = header.len();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(parse_error(
                line,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        for (i, field) in record.iter().enumerate() {
            if field.is_empty() {
                return Err(parse_error(
                    line,
                    format!("missing value in column `{}`", &header[i]),
                ));
            }
            let v: f64 = field.parse().map_err(|_| {
                parse_error(
                    line,
                    format!("cannot parse `{field}` in column `{}`", &header[i]),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_error(
                    line,
                    format!("non-finite value in column `{}`", &header[i]),
                ));
            }
            if i == target_col {
                ys.push(v);
            } else {
                xs.push(v);
            }
        }
    }
    if ys.is_empty() {
        return Err(parse_error(2, "no data rows".into()));
    }
    let n = ys.len();
    let x = Array2::from_shape_vec((n, features.len()), xs)
        .map_err(|e| GreedyError::Io(e.to_string()))?;
    Ok(Dataset {
        design: RawDesign::new(x, Array1::from(ys))?,
        features,
        target: target.to_string(),
    })
}

fn parse_error(line: u64, message: String) -> GreedyError {
    GreedyError::Parse { line, message }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_is_split_from_regressors() {
        let data = "a,y,b\n1,2,3\n4,5,6\n";
        let ds = read_csv(data.as_bytes(), "y").unwrap();
        assert_eq!(ds.features, vec!["a", "b"]);
        assert_eq!(ds.design.y().to_vec(), vec![2.0, 5.0]);
        assert_eq!(ds.design.x().row(1).to_vec(), vec![4.0, 6.0]);
    }

    #[test]
    fn missing_value_reports_line() {
        let data = "a,y\n1,2\n,5\n";
        match read_csv(data.as_bytes(), "y") {
            Err(GreedyError::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("missing value"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_number_reports_line() {
        let data = "a,y\n1,2\n3,4\nx,5\n";
        assert!(matches!(
            read_csv(data.as_bytes(), "y"),
            Err(GreedyError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn ragged_row_is_rejected() {
        let data = "a,y\n1,2\n3\n";
        assert!(matches!(
            read_csv(data.as_bytes(), "y"),
            Err(GreedyError::Parse { .. })
        ));
    }

    #[test]
    fn unknown_target() {
        let data = "a,y\n1,2\n";
        assert_eq!(
            read_csv(data.as_bytes(), "z").unwrap_err(),
            GreedyError::MissingColumn("z".into())
        );
    }
}

//! Training-history CSV with the fixed header
//! `epoch,train_loss,train_acc,test_loss,test_acc`.

use std::path::Path;
use thiserror::Error;

use crate::learn::EpochRecord;

pub const HEADER: &str = "epoch,train_loss,train_acc,test_loss,test_acc";

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("missing or wrong header: expected `{HEADER}`")]
    BadHeader,
    #[error("line {line}: {reason}")]
    BadRecord { line: usize, reason: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Serializes records; floats use the shortest round-trip representation,
/// so identical histories produce byte-identical files.
pub fn to_csv(history: &[EpochRecord]) -> String {
    let mut out = String::with_capacity(32 * (history.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in history {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.epoch, r.train_loss, r.train_acc, r.test_loss, r.test_acc
        ));
    }
    out
}

/// Parses a history CSV produced by [`to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<EpochRecord>, HistoryError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(HEADER) {
        return Err(HistoryError::BadHeader);
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(HistoryError::BadRecord {
                line: line_no,
                reason: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let epoch = fields[0].trim().parse::<usize>().map_err(|e| {
            HistoryError::BadRecord {
                line: line_no,
                reason: format!("bad epoch: {e}"),
            }
        })?;
        let mut nums = [0.0f64; 4];
        for (slot, field) in nums.iter_mut().zip(&fields[1..]) {
            *slot = field.trim().parse::<f64>().map_err(|e| {
                HistoryError::BadRecord {
                    line: line_no,
                    reason: format!("bad float `{field}`: {e}"),
                }
            })?;
        }
        records.push(EpochRecord {
            epoch,
            train_loss: nums[0],
            train_acc: nums[1],
            test_loss: nums[2],
            test_acc: nums[3],
        });
    }
    Ok(records)
}

pub fn save(path: &Path, history: &[EpochRecord]) -> Result<(), HistoryError> {
    std::fs::write(path, to_csv(history)).map_err(|source| HistoryError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load(path: &Path) -> Result<Vec<EpochRecord>, HistoryError> {
    let text = std::fs::read_to_string(path).map_err(|source| HistoryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(epoch: usize) -> EpochRecord {
        EpochRecord {
            epoch,
            train_loss: 0.5 / epoch as f64,
            train_acc: 0.9,
            test_loss: 0.6 / epoch as f64,
            test_acc: 0.875,
        }
    }

    #[test]
    fn round_trip() {
        let history = vec![record(1), record(2), record(3)];
        let csv = to_csv(&history);
        assert!(csv.starts_with(HEADER));
        let back = parse_csv(&csv).unwrap();
        assert_eq!(back, history);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_csv(""), Err(HistoryError::BadHeader)));
        assert!(matches!(
            parse_csv("epoch,nope\n"),
            Err(HistoryError::BadHeader)
        ));
        let bad_fields = format!("{HEADER}\n1,2,3\n");
        assert!(matches!(
            parse_csv(&bad_fields),
            Err(HistoryError::BadRecord { line: 2, .. })
        ));
        let bad_float = format!("{HEADER}\n1,0.1,zz,0.2,0.3\n");
        assert!(matches!(
            parse_csv(&bad_float),
            Err(HistoryError::BadRecord { .. })
        ));
    }
}

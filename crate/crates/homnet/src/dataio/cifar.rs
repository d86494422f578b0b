//! CIFAR-10 binary batch parsing.
//!
//! A batch is a sequence of 3073-byte records: one label byte in `[0, 9]`
//! followed by 1024 red, 1024 green and 1024 blue bytes (planar, row-major).
//! Records are decoded to channel-interleaved [`RawImage`]s.

use super::{DataError, RawImage};

pub const RECORD_LEN: usize = 3073;
const PLANE: usize = 1024;

/// Parses a CIFAR-10 binary batch into `(image, label)` pairs.
pub fn parse_cifar10(bytes: &[u8]) -> Result<Vec<(RawImage, u8)>, DataError> {
    if bytes.is_empty() || bytes.len() % RECORD_LEN != 0 {
        return Err(DataError::TruncatedFile {
            expected: bytes.len().div_ceil(RECORD_LEN).max(1) * RECORD_LEN,
            got: bytes.len(),
        });
    }
    let mut out = Vec::with_capacity(bytes.len() / RECORD_LEN);
    for record in bytes.chunks_exact(RECORD_LEN) {
        let label = record[0];
        if label > 9 {
            return Err(DataError::LabelOutOfRange { label });
        }
        let planes = &record[1..];
        let mut data = vec![0u8; 3 * PLANE];
        for px in 0..PLANE {
            data[3 * px] = planes[px];
            data[3 * px + 1] = planes[PLANE + px];
            data[3 * px + 2] = planes[2 * PLANE + px];
        }
        out.push((RawImage::new(32, 32, 3, data)?, label));
    }
    Ok(out)
}

/// Serializes `(image, label)` pairs back to the binary batch layout.
pub fn write_cifar10(records: &[(RawImage, u8)]) -> Result<Vec<u8>, DataError> {
    let mut out = Vec::with_capacity(records.len() * RECORD_LEN);
    for (img, label) in records {
        if img.channels != 3 {
            return Err(DataError::WrongChannelCount {
                expected: 3,
                got: img.channels,
            });
        }
        if img.width != 32 || img.height != 32 {
            return Err(DataError::WrongDimensions {
                expected: (32, 32),
                got: (img.width, img.height),
            });
        }
        out.push(*label);
        for c in 0..3 {
            for px in 0..PLANE {
                out.push(img.data[3 * px + c]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(label: u8) -> Vec<u8> {
        let mut bytes = vec![label];
        bytes.extend((0..3072).map(|i| (i % 251) as u8));
        bytes
    }

    #[test]
    fn single_record() {
        let parsed = parse_cifar10(&record(0)).unwrap();
        assert_eq!(parsed.len(), 1);
        let (img, label) = &parsed[0];
        assert_eq!(*label, 0);
        assert_eq!((img.width, img.height, img.channels), (32, 32, 3));
        // First pixel: R = plane[0], G = plane[1024], B = plane[2048].
        assert_eq!(img.data[0], 0);
        assert_eq!(img.data[1], (1024 % 251) as u8);
        assert_eq!(img.data[2], (2048 % 251) as u8);
    }

    #[test]
    fn two_records_by_length() {
        let mut bytes = record(3);
        bytes.extend(record(9));
        let parsed = parse_cifar10(&bytes).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].1, 3);
        assert_eq!(parsed[1].1, 9);
    }

    #[test]
    fn truncated_file() {
        assert!(matches!(
            parse_cifar10(&vec![0u8; 3072]),
            Err(DataError::TruncatedFile { .. })
        ));
        assert!(matches!(
            parse_cifar10(&[]),
            Err(DataError::TruncatedFile { .. })
        ));
    }

    #[test]
    fn label_out_of_range() {
        assert!(matches!(
            parse_cifar10(&record(10)),
            Err(DataError::LabelOutOfRange { label: 10 })
        ));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let mut bytes = record(5);
        bytes.extend(record(0));
        let records = parse_cifar10(&bytes).unwrap();
        assert_eq!(write_cifar10(&records).unwrap(), bytes);
    }
}

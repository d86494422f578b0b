//! IDX container parsing (MNIST-family image and label files).
//!
//! Layout is big-endian: a `u32` magic (2051 for 3-dimensional image files,
//! 2049 for 1-dimensional label files), one `u32` per dimension, then the
//! raw `u8` payload.

use super::{DataError, RawImage};

pub const IMAGE_MAGIC: u32 = 2051;
pub const LABEL_MAGIC: u32 = 2049;

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32, DataError> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(DataError::TruncatedFile {
            expected: end,
            got: bytes.len(),
        });
    }
    Ok(u32::from_be_bytes([
        bytes[offset],
        bytes[offset + 1],
        bytes[offset + 2],
        bytes[offset + 3],
    ]))
}

/// Parses an IDX image file (magic 2051) into single-channel images.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<RawImage>, DataError> {
    let magic = read_u32(bytes, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(DataError::BadMagic {
            expected: IMAGE_MAGIC,
            got: magic,
        });
    }
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let pixel_count = count
        .checked_mul(rows)
        .and_then(|n| n.checked_mul(cols))
        .ok_or(DataError::TruncatedFile {
            expected: usize::MAX,
            got: bytes.len(),
        })?;
    let expected = 16 + pixel_count;
    if bytes.len() < expected {
        return Err(DataError::TruncatedFile {
            expected,
            got: bytes.len(),
        });
    }
    let mut images = Vec::with_capacity(count);
    for i in 0..count {
        let start = 16 + i * rows * cols;
        images.push(RawImage::new(
            cols as u32,
            rows as u32,
            1,
            bytes[start..start + rows * cols].to_vec(),
        )?);
    }
    Ok(images)
}

/// Parses an IDX label file (magic 2049).
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DataError> {
    let magic = read_u32(bytes, 0)?;
    if magic != LABEL_MAGIC {
        return Err(DataError::BadMagic {
            expected: LABEL_MAGIC,
            got: magic,
        });
    }
    let count = read_u32(bytes, 4)? as usize;
    let expected = 8 + count;
    if bytes.len() < expected {
        return Err(DataError::TruncatedFile {
            expected,
            got: bytes.len(),
        });
    }
    Ok(bytes[8..8 + count].to_vec())
}

/// Serializes single-channel images of identical dimensions to IDX bytes.
pub fn write_idx_images(images: &[RawImage]) -> Result<Vec<u8>, DataError> {
    let (rows, cols) = match images.first() {
        Some(img) => (img.height, img.width),
        None => (0, 0),
    };
    let mut out = Vec::with_capacity(16 + images.len() * (rows * cols) as usize);
    out.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&rows.to_be_bytes());
    out.extend_from_slice(&cols.to_be_bytes());
    for img in images {
        if img.channels != 1 {
            return Err(DataError::WrongChannelCount {
                expected: 1,
                got: img.channels,
            });
        }
        if img.height != rows || img.width != cols {
            return Err(DataError::WrongDimensions {
                expected: (cols, rows),
                got: (img.width, img.height),
            });
        }
        out.extend_from_slice(&img.data);
    }
    Ok(out)
}

/// Serializes labels to IDX bytes.
pub fn write_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture_images() -> Vec<RawImage> {
        (0..2)
            .map(|i| RawImage::new(28, 28, 1, vec![i as u8; 28 * 28]).unwrap())
            .collect()
    }

    #[test]
    fn parses_hand_built_fixture() {
        let bytes = write_idx_images(&fixture_images()).unwrap();
        let images = parse_idx_images(&bytes).unwrap();
        assert_eq!(images.len(), 2);
        for img in &images {
            assert_eq!(img.data.len(), 784);
            assert_eq!((img.width, img.height, img.channels), (28, 28, 1));
        }
    }

    #[test]
    fn empty_file_is_truncated() {
        assert!(matches!(
            parse_idx_images(&[]),
            Err(DataError::TruncatedFile { .. })
        ));
        assert!(matches!(
            parse_idx_labels(&[]),
            Err(DataError::TruncatedFile { .. })
        ));
    }

    #[test]
    fn swapped_files_give_bad_magic() {
        let labels = write_idx_labels(&[0, 1]);
        assert!(matches!(
            parse_idx_images(&labels),
            Err(DataError::BadMagic { got: LABEL_MAGIC, .. })
        ));
        let images = write_idx_images(&fixture_images()).unwrap();
        assert!(matches!(
            parse_idx_labels(&images),
            Err(DataError::BadMagic { got: IMAGE_MAGIC, .. })
        ));
    }

    #[test]
    fn truncated_payload_detected() {
        let mut bytes = write_idx_images(&fixture_images()).unwrap();
        bytes.truncate(bytes.len() - 1);
        assert!(matches!(
            parse_idx_images(&bytes),
            Err(DataError::TruncatedFile { .. })
        ));
    }

    #[test]
    fn oversized_header_counts_do_not_overflow() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
        bytes.extend_from_slice(&u32::MAX.to_be_bytes());
        bytes.extend_from_slice(&u32::MAX.to_be_bytes());
        bytes.extend_from_slice(&u32::MAX.to_be_bytes());
        assert!(parse_idx_images(&bytes).is_err());
    }
}

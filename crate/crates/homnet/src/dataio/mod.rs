//! Dataset parsing and preprocessing.
//!
//! Raw MNIST/Fashion-MNIST IDX and CIFAR-10 binary files are decoded to
//! [`RawImage`]s, reduced to a binary class pair, preprocessed to 32×32
//! grayscale and encoded as unit-norm feature vectors with a deterministic
//! 85:15 train/test split.

use ndarray::Array1;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::path::Path;
use thiserror::Error;

use crate::statevec::FeatureVector;

pub mod cifar;
pub mod idx;

pub use cifar::{parse_cifar10, write_cifar10};
pub use idx::{parse_idx_images, parse_idx_labels, write_idx_images, write_idx_labels};

/// Number of pixels after preprocessing (32×32).
pub const FEATURE_DIM: usize = 1024;

/// Fraction of examples assigned to the training set.
pub const TRAIN_FRACTION: f64 = 0.85;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("bad magic: expected {expected}, got {got}")]
    BadMagic { expected: u32, got: u32 },
    #[error("truncated file: expected at least {expected} bytes, got {got}")]
    TruncatedFile { expected: usize, got: usize },
    #[error("count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("label {label} out of range [0, 9]")]
    LabelOutOfRange { label: u8 },
    #[error("wrong channel count: expected {expected}, got {got}")]
    WrongChannelCount { expected: u8, got: u8 },
    #[error("wrong dimensions: expected {}x{}, got {}x{}", expected.0, expected.1, got.0, got.1)]
    WrongDimensions { expected: (u32, u32), got: (u32, u32) },
    #[error("class {class} has no examples")]
    EmptyClass { class: u8 },
    #[error("class pair ({0}, {1}) is not a pair of distinct classes")]
    InvalidClassPair(u8, u8),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Row-major 8-bit image, channel-interleaved when 3-channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImage {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub data: Vec<u8>,
}

impl RawImage {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self, DataError> {
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(DataError::TruncatedFile {
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }
}

/// One preprocessed example: 1024 amplitudes and a binary label.
#[derive(Debug, Clone)]
pub struct LabeledExample {
    pub features: FeatureVector,
    pub label: u8,
}

/// Which raw dataset and class pair a split was built from.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TaskDescriptor {
    pub dataset: String,
    pub class_a: u8,
    pub class_b: u8,
}

/// Deterministic 85:15 split of preprocessed binary-task examples.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Vec<LabeledExample>,
    pub test: Vec<LabeledExample>,
    pub seed: u64,
    pub task: TaskDescriptor,
}

fn read_file(path: &Path) -> Result<Vec<u8>, DataError> {
    std::fs::read(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads a matching IDX image/label file pair.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Vec<(RawImage, u8)>, DataError> {
    let images = parse_idx_images(&read_file(images_path)?)?;
    let labels = parse_idx_labels(&read_file(labels_path)?)?;
    if images.len() != labels.len() {
        return Err(DataError::CountMismatch {
            images: images.len(),
            labels: labels.len(),
        });
    }
    Ok(images.into_iter().zip(labels).collect())
}

/// Loads one CIFAR-10 binary batch file.
pub fn load_cifar10(batch_path: &Path) -> Result<Vec<(RawImage, u8)>, DataError> {
    parse_cifar10(&read_file(batch_path)?)
}

/// ITU-R BT.601 luma conversion, rounded and clamped to `[0, 255]`.
pub fn to_grayscale(img: &RawImage) -> Result<RawImage, DataError> {
    if img.channels != 3 {
        return Err(DataError::WrongChannelCount {
            expected: 3,
            got: img.channels,
        });
    }
    let data = img
        .data
        .chunks_exact(3)
        .map(|px| {
            let luma = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
            luma.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    RawImage::new(img.width, img.height, 1, data)
}

/// Pads a 28×28 single-channel image to 32×32 with a 2-pixel zero border.
pub fn zero_pad(img: &RawImage) -> Result<RawImage, DataError> {
    if img.channels != 1 {
        return Err(DataError::WrongChannelCount {
            expected: 1,
            got: img.channels,
        });
    }
    if img.width != 28 || img.height != 28 {
        return Err(DataError::WrongDimensions {
            expected: (28, 28),
            got: (img.width, img.height),
        });
    }
    let mut data = vec![0u8; 32 * 32];
    for row in 0..28 {
        let src = row * 28;
        let dst = (row + 2) * 32 + 2;
        data[dst..dst + 28].copy_from_slice(&img.data[src..src + 28]);
    }
    RawImage::new(32, 32, 1, data)
}

/// Encodes a 32×32 grayscale image as amplitudes `xⱼ = vⱼ/255` rescaled to
/// unit L2 norm.
///
/// All-zero images cannot be normalized; they yield the zero vector and a
/// `true` degenerate flag instead of an error.
pub fn encode_input(img: &RawImage) -> Result<(FeatureVector, bool), DataError> {
    if img.channels != 1 {
        return Err(DataError::WrongChannelCount {
            expected: 1,
            got: img.channels,
        });
    }
    if img.width != 32 || img.height != 32 {
        return Err(DataError::WrongDimensions {
            expected: (32, 32),
            got: (img.width, img.height),
        });
    }
    let mut amps: Array1<f64> = img.data.iter().map(|&v| v as f64 / 255.0).collect();
    let norm = amps.dot(&amps).sqrt();
    let degenerate = norm == 0.0;
    if !degenerate {
        amps /= norm;
    }
    Ok((FeatureVector::new(amps).expect("finite"), degenerate))
}

/// Preprocesses one raw image to a feature vector: grayscale when 3-channel,
/// zero-padding when 28×28, then unit-norm encoding.
pub fn preprocess(img: &RawImage) -> Result<(FeatureVector, bool), DataError> {
    let gray;
    let img = if img.channels == 3 {
        gray = to_grayscale(img)?;
        &gray
    } else {
        img
    };
    let padded;
    let img = if img.width == 28 && img.height == 28 {
        padded = zero_pad(img)?;
        &padded
    } else {
        img
    };
    encode_input(img)
}

/// Builds the binary task `class_a → 0, class_b → 1` from a labeled set:
/// filters the two classes, preprocesses, shuffles with the seeded generator
/// and splits 85:15.
pub fn make_binary_task(
    items: &[(RawImage, u8)],
    class_a: u8,
    class_b: u8,
    seed: u64,
    dataset: &str,
) -> Result<DatasetSplit, DataError> {
    if class_a == class_b {
        return Err(DataError::InvalidClassPair(class_a, class_b));
    }
    let mut examples = Vec::new();
    let mut degenerate_count = 0usize;
    for (img, label) in items {
        let binary = if *label == class_a {
            0
        } else if *label == class_b {
            1
        } else {
            continue;
        };
        let (features, degenerate) = preprocess(img)?;
        if degenerate {
            degenerate_count += 1;
        }
        examples.push(LabeledExample {
            features,
            label: binary,
        });
    }
    for (class, label) in [(class_a, 0u8), (class_b, 1u8)] {
        if !examples.iter().any(|e| e.label == label) {
            return Err(DataError::EmptyClass { class });
        }
    }
    if degenerate_count > 0 {
        log::warn!("{degenerate_count} all-zero image(s) encoded as zero vectors");
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    examples.shuffle(&mut rng);
    let n_train = (TRAIN_FRACTION * examples.len() as f64).round() as usize;
    let test = examples.split_off(n_train);
    Ok(DatasetSplit {
        train: examples,
        test,
        seed,
        task: TaskDescriptor {
            dataset: dataset.to_string(),
            class_a,
            class_b,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grayscale_reference_points() {
        let img = RawImage::new(1, 3, 3, vec![255, 255, 255, 0, 0, 0, 255, 0, 0]).unwrap();
        let gray = to_grayscale(&img).unwrap();
        assert_eq!(gray.data, vec![255, 0, 76]);
    }

    #[test]
    fn grayscale_wrong_channels() {
        let img = RawImage::new(2, 2, 1, vec![0; 4]).unwrap();
        assert!(matches!(
            to_grayscale(&img),
            Err(DataError::WrongChannelCount { .. })
        ));
    }

    #[test]
    fn zero_pad_centers_with_two_pixel_border() {
        let mut data = vec![0u8; 28 * 28];
        data[0] = 255;
        let img = RawImage::new(28, 28, 1, data).unwrap();
        let padded = zero_pad(&img).unwrap();
        assert_eq!(padded.data[2 * 32 + 2], 255);
        assert_eq!(padded.data.iter().map(|&v| v as u64).sum::<u64>(), 255);

        let zeros = zero_pad(&RawImage::new(28, 28, 1, vec![0; 784]).unwrap()).unwrap();
        assert!(zeros.data.iter().all(|&v| v == 0));
    }

    #[test]
    fn zero_pad_rejects_wrong_size() {
        let img = RawImage::new(32, 32, 1, vec![0; 1024]).unwrap();
        assert!(matches!(
            zero_pad(&img),
            Err(DataError::WrongDimensions { .. })
        ));
    }

    #[test]
    fn zero_pad_preserves_l1_mass() {
        let data: Vec<u8> = (0..784).map(|i| (i % 256) as u8).collect();
        let mass: u64 = data.iter().map(|&v| v as u64).sum();
        let img = RawImage::new(28, 28, 1, data).unwrap();
        let padded = zero_pad(&img).unwrap();
        assert_eq!(padded.data.iter().map(|&v| v as u64).sum::<u64>(), mass);
    }

    #[test]
    fn encode_one_hot_and_uniform() {
        let mut data = vec![0u8; 1024];
        data[17] = 255;
        let (x, degenerate) = encode_input(&RawImage::new(32, 32, 1, data).unwrap()).unwrap();
        assert!(!degenerate);
        assert_eq!(x.as_slice()[17], 1.0);
        assert!((x.norm() - 1.0).abs() < 1e-12);

        let (x, _) = encode_input(&RawImage::new(32, 32, 1, vec![255; 1024]).unwrap()).unwrap();
        for &v in x.as_slice() {
            assert!((v - 1.0 / 32.0).abs() < 1e-15);
        }
    }

    #[test]
    fn encode_all_zero_is_flagged() {
        let (x, degenerate) = encode_input(&RawImage::new(32, 32, 1, vec![0; 1024]).unwrap())
            .unwrap();
        assert!(degenerate);
        assert_eq!(x.norm(), 0.0);
    }

    fn toy_items(n_a: usize, n_b: usize) -> Vec<(RawImage, u8)> {
        let mut items = Vec::new();
        for i in 0..n_a.max(n_b) {
            let mut data = vec![0u8; 784];
            data[i % 784] = 200;
            let img = RawImage::new(28, 28, 1, data).unwrap();
            if i < n_a {
                items.push((img.clone(), 3));
            }
            if i < n_b {
                items.push((img, 7));
            }
        }
        items
    }

    #[test]
    fn split_ratio_and_determinism() {
        let items = toy_items(100, 100);
        let split = make_binary_task(&items, 3, 7, 42, "toy").unwrap();
        assert_eq!(split.train.len(), 170);
        assert_eq!(split.test.len(), 30);
        assert!(split.train.iter().chain(&split.test).all(|e| e.label < 2));

        let again = make_binary_task(&items, 3, 7, 42, "toy").unwrap();
        for (a, b) in split.train.iter().zip(&again.train) {
            assert_eq!(a.label, b.label);
            assert_eq!(a.features.as_slice(), b.features.as_slice());
        }

        let other = make_binary_task(&items, 3, 7, 43, "toy").unwrap();
        let same_order = split
            .train
            .iter()
            .zip(&other.train)
            .all(|(a, b)| a.features.as_slice() == b.features.as_slice());
        assert!(!same_order);
    }

    #[test]
    fn split_rejects_bad_classes() {
        let items = toy_items(10, 10);
        assert!(matches!(
            make_binary_task(&items, 3, 3, 0, "toy"),
            Err(DataError::InvalidClassPair(3, 3))
        ));
        assert!(matches!(
            make_binary_task(&items, 3, 9, 0, "toy"),
            Err(DataError::EmptyClass { class: 9 })
        ));
    }
}

//! Model checkpoints.
//!
//! JSON object with keys `schema_version`, `model_kind`, `M`, `N`,
//! `hidden` (row-major), `out_weights`, `bias`, `track_K`,
//! `positivity_map`, `C`; classical checkpoints add `constrained`.
//! Floats round-trip exactly through serde_json's shortest representation.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

use crate::models::{ClassicalModel, MixtureModel, Model, PositivityMap, SuperpositionModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("invalid checkpoint: {0}")]
    Invalid(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindTag {
    Mixture,
    Superposition,
    Classical,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointFile {
    schema_version: u32,
    model_kind: KindTag,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    hidden: Vec<f64>,
    out_weights: Vec<f64>,
    bias: f64,
    #[serde(rename = "track_K")]
    track_k: bool,
    positivity_map: PositivityMap,
    #[serde(rename = "C")]
    c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constrained: Option<bool>,
}

/// Serializes a model to checkpoint JSON.
pub fn to_json(model: &Model) -> String {
    let (kind, hidden, out, bias, track_k, positivity, c, constrained) = match model {
        Model::Mixture(m) => (
            KindTag::Mixture,
            &m.hidden,
            &m.out_weights,
            m.bias,
            m.track_k,
            m.positivity,
            m.c,
            None,
        ),
        Model::Superposition(m) => (
            KindTag::Superposition,
            &m.hidden,
            &m.out_weights,
            m.bias,
            false,
            PositivityMap::Abs,
            1.0,
            None,
        ),
        Model::Classical(m) => (
            KindTag::Classical,
            &m.hidden,
            &m.out_weights,
            m.bias,
            false,
            PositivityMap::Abs,
            1.0,
            Some(m.constrained),
        ),
    };
    let file = CheckpointFile {
        schema_version: SCHEMA_VERSION,
        model_kind: kind,
        m: hidden.nrows(),
        n: hidden.ncols(),
        hidden: hidden.iter().copied().collect(),
        out_weights: out.to_vec(),
        bias,
        track_k,
        positivity_map: positivity,
        c,
        constrained,
    };
    serde_json::to_string(&file).expect("checkpoint serialization cannot fail")
}

/// Parses checkpoint JSON back into a model.
pub fn from_json(json: &str) -> Result<Model, CheckpointError> {
    let file: CheckpointFile = serde_json::from_str(json)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(CheckpointError::Invalid(format!(
            "unsupported schema version {}",
            file.schema_version
        )));
    }
    if file.m == 0 || file.n == 0 {
        return Err(CheckpointError::Invalid("M and N must be >= 1".into()));
    }
    let expected = file
        .m
        .checked_mul(file.n)
        .ok_or_else(|| CheckpointError::Invalid("M·N overflows".into()))?;
    if file.hidden.len() != expected {
        return Err(CheckpointError::Invalid(format!(
            "hidden has {} entries, expected {}×{}",
            file.hidden.len(),
            file.m,
            file.n
        )));
    }
    if file.out_weights.len() != file.m {
        return Err(CheckpointError::Invalid(format!(
            "out_weights has {} entries, expected {}",
            file.out_weights.len(),
            file.m
        )));
    }
    if !file.bias.is_finite()
        || file.hidden.iter().any(|v| !v.is_finite())
        || file.out_weights.iter().any(|v| !v.is_finite())
    {
        return Err(CheckpointError::Invalid("non-finite parameter".into()));
    }
    let hidden = Array2::from_shape_vec((file.m, file.n), file.hidden)
        .expect("length checked above");
    let out = Array1::from_vec(file.out_weights);
    Ok(match file.model_kind {
        KindTag::Mixture => {
            let mut m = MixtureModel::new(hidden, out, file.bias);
            m.track_k = file.track_k;
            m.positivity = file.positivity_map;
            m.c = file.c;
            Model::Mixture(m)
        }
        KindTag::Superposition => {
            Model::Superposition(SuperpositionModel::new(hidden, out, file.bias))
        }
        KindTag::Classical => Model::Classical(ClassicalModel::new(
            hidden,
            out,
            file.bias,
            file.constrained.unwrap_or(false),
        )),
    })
}

pub fn save(path: &Path, model: &Model) -> Result<(), CheckpointError> {
    std::fs::write(path, to_json(model)).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load(path: &Path) -> Result<Model, CheckpointError> {
    let json = std::fs::read_to_string(path).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_json(&json)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn mixture_round_trip_is_exact() {
        let mut m = MixtureModel::new(
            array![[0.1234567890123456, -0.987654321e-7], [1.0 / 3.0, 2.0f64.sqrt()]],
            array![0.3, 0.7],
            -0.25,
        );
        m.track_k = true;
        m.positivity = PositivityMap::Relu;
        let json = to_json(&Model::Mixture(m.clone()));
        let back = from_json(&json).unwrap();
        match back {
            Model::Mixture(b) => {
                assert_eq!(b.hidden, m.hidden);
                assert_eq!(b.out_weights, m.out_weights);
                assert_eq!(b.bias, m.bias);
                assert_eq!(b.track_k, m.track_k);
                assert_eq!(b.positivity, m.positivity);
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn classical_keeps_constrained_flag() {
        let m = ClassicalModel::new(array![[1.0, 0.0]], array![0.5], 0.0, true);
        let json = to_json(&Model::Classical(m));
        assert!(json.contains("\"constrained\":true"));
        match from_json(&json).unwrap() {
            Model::Classical(b) => assert!(b.constrained),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn schema_keys_are_pinned() {
        let json = to_json(&Model::Superposition(SuperpositionModel::new(
            array![[1.0, 0.0]],
            array![1.0],
            0.0,
        )));
        for key in [
            "\"schema_version\"",
            "\"model_kind\"",
            "\"M\"",
            "\"N\"",
            "\"hidden\"",
            "\"out_weights\"",
            "\"bias\"",
            "\"track_K\"",
            "\"positivity_map\"",
            "\"C\"",
        ] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(from_json("not json").is_err());
        let m = MixtureModel::new(array![[1.0, 0.0]], array![1.0], 0.0);
        let json = to_json(&Model::Mixture(m));
        let wrong_count = json.replace("\"N\":2", "\"N\":3");
        assert!(matches!(
            from_json(&wrong_count),
            Err(CheckpointError::Invalid(_))
        ));
        let bad_float = json.replace("\"bias\":0.0", "\"bias\":null");
        assert!(from_json(&bad_float).is_err());
    }
}

//! Single-file morphable model container.
//!
//! Layout:
//!
//! ```text
//! "PFIGMDL1"                 8-byte magic
//! u32 LE                     header length in bytes
//! header                     UTF-8 JSON, see `Header`
//! data                       little-endian arrays at the header's offsets
//! ```
//!
//! Offsets are relative to the start of the data section. Float fields are
//! `f32`; `triangles` is `u32` index triplets. Bases are column-major.
//! The writer emits fields in this order: `shape_mean`, `shape_basis`,
//! `shape_sigma`, `color_mean`, `color_basis`, `color_sigma`, `expr_basis`,
//! `expr_sigma`, `triangles`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{MorphableModel, PcaBasis};
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"PFIGMDL1";
pub const FORMAT_VERSION: u32 = 1;

const FIELD_ORDER: [&str; 9] = [
    "shape_mean",
    "shape_basis",
    "shape_sigma",
    "color_mean",
    "color_basis",
    "color_sigma",
    "expr_basis",
    "expr_sigma",
    "triangles",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format_version: u32,
    pub n_vertices: usize,
    pub k_shape: usize,
    pub k_color: usize,
    pub k_expr: usize,
    pub n_triangles: usize,
    pub fields: Vec<Field>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub name: String,
    /// Byte offset from the start of the data section.
    pub offset: u64,
    /// Number of 4-byte elements.
    pub count: u64,
}

impl Header {
    fn expected_count(&self, name: &str) -> u64 {
        let dim = 3 * self.n_vertices as u64;
        match name {
            "shape_mean" | "color_mean" => dim,
            "shape_basis" => dim * self.k_shape as u64,
            "color_basis" => dim * self.k_color as u64,
            "expr_basis" => dim * self.k_expr as u64,
            "shape_sigma" => self.k_shape as u64,
            "color_sigma" => self.k_color as u64,
            "expr_sigma" => self.k_expr as u64,
            "triangles" => 3 * self.n_triangles as u64,
            _ => unreachable!("unknown field {name}"),
        }
    }
}

pub fn encode(model: &MorphableModel) -> Vec<u8> {
    let arrays: [&[f32]; 8] = [
        model.shape_mean(),
        model.shape().columns(),
        model.shape().sigma(),
        model.color_mean(),
        model.color().columns(),
        model.color().sigma(),
        model.expression().columns(),
        model.expression().sigma(),
    ];
    let mut data = Vec::new();
    let mut fields = Vec::with_capacity(FIELD_ORDER.len());
    for (name, values) in FIELD_ORDER.iter().zip(arrays) {
        fields.push(Field {
            name: (*name).to_owned(),
            offset: data.len() as u64,
            count: values.len() as u64,
        });
        data.extend(values.iter().flat_map(|v| v.to_le_bytes()));
    }
    fields.push(Field {
        name: "triangles".to_owned(),
        offset: data.len() as u64,
        count: 3 * model.triangles().len() as u64,
    });
    data.extend(
        model
            .triangles()
            .iter()
            .flatten()
            .flat_map(|i| i.to_le_bytes()),
    );

    let header = Header {
        format_version: FORMAT_VERSION,
        n_vertices: model.n_vertices(),
        k_shape: model.k_shape(),
        k_color: model.k_color(),
        k_expr: model.k_expr(),
        n_triangles: model.triangles().len(),
        fields,
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(12 + json.len() + data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&data);
    out
}

/// Parses and validates a container. `Err(String)` carries the reason.
pub fn decode(bytes: &[u8]) -> std::result::Result<MorphableModel, String> {
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err("bad magic, not a PFIGMDL1 model".into());
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let header_end = 12usize
        .checked_add(header_len)
        .filter(|&e| e <= bytes.len())
        .ok_or("header length exceeds file size")?;
    let header: Header =
        serde_json::from_slice(&bytes[12..header_end]).map_err(|e| format!("header: {e}"))?;
    if header.format_version != FORMAT_VERSION {
        return Err(format!(
            "unsupported format version {}",
            header.format_version
        ));
    }
    let data = &bytes[header_end..];

    let raw = |name: &str| -> std::result::Result<&[u8], String> {
        let field = header
            .fields
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| format!("missing field {name}"))?;
        let want = header.expected_count(name);
        if field.count != want {
            return Err(format!(
                "field {name} has {} elements, dimensions require {want}",
                field.count
            ));
        }
        let start = usize::try_from(field.offset).map_err(|_| "offset overflow")?;
        let end = field
            .count
            .checked_mul(4)
            .and_then(|n| usize::try_from(n).ok())
            .and_then(|n| start.checked_add(n))
            .filter(|&e| e <= data.len())
            .ok_or_else(|| format!("field {name} runs past the end of the file"))?;
        Ok(&data[start..end])
    };
    let floats = |name: &str| -> std::result::Result<Vec<f32>, String> {
        Ok(raw(name)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    };

    let dim = 3 * header.n_vertices;
    let basis = |prefix: &str| -> std::result::Result<PcaBasis, String> {
        PcaBasis::new(
            dim,
            floats(&format!("{prefix}_basis"))?,
            floats(&format!("{prefix}_sigma"))?,
        )
        .map_err(|e| format!("{prefix}: {e}"))
    };
    let indices: Vec<u32> = raw("triangles")?
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let triangles = indices
        .chunks_exact(3)
        .map(|t| [t[0], t[1], t[2]])
        .collect();
    MorphableModel::new(
        floats("shape_mean")?,
        basis("shape")?,
        floats("color_mean")?,
        basis("color")?,
        basis("expr")?,
        triangles,
    )
    .map_err(|e| e.to_string())
}

pub fn save_model(model: &MorphableModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MorphableModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::ModelLoad {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    decode(&bytes).map_err(|reason| Error::ModelLoad {
        path: path.to_path_buf(),
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_toy_model, ToyModelSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> MorphableModel {
        let spec = ToyModelSpec {
            subdivisions: 1,
            k_shape: 4,
            k_color: 3,
            k_expr: 2,
        };
        build_toy_model(&spec, &mut ChaCha8Rng::seed_from_u64(3)).unwrap()
    }

    #[test]
    fn round_trip_is_lossless() {
        let model = toy();
        let bytes = encode(&model);
        assert_eq!(&bytes[..8], b"PFIGMDL1");
        assert_eq!(decode(&bytes).unwrap(), model);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.pfig");
        let model = toy();
        save_model(&model, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), model);
    }

    #[test]
    fn bad_magic_rejected() {
        let mut bytes = encode(&toy());
        bytes[7] = b'2';
        assert!(decode(&bytes).unwrap_err().contains("magic"));
    }

    #[test]
    fn truncated_file_rejected() {
        let bytes = encode(&toy());
        let err = decode(&bytes[..bytes.len() - 4]).unwrap_err();
        assert!(err.contains("past the end"), "{err}");
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let bytes = encode(&toy());
        let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let mut header: Header = serde_json::from_slice(&bytes[12..12 + header_len]).unwrap();
        header.k_shape += 1;
        let json = serde_json::to_vec(&header).unwrap();
        let mut patched = MAGIC.to_vec();
        patched.extend_from_slice(&(json.len() as u32).to_le_bytes());
        patched.extend_from_slice(&json);
        patched.extend_from_slice(&bytes[12 + header_len..]);
        assert!(decode(&patched).unwrap_err().contains("dimensions require"));
    }

    #[test]
    fn missing_file_is_load_error() {
        let err = load_model("/nonexistent/model.pfig").unwrap_err();
        assert!(matches!(err, Error::ModelLoad { .. }));
    }
}

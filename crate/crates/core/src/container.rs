//! Binary container shared by every saveable model.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "ATRB"  u32 version  u64 metadata_len  metadata (UTF-8 JSON)
//! u64 section_count
//! per section: u64 name_len, name bytes, u8 dtype (0 = f64, 1 = i64),
//!              u64 element_count, elements
//! ```
//!
//! Metadata carries the model kind under the `"model"` key plus whatever
//! strings and scalars the kind needs; bulk numeric state goes into
//! sections.

use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"ATRB";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum SectionData {
    F64(Vec<f64>),
    I64(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub data: SectionData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub metadata: serde_json::Value,
    pub sections: Vec<Section>,
}

impl Container {
    pub fn new(metadata: serde_json::Value) -> Self {
        Container { metadata, sections: Vec::new() }
    }

    pub fn push_f64(&mut self, name: impl Into<String>, data: Vec<f64>) {
        self.sections.push(Section { name: name.into(), data: SectionData::F64(data) });
    }

    pub fn push_i64(&mut self, name: impl Into<String>, data: Vec<i64>) {
        self.sections.push(Section { name: name.into(), data: SectionData::I64(data) });
    }

    pub fn section(&self, name: &str) -> Result<&Section> {
        self.sections
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Container(format!("missing section {name:?}")))
    }

    pub fn f64_section(&self, name: &str) -> Result<&[f64]> {
        match &self.section(name)?.data {
            SectionData::F64(v) => Ok(v),
            SectionData::I64(_) => Err(Error::Container(format!("section {name:?} is not f64"))),
        }
    }

    pub fn i64_section(&self, name: &str) -> Result<&[i64]> {
        match &self.section(name)?.data {
            SectionData::I64(v) => Ok(v),
            SectionData::F64(_) => Err(Error::Container(format!("section {name:?} is not i64"))),
        }
    }

    /// The `"model"` metadata entry.
    pub fn model_kind(&self) -> Result<&str> {
        self.meta_str("model")
    }

    /// Fails with [`Error::Incompatible`] unless the container holds a model
    /// of the given kind.
    pub fn expect_model(&self, kind: &str) -> Result<()> {
        let found = self.model_kind()?;
        if found == kind {
            Ok(())
        } else {
            Err(Error::Incompatible(format!("expected a {kind} model, found {found}")))
        }
    }

    pub fn meta(&self, key: &str) -> Result<&serde_json::Value> {
        self.metadata
            .get(key)
            .ok_or_else(|| Error::Container(format!("missing metadata key {key:?}")))
    }

    pub fn meta_str(&self, key: &str) -> Result<&str> {
        self.meta(key)?
            .as_str()
            .ok_or_else(|| Error::Container(format!("metadata key {key:?} is not a string")))
    }

    pub fn meta_u64(&self, key: &str) -> Result<u64> {
        self.meta(key)?
            .as_u64()
            .ok_or_else(|| Error::Container(format!("metadata key {key:?} is not an integer")))
    }

    pub fn meta_usize(&self, key: &str) -> Result<usize> {
        Ok(self.meta_u64(key)? as usize)
    }

    pub fn meta_f64(&self, key: &str) -> Result<f64> {
        self.meta(key)?
            .as_f64()
            .ok_or_else(|| Error::Container(format!("metadata key {key:?} is not a number")))
    }

    pub fn meta_bool(&self, key: &str) -> Result<bool> {
        self.meta(key)?
            .as_bool()
            .ok_or_else(|| Error::Container(format!("metadata key {key:?} is not a boolean")))
    }

    pub fn meta_string_list(&self, key: &str) -> Result<Vec<String>> {
        let arr = self
            .meta(key)?
            .as_array()
            .ok_or_else(|| Error::Container(format!("metadata key {key:?} is not an array")))?;
        arr.iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| Error::Container(format!("metadata key {key:?} holds a non-string")))
            })
            .collect()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let meta =
            serde_json::to_vec(&self.metadata).map_err(|e| Error::Container(e.to_string()))?;
        let mut buf = Vec::with_capacity(64 + meta.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(meta.len() as u64).to_le_bytes());
        buf.extend_from_slice(&meta);
        buf.extend_from_slice(&(self.sections.len() as u64).to_le_bytes());
        for s in &self.sections {
            buf.extend_from_slice(&(s.name.len() as u64).to_le_bytes());
            buf.extend_from_slice(s.name.as_bytes());
            match &s.data {
                SectionData::F64(v) => {
                    buf.push(0);
                    buf.extend_from_slice(&(v.len() as u64).to_le_bytes());
                    for x in v {
                        buf.extend_from_slice(&x.to_le_bytes());
                    }
                }
                SectionData::I64(v) => {
                    buf.push(1);
                    buf.extend_from_slice(&(v.len() as u64).to_le_bytes());
                    for x in v {
                        buf.extend_from_slice(&x.to_le_bytes());
                    }
                }
            }
        }
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Container> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut cur = Cursor { bytes: &bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(Error::Container(format!("{} is not a model container", path.display())));
        }
        let version = u32::from_le_bytes(cur.take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Container(format!(
                "unsupported container version {version} (expected {VERSION})"
            )));
        }
        let meta_len = cur.len_field()?;
        let meta_bytes = cur.take(meta_len)?;
        let metadata: serde_json::Value = serde_json::from_slice(meta_bytes)
            .map_err(|e| Error::Container(format!("bad metadata: {e}")))?;
        let section_count = cur.len_field()?;
        let mut sections = Vec::with_capacity(section_count.min(1024));
        for _ in 0..section_count {
            let name_len = cur.len_field()?;
            let name = std::str::from_utf8(cur.take(name_len)?)
                .map_err(|_| Error::Container("section name is not UTF-8".into()))?
                .to_string();
            let dtype = cur.take(1)?[0];
            let count = cur.len_field()?;
            let data = match dtype {
                0 => {
                    let raw = cur.take(count.checked_mul(8).ok_or_else(oversize)?)?;
                    SectionData::F64(
                        raw.chunks_exact(8)
                            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                            .collect(),
                    )
                }
                1 => {
                    let raw = cur.take(count.checked_mul(8).ok_or_else(oversize)?)?;
                    SectionData::I64(
                        raw.chunks_exact(8)
                            .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
                            .collect(),
                    )
                }
                other => {
                    return Err(Error::Container(format!("unknown section type {other}")));
                }
            };
            sections.push(Section { name, data });
        }
        if cur.pos != bytes.len() {
            return Err(Error::Container("trailing bytes after last section".into()));
        }
        Ok(Container { metadata, sections })
    }
}

fn oversize() -> Error {
    Error::Container("section length overflows".into())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or_else(oversize)?;
        if end > self.bytes.len() {
            return Err(Error::Container("truncated container".into()));
        }
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn len_field(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| oversize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.atrb");
        let mut c = Container::new(serde_json::json!({
            "model": "scap",
            "ngram_size": 3,
            "names": ["a", "b"],
        }));
        c.push_f64("weights", vec![1.5, -2.25, 0.0]);
        c.push_i64("counts", vec![7, -9]);
        c.write(&path).unwrap();
        let back = Container::read(&path).unwrap();
        assert_eq!(c, back);
        assert_eq!(back.f64_section("weights").unwrap(), &[1.5, -2.25, 0.0]);
        assert_eq!(back.i64_section("counts").unwrap(), &[7, -9]);
        assert_eq!(back.meta_usize("ngram_size").unwrap(), 3);
        assert_eq!(back.meta_string_list("names").unwrap(), vec!["a", "b"]);
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("not-a-model");
        std::fs::write(&path, b"PK\x03\x04junk").unwrap();
        assert!(matches!(Container::read(&path), Err(Error::Container(_))));
    }

    #[test]
    fn rejects_future_versions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.atrb");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&2u32.to_le_bytes());
        std::fs::write(&path, bytes).unwrap();
        let err = Container::read(&path).unwrap_err();
        assert!(err.to_string().contains("version"));
    }

    #[test]
    fn rejects_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.atrb");
        let mut c = Container::new(serde_json::json!({"model": "scap"}));
        c.push_f64("w", vec![1.0, 2.0, 3.0]);
        c.write(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        assert!(matches!(Container::read(&path), Err(Error::Container(_))));
    }

    #[test]
    fn expect_model_flags_mismatches() {
        let c = Container::new(serde_json::json!({"model": "scap"}));
        assert!(c.expect_model("scap").is_ok());
        assert!(matches!(c.expect_model("cnn"), Err(Error::Incompatible(_))));
    }

    #[test]
    fn missing_sections_are_named() {
        let c = Container::new(serde_json::json!({"model": "scap"}));
        let err = c.f64_section("weights").unwrap_err();
        assert!(err.to_string().contains("weights"));
    }
}

//! ICD-10 category codes: the second hierarchy level, one uppercase Latin
//! letter followed by exactly two digits (`K81`, `M54`). Full codes such as
//! `K81.0` are truncated to their category before use as labels.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IcdError {
    #[error("malformed ICD-10 code {0:?}: expected an uppercase Latin letter followed by two digits, with an optional .d or .dd suffix")]
    Malformed(String),
}

/// An ICD-10 category code plus an optional human-readable disease name.
///
/// Identity (equality, ordering, hashing) is by `code` alone; `name` is
/// display metadata carried along from the knowledge graph when available.
/// Serializes as the bare code string.
#[derive(Debug, Clone, Default)]
pub struct IcdCategory {
    code: String,
    name: String,
}

impl IcdCategory {
    /// Parse a category-level code (`K81`). Rejects dot suffixes.
    pub fn parse(code: &str) -> Result<Self, IcdError> {
        if is_category_code(code) {
            Ok(Self { code: code.to_string(), name: String::new() })
        } else {
            Err(IcdError::Malformed(code.to_string()))
        }
    }

    /// Parse a category code and attach a disease name.
    pub fn with_name(code: &str, name: &str) -> Result<Self, IcdError> {
        let mut cat = Self::parse(code)?;
        cat.name = name.to_string();
        Ok(cat)
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    /// Disease name; empty when unknown.
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: &str) {
        self.name = name.to_string();
    }
}

/// Truncate a full ICD-10 code (`K81.0`, `Z00.12`) to its category (`K81`).
/// Codes already at category level pass through unchanged.
pub fn truncate_to_category(full_code: &str) -> Result<IcdCategory, IcdError> {
    let bytes = full_code.as_bytes();
    let head_ok = bytes.len() >= 3
        && bytes[0].is_ascii_uppercase()
        && bytes[1].is_ascii_digit()
        && bytes[2].is_ascii_digit();
    let tail_ok = match &bytes[3.min(bytes.len())..] {
        [] => true,
        [b'.', rest @ ..] => {
            (1..=2).contains(&rest.len()) && rest.iter().all(u8::is_ascii_digit)
        }
        _ => false,
    };
    if head_ok && tail_ok {
        IcdCategory::parse(&full_code[..3])
    } else {
        Err(IcdError::Malformed(full_code.to_string()))
    }
}

fn is_category_code(code: &str) -> bool {
    let b = code.as_bytes();
    b.len() == 3 && b[0].is_ascii_uppercase() && b[1].is_ascii_digit() && b[2].is_ascii_digit()
}

impl PartialEq for IcdCategory {
    fn eq(&self, other: &Self) -> bool {
        self.code == other.code
    }
}

impl Eq for IcdCategory {}

impl PartialOrd for IcdCategory {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for IcdCategory {
    fn cmp(&self, other: &Self) -> Ordering {
        self.code.cmp(&other.code)
    }
}

impl Hash for IcdCategory {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.code.hash(state);
    }
}

impl fmt::Display for IcdCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)
    }
}

impl Serialize for IcdCategory {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.code)
    }
}

impl<'de> Deserialize<'de> for IcdCategory {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        IcdCategory::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_category_codes() {
        let c = IcdCategory::parse("K81").unwrap();
        assert_eq!(c.code(), "K81");
        assert!(IcdCategory::parse("K81.0").is_err());
        assert!(IcdCategory::parse("k81").is_err());
        assert!(IcdCategory::parse("KK1").is_err());
        assert!(IcdCategory::parse("K8").is_err());
    }

    #[test]
    fn truncates_full_codes() {
        assert_eq!(truncate_to_category("K81.0").unwrap().code(), "K81");
        assert_eq!(truncate_to_category("M54").unwrap().code(), "M54");
        assert_eq!(truncate_to_category("Z00.12").unwrap().code(), "Z00");
        assert!(truncate_to_category("5K1").is_err());
        assert!(truncate_to_category("K81.").is_err());
        assert!(truncate_to_category("K81.123").is_err());
        assert!(truncate_to_category("K81.x").is_err());
    }

    #[test]
    fn truncation_is_idempotent() {
        let once = truncate_to_category("I11.9").unwrap();
        let twice = truncate_to_category(once.code()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn identity_ignores_name() {
        let bare = IcdCategory::parse("K81").unwrap();
        let named = IcdCategory::with_name("K81", "cholecystitis").unwrap();
        assert_eq!(bare, named);
        assert_eq!(named.name(), "cholecystitis");
    }

    #[test]
    fn serializes_as_code_string() {
        let named = IcdCategory::with_name("K81", "cholecystitis").unwrap();
        assert_eq!(serde_json::to_string(&named).unwrap(), "\"K81\"");
        let back: IcdCategory = serde_json::from_str("\"K81\"").unwrap();
        assert_eq!(back, named);
        assert!(serde_json::from_str::<IcdCategory>("\"K81.0\"").is_err());
    }
}

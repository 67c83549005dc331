//! The ordered system-permission catalog that defines feature-vector columns.
//!
//! A catalog is loaded from a UTF-8 text file with one tab-separated record
//! per line (`name<TAB>api_introduced<TAB>api_deprecated-or-"-"<TAB>protection_level`).
//! Lines starting with `#` are comments; a leading `#version <tag>` comment
//! names the catalog revision. Line order is canonical: the k-th record
//! defines column k of every feature matrix built against the catalog.
//!
//! ```
//! use permforge::catalog::PermissionCatalog;
//!
//! let cat = PermissionCatalog::builtin();
//! assert_eq!(cat.len(), 197);
//! assert!(cat.index_of("READ_PHONE_STATE").is_some());
//! assert_eq!(cat.index_of("NOT_A_PERMISSION"), None);
//! ```

use std::collections::HashMap;
use std::fmt;
use std::io::Read;

use crate::error::{Error, Result};

/// Sensitivity class of a permission, as declared by the platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtectionLevel {
    Normal,
    Dangerous,
    Signature,
    SignatureOrSystem,
    /// Catalogs may carry entries whose level is not known; the level is not
    /// used by the feature pipeline.
    Unknown,
}

impl ProtectionLevel {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "normal" => Some(Self::Normal),
            "dangerous" => Some(Self::Dangerous),
            "signature" => Some(Self::Signature),
            "signatureOrSystem" => Some(Self::SignatureOrSystem),
            "unknown" => Some(Self::Unknown),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Self::Normal => "normal",
            Self::Dangerous => "dangerous",
            Self::Signature => "signature",
            Self::SignatureOrSystem => "signatureOrSystem",
            Self::Unknown => "unknown",
        }
    }
}

impl fmt::Display for ProtectionLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One catalog record: an unprefixed permission name (`READ_SMS`, not
/// `android.permission.READ_SMS`) plus its API-level history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermissionSpec {
    pub name: String,
    pub api_introduced: u32,
    pub api_deprecated: Option<u32>,
    pub protection_level: ProtectionLevel,
}

/// An immutable, ordered permission catalog.
///
/// Order is fixed at load time and defines the feature-column index of each
/// entry; [`PermissionCatalog::index_of`] is the inverse mapping.
#[derive(Debug, Clone)]
pub struct PermissionCatalog {
    entries: Vec<PermissionSpec>,
    version_tag: String,
    by_name: HashMap<String, usize>,
}

impl PartialEq for PermissionCatalog {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries && self.version_tag == other.version_tag
    }
}

const DEFAULT_CATALOG: &str = include_str!("../data/permissions.tsv");

impl PermissionCatalog {
    /// Parses a catalog from text. Records keep file order; duplicate names,
    /// malformed lines, and empty catalogs are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut version_tag: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if version_tag.is_none() {
                    if let Some(tag) = comment.strip_prefix("version ") {
                        version_tag = Some(tag.trim().to_string());
                    }
                }
                continue;
            }
            entries.push(Self::parse_record(line, line_no)?);
        }
        if entries.is_empty() {
            return Err(Error::CatalogInvalid("catalog contains no entries".into()));
        }
        let mut by_name = HashMap::with_capacity(entries.len());
        for (j, e) in entries.iter().enumerate() {
            if by_name.insert(e.name.clone(), j).is_some() {
                return Err(Error::CatalogInvalid(format!(
                    "duplicate permission name {:?}",
                    e.name
                )));
            }
        }
        Ok(Self {
            entries,
            version_tag: version_tag.unwrap_or_else(|| "unversioned".into()),
            by_name,
        })
    }

    fn parse_record(line: &str, line_no: usize) -> Result<PermissionSpec> {
        let err = |msg: String| Error::CatalogParse { line: line_no, msg };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(err(format!(
                "expected 4 tab-separated fields, found {}",
                fields.len()
            )));
        }
        let name = fields[0];
        if name.is_empty() {
            return Err(err("empty permission name".into()));
        }
        if name.chars().any(char::is_whitespace) {
            return Err(err(format!("permission name {name:?} contains whitespace")));
        }
        let api_introduced: u32 = fields[1]
            .parse()
            .map_err(|_| err(format!("bad api_introduced {:?}", fields[1])))?;
        if api_introduced < 1 {
            return Err(err("api_introduced must be >= 1".into()));
        }
        let api_deprecated = match fields[2] {
            "-" => None,
            s => Some(
                s.parse::<u32>()
                    .map_err(|_| err(format!("bad api_deprecated {s:?}")))?,
            ),
        };
        if let Some(dep) = api_deprecated {
            if dep < api_introduced {
                return Err(err(format!(
                    "api_deprecated {dep} precedes api_introduced {api_introduced}"
                )));
            }
        }
        let protection_level = ProtectionLevel::parse(fields[3])
            .ok_or_else(|| err(format!("unknown protection level {:?}", fields[3])))?;
        Ok(PermissionSpec {
            name: name.to_string(),
            api_introduced,
            api_deprecated,
            protection_level,
        })
    }

    /// Loads a catalog from any byte source (file contents must be UTF-8).
    pub fn load(mut source: impl Read) -> Result<Self> {
        let mut buf = String::new();
        source.read_to_string(&mut buf)?;
        Self::parse(&buf)
    }

    /// The catalog bundled with the crate: 197 permissions covering API
    /// levels 1-29.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_CATALOG).expect("bundled catalog is well-formed")
    }

    /// Serializes the catalog back to its file format. `parse` of the output
    /// yields an identical catalog.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("#version {}\n", self.version_tag));
        for e in &self.entries {
            let dep = e
                .api_deprecated
                .map_or_else(|| "-".to_string(), |d| d.to_string());
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                e.name, e.api_introduced, dep, e.protection_level
            ));
        }
        out
    }

    /// Column index of `name`, or `None` if the catalog does not contain it.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn get(&self, j: usize) -> Option<&PermissionSpec> {
        self.entries.get(j)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PermissionSpec> {
        self.entries.iter()
    }

    /// Feature names in column order (clones, ready for a feature matrix).
    pub fn feature_names(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.name.clone()).collect()
    }

    pub fn version_tag(&self) -> &str {
        &self.version_tag
    }
}

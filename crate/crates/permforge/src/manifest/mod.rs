//! Manifest ingestion: binary AXML, text XML, and APK containers.
//!
//! All entry points are pure functions of their input bytes. The three
//! routes converge on [`ManifestInfo`]: the package name plus the set of
//! requested permissions, kept raw exactly as declared (prefix
//! normalization happens at vectorization time, not here).
//!
//! ```
//! use permforge::manifest::{detect_format, parse_manifest, InputFormat};
//!
//! let xml = br#"<manifest xmlns:android="http://schemas.android.com/apk/res/android"
//!                         package="com.example.app">
//!     <uses-permission android:name="android.permission.INTERNET"/>
//! </manifest>"#;
//! assert_eq!(detect_format(xml), InputFormat::TextXml);
//! let info = parse_manifest(xml).unwrap();
//! assert!(info.requested_permissions.contains("android.permission.INTERNET"));
//! ```

mod apk;
mod axml;
mod text;

pub use apk::extract_manifest_from_apk;
pub use axml::parse_binary_manifest;
pub use text::parse_text_manifest;

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Namespace URI of the `android:` attribute prefix.
pub const ANDROID_NS_URI: &str = "http://schemas.android.com/apk/res/android";

/// Parsed manifest content relevant to permission analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestInfo {
    pub package_name: Option<String>,
    /// Raw permission names as declared (duplicates collapsed, no empties).
    pub requested_permissions: BTreeSet<String>,
    pub source_format: SourceFormat,
}

/// Which concrete encoding a manifest was parsed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    BinaryAxml,
    TextXml,
}

impl SourceFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceFormat::BinaryAxml => "binary_axml",
            SourceFormat::TextXml => "text_xml",
        }
    }
}

/// Result of sniffing an input byte stream. Detection is total: every input
/// maps to exactly one variant and never fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    BinaryAxml,
    TextXml,
    ApkContainer,
    Unknown,
}

/// Classifies input bytes by magic numbers.
///
/// * ZIP local-header signature `PK\x03\x04` -> [`InputFormat::ApkContainer`]
/// * little-endian `u16` 0x0003 then `u16` 0x0008 (an AXML tree chunk
///   header) -> [`InputFormat::BinaryAxml`]
/// * `<?xml` or `<manifest` after an optional UTF-8 BOM and leading ASCII
///   whitespace -> [`InputFormat::TextXml`]
/// * anything else -> [`InputFormat::Unknown`]
pub fn detect_format(data: &[u8]) -> InputFormat {
    if data.starts_with(&[0x50, 0x4B, 0x03, 0x04]) {
        return InputFormat::ApkContainer;
    }
    if data.len() >= 4
        && u16::from_le_bytes([data[0], data[1]]) == 0x0003
        && u16::from_le_bytes([data[2], data[3]]) == 0x0008
    {
        return InputFormat::BinaryAxml;
    }
    let mut rest = data.strip_prefix(&[0xEF, 0xBB, 0xBF][..]).unwrap_or(data);
    while let Some((first, tail)) = rest.split_first() {
        if first.is_ascii_whitespace() {
            rest = tail;
        } else {
            break;
        }
    }
    if rest.starts_with(b"<?xml") || rest.starts_with(b"<manifest") {
        return InputFormat::TextXml;
    }
    InputFormat::Unknown
}

/// Detects the input format and routes to the right parser, unwrapping APK
/// containers as needed.
pub fn parse_manifest(data: &[u8]) -> Result<ManifestInfo> {
    match detect_format(data) {
        InputFormat::BinaryAxml => parse_binary_manifest(data),
        InputFormat::TextXml => parse_text_manifest(data),
        InputFormat::ApkContainer => {
            let inner = extract_manifest_from_apk(data)?;
            match detect_format(&inner) {
                InputFormat::BinaryAxml => parse_binary_manifest(&inner),
                InputFormat::TextXml => parse_text_manifest(&inner),
                _ => Err(Error::Structure(
                    "APK manifest entry is neither binary AXML nor text XML".into(),
                )),
            }
        }
        InputFormat::Unknown => Err(Error::Structure("unrecognized input format".into())),
    }
}

/// Builds a `ManifestInfo`, dropping empty names and collapsing duplicates.
pub(crate) fn manifest_info(
    package_name: Option<String>,
    names: impl IntoIterator<Item = String>,
    source_format: SourceFormat,
) -> ManifestInfo {
    let requested_permissions: BTreeSet<String> =
        names.into_iter().filter(|n| !n.is_empty()).collect();
    ManifestInfo {
        package_name,
        requested_permissions,
        source_format,
    }
}

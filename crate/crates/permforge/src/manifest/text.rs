//! Text `AndroidManifest.xml` parsing.

use super::{manifest_info, ManifestInfo, SourceFormat, ANDROID_NS_URI};
use crate::error::{Error, Result};

/// Parses a UTF-8 text manifest.
///
/// Permissions are the values of the `name` attribute (android namespace or
/// no namespace, mirroring the binary parser) of every `uses-permission`
/// and `uses-permission-sdk-23` element; the package name comes from the
/// root `<manifest package=...>` attribute. `maxSdkVersion` attributes are
/// ignored: a declared permission counts.
pub fn parse_text_manifest(data: &[u8]) -> Result<ManifestInfo> {
    let text =
        std::str::from_utf8(data).map_err(|e| Error::Xml(format!("input is not UTF-8: {e}")))?;
    let text = text.trim_start_matches('\u{feff}');
    let doc = roxmltree::Document::parse(text).map_err(|e| Error::Xml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "manifest" {
        return Err(Error::Structure(format!(
            "document root is <{}>, expected <manifest>",
            root.tag_name().name()
        )));
    }
    let package = root.attribute("package").map(str::to_string);
    let mut names = Vec::new();
    for node in doc.descendants().filter(|n| n.is_element()) {
        let tag = node.tag_name().name();
        if tag == "uses-permission" || tag == "uses-permission-sdk-23" {
            let value = node
                .attribute((ANDROID_NS_URI, "name"))
                .or_else(|| node.attribute("name"));
            if let Some(v) = value {
                names.push(v.to_string());
            }
        }
    }
    Ok(manifest_info(package, names, SourceFormat::TextXml))
}

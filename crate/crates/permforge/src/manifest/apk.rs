//! APK container handling.
//!
//! An APK is a ZIP archive; the manifest lives in the entry named
//! `AndroidManifest.xml`. This walker reads the end-of-central-directory
//! record, scans the central directory for that entry, and extracts its
//! bytes. Only stored (method 0) and deflated (method 8) entries are
//! supported; zip64 archives, multi-disk archives, and encrypted entries
//! are rejected as unsupported rather than misread.

use crate::error::{Error, Result};

const EOCD_SIG: u32 = 0x0605_4B50;
const CENTRAL_SIG: u32 = 0x0201_4B50;
const LOCAL_SIG: u32 = 0x0403_4B50;

const MANIFEST_NAME: &[u8] = b"AndroidManifest.xml";

/// Fixed part of the EOCD record plus the maximum comment length.
const EOCD_SCAN_WINDOW: usize = 22 + 65_535;
/// Ceiling on a decompressed manifest; a manifest near this size is not a
/// manifest.
const MAX_MANIFEST_SIZE: usize = 256 * 1024 * 1024;

fn container(msg: impl Into<String>) -> Error {
    Error::Container(msg.into())
}

fn u16_at(data: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([data[at], data[at + 1]])
}

fn u32_at(data: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([data[at], data[at + 1], data[at + 2], data[at + 3]])
}

/// Locates the EOCD record by scanning backwards over the comment region.
fn find_eocd(data: &[u8]) -> Result<usize> {
    if data.len() < 22 {
        return Err(container("too short for a ZIP archive"));
    }
    let floor = data.len().saturating_sub(EOCD_SCAN_WINDOW);
    let mut at = data.len() - 22;
    loop {
        if u32_at(data, at) == EOCD_SIG {
            // A genuine EOCD's comment runs exactly to end of file.
            let comment_len = u16_at(data, at + 20) as usize;
            if at + 22 + comment_len == data.len() {
                return Ok(at);
            }
        }
        if at == floor {
            return Err(container("no end-of-central-directory record"));
        }
        at -= 1;
    }
}

struct CentralEntry {
    method: u16,
    flags: u16,
    compressed_size: u32,
    uncompressed_size: u32,
    local_offset: u32,
}

/// Walks the central directory for `AndroidManifest.xml`.
fn find_manifest_entry(data: &[u8], eocd: usize) -> Result<CentralEntry> {
    let disk_no = u16_at(data, eocd + 4);
    let cd_disk = u16_at(data, eocd + 6);
    let total_entries = u16_at(data, eocd + 10);
    let cd_size = u32_at(data, eocd + 12) as usize;
    let cd_offset = u32_at(data, eocd + 16) as usize;
    if disk_no != 0 || cd_disk != 0 {
        return Err(Error::Unsupported("multi-disk ZIP archive".into()));
    }
    if total_entries == 0xFFFF || cd_size == 0xFFFF_FFFF || cd_offset == 0xFFFF_FFFF {
        return Err(Error::Unsupported("zip64 archive".into()));
    }
    let cd_end = cd_offset
        .checked_add(cd_size)
        .filter(|&e| e <= data.len())
        .ok_or_else(|| container("central directory extends past end of file"))?;

    let mut at = cd_offset;
    for _ in 0..total_entries {
        if at + 46 > cd_end {
            return Err(container("truncated central directory entry"));
        }
        if u32_at(data, at) != CENTRAL_SIG {
            return Err(container(format!(
                "bad central directory signature at offset {at}"
            )));
        }
        let flags = u16_at(data, at + 8);
        let method = u16_at(data, at + 10);
        let compressed_size = u32_at(data, at + 20);
        let uncompressed_size = u32_at(data, at + 24);
        let name_len = u16_at(data, at + 28) as usize;
        let extra_len = u16_at(data, at + 30) as usize;
        let comment_len = u16_at(data, at + 32) as usize;
        let local_offset = u32_at(data, at + 42);
        let name_end = at + 46 + name_len;
        if name_end > cd_end {
            return Err(container("entry name extends past central directory"));
        }
        if &data[at + 46..name_end] == MANIFEST_NAME {
            return Ok(CentralEntry {
                method,
                flags,
                compressed_size,
                uncompressed_size,
                local_offset,
            });
        }
        at = name_end + extra_len + comment_len;
    }
    Err(Error::NotFound(
        "no AndroidManifest.xml entry in archive".into(),
    ))
}

/// Extracts the raw manifest bytes from APK `data`.
///
/// The central directory's sizes are authoritative — a local header may
/// carry zeros when the writer used a data descriptor — but the local
/// header's own name/extra lengths position the payload.
pub fn extract_manifest_from_apk(data: &[u8]) -> Result<Vec<u8>> {
    let eocd = find_eocd(data)?;
    let entry = find_manifest_entry(data, eocd)?;

    if entry.flags & 0x0001 != 0 {
        return Err(Error::Unsupported("encrypted ZIP entry".into()));
    }
    if entry.compressed_size == 0xFFFF_FFFF || entry.uncompressed_size == 0xFFFF_FFFF {
        return Err(Error::Unsupported("zip64 entry sizes".into()));
    }
    let uncompressed = entry.uncompressed_size as usize;
    if uncompressed > MAX_MANIFEST_SIZE {
        return Err(container(format!(
            "declared manifest size {uncompressed} exceeds limit"
        )));
    }

    let local = entry.local_offset as usize;
    if local + 30 > data.len() {
        return Err(container("local header extends past end of file"));
    }
    if u32_at(data, local) != LOCAL_SIG {
        return Err(container(format!(
            "bad local header signature at offset {local}"
        )));
    }
    let name_len = u16_at(data, local + 26) as usize;
    let extra_len = u16_at(data, local + 28) as usize;
    let payload = local + 30 + name_len + extra_len;
    let payload_end = payload
        .checked_add(entry.compressed_size as usize)
        .filter(|&e| e <= data.len())
        .ok_or_else(|| container("entry data extends past end of file"))?;
    let compressed = &data[payload..payload_end];

    match entry.method {
        0 => {
            if entry.compressed_size != entry.uncompressed_size {
                return Err(container(
                    "stored entry with mismatched compressed/uncompressed sizes",
                ));
            }
            Ok(compressed.to_vec())
        }
        8 => {
            let out =
                miniz_oxide::inflate::decompress_to_vec_with_limit(compressed, uncompressed.max(1))
                    .map_err(|e| container(format!("deflate error: {e}")))?;
            if out.len() != uncompressed {
                return Err(container(format!(
                    "decompressed to {} bytes, expected {uncompressed}",
                    out.len()
                )));
            }
            Ok(out)
        }
        other => Err(Error::Unsupported(format!("compression method {other}"))),
    }
}

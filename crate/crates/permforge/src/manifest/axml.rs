//! Binary AXML manifest parsing.
//!
//! AXML is a chunked little-endian encoding of XML. A document is one tree
//! chunk (type 0x0003) spanning the whole stream, containing a string pool
//! followed by namespace/element/CDATA chunks. Element names and attribute
//! values are indices into the pool. The parser walks chunks strictly within
//! declared sizes: a malformed size or index produces an error carrying the
//! byte offset, never an out-of-bounds read or unbounded loop.

use super::{manifest_info, ManifestInfo, SourceFormat, ANDROID_NS_URI};
use crate::error::{Error, Result};

const CHUNK_STRING_POOL: u16 = 0x0001;
const CHUNK_XML_TREE: u16 = 0x0003;
const CHUNK_NS_START: u16 = 0x0100;
const CHUNK_NS_END: u16 = 0x0101;
const CHUNK_ELEMENT_START: u16 = 0x0102;
const CHUNK_ELEMENT_END: u16 = 0x0103;
const CHUNK_CDATA: u16 = 0x0104;
const CHUNK_RESOURCE_MAP: u16 = 0x0180;

/// Sentinel for "no string" in pool-reference fields.
const NO_INDEX: u32 = 0xFFFF_FFFF;
/// String pool flag: strings are UTF-8 (otherwise UTF-16LE).
const FLAG_UTF8: u32 = 0x0000_0100;
/// Attribute typed-value dataType for a string-pool reference.
const TYPE_STRING: u8 = 0x03;

fn err(offset: usize, msg: impl Into<String>) -> Error {
    Error::Axml {
        offset,
        msg: msg.into(),
    }
}

/// Bounds-checked little-endian cursor over the input.
struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    fn at(data: &'a [u8], pos: usize) -> Self {
        Reader { data, pos }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| err(self.pos, format!("need {n} bytes past end of input")))?;
        let slice = &self.data[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Chunk header: type, declared header size, declared total size.
struct ChunkHeader {
    chunk_type: u16,
    header_size: u16,
    chunk_size: u32,
    start: usize,
}

impl ChunkHeader {
    /// Reads and validates a chunk header at `pos`; the chunk must fit in
    /// `limit` (the enclosing chunk's end).
    fn read(data: &[u8], pos: usize, limit: usize) -> Result<ChunkHeader> {
        let mut r = Reader::at(data, pos);
        let chunk_type = r.u16()?;
        let header_size = r.u16()?;
        let chunk_size = r.u32()?;
        if (header_size as u32) < 8 {
            return Err(err(pos, format!("chunk header size {header_size} < 8")));
        }
        if chunk_size < header_size as u32 {
            return Err(err(
                pos,
                format!("chunk size {chunk_size} < header size {header_size}"),
            ));
        }
        let end = pos
            .checked_add(chunk_size as usize)
            .filter(|&e| e <= limit)
            .ok_or_else(|| {
                err(
                    pos,
                    format!("chunk size {chunk_size} overruns enclosing chunk"),
                )
            })?;
        debug_assert!(end <= data.len());
        Ok(ChunkHeader {
            chunk_type,
            header_size,
            chunk_size,
            start: pos,
        })
    }

    fn end(&self) -> usize {
        self.start + self.chunk_size as usize
    }

    fn body(&self) -> usize {
        self.start + self.header_size as usize
    }
}

/// Decoded string pool.
struct StringPool {
    strings: Vec<String>,
}

impl StringPool {
    fn get(&self, idx: u32, offset: usize) -> Result<&str> {
        self.strings
            .get(idx as usize)
            .map(String::as_str)
            .ok_or_else(|| {
                err(
                    offset,
                    format!(
                        "string pool index {idx} out of range (pool has {})",
                        self.strings.len()
                    ),
                )
            })
    }

    /// Looks up an optional reference; `NO_INDEX` means absent.
    fn get_opt(&self, idx: u32, offset: usize) -> Result<Option<&str>> {
        if idx == NO_INDEX {
            Ok(None)
        } else {
            self.get(idx, offset).map(Some)
        }
    }

    fn parse(data: &[u8], chunk: &ChunkHeader) -> Result<StringPool> {
        let mut r = Reader::at(data, chunk.start + 8);
        let string_count = r.u32()? as usize;
        let style_count = r.u32()? as usize;
        let flags = r.u32()?;
        let strings_start = r.u32()? as usize;
        let styles_start = r.u32()? as usize;
        if chunk.header_size < 28 {
            return Err(err(chunk.start, "string pool header shorter than 28 bytes"));
        }

        // The offset table sits between the header and the string data; its
        // size bounds string_count before any allocation.
        let table_start = chunk.body();
        let table_cap = (chunk.end() - table_start) / 4;
        if string_count > table_cap {
            return Err(err(
                chunk.start,
                format!("string count {string_count} exceeds chunk capacity {table_cap}"),
            ));
        }

        let data_start = chunk
            .start
            .checked_add(strings_start)
            .filter(|&s| s >= table_start + 4 * string_count && s <= chunk.end())
            .ok_or_else(|| err(chunk.start, format!("bad stringsStart {strings_start}")))?;
        // Styles (if any) trail the string data and cap it; we never decode
        // them.
        let data_end = if style_count > 0 {
            chunk
                .start
                .checked_add(styles_start)
                .filter(|&s| s >= data_start && s <= chunk.end())
                .ok_or_else(|| err(chunk.start, format!("bad stylesStart {styles_start}")))?
        } else {
            chunk.end()
        };
        let region = &data[data_start..data_end];

        let mut offsets = Reader::at(data, table_start);
        let utf8 = flags & FLAG_UTF8 != 0;
        let mut strings = Vec::with_capacity(string_count);
        for i in 0..string_count {
            let off = offsets.u32()? as usize;
            if off >= region.len() {
                return Err(err(
                    data_start + off.min(region.len()),
                    format!("string {i} offset {off} outside string data"),
                ));
            }
            let s = if utf8 {
                decode_utf8_string(region, off, data_start)?
            } else {
                decode_utf16_string(region, off, data_start)?
            };
            strings.push(s);
        }
        Ok(StringPool { strings })
    }
}

/// UTF-8 pool entry: character count and byte count prefixes (1 byte each,
/// high bit extends to 2), then the bytes.
fn decode_utf8_string(region: &[u8], off: usize, base: usize) -> Result<String> {
    let mut r = Reader::at(region, off);
    let len_prefix = |r: &mut Reader| -> Result<usize> {
        let b0 = r.u8()? as usize;
        if b0 & 0x80 != 0 {
            let b1 = r.u8()? as usize;
            Ok(((b0 & 0x7F) << 8) | b1)
        } else {
            Ok(b0)
        }
    };
    let _chars = len_prefix(&mut r)?;
    let bytes_len = len_prefix(&mut r)?;
    let abs = base + r.pos;
    let bytes = r.take(bytes_len).map_err(|_| {
        err(
            abs,
            format!("UTF-8 string of {bytes_len} bytes overruns pool"),
        )
    })?;
    std::str::from_utf8(bytes)
        .map(str::to_string)
        .map_err(|e| err(abs, format!("invalid UTF-8 in string pool: {e}")))
}

/// UTF-16 pool entry: code-unit count prefix (1 u16, high bit extends to 2),
/// then UTF-16LE units.
fn decode_utf16_string(region: &[u8], off: usize, base: usize) -> Result<String> {
    let mut r = Reader::at(region, off);
    let w0 = r.u16()? as usize;
    let units = if w0 & 0x8000 != 0 {
        let w1 = r.u16()? as usize;
        ((w0 & 0x7FFF) << 16) | w1
    } else {
        w0
    };
    let abs = base + r.pos;
    let bytes = r
        .take(units * 2)
        .map_err(|_| err(abs, format!("UTF-16 string of {units} units overruns pool")))?;
    let code_units: Vec<u16> = bytes
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    String::from_utf16(&code_units)
        .map_err(|e| err(abs, format!("invalid UTF-16 in string pool: {e}")))
}

/// One decoded start-element: name plus attributes as (namespace URI, local
/// name, string value) triples. Only string-valued attributes are kept.
struct StartElement<'p> {
    name: &'p str,
    attributes: Vec<(Option<&'p str>, &'p str, Option<&'p str>)>,
}

fn parse_start_element<'p>(
    data: &[u8],
    chunk: &ChunkHeader,
    pool: &'p StringPool,
) -> Result<StartElement<'p>> {
    // Header carries lineNumber + comment which we skip; the body starts at
    // headerSize and opens with ns/name/attribute table geometry.
    let body = chunk.body();
    let mut r = Reader::at(data, body);
    let _ns = r.u32()?;
    let name_idx = r.u32()?;
    let attribute_start = r.u16()? as usize;
    let attribute_size = r.u16()? as usize;
    let attribute_count = r.u16()? as usize;
    let _id_index = r.u16()?;
    let _class_index = r.u16()?;
    let _style_index = r.u16()?;
    if r.pos > chunk.end() {
        return Err(err(body, "element body overruns chunk"));
    }

    let name = pool.get(name_idx, body)?;

    if attribute_size < 20 {
        return Err(err(body, format!("attribute size {attribute_size} < 20")));
    }
    let attrs_base = body
        .checked_add(attribute_start)
        .ok_or_else(|| err(body, "attribute table offset overflows"))?;
    let attrs_end = attribute_count
        .checked_mul(attribute_size)
        .and_then(|len| attrs_base.checked_add(len))
        .filter(|&e| e <= chunk.end())
        .ok_or_else(|| {
            err(
                body,
                format!("attribute table ({attribute_count} x {attribute_size}) overruns chunk"),
            )
        })?;
    debug_assert!(attrs_end <= data.len());

    let mut attributes = Vec::with_capacity(attribute_count);
    for i in 0..attribute_count {
        let at = attrs_base + i * attribute_size;
        let mut a = Reader::at(data, at);
        let ns_idx = a.u32()?;
        let attr_name_idx = a.u32()?;
        let raw_value_idx = a.u32()?;
        let _typed_size = a.u16()?;
        let _res0 = a.u8()?;
        let data_type = a.u8()?;
        let typed_data = a.u32()?;

        let ns = pool.get_opt(ns_idx, at)?;
        let attr_name = pool.get(attr_name_idx, at)?;
        // A string value arrives through rawValue, or through the typed
        // value when its dataType marks a pool reference.
        let value = match pool.get_opt(raw_value_idx, at)? {
            Some(v) => Some(v),
            None if data_type == TYPE_STRING => pool.get_opt(typed_data, at)?,
            None => None,
        };
        attributes.push((ns, attr_name, value));
    }
    Ok(StartElement { name, attributes })
}

/// Parses a binary `AndroidManifest.xml`.
///
/// Contract as [`parse_text_manifest`](super::parse_text_manifest): the
/// permission set is the `name` attribute (android namespace or none) of
/// every `uses-permission`/`uses-permission-sdk-23` element; the package
/// name comes from the `package` attribute of the `manifest` element.
pub fn parse_binary_manifest(data: &[u8]) -> Result<ManifestInfo> {
    let mut r = Reader::new(data);
    let doc_type = r.u16()?;
    if doc_type != CHUNK_XML_TREE {
        return Err(err(
            0,
            format!("expected tree chunk 0x0003, found {doc_type:#06x}"),
        ));
    }
    let tree = ChunkHeader::read(data, 0, data.len())?;

    let mut pool: Option<StringPool> = None;
    let mut package: Option<String> = None;
    let mut names: Vec<String> = Vec::new();

    let mut pos = tree.body();
    while pos < tree.end() {
        let chunk = ChunkHeader::read(data, pos, tree.end())?;
        match chunk.chunk_type {
            CHUNK_STRING_POOL => {
                if pool.is_some() {
                    return Err(err(pos, "duplicate string pool"));
                }
                pool = Some(StringPool::parse(data, &chunk)?);
            }
            // The resource map and namespace chunks carry nothing the
            // permission scan needs: attribute namespace fields reference
            // URI strings directly.
            CHUNK_RESOURCE_MAP | CHUNK_NS_START | CHUNK_NS_END | CHUNK_CDATA
            | CHUNK_ELEMENT_END => {}
            CHUNK_ELEMENT_START => {
                let pool = pool
                    .as_ref()
                    .ok_or_else(|| err(pos, "element before string pool"))?;
                let el = parse_start_element(data, &chunk, pool)?;
                if el.name == "manifest" && package.is_none() {
                    package = el
                        .attributes
                        .iter()
                        .find(|(_, name, _)| *name == "package")
                        .and_then(|(_, _, v)| *v)
                        .map(str::to_string);
                }
                if el.name == "uses-permission" || el.name == "uses-permission-sdk-23" {
                    let value = el
                        .attributes
                        .iter()
                        .find(|(ns, name, _)| {
                            *name == "name" && ns.map_or(true, |u| u == ANDROID_NS_URI)
                        })
                        .and_then(|(_, _, v)| *v);
                    if let Some(v) = value {
                        names.push(v.to_string());
                    }
                }
            }
            other => {
                return Err(err(pos, format!("unexpected chunk type {other:#06x}")));
            }
        }
        pos = chunk.end();
    }
    Ok(manifest_info(package, names, SourceFormat::BinaryAxml))
}

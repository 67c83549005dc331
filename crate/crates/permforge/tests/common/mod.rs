//! Shared test support: an independent AXML *encoder*.
//!
//! The library ships a binary-manifest parser; these tests need the
//! opposite direction, so the encoder here is written from the chunk
//! layout alone and shares no code with the parser. Fixture manifests
//! are defined once as builder programs plus hand-written text twins;
//! the checked-in `tests/fixtures/` files are regenerated from them by
//! the ignored `write_fixtures` test and a sync test keeps the two in
//! lockstep.

#![allow(dead_code)]

use std::path::PathBuf;

pub const ANDROID_NS: &str = "http://schemas.android.com/apk/res/android";

/// "No string" sentinel in pool-reference fields.
pub const NONE: u32 = 0xFFFF_FFFF;

/// Typed-value dataType for a string-pool reference.
pub const TYPE_STRING: u8 = 0x03;
/// Typed-value dataType for a decimal integer.
pub const TYPE_INT_DEC: u8 = 0x10;
/// Typed-value dataType for a boolean.
pub const TYPE_BOOLEAN: u8 = 0x12;

/// One encoded attribute, all fields in pool-index / raw form.
#[derive(Clone)]
pub struct RawAttr {
    pub ns: u32,
    pub name: u32,
    pub raw: u32,
    pub data_type: u8,
    pub data: u32,
}

enum Event {
    NsStart {
        prefix: u32,
        uri: u32,
    },
    NsEnd {
        prefix: u32,
        uri: u32,
    },
    ElementStart {
        ns: u32,
        name: u32,
        attrs: Vec<RawAttr>,
    },
    ElementEnd {
        ns: u32,
        name: u32,
    },
    Cdata {
        text: u32,
    },
}

/// Builds binary AXML documents event by event.
pub struct AxmlBuilder {
    utf8_pool: bool,
    strings: Vec<String>,
    /// Resource IDs for the first N pool strings, emitted as an 0x0180
    /// chunk when non-empty.
    resource_ids: Vec<u32>,
    events: Vec<Event>,
}

impl AxmlBuilder {
    pub fn new(utf8_pool: bool) -> Self {
        AxmlBuilder {
            utf8_pool,
            strings: Vec::new(),
            resource_ids: Vec::new(),
            events: Vec::new(),
        }
    }

    /// Returns the pool index for `s`, adding it on first use.
    pub fn intern(&mut self, s: &str) -> u32 {
        if let Some(i) = self.strings.iter().position(|t| t == s) {
            return i as u32;
        }
        self.strings.push(s.to_string());
        (self.strings.len() - 1) as u32
    }

    /// Declares resource IDs for the pool's first `ids.len()` strings.
    pub fn resource_map(&mut self, ids: Vec<u32>) {
        self.resource_ids = ids;
    }

    pub fn start_ns(&mut self, prefix: &str, uri: &str) {
        let prefix = self.intern(prefix);
        let uri = self.intern(uri);
        self.events.push(Event::NsStart { prefix, uri });
    }

    pub fn end_ns(&mut self, prefix: &str, uri: &str) {
        let prefix = self.intern(prefix);
        let uri = self.intern(uri);
        self.events.push(Event::NsEnd { prefix, uri });
    }

    pub fn start_element(&mut self, name: &str, attrs: Vec<RawAttr>) {
        let name = self.intern(name);
        self.events.push(Event::ElementStart {
            ns: NONE,
            name,
            attrs,
        });
    }

    pub fn end_element(&mut self, name: &str) {
        let name = self.intern(name);
        self.events.push(Event::ElementEnd { ns: NONE, name });
    }

    pub fn cdata(&mut self, text: &str) {
        let text = self.intern(text);
        self.events.push(Event::Cdata { text });
    }

    /// String attribute carried via rawValue (and mirrored in the typed
    /// value, as aapt emits it).
    pub fn str_attr(&mut self, ns: Option<&str>, name: &str, value: &str) -> RawAttr {
        let ns = ns.map_or(NONE, |u| self.intern(u));
        let name = self.intern(name);
        let value = self.intern(value);
        RawAttr {
            ns,
            name,
            raw: value,
            data_type: TYPE_STRING,
            data: value,
        }
    }

    /// String attribute with no rawValue: readable only through the typed
    /// value (dataType 0x03).
    pub fn typed_str_attr(&mut self, ns: Option<&str>, name: &str, value: &str) -> RawAttr {
        let mut attr = self.str_attr(ns, name, value);
        attr.raw = NONE;
        attr
    }

    /// Decimal-integer attribute.
    pub fn int_attr(&mut self, ns: Option<&str>, name: &str, value: u32) -> RawAttr {
        let ns = ns.map_or(NONE, |u| self.intern(u));
        let name = self.intern(name);
        RawAttr {
            ns,
            name,
            raw: NONE,
            data_type: TYPE_INT_DEC,
            data: value,
        }
    }

    pub fn build(&self) -> Vec<u8> {
        let mut body = Vec::new();
        body.extend_from_slice(&self.encode_pool());
        if !self.resource_ids.is_empty() {
            body.extend_from_slice(&self.encode_resource_map());
        }
        for event in &self.events {
            body.extend_from_slice(&encode_event(event));
        }
        // Document chunk: type 0x0003, header size 8, total size.
        let mut doc = Vec::with_capacity(8 + body.len());
        doc.extend_from_slice(&0x0003u16.to_le_bytes());
        doc.extend_from_slice(&8u16.to_le_bytes());
        doc.extend_from_slice(&((8 + body.len()) as u32).to_le_bytes());
        doc.extend_from_slice(&body);
        doc
    }

    fn encode_pool(&self) -> Vec<u8> {
        let mut offsets: Vec<u32> = Vec::with_capacity(self.strings.len());
        let mut data: Vec<u8> = Vec::new();
        for s in &self.strings {
            offsets.push(data.len() as u32);
            if self.utf8_pool {
                let chars = s.chars().count();
                assert!(chars < 0x80 && s.len() < 0x80, "fixture strings are short");
                data.push(chars as u8);
                data.push(s.len() as u8);
                data.extend_from_slice(s.as_bytes());
                data.push(0);
            } else {
                let units: Vec<u16> = s.encode_utf16().collect();
                assert!(units.len() < 0x8000);
                data.extend_from_slice(&(units.len() as u16).to_le_bytes());
                for u in &units {
                    data.extend_from_slice(&u.to_le_bytes());
                }
                data.extend_from_slice(&0u16.to_le_bytes());
            }
        }
        while data.len() % 4 != 0 {
            data.push(0);
        }

        let header_size = 28u16;
        let strings_start = header_size as u32 + 4 * offsets.len() as u32;
        let chunk_size = strings_start + data.len() as u32;
        let mut out = Vec::with_capacity(chunk_size as usize);
        out.extend_from_slice(&0x0001u16.to_le_bytes());
        out.extend_from_slice(&header_size.to_le_bytes());
        out.extend_from_slice(&chunk_size.to_le_bytes());
        out.extend_from_slice(&(self.strings.len() as u32).to_le_bytes());
        out.extend_from_slice(&0u32.to_le_bytes()); // style count
        let flags: u32 = if self.utf8_pool { 0x0000_0100 } else { 0 };
        out.extend_from_slice(&flags.to_le_bytes());
        out.extend_from_slice(&strings_start.to_le_bytes());
        out.extend_from_slice(&0u32.to_le_bytes()); // styles start
        for off in &offsets {
            out.extend_from_slice(&off.to_le_bytes());
        }
        out.extend_from_slice(&data);
        out
    }

    fn encode_resource_map(&self) -> Vec<u8> {
        let chunk_size = 8 + 4 * self.resource_ids.len() as u32;
        let mut out = Vec::with_capacity(chunk_size as usize);
        out.extend_from_slice(&0x0180u16.to_le_bytes());
        out.extend_from_slice(&8u16.to_le_bytes());
        out.extend_from_slice(&chunk_size.to_le_bytes());
        for id in &self.resource_ids {
            out.extend_from_slice(&id.to_le_bytes());
        }
        out
    }
}

/// 16-byte extended chunk header: type, header size 16, total size, then
/// lineNumber and comment (always absent).
fn event_header(chunk_type: u16, body_len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + body_len);
    out.extend_from_slice(&chunk_type.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(&((16 + body_len) as u32).to_le_bytes());
    out.extend_from_slice(&1u32.to_le_bytes()); // line number
    out.extend_from_slice(&NONE.to_le_bytes()); // comment
    out
}

fn encode_event(event: &Event) -> Vec<u8> {
    match event {
        Event::NsStart { prefix, uri } => {
            let mut out = event_header(0x0100, 8);
            out.extend_from_slice(&prefix.to_le_bytes());
            out.extend_from_slice(&uri.to_le_bytes());
            out
        }
        Event::NsEnd { prefix, uri } => {
            let mut out = event_header(0x0101, 8);
            out.extend_from_slice(&prefix.to_le_bytes());
            out.extend_from_slice(&uri.to_le_bytes());
            out
        }
        Event::ElementStart { ns, name, attrs } => {
            let body_len = 20 + 20 * attrs.len();
            let mut out = event_header(0x0102, body_len);
            out.extend_from_slice(&ns.to_le_bytes());
            out.extend_from_slice(&name.to_le_bytes());
            out.extend_from_slice(&20u16.to_le_bytes()); // attributeStart
            out.extend_from_slice(&20u16.to_le_bytes()); // attributeSize
            out.extend_from_slice(&(attrs.len() as u16).to_le_bytes());
            out.extend_from_slice(&0u16.to_le_bytes()); // idIndex
            out.extend_from_slice(&0u16.to_le_bytes()); // classIndex
            out.extend_from_slice(&0u16.to_le_bytes()); // styleIndex
            for attr in attrs {
                out.extend_from_slice(&attr.ns.to_le_bytes());
                out.extend_from_slice(&attr.name.to_le_bytes());
                out.extend_from_slice(&attr.raw.to_le_bytes());
                out.extend_from_slice(&8u16.to_le_bytes()); // typed-value size
                out.push(0); // res0
                out.push(attr.data_type);
                out.extend_from_slice(&attr.data.to_le_bytes());
            }
            out
        }
        Event::ElementEnd { ns, name } => {
            let mut out = event_header(0x0103, 8);
            out.extend_from_slice(&ns.to_le_bytes());
            out.extend_from_slice(&name.to_le_bytes());
            out
        }
        Event::Cdata { text } => {
            let mut out = event_header(0x0104, 12);
            out.extend_from_slice(&text.to_le_bytes());
            out.extend_from_slice(&8u16.to_le_bytes()); // typed-value size
            out.push(0); // res0
            out.push(TYPE_STRING);
            out.extend_from_slice(&text.to_le_bytes());
            out
        }
    }
}

/// Wraps `manifest` as the sole, stored (method 0) `AndroidManifest.xml`
/// entry of a minimal ZIP archive.
pub fn stored_apk(manifest: &[u8]) -> Vec<u8> {
    const NAME: &[u8] = b"AndroidManifest.xml";
    let mut zip = Vec::new();

    zip.extend_from_slice(&0x0403_4B50u32.to_le_bytes());
    zip.extend_from_slice(&20u16.to_le_bytes()); // version needed
    zip.extend_from_slice(&0u16.to_le_bytes()); // flags
    zip.extend_from_slice(&0u16.to_le_bytes()); // method: stored
    zip.extend_from_slice(&[0u8; 8]); // time/date/crc
    zip.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
    zip.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
    zip.extend_from_slice(&(NAME.len() as u16).to_le_bytes());
    zip.extend_from_slice(&0u16.to_le_bytes()); // extra len
    zip.extend_from_slice(NAME);
    zip.extend_from_slice(manifest);

    let cd_at = zip.len() as u32;
    zip.extend_from_slice(&0x0201_4B50u32.to_le_bytes());
    zip.extend_from_slice(&20u16.to_le_bytes()); // version made by
    zip.extend_from_slice(&20u16.to_le_bytes()); // version needed
    zip.extend_from_slice(&0u16.to_le_bytes()); // flags
    zip.extend_from_slice(&0u16.to_le_bytes()); // method
    zip.extend_from_slice(&[0u8; 8]); // time/date/crc
    zip.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
    zip.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
    zip.extend_from_slice(&(NAME.len() as u16).to_le_bytes());
    zip.extend_from_slice(&[0u8; 12]); // extra/comment/disk/attrs
    zip.extend_from_slice(&0u32.to_le_bytes()); // local header offset
    zip.extend_from_slice(NAME);
    let cd_size = zip.len() as u32 - cd_at;

    zip.extend_from_slice(&0x0605_4B50u32.to_le_bytes());
    zip.extend_from_slice(&0u16.to_le_bytes()); // disk
    zip.extend_from_slice(&0u16.to_le_bytes()); // cd disk
    zip.extend_from_slice(&1u16.to_le_bytes()); // entries this disk
    zip.extend_from_slice(&1u16.to_le_bytes()); // entries total
    zip.extend_from_slice(&cd_size.to_le_bytes());
    zip.extend_from_slice(&cd_at.to_le_bytes());
    zip.extend_from_slice(&0u16.to_le_bytes()); // comment len
    zip
}

/// One manifest fixture: binary document plus its hand-written text twin.
pub struct Fixture {
    /// File stem under `tests/fixtures/`.
    pub stem: &'static str,
    pub binary: Vec<u8>,
    pub text: &'static str,
    /// Ground truth both parsers must produce.
    pub package: &'static str,
    pub permissions: &'static [&'static str],
}

pub fn fixtures() -> Vec<Fixture> {
    vec![messaging_fixture(), game_fixture(), tool_fixture()]
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// UTF-16 pool, resource map, duplicate INTERNET declaration, an
/// `sdk-23` permission, and a maxSdkVersion-limited WAKE_LOCK.
fn messaging_fixture() -> Fixture {
    let mut b = AxmlBuilder::new(false);
    // Resource-mapped attribute names come first in the pool.
    b.intern("name");
    b.intern("maxSdkVersion");
    b.intern("versionCode");
    b.resource_map(vec![0x0101_0003, 0x0101_0271, 0x0101_021b]);
    b.start_ns("android", ANDROID_NS);

    let version_code = b.int_attr(Some(ANDROID_NS), "versionCode", 21);
    let package = b.str_attr(None, "package", "com.example.messaging");
    b.start_element("manifest", vec![version_code, package]);

    let permissions = [
        "android.permission.INTERNET",
        "android.permission.SEND_SMS",
        "android.permission.RECEIVE_SMS",
        "android.permission.READ_SMS",
        "android.permission.READ_CONTACTS",
    ];
    for p in permissions {
        let name = b.str_attr(Some(ANDROID_NS), "name", p);
        b.start_element("uses-permission", vec![name]);
        b.end_element("uses-permission");
    }
    let name = b.str_attr(Some(ANDROID_NS), "name", "android.permission.WAKE_LOCK");
    let max_sdk = b.int_attr(Some(ANDROID_NS), "maxSdkVersion", 25);
    b.start_element("uses-permission", vec![name, max_sdk]);
    b.end_element("uses-permission");
    // Declared a second time, as sloppy manifests do.
    let dup = b.str_attr(Some(ANDROID_NS), "name", "android.permission.INTERNET");
    b.start_element("uses-permission", vec![dup]);
    b.end_element("uses-permission");
    let storage = b.str_attr(
        Some(ANDROID_NS),
        "name",
        "android.permission.READ_EXTERNAL_STORAGE",
    );
    b.start_element("uses-permission-sdk-23", vec![storage]);
    b.end_element("uses-permission-sdk-23");

    let label = b.str_attr(Some(ANDROID_NS), "label", "Messaging");
    b.start_element("application", vec![label]);
    let activity = b.str_attr(Some(ANDROID_NS), "name", ".MainActivity");
    b.start_element("activity", vec![activity]);
    b.end_element("activity");
    b.end_element("application");
    b.end_element("manifest");
    b.end_ns("android", ANDROID_NS);

    Fixture {
        stem: "messaging",
        binary: b.build(),
        text: r#"<?xml version="1.0" encoding="utf-8"?>
<manifest xmlns:android="http://schemas.android.com/apk/res/android"
          android:versionCode="21"
          package="com.example.messaging">
    <uses-permission android:name="android.permission.INTERNET"/>
    <uses-permission android:name="android.permission.SEND_SMS"/>
    <uses-permission android:name="android.permission.RECEIVE_SMS"/>
    <uses-permission android:name="android.permission.READ_SMS"/>
    <uses-permission android:name="android.permission.READ_CONTACTS"/>
    <uses-permission android:name="android.permission.WAKE_LOCK"
                     android:maxSdkVersion="25"/>
    <uses-permission android:name="android.permission.INTERNET"/>
    <uses-permission-sdk-23 android:name="android.permission.READ_EXTERNAL_STORAGE"/>
    <application android:label="Messaging">
        <activity android:name=".MainActivity"/>
    </application>
</manifest>
"#,
        package: "com.example.messaging",
        permissions: &[
            "android.permission.INTERNET",
            "android.permission.READ_CONTACTS",
            "android.permission.READ_EXTERNAL_STORAGE",
            "android.permission.READ_SMS",
            "android.permission.RECEIVE_SMS",
            "android.permission.SEND_SMS",
            "android.permission.WAKE_LOCK",
        ],
    }
}

/// UTF-8 pool, no resource map, a custom (non-platform) permission.
fn game_fixture() -> Fixture {
    let mut b = AxmlBuilder::new(true);
    b.start_ns("android", ANDROID_NS);
    let package = b.str_attr(None, "package", "com.example.game");
    b.start_element("manifest", vec![package]);

    for p in [
        "android.permission.INTERNET",
        "android.permission.ACCESS_NETWORK_STATE",
        "android.permission.VIBRATE",
        "com.example.game.PERMISSION_C2D_MESSAGE",
    ] {
        let name = b.str_attr(Some(ANDROID_NS), "name", p);
        b.start_element("uses-permission", vec![name]);
        b.end_element("uses-permission");
    }
    let storage = b.str_attr(
        Some(ANDROID_NS),
        "name",
        "android.permission.WRITE_EXTERNAL_STORAGE",
    );
    let max_sdk = b.int_attr(Some(ANDROID_NS), "maxSdkVersion", 18);
    b.start_element("uses-permission", vec![storage, max_sdk]);
    b.end_element("uses-permission");

    b.start_element("application", vec![]);
    b.end_element("application");
    b.end_element("manifest");
    b.end_ns("android", ANDROID_NS);

    Fixture {
        stem: "game",
        binary: b.build(),
        text: r#"<?xml version="1.0" encoding="utf-8"?>
<manifest xmlns:android="http://schemas.android.com/apk/res/android"
          package="com.example.game">
    <uses-permission android:name="android.permission.INTERNET"/>
    <uses-permission android:name="android.permission.ACCESS_NETWORK_STATE"/>
    <uses-permission android:name="android.permission.VIBRATE"/>
    <uses-permission android:name="com.example.game.PERMISSION_C2D_MESSAGE"/>
    <uses-permission android:name="android.permission.WRITE_EXTERNAL_STORAGE"
                     android:maxSdkVersion="18"/>
    <application/>
</manifest>
"#,
        package: "com.example.game",
        permissions: &[
            "android.permission.ACCESS_NETWORK_STATE",
            "android.permission.INTERNET",
            "android.permission.VIBRATE",
            "android.permission.WRITE_EXTERNAL_STORAGE",
            "com.example.game.PERMISSION_C2D_MESSAGE",
        ],
    }
}

/// UTF-8 pool with a CDATA chunk, one typed-only string attribute, and a
/// permission whose `name` attribute carries no namespace.
fn tool_fixture() -> Fixture {
    let mut b = AxmlBuilder::new(true);
    b.start_ns("android", ANDROID_NS);
    let package = b.str_attr(None, "package", "net.thing.svc");
    b.start_element("manifest", vec![package]);

    // Value reachable only through the typed data, rawValue absent.
    let phone = b.typed_str_attr(
        Some(ANDROID_NS),
        "name",
        "android.permission.READ_PHONE_STATE",
    );
    b.start_element("uses-permission", vec![phone]);
    b.end_element("uses-permission");
    // Namespace-less name attribute, as lax manifests sometimes ship.
    let sms = b.str_attr(None, "name", "android.permission.SEND_SMS");
    b.start_element("uses-permission", vec![sms]);
    b.end_element("uses-permission");
    for p in [
        "android.permission.RECEIVE_BOOT_COMPLETED",
        "android.permission.INSTALL_PACKAGES",
    ] {
        let name = b.str_attr(Some(ANDROID_NS), "name", p);
        b.start_element("uses-permission", vec![name]);
        b.end_element("uses-permission");
    }

    b.start_element("application", vec![]);
    b.cdata("config v1");
    b.end_element("application");
    b.end_element("manifest");
    b.end_ns("android", ANDROID_NS);

    Fixture {
        stem: "tool",
        binary: b.build(),
        text: r#"<?xml version="1.0" encoding="utf-8"?>
<manifest xmlns:android="http://schemas.android.com/apk/res/android"
          package="net.thing.svc">
    <uses-permission android:name="android.permission.READ_PHONE_STATE"/>
    <uses-permission name="android.permission.SEND_SMS"/>
    <uses-permission android:name="android.permission.RECEIVE_BOOT_COMPLETED"/>
    <uses-permission android:name="android.permission.INSTALL_PACKAGES"/>
    <application><![CDATA[config v1]]></application>
</manifest>
"#,
        package: "net.thing.svc",
        permissions: &[
            "android.permission.INSTALL_PACKAGES",
            "android.permission.READ_PHONE_STATE",
            "android.permission.RECEIVE_BOOT_COMPLETED",
            "android.permission.SEND_SMS",
        ],
    }
}

//! Small crate-internal helpers.

/// FNV-1a 64-bit hash. Used wherever a stable, platform-independent hash of
/// a short string or byte sequence seeds downstream randomness, so that
/// seeds derived from names never depend on `std`'s randomized hashers.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

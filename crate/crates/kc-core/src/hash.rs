//! FNV-1a 64-bit hashing for stable content fingerprints.
//!
//! Used for schema fingerprints, prompt identifiers, and deriving
//! per-sample RNG seeds. Stability across platforms and releases matters
//! more than collision resistance here, which is why the algorithm is
//! pinned rather than delegated to `std::hash`.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a 64-bit hash of `bytes`.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Hash rendered as fixed-width lowercase hex.
pub fn fnv1a64_hex(bytes: &[u8]) -> alloc::string::String {
    use core::fmt::Write;
    let mut s = alloc::string::String::with_capacity(16);
    let _ = write!(s, "{:016x}", fnv1a64(bytes));
    s
}

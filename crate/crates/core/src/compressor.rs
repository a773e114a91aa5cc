//! Compressed-length measurement backends.
//!
//! Every backend measures the byte length of the *full* compressed
//! container (headers, checksums, trailers included), matching what
//! `len(gzip.compress(...))` style tooling reports. Calls are pure:
//! the same (backend, level, payload) always yields the same length.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compression algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Gzip,
    Bz2,
    Lzma,
    Zstd,
    /// Returns the payload length unchanged. Exists so distance and
    /// classifier logic can be tested against closed-form arithmetic.
    Identity,
}

impl BackendKind {
    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Gzip => "gzip",
            BackendKind::Bz2 => "bz2",
            BackendKind::Lzma => "lzma",
            BackendKind::Zstd => "zstd",
            BackendKind::Identity => "identity",
        }
    }

    /// Legal compression-level range, inclusive.
    pub fn level_range(self) -> (u32, u32) {
        match self {
            BackendKind::Gzip => (0, 9),
            BackendKind::Bz2 => (1, 9),
            BackendKind::Lzma => (0, 9),
            BackendKind::Zstd => (1, 22),
            BackendKind::Identity => (0, 0),
        }
    }

    /// Default level used when none is requested: gzip 9, bz2 9,
    /// lzma preset 6, zstd 3 (the standard tooling defaults).
    pub fn default_level(self) -> u32 {
        match self {
            BackendKind::Gzip => 9,
            BackendKind::Bz2 => 9,
            BackendKind::Lzma => 6,
            BackendKind::Zstd => 3,
            BackendKind::Identity => 0,
        }
    }

    /// Informational note on the maximum back-reference window.
    pub fn window_note(self) -> &'static str {
        match self {
            BackendKind::Gzip => "DEFLATE sliding window, 32 KiB",
            BackendKind::Bz2 => "block-sorting, up to 900 KiB per block",
            BackendKind::Lzma => "dictionary up to 64 MiB at preset 6",
            BackendKind::Zstd => "window 8 MiB at level 3",
            BackendKind::Identity => "no compression, unbounded",
        }
    }
}

impl FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gzip" => Ok(BackendKind::Gzip),
            "bz2" => Ok(BackendKind::Bz2),
            "lzma" => Ok(BackendKind::Lzma),
            "zstd" => Ok(BackendKind::Zstd),
            "identity" => Ok(BackendKind::Identity),
            other => Err(Error::UnknownBackend(other.to_string())),
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A named, deterministic length-measuring compressor.
///
/// Stateless per call and safe to share across threads; each
/// `compressed_len` call owns its own encoder state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressorBackend {
    kind: BackendKind,
    level: u32,
}

impl CompressorBackend {
    /// Build a backend with an explicit level. Illegal levels are
    /// rejected, never clamped.
    pub fn new(kind: BackendKind, level: u32) -> Result<Self> {
        let (lo, hi) = kind.level_range();
        if level < lo || level > hi {
            return Err(Error::InvalidLevel {
                backend: kind.name(),
                level,
                min: lo,
                max: hi,
            });
        }
        Ok(CompressorBackend { kind, level })
    }

    pub fn with_default_level(kind: BackendKind) -> Self {
        CompressorBackend {
            kind,
            level: kind.default_level(),
        }
    }

    /// Resolve a backend from its CLI name and optional level flag.
    pub fn from_name(name: &str, level: Option<u32>) -> Result<Self> {
        let kind: BackendKind = name.parse()?;
        match level {
            Some(l) => CompressorBackend::new(kind, l),
            None => Ok(CompressorBackend::with_default_level(kind)),
        }
    }

    pub fn kind(&self) -> BackendKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Byte length of the compressed container for `payload`.
    pub fn compressed_len(&self, payload: &[u8]) -> Result<u64> {
        let fail = |e: std::io::Error| Error::Compression {
            backend: self.kind.name(),
            source: e,
        };
        let len = match self.kind {
            BackendKind::Identity => payload.len() as u64,
            BackendKind::Gzip => {
                let mut enc = flate2::write::GzEncoder::new(
                    CountingSink::default(),
                    flate2::Compression::new(self.level),
                );
                enc.write_all(payload).map_err(fail)?;
                enc.finish().map_err(fail)?.count
            }
            BackendKind::Bz2 => {
                let mut enc = bzip2::write::BzEncoder::new(
                    CountingSink::default(),
                    bzip2::Compression::new(self.level),
                );
                enc.write_all(payload).map_err(fail)?;
                enc.finish().map_err(fail)?.count
            }
            BackendKind::Lzma => {
                let mut enc = xz2::write::XzEncoder::new(CountingSink::default(), self.level);
                enc.write_all(payload).map_err(fail)?;
                enc.finish().map_err(fail)?.count
            }
            BackendKind::Zstd => {
                let out = zstd::bulk::compress(payload, self.level as i32).map_err(fail)?;
                out.len() as u64
            }
        };
        Ok(len)
    }

    /// Original size divided by compressed size; higher means more
    /// compressible. Undefined for empty payloads.
    pub fn compression_ratio(&self, payload: &[u8]) -> Result<f64> {
        if payload.is_empty() {
            return Err(Error::EmptyPayload);
        }
        let clen = self.compressed_len(payload)?;
        Ok(payload.len() as f64 / clen as f64)
    }

    /// Container size on empty input; the per-concatenation overhead
    /// bound used by the subadditivity property.
    pub fn empty_container_len(&self) -> Result<u64> {
        self.compressed_len(&[])
    }
}

impl fmt::Display for CompressorBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(level {})", self.kind.name(), self.level)
    }
}

/// Write sink that only counts bytes.
#[derive(Default)]
struct CountingSink {
    count: u64,
}

impl Write for CountingSink {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.count += buf.len() as u64;
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Golden constants from a reference CPython gzip run at level 9.
    const GZIP_EMPTY_LEN: u64 = 20;
    const GZIP_1000A_LEN: u64 = 29;

    fn gzip9() -> CompressorBackend {
        CompressorBackend::new(BackendKind::Gzip, 9).unwrap()
    }

    #[test]
    fn identity_returns_input_length() {
        let b = CompressorBackend::with_default_level(BackendKind::Identity);
        assert_eq!(b.compressed_len(b"0123456789").unwrap(), 10);
        assert_eq!(b.compressed_len(b"").unwrap(), 0);
    }

    #[test]
    fn gzip_empty_payload_is_container_only() {
        assert_eq!(gzip9().compressed_len(b"").unwrap(), GZIP_EMPTY_LEN);
    }

    #[test]
    fn gzip_repetitive_input_compresses_hard() {
        let payload = vec![b'a'; 1000];
        let len = gzip9().compressed_len(&payload).unwrap();
        assert_eq!(len, GZIP_1000A_LEN);
        assert!(len < 100);
    }

    #[test]
    fn ratio_identity_is_one() {
        let b = CompressorBackend::with_default_level(BackendKind::Identity);
        let payload = vec![b'x'; 50];
        assert_eq!(b.compression_ratio(&payload).unwrap(), 1.0);
    }

    #[test]
    fn ratio_repetitive_exceeds_ten() {
        let payload = vec![b'a'; 1000];
        assert!(gzip9().compression_ratio(&payload).unwrap() > 10.0);
    }

    #[test]
    fn ratio_incompressible_near_one() {
        // Seeded uniform random bytes do not compress.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        let payload: Vec<u8> = (0..64).map(|_| rng.gen()).collect();
        assert!(gzip9().compression_ratio(&payload).unwrap() <= 1.1);
    }

    #[test]
    fn ratio_empty_payload_is_error() {
        assert!(matches!(
            gzip9().compression_ratio(b""),
            Err(Error::EmptyPayload)
        ));
    }

    #[test]
    fn illegal_levels_rejected() {
        assert!(CompressorBackend::new(BackendKind::Gzip, 10).is_err());
        assert!(CompressorBackend::new(BackendKind::Bz2, 0).is_err());
        assert!(CompressorBackend::new(BackendKind::Zstd, 23).is_err());
        assert!(CompressorBackend::new(BackendKind::Identity, 1).is_err());
    }

    #[test]
    fn from_name_resolves_defaults() {
        let b = CompressorBackend::from_name("zstd", None).unwrap();
        assert_eq!(b.level(), 3);
        assert!(CompressorBackend::from_name("ppm", None).is_err());
    }

    #[test]
    fn real_backends_nonzero_on_nonempty() {
        for kind in [
            BackendKind::Gzip,
            BackendKind::Bz2,
            BackendKind::Lzma,
            BackendKind::Zstd,
        ] {
            let b = CompressorBackend::with_default_level(kind);
            assert!(b.compressed_len(b"hello").unwrap() > 0, "{kind}");
        }
    }

    #[test]
    fn determinism_across_calls() {
        let payload = b"the quick brown fox jumps over the lazy dog";
        for kind in [
            BackendKind::Gzip,
            BackendKind::Bz2,
            BackendKind::Lzma,
            BackendKind::Zstd,
            BackendKind::Identity,
        ] {
            let b = CompressorBackend::with_default_level(kind);
            assert_eq!(
                b.compressed_len(payload).unwrap(),
                b.compressed_len(payload).unwrap()
            );
        }
    }
}

//! Normalized Compression Distance and the test x train distance matrix.
//!
//! NCD(x, y) = (C(xy) - min{C(x), C(y)}) / max{C(x), C(y)}, where C is
//! a backend's compressed length and xy is the two texts joined with a
//! single ASCII space. The space joiner and the (test, train)
//! concatenation order are load-bearing for bit-compatibility with the
//! usual reference implementation and must not change.
//!
//! Real compressors only approximate Kolmogorov complexity, so values
//! can dip slightly below 0 or exceed 1; consumers must tolerate that.
//! NCD is also not exactly symmetric under a real compressor, which is
//! why the matrix fixes the order convention as test-then-train.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::compressor::CompressorBackend;
use crate::corpus::Document;
use crate::error::{Error, Result};

/// Single space byte placed between concatenated documents.
pub const JOIN_SEPARATOR: u8 = b' ';

/// Magic bytes of the binary matrix format.
pub const MATRIX_MAGIC: &[u8; 4] = b"NCDM";
/// Current binary matrix format version.
pub const MATRIX_VERSION: u32 = 1;

/// Compressed length of `x <space> y`.
pub fn joint_len(backend: &CompressorBackend, x: &[u8], y: &[u8]) -> Result<u64> {
    let mut buf = Vec::with_capacity(x.len() + 1 + y.len());
    buf.extend_from_slice(x);
    buf.push(JOIN_SEPARATOR);
    buf.extend_from_slice(y);
    backend.compressed_len(&buf)
}

/// NCD from the three already-measured lengths.
pub fn ncd_from_lengths(joint: u64, cx: u64, cy: u64) -> Result<f64> {
    let max = cx.max(cy);
    if max == 0 {
        return Err(Error::ZeroDenominator);
    }
    let min = cx.min(cy);
    Ok((joint as f64 - min as f64) / max as f64)
}

/// NCD between two byte sequences, measuring all three lengths.
pub fn ncd(backend: &CompressorBackend, x: &[u8], y: &[u8]) -> Result<f64> {
    let cx = backend.compressed_len(x)?;
    let cy = backend.compressed_len(y)?;
    let joint = joint_len(backend, x, y)?;
    ncd_from_lengths(joint, cx, cy)
}

/// Dense test x train matrix of NCD values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    backend_name: String,
    /// Cached single-document lengths; empty when the matrix was
    /// loaded from a binary cache file, which stores values only.
    test_lengths: Vec<u64>,
    train_lengths: Vec<u64>,
}

impl DistanceMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn backend_name(&self) -> &str {
        &self.backend_name
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn test_lengths(&self) -> &[u64] {
        &self.test_lengths
    }

    pub fn train_lengths(&self) -> &[u64] {
        &self.train_lengths
    }

    /// CSV export: header row of train indices, one row per test doc.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = (0..self.cols).map(|j| format!("train_{j}")).collect();
        w.write_record(&header)?;
        for i in 0..self.rows {
            let record: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Binary export: magic "NCDM", version u32, rows u64, cols u64,
    /// then row-major f64 values, all little-endian.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MATRIX_MAGIC)?;
        w.write_all(&MATRIX_VERSION.to_le_bytes())?;
        w.write_all(&(self.rows as u64).to_le_bytes())?;
        w.write_all(&(self.cols as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path, backend_name: &str) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MATRIX_MAGIC {
            return Err(Error::BadMatrixFile(format!(
                "bad magic {magic:?} in {}",
                path.display()
            )));
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let version = u32::from_le_bytes(u32buf);
        if version != MATRIX_VERSION {
            return Err(Error::BadMatrixFile(format!(
                "unsupported version {version}"
            )));
        }
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let rows = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf)?;
        let cols = u64::from_le_bytes(u64buf) as usize;
        let mut values = Vec::with_capacity(rows * cols);
        let mut f64buf = [0u8; 8];
        for _ in 0..rows * cols {
            r.read_exact(&mut f64buf)?;
            values.push(f64::from_le_bytes(f64buf));
        }
        Ok(DistanceMatrix {
            rows,
            cols,
            values,
            backend_name: backend_name.to_string(),
            test_lengths: Vec::new(),
            train_lengths: Vec::new(),
        })
    }
}

/// Compute the full test x train NCD matrix.
///
/// Single-document lengths are measured exactly once each and cached;
/// pair cells then only pay for the joint compression. The result is
/// bit-identical for any worker count.
pub fn distance_matrix(
    backend: &CompressorBackend,
    test: &[Document],
    train: &[Document],
    workers: usize,
) -> Result<DistanceMatrix> {
    if test.is_empty() || train.is_empty() {
        return Err(Error::EmptyDocumentList);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;

    pool.install(|| {
        let test_lengths: Vec<u64> = test
            .par_iter()
            .map(|d| backend.compressed_len(d.bytes()))
            .collect::<Result<_>>()?;
        let train_lengths: Vec<u64> = train
            .par_iter()
            .map(|d| backend.compressed_len(d.bytes()))
            .collect::<Result<_>>()?;

        let cols = train.len();
        let values: Vec<f64> = (0..test.len() * cols)
            .into_par_iter()
            .map(|cell| {
                let (i, j) = (cell / cols, cell % cols);
                joint_len(backend, test[i].bytes(), train[j].bytes())
                    .and_then(|joint| ncd_from_lengths(joint, test_lengths[i], train_lengths[j]))
                    .map_err(|e| Error::MatrixCell {
                        row: i,
                        col: j,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<_>>()?;

        Ok(DistanceMatrix {
            rows: test.len(),
            cols,
            values,
            backend_name: backend.name().to_string(),
            test_lengths,
            train_lengths,
        })
    })
}

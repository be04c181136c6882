//! Reader for the big-endian IDX files used by MNIST.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;
pub const NUM_CLASSES: usize = 10;

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn error(&self, message: String) -> Error {
        Error::Idx {
            path: self.path.to_path_buf(),
            message,
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let slice = self
            .bytes
            .get(self.pos..self.pos + 4)
            .ok_or_else(|| self.error(format!("truncated header while reading {what}")))?;
        self.pos += 4;
        Ok(u32::from_be_bytes(slice.try_into().expect("4 bytes")))
    }

    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos + len;
        if end > self.bytes.len() {
            return Err(self.error(format!(
                "truncated {what}: need {len} bytes, {} available",
                self.bytes.len() - self.pos
            )));
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn magic(&mut self, expected: u32) -> Result<()> {
        let magic = self.u32("magic number")?;
        if magic != expected {
            return Err(self.error(format!("bad magic number 0x{magic:08x}, expected 0x{expected:08x}")));
        }
        Ok(())
    }
}

/// Raw images: `(count, rows, cols, pixels)`.
pub fn read_idx_images(path: impl AsRef<Path>) -> Result<(usize, usize, usize, Vec<u8>)> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let mut c = Cursor {
        path,
        bytes: &bytes,
        pos: 0,
    };
    c.magic(IMAGES_MAGIC)?;
    let count = c.u32("image count")? as usize;
    let rows = c.u32("row count")? as usize;
    let cols = c.u32("column count")? as usize;
    let pixels = c.take(count * rows * cols, "pixel data")?.to_vec();
    Ok((count, rows, cols, pixels))
}

pub fn read_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let mut c = Cursor {
        path,
        bytes: &bytes,
        pos: 0,
    };
    c.magic(LABELS_MAGIC)?;
    let count = c.u32("label count")? as usize;
    Ok(c.take(count, "label data")?.to_vec())
}

/// Images scaled to `[0, 1]`, optionally average-pooled over `downsample ×
/// downsample` blocks, with one-hot labels over 10 classes.
pub fn load_idx_dataset(
    images: impl AsRef<Path>,
    labels: impl AsRef<Path>,
    max_n: Option<usize>,
    downsample: usize,
) -> Result<LabeledDataset> {
    let images = images.as_ref();
    let (count, rows, cols, pixels) = read_idx_images(images)?;
    let label_bytes = read_idx_labels(labels.as_ref())?;
    if label_bytes.len() != count {
        return Err(Error::Idx {
            path: labels.as_ref().to_path_buf(),
            message: format!("{} labels for {count} images", label_bytes.len()),
        });
    }
    let k = downsample.max(1);
    if rows % k != 0 || cols % k != 0 {
        return Err(Error::param(format!(
            "downsample factor {k} does not divide {rows}×{cols} images"
        )));
    }
    let n = max_n.map_or(count, |m| m.min(count));
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let (out_rows, out_cols) = (rows / k, cols / k);
    let mut points = Array2::zeros((n, out_rows * out_cols));
    let norm = 1.0 / (255.0 * (k * k) as f64);
    for i in 0..n {
        let img = &pixels[i * rows * cols..(i + 1) * rows * cols];
        for r in 0..out_rows {
            for c in 0..out_cols {
                let mut sum = 0u32;
                for dr in 0..k {
                    for dc in 0..k {
                        sum += img[(r * k + dr) * cols + c * k + dc] as u32;
                    }
                }
                points[[i, r * out_cols + c]] = sum as f64 * norm;
            }
        }
    }
    let mut targets = Array2::zeros((n, NUM_CLASSES));
    for (i, &label) in label_bytes[..n].iter().enumerate() {
        if label as usize >= NUM_CLASSES {
            return Err(Error::Idx {
                path: labels.as_ref().to_path_buf(),
                message: format!("label {label} at index {i} is not a digit"),
            });
        }
        targets[[i, label as usize]] = 1.0;
    }
    LabeledDataset::new(points, targets)
}

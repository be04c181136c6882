use std::fs;
use std::path::{Path, PathBuf};

use freqlens::experiment::idx::{IMAGES_MAGIC, LABELS_MAGIC};
use freqlens::experiment::load_idx_dataset;
use freqlens::Error;
use tempfile::TempDir;

fn idx_bytes(magic: u32, dims: &[u32], payload: &[u8]) -> Vec<u8> {
    let mut out = magic.to_be_bytes().to_vec();
    for d in dims {
        out.extend(d.to_be_bytes());
    }
    out.extend_from_slice(payload);
    out
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, bytes).unwrap();
    path
}

fn fixture(
    dir: &Path,
    count: u32,
    rows: u32,
    cols: u32,
    pixel: impl Fn(usize) -> u8,
    labels: &[u8],
) -> (PathBuf, PathBuf) {
    let pixels: Vec<u8> = (0..(count * rows * cols) as usize).map(pixel).collect();
    let images = write(dir, "images", &idx_bytes(IMAGES_MAGIC, &[count, rows, cols], &pixels));
    let labels = write(dir, "labels", &idx_bytes(LABELS_MAGIC, &[labels.len() as u32], labels));
    (images, labels)
}

#[test]
fn two_full_size_images() {
    let dir = TempDir::new().unwrap();
    let (images, labels) = fixture(dir.path(), 2, 28, 28, |i| (i % 256) as u8, &[3, 7]);
    let data = load_idx_dataset(&images, &labels, None, 1).unwrap();
    assert_eq!(data.len(), 2);
    assert_eq!(data.input_dim(), 28 * 28);
    assert_eq!(data.output_dim(), 10);
    assert_eq!(data.points()[[0, 0]], 0.0);
    assert_eq!(data.points()[[0, 255]], 1.0);
    assert_eq!(data.points()[[1, 0]], (784 % 256) as f64 / 255.0);
    for (row, label) in data.targets().rows().into_iter().zip([3usize, 7]) {
        for (c, &v) in row.iter().enumerate() {
            assert_eq!(v, if c == label { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn downsampling_constant_image_stays_constant() {
    let dir = TempDir::new().unwrap();
    let (images, labels) = fixture(dir.path(), 1, 28, 28, |_| 51, &[0]);
    let data = load_idx_dataset(&images, &labels, None, 2).unwrap();
    assert_eq!(data.input_dim(), 14 * 14);
    assert!(data.points().iter().all(|&v| v == 51.0 / 255.0));
}

#[test]
fn downsampling_averages_blocks() {
    let dir = TempDir::new().unwrap();
    let (images, labels) = fixture(dir.path(), 1, 2, 2, |i| [0, 255, 255, 0][i], &[1]);
    let data = load_idx_dataset(&images, &labels, None, 2).unwrap();
    assert_eq!(data.points().as_slice().unwrap(), &[0.5]);
}

#[test]
fn max_n_truncates() {
    let dir = TempDir::new().unwrap();
    let (images, labels) = fixture(dir.path(), 3, 2, 2, |i| i as u8, &[0, 1, 2]);
    let data = load_idx_dataset(&images, &labels, Some(2), 1).unwrap();
    assert_eq!(data.len(), 2);
}

#[test]
fn wrong_magic_names_expected_constant() {
    let dir = TempDir::new().unwrap();
    let (_, labels) = fixture(dir.path(), 1, 2, 2, |_| 0, &[0]);
    let bad = write(dir.path(), "bad", &idx_bytes(0x0000_0802, &[1, 2, 2], &[0; 4]));
    let err = load_idx_dataset(&bad, &labels, None, 1).unwrap_err();
    assert!(matches!(err, Error::Idx { .. }));
    assert!(err.to_string().contains("0x00000803"), "{err}");
}

#[test]
fn truncated_pixels_are_reported() {
    let dir = TempDir::new().unwrap();
    let (_, labels) = fixture(dir.path(), 1, 2, 2, |_| 0, &[0]);
    let short = write(dir.path(), "short", &idx_bytes(IMAGES_MAGIC, &[1, 2, 2], &[0; 3]));
    let err = load_idx_dataset(&short, &labels, None, 1).unwrap_err();
    assert!(err.to_string().contains("truncated"), "{err}");
    let header_only = write(dir.path(), "tiny", &IMAGES_MAGIC.to_be_bytes()[..3]);
    assert!(load_idx_dataset(&header_only, &labels, None, 1).is_err());
}

#[test]
fn count_mismatch_is_reported() {
    let dir = TempDir::new().unwrap();
    let (images, _) = fixture(dir.path(), 2, 2, 2, |_| 0, &[0, 1]);
    let labels = write(dir.path(), "three", &idx_bytes(LABELS_MAGIC, &[3], &[0, 1, 2]));
    let err = load_idx_dataset(&images, &labels, None, 1).unwrap_err();
    assert!(err.to_string().contains("3 labels for 2 images"), "{err}");
}

#[test]
fn bundled_subset_loads() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-3k");
    let data = load_idx_dataset(root.join("images-idx3-ubyte"), root.join("labels-idx1-ubyte"), None, 2).unwrap();
    assert_eq!(data.len(), 3000);
    assert_eq!(data.input_dim(), 196);
    assert!(data.points().iter().all(|&v| (0.0..=1.0).contains(&v)));
}

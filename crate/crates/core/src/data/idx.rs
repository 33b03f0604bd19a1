//! MNIST IDX readers (big-endian, magic 0x00000803 images / 0x00000801
//! labels). Gzipped files are detected by magic and inflated transparently.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use crate::data::TabularDataset;
use crate::error::{Error, Result};
use crate::numeric::Matrix;

fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    File::open(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?
        .read_to_end(&mut raw)?;
    if raw.len() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b {
        let mut inflated = Vec::new();
        GzDecoder::new(&raw[..])
            .read_to_end(&mut inflated)
            .map_err(|e| Error::Data(format!("bad gzip stream in {}: {e}", path.display())))?;
        Ok(inflated)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Data("truncated IDX header".into()))
}

/// Load an MNIST-style image/label IDX pair as flattened rows in [0,1].
pub fn load_mnist_idx(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<TabularDataset> {
    let img = read_maybe_gz(images.as_ref())?;
    let lab = read_maybe_gz(labels.as_ref())?;

    if be_u32(&img, 0)? != 0x0000_0803 {
        return Err(Error::Data("bad magic in image file (want 0x00000803)".into()));
    }
    if be_u32(&lab, 0)? != 0x0000_0801 {
        return Err(Error::Data("bad magic in label file (want 0x00000801)".into()));
    }
    let n = be_u32(&img, 4)? as usize;
    let h = be_u32(&img, 8)? as usize;
    let w = be_u32(&img, 12)? as usize;
    if be_u32(&lab, 4)? as usize != n {
        return Err(Error::Data("image/label counts differ".into()));
    }
    let pixels = n * h * w;
    if img.len() < 16 + pixels {
        return Err(Error::Data("truncated image payload".into()));
    }
    if lab.len() < 8 + n {
        return Err(Error::Data("truncated label payload".into()));
    }

    let mut features = Matrix::zeros(n, h * w);
    for (dst, &src) in features.data_mut().iter_mut().zip(&img[16..16 + pixels]) {
        *dst = src as f64 / 255.0;
    }
    let labels: Vec<u32> = lab[8..8 + n].iter().map(|&b| b as u32).collect();
    TabularDataset::new(features, labels, 10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn idx_pair(n: usize, side: usize, pixels: &[u8], labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
        let mut img = Vec::new();
        img.extend_from_slice(&0x0000_0803u32.to_be_bytes());
        img.extend_from_slice(&(n as u32).to_be_bytes());
        img.extend_from_slice(&(side as u32).to_be_bytes());
        img.extend_from_slice(&(side as u32).to_be_bytes());
        img.extend_from_slice(pixels);
        let mut lab = Vec::new();
        lab.extend_from_slice(&0x0000_0801u32.to_be_bytes());
        lab.extend_from_slice(&(n as u32).to_be_bytes());
        lab.extend_from_slice(labels);
        (img, lab)
    }

    #[test]
    fn loads_tiny_idx_pair() {
        let (img, lab) = idx_pair(2, 2, &[0, 128, 255, 64, 10, 20, 30, 40], &[3, 9]);
        let mut fi = tempfile::NamedTempFile::new().unwrap();
        fi.write_all(&img).unwrap();
        let mut fl = tempfile::NamedTempFile::new().unwrap();
        fl.write_all(&lab).unwrap();
        let ds = load_mnist_idx(fi.path(), fl.path()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.feature_count(), 4);
        assert!((ds.features.get(0, 2) - 1.0).abs() < 1e-12);
        assert!(ds.features.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(ds.labels.values(), &[3, 9]);
    }

    #[test]
    fn bad_magic_is_data_error() {
        let (mut img, lab) = idx_pair(1, 1, &[0], &[0]);
        img[3] = 0x99;
        let mut fi = tempfile::NamedTempFile::new().unwrap();
        fi.write_all(&img).unwrap();
        let mut fl = tempfile::NamedTempFile::new().unwrap();
        fl.write_all(&lab).unwrap();
        assert!(matches!(
            load_mnist_idx(fi.path(), fl.path()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn truncated_payload_is_data_error() {
        let (img, lab) = idx_pair(4, 2, &[0; 8], &[0; 4]); // claims 4 images, has 2
        let mut fi = tempfile::NamedTempFile::new().unwrap();
        fi.write_all(&img).unwrap();
        let mut fl = tempfile::NamedTempFile::new().unwrap();
        fl.write_all(&lab).unwrap();
        assert!(load_mnist_idx(fi.path(), fl.path()).is_err());
    }
}

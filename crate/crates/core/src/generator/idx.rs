//! Big-endian IDX files (the MNIST distribution format).

use std::path::Path;

use super::augment::Image;
use crate::error::{Error, Result};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;
pub const N_DIGITS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ImagePool {
    images: Vec<Image>,
    labels: Vec<usize>,
    by_class: Vec<Vec<usize>>,
}

impl ImagePool {
    pub fn new(images: Vec<Image>, labels: Vec<usize>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        let mut by_class = vec![Vec::new(); N_DIGITS];
        for (i, &label) in labels.iter().enumerate() {
            if label >= N_DIGITS {
                return Err(Error::Data(format!("label {label} at index {i} is not a digit")));
            }
            by_class[label].push(i);
        }
        Ok(ImagePool {
            images,
            labels,
            by_class,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[Image] {
        &self.images
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_members(&self, class: usize) -> &[usize] {
        self.by_class.get(class).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn get(&self, index: usize) -> (&Image, usize) {
        (&self.images[index], self.labels[index])
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl Reader<'_> {
    fn u32(&mut self, what: &str) -> Result<u32> {
        let end = self.offset + 4;
        let chunk = self.bytes.get(self.offset..end).ok_or_else(|| Error::Parse {
            offset: self.offset as u64,
            message: format!("truncated header reading {what}"),
        })?;
        self.offset = end;
        Ok(u32::from_be_bytes(chunk.try_into().expect("4 bytes")))
    }

    fn magic(&mut self, expected: u32) -> Result<()> {
        let found = self.u32("magic")?;
        if found != expected {
            return Err(Error::Parse {
                offset: 0,
                message: format!("bad magic {found:#010x}, expected {expected:#010x}"),
            });
        }
        Ok(())
    }

    fn payload(&mut self, len: usize) -> Result<&[u8]> {
        let available = self.bytes.len() - self.offset;
        if available < len {
            return Err(Error::Parse {
                offset: self.bytes.len() as u64,
                message: format!(
                    "truncated payload: need {len} bytes from offset {}, found {available}",
                    self.offset
                ),
            });
        }
        let out = &self.bytes[self.offset..self.offset + len];
        self.offset += len;
        Ok(out)
    }
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<Image>> {
    let mut r = Reader { bytes, offset: 0 };
    r.magic(IMAGE_MAGIC)?;
    let count = r.u32("image count")? as usize;
    let rows = r.u32("row count")? as usize;
    let cols = r.u32("column count")? as usize;
    let size = rows * cols;
    let payload = r.payload(count * size)?;
    Ok(payload
        .chunks_exact(size.max(1))
        .take(count)
        .map(|px| Image {
            width: cols,
            height: rows,
            pixels: px.iter().map(|&b| b as f64 / 255.0).collect(),
        })
        .collect())
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<usize>> {
    let mut r = Reader { bytes, offset: 0 };
    r.magic(LABEL_MAGIC)?;
    let count = r.u32("label count")? as usize;
    Ok(r.payload(count)?.iter().map(|&b| b as usize).collect())
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<ImagePool> {
    let read = |p: &Path| std::fs::read(p).map_err(|e| Error::io(p, e));
    let images = parse_idx_images(&read(images_path)?)?;
    let labels = parse_idx_labels(&read(labels_path)?)?;
    if images.len() != labels.len() {
        // both counts live at byte offset 4 of their files
        return Err(Error::Parse {
            offset: 4,
            message: format!(
                "image count {} does not match label count {}",
                images.len(),
                labels.len()
            ),
        });
    }
    ImagePool::new(images, labels)
}

/// Encodes images (values rounded from `[0, 1]` to bytes) as an IDX image file.
pub fn encode_idx_images(images: &[Image]) -> Vec<u8> {
    let (rows, cols) = images.first().map_or((0, 0), |i| (i.height, i.width));
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    for v in [IMAGE_MAGIC, images.len() as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for img in images {
        out.extend(img.pixels.iter().map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8));
    }
    out
}

pub fn encode_idx_labels(labels: &[usize]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend(labels.iter().map(|&l| l as u8));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_image() -> Vec<u8> {
        let mut b = Vec::new();
        for v in [IMAGE_MAGIC, 1, 2, 2] {
            b.extend_from_slice(&v.to_be_bytes());
        }
        b.extend_from_slice(&[0, 85, 170, 255]);
        b
    }

    #[test]
    fn handcrafted_fixture_scales_bytes() {
        let images = parse_idx_images(&one_image()).unwrap();
        assert_eq!(images.len(), 1);
        let px = &images[0].pixels;
        let expected = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        for (a, b) in px.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!((images[0].width, images[0].height), (2, 2));
    }

    #[test]
    fn label_magic_in_image_file_fails_at_offset_zero() {
        let mut bytes = one_image();
        bytes[3] = 0x01;
        match parse_idx_images(&bytes) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_reports_file_end() {
        let bytes = one_image();
        match parse_idx_images(&bytes[..18]) {
            Err(Error::Parse { offset, message }) => {
                assert_eq!(offset, 18);
                assert!(message.contains("truncated"));
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse_idx_images(&bytes[..10]) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 8),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn count_mismatch_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let ip = dir.path().join("img");
        let lp = dir.path().join("lbl");
        std::fs::write(&ip, one_image()).unwrap();
        std::fs::write(&lp, encode_idx_labels(&[1, 2])).unwrap();
        assert!(matches!(load_idx(&ip, &lp), Err(Error::Parse { offset: 4, .. })));
    }

    #[test]
    fn encode_then_parse() {
        let imgs = parse_idx_images(&one_image()).unwrap();
        assert_eq!(encode_idx_images(&imgs), one_image());
        let labels = vec![3, 0, 9];
        assert_eq!(parse_idx_labels(&encode_idx_labels(&labels)).unwrap(), labels);
    }

    #[test]
    fn non_digit_labels_are_rejected() {
        let img = Image::zeros(1, 1);
        assert!(ImagePool::new(vec![img], vec![12]).is_err());
    }
}

//! Minimal binary PGM (P5) output for masks and overlays.

use std::fs;
use std::io;
use std::path::Path;

use crate::segmentation::{AlphaMask, BinaryMask};

pub fn encode_pgm(width: usize, height: usize, gray: &[u8]) -> Vec<u8> {
    assert_eq!(gray.len(), width * height, "pgm payload size");
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(gray);
    out
}

pub fn write_pgm(path: impl AsRef<Path>, width: usize, height: usize, gray: &[u8]) -> io::Result<u64> {
    let bytes = encode_pgm(width, height, gray);
    fs::write(path, &bytes)?;
    Ok(bytes.len() as u64)
}

pub fn alpha_pgm(mask: &AlphaMask) -> Vec<u8> {
    encode_pgm(mask.width, mask.height, &mask.alpha)
}

/// Foreground 255, background 0.
pub fn mask_pgm(mask: &BinaryMask) -> Vec<u8> {
    let gray: Vec<u8> = mask.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
    encode_pgm(mask.width, mask.height, &gray)
}

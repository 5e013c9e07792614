//! Boundary extraction by directional scans over a binary silhouette.
//!
//! Every row is scanned left-to-right and right-to-left, every column
//! top-to-bottom and bottom-to-top. Whenever two 4-adjacent pixels differ,
//! the foreground one of the pair is a boundary point. The scan starts and
//! ends outside the image, so foreground pixels on the border are boundary
//! points too.

use crate::segmentation::BinaryMask;

/// Unordered set of boundary pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub width: usize,
    pub height: usize,
    marked: Vec<bool>,
}

impl Contour {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.marked[y * self.width + x]
    }

    pub fn len(&self) -> usize {
        self.marked.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.marked.iter().any(|&b| b)
    }

    /// Boundary points in row-major order.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.marked.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (i % w, i / w))
    }

    pub fn to_mask(&self) -> BinaryMask {
        BinaryMask { width: self.width, height: self.height, bits: self.marked.clone() }
    }
}

/// Walks one line of pixels given by `indices`, marking foreground pixels
/// whose predecessor in the walk differs (the walk starts and ends outside).
fn scan_line(bits: &[bool], marked: &mut [bool], indices: impl Iterator<Item = usize>) {
    let mut prev: Option<usize> = None;
    for i in indices {
        let prev_fg = prev.is_some_and(|p| bits[p]);
        if bits[i] != prev_fg {
            match prev {
                Some(p) if bits[p] => marked[p] = true,
                _ => marked[i] = true,
            }
        }
        prev = Some(i);
    }
    if let Some(p) = prev {
        if bits[p] {
            marked[p] = true;
        }
    }
}

pub fn extract_contour(mask: &BinaryMask) -> Contour {
    let (w, h) = (mask.width, mask.height);
    let bits = &mask.bits;
    let mut marked = vec![false; w * h];
    for y in 0..h {
        scan_line(bits, &mut marked, (0..w).map(|x| y * w + x));
        scan_line(bits, &mut marked, (0..w).rev().map(|x| y * w + x));
    }
    for x in 0..w {
        scan_line(bits, &mut marked, (0..h).map(|y| y * w + x));
        scan_line(bits, &mut marked, (0..h).rev().map(|y| y * w + x));
    }
    Contour { width: w, height: h, marked }
}

/// Grayscale overlay: boundary 255, interior foreground 128, background 0.
pub fn overlay(mask: &BinaryMask, contour: &Contour) -> Vec<u8> {
    mask.bits
        .iter()
        .zip(&contour.marked)
        .map(|(&fg, &edge)| match (fg, edge) {
            (_, true) => 255,
            (true, false) => 128,
            _ => 0,
        })
        .collect()
}

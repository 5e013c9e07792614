//! Hand segmentation: alpha window around the hand depth, binarization and
//! 3x3 majority smoothing.

use serde::{Deserialize, Serialize};

use crate::frame::DepthFrame;

pub const DEFAULT_D_LIMIT: f64 = 80.0;
pub const DEFAULT_U_LIMIT: f64 = 120.0;
pub const DEFAULT_THRESHOLD: u8 = 1;

/// Depth window around the tracked hand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationParams {
    /// Depth of the hand joint, mm.
    pub depth_of_hand: f64,
    /// Window extent toward the camera, mm.
    pub d_limit: f64,
    /// Window extent away from the camera, mm.
    pub u_limit: f64,
    pub target_player: u8,
}

impl SegmentationParams {
    pub fn new(depth_of_hand: f64) -> Self {
        Self { depth_of_hand, d_limit: DEFAULT_D_LIMIT, u_limit: DEFAULT_U_LIMIT, target_player: 1 }
    }

    pub fn is_valid(&self) -> bool {
        self.d_limit > 0.0 && self.u_limit > 0.0 && self.depth_of_hand > 0.0 && (1..=6).contains(&self.target_player)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaMask {
    pub width: usize,
    pub height: usize,
    pub alpha: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![false; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let bits = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        Self { width, height, bits }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Iterates `(x, y)` of every foreground pixel in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (i % w, i / w))
    }
}

/// Per-pixel alpha `255 - 255 * (depth - depth_of_hand + d_limit) / (d_limit + u_limit)`,
/// truncated toward zero and clamped to `0..=255`. Pixels that do not belong to
/// the target player, or have no depth reading, get 0.
pub fn compute_alpha(frame: &DepthFrame, params: &SegmentationParams) -> AlphaMask {
    let span = params.d_limit + params.u_limit;
    let alpha = frame
        .depth
        .iter()
        .zip(&frame.player_index)
        .map(|(&d, &p)| {
            if p != params.target_player || d == 0 {
                return 0;
            }
            let raw = 255.0 - 255.0 * (d as f64 - params.depth_of_hand + params.d_limit) / span;
            raw.trunc().clamp(0.0, 255.0) as u8
        })
        .collect();
    AlphaMask { width: frame.width, height: frame.height, alpha }
}

/// Foreground iff `alpha >= threshold`.
pub fn binarize_alpha(mask: &AlphaMask, threshold: u8) -> BinaryMask {
    BinaryMask {
        width: mask.width,
        height: mask.height,
        bits: mask.alpha.iter().map(|&a| a >= threshold).collect(),
    }
}

/// One 3x3 majority (binary median) pass; out-of-image neighbors are background.
pub fn smooth_mask(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width, mask.height);
    let mut out = BinaryMask::new(w, h);
    for y in 0..h {
        let rows = y.saturating_sub(1)..(y + 2).min(h);
        for x in 0..w {
            let cols = x.saturating_sub(1)..(x + 2).min(w);
            let mut n = 0;
            for yy in rows.clone() {
                for xx in cols.clone() {
                    n += mask.get(xx, yy) as u32;
                }
            }
            out.set(x, y, n >= 5);
        }
    }
    out
}

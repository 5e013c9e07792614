//! Static hand pose (fist / open) from silhouette compactness, with hysteresis.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::contour::Contour;
use crate::segmentation::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseFeatures {
    pub area: usize,
    pub centroid: (f64, f64),
    /// Largest centroid-to-contour distance, pixels.
    pub enclosing_radius: f64,
    /// `area / (pi * enclosing_radius^2)`.
    pub compactness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum HandPose {
    Fist,
    Open,
    Unknown,
}

impl HandPose {
    pub fn is_known(self) -> bool {
        self != HandPose::Unknown
    }
}

impl fmt::Display for HandPose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HandPose::Fist => "FIST",
            HandPose::Open => "OPEN",
            HandPose::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoseThresholds {
    pub fist_enter: f64,
    pub open_enter: f64,
    pub min_area: usize,
}

impl Default for PoseThresholds {
    fn default() -> Self {
        Self { fist_enter: 0.70, open_enter: 0.50, min_area: 200 }
    }
}

/// Area, centroid, centroid-centered enclosing radius and compactness.
///
/// A lone pixel has radius 0; its compactness is reported as 1. Very small
/// blobs can exceed 1 because pixels are treated as points.
pub fn compute_features(mask: &BinaryMask, contour: &Contour) -> PoseFeatures {
    let (mut n, mut sx, mut sy) = (0usize, 0f64, 0f64);
    for (x, y) in mask.foreground() {
        n += 1;
        sx += x as f64;
        sy += y as f64;
    }
    if n == 0 {
        return PoseFeatures { area: 0, centroid: (0.0, 0.0), enclosing_radius: 0.0, compactness: 0.0 };
    }
    let (cx, cy) = (sx / n as f64, sy / n as f64);
    let r2 = contour
        .points()
        .map(|(x, y)| (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2))
        .fold(0.0, f64::max);
    let radius = r2.sqrt();
    let compactness = if radius > 0.0 { n as f64 / (PI * r2) } else { 1.0 };
    PoseFeatures { area: n, centroid: (cx, cy), enclosing_radius: radius, compactness }
}

pub fn classify_pose(features: &PoseFeatures, previous: HandPose, config: &PoseThresholds) -> HandPose {
    if features.area < config.min_area {
        return HandPose::Unknown;
    }
    if features.compactness >= config.fist_enter {
        HandPose::Fist
    } else if features.compactness <= config.open_enter {
        HandPose::Open
    } else {
        previous
    }
}

//! Synthetic depth-sensor: renders depth and skeleton frames from a JSON scene.
//!
//! Scene geometry is in camera space, millimeters, with +x right, +y down and
//! +z away from the camera. Pixels are sampled with a pinhole model
//! `u = cx + fx * x / z`, `v = cy + fy * y / z`; the ray for pixel `(u, v)`
//! passes through the integer pixel coordinate. The depth written for a pixel
//! is the z coordinate of the nearest hit, not the ray length.
//!
//! The hand is either a sphere (closed fist) or a fronto-parallel five-point
//! star plate (open hand) whose front face sits at the hand center depth.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{DepthFrame, Joint, RecordedStream, SkeletonFrame, StreamFrame, JOINT_COUNT};
use crate::geom::Vec3;

/// Open-hand star outer radius, as a multiple of the fist radius.
pub const STAR_OUTER_SCALE: f64 = 1.6;
/// Star inner (valley) radius, as a fraction of the outer radius.
pub const STAR_INNER_RATIO: f64 = 0.4;
pub const STAR_POINTS: usize = 5;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error("time {t_ms} ms outside scene duration 0..={duration_ms} ms")]
    TimeOutOfRange { t_ms: u64, duration_ms: u64 },
    #[error("cannot read scene {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub width: u32,
    pub height: u32,
}

/// Fronto-parallel body plane covering the pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyPlane {
    pub z: f64,
    pub rect: [u32; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Keyframe {
    pub t_ms: f64,
    pub pos: Vec3,
}

impl From<[f64; 4]> for Keyframe {
    fn from(v: [f64; 4]) -> Self {
        Keyframe { t_ms: v[0], pos: Vec3::new(v[1], v[2], v[3]) }
    }
}

impl From<Keyframe> for [f64; 4] {
    fn from(k: Keyframe) -> Self {
        [k.t_ms, k.pos.x, k.pos.y, k.pos.z]
    }
}

/// Linearly interpolated keyframe track; holds the end values outside its span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Track(pub Vec<Keyframe>);

impl Track {
    pub fn at(&self, t_ms: f64) -> Vec3 {
        let keys = &self.0;
        let first = keys[0];
        if t_ms <= first.t_ms {
            return first.pos;
        }
        for pair in keys.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if t_ms <= b.t_ms {
                let s = (t_ms - a.t_ms) / (b.t_ms - a.t_ms);
                return a.pos.lerp(b.pos, s);
            }
        }
        keys[keys.len() - 1].pos
    }

    fn validate(&self, what: &str, duration_ms: u64) -> Result<(), SceneError> {
        let keys = &self.0;
        let Some(first) = keys.first() else {
            return Err(SceneError::Invalid(format!("{what}: no keyframes")));
        };
        if keys.windows(2).any(|w| w[1].t_ms <= w[0].t_ms) {
            return Err(SceneError::Invalid(format!("{what}: keyframe times must strictly increase")));
        }
        if keys.len() > 1 && (first.t_ms != 0.0 || keys[keys.len() - 1].t_ms < duration_ms as f64) {
            return Err(SceneError::Invalid(format!(
                "{what}: keyframes must span 0..={duration_ms} ms"
            )));
        }
        if keys.iter().any(|k| ![k.t_ms, k.pos.x, k.pos.y, k.pos.z].iter().all(|v| v.is_finite())) {
            return Err(SceneError::Invalid(format!("{what}: non-finite keyframe")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HandShape {
    /// Sphere silhouette.
    Fist,
    /// Star-plate silhouette.
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandSpec {
    pub radius: f64,
    pub keyframes: Track,
    /// When set, the HAND_RIGHT joint follows the hand center.
    #[serde(default)]
    pub shared_with_hand_joint: bool,
    /// Piecewise-constant silhouette: each `[t_ms, shape]` holds until the next.
    /// Before the first entry (or with no entries) the hand is a fist.
    #[serde(default)]
    pub shapes: Vec<(f64, HandShape)>,
}

impl HandSpec {
    pub fn shape_at(&self, t_ms: f64) -> HandShape {
        self.shapes
            .iter()
            .take_while(|(t, _)| *t <= t_ms)
            .last()
            .map_or(HandShape::Fist, |(_, s)| *s)
    }
}

/// Declarative scene description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneScript {
    pub camera: CameraIntrinsics,
    pub resolution: Resolution,
    pub fps: u32,
    pub duration_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BodyPlane>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hand: Option<HandSpec>,
    #[serde(default)]
    pub joints: BTreeMap<String, Track>,
    /// Standard deviation of additive Gaussian depth noise; 0 disables noise.
    #[serde(default)]
    pub noise_sigma_mm: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SceneScript {
    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let scene: SceneScript = serde_json::from_str(text).map_err(|e| SceneError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, SceneError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|source| SceneError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let c = self.camera;
        if !(c.fx > 0.0 && c.fy > 0.0) || !c.cx.is_finite() || !c.cy.is_finite() {
            return Err(SceneError::Invalid("camera fx, fy must be positive".into()));
        }
        if self.resolution.width == 0 || self.resolution.height == 0 {
            return Err(SceneError::Invalid("resolution must be at least 1x1".into()));
        }
        if self.fps == 0 || self.fps > 1000 {
            return Err(SceneError::Invalid("fps must be within 1..=1000".into()));
        }
        if !(self.noise_sigma_mm >= 0.0 && self.noise_sigma_mm.is_finite()) {
            return Err(SceneError::Invalid("noise_sigma_mm must be a finite value >= 0".into()));
        }
        if let Some(body) = &self.body {
            if !(body.z >= 1.0 && body.z <= u16::MAX as f64) {
                return Err(SceneError::Invalid("body z must be within 1..=65535 mm".into()));
            }
        }
        if let Some(hand) = &self.hand {
            if !(hand.radius > 0.0) {
                return Err(SceneError::Invalid("hand radius must be positive".into()));
            }
            hand.keyframes.validate("hand", self.duration_ms)?;
            if hand.keyframes.0.iter().any(|k| k.pos.z <= hand.radius) {
                return Err(SceneError::Invalid("hand keyframe z must exceed the radius".into()));
            }
            if hand.shapes.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(SceneError::Invalid("hand shape times must strictly increase".into()));
            }
            if hand.shared_with_hand_joint && self.joints.contains_key(Joint::HandRight.name()) {
                return Err(SceneError::Invalid(
                    "HAND_RIGHT keyframes given but hand is shared with the joint".into(),
                ));
            }
        }
        for (name, track) in &self.joints {
            if Joint::from_name(name).is_none() {
                return Err(SceneError::Invalid(format!("unknown joint {name:?}")));
            }
            track.validate(name, self.duration_ms)?;
            if track.0.iter().any(|k| k.pos.z < 0.0) {
                return Err(SceneError::Invalid(format!("{name}: joint z must be >= 0")));
            }
        }
        Ok(())
    }

    /// Number of frames sampled by [`synthesize_stream`].
    pub fn frame_count(&self) -> u64 {
        self.duration_ms * self.fps as u64 / 1000 + 1
    }

    /// Timestamp of frame `k`: `floor(k * 1000 / fps)`.
    pub fn frame_time(&self, k: u64) -> u64 {
        k * 1000 / self.fps as u64
    }

    fn check_time(&self, t_ms: u64) -> Result<(), SceneError> {
        if t_ms > self.duration_ms {
            return Err(SceneError::TimeOutOfRange { t_ms, duration_ms: self.duration_ms });
        }
        Ok(())
    }
}

fn star_polygon(center: Vec3, outer: f64) -> Vec<(f64, f64)> {
    let inner = outer * STAR_INNER_RATIO;
    (0..2 * STAR_POINTS)
        .map(|k| {
            let a = -PI / 2.0 + k as f64 * PI / STAR_POINTS as f64;
            let r = if k % 2 == 0 { outer } else { inner };
            (center.x + r * a.cos(), center.y + r * a.sin())
        })
        .collect()
}

// even-odd crossing test
fn point_in_polygon(poly: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

enum HandGeometry {
    Sphere { center: Vec3, radius: f64 },
    Star { center: Vec3, polygon: Vec<(f64, f64)> },
}

impl HandGeometry {
    /// z of the nearest hit along the ray `(dx, dy, 1)`.
    fn hit(&self, dir: Vec3) -> Option<f64> {
        match self {
            HandGeometry::Sphere { center, radius } => {
                let a = dir.dot(dir);
                let b = dir.dot(*center);
                let c = center.dot(*center) - radius * radius;
                let disc = b * b - a * c;
                if disc < 0.0 {
                    return None;
                }
                let s = (b - disc.sqrt()) / a;
                (s > 0.0).then_some(s)
            }
            HandGeometry::Star { center, polygon } => {
                let p = dir * center.z;
                point_in_polygon(polygon, p.x, p.y).then_some(center.z)
            }
        }
    }
}

/// Renders the depth image at `t_ms`.
pub fn render_depth_frame(scene: &SceneScript, t_ms: u64) -> Result<DepthFrame, SceneError> {
    scene.check_time(t_ms)?;
    let (w, h) = (scene.resolution.width as usize, scene.resolution.height as usize);
    let mut frame = DepthFrame::empty(w, h, t_ms);
    let cam = scene.camera;

    let hand = scene.hand.as_ref().map(|spec| {
        let center = spec.keyframes.at(t_ms as f64);
        match spec.shape_at(t_ms as f64) {
            HandShape::Fist => HandGeometry::Sphere { center, radius: spec.radius },
            HandShape::Open => HandGeometry::Star {
                center,
                polygon: star_polygon(center, spec.radius * STAR_OUTER_SCALE),
            },
        }
    });

    let mut noise = (scene.noise_sigma_mm > 0.0).then(|| {
        let rng = ChaCha8Rng::seed_from_u64(scene.seed ^ t_ms.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        (rng, Normal::new(0.0, scene.noise_sigma_mm).expect("validated sigma"))
    });

    for v in 0..h {
        for u in 0..w {
            let dir = Vec3::new((u as f64 - cam.cx) / cam.fx, (v as f64 - cam.cy) / cam.fy, 1.0);
            let mut nearest = f64::INFINITY;
            if let Some(z) = hand.as_ref().and_then(|g| g.hit(dir)) {
                nearest = z;
            }
            if let Some(body) = &scene.body {
                let [x0, y0, x1, y1] = body.rect;
                if (x0 as usize..x1 as usize).contains(&u) && (y0 as usize..y1 as usize).contains(&v) {
                    nearest = nearest.min(body.z);
                }
            }
            if nearest.is_finite() {
                if let Some((rng, dist)) = noise.as_mut() {
                    nearest += dist.sample(rng);
                }
                let i = frame.index(u, v);
                frame.depth[i] = nearest.round().clamp(1.0, u16::MAX as f64) as u16;
                frame.player_index[i] = 1;
            }
        }
    }
    Ok(frame)
}

/// Skeleton at `t_ms`; undeclared joints sit at the origin (untracked).
pub fn skeleton_from_scene(scene: &SceneScript, t_ms: u64) -> Result<SkeletonFrame, SceneError> {
    scene.check_time(t_ms)?;
    let t = t_ms as f64;
    let mut joints = [[0f32; 3]; JOINT_COUNT];
    for joint in Joint::ALL {
        let pos = match (&scene.hand, joint) {
            (Some(hand), Joint::HandRight) if hand.shared_with_hand_joint => Some(hand.keyframes.at(t)),
            _ => scene.joints.get(joint.name()).map(|track| track.at(t)),
        };
        if let Some(p) = pos {
            joints[joint as usize] = [p.x as f32, p.y as f32, p.z as f32];
        }
    }
    Ok(SkeletonFrame { joints, timestamp_ms: t_ms })
}

/// Samples the scene at `floor(k * 1000 / fps)` for every frame `k`.
pub fn synthesize_stream(scene: &SceneScript) -> Result<RecordedStream, SceneError> {
    scene.validate()?;
    let mut stream = RecordedStream::new(scene.resolution.width, scene.resolution.height, scene.fps);
    for k in 0..scene.frame_count() {
        let t = scene.frame_time(k);
        stream.frames.push(StreamFrame {
            depth: render_depth_frame(scene, t)?,
            skeleton: skeleton_from_scene(scene, t)?,
        });
    }
    Ok(stream)
}

//! Depth/skeleton frame types and the `.kds` recorded-stream format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "KDS1"
//! u32 width, u32 height, u32 fps, u32 frame_count, u32 joint_count (= 5)
//! per frame:
//!   u64 timestamp_ms
//!   width*height u16 depth (mm, row-major, 0 = no reading)
//!   width*height u8 player index (row-major, 0 = background)
//!   5 joints * (f32 x, f32 y, f32 z) in `Joint` order
//! ```

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::geom::Vec3;

pub const MAGIC: &[u8; 4] = b"KDS1";
pub const HEADER_LEN: usize = 24;
pub const JOINT_COUNT: usize = 5;
pub const MAX_PLAYER_INDEX: u8 = 6;

/// Tracked skeleton joints, in file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Joint {
    Head = 0,
    ShoulderCenter = 1,
    ElbowRight = 2,
    WristRight = 3,
    HandRight = 4,
}

impl Joint {
    pub const ALL: [Joint; JOINT_COUNT] = [
        Joint::Head,
        Joint::ShoulderCenter,
        Joint::ElbowRight,
        Joint::WristRight,
        Joint::HandRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Joint::Head => "HEAD",
            Joint::ShoulderCenter => "SHOULDER_CENTER",
            Joint::ElbowRight => "ELBOW_RIGHT",
            Joint::WristRight => "WRIST_RIGHT",
            Joint::HandRight => "HAND_RIGHT",
        }
    }

    pub fn from_name(name: &str) -> Option<Joint> {
        Joint::ALL.into_iter().find(|j| j.name() == name)
    }
}

/// One depth image with its per-pixel player labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthFrame {
    pub width: usize,
    pub height: usize,
    /// Millimeters, row-major, 0 = no reading.
    pub depth: Vec<u16>,
    /// 0 = background, 1..=6 = person id.
    pub player_index: Vec<u8>,
    pub timestamp_ms: u64,
}

impl DepthFrame {
    /// An empty scene: no readings, no players.
    pub fn empty(width: usize, height: usize, timestamp_ms: u64) -> Self {
        Self {
            width,
            height,
            depth: vec![0; width * height],
            player_index: vec![0; width * height],
            timestamp_ms,
        }
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonFrame {
    /// Camera-space millimeters, indexed by `Joint as usize`.
    pub joints: [[f32; 3]; JOINT_COUNT],
    pub timestamp_ms: u64,
}

impl SkeletonFrame {
    pub fn joint(&self, joint: Joint) -> Vec3 {
        Vec3::from(self.joints[joint as usize])
    }
}

/// A frame violation reported by [`validate_frame`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameViolation {
    ZeroDimension { width: usize, height: usize },
    DepthLength { expected: usize, actual: usize },
    PlayerIndexLength { expected: usize, actual: usize },
    PlayerWithoutDepth { x: usize, y: usize },
    PlayerIndexRange { x: usize, y: usize, value: u8 },
}

impl fmt::Display for FrameViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameViolation::ZeroDimension { width, height } => {
                write!(f, "zero dimension {width}x{height}")
            }
            FrameViolation::DepthLength { expected, actual } => {
                write!(f, "depth array has {actual} entries, expected {expected}")
            }
            FrameViolation::PlayerIndexLength { expected, actual } => {
                write!(f, "player index array has {actual} entries, expected {expected}")
            }
            FrameViolation::PlayerWithoutDepth { x, y } => {
                write!(f, "pixel ({x}, {y}) has a player index but no depth")
            }
            FrameViolation::PlayerIndexRange { x, y, value } => {
                write!(f, "pixel ({x}, {y}) has player index {value} > {MAX_PLAYER_INDEX}")
            }
        }
    }
}

/// Returns every invariant violation in `frame`; empty iff the frame is valid.
pub fn validate_frame(frame: &DepthFrame) -> Vec<FrameViolation> {
    let mut out = Vec::new();
    if frame.width == 0 || frame.height == 0 {
        out.push(FrameViolation::ZeroDimension { width: frame.width, height: frame.height });
    }
    let expected = frame.width * frame.height;
    if frame.depth.len() != expected {
        out.push(FrameViolation::DepthLength { expected, actual: frame.depth.len() });
    }
    if frame.player_index.len() != expected {
        out.push(FrameViolation::PlayerIndexLength { expected, actual: frame.player_index.len() });
    }
    if !out.is_empty() {
        return out;
    }
    for (i, (&d, &p)) in frame.depth.iter().zip(&frame.player_index).enumerate() {
        let (x, y) = (i % frame.width, i / frame.width);
        if p > MAX_PLAYER_INDEX {
            out.push(FrameViolation::PlayerIndexRange { x, y, value: p });
        }
        if p > 0 && d == 0 {
            out.push(FrameViolation::PlayerWithoutDepth { x, y });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamHeader {
    pub width: u32,
    pub height: u32,
    pub fps: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamFrame {
    pub depth: DepthFrame,
    pub skeleton: SkeletonFrame,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordedStream {
    pub header: StreamHeader,
    pub frames: Vec<StreamFrame>,
}

impl RecordedStream {
    pub fn new(width: u32, height: u32, fps: u32) -> Self {
        Self { header: StreamHeader { width, height, fps }, frames: Vec::new() }
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Checks every stream invariant, returning the first violation.
    pub fn check(&self) -> Result<(), StreamError> {
        let StreamHeader { width, height, fps } = self.header;
        if width == 0 || height == 0 {
            return Err(StreamError::DimensionMismatch { width, height });
        }
        if fps == 0 {
            return Err(StreamError::InvariantViolation("fps must be at least 1".into()));
        }
        let mut last_ts: Option<u64> = None;
        for (k, f) in self.frames.iter().enumerate() {
            if f.depth.width != width as usize || f.depth.height != height as usize {
                return Err(StreamError::InvariantViolation(format!(
                    "frame {k} is {}x{}, header says {width}x{height}",
                    f.depth.width, f.depth.height
                )));
            }
            if let Some(v) = validate_frame(&f.depth).into_iter().next() {
                return Err(StreamError::InvariantViolation(format!("frame {k}: {v}")));
            }
            if f.skeleton.timestamp_ms != f.depth.timestamp_ms {
                return Err(StreamError::InvariantViolation(format!(
                    "frame {k}: skeleton timestamp {} differs from depth timestamp {}",
                    f.skeleton.timestamp_ms, f.depth.timestamp_ms
                )));
            }
            if f.skeleton.joints.iter().any(|j| j[2] < 0.0 || !j.iter().all(|c| c.is_finite())) {
                return Err(StreamError::InvariantViolation(format!(
                    "frame {k}: joint with negative or non-finite coordinate"
                )));
            }
            if last_ts.is_some_and(|t| t >= f.depth.timestamp_ms) {
                return Err(StreamError::InvariantViolation(format!(
                    "frame {k}: timestamps must strictly increase"
                )));
            }
            last_ts = Some(f.depth.timestamp_ms);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("not a stream file (bad magic {0:?})")]
    BadMagic([u8; 4]),
    #[error("file truncated: header declares {declared} frames, data holds {available}")]
    TruncatedFile { declared: u32, available: u64 },
    #[error("invalid stream dimensions {width}x{height}")]
    DimensionMismatch { width: u32, height: u32 },
    #[error("unsupported joint count {0}, expected {JOINT_COUNT}")]
    JointCount(u32),
    #[error("{0} trailing bytes after the last frame")]
    TrailingData(u64),
    #[error("stream invariant violated: {0}")]
    InvariantViolation(String),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
}

/// Bytes occupied by one frame record.
pub fn frame_record_len(width: u32, height: u32) -> u64 {
    width as u64 * height as u64 * 3 + (JOINT_COUNT as u64) * 12 + 8
}

/// Closed-form size of a stream file.
pub fn stream_file_len(width: u32, height: u32, frame_count: u32) -> u64 {
    HEADER_LEN as u64 + frame_count as u64 * frame_record_len(width, height)
}

/// Serializes `stream` into the `.kds` byte layout.
pub fn encode_stream(stream: &RecordedStream) -> Result<Vec<u8>, StreamError> {
    stream.check()?;
    let h = stream.header;
    let frame_count = u32::try_from(stream.frames.len())
        .map_err(|_| StreamError::InvariantViolation("too many frames".into()))?;
    let mut buf = Vec::with_capacity(stream_file_len(h.width, h.height, frame_count) as usize);
    buf.extend_from_slice(MAGIC);
    for v in [h.width, h.height, h.fps, frame_count, JOINT_COUNT as u32] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for f in &stream.frames {
        buf.extend_from_slice(&f.depth.timestamp_ms.to_le_bytes());
        for d in &f.depth.depth {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        buf.extend_from_slice(&f.depth.player_index);
        for joint in &f.skeleton.joints {
            for c in joint {
                buf.extend_from_slice(&c.to_le_bytes());
            }
        }
    }
    Ok(buf)
}

/// Writes `stream` to `path`, returning the number of bytes written.
pub fn write_stream(stream: &RecordedStream, path: impl AsRef<Path>) -> Result<u64, StreamError> {
    let bytes = encode_stream(stream)?;
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    file.flush()?;
    Ok(bytes.len() as u64)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> &'a [u8] {
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        s
    }

    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take(4).try_into().unwrap())
    }

    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take(8).try_into().unwrap())
    }

    fn f32(&mut self) -> f32 {
        f32::from_le_bytes(self.take(4).try_into().unwrap())
    }
}

/// Parses a `.kds` byte buffer.
pub fn decode_stream(bytes: &[u8]) -> Result<RecordedStream, StreamError> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        let mut got = [0u8; 4];
        let n = bytes.len().min(4);
        got[..n].copy_from_slice(&bytes[..n]);
        return Err(StreamError::BadMagic(got));
    }
    if bytes.len() < HEADER_LEN {
        return Err(StreamError::TruncatedFile { declared: 0, available: 0 });
    }
    let mut cur = Cursor { buf: bytes, pos: 4 };
    let width = cur.u32();
    let height = cur.u32();
    let fps = cur.u32();
    let frame_count = cur.u32();
    let joint_count = cur.u32();
    if width == 0 || height == 0 {
        return Err(StreamError::DimensionMismatch { width, height });
    }
    if joint_count as usize != JOINT_COUNT {
        return Err(StreamError::JointCount(joint_count));
    }
    let record = frame_record_len(width, height);
    let payload = (bytes.len() - HEADER_LEN) as u64;
    let available = payload / record;
    if available < frame_count as u64 {
        return Err(StreamError::TruncatedFile { declared: frame_count, available });
    }
    let expected = stream_file_len(width, height, frame_count);
    if bytes.len() as u64 > expected {
        return Err(StreamError::TrailingData(bytes.len() as u64 - expected));
    }

    let (w, h) = (width as usize, height as usize);
    let mut frames = Vec::with_capacity(frame_count as usize);
    for _ in 0..frame_count {
        let timestamp_ms = cur.u64();
        let depth = cur
            .take(w * h * 2)
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect();
        let player_index = cur.take(w * h).to_vec();
        let mut joints = [[0f32; 3]; JOINT_COUNT];
        for joint in joints.iter_mut() {
            for c in joint.iter_mut() {
                *c = cur.f32();
            }
        }
        frames.push(StreamFrame {
            depth: DepthFrame { width: w, height: h, depth, player_index, timestamp_ms },
            skeleton: SkeletonFrame { joints, timestamp_ms },
        });
    }
    let stream = RecordedStream { header: StreamHeader { width, height, fps }, frames };
    stream.check()?;
    Ok(stream)
}

/// Reads a `.kds` stream file.
pub fn read_stream(path: impl AsRef<Path>) -> Result<RecordedStream, StreamError> {
    decode_stream(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_stream(w: u32, h: u32, n: usize) -> RecordedStream {
        let mut s = RecordedStream::new(w, h, 30);
        for k in 0..n {
            let mut depth = DepthFrame::empty(w as usize, h as usize, k as u64 * 33);
            depth.depth[0] = 1200;
            depth.player_index[0] = 1;
            let skeleton = SkeletonFrame {
                joints: [[0.0, -300.0, 1500.0], [0.0, 0.0, 1500.0], [150.0, 100.0, 1400.0], [180.0, 50.0, 1300.0], [200.0, 0.0, 1200.0]],
                timestamp_ms: k as u64 * 33,
            };
            s.frames.push(StreamFrame { depth, skeleton });
        }
        s
    }

    #[test]
    fn one_frame_4x4_is_140_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.kds");
        let n = write_stream(&sample_stream(4, 4, 1), &p).unwrap();
        assert_eq!(n, 24 + (48 + 60 + 8));
        assert_eq!(fs::metadata(&p).unwrap().len(), 140);
    }

    #[test]
    fn empty_stream_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.kds");
        let s = RecordedStream::new(4, 4, 30);
        assert_eq!(write_stream(&s, &p).unwrap(), 24);
        assert_eq!(read_stream(&p).unwrap(), s);
    }

    #[test]
    fn round_trip_preserves_fields() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.kds");
        let s = sample_stream(5, 3, 4);
        write_stream(&s, &p).unwrap();
        assert_eq!(read_stream(&p).unwrap(), s);
    }

    #[test]
    fn bad_magic_rejected() {
        let mut bytes = encode_stream(&sample_stream(4, 4, 1)).unwrap();
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode_stream(&bytes), Err(StreamError::BadMagic(m)) if &m == b"XXXX"));
    }

    #[test]
    fn truncated_frame_count_rejected() {
        // valid 2-frame file, then patch the header to claim 10
        let mut bytes = encode_stream(&sample_stream(4, 4, 2)).unwrap();
        bytes[16..20].copy_from_slice(&10u32.to_le_bytes());
        match decode_stream(&bytes) {
            Err(StreamError::TruncatedFile { declared, available }) => {
                assert_eq!(declared, 10);
                assert_eq!(available, 2);
            }
            other => panic!("expected TruncatedFile, got {other:?}"),
        }
    }

    #[test]
    fn zero_width_header_rejected() {
        let mut bytes = encode_stream(&sample_stream(4, 4, 0)).unwrap();
        bytes[4..8].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(decode_stream(&bytes), Err(StreamError::DimensionMismatch { width: 0, .. })));
    }

    #[test]
    fn mismatched_frame_dimensions_rejected_on_write() {
        let mut s = sample_stream(4, 4, 1);
        s.frames[0].depth = DepthFrame::empty(5, 5, 0);
        assert!(matches!(encode_stream(&s), Err(StreamError::InvariantViolation(_))));
    }

    #[test]
    fn validate_empty_scene_is_clean() {
        assert!(validate_frame(&DepthFrame::empty(8, 6, 0)).is_empty());
    }

    #[test]
    fn validate_reports_player_without_depth() {
        let mut f = DepthFrame::empty(4, 4, 0);
        let i = f.index(2, 1);
        f.player_index[i] = 1;
        assert_eq!(validate_frame(&f), vec![FrameViolation::PlayerWithoutDepth { x: 2, y: 1 }]);
    }

    #[test]
    fn validate_reports_short_array() {
        let mut f = DepthFrame::empty(4, 4, 0);
        f.depth.pop();
        assert_eq!(validate_frame(&f), vec![FrameViolation::DepthLength { expected: 16, actual: 15 }]);
    }
}

//! Hardware-free depth-camera gesture pipeline.
//!
//! The crate is organised the same way data flows through the system:
//!
//! * [`frame`] holds the depth/skeleton frame types and the `.kds` stream format.
//! * [`sim`] renders synthetic streams from a JSON scene script.
//! * [`segmentation`] turns a depth frame into an alpha window around the hand,
//!   a binary silhouette and a smoothed silhouette.
//! * [`contour`] marks silhouette boundary pixels.
//! * [`pose`] classifies the silhouette as fist / open hand.
//! * [`gesture`] quantizes hand trajectories into direction strings and matches
//!   them against a trained template library.
//! * [`mapper`] turns poses and gestures into cursor, click, slide and render
//!   commands and routes them to named targets.
//! * [`render`] is a small software rasterizer for a perspective-projected sphere.
//! * [`pipeline`] wires all of the above together for a whole stream.

// NaN must fail range checks, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contour;
pub mod frame;
pub mod geom;
pub mod gesture;
pub mod mapper;
pub mod pipeline;
pub mod pnm;
pub mod pose;
pub mod render;
pub mod segmentation;
pub mod sim;

pub use contour::{extract_contour, Contour};
pub use frame::{
    read_stream, validate_frame, write_stream, DepthFrame, Joint, RecordedStream, SkeletonFrame,
    StreamError, StreamFrame, StreamHeader,
};
pub use geom::Vec3;
pub use gesture::{
    quantize_trajectory, recognize, train_template, Direction, DirectionString, GestureLibrary,
    GestureMatch, GestureTemplate, Trajectory,
};
pub use mapper::{CommandEvent, CommandKind, CommandMapper, ControlBox, RouteTable};
pub use pose::{classify_pose, compute_features, HandPose, PoseFeatures, PoseThresholds};
pub use render::{Camera, FrameBuffer, Orientation, ProjectedQuad, SphereMesh};
pub use segmentation::{binarize_alpha, compute_alpha, smooth_mask, AlphaMask, BinaryMask, SegmentationParams};
pub use sim::SceneScript;

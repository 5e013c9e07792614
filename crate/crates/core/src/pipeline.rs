//! End-to-end processing: segmentation -> contour -> pose -> gesture window ->
//! recognition -> command mapping -> routing, plus the JSON run configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contour::{extract_contour, Contour};
use crate::frame::{read_stream, Joint, RecordedStream, StreamError, StreamFrame};
use crate::gesture::{GestureError, GestureLibrary};
use crate::mapper::{log_line, CommandEvent, CommandKind, CommandMapper, MapperConfig, MapperError, RouteTable, ZoomDirection};
use crate::pose::{classify_pose, compute_features, HandPose, PoseFeatures, PoseThresholds};
use crate::render::{self, Camera, Orientation, RenderError, SceneView};
use crate::segmentation::{binarize_alpha, compute_alpha, smooth_mask, AlphaMask, BinaryMask, SegmentationParams};
use crate::sim::{synthesize_stream, SceneError, SceneScript};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse { line: usize, column: usize, message: String },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Gesture(#[from] GestureError),
    #[error(transparent)]
    Mapper(#[from] MapperError),
    #[error("frame {index}: {source}")]
    Frame { index: usize, source: MapperError },
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("i/o failure on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl RunError {
    /// True for missing or unreadable files, as opposed to bad data.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            RunError::Io { .. }
                | RunError::Scene(SceneError::Io { .. })
                | RunError::Stream(StreamError::Io(_))
                | RunError::Gesture(GestureError::Io(_))
                | RunError::Render(RenderError::Io(_))
        )
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationConfig {
    pub d_limit: f64,
    pub u_limit: f64,
    pub threshold: u8,
    pub player: u8,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            d_limit: crate::segmentation::DEFAULT_D_LIMIT,
            u_limit: crate::segmentation::DEFAULT_U_LIMIT,
            threshold: crate::segmentation::DEFAULT_THRESHOLD,
            player: 1,
        }
    }
}

impl SegmentationConfig {
    pub fn params(&self, depth_of_hand: f64) -> SegmentationParams {
        SegmentationParams { depth_of_hand, d_limit: self.d_limit, u_limit: self.u_limit, target_player: self.player }
    }
}

/// Intermediate images for one frame.
#[derive(Debug, Clone)]
pub struct Segmented {
    pub alpha: AlphaMask,
    pub mask: BinaryMask,
    pub smoothed: BinaryMask,
    pub contour: Contour,
}

/// Segments the hand around the HAND_RIGHT joint depth; `None` when the
/// joint is untracked (z <= 0).
pub fn segment_frame(frame: &StreamFrame, cfg: &SegmentationConfig) -> Option<Segmented> {
    let hand = frame.skeleton.joint(Joint::HandRight);
    let params = cfg.params(hand.z);
    if !params.is_valid() {
        return None;
    }
    let alpha = compute_alpha(&frame.depth, &params);
    let mask = binarize_alpha(&alpha, cfg.threshold);
    let smoothed = smooth_mask(&mask);
    let contour = extract_contour(&smoothed);
    Some(Segmented { alpha, mask, smoothed, contour })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutcome {
    pub pose: HandPose,
    pub features: Option<PoseFeatures>,
    pub events: Vec<CommandEvent>,
}

/// Per-stream stateful pipeline.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub segmentation: SegmentationConfig,
    pub thresholds: PoseThresholds,
    mapper: CommandMapper,
    previous_pose: HandPose,
}

impl Pipeline {
    pub fn new(segmentation: SegmentationConfig, thresholds: PoseThresholds, mapper: MapperConfig, library: GestureLibrary) -> Self {
        Self { segmentation, thresholds, mapper: CommandMapper::new(mapper, library), previous_pose: HandPose::Unknown }
    }

    pub fn mapper(&self) -> &CommandMapper {
        &self.mapper
    }

    pub fn process(&mut self, frame: &StreamFrame) -> Result<FrameOutcome, MapperError> {
        let (pose, features) = match segment_frame(frame, &self.segmentation) {
            Some(seg) => {
                let f = compute_features(&seg.smoothed, &seg.contour);
                (classify_pose(&f, self.previous_pose, &self.thresholds), Some(f))
            }
            None => (HandPose::Unknown, None),
        };
        self.previous_pose = pose;
        let sk = &frame.skeleton;
        let events = self.mapper.step(sk.timestamp_ms, pose, sk.joint(Joint::HandRight), sk.joint(Joint::ShoulderCenter))?;
        Ok(FrameOutcome { pose, features, events })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RendererConfig {
    pub num: usize,
    pub radius: f64,
    pub f: f64,
    pub size: (usize, usize),
    pub anglex: f64,
    pub angley: f64,
}

impl Default for RendererConfig {
    fn default() -> Self {
        Self {
            num: render::DEFAULT_NUM,
            radius: render::DEFAULT_RADIUS,
            f: render::DEFAULT_FOCAL,
            size: (512, 512),
            anglex: 0.0,
            angley: 0.05,
        }
    }
}

pub fn default_routes() -> BTreeMap<String, Vec<String>> {
    [
        ("CURSOR_MOVE", vec!["cursor"]),
        ("CLICK_DOWN", vec!["cursor"]),
        ("CLICK_UP", vec!["cursor"]),
        ("NEXT_SLIDE", vec!["slides"]),
        ("PREV_SLIDE", vec!["slides"]),
        ("ROTATE_MODEL", vec!["renderer"]),
        ("ZOOM", vec!["renderer"]),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.into_iter().map(String::from).collect()))
    .collect()
}

/// JSON run configuration. Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Scene script to simulate; exclusive with `stream`.
    #[serde(default)]
    pub scene: Option<PathBuf>,
    /// Recorded `.kds` stream; exclusive with `scene`.
    #[serde(default)]
    pub stream: Option<PathBuf>,
    /// Gesture library file; the built-in library when absent.
    #[serde(default)]
    pub library: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Overrides the scene's noise seed.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub segmentation: SegmentationConfig,
    #[serde(default)]
    pub pose: PoseThresholds,
    #[serde(default)]
    pub mapper: MapperConfig,
    #[serde(default = "default_routes")]
    pub routes: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub renderer: RendererConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::ConfigParse { line: e.line(), column: e.column(), message: e.to_string() })
    }

    /// Loads the config and resolves its relative paths.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RunError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.scene, &mut cfg.stream, &mut cfg.library].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        match (&self.scene, &self.stream) {
            (Some(_), Some(_)) => return Err(RunError::Config("give either scene or stream, not both".into())),
            (None, None) => return Err(RunError::Config("one of scene or stream is required".into())),
            _ => {}
        }
        for p in [&self.scene, &self.stream, &self.library].into_iter().flatten() {
            if !p.exists() {
                return Err(RunError::Io {
                    path: p.display().to_string(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "input file does not exist"),
                });
            }
        }
        let s = &self.segmentation;
        if !(s.d_limit > 0.0 && s.u_limit > 0.0) || !(1..=6).contains(&s.player) {
            return Err(RunError::Config("segmentation needs d_limit, u_limit > 0 and player in 1..=6".into()));
        }
        if !(self.pose.open_enter <= self.pose.fist_enter) {
            return Err(RunError::Config("pose open_enter must not exceed fist_enter".into()));
        }
        let m = &self.mapper;
        if m.screen.0 == 0 || m.screen.1 == 0 || !(m.box_size.0 > 0.0 && m.box_size.1 > 0.0) || !(m.min_step > 0.0) {
            return Err(RunError::Config("mapper needs a non-empty screen, positive box size and min_step".into()));
        }
        Ok(())
    }

    pub fn load_stream(&self) -> Result<RecordedStream, RunError> {
        if let Some(scene) = &self.scene {
            let mut scene = SceneScript::from_path(scene)?;
            if let Some(seed) = self.seed {
                scene.seed = seed;
            }
            Ok(synthesize_stream(&scene)?)
        } else {
            let path = self.stream.as_ref().expect("validated");
            Ok(read_stream(path)?)
        }
    }

    pub fn load_library(&self) -> Result<GestureLibrary, RunError> {
        Ok(match &self.library {
            Some(p) => GestureLibrary::load(p)?,
            None => GestureLibrary::default(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub frames: usize,
    pub log: Vec<String>,
    pub slide: u64,
    pub dropped: u64,
    pub rendered: Vec<PathBuf>,
    pub orientation: Orientation,
}

/// Applies renderer-bound commands to the view; true if it changed.
fn apply_render_command(view: &mut SceneView, zoom: &mut f64, kind: &CommandKind) -> bool {
    match kind {
        CommandKind::RotateModel { dax, day } => {
            view.orientation.anglex += dax;
            view.orientation.angley += day;
            true
        }
        CommandKind::Zoom(dir) => {
            *zoom *= if *dir == ZoomDirection::In { 1.1 } else { 1.0 / 1.1 };
            true
        }
        _ => false,
    }
}

/// Renders the sphere with projected coordinates scaled by `zoom`.
pub fn render_zoomed(view: &SceneView, zoom: f64) -> Result<render::FrameBuffer, RenderError> {
    let mesh = render::build_sphere(view.num, view.radius)?;
    let mut tess = render::tessellate(&render::rotate(&mesh, &view.orientation), &view.camera);
    for q in &mut tess.quads {
        for v in &mut q.vertices {
            *v = (v.0 * zoom, v.1 * zoom);
        }
    }
    let mut fb = render::FrameBuffer::new(view.width, view.height)?;
    render::rasterize(&tess.quads, &mut fb, &render::Shading::default());
    Ok(fb)
}

/// Runs the whole pipeline over `stream`, writing `events.log` and any
/// re-rendered frames into `config.output_dir`.
pub fn run_stream(stream: &RecordedStream, config: &RunConfig, library: GestureLibrary) -> Result<RunReport, RunError> {
    let mut routes = RouteTable::from_map(&config.routes)?;
    let mut pipeline = Pipeline::new(config.segmentation, config.pose, config.mapper, library);
    let r = config.renderer;
    let mut view = SceneView {
        num: r.num,
        radius: r.radius,
        camera: Camera { f: r.f },
        orientation: Orientation { anglex: r.anglex, angley: r.angley },
        width: r.size.0,
        height: r.size.1,
    };
    let mut zoom = 1.0;
    let out_dir = &config.output_dir;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let mut log = Vec::new();
    let mut slide = 0u64;
    let mut rendered = Vec::new();
    for (index, frame) in stream.frames.iter().enumerate() {
        let outcome = pipeline.process(frame).map_err(|source| RunError::Frame { index, source })?;
        for event in &outcome.events {
            let deliveries = routes.route(event);
            for d in &deliveries {
                match (d.target.as_str(), &d.event.kind) {
                    ("slides", CommandKind::NextSlide) => slide += 1,
                    ("slides", CommandKind::PrevSlide) => slide = slide.saturating_sub(1),
                    _ => {}
                }
                if d.target == "renderer" && apply_render_command(&mut view, &mut zoom, &d.event.kind) {
                    let fb = render_zoomed(&view, zoom)?;
                    let path = out_dir.join(format!("render_{:04}.ppm", rendered.len()));
                    render::write_image(&fb, &path)?;
                    rendered.push(path);
                }
            }
            log.push(log_line(event, &deliveries));
        }
    }

    let log_path = out_dir.join("events.log");
    let mut text = log.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    fs::write(&log_path, text).map_err(io_err(&log_path))?;
    Ok(RunReport { frames: stream.frames.len(), log, slide, dropped: routes.dropped(), rendered, orientation: view.orientation })
}

/// Loads inputs named by `config` and runs the pipeline.
pub fn run(config: &RunConfig) -> Result<RunReport, RunError> {
    config.validate()?;
    let library = config.load_library()?;
    let stream = config.load_stream()?;
    run_stream(&stream, config, library)
}

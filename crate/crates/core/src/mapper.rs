//! Pose edges and gesture matches to virtual mouse / slide / render commands,
//! plus routing of those commands to named targets.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;
use crate::gesture::{quantize_trajectory, recognize, GestureError, GestureLibrary, GestureMatch, Trajectory};
use crate::pose::HandPose;

/// Angle increment applied per ROTATE_MODEL command, radians.
pub const ROTATE_STEP: f64 = 0.05;

#[derive(Debug, Error)]
pub enum MapperError {
    #[error("frame timestamp {got} ms does not follow {previous} ms")]
    OutOfOrderTimestamp { previous: u64, got: u64 },
    #[error(transparent)]
    Gesture(#[from] GestureError),
    #[error("route {key:?} binds target {target:?} twice")]
    DuplicateTarget { key: String, target: String },
}

/// Body-relative rectangle mapped onto the screen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlBox {
    pub center: Vec3,
    pub width: f64,
    pub height: f64,
}

impl ControlBox {
    pub fn anchored(shoulder: Vec3, offset: Vec3, width: f64, height: f64) -> Self {
        Self { center: shoulder + offset, width, height }
    }
}

/// Affine map of the box's x-y extent onto `0..w` x `0..h` pixels, clamped
/// at the box edges; z is ignored.
pub fn map_cursor(hand: Vec3, b: &ControlBox, screen: (u32, u32)) -> (u32, u32) {
    let u = ((hand.x - (b.center.x - b.width / 2.0)) / b.width).clamp(0.0, 1.0);
    let v = ((hand.y - (b.center.y - b.height / 2.0)) / b.height).clamp(0.0, 1.0);
    let x = (u * (screen.0.max(1) - 1) as f64).round() as u32;
    let y = (v * (screen.1.max(1) - 1) as f64).round() as u32;
    (x, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZoomDirection {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandKind {
    CursorMove { x: u32, y: u32 },
    ClickDown,
    ClickUp,
    NextSlide,
    PrevSlide,
    RotateModel { dax: f64, day: f64 },
    Zoom(ZoomDirection),
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::CursorMove { .. } => "CURSOR_MOVE",
            CommandKind::ClickDown => "CLICK_DOWN",
            CommandKind::ClickUp => "CLICK_UP",
            CommandKind::NextSlide => "NEXT_SLIDE",
            CommandKind::PrevSlide => "PREV_SLIDE",
            CommandKind::RotateModel { .. } => "ROTATE_MODEL",
            CommandKind::Zoom(_) => "ZOOM",
        }
    }

    pub fn args(&self) -> String {
        match self {
            CommandKind::CursorMove { x, y } => format!("{x},{y}"),
            CommandKind::RotateModel { dax, day } => format!("{dax},{day}"),
            CommandKind::Zoom(ZoomDirection::In) => "IN".into(),
            CommandKind::Zoom(ZoomDirection::Out) => "OUT".into(),
            _ => "-".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventSource {
    /// Hand position (cursor).
    Hand,
    /// Static pose transition.
    PoseEdge,
    Gesture(String),
}

impl fmt::Display for EventSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventSource::Hand => f.write_str("hand"),
            EventSource::PoseEdge => f.write_str("pose"),
            EventSource::Gesture(name) => write!(f, "gesture:{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandEvent {
    pub kind: CommandKind,
    pub timestamp_ms: u64,
    pub source: EventSource,
}

/// Commands bound to a recognized gesture name.
pub fn commands_for_gesture(name: &str) -> Vec<CommandKind> {
    match name {
        "swipe_left" => vec![CommandKind::NextSlide],
        "swipe_right" => vec![CommandKind::PrevSlide],
        "swipe_up" => vec![CommandKind::Zoom(ZoomDirection::In)],
        "swipe_down" => vec![CommandKind::Zoom(ZoomDirection::Out)],
        "push" => vec![CommandKind::ClickDown, CommandKind::ClickUp],
        "circle_cw" => vec![CommandKind::RotateModel { dax: ROTATE_STEP, day: 0.0 }],
        _ => vec![],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapperConfig {
    pub screen: (u32, u32),
    pub mirror_x: bool,
    /// Control box center relative to SHOULDER_CENTER, mm.
    pub box_offset: Vec3,
    /// Control box width and height, mm.
    pub box_size: (f64, f64),
    /// Quantization step for gesture windows, mm.
    pub min_step: f64,
    /// A gesture window closes after this long without a `min_step` move.
    pub quiescence_ms: u64,
}

impl Default for MapperConfig {
    fn default() -> Self {
        Self {
            screen: (1920, 1080),
            mirror_x: false,
            box_offset: Vec3::ZERO,
            box_size: (400.0, 300.0),
            min_step: crate::gesture::DEFAULT_MIN_STEP,
            quiescence_ms: 150,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MapperState {
    last_t: Option<u64>,
    /// Last non-UNKNOWN pose.
    last_pose: Option<HandPose>,
    button_down: bool,
    window: Trajectory,
    /// Position and time of the last `min_step` move inside the window.
    rest_anchor: Option<(Vec3, u64)>,
}

impl MapperState {
    pub fn button_down(&self) -> bool {
        self.button_down
    }
}

/// Per-stream command state machine.
#[derive(Debug, Clone)]
pub struct CommandMapper {
    pub config: MapperConfig,
    library: GestureLibrary,
    state: MapperState,
    matches: Vec<(u64, GestureMatch)>,
}

impl CommandMapper {
    pub fn new(config: MapperConfig, library: GestureLibrary) -> Self {
        Self { config, library, state: MapperState::default(), matches: Vec::new() }
    }

    pub fn state(&self) -> &MapperState {
        &self.state
    }

    /// Every closed, non-empty gesture window's recognition result.
    pub fn matches(&self) -> &[(u64, GestureMatch)] {
        &self.matches
    }

    /// Advances one frame. Emits CURSOR_MOVE for every known pose, CLICK_DOWN
    /// on OPEN -> FIST, CLICK_UP on FIST -> OPEN (only while pressed) and the
    /// commands of any gesture window that closes on this frame. UNKNOWN frames
    /// emit nothing and discard the open window; they do not break pose edges.
    pub fn step(&mut self, t_ms: u64, pose: HandPose, hand: Vec3, shoulder: Vec3) -> Result<Vec<CommandEvent>, MapperError> {
        if let Some(previous) = self.state.last_t {
            if t_ms <= previous {
                return Err(MapperError::OutOfOrderTimestamp { previous, got: t_ms });
            }
        }
        self.state.last_t = Some(t_ms);

        if pose == HandPose::Unknown {
            self.reset_window();
            return Ok(Vec::new());
        }

        let cfg = self.config;
        let bx = ControlBox::anchored(shoulder, cfg.box_offset, cfg.box_size.0, cfg.box_size.1);
        let (mut x, y) = map_cursor(hand, &bx, cfg.screen);
        if cfg.mirror_x {
            x = cfg.screen.0.max(1) - 1 - x;
        }
        let mut events = vec![CommandEvent { kind: CommandKind::CursorMove { x, y }, timestamp_ms: t_ms, source: EventSource::Hand }];

        let previous = self.state.last_pose.replace(pose);
        let pose_event = |kind| CommandEvent { kind, timestamp_ms: t_ms, source: EventSource::PoseEdge };
        match (previous, pose) {
            (Some(HandPose::Open), HandPose::Fist) => {
                self.close_window(t_ms, &mut events)?;
                events.push(pose_event(CommandKind::ClickDown));
                self.state.button_down = true;
            }
            (Some(HandPose::Fist), HandPose::Open) => {
                self.reset_window();
                if self.state.button_down {
                    events.push(pose_event(CommandKind::ClickUp));
                    self.state.button_down = false;
                }
            }
            _ => {}
        }

        if pose == HandPose::Open {
            self.state.window.push(t_ms, hand);
            match self.state.rest_anchor {
                None => self.state.rest_anchor = Some((hand, t_ms)),
                Some((p, _)) if (hand - p).norm() >= cfg.min_step => self.state.rest_anchor = Some((hand, t_ms)),
                Some((_, since)) if t_ms - since >= cfg.quiescence_ms => {
                    self.close_window(t_ms, &mut events)?;
                    self.state.window.push(t_ms, hand);
                    self.state.rest_anchor = Some((hand, t_ms));
                }
                Some(_) => {}
            }
        } else {
            self.reset_window();
        }
        Ok(events)
    }

    fn reset_window(&mut self) {
        self.state.window.clear();
        self.state.rest_anchor = None;
    }

    fn close_window(&mut self, t_ms: u64, events: &mut Vec<CommandEvent>) -> Result<(), MapperError> {
        let s = quantize_trajectory(&self.state.window, self.config.min_step);
        self.reset_window();
        if s.is_empty() {
            return Ok(());
        }
        let m = recognize(&s, &self.library)?;
        if let Some(name) = &m.name {
            for kind in commands_for_gesture(name) {
                events.push(CommandEvent { kind, timestamp_ms: t_ms, source: EventSource::Gesture(name.clone()) });
            }
        }
        self.matches.push((t_ms, m));
        Ok(())
    }
}

/// Event kind names and gesture names bound to ordered target lists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RouteTable {
    routes: Vec<(String, Vec<String>)>,
    dropped: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub target: String,
    pub event: CommandEvent,
}

impl RouteTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `target` to the route for `key`.
    pub fn bind(&mut self, key: &str, target: &str) -> Result<(), MapperError> {
        let idx = match self.routes.iter().position(|(k, _)| k == key) {
            Some(i) => i,
            None => {
                self.routes.push((key.to_string(), Vec::new()));
                self.routes.len() - 1
            }
        };
        let targets = &mut self.routes[idx].1;
        if targets.iter().any(|t| t == target) {
            return Err(MapperError::DuplicateTarget { key: key.into(), target: target.into() });
        }
        targets.push(target.to_string());
        Ok(())
    }

    pub fn from_map(map: &BTreeMap<String, Vec<String>>) -> Result<Self, MapperError> {
        let mut table = RouteTable::new();
        for (key, targets) in map {
            for t in targets {
                table.bind(key, t)?;
            }
        }
        Ok(table)
    }

    pub fn targets(&self, key: &str) -> &[String] {
        self.routes.iter().find(|(k, _)| k == key).map_or(&[], |(_, t)| t.as_slice())
    }

    /// Number of events that had no bound target.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    /// Delivers `event` once to each target bound to its kind, then to targets
    /// bound to its gesture name, in registration order.
    pub fn route(&mut self, event: &CommandEvent) -> Vec<Delivery> {
        let mut targets: Vec<&String> = self.targets(event.kind.name()).iter().collect();
        if let EventSource::Gesture(name) = &event.source {
            for t in self.targets(name) {
                if !targets.contains(&t) {
                    targets.push(t);
                }
            }
        }
        let out: Vec<Delivery> = targets.into_iter().map(|t| Delivery { target: t.clone(), event: event.clone() }).collect();
        if out.is_empty() {
            self.dropped += 1;
        }
        out
    }
}

/// One tab-separated log line: timestamp, kind, args, source, targets.
pub fn log_line(event: &CommandEvent, deliveries: &[Delivery]) -> String {
    let targets = if deliveries.is_empty() {
        "-".to_string()
    } else {
        deliveries.iter().map(|d| d.target.as_str()).collect::<Vec<_>>().join(",")
    };
    format!("{}\t{}\t{}\t{}\t{}", event.timestamp_ms, event.kind.name(), event.kind.args(), event.source, targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use HandPose::*;

    fn box_at_origin() -> ControlBox {
        ControlBox { center: Vec3::new(0.0, 0.0, 1500.0), width: 400.0, height: 300.0 }
    }

    #[test]
    fn cursor_center_corner_and_clamp() {
        let b = box_at_origin();
        assert_eq!(map_cursor(Vec3::new(0.0, 0.0, 1200.0), &b, (1920, 1080)), (960, 540));
        assert_eq!(map_cursor(Vec3::new(-200.0, -150.0, 900.0), &b, (1920, 1080)), (0, 0));
        assert_eq!(map_cursor(Vec3::new(-700.0, 0.0, 1200.0), &b, (1920, 1080)).0, 0);
        assert_eq!(map_cursor(Vec3::new(900.0, 900.0, 1200.0), &b, (1920, 1080)), (1919, 1079));
    }

    fn run(poses: &[HandPose]) -> Vec<CommandEvent> {
        let mut m = CommandMapper::new(MapperConfig::default(), GestureLibrary::default());
        poses
            .iter()
            .enumerate()
            .flat_map(|(k, &p)| m.step(k as u64 * 33, p, Vec3::new(0.0, 0.0, 1200.0), Vec3::new(0.0, 0.0, 1500.0)).unwrap())
            .collect()
    }

    fn clicks(events: &[CommandEvent]) -> Vec<(u64, &'static str)> {
        events
            .iter()
            .filter(|e| matches!(e.kind, CommandKind::ClickDown | CommandKind::ClickUp))
            .map(|e| (e.timestamp_ms, e.kind.name()))
            .collect()
    }

    #[test]
    fn open_fist_open_clicks_once() {
        let ev = run(&[Open, Open, Fist, Fist, Open]);
        assert_eq!(clicks(&ev), vec![(66, "CLICK_DOWN"), (132, "CLICK_UP")]);
    }

    #[test]
    fn still_open_hand_only_moves_cursor() {
        let ev = run(&[Open; 40]);
        assert_eq!(ev.len(), 40);
        assert!(ev.iter().all(|e| e.kind.name() == "CURSOR_MOVE"));
    }

    #[test]
    fn unknown_frames_are_silent_and_transparent_to_edges() {
        let ev = run(&[Unknown, Open, Unknown, Fist, Unknown, Open]);
        assert_eq!(ev.iter().filter(|e| e.timestamp_ms == 0 || e.timestamp_ms == 66 || e.timestamp_ms == 132).count(), 0);
        assert_eq!(clicks(&ev), vec![(99, "CLICK_DOWN"), (165, "CLICK_UP")]);
    }

    #[test]
    fn leading_fist_is_not_a_click() {
        let ev = run(&[Fist, Fist, Open, Fist]);
        assert_eq!(clicks(&ev), vec![(99, "CLICK_DOWN")]);
    }

    #[test]
    fn out_of_order_timestamp() {
        let mut m = CommandMapper::new(MapperConfig::default(), GestureLibrary::default());
        m.step(100, Open, Vec3::ZERO, Vec3::ZERO).unwrap();
        assert!(matches!(m.step(100, Open, Vec3::ZERO, Vec3::ZERO), Err(MapperError::OutOfOrderTimestamp { .. })));
    }

    #[test]
    fn swipe_left_while_open_is_one_next_slide() {
        let mut m = CommandMapper::new(MapperConfig::default(), GestureLibrary::default());
        let shoulder = Vec3::new(0.0, 0.0, 1500.0);
        let mut events = Vec::new();
        for k in 0..45u64 {
            let t = k * 1000 / 30;
            // rest, 250 mm leftward over 500 ms, rest
            let x = 125.0 - 250.0 * ((t as f64 - 400.0) / 500.0).clamp(0.0, 1.0);
            events.extend(m.step(t, Open, Vec3::new(x, 0.0, 1200.0), shoulder).unwrap());
        }
        let slides: Vec<_> = events.iter().filter(|e| e.kind.name() != "CURSOR_MOVE").collect();
        assert_eq!(slides.len(), 1, "{slides:?}");
        assert_eq!(slides[0].kind, CommandKind::NextSlide);
        assert_eq!(slides[0].source, EventSource::Gesture("swipe_left".into()));
    }

    #[test]
    fn fist_drag_never_swipes() {
        let mut m = CommandMapper::new(MapperConfig::default(), GestureLibrary::default());
        let mut events = Vec::new();
        for k in 0..45u64 {
            let t = k * 33;
            events.extend(m.step(t, Fist, Vec3::new(k as f64 * 20.0, 0.0, 1200.0), Vec3::ZERO).unwrap());
        }
        assert!(events.iter().all(|e| e.kind.name() == "CURSOR_MOVE"));
    }

    #[test]
    fn routing_order_and_drops() {
        let mut table = RouteTable::new();
        table.bind("NEXT_SLIDE", "slides").unwrap();
        table.bind("ROTATE_MODEL", "renderer").unwrap();
        table.bind("ROTATE_MODEL", "logger").unwrap();
        let ev = |kind| CommandEvent { kind, timestamp_ms: 0, source: EventSource::PoseEdge };
        assert_eq!(table.route(&ev(CommandKind::NextSlide)).len(), 1);
        let d = table.route(&ev(CommandKind::RotateModel { dax: 0.05, day: 0.0 }));
        assert_eq!(d.iter().map(|d| d.target.as_str()).collect::<Vec<_>>(), ["renderer", "logger"]);
        assert!(table.route(&ev(CommandKind::PrevSlide)).is_empty());
        assert_eq!(table.dropped(), 1);
        assert!(table.bind("NEXT_SLIDE", "slides").is_err());
    }

    #[test]
    fn gesture_name_routes_are_deduplicated() {
        let mut table = RouteTable::new();
        table.bind("NEXT_SLIDE", "slides").unwrap();
        table.bind("swipe_left", "slides").unwrap();
        table.bind("swipe_left", "audit").unwrap();
        let e = CommandEvent { kind: CommandKind::NextSlide, timestamp_ms: 5, source: EventSource::Gesture("swipe_left".into()) };
        let d = table.route(&e);
        assert_eq!(d.iter().map(|d| d.target.as_str()).collect::<Vec<_>>(), ["slides", "audit"]);
        assert_eq!(log_line(&e, &d), "5\tNEXT_SLIDE\t-\tgesture:swipe_left\tslides,audit");
    }
}

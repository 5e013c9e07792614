//! Trajectory gestures: direction-string quantization, medoid training and
//! nearest-template recognition by normalized edit distance.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;

pub const DEFAULT_MIN_STEP: f64 = 40.0;
pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.4;

// tan(22.5 deg): half-width of each compass sector
const SECTOR_TAN: f64 = 0.414_213_562_373_095_03;

#[derive(Debug, Error)]
pub enum GestureError {
    #[error("no training samples")]
    EmptySampleSet,
    #[error("every training sample quantizes to an empty direction string")]
    AllSamplesQuantizeEmpty,
    #[error("gesture library is empty")]
    EmptyLibrary,
    #[error("duplicate template name {0:?}")]
    DuplicateTemplate(String),
    #[error("template {0:?} has an empty name or pattern")]
    EmptyTemplate(String),
    #[error("match threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("trajectory timestamps must strictly increase (sample {0})")]
    NonMonotonic(usize),
    #[error("unknown direction symbol {0:?}")]
    UnknownSymbol(String),
    #[error("library parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("library i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Compass directions in the image plane (N = -y) plus depth motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    E,
    NE,
    N,
    NW,
    W,
    SW,
    S,
    SE,
    #[serde(rename = "PUSH")]
    Push,
    #[serde(rename = "PULL")]
    Pull,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::E => "E",
            Direction::NE => "NE",
            Direction::N => "N",
            Direction::NW => "NW",
            Direction::W => "W",
            Direction::SW => "SW",
            Direction::S => "S",
            Direction::SE => "SE",
            Direction::Push => "PUSH",
            Direction::Pull => "PULL",
        }
    }

    /// Symbol for a displacement (camera space, mm).
    pub fn of_displacement(d: Vec3) -> Direction {
        let (ax, ay) = (d.x.abs(), d.y.abs());
        if d.z.abs() > ax.max(ay) {
            return if d.z < 0.0 { Direction::Push } else { Direction::Pull };
        }
        let east = d.x > 0.0;
        let north = d.y < 0.0;
        if ay <= ax * SECTOR_TAN {
            if east { Direction::E } else { Direction::W }
        } else if ax <= ay * SECTOR_TAN {
            if north { Direction::N } else { Direction::S }
        } else {
            match (north, east) {
                (true, true) => Direction::NE,
                (true, false) => Direction::NW,
                (false, true) => Direction::SE,
                (false, false) => Direction::SW,
            }
        }
    }

    /// Reflection across the vertical axis (x -> -x).
    pub fn mirror_x(self) -> Direction {
        match self {
            Direction::E => Direction::W,
            Direction::W => Direction::E,
            Direction::NE => Direction::NW,
            Direction::NW => Direction::NE,
            Direction::SE => Direction::SW,
            Direction::SW => Direction::SE,
            d => d,
        }
    }
}

impl FromStr for Direction {
    type Err = GestureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "E" => Direction::E,
            "NE" => Direction::NE,
            "N" => Direction::N,
            "NW" => Direction::NW,
            "W" => Direction::W,
            "SW" => Direction::SW,
            "S" => Direction::S,
            "SE" => Direction::SE,
            "PUSH" => Direction::Push,
            "PULL" => Direction::Pull,
            other => return Err(GestureError::UnknownSymbol(other.to_string())),
        })
    }
}

/// Direction symbols with consecutive duplicates collapsed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Direction>", into = "Vec<Direction>")]
pub struct DirectionString(Vec<Direction>);

impl DirectionString {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Appends `d` unless it repeats the last symbol.
    pub fn push(&mut self, d: Direction) {
        if self.0.last() != Some(&d) {
            self.0.push(d);
        }
    }

    pub fn symbols(&self) -> &[Direction] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mirror_x(&self) -> DirectionString {
        self.0.iter().map(|d| d.mirror_x()).collect()
    }
}

impl FromIterator<Direction> for DirectionString {
    fn from_iter<I: IntoIterator<Item = Direction>>(iter: I) -> Self {
        let mut s = DirectionString::new();
        for d in iter {
            s.push(d);
        }
        s
    }
}

impl From<Vec<Direction>> for DirectionString {
    fn from(v: Vec<Direction>) -> Self {
        v.into_iter().collect()
    }
}

impl From<DirectionString> for Vec<Direction> {
    fn from(s: DirectionString) -> Self {
        s.0
    }
}

impl FromStr for DirectionString {
    type Err = GestureError;

    /// Whitespace-separated symbols, e.g. `"E SE S"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split_whitespace().map(Direction::from_str).collect()
    }
}

impl fmt::Display for DirectionString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(d.as_str())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t_ms: u64,
    pub pos: Vec3,
}

/// Time-ordered hand positions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn new(samples: Vec<TrajectorySample>) -> Result<Self, GestureError> {
        if let Some(i) = samples.windows(2).position(|w| w[1].t_ms <= w[0].t_ms) {
            return Err(GestureError::NonMonotonic(i + 1));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Appends a sample; `false` if it would break time ordering.
    pub fn push(&mut self, t_ms: u64, pos: Vec3) -> bool {
        if self.samples.last().is_some_and(|s| s.t_ms >= t_ms) {
            return false;
        }
        self.samples.push(TrajectorySample { t_ms, pos });
        true
    }

    pub fn clear(&mut self) {
        self.samples.clear();
    }
}

/// Emits one symbol each time the hand has moved `min_step` mm from the last
/// anchor, then moves the anchor to the current sample.
pub fn quantize_trajectory(traj: &Trajectory, min_step: f64) -> DirectionString {
    debug_assert!(min_step > 0.0);
    let mut out = DirectionString::new();
    let Some(first) = traj.samples.first() else {
        return out;
    };
    let mut anchor = first.pos;
    for s in &traj.samples[1..] {
        let d = s.pos - anchor;
        if d.norm() >= min_step {
            out.push(Direction::of_displacement(d));
            anchor = s.pos;
        }
    }
    out
}

pub fn levenshtein(a: &[Direction], b: &[Direction]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = diag + (ca != cb) as usize;
            diag = row[j + 1];
            row[j + 1] = sub.min(row[j] + 1).min(row[j + 1] + 1);
        }
    }
    row[b.len()]
}

/// Levenshtein distance divided by the longer length; 0 for two empty strings.
pub fn normalized_distance(a: &DirectionString, b: &DirectionString) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    levenshtein(a.symbols(), b.symbols()) as f64 / longest as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GestureTemplate {
    pub name: String,
    pub pattern: DirectionString,
}

/// Medoid of the samples' direction strings. Samples that quantize to an
/// empty string are ignored; ties go to the earliest sample.
pub fn train_template(name: &str, samples: &[Trajectory], min_step: f64) -> Result<GestureTemplate, GestureError> {
    if samples.is_empty() {
        return Err(GestureError::EmptySampleSet);
    }
    let strings: Vec<DirectionString> = samples
        .iter()
        .map(|t| quantize_trajectory(t, min_step))
        .filter(|s| !s.is_empty())
        .collect();
    let pattern = medoid(&strings).ok_or(GestureError::AllSamplesQuantizeEmpty)?;
    Ok(GestureTemplate { name: name.to_string(), pattern })
}

/// String with minimal total edit distance to the others; earliest wins ties.
pub fn medoid(strings: &[DirectionString]) -> Option<DirectionString> {
    let mut best: Option<(usize, usize)> = None;
    for (i, s) in strings.iter().enumerate() {
        let total: usize = strings.iter().map(|o| levenshtein(s.symbols(), o.symbols())).sum();
        if best.is_none_or(|(_, b)| total < b) {
            best = Some((i, total));
        }
    }
    best.map(|(i, _)| strings[i].clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GestureMatch {
    /// Matched template, `None` for no match.
    pub name: Option<String>,
    pub distance: f64,
}

impl GestureMatch {
    pub fn no_match(distance: f64) -> Self {
        Self { name: None, distance }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GestureLibrary {
    templates: BTreeMap<String, DirectionString>,
    pub match_threshold: f64,
}

#[derive(Serialize, Deserialize)]
struct LibraryFile {
    threshold: f64,
    templates: Vec<GestureTemplate>,
}

impl Default for GestureLibrary {
    /// Swipes in four directions, push, and a clockwise circle.
    fn default() -> Self {
        use Direction::*;
        let mut lib = GestureLibrary::empty(DEFAULT_MATCH_THRESHOLD);
        let entries: [(&str, Vec<Direction>); 6] = [
            ("swipe_left", vec![W]),
            ("swipe_right", vec![E]),
            ("swipe_up", vec![N]),
            ("swipe_down", vec![S]),
            ("push", vec![Push]),
            ("circle_cw", vec![E, SE, S, SW, W, NW, N, NE]),
        ];
        for (name, pattern) in entries {
            lib.insert(GestureTemplate { name: name.into(), pattern: pattern.into() }).expect("unique defaults");
        }
        lib
    }
}

impl GestureLibrary {
    pub fn empty(match_threshold: f64) -> Self {
        Self { templates: BTreeMap::new(), match_threshold }
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&DirectionString> {
        self.templates.get(name)
    }

    /// Templates in name order.
    pub fn templates(&self) -> impl Iterator<Item = (&str, &DirectionString)> {
        self.templates.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn insert(&mut self, template: GestureTemplate) -> Result<(), GestureError> {
        if template.name.is_empty() || template.pattern.is_empty() {
            return Err(GestureError::EmptyTemplate(template.name));
        }
        if self.templates.contains_key(&template.name) {
            return Err(GestureError::DuplicateTemplate(template.name));
        }
        self.templates.insert(template.name, template.pattern);
        Ok(())
    }

    /// Inserts or replaces a template.
    pub fn upsert(&mut self, template: GestureTemplate) -> Result<(), GestureError> {
        self.templates.remove(&template.name);
        self.insert(template)
    }

    pub fn from_json(text: &str) -> Result<Self, GestureError> {
        let file: LibraryFile = serde_json::from_str(text)?;
        if !(0.0..=1.0).contains(&file.threshold) {
            return Err(GestureError::InvalidThreshold(file.threshold));
        }
        let mut lib = GestureLibrary::empty(file.threshold);
        for t in file.templates {
            lib.insert(t)?;
        }
        Ok(lib)
    }

    pub fn to_json(&self) -> String {
        let file = LibraryFile {
            threshold: self.match_threshold,
            templates: self
                .templates
                .iter()
                .map(|(name, pattern)| GestureTemplate { name: name.clone(), pattern: pattern.clone() })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("library serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GestureError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GestureError> {
        fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

/// Nearest template by normalized edit distance, if within the threshold.
/// Ties go to the lexicographically smallest name.
pub fn recognize(s: &DirectionString, lib: &GestureLibrary) -> Result<GestureMatch, GestureError> {
    if lib.is_empty() {
        return Err(GestureError::EmptyLibrary);
    }
    if s.is_empty() {
        return Ok(GestureMatch::no_match(1.0));
    }
    let mut best: Option<(&str, f64)> = None;
    for (name, pattern) in lib.templates() {
        let d = normalized_distance(s, pattern);
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((name, d));
        }
    }
    let (name, distance) = best.expect("library is non-empty");
    if distance <= lib.match_threshold {
        Ok(GestureMatch { name: Some(name.to_string()), distance })
    } else {
        Ok(GestureMatch::no_match(distance))
    }
}

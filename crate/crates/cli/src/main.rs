use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hci_core::contour::overlay;
use hci_core::frame::StreamError;
use hci_core::gesture::{GestureError, TrajectorySample};
use hci_core::pipeline::{self, segment_frame, RunConfig, RunError, SegmentationConfig};
use hci_core::pnm::{alpha_pgm, encode_pgm, mask_pgm};
use hci_core::render::{self, Camera, RenderError, SceneView};
use hci_core::segmentation::{DEFAULT_D_LIMIT, DEFAULT_THRESHOLD, DEFAULT_U_LIMIT};
use hci_core::sim::{synthesize_stream, SceneError};
use hci_core::{
    quantize_trajectory, read_stream, recognize, train_template, write_stream, GestureLibrary, Joint, Orientation,
    RecordedStream, SceneScript, Trajectory,
};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_IO: u8 = 3;

/// Depth-camera gesture pipeline and sphere renderer.
#[derive(Debug, Parser)]
#[command(name = "hci", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a `.kds` stream from a JSON scene script.
    Simulate {
        scene: PathBuf,
        out: PathBuf,
        /// Noise seed; overrides the scene's own seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print a stream's header.
    Info { stream: PathBuf },
    /// Dump alpha, mask and contour overlay PGMs for every frame.
    Segment {
        stream: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        seg: SegmentArgs,
    },
    /// Train a template from sample streams and store it in a library file.
    Train {
        #[arg(long)]
        name: String,
        #[arg(long)]
        library: PathBuf,
        #[arg(long, default_value_t = 40.0)]
        min_step: f64,
        #[arg(required = true)]
        streams: Vec<PathBuf>,
    },
    /// Recognize the hand trajectory of a stream.
    Recognize {
        /// Library file; the built-in templates when omitted.
        #[arg(long)]
        library: Option<PathBuf>,
        #[arg(long, default_value_t = 40.0)]
        min_step: f64,
        stream: PathBuf,
    },
    /// Render the sphere to PPM frames.
    Render(RenderArgs),
    /// Run the full pipeline from a JSON config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        fist_enter: Option<f64>,
        #[arg(long)]
        open_enter: Option<f64>,
        #[arg(long)]
        min_area: Option<usize>,
        #[arg(long)]
        mirror_x: bool,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[arg(long, default_value_t = DEFAULT_D_LIMIT)]
    d_limit: f64,
    #[arg(long, default_value_t = DEFAULT_U_LIMIT)]
    u_limit: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: u8,
    #[arg(long, default_value_t = 1)]
    player: u8,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(long, default_value_t = render::DEFAULT_NUM)]
    num: usize,
    #[arg(long, default_value_t = render::DEFAULT_RADIUS)]
    radius: f64,
    #[arg(long, default_value_t = render::DEFAULT_FOCAL)]
    f: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    anglex: f64,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    angley: f64,
    #[arg(long, default_value = "512x512", value_parser = parse_size)]
    size: (usize, usize),
    #[arg(long, default_value_t = 1)]
    frames: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w = w.parse().map_err(|_| format!("bad width in {s:?}"))?;
    let h = h.parse().map_err(|_| format!("bad height in {s:?}"))?;
    Ok((w, h))
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn data(message: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: message.into() }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Self { code: EXIT_IO, message: format!("{}: {err}", path.display()) }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        Self { code: if e.is_io() { EXIT_IO } else { EXIT_DATA }, message: e.to_string() }
    }
}

impl From<SceneError> for Failure {
    fn from(e: SceneError) -> Self {
        RunError::from(e).into()
    }
}

impl From<GestureError> for Failure {
    fn from(e: GestureError) -> Self {
        RunError::from(e).into()
    }
}

impl From<RenderError> for Failure {
    fn from(e: RenderError) -> Self {
        RunError::from(e).into()
    }
}

fn load_stream(path: &Path) -> Result<RecordedStream, Failure> {
    read_stream(path).map_err(|e| match e {
        StreamError::Io(err) => Failure::io(path, err),
        other => Failure::data(format!("{}: {other}", path.display())),
    })
}

fn save_stream(stream: &RecordedStream, path: &Path) -> Result<u64, Failure> {
    write_stream(stream, path).map_err(|e| match e {
        StreamError::Io(err) => Failure::io(path, err),
        other => Failure::data(format!("{}: {other}", path.display())),
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::io(path, e))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path).map_err(|e| Failure::io(path, e))
}

/// HAND_RIGHT positions of every tracked frame.
fn hand_trajectory(stream: &RecordedStream) -> Result<Trajectory, Failure> {
    let samples = stream
        .frames
        .iter()
        .map(|f| TrajectorySample { t_ms: f.skeleton.timestamp_ms, pos: f.skeleton.joint(Joint::HandRight) })
        .filter(|s| s.pos.z > 0.0)
        .collect();
    Ok(Trajectory::new(samples)?)
}

fn cmd_simulate(scene: &Path, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let mut script = SceneScript::from_path(scene)?;
    if let Some(seed) = seed {
        script.seed = seed;
    }
    let stream = synthesize_stream(&script)?;
    let bytes = save_stream(&stream, out)?;
    println!("wrote {} frames ({bytes} bytes) to {}", stream.frames.len(), out.display());
    Ok(())
}

fn cmd_info(path: &Path) -> Result<(), Failure> {
    let s = load_stream(path)?;
    println!("frames: {}, {}x{}, {} fps", s.frames.len(), s.header.width, s.header.height, s.header.fps);
    Ok(())
}

fn cmd_segment(path: &Path, out_dir: &Path, args: &SegmentArgs) -> Result<(), Failure> {
    let stream = load_stream(path)?;
    let cfg = SegmentationConfig { d_limit: args.d_limit, u_limit: args.u_limit, threshold: args.threshold, player: args.player };
    create_dir(out_dir)?;
    let mut skipped = 0;
    for (k, frame) in stream.frames.iter().enumerate() {
        let Some(seg) = segment_frame(frame, &cfg) else {
            skipped += 1;
            continue;
        };
        let (w, h) = (seg.mask.width, seg.mask.height);
        write_file(&out_dir.join(format!("alpha_{k:04}.pgm")), &alpha_pgm(&seg.alpha))?;
        write_file(&out_dir.join(format!("mask_{k:04}.pgm")), &mask_pgm(&seg.smoothed))?;
        write_file(&out_dir.join(format!("contour_{k:04}.pgm")), &encode_pgm(w, h, &overlay(&seg.smoothed, &seg.contour)))?;
    }
    println!("segmented {} frames ({skipped} without a tracked hand) into {}", stream.frames.len() - skipped, out_dir.display());
    Ok(())
}

fn cmd_train(name: &str, library: &Path, min_step: f64, streams: &[PathBuf]) -> Result<(), Failure> {
    let samples = streams.iter().map(|p| load_stream(p).and_then(|s| hand_trajectory(&s))).collect::<Result<Vec<_>, _>>()?;
    let template = train_template(name, &samples, min_step)?;
    let mut lib = if library.exists() { GestureLibrary::load(library)? } else { GestureLibrary::default() };
    println!("{name}: {}", template.pattern);
    lib.upsert(template)?;
    lib.save(library)?;
    Ok(())
}

fn cmd_recognize(library: Option<&Path>, min_step: f64, path: &Path) -> Result<(), Failure> {
    let lib = match library {
        Some(p) => GestureLibrary::load(p)?,
        None => GestureLibrary::default(),
    };
    let s = quantize_trajectory(&hand_trajectory(&load_stream(path)?)?, min_step);
    let m = recognize(&s, &lib)?;
    println!("pattern: {s}");
    match m.name {
        Some(name) => println!("match: {name} (distance {:.3})", m.distance),
        None => println!("no match (nearest distance {:.3})", m.distance),
    }
    Ok(())
}

fn cmd_render(a: &RenderArgs) -> Result<(), Failure> {
    create_dir(&a.out_dir)?;
    for k in 0..a.frames {
        let view = SceneView {
            num: a.num,
            radius: a.radius,
            camera: Camera { f: a.f },
            orientation: Orientation { anglex: a.anglex + 0.05 * k as f64, angley: a.angley },
            width: a.size.0,
            height: a.size.1,
        };
        let (fb, tess) = render::render_view(&view)?;
        let path = a.out_dir.join(format!("frame_{k:04}.ppm"));
        write_file(&path, &render::encode_ppm(&fb))?;
        println!("{} ({} quads, {} culled)", path.display(), tess.quads.len(), tess.culled);
    }
    Ok(())
}

fn cmd_run(
    config: &Path,
    seed: Option<u64>,
    fist_enter: Option<f64>,
    open_enter: Option<f64>,
    min_area: Option<usize>,
    mirror_x: bool,
    output_dir: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut cfg = RunConfig::load(config)?;
    if seed.is_some() {
        cfg.seed = seed;
    }
    if let Some(v) = fist_enter {
        cfg.pose.fist_enter = v;
    }
    if let Some(v) = open_enter {
        cfg.pose.open_enter = v;
    }
    if let Some(v) = min_area {
        cfg.pose.min_area = v;
    }
    cfg.mapper.mirror_x |= mirror_x;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    let report = pipeline::run(&cfg)?;
    println!(
        "frames: {}, events: {}, slide: {}, dropped: {}, rendered: {}",
        report.frames,
        report.log.len(),
        report.slide,
        report.dropped,
        report.rendered.len()
    );
    println!("log: {}", cfg.output_dir.join("events.log").display());
    Ok(())
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate { scene, out, seed } => cmd_simulate(&scene, &out, seed),
        Command::Info { stream } => cmd_info(&stream),
        Command::Segment { stream, out_dir, seg } => cmd_segment(&stream, &out_dir, &seg),
        Command::Train { name, library, min_step, streams } => cmd_train(&name, &library, min_step, &streams),
        Command::Recognize { library, min_step, stream } => cmd_recognize(library.as_deref(), min_step, &stream),
        Command::Render(args) => cmd_render(&args),
        Command::Run { config, seed, fist_enter, open_enter, min_area, mirror_x, output_dir } => {
            cmd_run(&config, seed, fist_enter, open_enter, min_area, mirror_x, output_dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

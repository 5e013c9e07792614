//! Software rasterizer for a perspective-projected parametric sphere.
//!
//! The mesh is a `(num+1) x (num+1)` latitude/longitude grid. Points are
//! rotated, projected with `x * f / (f + z)`, grouped into quads and drawn
//! back-to-front (painter's algorithm) with flat per-quad colors. Each quad is
//! split into two triangles with the fixed index pattern `0,1,3, 1,2,3`.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::geom::Vec3;

pub const DEFAULT_RADIUS: f64 = 160.0;
pub const DEFAULT_FOCAL: f64 = 300.0;
pub const DEFAULT_NUM: usize = 20;
pub const TRIANGLE_INDICES: [usize; 6] = [0, 1, 3, 1, 2, 3];

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("sphere needs at least 2 subdivisions, got {0}")]
    BadSubdivision(usize),
    #[error("sphere radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("point at z = {z} is behind the camera (f = {f})")]
    BehindCamera { z: f64, f: f64 },
    #[error("framebuffer must be at least 1x1")]
    EmptyFrameBuffer,
    #[error("image i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereMesh {
    pub num: usize,
    pub radius: f64,
    /// `grid[i][j]`: longitude index `i`, latitude index `j`.
    pub grid: Vec<Vec<Vec3>>,
}

pub fn build_sphere(num: usize, radius: f64) -> Result<SphereMesh, RenderError> {
    if num < 2 {
        return Err(RenderError::BadSubdivision(num));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(RenderError::BadRadius(radius));
    }
    let n = num as f64;
    let grid = (0..=num)
        .map(|i| {
            let lon = i as f64 * 2.0 * PI / n;
            (0..=num)
                .map(|j| {
                    let lat = j as f64 * PI / n;
                    Vec3::new(radius * lat.sin() * lon.cos(), radius * lat.cos(), radius * lat.sin() * lon.sin())
                })
                .collect()
        })
        .collect();
    Ok(SphereMesh { num, radius, grid })
}

/// Accumulated model rotation: `anglex` about the y axis, `angley` about the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Orientation {
    pub anglex: f64,
    pub angley: f64,
}

impl Orientation {
    /// Rotates about x by `angley`, then about y by `anglex`.
    pub fn apply(&self, p: Vec3) -> Vec3 {
        let (sy, cy) = self.angley.sin_cos();
        let p = Vec3::new(p.x, p.y * cy - p.z * sy, p.y * sy + p.z * cy);
        let (sx, cx) = self.anglex.sin_cos();
        Vec3::new(p.x * cx + p.z * sx, p.y, -p.x * sx + p.z * cx)
    }
}

pub fn rotate(mesh: &SphereMesh, o: &Orientation) -> Vec<Vec<Vec3>> {
    mesh.grid.iter().map(|col| col.iter().map(|&p| o.apply(p)).collect()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub f: f64,
}

impl Default for Camera {
    fn default() -> Self {
        Self { f: DEFAULT_FOCAL }
    }
}

/// `(x * f / (f + z), y * f / (f + z))`; points with `z <= -f + 1e-6 f` are rejected.
pub fn project(p: Vec3, cam: &Camera) -> Result<(f64, f64), RenderError> {
    let eps = 1e-6 * cam.f;
    if p.z <= -cam.f + eps {
        return Err(RenderError::BehindCamera { z: p.z, f: cam.f });
    }
    let s = cam.f / (cam.f + p.z);
    Ok((p.x * s, p.y * s))
}

/// Four projected vertices in perimeter order; triangles follow [`TRIANGLE_INDICES`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedQuad {
    pub vertices: [(f64, f64); 4],
    /// Mean pre-projection z, for painter's ordering.
    pub depth: f64,
    /// Grid index of the quad's first corner.
    pub cell: (usize, usize),
}

impl ProjectedQuad {
    pub fn triangles(&self) -> [[(f64, f64); 3]; 2] {
        let v = &self.vertices;
        let t = TRIANGLE_INDICES;
        [[v[t[0]], v[t[1]], v[t[2]]], [v[t[3]], v[t[4]], v[t[5]]]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tessellation {
    pub quads: Vec<ProjectedQuad>,
    /// Quads dropped because a corner failed [`project`].
    pub culled: usize,
}

/// One quad per grid cell, corners `(i,j) (i,j+1) (i+1,j+1) (i+1,j)`.
pub fn tessellate(grid: &[Vec<Vec3>], cam: &Camera) -> Tessellation {
    let mut quads = Vec::new();
    let mut culled = 0;
    let cols = grid.len().saturating_sub(1);
    for i in 0..cols {
        let rows = grid[i].len().min(grid[i + 1].len()).saturating_sub(1);
        for j in 0..rows {
            let corners = [grid[i][j], grid[i][j + 1], grid[i + 1][j + 1], grid[i + 1][j]];
            let projected: Result<Vec<_>, _> = corners.iter().map(|&p| project(p, cam)).collect();
            match projected {
                Ok(v) => quads.push(ProjectedQuad {
                    vertices: [v[0], v[1], v[2], v[3]],
                    depth: corners.iter().map(|p| p.z).sum::<f64>() / 4.0,
                    cell: (i, j),
                }),
                Err(_) => culled += 1,
            }
        }
    }
    Tessellation { quads, culled }
}

pub type Rgb = [u8; 3];

/// RGB image addressed in center-origin, +y-up coordinates; stored top-down.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameBuffer {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
}

impl FrameBuffer {
    pub fn new(width: usize, height: usize) -> Result<Self, RenderError> {
        if width == 0 || height == 0 {
            return Err(RenderError::EmptyFrameBuffer);
        }
        Ok(Self { width, height, pixels: vec![[0, 0, 0]; width * height] })
    }

    pub fn fill(&mut self, c: Rgb) {
        self.pixels.fill(c);
    }

    /// Pixel at column `col`, row `row` (row 0 at the top).
    pub fn get(&self, col: usize, row: usize) -> Rgb {
        self.pixels[row * self.width + col]
    }

    /// Center-origin, +y-up point to continuous raster coordinates.
    pub fn to_raster(&self, p: (f64, f64)) -> (f64, f64) {
        (p.0 + self.width as f64 / 2.0, self.height as f64 / 2.0 - p.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shading {
    /// Alternate colors by `(i + j)` parity of the quad's cell.
    Checker { even: Rgb, odd: Rgb },
}

impl Default for Shading {
    fn default() -> Self {
        Shading::Checker { even: [230, 120, 40], odd: [40, 90, 200] }
    }
}

impl Shading {
    pub fn color(&self, q: &ProjectedQuad) -> Rgb {
        match self {
            Shading::Checker { even, odd } => {
                if (q.cell.0 + q.cell.1).is_multiple_of(2) {
                    *even
                } else {
                    *odd
                }
            }
        }
    }
}

fn edge(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

/// Fills one triangle (raster coordinates) sampling pixel centers, top-left rule.
fn fill_triangle(fb: &mut FrameBuffer, tri: [(f64, f64); 3], color: Rgb) {
    let [a, mut b, mut c] = tri;
    let mut area = edge(a, b, c);
    if area == 0.0 || !area.is_finite() {
        return;
    }
    // clockwise on screen (y down) == positive area here
    if area < 0.0 {
        std::mem::swap(&mut b, &mut c);
        area = -area;
    }
    debug_assert!(area > 0.0);
    let edges = [(b, c), (c, a), (a, b)];
    // with positive area in y-down space, a "top" edge runs in +x with dy == 0
    // and a "left" edge runs upward (dy < 0)
    let top_left: [bool; 3] = edges.map(|(p, q)| {
        let (dx, dy) = (q.0 - p.0, q.1 - p.1);
        (dy == 0.0 && dx > 0.0) || dy < 0.0
    });

    let min_x = a.0.min(b.0).min(c.0).floor().max(0.0) as usize;
    let min_y = a.1.min(b.1).min(c.1).floor().max(0.0) as usize;
    let max_x = (a.0.max(b.0).max(c.0).ceil() as isize).min(fb.width as isize - 1);
    let max_y = (a.1.max(b.1).max(c.1).ceil() as isize).min(fb.height as isize - 1);
    if max_x < 0 || max_y < 0 {
        return;
    }
    for row in min_y..=max_y as usize {
        for col in min_x..=max_x as usize {
            let p = (col as f64 + 0.5, row as f64 + 0.5);
            let inside = edges.iter().zip(top_left).all(|(&(s, e), tl)| {
                let w = edge(s, e, p);
                w > 0.0 || (w == 0.0 && tl)
            });
            if inside {
                fb.pixels[row * fb.width + col] = color;
            }
        }
    }
}

/// Paints quads back-to-front (largest mean z first; stable for ties).
pub fn rasterize(quads: &[ProjectedQuad], fb: &mut FrameBuffer, shading: &Shading) {
    let mut order: Vec<&ProjectedQuad> = quads.iter().collect();
    order.sort_by(|a, b| b.depth.total_cmp(&a.depth));
    for q in order {
        let color = shading.color(q);
        for tri in q.triangles() {
            fill_triangle(fb, tri.map(|p| fb.to_raster(p)), color);
        }
    }
}

/// Binary PPM (P6) bytes, rows top to bottom.
pub fn encode_ppm(fb: &FrameBuffer) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", fb.width, fb.height).into_bytes();
    out.extend(fb.pixels.iter().flatten());
    out
}

pub fn write_image(fb: &FrameBuffer, path: impl AsRef<Path>) -> Result<u64, RenderError> {
    let bytes = encode_ppm(fb);
    fs::write(path, &bytes)?;
    Ok(bytes.len() as u64)
}

/// Parameters for rendering a single frame of the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneView {
    pub num: usize,
    pub radius: f64,
    pub camera: Camera,
    pub orientation: Orientation,
    pub width: usize,
    pub height: usize,
}

impl Default for SceneView {
    fn default() -> Self {
        Self {
            num: DEFAULT_NUM,
            radius: DEFAULT_RADIUS,
            camera: Camera::default(),
            orientation: Orientation { anglex: 0.0, angley: 0.05 },
            width: 512,
            height: 512,
        }
    }
}

/// Builds, rotates, tessellates and rasterizes the sphere onto a black frame.
pub fn render_view(view: &SceneView) -> Result<(FrameBuffer, Tessellation), RenderError> {
    let mesh = build_sphere(view.num, view.radius)?;
    let tess = tessellate(&rotate(&mesh, &view.orientation), &view.camera);
    let mut fb = FrameBuffer::new(view.width, view.height)?;
    rasterize(&tess.quads, &mut fb, &Shading::default());
    Ok((fb, tess))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_dimensions_and_poles() {
        let m = build_sphere(20, 160.0).unwrap();
        assert_eq!(m.grid.len(), 21);
        assert!(m.grid.iter().all(|c| c.len() == 21));
        for col in &m.grid {
            assert!((col[0] - Vec3::new(0.0, 160.0, 0.0)).norm() < 1e-12);
            assert!((col[20] - Vec3::new(0.0, -160.0, 0.0)).norm() < 1e-9);
        }
        assert!(matches!(build_sphere(1, 160.0), Err(RenderError::BadSubdivision(1))));
    }

    #[test]
    fn num2_equator_point() {
        let m = build_sphere(2, 160.0).unwrap();
        let p = m.grid[1][1];
        // cos(pi) = -1, cos(pi/2) ~ 0, sin(pi) ~ 0
        assert!((p.x + 160.0).abs() < 1e-9);
        assert!(p.y.abs() < 1e-9);
        assert!(p.z.abs() < 1e-9);
    }

    #[test]
    fn rotation_identity_and_half_turn() {
        let p = Vec3::new(3.0, -4.0, 5.0);
        assert_eq!(Orientation::default().apply(p), p);
        let q = Orientation { anglex: PI, angley: 0.0 }.apply(Vec3::new(160.0, 0.0, 0.0));
        assert!((q - Vec3::new(-160.0, 0.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn projection_examples() {
        let cam = Camera { f: 300.0 };
        assert_eq!(project(Vec3::new(0.0, 160.0, 0.0), &cam).unwrap(), (0.0, 160.0));
        assert_eq!(project(Vec3::new(100.0, 50.0, 300.0), &cam).unwrap(), (50.0, 25.0));
        assert!(matches!(project(Vec3::new(0.0, 0.0, -300.0), &cam), Err(RenderError::BehindCamera { .. })));
    }

    #[test]
    fn quad_count_and_index_pattern() {
        let m = build_sphere(2, 160.0).unwrap();
        let t = tessellate(&m.grid, &Camera::default());
        assert_eq!(t.quads.len(), 4);
        assert_eq!(t.culled, 0);
        assert_eq!(TRIANGLE_INDICES, [0, 1, 3, 1, 2, 3]);
        let q = t.quads[0];
        let [t0, t1] = q.triangles();
        assert_eq!(t0, [q.vertices[0], q.vertices[1], q.vertices[3]]);
        assert_eq!(t1, [q.vertices[1], q.vertices[2], q.vertices[3]]);
    }

    #[test]
    fn short_focal_culls_near_side() {
        let m = build_sphere(20, 160.0).unwrap();
        let cam = Camera { f: 100.0 };
        let t = tessellate(&m.grid, &cam);
        let behind = m.grid.iter().flatten().filter(|p| p.z <= -cam.f + 1e-6 * cam.f).count();
        assert!(behind > 0);
        assert!(t.culled > 0);
        assert_eq!(t.quads.len() + t.culled, 400);
    }

    fn square(x0: f64, y0: f64, side: f64, depth: f64, cell: (usize, usize)) -> ProjectedQuad {
        ProjectedQuad {
            vertices: [(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)],
            depth,
            cell,
        }
    }

    #[test]
    fn axis_aligned_square_covers_100_pixels() {
        let mut fb = FrameBuffer::new(32, 32).unwrap();
        rasterize(&[square(-5.0, -5.0, 10.0, 0.0, (0, 0))], &mut fb, &Shading::default());
        assert_eq!(fb.pixels.iter().filter(|&&p| p != [0, 0, 0]).count(), 100);
    }

    #[test]
    fn no_quads_leaves_buffer() {
        let mut fb = FrameBuffer::new(4, 4).unwrap();
        fb.fill([9, 9, 9]);
        let before = fb.clone();
        rasterize(&[], &mut fb, &Shading::default());
        assert_eq!(fb, before);
    }

    #[test]
    fn nearer_quad_wins() {
        let shading = Shading::Checker { even: [255, 0, 0], odd: [0, 255, 0] };
        let near = square(-4.0, -4.0, 8.0, -10.0, (0, 0));
        let far = square(-8.0, -8.0, 12.0, 50.0, (0, 1));
        for quads in [[near, far], [far, near]] {
            let mut fb = FrameBuffer::new(20, 20).unwrap();
            rasterize(&quads, &mut fb, &shading);
            assert_eq!(fb.get(10, 10), [255, 0, 0]);
            assert_eq!(fb.get(3, 16), [0, 255, 0]);
        }
    }

    #[test]
    fn ppm_header_and_payload() {
        let fb = FrameBuffer::new(2, 2).unwrap();
        let bytes = encode_ppm(&fb);
        assert!(bytes.starts_with(b"P6\n2 2\n255\n"));
        assert_eq!(bytes.len(), 11 + 12);
        assert!(bytes[11..].iter().all(|&b| b == 0));
    }
}

//! Centroid coloring, exact-partition triangle fill and wireframe drawing.
//!
//! Vertex `(x, y)` stands for the centre of pixel `(x, y)`, so pixel centres
//! and vertices share the integer lattice and a pixel belongs to a triangle
//! when its lattice point is inside. Lattice points exactly on an edge are
//! decided by nudging the sample by `e` horizontally and then `e^2`
//! vertically. The nudge points right and down (the top-left rule), except
//! in the last column and row where it points left and up so that the
//! canvas border stays inside a hull spanned by the four corner pixels.
//! Every triangle sees the same nudged point for a given pixel, so each
//! pixel inside the mesh lands in exactly one triangle, shared vertices
//! included.

use crate::delaunay::{centroid, Triangle, Triangulation, Vertex};
use crate::raster::{PixelCoord, RasterImage, Rgb};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillRule {
    #[default]
    TopLeft,
}

pub const DEFAULT_BACKGROUND: Rgb = [0, 0, 0];

/// The original image's color at the triangle's rounded centroid.
pub fn triangle_color(tri: &Triangle, verts: &[Vertex], original: &RasterImage) -> Rgb {
    let c = centroid(tri, verts);
    let p = PixelCoord::new(c.x.min(original.width() - 1), c.y.min(original.height() - 1));
    original.get(p)
}

pub fn triangle_colors(mesh: &Triangulation, original: &RasterImage) -> Vec<Rgb> {
    mesh.triangles()
        .iter()
        .map(|t| triangle_color(t, mesh.vertices(), original))
        .collect()
}

struct Edge {
    ax: i64,
    ay: i64,
    dx: i64,
    dy: i64,
}

impl Edge {
    fn new(a: Vertex, b: Vertex) -> Self {
        Edge {
            ax: a.x,
            ay: a.y,
            dx: b.x - a.x,
            dy: b.y - a.y,
        }
    }

    /// `nudge_x`/`nudge_y` are the signs of the horizontal and vertical
    /// nudge applied to the sample.
    #[inline]
    fn covers(&self, x: i64, y: i64, nudge_x: i64, nudge_y: i64) -> bool {
        let w = self.dx * (y - self.ay) - self.dy * (x - self.ax);
        if w != 0 {
            return w > 0;
        }
        if self.dy != 0 {
            -self.dy * nudge_x > 0
        } else {
            self.dx * nudge_y > 0
        }
    }
}

/// Calls `f(x, y)` for every pixel owned by a positively oriented triangle
/// under [`FillRule::TopLeft`].
pub fn for_each_covered_pixel(
    corners: [Vertex; 3],
    canvas_w: u32,
    canvas_h: u32,
    mut f: impl FnMut(u32, u32),
) {
    let [a, b, c] = corners;
    let edges = [Edge::new(a, b), Edge::new(b, c), Edge::new(c, a)];
    let (last_x, last_y) = (i64::from(canvas_w) - 1, i64::from(canvas_h) - 1);
    let min_x = a.x.min(b.x).min(c.x).max(0);
    let min_y = a.y.min(b.y).min(c.y).max(0);
    let max_x = a.x.max(b.x).max(c.x).min(last_x);
    let max_y = a.y.max(b.y).max(c.y).min(last_y);
    for y in min_y..=max_y {
        let nudge_y = if y == last_y { -1 } else { 1 };
        for x in min_x..=max_x {
            let nudge_x = if x == last_x { -1 } else { 1 };
            if edges.iter().all(|e| e.covers(x, y, nudge_x, nudge_y)) {
                f(x as u32, y as u32);
            }
        }
    }
}

/// Fills every triangle with its color; uncovered pixels get `background`.
pub fn rasterize(
    mesh: &Triangulation,
    colors: &[Rgb],
    canvas_w: u32,
    canvas_h: u32,
    background: Rgb,
) -> RasterImage {
    assert_eq!(colors.len(), mesh.triangles().len(), "one color per triangle");
    let mut out = RasterImage::filled(canvas_w, canvas_h, background).expect("non-empty canvas");
    let width = canvas_w as usize;
    let pixels = out.pixels_mut();
    for (tri, &color) in mesh.triangles().iter().zip(colors) {
        for_each_covered_pixel(tri.corners(mesh.vertices()), canvas_w, canvas_h, |x, y| {
            pixels[y as usize * width + x as usize] = color;
        });
    }
    out
}

/// How many triangles claim each pixel, row-major.
pub fn coverage_counts(mesh: &Triangulation, canvas_w: u32, canvas_h: u32) -> Vec<u32> {
    let mut counts = vec![0u32; canvas_w as usize * canvas_h as usize];
    for tri in mesh.triangles() {
        for_each_covered_pixel(tri.corners(mesh.vertices()), canvas_w, canvas_h, |x, y| {
            counts[y as usize * canvas_w as usize + x as usize] += 1;
        });
    }
    counts
}

/// Black one-pixel mesh edges on white.
pub fn render_wireframe(mesh: &Triangulation, canvas_w: u32, canvas_h: u32) -> RasterImage {
    let mut out = RasterImage::filled(canvas_w, canvas_h, [255, 255, 255]).expect("non-empty canvas");
    let mut edges: Vec<(u32, u32)> = mesh
        .triangles()
        .iter()
        .flat_map(|t| [(t.a, t.b), (t.b, t.c), (t.c, t.a)])
        .map(|(u, v)| (u.min(v), u.max(v)))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    for (u, v) in edges {
        let (a, b) = (mesh.vertices()[u as usize], mesh.vertices()[v as usize]);
        draw_line(&mut out, a, b, [0, 0, 0]);
    }
    out
}

/// Bresenham segment, clipped to the canvas per pixel.
pub fn draw_line(img: &mut RasterImage, a: Vertex, b: Vertex, color: Rgb) {
    let (mut x, mut y) = (a.x, a.y);
    let dx = (b.x - a.x).abs();
    let dy = -(b.y - a.y).abs();
    let sx = if a.x < b.x { 1 } else { -1 };
    let sy = if a.y < b.y { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        if x >= 0 && y >= 0 && x < i64::from(img.width()) && y < i64::from(img.height()) {
            img.set(PixelCoord::new(x as u32, y as u32), color);
        }
        if x == b.x && y == b.y {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

//! Bowyer-Watson Delaunay triangulation over integer pixel coordinates.
//!
//! Axis convention: `x` grows rightward and `y` grows downward (image
//! space). [`orient2d`] is the usual `(b - a) x (c - a)` cross product, and
//! every stored triangle has `orient2d > 0`, i.e. it is counter-clockwise
//! when drawn with the y axis pointing up (clockwise on screen).
//!
//! All predicates are exact: coordinates are integers bounded by
//! [`MAX_COORD`], so the incircle determinant fits in `i128`.
//!
//! The scaffold triangle that seeds the incremental construction is
//! symbolic. Its corners sit at `base + M * dir` for an unbounded `M`, and
//! predicates involving them are evaluated as polynomials in `M`, taking the
//! sign of the leading non-zero coefficient. That is the answer for every
//! sufficiently large finite `M`, so scaffold corners never fall inside the
//! circumcircle of a real triangle, however thin.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::PixelCoord;
use crate::sampling::PointSet;

/// Largest absolute coordinate accepted by the predicates.
pub const MAX_COORD: i64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct Vertex {
    pub x: i64,
    pub y: i64,
}

impl Vertex {
    pub const fn new(x: i64, y: i64) -> Self {
        Vertex { x, y }
    }
}

impl From<[i64; 2]> for Vertex {
    fn from([x, y]: [i64; 2]) -> Self {
        Vertex { x, y }
    }
}

impl From<Vertex> for [i64; 2] {
    fn from(v: Vertex) -> Self {
        [v.x, v.y]
    }
}

impl From<PixelCoord> for Vertex {
    fn from(p: PixelCoord) -> Self {
        Vertex::new(i64::from(p.x), i64::from(p.y))
    }
}

/// Indices into [`Triangulation::vertices`], in positive orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 3]", into = "[u32; 3]")]
pub struct Triangle {
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

impl Triangle {
    pub const fn new(a: u32, b: u32, c: u32) -> Self {
        Triangle { a, b, c }
    }

    pub fn indices(&self) -> [u32; 3] {
        [self.a, self.b, self.c]
    }

    pub fn sorted(&self) -> [u32; 3] {
        let mut s = self.indices();
        s.sort_unstable();
        s
    }

    pub fn corners(&self, verts: &[Vertex]) -> [Vertex; 3] {
        [verts[self.a as usize], verts[self.b as usize], verts[self.c as usize]]
    }
}

impl From<[u32; 3]> for Triangle {
    fn from([a, b, c]: [u32; 3]) -> Self {
        Triangle { a, b, c }
    }
}

impl From<Triangle> for [u32; 3] {
    fn from(t: Triangle) -> Self {
        t.indices()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangulation {
    vertices: Vec<Vertex>,
    triangles: Vec<Triangle>,
}

impl Triangulation {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    /// Vertices on the convex hull boundary, including ones in the middle of
    /// a straight hull edge.
    pub fn hull_vertex_count(&self) -> usize {
        let directed: HashSet<(u32, u32)> = self
            .triangles
            .iter()
            .flat_map(|t| [(t.a, t.b), (t.b, t.c), (t.c, t.a)])
            .collect();
        let mut on_hull = vec![false; self.vertices.len()];
        for &(u, v) in &directed {
            if !directed.contains(&(v, u)) {
                on_hull[u as usize] = true;
                on_hull[v as usize] = true;
            }
        }
        on_hull.iter().filter(|&&h| h).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("mesh serializes")
    }

    /// Parses `{"vertices": [[x, y], ...], "triangles": [[a, b, c], ...]}`,
    /// checking indices and orientation.
    pub fn from_json(text: &str) -> Result<Self> {
        let mesh: Triangulation =
            serde_json::from_str(text).map_err(|e| Error::Parameter(format!("mesh JSON: {e}")))?;
        let n = mesh.vertices.len() as u32;
        for t in &mesh.triangles {
            if t.indices().iter().any(|&i| i >= n) {
                return Err(Error::Parameter(format!("triangle {:?} indexes past {n} vertices", t.indices())));
            }
            let [a, b, c] = t.corners(&mesh.vertices);
            if orient2d(a, b, c) <= 0 {
                return Err(Error::Parameter(format!("triangle {:?} is not positively oriented", t.indices())));
            }
        }
        Ok(mesh)
    }
}

/// Twice the signed area of `abc`.
pub fn orient2d(a: Vertex, b: Vertex, c: Vertex) -> i128 {
    let (a, b, c) = (wide(a), wide(b), wide(c));
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// Incircle determinant: positive when `d` is strictly inside the
/// circumcircle of a positively oriented `abc`.
pub fn incircle(a: Vertex, b: Vertex, c: Vertex, d: Vertex) -> i128 {
    let (a, b, c, d) = (wide(a), wide(b), wide(c), wide(d));
    let row = |p: (i128, i128)| {
        let (x, y) = (p.0 - d.0, p.1 - d.1);
        (x, y, x * x + y * y)
    };
    let (ax, ay, al) = row(a);
    let (bx, by, bl) = row(b);
    let (cx, cy, cl) = row(c);
    ax * (by * cl - bl * cy) - ay * (bx * cl - bl * cx) + al * (bx * cy - by * cx)
}

fn wide(v: Vertex) -> (i128, i128) {
    (i128::from(v.x), i128::from(v.y))
}

fn check_range(v: Vertex) -> Result<()> {
    if v.x.abs() > MAX_COORD || v.y.abs() > MAX_COORD {
        return Err(Error::Parameter(format!(
            "vertex ({}, {}) outside the supported coordinate range ±{MAX_COORD}",
            v.x, v.y
        )));
    }
    Ok(())
}

/// Whether `p` lies strictly inside the circle through the triangle's
/// corners. Corner order does not matter; points on the circle are outside.
pub fn in_circumcircle(tri: (Vertex, Vertex, Vertex), p: Vertex) -> Result<bool> {
    let (a, b, c) = tri;
    for v in [a, b, c, p] {
        check_range(v)?;
    }
    let o = orient2d(a, b, c);
    if o == 0 {
        return Err(Error::Degenerate(format!(
            "collinear triangle ({}, {}) ({}, {}) ({}, {})",
            a.x, a.y, b.x, b.y, c.x, c.y
        )));
    }
    Ok(incircle(a, b, c, p).signum() * o.signum() > 0)
}

/// Rounded mean of the corners, halves away from zero. The mean of in-bounds
/// corners rounds to an in-bounds pixel, so no further clamping is needed
/// for image-space triangles.
pub fn centroid(tri: &Triangle, verts: &[Vertex]) -> PixelCoord {
    let [a, b, c] = tri.corners(verts);
    let round_third = |s: i64| -> i64 {
        let q = (2 * s.abs() + 3).div_euclid(6);
        if s < 0 {
            -q
        } else {
            q
        }
    };
    let x = round_third(a.x + b.x + c.x).max(0);
    let y = round_third(a.y + b.y + c.y).max(0);
    PixelCoord::new(x as u32, y as u32)
}

pub fn triangulate(ps: &PointSet) -> Result<Triangulation> {
    let verts: Vec<Vertex> = ps.points().iter().copied().map(Vertex::from).collect();
    triangulate_vertices(&verts)
}

/// Delaunay triangulation of `verts`, which must be distinct and not all
/// collinear. Triangle indices refer to positions in `verts`.
///
/// Points are inserted in `(y, x)` order. Where four or more points are
/// cocircular, the diagonal whose sorted index pair is lexicographically
/// smaller wins. Output triangles start at their smallest index and are
/// sorted by their sorted index triples.
pub fn triangulate_vertices(verts: &[Vertex]) -> Result<Triangulation> {
    if verts.len() < 3 {
        return Err(Error::TooFewPoints {
            available: verts.len(),
            required: 3,
            context: String::new(),
        });
    }
    for &v in verts {
        check_range(v)?;
    }
    let mut order: Vec<u32> = (0..verts.len() as u32).collect();
    order.sort_unstable_by_key(|&i| (verts[i as usize].y, verts[i as usize].x));
    if let Some(w) = order.windows(2).find(|w| verts[w[0] as usize] == verts[w[1] as usize]) {
        let v = verts[w[0] as usize];
        return Err(Error::Degenerate(format!("duplicate vertex ({}, {})", v.x, v.y)));
    }
    let a = verts[0];
    let b = verts[1];
    if verts[2..].iter().all(|&c| orient2d(a, b, c) == 0) {
        return Err(Error::Degenerate(format!("all {} points are collinear", verts.len())));
    }

    let mut mesh = Mesh::new(verts);
    for &i in &order {
        mesh.insert(i);
    }
    mesh.resolve_cocircular();
    Ok(Triangulation {
        vertices: verts.to_vec(),
        triangles: mesh.real_triangles(),
    })
}

const NONE: u32 = u32::MAX;

/// `value = base + M * dir`.
#[derive(Clone, Copy)]
struct SymPoint {
    base: (i64, i64),
    dir: (i64, i64),
}

impl SymPoint {
    fn is_finite(&self) -> bool {
        self.dir == (0, 0)
    }
}

/// Coefficients in ascending powers of `M`.
#[derive(Clone, Copy)]
struct Poly([i128; 5]);

impl Poly {
    fn linear(c0: i64, c1: i64) -> Poly {
        Poly([i128::from(c0), i128::from(c1), 0, 0, 0])
    }

    fn mul(self, rhs: Poly) -> Poly {
        let mut out = [0i128; 5];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.0.iter().enumerate() {
                if b != 0 {
                    debug_assert!(i + j < 5, "predicate degree exceeded");
                    out[i + j] += a * b;
                }
            }
        }
        Poly(out)
    }

    fn add(self, rhs: Poly) -> Poly {
        Poly(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }

    fn sub(self, rhs: Poly) -> Poly {
        Poly(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }

    /// Sign for all sufficiently large `M`.
    fn sign(self) -> Ordering {
        self.0
            .iter()
            .rev()
            .find(|&&c| c != 0)
            .map_or(Ordering::Equal, |c| c.cmp(&0))
    }
}

fn sym_diff(p: SymPoint, q: SymPoint) -> (Poly, Poly) {
    (
        Poly::linear(p.base.0 - q.base.0, p.dir.0 - q.dir.0),
        Poly::linear(p.base.1 - q.base.1, p.dir.1 - q.dir.1),
    )
}

fn sym_orient(a: SymPoint, b: SymPoint, c: SymPoint) -> Ordering {
    let (bx, by) = sym_diff(b, a);
    let (cx, cy) = sym_diff(c, a);
    bx.mul(cy).sub(by.mul(cx)).sign()
}

fn sym_incircle(a: SymPoint, b: SymPoint, c: SymPoint, d: SymPoint) -> Ordering {
    let row = |p: SymPoint| {
        let (x, y) = sym_diff(p, d);
        (x, y, x.mul(x).add(y.mul(y)))
    };
    let (ax, ay, al) = row(a);
    let (bx, by, bl) = row(b);
    let (cx, cy, cl) = row(c);
    let t1 = ax.mul(by.mul(cl).sub(bl.mul(cy)));
    let t2 = ay.mul(bx.mul(cl).sub(bl.mul(cx)));
    let t3 = al.mul(bx.mul(cy).sub(by.mul(cx)));
    t1.sub(t2).add(t3).sign()
}

/// Scaffold corners, heading down, right and up-left from the image. Each
/// lies on a line that misses the non-negative quadrant entirely.
const SCAFFOLD: [SymPoint; 3] = [
    SymPoint { base: (-1, 0), dir: (0, -1) },
    SymPoint { base: (0, -1), dir: (1, 0) },
    SymPoint { base: (-1, -1), dir: (-1, 1) },
];

#[derive(Clone, Copy)]
struct Tri {
    v: [u32; 3],
    /// `n[i]` is the neighbour across the edge opposite `v[i]`.
    n: [u32; 3],
    alive: bool,
}

impl Tri {
    fn slot_of(&self, neighbour: u32) -> usize {
        self.n.iter().position(|&t| t == neighbour).expect("neighbour link")
    }
}

struct Mesh<'a> {
    verts: &'a [Vertex],
    scaffold_base: u32,
    tris: Vec<Tri>,
    free: Vec<u32>,
    last: u32,
    // per-insertion scratch
    mark: Vec<u32>,
    epoch: u32,
}

impl<'a> Mesh<'a> {
    fn new(verts: &'a [Vertex]) -> Self {
        let n = verts.len() as u32;
        let root = Tri {
            v: [n, n + 1, n + 2],
            n: [NONE; 3],
            alive: true,
        };
        Mesh {
            verts,
            scaffold_base: n,
            tris: vec![root],
            free: Vec::new(),
            last: 0,
            mark: vec![0],
            epoch: 0,
        }
    }

    fn point(&self, i: u32) -> SymPoint {
        if i < self.scaffold_base {
            let v = self.verts[i as usize];
            SymPoint { base: (v.x, v.y), dir: (0, 0) }
        } else {
            SCAFFOLD[(i - self.scaffold_base) as usize]
        }
    }

    fn is_real(&self, i: u32) -> bool {
        i < self.scaffold_base
    }

    fn orient(&self, a: u32, b: u32, c: u32) -> Ordering {
        if self.is_real(a) && self.is_real(b) && self.is_real(c) {
            let v = self.verts;
            return orient2d(v[a as usize], v[b as usize], v[c as usize]).cmp(&0);
        }
        sym_orient(self.point(a), self.point(b), self.point(c))
    }

    fn in_circle(&self, t: &Tri, p: u32) -> bool {
        let [a, b, c] = t.v;
        let sign = if [a, b, c, p].iter().all(|&i| self.is_real(i)) {
            let v = self.verts;
            incircle(v[a as usize], v[b as usize], v[c as usize], v[p as usize]).cmp(&0)
        } else {
            let (pa, pb, pc, pp) = (self.point(a), self.point(b), self.point(c), self.point(p));
            debug_assert!(pp.is_finite());
            sym_incircle(pa, pb, pc, pp)
        };
        sign == Ordering::Greater
    }

    fn alloc(&mut self, tri: Tri) -> u32 {
        if let Some(slot) = self.free.pop() {
            self.tris[slot as usize] = tri;
            slot
        } else {
            self.tris.push(tri);
            self.mark.push(0);
            (self.tris.len() - 1) as u32
        }
    }

    /// A triangle whose closure contains `p`.
    fn locate(&self, p: u32) -> u32 {
        let mut cur = self.last;
        let limit = 4 * self.tris.len() + 16;
        'walk: for _ in 0..limit {
            let t = &self.tris[cur as usize];
            for i in 0..3 {
                let (a, b) = (t.v[(i + 1) % 3], t.v[(i + 2) % 3]);
                if self.orient(a, b, p) == Ordering::Less {
                    cur = t.n[i];
                    debug_assert_ne!(cur, NONE, "point escaped the scaffold");
                    continue 'walk;
                }
            }
            return cur;
        }
        // Walks on Delaunay meshes terminate; keep a scan as a backstop.
        (0..self.tris.len() as u32)
            .find(|&i| {
                let t = &self.tris[i as usize];
                t.alive
                    && (0..3).all(|k| self.orient(t.v[(k + 1) % 3], t.v[(k + 2) % 3], p) != Ordering::Less)
            })
            .expect("every point lies inside the scaffold")
    }

    fn insert(&mut self, p: u32) {
        let start = self.locate(p);
        self.epoch += 1;
        let in_cavity = self.epoch;
        // rejected neighbours are marked with the following epoch value
        self.epoch += 1;
        let rejected = self.epoch;

        let mut cavity = vec![start];
        self.mark[start as usize] = in_cavity;
        // (a, b, triangle across ab, its slot pointing back into the cavity)
        let mut boundary: Vec<(u32, u32, u32, usize)> = Vec::new();
        let mut k = 0;
        while k < cavity.len() {
            let t = cavity[k];
            k += 1;
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let nb = tri.n[i];
                let accept = nb != NONE
                    && match self.mark[nb as usize] {
                        m if m == in_cavity => continue,
                        m if m == rejected => false,
                        _ => {
                            let inside = self.in_circle(&self.tris[nb as usize], p);
                            self.mark[nb as usize] = if inside { in_cavity } else { rejected };
                            inside
                        }
                    };
                if accept {
                    cavity.push(nb);
                } else {
                    // Taken now: once cavity slots are recycled below, a
                    // neighbour of two cavity triangles can hold a new index
                    // equal to the other old one.
                    let back = if nb == NONE { 0 } else { self.tris[nb as usize].slot_of(t) };
                    boundary.push((tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb, back));
                }
            }
        }

        for &t in &cavity {
            self.tris[t as usize].alive = false;
        }
        self.free.extend(cavity.iter().copied());

        let mut starting_at: HashMap<u32, u32> = HashMap::with_capacity(boundary.len());
        let mut created = Vec::with_capacity(boundary.len());
        for &(a, b, outside, back) in &boundary {
            debug_assert_eq!(self.orient(a, b, p), Ordering::Greater);
            let t = self.alloc(Tri {
                v: [a, b, p],
                n: [NONE, NONE, outside],
                alive: true,
            });
            self.mark[t as usize] = 0;
            if outside != NONE {
                self.tris[outside as usize].n[back] = t;
            }
            starting_at.insert(a, t);
            created.push((t, b));
        }
        for &(t, b) in &created {
            let next = starting_at[&b];
            self.tris[t as usize].n[0] = next;
            self.tris[next as usize].n[1] = t;
        }
        self.last = created[0].0;
    }

    /// Flips cocircular diagonals toward the lexicographically smaller
    /// sorted index pair. Each flip strictly shrinks the sorted edge list,
    /// so this terminates.
    fn resolve_cocircular(&mut self) {
        let mut work: Vec<u32> = (0..self.tris.len() as u32)
            .filter(|&t| self.tris[t as usize].alive)
            .collect();
        while let Some(t1) = work.pop() {
            let tri = self.tris[t1 as usize];
            if !tri.alive || !tri.v.iter().all(|&v| self.is_real(v)) {
                continue;
            }
            for i in 0..3 {
                let t2 = tri.n[i];
                if t2 == NONE {
                    continue;
                }
                let other = self.tris[t2 as usize];
                let j = other.slot_of(t1);
                let d = other.v[j];
                if !self.is_real(d) {
                    continue;
                }
                let (a, b, c) = (tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], tri.v[i]);
                let v = self.verts;
                if incircle(v[a as usize], v[b as usize], v[c as usize], v[d as usize]) != 0 {
                    continue;
                }
                let current = (a.min(b), a.max(b));
                let alternative = (c.min(d), c.max(d));
                if alternative >= current {
                    continue;
                }
                self.flip(t1, i, t2, j);
                work.extend([t1, t2]);
                work.extend(self.tris[t1 as usize].n.iter().filter(|&&n| n != NONE));
                work.extend(self.tris[t2 as usize].n.iter().filter(|&&n| n != NONE));
                break;
            }
        }
    }

    /// `t1 = (c, a, b)` rotated so `c = v[i]`; `t2` holds `d = v[j]` across
    /// edge `ab`. Replaces diagonal `ab` with `cd`.
    fn flip(&mut self, t1: u32, i: usize, t2: u32, j: usize) {
        let x = self.tris[t1 as usize];
        let y = self.tris[t2 as usize];
        let (c, a, b) = (x.v[i], x.v[(i + 1) % 3], x.v[(i + 2) % 3]);
        let d = y.v[j];
        debug_assert_eq!((y.v[(j + 1) % 3], y.v[(j + 2) % 3]), (b, a));
        let across_bc = x.n[(i + 1) % 3];
        let across_ca = x.n[(i + 2) % 3];
        let across_ad = y.n[(j + 1) % 3];
        let across_db = y.n[(j + 2) % 3];

        self.tris[t1 as usize] = Tri {
            v: [c, a, d],
            n: [across_ad, t2, across_ca],
            alive: true,
        };
        self.tris[t2 as usize] = Tri {
            v: [d, b, c],
            n: [across_bc, t1, across_db],
            alive: true,
        };
        if across_ad != NONE {
            let o = &mut self.tris[across_ad as usize];
            let s = o.slot_of(t2);
            o.n[s] = t1;
        }
        if across_bc != NONE {
            let o = &mut self.tris[across_bc as usize];
            let s = o.slot_of(t1);
            o.n[s] = t2;
        }
    }

    fn real_triangles(&self) -> Vec<Triangle> {
        let mut out: Vec<Triangle> = self
            .tris
            .iter()
            .filter(|t| t.alive && t.v.iter().all(|&v| self.is_real(v)))
            .map(|t| {
                let k = (0..3).min_by_key(|&k| t.v[k]).unwrap();
                Triangle::new(t.v[k], t.v[(k + 1) % 3], t.v[(k + 2) % 3])
            })
            .collect();
        out.sort_unstable_by_key(Triangle::sorted);
        out
    }
}

//! Oracles shared by the integration tests. Nothing here calls into the
//! crate's own predicates.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use lowpoly::{decode_image, RasterImage, Triangulation, Vertex};

pub fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/astronaut.png")
}

pub fn fixture() -> RasterImage {
    decode_image(&std::fs::read(fixture_path()).expect("fixture present")).expect("fixture decodes")
}

pub fn cross(o: Vertex, a: Vertex, b: Vertex) -> i128 {
    let (ax, ay) = (i128::from(a.x - o.x), i128::from(a.y - o.y));
    let (bx, by) = (i128::from(b.x - o.x), i128::from(b.y - o.y));
    ax * by - ay * bx
}

/// Sign of the lifted 4x4 determinant, written out by cofactors of the
/// `[x, y, x^2 + y^2, 1]` matrix rather than translated to `d`.
pub fn lifted_incircle(a: Vertex, b: Vertex, c: Vertex, d: Vertex) -> i128 {
    let row = |p: Vertex| {
        let (x, y) = (i128::from(p.x), i128::from(p.y));
        [x, y, x * x + y * y, 1]
    };
    let m = [row(a), row(b), row(c), row(d)];
    let det3 = |r: [usize; 3], c: [usize; 3]| -> i128 {
        m[r[0]][c[0]] * (m[r[1]][c[1]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[1]])
            - m[r[0]][c[1]] * (m[r[1]][c[0]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[0]])
            + m[r[0]][c[2]] * (m[r[1]][c[0]] * m[r[2]][c[1]] - m[r[1]][c[1]] * m[r[2]][c[0]])
    };
    // expand along the last column of ones
    let cols = [0, 1, 2];
    -det3([1, 2, 3], cols) + det3([0, 2, 3], cols) - det3([0, 1, 3], cols) + det3([0, 1, 2], cols)
}

/// Strict convex hull (no points in the middle of hull edges), counter-
/// clockwise in the `cross > 0` sense.
pub fn convex_hull(points: &[Vertex]) -> Vec<Vertex> {
    let mut p = points.to_vec();
    p.sort();
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut hull: Vec<Vertex> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vertex>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

pub fn twice_area(poly: &[Vertex]) -> i128 {
    (0..poly.len())
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            i128::from(a.x) * i128::from(b.y) - i128::from(b.x) * i128::from(a.y)
        })
        .sum()
}

#[derive(Debug, Default)]
pub struct MeshReport {
    pub problems: Vec<String>,
    pub incircle_checks: usize,
}

impl MeshReport {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Structural validity plus an exhaustive empty-circumcircle scan.
pub fn check_mesh(mesh: &Triangulation, input: &[Vertex]) -> MeshReport {
    let mut r = MeshReport::default();
    let verts = mesh.vertices();
    if verts != input {
        r.problems.push("vertex list differs from input".into());
        return r;
    }
    let mut used = vec![false; verts.len()];
    let mut edges: HashMap<(u32, u32), u32> = HashMap::new();
    let mut area = 0i128;
    for t in mesh.triangles() {
        let [i, j, k] = t.indices();
        if [i, j, k].iter().any(|&x| x as usize >= verts.len()) {
            r.problems.push(format!("index out of range in {:?}", t.indices()));
            return r;
        }
        let (a, b, c) = (verts[i as usize], verts[j as usize], verts[k as usize]);
        let o = cross(a, b, c);
        if o <= 0 {
            r.problems.push(format!("triangle {:?} not positively oriented", t.indices()));
        }
        area += o;
        for x in [i, j, k] {
            used[x as usize] = true;
        }
        for e in [(i, j), (j, k), (k, i)] {
            *edges.entry(e).or_default() += 1;
        }
        for (idx, &p) in verts.iter().enumerate() {
            let idx = idx as u32;
            if idx == i || idx == j || idx == k {
                continue;
            }
            r.incircle_checks += 1;
            if lifted_incircle(a, b, c, p) > 0 {
                r.problems.push(format!("vertex {idx} inside circumcircle of {:?}", t.indices()));
            }
        }
    }
    if let Some((e, _)) = edges.iter().find(|(_, &n)| n > 1) {
        r.problems.push(format!("directed edge {e:?} used twice"));
    }
    if let Some(unused) = used.iter().position(|&u| !u) {
        r.problems.push(format!("vertex {unused} not in any triangle"));
    }
    let hull_area = twice_area(&convex_hull(verts));
    if area != hull_area {
        r.problems.push(format!("triangles cover {area}/2, hull is {hull_area}/2"));
    }
    r
}

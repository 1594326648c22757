//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Runs without the libtest harness so the lines show
//! up in plain `cargo test` output.

mod common;

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{check_mesh, convex_hull, cross, fixture};
use lowpoly::raster::luma;
use lowpoly::render::coverage_counts;
use lowpoly::{
    convolve3x3, decode_image, encode_image, rasterize, run_pipeline, sharpen, sobel, to_grayscale,
    triangulate_vertices, GrayImage, Kernel3x3, PipelineConfig, RasterImage, Vertex,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Vertex counts on the bundled fixture with seed 0 and frame points on,
/// frozen from the first run that passed every other check here.
const GOLDEN_BY_THRESHOLD: [(u32, usize); 3] = [(25, 1626), (50, 1183), (75, 975)];
const GOLDEN_BY_DENSITY: [(u32, usize); 3] = [(35, 2026), (60, 1183), (85, 836)];

const PERF_SIDE: u32 = 1024;
const PERF_BUDGET: Duration = Duration::from_secs(5);

fn gray_from(w: u32, h: u32, values: Vec<u8>) -> GrayImage {
    GrayImage::new(w, h, values).unwrap()
}

fn grayscale_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut triples = Vec::new();
    // 8x8x8 strata of side 32, 20 draws each
    for sr in 0..8u32 {
        for sg in 0..8u32 {
            for sb in 0..8u32 {
                for _ in 0..20 {
                    triples.push([
                        (sr * 32 + rng.random_range(0..32)) as u8,
                        (sg * 32 + rng.random_range(0..32)) as u8,
                        (sb * 32 + rng.random_range(0..32)) as u8,
                    ]);
                }
            }
        }
    }
    triples.extend([[0, 0, 0], [255, 255, 255], [255, 0, 0], [0, 255, 0], [0, 0, 255]]);

    let oracle = |[r, g, b]: [u8; 3]| -> u8 {
        let num = 299 * i64::from(r) + 587 * i64::from(g) + 114 * i64::from(b);
        Ratio::new(num, 1000).round().to_integer() as u8
    };
    let mut ties = 0;
    for &rgb in &triples {
        ensure!(luma(rgb) == oracle(rgb), "luma{rgb:?} = {}, expected {}", luma(rgb), oracle(rgb));
        let [r, g, b] = rgb.map(i64::from);
        ties += usize::from((299 * r + 587 * g + 114 * b) % 1000 == 500);
    }

    let w = 128;
    let h = triples.len().div_ceil(w) as u32;
    let img = RasterImage::from_fn(w as u32, h, |x, y| {
        triples.get(y as usize * w + x as usize).copied().unwrap_or([0, 0, 0])
    })
    .unwrap();
    let gray = to_grayscale(&img);
    for (i, &rgb) in triples.iter().enumerate() {
        let (x, y) = ((i % w) as u32, (i / w) as u32);
        ensure!(gray.get(x, y) == oracle(rgb), "to_grayscale differs at ({x}, {y})");
    }
    Ok(format!("{} triples exact ({ties} exact halves)", triples.len()))
}

fn brute_force(img: &GrayImage, k: &[[i32; 3]; 3]) -> Vec<i32> {
    let (w, h) = (img.width(), img.height());
    let mut out = Vec::new();
    for y in 0..h - 2 {
        for x in 0..w - 2 {
            let mut acc = 0;
            for (dy, row) in k.iter().enumerate() {
                for (dx, &weight) in row.iter().enumerate() {
                    acc += weight * i32::from(img.get(x + dx as u32, y + dy as u32));
                }
            }
            out.push(acc);
        }
    }
    out
}

fn convolution_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..200 {
        let (w, h) = (rng.random_range(3..=32u32), rng.random_range(3..=32u32));
        let values = (0..w * h).map(|_| rng.random::<u8>()).collect();
        let img = gray_from(w, h, values);
        let weights: [[i32; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-16..=16)));
        let got = convolve3x3(&img, &Kernel3x3::new(weights)).unwrap();
        ensure!((got.width, got.height) == (w - 2, h - 2), "case {case}: {w}x{h} -> {}x{}", got.width, got.height);
        ensure!(got.origin == (1, 1), "case {case}: origin {:?}", got.origin);
        ensure!(got.values == brute_force(&img, &weights), "case {case}: {w}x{h} values differ");

        if w >= 5 && h >= 5 {
            let sharp = sharpen(&img).unwrap();
            let edges = sobel(&sharp).unwrap();
            ensure!((sharp.width(), sharp.height()) == (w - 2, h - 2), "case {case}: sharpen size");
            ensure!((edges.width, edges.height) == (w - 4, h - 4), "case {case}: sobel size");
            ensure!(edges.offset == (2, 2), "case {case}: edge offset {:?}", edges.offset);
        }
    }
    Ok("200 random images and kernels match; shrink 2 per pass, 4 after sharpen+sobel".into())
}

fn sharpen_fixed_point() -> Outcome {
    for c in 0..=255u8 {
        let img = gray_from(7, 5, vec![c; 35]);
        let out = sharpen(&img).unwrap();
        ensure!(out.values().iter().all(|&v| v == c), "constant {c} not fixed");
    }

    // impulse responses on a 3x3 probe give the coefficient of each cell
    let names = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i'];
    let mut expansion = String::new();
    for (pos, name) in names.iter().enumerate() {
        let mut probe = vec![0u8; 9];
        probe[pos] = 1;
        let coeff = convolve3x3(&gray_from(3, 3, probe), &Kernel3x3::SHARPEN).unwrap().values[0];
        match coeff {
            0 => {}
            1 => expansion.push_str(&format!("+{name}")),
            -1 => expansion.push_str(&format!("-{name}")),
            k if k > 0 => expansion.push_str(&format!("+{k}{name}")),
            k => expansion.push_str(&format!("{k}{name}")),
        }
    }
    ensure!(expansion == "-b-d+5e-f-h", "expansion {expansion}");

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let p: Vec<u8> = (0..9).map(|_| rng.random()).collect();
        let [b, d, e, f, h] = [p[1], p[3], p[4], p[5], p[7]].map(i32::from);
        let expected = (-b - d + 5 * e - f - h).clamp(0, 255) as u8;
        let got = sharpen(&gray_from(3, 3, p)).unwrap().values()[0];
        ensure!(got == expected, "probe gives {got}, expected {expected}");
    }
    Ok(format!("256 constants fixed; kernel expands to {expansion}; 1000 probes agree"))
}

fn sobel_nullity_and_step() -> Outcome {
    for (w, h, c) in [(3, 3, 0u8), (9, 4, 77), (16, 16, 255), (31, 7, 128)] {
        let img = gray_from(w, h, vec![c; (w * h) as usize]);
        let e = sobel(&img).unwrap();
        ensure!(e.magnitudes.iter().all(|&m| m == 0), "constant {c} gives edges");
        if w >= 5 && h >= 5 {
            let e = sobel(&sharpen(&img).unwrap()).unwrap();
            ensure!(e.magnitudes.iter().all(|&m| m == 0), "sharpened constant {c} gives edges");
        }
    }

    let (w, h, step) = (24u32, 12u32, 12u32);
    let img = GrayImage::from_fn(w, h, |x, _| if x < step { 0 } else { 255 }).unwrap();
    for (label, edges) in [("sobel", sobel(&img).unwrap()), ("sharpen+sobel", sobel(&sharpen(&img).unwrap()).unwrap())] {
        for ey in 0..edges.height {
            for ex in 0..edges.width {
                let x = ex + edges.offset.0;
                let m = edges.get(ex, ey);
                let expected = if x == step - 1 || x == step { 255 } else { 0 };
                ensure!(m == expected, "{label}: column {x} has {m}, expected {expected}");
            }
        }
    }
    Ok("constant maps are zero; 0/255 step gives 255 on columns 11-12 and 0 elsewhere".into())
}

fn random_vertices(rng: &mut ChaCha8Rng, n: usize, span: i64) -> Vec<Vertex> {
    loop {
        let mut seen = HashSet::new();
        let pts: Vec<Vertex> = (0..n)
            .map(|_| Vertex::new(rng.random_range(0..span), rng.random_range(0..span)))
            .filter(|v| seen.insert(*v))
            .collect();
        if pts.len() >= 3 && pts[2..].iter().any(|&c| cross(pts[0], pts[1], c) != 0) {
            return pts;
        }
    }
}

/// Whether some input point sits on a hull edge without being a hull corner.
fn has_flat_hull(pts: &[Vertex], hull: &[Vertex]) -> bool {
    (0..hull.len()).any(|i| {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        pts.iter().any(|&p| p != a && p != b && cross(a, b, p) == 0)
    })
}

fn delaunay_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checks = 0;
    let mut euler_sets = 0;
    for case in 0..100 {
        let n = rng.random_range(3..=200);
        // small spans force duplicates, collinear runs and cocircular quads
        let span = if case % 2 == 0 { 48 } else { 1 << 17 };
        let pts = random_vertices(&mut rng, n, span);
        let mesh = triangulate_vertices(&pts).map_err(|e| format!("case {case}: {e}"))?;
        let report = check_mesh(&mesh, &pts);
        ensure!(report.ok(), "case {case} (n={}): {}", pts.len(), report.problems.join("; "));
        checks += report.incircle_checks;
        for _ in 0..4 {
            ensure!(triangulate_vertices(&pts).unwrap() == mesh, "case {case}: repeated run differs");
        }

        // perturbed copy in general position around the hull
        let perturbed = loop {
            let mut seen = HashSet::new();
            let q: Vec<Vertex> = pts
                .iter()
                .map(|p| Vertex::new(p.x * 1024 + rng.random_range(0..1024), p.y * 1024 + rng.random_range(0..1024)))
                .filter(|v| seen.insert(*v))
                .collect();
            if q.len() == pts.len() && !has_flat_hull(&q, &convex_hull(&q)) {
                break q;
            }
        };
        let h = convex_hull(&perturbed).len();
        let m = triangulate_vertices(&perturbed).unwrap();
        let report = check_mesh(&m, &perturbed);
        ensure!(report.ok(), "perturbed case {case}: {}", report.problems.join("; "));
        let n = perturbed.len();
        ensure!(
            m.triangles().len() == 2 * n - 2 - h,
            "perturbed case {case}: {} triangles, 2n-2-h = {}",
            m.triangles().len(),
            2 * n - 2 - h
        );
        euler_sets += 1;
    }
    Ok(format!(
        "100 sets empty-circle ({checks} vertex/triangle checks), Euler on {euler_sets} perturbed sets, 5 identical runs each"
    ))
}

fn triangle_id_color(i: usize) -> [u8; 3] {
    let v = i as u32 + 1;
    [(v >> 16) as u8, (v >> 8) as u8, v as u8]
}

/// Owner of pixel `(x, y)` by point-in-triangle on the sample point nudged
/// by `1/1024` horizontally and `1/2^20` vertically, right/down except in
/// the last column/row. Exact in scaled integers.
fn oracle_owners(mesh: &lowpoly::Triangulation, x: i64, y: i64, side: i64) -> Vec<usize> {
    const S: i64 = 1 << 20;
    let sx = if x == side - 1 { -1 } else { 1 };
    let sy = if y == side - 1 { -1 } else { 1 };
    let p = Vertex::new(x * S + sx * 1024, y * S + sy);
    let scale = |v: Vertex| Vertex::new(v.x * S, v.y * S);
    mesh.triangles()
        .iter()
        .enumerate()
        .filter(|(_, t)| {
            let [a, b, c] = t.corners(mesh.vertices()).map(scale);
            cross(a, b, p) > 0 && cross(b, c, p) > 0 && cross(c, a, p) > 0
        })
        .map(|(i, _)| i)
        .collect()
}

fn raster_partition() -> Outcome {
    const SIDE: u32 = 128;
    let side = i64::from(SIDE);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut interior_pixels = 0usize;
    for case in 0..20 {
        let n = rng.random_range(3..=300);
        let mut pts = random_vertices(&mut rng, n, side);
        let framed = case % 2 == 0;
        if framed {
            for corner in [Vertex::new(0, 0), Vertex::new(side - 1, 0), Vertex::new(0, side - 1), Vertex::new(side - 1, side - 1)] {
                if !pts.contains(&corner) {
                    pts.push(corner);
                }
            }
        }
        let mesh = triangulate_vertices(&pts).unwrap();
        let colors: Vec<_> = (0..mesh.triangles().len()).map(triangle_id_color).collect();
        let img = rasterize(&mesh, &colors, SIDE, SIDE, [0, 0, 0]);
        let counts = coverage_counts(&mesh, SIDE, SIDE);
        let hull = convex_hull(&pts);

        let (mut gaps, mut overlaps, mut mismatches) = (0, 0, 0);
        for y in 0..side {
            for x in 0..side {
                let idx = (y * side + x) as usize;
                let p = Vertex::new(x, y);
                let inside_hull = (0..hull.len()).all(|i| cross(hull[i], hull[(i + 1) % hull.len()], p) > 0);
                let owners = oracle_owners(&mesh, x, y, side);
                let must_cover = framed || inside_hull;
                interior_pixels += usize::from(must_cover);
                if must_cover && counts[idx] == 0 {
                    gaps += 1;
                }
                if counts[idx] > 1 {
                    overlaps += 1;
                }
                let painted = img.pixels()[idx];
                let expected = match owners.as_slice() {
                    [] => [0, 0, 0],
                    [t] => triangle_id_color(*t),
                    _ => {
                        overlaps += 1;
                        continue;
                    }
                };
                if painted != expected || counts[idx] as usize != owners.len() {
                    mismatches += 1;
                }
            }
        }
        ensure!(
            gaps == 0 && overlaps == 0 && mismatches == 0,
            "case {case}: {gaps} gaps, {overlaps} overlaps, {mismatches} oracle mismatches"
        );
    }
    Ok(format!("20 meshes on 128x128, {interior_pixels} interior pixels, gap/overlap 0, oracle agrees"))
}

fn run_fixture(img: &RasterImage, threshold: u32, density: u32) -> Result<lowpoly::PipelineOutput, String> {
    let cfg = PipelineConfig {
        threshold,
        density,
        ..PipelineConfig::default()
    };
    run_pipeline(img, &cfg).map_err(|e| format!("t={threshold} d={density}: {e}"))
}

fn parameter_monotonicity() -> Outcome {
    let img = fixture();
    let mut by_t = Vec::new();
    for (t, golden) in GOLDEN_BY_THRESHOLD {
        let out = run_fixture(&img, t, 60)?;
        let report = check_mesh(&out.mesh, out.mesh.vertices());
        ensure!(report.ok(), "t={t}: {}", report.problems.join("; "));
        ensure!(out.stats.vertex_count == golden, "t={t}: {} vertices, golden {golden}", out.stats.vertex_count);
        by_t.push(out.stats.vertex_count);
    }
    let mut by_d = Vec::new();
    for (d, golden) in GOLDEN_BY_DENSITY {
        let out = run_fixture(&img, 50, d)?;
        ensure!(out.stats.vertex_count == golden, "d={d}: {} vertices, golden {golden}", out.stats.vertex_count);
        ensure!(
            out.stats.sampled_count == out.stats.edge_pixel_count / d as usize,
            "d={d}: sampled {} of {} edge pixels",
            out.stats.sampled_count,
            out.stats.edge_pixel_count
        );
        by_d.push(out.stats.vertex_count);
    }
    ensure!(by_t.windows(2).all(|w| w[0] > w[1]), "not decreasing in t: {by_t:?}");
    ensure!(by_d.windows(2).all(|w| w[0] > w[1]), "not decreasing in d: {by_d:?}");
    Ok(format!("t 25/50/75 @ d=60 -> {by_t:?}; d 35/60/85 @ t=50 -> {by_d:?}"))
}

fn random_baseline() -> Outcome {
    let img = fixture();
    let cfg = PipelineConfig {
        random_points: Some(1000),
        ..PipelineConfig::default()
    };
    let out = run_pipeline(&img, &cfg).map_err(|e| e.to_string())?;
    let unique: HashSet<_> = out.mesh.vertices().iter().collect();
    ensure!(unique.len() >= 900, "only {} unique vertices", unique.len());
    let report = check_mesh(&out.mesh, out.mesh.vertices());
    ensure!(report.ok(), "{}", report.problems.join("; "));
    Ok(format!(
        "{} unique vertices, {} triangles, valid Delaunay mesh",
        unique.len(),
        out.mesh.triangles().len()
    ))
}

fn final_png(img: &RasterImage, seed: u64) -> Vec<u8> {
    let cfg = PipelineConfig {
        seed,
        ..PipelineConfig::default()
    };
    encode_image(&run_pipeline(img, &cfg).unwrap().image).unwrap()
}

fn end_to_end_determinism() -> Outcome {
    let img = fixture();
    let mut runs = 0;
    for seed in [0, 42] {
        let reference = final_png(&img, seed);
        ensure!(final_png(&img, seed) == reference, "seed {seed}: second run differs");
        for threads in [1, 4] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let png = pool.install(|| final_png(&img, seed));
            ensure!(png == reference, "seed {seed}: {threads}-thread pool differs");
        }
        runs += 4;
    }
    Ok(format!("{runs} runs over 2 seeds byte-identical across 1 and 4 threads"))
}

fn performance_envelope() -> Outcome {
    let small = fixture();
    let buf = image::RgbImage::from_raw(small.width(), small.height(), small.to_rgb_bytes()).unwrap();
    let big = image::imageops::resize(&buf, PERF_SIDE, PERF_SIDE, image::imageops::FilterType::Triangle);
    let big = RasterImage::from_rgb_bytes(PERF_SIDE, PERF_SIDE, big.as_raw()).unwrap();
    let input = encode_image(&big).unwrap();

    let start = Instant::now();
    let img = decode_image(&input).map_err(|e| e.to_string())?;
    let out = run_pipeline(&img, &PipelineConfig::default()).map_err(|e| e.to_string())?;
    let png = encode_image(&out.image).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(!png.is_empty(), "empty output");
    ensure!(elapsed < PERF_BUDGET, "took {elapsed:.2?}");
    Ok(format!(
        "{PERF_SIDE}x{PERF_SIDE} decode+pipeline+encode in {:.0} ms ({} vertices)",
        elapsed.as_secs_f64() * 1000.0,
        out.stats.vertex_count
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("grayscale_formula", grayscale_formula),
        ("convolution_oracle", convolution_oracle),
        ("sharpen_fixed_point", sharpen_fixed_point),
        ("sobel_nullity_and_step", sobel_nullity_and_step),
        ("delaunay_correctness", delaunay_correctness),
        ("raster_partition", raster_partition),
        ("parameter_monotonicity", parameter_monotonicity),
        ("random_baseline", random_baseline),
        ("end_to_end_determinism", end_to_end_determinism),
        ("performance_envelope", performance_envelope),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {name} ({secs:.2}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({secs:.2}s): {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

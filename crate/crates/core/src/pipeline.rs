//! End-to-end triangulation: grayscale, sharpen, Sobel, threshold,
//! sparsify, frame, Delaunay, centroid color, fill. Plus the parameter
//! sweep and stage dump writer.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delaunay::{triangulate, Triangulation};
use crate::error::{Error, Result, Stage};
use crate::filters::{sharpen, sobel, threshold_pixels, EdgeMap};
use crate::raster::{encode_image, to_grayscale, GrayImage, RasterImage};
use crate::render::{rasterize, render_wireframe, triangle_colors, DEFAULT_BACKGROUND};
use crate::sampling::{
    add_frame_points, random_points, sample_size, subsample_uniform, PointSet, Provenance,
    SamplerConfig, RNG_ALGORITHM,
};

pub const DEFAULT_THRESHOLD: u32 = 50;
pub const DEFAULT_DENSITY: u32 = 60;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Minimum Sobel magnitude for an edge pixel, `0..=255`.
    pub threshold: u32,
    /// Keep one vertex per `density` edge pixels.
    pub density: u32,
    pub seed: u64,
    /// Replace edge-guided vertices with this many uniformly random pixels.
    pub random_points: Option<u32>,
    /// Add the four canvas corners so the mesh spans the whole image.
    pub include_frame: bool,
    /// Keep intermediate images in the output.
    pub dump_stages: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            threshold: DEFAULT_THRESHOLD,
            density: DEFAULT_DENSITY,
            seed: 0,
            random_points: None,
            include_frame: true,
            dump_stages: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.threshold > 255 {
            return Err(Error::Parameter(format!(
                "threshold {} outside 0..=255",
                self.threshold
            )));
        }
        if self.density == 0 {
            return Err(Error::Parameter("density must be at least 1".into()));
        }
        if let Some(n) = self.random_points {
            if n < 3 {
                return Err(Error::Parameter(format!("random point count {n} is below 3")));
            }
        }
        Ok(())
    }

    fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            density: self.density,
            seed: self.seed,
            include_frame: self.include_frame,
            random_count: self.random_points,
        }
    }
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub grayscale: f64,
    pub sharpen: f64,
    pub sobel: f64,
    pub threshold: f64,
    pub sample: f64,
    pub triangulate: f64,
    pub color: f64,
    pub rasterize: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub width: u32,
    pub height: u32,
    pub threshold: u32,
    pub density: u32,
    pub seed: u64,
    pub random_points: Option<u32>,
    pub include_frame: bool,
    /// `|S|`, the number of pixels at or above the threshold.
    pub edge_pixel_count: usize,
    /// Vertices drawn from the edge set (or at random).
    pub sampled_count: usize,
    pub frame_count: usize,
    pub vertex_count: usize,
    pub triangle_count: usize,
    pub rng: String,
    pub timings_ms: StageTimings,
}

impl RunStats {
    /// Same stats with timings zeroed, for byte-stable output.
    pub fn without_timings(&self) -> RunStats {
        RunStats {
            timings_ms: StageTimings::default(),
            ..self.clone()
        }
    }
}

/// Intermediate images, kept when `dump_stages` is set. Stages before the
/// entry point of a partial run are absent.
#[derive(Debug, Clone)]
pub struct StageImages {
    pub gray: Option<GrayImage>,
    pub sharp: Option<GrayImage>,
    pub sobel: GrayImage,
    pub wire: RasterImage,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub image: RasterImage,
    pub mesh: Triangulation,
    pub stats: RunStats,
    pub stages: Option<StageImages>,
}

fn millis(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

pub fn run_pipeline(img: &RasterImage, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let start = Instant::now();
    cfg.validate()?;
    img.require_pipeline_size().map_err(|e| e.in_stage(Stage::Decode))?;

    let t = Instant::now();
    let gray = to_grayscale(img);
    let gray_ms = millis(t);

    let mut out = run_from_gray(img, &gray, cfg)?;
    out.stats.timings_ms.grayscale = gray_ms;
    out.stats.timings_ms.total = millis(start);
    Ok(out)
}

/// Continues the pipeline from a grayscale image of `original`.
pub fn run_from_gray(
    original: &RasterImage,
    gray: &GrayImage,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    let start = Instant::now();
    cfg.validate()?;
    let t = Instant::now();
    let sharp = sharpen(gray).map_err(|e| e.in_stage(Stage::Sharpen))?;
    let sharpen_ms = millis(t);

    let t = Instant::now();
    let edges = sobel(&sharp).map_err(|e| e.in_stage(Stage::Sobel))?;
    let sobel_ms = millis(t);

    let mut out = run_from_edges(original, &edges, cfg)?;
    let timings = &mut out.stats.timings_ms;
    timings.sharpen = sharpen_ms;
    timings.sobel = sobel_ms;
    timings.total = millis(start);
    if let Some(stages) = out.stages.as_mut() {
        stages.gray = Some(gray.clone());
        stages.sharp = Some(sharp);
    }
    Ok(out)
}

/// Continues the pipeline from a Sobel edge map of `original`.
pub fn run_from_edges(
    original: &RasterImage,
    edges: &EdgeMap,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    let start = Instant::now();
    cfg.validate()?;
    let (w, h) = (original.width(), original.height());
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let selected = threshold_pixels(edges, cfg.threshold).map_err(|e| e.in_stage(Stage::Threshold))?;
    timings.threshold = millis(t);

    let t = Instant::now();
    let sampled = select_vertices(&selected, w, h, cfg)?;
    let points = if cfg.include_frame {
        add_frame_points(&sampled, w, h)
    } else {
        sampled
    };
    timings.sample = millis(t);

    let t = Instant::now();
    let mesh = triangulate(&points).map_err(|e| {
        let e = match e {
            Error::TooFewPoints { available, required, .. } => Error::TooFewPoints {
                available,
                required,
                context: format!(" (threshold {}, density {})", cfg.threshold, cfg.density),
            },
            other => other,
        };
        e.in_stage(Stage::Triangulate)
    })?;
    timings.triangulate = millis(t);

    let t = Instant::now();
    let colors = triangle_colors(&mesh, original);
    timings.color = millis(t);

    let t = Instant::now();
    let image = rasterize(&mesh, &colors, w, h, DEFAULT_BACKGROUND);
    timings.rasterize = millis(t);
    timings.total = millis(start);

    let stages = cfg.dump_stages.then(|| StageImages {
        gray: None,
        sharp: None,
        sobel: edges.to_gray(),
        wire: render_wireframe(&mesh, w, h),
    });
    let stats = RunStats {
        width: w,
        height: h,
        threshold: cfg.threshold,
        density: cfg.density,
        seed: cfg.seed,
        random_points: cfg.random_points,
        include_frame: cfg.include_frame,
        edge_pixel_count: selected.len(),
        sampled_count: points.count(Provenance::Edge) + points.count(Provenance::Random),
        frame_count: points.count(Provenance::Frame),
        vertex_count: mesh.vertices().len(),
        triangle_count: mesh.triangles().len(),
        rng: RNG_ALGORITHM.to_string(),
        timings_ms: timings,
    };
    Ok(PipelineOutput {
        image,
        mesh,
        stats,
        stages,
    })
}

fn select_vertices(
    selected: &crate::filters::ThresholdedPixels,
    w: u32,
    h: u32,
    cfg: &PipelineConfig,
) -> Result<PointSet> {
    let sampler = cfg.sampler();
    let result = match sampler.random_count {
        Some(count) => random_points(w, h, count, cfg.seed),
        None => subsample_uniform(selected, &sampler).map_err(|e| match e {
            Error::TooFewPoints { available, required, .. } => Error::TooFewPoints {
                available,
                required,
                context: format!(
                    " ({} edge pixels at threshold {}, density {})",
                    selected.len(),
                    cfg.threshold,
                    cfg.density
                ),
            },
            other => other,
        }),
    };
    result.map_err(|e| e.in_stage(Stage::Sample))
}

/// Colors and fills an existing mesh over `original`.
pub fn render_mesh(original: &RasterImage, mesh: &Triangulation) -> RasterImage {
    let colors = triangle_colors(mesh, original);
    rasterize(mesh, &colors, original.width(), original.height(), DEFAULT_BACKGROUND)
}

/// One `(threshold, density)` cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub threshold: u32,
    pub density: u32,
    pub stats: Option<RunStats>,
    pub error: Option<String>,
}

/// Flat CSV row for a [`SweepCell`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: u32,
    pub density: u32,
    pub seed: u64,
    pub edge_pixels: Option<usize>,
    pub sampled: Option<usize>,
    pub vertices: Option<usize>,
    pub triangles: Option<usize>,
    pub error: Option<String>,
}

impl SweepCell {
    pub fn row(&self, seed: u64) -> SweepRow {
        let s = self.stats.as_ref();
        SweepRow {
            threshold: self.threshold,
            density: self.density,
            seed,
            edge_pixels: s.map(|s| s.edge_pixel_count),
            sampled: s.map(|s| s.sampled_count),
            vertices: s.map(|s| s.vertex_count),
            triangles: s.map(|s| s.triangle_count),
            error: self.error.clone(),
        }
    }
}

/// Runs every `(t, d)` pair, threshold-major. Failing cells record their
/// error and the sweep carries on.
pub fn sweep(
    img: &RasterImage,
    t_values: &[u32],
    d_values: &[u32],
    base: &PipelineConfig,
) -> Result<Vec<SweepCell>> {
    if t_values.is_empty() || d_values.is_empty() {
        return Err(Error::Parameter("sweep needs at least one threshold and one density".into()));
    }
    img.require_pipeline_size().map_err(|e| e.in_stage(Stage::Decode))?;
    let gray = to_grayscale(img);
    let sharp = sharpen(&gray).map_err(|e| e.in_stage(Stage::Sharpen))?;
    let edges = sobel(&sharp).map_err(|e| e.in_stage(Stage::Sobel))?;

    let grid: Vec<(u32, u32)> = t_values
        .iter()
        .flat_map(|&t| d_values.iter().map(move |&d| (t, d)))
        .collect();
    Ok(grid
        .into_par_iter()
        .map(|(threshold, density)| {
            let cfg = PipelineConfig {
                threshold,
                density,
                dump_stages: false,
                ..base.clone()
            };
            match run_from_edges(img, &edges, &cfg) {
                Ok(out) => SweepCell {
                    threshold,
                    density,
                    stats: Some(out.stats),
                    error: None,
                },
                Err(e) => SweepCell {
                    threshold,
                    density,
                    stats: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Expected vertex count in edge-guided mode.
pub fn expected_vertex_count(edge_pixels: usize, density: u32, frame_added: usize) -> usize {
    sample_size(edge_pixels, density) + frame_added
}

/// Writes `<stem>_gray.png`, `_sharp.png`, `_sobel.png`, `_wire.png`,
/// `_mesh.json` and `_stats.json` into `dir`, for whichever stages the run
/// kept. Returns the paths written.
pub fn write_stage_dumps(dir: &Path, stem: &str, out: &PipelineOutput) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let Some(st) = &out.stages else {
        return Ok(written);
    };
    let mut put = |suffix: &str, bytes: &[u8]| -> Result<()> {
        let path = dir.join(format!("{stem}_{suffix}"));
        std::fs::write(&path, bytes)?;
        written.push(path);
        Ok(())
    };
    if let Some(gray) = &st.gray {
        put("gray.png", &encode_image(&gray.to_raster())?)?;
    }
    if let Some(sharp) = &st.sharp {
        put("sharp.png", &encode_image(&sharp.to_raster())?)?;
    }
    put("sobel.png", &encode_image(&st.sobel.to_raster())?)?;
    put("wire.png", &encode_image(&st.wire)?)?;
    put("mesh.json", out.mesh.to_json().as_bytes())?;
    let stats = serde_json::to_string_pretty(&out.stats).expect("stats serialize");
    put("stats.json", stats.as_bytes())?;
    Ok(written)
}

/// Stage dumps (if kept) plus `<stem>_final.png`, all in `dir`.
pub fn write_outputs(dir: &Path, stem: &str, out: &PipelineOutput) -> Result<Vec<PathBuf>> {
    let mut written = write_stage_dumps(dir, stem, out)?;
    let path = dir.join(format!("{stem}_final.png"));
    std::fs::write(&path, encode_image(&out.image)?)?;
    written.push(path);
    Ok(written)
}

//! Edge-guided low-poly image triangulation.
//!
//! An RGB image is reduced to luma, sharpened with a Laplacian kernel and
//! run through the Sobel operator. Pixels whose gradient magnitude reaches a
//! threshold form the edge set; a uniform random subset of it (one vertex
//! per `density` edge pixels) plus the four canvas corners is Delaunay
//! triangulated, and every triangle is filled with the original color at its
//! centroid.
//!
//! ```no_run
//! use lowpoly::{decode_image, encode_image, run_pipeline, PipelineConfig};
//!
//! let bytes = std::fs::read("photo.png")?;
//! let out = run_pipeline(&decode_image(&bytes)?, &PipelineConfig::default())?;
//! std::fs::write("photo_final.png", encode_image(&out.image)?)?;
//! # Ok::<(), lowpoly::Error>(())
//! ```
//!
//! Everything is deterministic for a given image and config, including
//! across rayon thread counts.

pub mod delaunay;
pub mod error;
pub mod filters;
pub mod pipeline;
pub mod raster;
pub mod render;
pub mod sampling;
#[cfg(feature = "service")]
pub mod service;

pub use delaunay::{
    centroid, in_circumcircle, triangulate, triangulate_vertices, Triangle, Triangulation, Vertex,
};
pub use error::{Error, ErrorKind, Result, Stage};
pub use filters::{
    convolve3x3, convolve3x3_clamped, sharpen, sobel, threshold_pixels, EdgeMap, Kernel3x3,
    SignedGrid, ThresholdedPixels,
};
pub use pipeline::{
    run_from_edges, run_from_gray, run_pipeline, sweep, PipelineConfig, PipelineOutput, RunStats,
    StageImages, SweepCell, SweepRow,
};
pub use raster::{decode_image, encode_image, to_grayscale, GrayImage, PixelCoord, RasterImage, Rgb};
pub use render::{rasterize, render_wireframe, triangle_color, FillRule};
pub use sampling::{
    add_frame_points, random_points, subsample_uniform, PointSet, Provenance, SamplerConfig,
};

//! Vertex selection: uniform sparsification of the edge pixel set, the
//! random-point baseline and canvas corner points.
//!
//! Randomness comes from ChaCha8 seeded through `SeedableRng::seed_from_u64`
//! (PCG32 key expansion). Bounded integers use Lemire's multiply-and-reject
//! method over `next_u64`, and subsets are drawn with a partial Fisher-Yates
//! shuffle, so a given seed selects the same pixels on every platform.

use std::collections::HashSet;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::ThresholdedPixels;
use crate::raster::PixelCoord;

/// Identifier of the sampling generator, recorded in run metadata.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64/lemire/fisher-yates";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Edge,
    Random,
    Frame,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    points: Vec<PixelCoord>,
    provenance: Vec<Provenance>,
    seed: u64,
}

impl PointSet {
    pub fn empty(seed: u64) -> Self {
        PointSet {
            points: Vec::new(),
            provenance: Vec::new(),
            seed,
        }
    }

    /// Builds a set from explicit points. Duplicates are rejected.
    pub fn from_points(points: Vec<PixelCoord>, provenance: Provenance, seed: u64) -> Result<Self> {
        let mut seen = HashSet::with_capacity(points.len());
        if let Some(dup) = points.iter().find(|p| !seen.insert(**p)) {
            return Err(Error::Parameter(format!("duplicate point ({}, {})", dup.x, dup.y)));
        }
        let provenance = vec![provenance; points.len()];
        Ok(PointSet {
            points,
            provenance,
            seed,
        })
    }

    pub fn points(&self) -> &[PixelCoord] {
        &self.points
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn count(&self, tag: Provenance) -> usize {
        self.provenance.iter().filter(|&&p| p == tag).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub density: u32,
    pub seed: u64,
    pub include_frame: bool,
    pub random_count: Option<u32>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            density: 60,
            seed: 0,
            include_frame: true,
            random_count: None,
        }
    }
}

struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform integer in `0..n`.
    fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let mut m = u128::from(self.rng.next_u64()) * u128::from(n);
        if (m as u64) < n {
            let floor = n.wrapping_neg() % n;
            while (m as u64) < floor {
                m = u128::from(self.rng.next_u64()) * u128::from(n);
            }
        }
        (m >> 64) as u64
    }

    /// `k` distinct indices from `0..n`, in draw order.
    fn choose(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx
    }
}

/// Number of vertices kept from `edge_pixels` candidates at density `d`.
pub fn sample_size(edge_pixels: usize, density: u32) -> usize {
    edge_pixels / density.max(1) as usize
}

/// Draws `floor(|S| / d)` edge pixels without replacement, returned in
/// raster order.
///
/// Fails with [`Error::TooFewPoints`] when fewer than three points would be
/// drawn and no frame points are going to be added.
pub fn subsample_uniform(pixels: &ThresholdedPixels, cfg: &SamplerConfig) -> Result<PointSet> {
    if cfg.density == 0 {
        return Err(Error::Parameter("density must be at least 1".into()));
    }
    let k = sample_size(pixels.len(), cfg.density);
    if k < 3 && !cfg.include_frame {
        return Err(Error::TooFewPoints {
            available: k,
            required: 3,
            context: format!(
                " ({} edge pixels at density {})",
                pixels.len(),
                cfg.density
            ),
        });
    }
    let mut points: Vec<PixelCoord> = Sampler::new(cfg.seed)
        .choose(pixels.len(), k)
        .into_iter()
        .map(|i| pixels.coords[i])
        .collect();
    points.sort_unstable();
    Ok(PointSet {
        provenance: vec![Provenance::Edge; points.len()],
        points,
        seed: cfg.seed,
    })
}

/// `count` distinct pixels drawn uniformly over the image, in raster order.
pub fn random_points(width: u32, height: u32, count: u32, seed: u64) -> Result<PointSet> {
    let total = u64::from(width) * u64::from(height);
    if count < 3 {
        return Err(Error::Parameter(format!("random point count {count} is below 3")));
    }
    if u64::from(count) > total {
        return Err(Error::Parameter(format!(
            "random point count {count} exceeds the {total} pixels of a {width}x{height} image"
        )));
    }
    let mut sampler = Sampler::new(seed);
    let mut seen = HashSet::with_capacity(count as usize);
    let mut points = Vec::with_capacity(count as usize);
    while points.len() < count as usize {
        let x = sampler.below(u64::from(width)) as u32;
        let y = sampler.below(u64::from(height)) as u32;
        let p = PixelCoord::new(x, y);
        if seen.insert(p) {
            points.push(p);
        }
    }
    points.sort_unstable();
    Ok(PointSet {
        provenance: vec![Provenance::Random; points.len()],
        points,
        seed,
    })
}

/// Appends the four image corners that are not already present.
pub fn add_frame_points(ps: &PointSet, width: u32, height: u32) -> PointSet {
    let mut out = ps.clone();
    let corners = [
        PixelCoord::new(0, 0),
        PixelCoord::new(width - 1, 0),
        PixelCoord::new(0, height - 1),
        PixelCoord::new(width - 1, height - 1),
    ];
    for c in corners {
        if !out.points.contains(&c) {
            out.points.push(c);
            out.provenance.push(Provenance::Frame);
        }
    }
    out
}

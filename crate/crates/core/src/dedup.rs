//! Near-duplicate removal by descriptor cosine similarity.
//!
//! Items are shuffled with a seed, then scanned in order; an item is dropped
//! when its similarity to any previously *kept* item exceeds the threshold.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{downsample_gray, normalize, Raster};

pub const DEFAULT_THRESHOLD: f64 = 0.8;

#[derive(Debug, Error, PartialEq)]
pub enum DedupError {
    #[error("feature vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("feature vector has zero norm")]
    ZeroNorm,
    #[error("threshold must be a positive number, got {0}")]
    BadThreshold(f64),
}

/// Unit-length descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    /// Normalizes `values` to unit length.
    pub fn new(mut values: Vec<f64>) -> Result<Self, DedupError> {
        if normalize(&mut values) == 0.0 {
            return Err(DedupError::ZeroNorm);
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn cosine_sim(a: &FeatureVector, b: &FeatureVector) -> Result<f64, DedupError> {
    if a.len() != b.len() {
        return Err(DedupError::LengthMismatch(a.len(), b.len()));
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok(dot.clamp(-1.0, 1.0))
}

/// Image descriptor used for similarity.
pub trait Descriptor: Sync {
    fn describe(&self, image: &Raster) -> FeatureVector;
}

/// Plain `grid x grid` luma downsample. Solid images of any shade describe
/// identically under this descriptor.
#[derive(Debug, Clone, Copy)]
pub struct GrayDownsample {
    pub grid: usize,
}

impl Default for GrayDownsample {
    fn default() -> Self {
        Self { grid: 32 }
    }
}

impl Descriptor for GrayDownsample {
    fn describe(&self, image: &Raster) -> FeatureVector {
        let v = downsample_gray(image, self.grid.max(2)).expect("grid is at least 2");
        FeatureVector::new(v).unwrap_or_else(|_| uniform(self.grid.max(2).pow(2)))
    }
}

fn uniform(n: usize) -> FeatureVector {
    FeatureVector(vec![1.0 / (n as f64).sqrt(); n])
}

/// Default descriptor: the mean-centered luma layout from [`downsample_gray`]
/// concatenated with a luma histogram.
///
/// Centering keeps screenshots that merely share a background from looking
/// alike; the histogram part separates flat images of different shades. The
/// two halves are weighted so that cosine similarity is
/// `layout_weight * layout_sim + (1 - layout_weight) * histogram_sim`.
#[derive(Debug, Clone, Copy)]
pub struct LayoutHistogram {
    pub grid: usize,
    pub bins: usize,
    pub layout_weight: f64,
}

impl Default for LayoutHistogram {
    fn default() -> Self {
        Self {
            grid: 32,
            bins: 16,
            layout_weight: 0.7,
        }
    }
}

impl Descriptor for LayoutHistogram {
    fn describe(&self, image: &Raster) -> FeatureVector {
        let mut layout = downsample_gray(image, self.grid.max(2)).expect("grid is at least 2");
        let mean = layout.iter().sum::<f64>() / layout.len() as f64;
        layout.iter_mut().for_each(|x| *x -= mean);
        let layout_norm = normalize(&mut layout);

        let bins = self.bins.max(1);
        let mut hist = vec![0.0; bins];
        for p in image.as_image().pixels() {
            let luma = 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]);
            hist[((luma * bins as f64 / 256.0) as usize).min(bins - 1)] += 1.0;
        }
        normalize(&mut hist);

        // flat images have no layout signal
        let (wl, wh) = if layout_norm > 1e-9 {
            (self.layout_weight.sqrt(), (1.0 - self.layout_weight).sqrt())
        } else {
            layout.iter_mut().for_each(|x| *x = 0.0);
            (0.0, 1.0)
        };
        let values = layout.iter().map(|x| x * wl).chain(hist.iter().map(|x| x * wh)).collect();
        FeatureVector::new(values).expect("histogram is never empty")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removed {
    pub id: String,
    /// Kept item that blocked this one.
    pub blocked_by: String,
    pub similarity: f64,
}

/// Dedup outcome; serialized as the dedup report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DedupReport {
    pub threshold: f64,
    pub seed: u64,
    /// Kept ids in scan order.
    pub kept: Vec<String>,
    pub removed: Vec<Removed>,
}

/// Incremental scanner holding the kept set.
#[derive(Debug, Clone)]
pub struct Deduper {
    threshold: f64,
    kept: Vec<(String, FeatureVector)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Keep,
    Remove { blocked_by: String, similarity: f64 },
}

impl Deduper {
    pub fn new(threshold: f64) -> Result<Self, DedupError> {
        if threshold.is_nan() || threshold <= 0.0 {
            return Err(DedupError::BadThreshold(threshold));
        }
        Ok(Self {
            threshold,
            kept: Vec::new(),
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn kept(&self) -> impl Iterator<Item = &str> {
        self.kept.iter().map(|(id, _)| id.as_str())
    }

    /// Keeps `id` unless it is more similar than the threshold to a kept item.
    /// The first blocking kept item (in scan order) is reported.
    pub fn offer(&mut self, id: impl Into<String>, v: FeatureVector) -> Result<Decision, DedupError> {
        for (kid, kv) in &self.kept {
            let sim = cosine_sim(&v, kv)?;
            if sim > self.threshold {
                return Ok(Decision::Remove {
                    blocked_by: kid.clone(),
                    similarity: sim,
                });
            }
        }
        self.kept.push((id.into(), v));
        Ok(Decision::Keep)
    }
}

/// Shuffles `items` by `seed` and scans them.
pub fn filter_duplicate_vectors(
    mut items: Vec<(String, FeatureVector)>,
    threshold: f64,
    seed: u64,
) -> Result<DedupReport, DedupError> {
    let mut deduper = Deduper::new(threshold)?;
    items.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut report = DedupReport {
        threshold,
        seed,
        ..DedupReport::default()
    };
    for (id, v) in items {
        match deduper.offer(id.clone(), v)? {
            Decision::Keep => report.kept.push(id),
            Decision::Remove {
                blocked_by,
                similarity,
            } => report.removed.push(Removed {
                id,
                blocked_by,
                similarity,
            }),
        }
    }
    Ok(report)
}

/// Describes every raster (in parallel) and runs the seeded scan.
pub fn filter_duplicates<D: Descriptor>(
    items: &[(String, Raster)],
    threshold: f64,
    seed: u64,
    descriptor: &D,
) -> Result<DedupReport, DedupError> {
    let vectors = items
        .par_iter()
        .map(|(id, r)| (id.clone(), descriptor.describe(r)))
        .collect();
    filter_duplicate_vectors(vectors, threshold, seed)
}

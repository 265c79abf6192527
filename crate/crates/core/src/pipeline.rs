//! Dataset generation: inject, dedup, pair with clean sources, split and
//! write annotations.
//!
//! Output directory layout:
//!
//! ```text
//! out/
//!   images/<sample_id>.png        buggy screenshots and their clean pairs
//!   annotations/<sample_id>.xml   VOC annotation for each buggy screenshot
//!   coco.json                     all images, COCO format
//!   coco_{train,val,test}.json    per-split COCO files
//!   dedup_report.json
//!   manifest.json
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotations::{write_file, AnnotationError, CocoDataset, VocAnnotation, VocObject};
use crate::dedup::{DedupError, DedupReport, Decision, Deduper, Descriptor, LayoutHistogram, Removed, DEFAULT_THRESHOLD};
use crate::geometry::Bounds;
use crate::hierarchy::{parse_hierarchy_with, ParseOptions, ViewTree};
use crate::icons::{builtin_icons, load_icons, IconAsset, IconError};
use crate::imaging::{ImagingError, Raster};
use crate::inject::{eligible_targets, inject, InjectConfig, InjectError, IssueCategory, Provenance};
use crate::metrics::Label;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("corpus {0} has no image/hierarchy pairs")]
    EmptyCorpus(String),
    #[error("{path}: {source}")]
    Image { path: String, source: ImagingError },
    #[error(transparent)]
    Icons(#[from] IconError),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error(transparent)]
    Dedup(#[from] DedupError),
    #[error(transparent)]
    Inject(#[from] InjectError),
    #[error("invalid split ratios {0:?}")]
    BadRatios(String),
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("corpus exhausted: short by {missing:?}; partial manifest written to {manifest_path}")]
    Shortfall {
        missing: BTreeMap<IssueCategory, usize>,
        manifest_path: String,
        manifest: Box<DatasetManifest>,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable hash of a sequence of words.
pub fn mix_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5EED_u64, |acc, p| mix64(acc ^ mix64(*p)))
}

const STREAM_SOURCES: u64 = 1;
const STREAM_SPLIT: u64 = 2;
const STREAM_SAMPLE: u64 = 3;

/// Seed used to shuffle pairs into splits.
pub fn split_seed(master: u64) -> u64 {
    mix_seed(&[master, STREAM_SPLIT])
}

/// Seed of the `index`-th injection attempt for `category`.
pub fn sample_seed(master: u64, category: IssueCategory, index: u64) -> u64 {
    mix_seed(&[master, STREAM_SAMPLE, u64::from(category.coco_id()), index])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

/// `train:test:val` weights, written like `8:1:1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SplitRatios {
    pub train: u32,
    pub test: u32,
    pub val: u32,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 8,
            test: 1,
            val: 1,
        }
    }
}

impl SplitRatios {
    pub fn total(&self) -> u32 {
        self.train + self.test + self.val
    }

    /// `(train, test, val)` sizes for `n` items; remainders go to train.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let total = self.total() as usize;
        let test = n * self.test as usize / total;
        let val = n * self.val as usize / total;
        (n - test - val, test, val)
    }
}

impl FromStr for SplitRatios {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<u32> = s
            .split(':')
            .map(|p| p.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| PipelineError::BadRatios(s.to_string()))?;
        match parts.as_slice() {
            [train, test, val] if train + test + val > 0 => Ok(Self {
                train: *train,
                test: *test,
                val: *val,
            }),
            _ => Err(PipelineError::BadRatios(s.to_string())),
        }
    }
}

impl TryFrom<String> for SplitRatios {
    type Error = PipelineError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SplitRatios> for String {
    fn from(r: SplitRatios) -> Self {
        r.to_string()
    }
}

impl fmt::Display for SplitRatios {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.train, self.test, self.val)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub sample_id: String,
    /// Relative to the manifest's directory.
    pub image_path: String,
    pub annotation_path: Option<String>,
    /// `None` for clean samples.
    pub category: Option<IssueCategory>,
    pub label: Label,
    pub split: Split,
    /// The other half of the buggy/clean pair.
    pub pair_id: String,
    pub source_id: String,
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    pub bbox: Option<Bounds>,
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub requested: usize,
    pub generated: usize,
    pub duplicates_removed: usize,
    pub failed_attempts: usize,
    pub kept: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub master_seed: u64,
    pub dedup_threshold: f64,
    pub ratios: SplitRatios,
    pub split_seed: u64,
    pub stats: BTreeMap<IssueCategory, CategoryStats>,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Manifest(e.to_string()))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), PipelineError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        Ok(write_file(path.as_ref(), text)?)
    }

    pub fn positives(&self) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(|e| e.label == Label::Buggy)
    }
}

/// One screenshot with its hierarchy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub id: String,
    pub image_path: PathBuf,
    pub hierarchy_path: PathBuf,
}

/// Pairs `*.png|*.jpg|*.jpeg` with a `*.json` of the same stem, sorted by id.
pub fn scan_corpus(dir: impl AsRef<Path>) -> Result<Vec<CorpusEntry>, PipelineError> {
    let dir = dir.as_ref();
    let mut images: BTreeMap<String, PathBuf> = BTreeMap::new();
    let mut jsons: HashSet<String> = HashSet::new();
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let (Some(stem), Some(ext)) = (path.file_stem(), path.extension()) else {
            continue;
        };
        let stem = stem.to_string_lossy().into_owned();
        match ext.to_string_lossy().to_ascii_lowercase().as_str() {
            "png" | "jpg" | "jpeg" => {
                // prefer png when both exist
                let keep_existing = images
                    .get(&stem)
                    .is_some_and(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")));
                if !keep_existing {
                    images.insert(stem, path);
                }
            }
            "json" => {
                jsons.insert(stem);
            }
            _ => {}
        }
    }
    let entries: Vec<_> = images
        .into_iter()
        .filter(|(stem, _)| jsons.contains(stem))
        .map(|(id, image_path)| CorpusEntry {
            hierarchy_path: dir.join(format!("{id}.json")),
            id,
            image_path,
        })
        .collect();
    if entries.is_empty() {
        return Err(PipelineError::EmptyCorpus(dir.display().to_string()));
    }
    Ok(entries)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub corpus: PathBuf,
    pub out: PathBuf,
    /// Buggy samples per category after dedup.
    pub count: usize,
    pub categories: Vec<IssueCategory>,
    pub seed: u64,
    /// Directory of icon PNGs; the bundled set when `None`.
    pub icons: Option<PathBuf>,
    pub dedup_threshold: f64,
    pub ratios: SplitRatios,
    /// Coordinate space of the hierarchies, when it differs from the screenshots.
    pub hierarchy_dims: Option<(u32, u32)>,
    pub inject: InjectConfig,
}

impl GenerateConfig {
    pub fn new(corpus: impl Into<PathBuf>, out: impl Into<PathBuf>, count: usize, seed: u64) -> Self {
        Self {
            corpus: corpus.into(),
            out: out.into(),
            count,
            categories: IssueCategory::ALL.to_vec(),
            seed,
            icons: None,
            dedup_threshold: DEFAULT_THRESHOLD,
            ratios: SplitRatios::default(),
            hierarchy_dims: None,
            inject: InjectConfig::default(),
        }
    }
}

struct LoadedSource {
    tree: ViewTree,
}

struct Attempt {
    category: IssueCategory,
    index: u64,
    seed: u64,
    source: usize,
}

struct Positive {
    category: IssueCategory,
    seed: u64,
    source: usize,
    bbox: Bounds,
    dims: (u32, u32),
    provenance: Provenance,
}

const CHUNK: usize = 32;

/// Runs the whole generation pipeline and writes the dataset to `config.out`.
///
/// Every source screenshot is used for at most one buggy sample. Sources are
/// visited in a seeded random order, which also serves as the dedup scan
/// order. Samples removed as duplicates are replaced from unused sources until
/// each category reaches `count` or the corpus runs out, in which case the
/// partial dataset is still written and [`PipelineError::Shortfall`] returned.
pub fn generate_dataset(config: &GenerateConfig) -> Result<DatasetManifest, PipelineError> {
    let corpus = scan_corpus(&config.corpus)?;
    let icons: Vec<IconAsset> = match &config.icons {
        Some(dir) => load_icons(dir)?,
        None => builtin_icons(),
    };
    let images_dir = config.out.join("images");
    let ann_dir = config.out.join("annotations");
    for d in [&config.out, &images_dir, &ann_dir] {
        std::fs::create_dir_all(d).map_err(io_err(d))?;
    }

    let opts = ParseOptions {
        source_dims: config.hierarchy_dims,
    };
    // hierarchies are parsed up front, screenshots decoded on demand
    let sources: Vec<Option<LoadedSource>> = corpus
        .par_iter()
        .map(|c| {
            let dims = image::image_dimensions(&c.image_path).ok()?;
            let text = std::fs::read_to_string(&c.hierarchy_path).ok()?;
            match parse_hierarchy_with(&text, dims, &opts) {
                Ok(tree) => Some(LoadedSource { tree }),
                Err(e) => {
                    log::warn!("skipping {}: {e}", c.id);
                    None
                }
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(mix_seed(&[config.seed, STREAM_SOURCES])));

    let mut categories = config.categories.clone();
    categories.sort();
    categories.dedup();

    let mut used = vec![false; corpus.len()];
    let mut ineligible: HashSet<(usize, IssueCategory)> = HashSet::new();
    let mut next_index: BTreeMap<IssueCategory, u64> = categories.iter().map(|c| (*c, 0)).collect();
    let mut kept: BTreeMap<IssueCategory, Vec<Positive>> = categories.iter().map(|c| (*c, Vec::new())).collect();
    let mut stats: BTreeMap<IssueCategory, CategoryStats> = categories
        .iter()
        .map(|c| {
            (
                *c,
                CategoryStats {
                    requested: config.count,
                    ..CategoryStats::default()
                },
            )
        })
        .collect();
    let mut exhausted: HashSet<IssueCategory> = HashSet::new();
    let mut deduper = Deduper::new(config.dedup_threshold)?;
    let mut dedup_report = DedupReport {
        threshold: config.dedup_threshold,
        seed: config.seed,
        ..DedupReport::default()
    };
    let descriptor = LayoutHistogram::default();

    loop {
        // plan a chunk of attempts, round-robin over categories still short
        let mut attempts = Vec::new();
        let mut reserved: HashSet<usize> = HashSet::new();
        let mut pending: BTreeMap<IssueCategory, usize> = BTreeMap::new();
        'plan: while attempts.len() < CHUNK {
            let mut progressed = false;
            for &cat in &categories {
                let have = kept[&cat].len() + pending.get(&cat).copied().unwrap_or(0);
                if have >= config.count || exhausted.contains(&cat) {
                    continue;
                }
                let pick = order.iter().copied().find(|&s| {
                    !used[s]
                        && !reserved.contains(&s)
                        && !ineligible.contains(&(s, cat))
                        && sources[s]
                            .as_ref()
                            .is_some_and(|src| !eligible_targets(&src.tree, cat, &config.inject).is_empty())
                });
                match pick {
                    Some(s) => {
                        reserved.insert(s);
                        let index = next_index[&cat];
                        *next_index.get_mut(&cat).expect("category") += 1;
                        attempts.push(Attempt {
                            category: cat,
                            index,
                            seed: sample_seed(config.seed, cat, index),
                            source: s,
                        });
                        *pending.entry(cat).or_default() += 1;
                        progressed = true;
                        if attempts.len() >= CHUNK {
                            break 'plan;
                        }
                    }
                    None => {
                        exhausted.insert(cat);
                    }
                }
            }
            if !progressed {
                break;
            }
        }
        if attempts.is_empty() {
            break;
        }

        let results: Vec<Result<(crate::inject::GeneratedSample, crate::dedup::FeatureVector), PipelineError>> = attempts
            .par_iter()
            .map(|a| {
                let entry = &corpus[a.source];
                let scr = Raster::load(&entry.image_path).map_err(|source| PipelineError::Image {
                    path: entry.image_path.display().to_string(),
                    source,
                })?;
                let tree = &sources[a.source].as_ref().expect("planned sources are loaded").tree;
                let mut sample = inject(&scr, tree, a.category, a.seed, &icons, &config.inject)?;
                sample.provenance.source_id = entry.id.clone();
                let v = descriptor.describe(&sample.image);
                Ok((sample, v))
            })
            .collect();

        let mut to_write = Vec::new();
        for (a, res) in attempts.iter().zip(results) {
            let st = stats.get_mut(&a.category).expect("category");
            match res {
                Ok((sample, v)) => {
                    used[a.source] = true;
                    st.generated += 1;
                    let tentative = format!("{}#{}", a.category.name(), a.index);
                    match deduper.offer(tentative.clone(), v)? {
                        Decision::Keep if kept[&a.category].len() < config.count => {
                            let k = kept.get_mut(&a.category).expect("category");
                            let id = format!("{}_{:05}", a.category.name(), k.len());
                            dedup_report.kept.push(tentative);
                            to_write.push((id, sample.image.clone()));
                            k.push(Positive {
                                category: a.category,
                                seed: a.seed,
                                source: a.source,
                                bbox: sample.bbox,
                                dims: sample.image.dims(),
                                provenance: sample.provenance,
                            });
                        }
                        Decision::Keep => {}
                        Decision::Remove {
                            blocked_by,
                            similarity,
                        } => {
                            st.duplicates_removed += 1;
                            dedup_report.removed.push(Removed {
                                id: tentative,
                                blocked_by,
                                similarity,
                            });
                        }
                    }
                }
                Err(PipelineError::Inject(e)) => {
                    log::debug!("attempt {} on {} failed: {e}", a.index, corpus[a.source].id);
                    st.failed_attempts += 1;
                    ineligible.insert((a.source, a.category));
                }
                Err(e) => return Err(e),
            }
        }
        to_write
            .par_iter()
            .map(|(id, img)| {
                let path = images_dir.join(format!("{id}.png"));
                img.save_png(&path).map_err(|source| PipelineError::Image {
                    path: path.display().to_string(),
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
    }

    // clean pairs: the unmodified sources, re-encoded as PNG
    let mut entries = Vec::new();
    let mut clean_jobs = Vec::new();
    for (cat, positives) in &kept {
        stats.get_mut(cat).expect("category").kept = positives.len();
        for (k, p) in positives.iter().enumerate() {
            let id = format!("{}_{:05}", cat.name(), k);
            let clean_id = format!("{id}_clean");
            let src = &corpus[p.source];
            clean_jobs.push((clean_id.clone(), src.image_path.clone()));
            entries.push(ManifestEntry {
                sample_id: id.clone(),
                image_path: format!("images/{id}.png"),
                annotation_path: Some(format!("annotations/{id}.xml")),
                category: Some(p.category),
                label: Label::Buggy,
                split: Split::Train,
                pair_id: clean_id.clone(),
                source_id: src.id.clone(),
                seed: p.seed,
                width: p.dims.0,
                height: p.dims.1,
                bbox: Some(p.bbox),
                provenance: Some(p.provenance.clone()),
            });
            entries.push(ManifestEntry {
                sample_id: clean_id.clone(),
                image_path: format!("images/{clean_id}.png"),
                annotation_path: None,
                category: None,
                label: Label::Clean,
                split: Split::Train,
                pair_id: id,
                source_id: src.id.clone(),
                seed: p.seed,
                width: p.dims.0,
                height: p.dims.1,
                bbox: None,
                provenance: None,
            });
        }
    }
    clean_jobs
        .par_iter()
        .map(|(id, src)| {
            let path = images_dir.join(format!("{id}.png"));
            let wrap = |p: &Path| {
                let p = p.display().to_string();
                move |source| PipelineError::Image { path: p, source }
            };
            Raster::load(src)
                .map_err(wrap(src))?
                .save_png(&path)
                .map_err(wrap(&path))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let split_seed = split_seed(config.seed);
    let manifest = DatasetManifest {
        master_seed: config.seed,
        dedup_threshold: config.dedup_threshold,
        ratios: config.ratios,
        split_seed,
        stats,
        entries,
    };
    let manifest = split_dataset(manifest, config.ratios, split_seed)?;
    write_annotations(&manifest, &config.out)?;
    write_file(
        &config.out.join("dedup_report.json"),
        serde_json::to_string_pretty(&dedup_report).expect("report serializes") + "\n",
    )?;
    let manifest_path = config.out.join("manifest.json");
    manifest.write(&manifest_path)?;

    let missing: BTreeMap<IssueCategory, usize> = kept
        .iter()
        .filter(|(_, v)| v.len() < config.count)
        .map(|(c, v)| (*c, config.count - v.len()))
        .collect();
    if !missing.is_empty() {
        return Err(PipelineError::Shortfall {
            missing,
            manifest_path: manifest_path.display().to_string(),
            manifest: Box::new(manifest),
        });
    }
    Ok(manifest)
}

/// Assigns splits per category, keeping each buggy sample and its clean
/// pair together. Categories with fewer than ten pairs go entirely to train.
pub fn split_dataset(
    mut manifest: DatasetManifest,
    ratios: SplitRatios,
    seed: u64,
) -> Result<DatasetManifest, PipelineError> {
    if ratios.total() == 0 {
        return Err(PipelineError::BadRatios(ratios.to_string()));
    }
    let index: BTreeMap<String, usize> = manifest
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.sample_id.clone(), i))
        .collect();
    let mut by_cat: BTreeMap<IssueCategory, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, e) in manifest.entries.iter().enumerate() {
        if e.label != Label::Buggy {
            continue;
        }
        let cat = e
            .category
            .ok_or_else(|| PipelineError::Manifest(format!("{} is buggy without a category", e.sample_id)))?;
        let &j = index
            .get(&e.pair_id)
            .ok_or_else(|| PipelineError::Manifest(format!("{} has no pair {}", e.sample_id, e.pair_id)))?;
        by_cat.entry(cat).or_default().push((i, j));
    }
    for (cat, mut pairs) in by_cat {
        let (train, test, val) = if pairs.len() < 10 {
            log::warn!("{cat}: only {} pair(s), all assigned to train", pairs.len());
            (pairs.len(), 0, 0)
        } else {
            ratios.sizes(pairs.len())
        };
        pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(mix_seed(&[seed, u64::from(cat.coco_id())])));
        for (k, (i, j)) in pairs.into_iter().enumerate() {
            let split = if k < test {
                Split::Test
            } else if k < test + val {
                Split::Val
            } else {
                Split::Train
            };
            debug_assert!(k < train + test + val);
            manifest.entries[i].split = split;
            manifest.entries[j].split = split;
        }
    }
    manifest.ratios = ratios;
    manifest.split_seed = seed;
    Ok(manifest)
}

/// Writes VOC XML for every buggy sample plus dataset-level and per-split
/// COCO files. Returns the paths written.
pub fn write_annotations(manifest: &DatasetManifest, out: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut written = Vec::new();
    for e in manifest.positives() {
        let (Some(rel), Some(cat), Some(b)) = (&e.annotation_path, e.category, e.bbox) else {
            return Err(PipelineError::Manifest(format!("{} lacks annotation data", e.sample_id)));
        };
        let path = out.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        let voc = VocAnnotation {
            folder: "images".into(),
            filename: Path::new(&e.image_path)
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default(),
            width: e.width,
            height: e.height,
            objects: vec![VocObject {
                name: cat.name().into(),
                bndbox: b,
            }],
        };
        write_file(&path, voc.to_xml())?;
        written.push(path);
    }

    let coco = |filter: &dyn Fn(&ManifestEntry) -> bool| {
        let mut ds = CocoDataset::new();
        for e in manifest.entries.iter().filter(|e| filter(e)) {
            let boxes: Vec<_> = e.category.zip(e.bbox).into_iter().collect();
            ds.push_image(&e.image_path, (e.width, e.height), &boxes);
        }
        ds
    };
    let all = out.join("coco.json");
    coco(&|_| true).write(&all)?;
    written.push(all);
    for split in Split::ALL {
        let path = out.join(format!("coco_{}.json", split.name()));
        coco(&|e| e.split == split).write(&path)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryAudit {
    pub buggy: usize,
    pub clean: usize,
    /// Pair counts per split.
    pub splits: BTreeMap<Split, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ManifestAudit {
    pub entries: usize,
    pub per_category: BTreeMap<IssueCategory, CategoryAudit>,
    pub problems: Vec<String>,
}

impl ManifestAudit {
    pub fn is_clean(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Checks the manifest invariants: unique ids, 1:1 pairing within a
/// category, pairs sharing a split, one box per buggy sample, and (with
/// `root`) that every referenced file exists and every VOC file holds exactly
/// one object matching the manifest box.
pub fn audit_manifest(manifest: &DatasetManifest, root: Option<&Path>) -> ManifestAudit {
    let mut audit = ManifestAudit {
        entries: manifest.entries.len(),
        ..ManifestAudit::default()
    };
    let by_id: BTreeMap<&str, &ManifestEntry> =
        manifest.entries.iter().map(|e| (e.sample_id.as_str(), e)).collect();
    if by_id.len() != manifest.entries.len() {
        audit.problems.push("duplicate sample ids".into());
    }
    for e in &manifest.entries {
        let pair = by_id.get(e.pair_id.as_str());
        match (e.label, pair) {
            (_, None) => audit.problems.push(format!("{}: pair {} missing", e.sample_id, e.pair_id)),
            (_, Some(p)) if p.pair_id != e.sample_id || p.label == e.label => {
                audit.problems.push(format!("{}: inconsistent pair {}", e.sample_id, e.pair_id))
            }
            (_, Some(p)) if p.split != e.split => {
                audit.problems.push(format!("{}: pair {} in another split", e.sample_id, e.pair_id))
            }
            (Label::Buggy, Some(_)) => {
                let Some(cat) = e.category else {
                    audit.problems.push(format!("{}: buggy without category", e.sample_id));
                    continue;
                };
                let a = audit.per_category.entry(cat).or_default();
                a.buggy += 1;
                a.clean += 1;
                *a.splits.entry(e.split).or_default() += 1;
                match e.bbox {
                    Some(b) if b.area() > 0 && b.within_image(e.width, e.height) => {}
                    _ => audit.problems.push(format!("{}: missing or invalid bbox", e.sample_id)),
                }
                if e.annotation_path.is_none() {
                    audit.problems.push(format!("{}: no annotation", e.sample_id));
                }
            }
            (Label::Clean, Some(_)) => {
                if e.category.is_some() || e.bbox.is_some() || e.annotation_path.is_some() {
                    audit.problems.push(format!("{}: clean sample carries a label", e.sample_id));
                }
            }
        }
    }
    let counts: Vec<usize> = audit.per_category.values().map(|a| a.buggy).collect();
    if counts.windows(2).any(|w| w[0] != w[1]) {
        audit.problems.push(format!("categories unbalanced: {counts:?}"));
    }
    if let Some(root) = root {
        for e in &manifest.entries {
            if !root.join(&e.image_path).is_file() {
                audit.problems.push(format!("{}: image {} missing", e.sample_id, e.image_path));
            }
            if let Some(rel) = &e.annotation_path {
                match VocAnnotation::read(root.join(rel)) {
                    Ok(voc) => {
                        let ok = voc.objects.len() == 1
                            && Some(voc.objects[0].bndbox) == e.bbox
                            && e.category.is_some_and(|c| c.name() == voc.objects[0].name);
                        if !ok {
                            audit.problems.push(format!("{}: annotation disagrees with manifest", e.sample_id));
                        }
                    }
                    Err(err) => audit.problems.push(format!("{}: {err}", e.sample_id)),
                }
            }
        }
    }
    audit
}

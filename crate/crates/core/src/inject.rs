//! Display-issue injection.
//!
//! Given a clean screenshot and its view hierarchy, [`inject`] picks an
//! eligible component and applies one of four rewrite rules, returning the
//! buggy screenshot together with its ground-truth box:
//!
//! * component occlusion: a block in the component's corner color covers the
//!   upper (`rand >= 0`) or lower (`rand < 0`) `|rand|` fraction of it;
//!   the box is the whole component.
//! * text overlap: a copy of the text is drawn shifted to `x2 - xrand`; the
//!   box is the overlap between the original text region and the copy.
//! * missing image: the image is replaced by its mean color with a
//!   broken-image icon centered on it; the box is the whole component.
//! * null value: the text is replaced by the literal `null`; the box is the
//!   rendered `null`.
//!
//! Text regions are approximated by node bounds since hierarchies carry no
//! glyph geometry. All randomness comes from a ChaCha8 stream seeded with the
//! sample seed, so `(inputs, seed)` fully determine the output bytes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{get_overlap, Bounds};
use crate::hierarchy::{collect_targets, ComponentKind, TargetComponent, TargetConfig, ViewTree};
use crate::icons::IconAsset;
use crate::imaging::{
    corner_avg_color, draw_text_clipped, fit_within, floor_px, measure_text, overlay_rgba, paste_block,
    region_mean_color, Color, ImagingError, Raster, TextStyle, MIN_FONT_PX,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueCategory {
    ComponentOcclusion,
    TextOverlap,
    MissingImage,
    NullValue,
}

impl IssueCategory {
    pub const ALL: [IssueCategory; 4] = [
        IssueCategory::ComponentOcclusion,
        IssueCategory::TextOverlap,
        IssueCategory::MissingImage,
        IssueCategory::NullValue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IssueCategory::ComponentOcclusion => "component_occlusion",
            IssueCategory::TextOverlap => "text_overlap",
            IssueCategory::MissingImage => "missing_image",
            IssueCategory::NullValue => "null_value",
        }
    }

    /// Fixed COCO category id (1-based).
    pub fn coco_id(self) -> u32 {
        match self {
            IssueCategory::ComponentOcclusion => 1,
            IssueCategory::TextOverlap => 2,
            IssueCategory::MissingImage => 3,
            IssueCategory::NullValue => 4,
        }
    }

    pub fn from_coco_id(id: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.coco_id() == id)
    }

    /// Component kinds a category may be injected into.
    pub fn eligible_kinds(self) -> BTreeSet<ComponentKind> {
        match self {
            IssueCategory::ComponentOcclusion => ComponentKind::ALL.into_iter().collect(),
            IssueCategory::MissingImage => [ComponentKind::ImageView].into_iter().collect(),
            IssueCategory::TextOverlap | IssueCategory::NullValue => [ComponentKind::TextView].into_iter().collect(),
        }
    }
}

impl fmt::Display for IssueCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for IssueCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Self::ALL
            .into_iter()
            .find(|c| c.name() == norm)
            .ok_or_else(|| format!("unknown issue category {s:?}"))
    }
}

#[derive(Debug, Error)]
pub enum InjectError {
    #[error("no eligible component for {0}")]
    NoTarget(IssueCategory),
    #[error("degenerate draw: {0}")]
    DegenerateDraw(String),
    #[error("missing-image injection needs at least one icon")]
    NoIcons,
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}

/// Fonts offered for the copied text.
pub const FONT_COLORS: [Color; 3] = [Color::BLACK, Color::GRAY, Color::WHITE];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IconAnchor {
    /// Icon centered on the component center.
    Center,
    /// Icon top-left corner on the component center.
    TopLeft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InjectConfig {
    /// Occlusion draws with `|rand|` below this are redrawn. 0 disables the floor.
    pub min_occlusion_frac: f64,
    /// Text-overlap draws whose overlap covers less than this fraction of the
    /// copy are redrawn.
    pub min_overlap_frac: f64,
    pub max_resample: u32,
    /// Side of the square sampled at each top corner for the block color.
    pub corner_window: u32,
    pub icon_anchor: IconAnchor,
    /// Icons larger than this fraction of the component's shorter side are scaled down.
    pub icon_max_frac: f64,
    /// Font size as a fraction of the text region height.
    pub font_scale: f64,
    pub targets: TargetConfig,
}

impl Default for InjectConfig {
    fn default() -> Self {
        Self {
            min_occlusion_frac: 0.1,
            min_overlap_frac: 0.1,
            max_resample: 16,
            corner_window: 1,
            icon_anchor: IconAnchor::Center,
            icon_max_frac: 0.5,
            font_scale: 0.75,
            targets: TargetConfig::default(),
        }
    }
}

impl InjectConfig {
    /// Unclamped font size for a text region of the given height.
    pub fn raw_font_size(&self, region_height: i64) -> i64 {
        floor_px(self.font_scale * region_height as f64)
    }

    pub fn text_style(&self, region_height: i64, color: Color) -> TextStyle {
        TextStyle::new(self.raw_font_size(region_height).max(0) as u32, color)
    }
}

/// Random choices behind one injection, recorded verbatim in provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectionDraw {
    /// Occlusion fraction in `[-1, 1)`; the sign picks upper or lower part.
    pub rand: f64,
    /// Horizontal text shift in `[-0.5 w, 0.5 w)`.
    pub xrand: f64,
    pub icon_choice: usize,
    pub font_color_choice: usize,
    pub target_choice: usize,
}

impl InjectionDraw {
    fn sample(rng: &mut ChaCha8Rng, target: &TargetComponent, target_choice: usize, n_icons: usize) -> Self {
        let half_w = 0.5 * target.bounds.width() as f64;
        Self {
            rand: rng.gen_range(-1.0..1.0),
            xrand: if half_w > 0.0 { rng.gen_range(-half_w..half_w) } else { 0.0 },
            icon_choice: rng.gen_range(0..n_icons.max(1)),
            font_color_choice: rng.gen_range(0..FONT_COLORS.len()),
            target_choice,
        }
    }
}

/// Result of applying one rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Injection {
    pub image: Raster,
    pub bbox: Bounds,
    pub icon_id: Option<String>,
    pub font_size: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_id: String,
    pub seed: u64,
    pub draw: InjectionDraw,
    pub target_bounds: Bounds,
    pub target_kind: ComponentKind,
    pub target_path: String,
    /// Number of draws made, including the accepted one.
    pub attempts: u32,
    pub icon_id: Option<String>,
    pub font_size: Option<u32>,
    /// Text regions are node bounds, not glyph bounds.
    pub text_region_from_node_bounds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSample {
    pub image: Raster,
    pub category: IssueCategory,
    pub bbox: Bounds,
    pub provenance: Provenance,
}

/// Components [`inject`] may choose from for `category`.
pub fn eligible_targets(tree: &ViewTree, category: IssueCategory, config: &InjectConfig) -> Vec<TargetComponent> {
    let mut targets = collect_targets(tree, &category.eligible_kinds(), &config.targets);
    if category == IssueCategory::TextOverlap {
        targets.retain(|t| t.text.as_deref().is_some_and(|s| !s.trim().is_empty()));
    }
    targets
}

/// Injects one issue of `category` into `scr`.
///
/// The caller fills in `provenance.source_id`.
pub fn inject(
    scr: &Raster,
    tree: &ViewTree,
    category: IssueCategory,
    seed: u64,
    icons: &[IconAsset],
    config: &InjectConfig,
) -> Result<GeneratedSample, InjectError> {
    if category == IssueCategory::MissingImage && icons.is_empty() {
        return Err(InjectError::NoIcons);
    }
    let targets = eligible_targets(tree, category, config);
    if targets.is_empty() {
        return Err(InjectError::NoTarget(category));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target_choice = rng.gen_range(0..targets.len());
    let target = &targets[target_choice];

    let mut last = String::from("no draws");
    for attempt in 1..=config.max_resample.max(1) {
        let draw = InjectionDraw::sample(&mut rng, target, target_choice, icons.len());
        let outcome = match category {
            IssueCategory::ComponentOcclusion => inject_occlusion(scr, target, &draw, config),
            IssueCategory::TextOverlap => inject_text_overlap(scr, target, &draw, config),
            IssueCategory::MissingImage => inject_missing_image(scr, target, &draw, icons, config),
            IssueCategory::NullValue => inject_null_value(scr, target, &draw, config),
        };
        match outcome {
            Ok(inj) => {
                return Ok(GeneratedSample {
                    provenance: Provenance {
                        source_id: String::new(),
                        seed,
                        draw,
                        target_bounds: target.bounds,
                        target_kind: target.kind,
                        target_path: tree.path(target.node),
                        attempts: attempt,
                        icon_id: inj.icon_id,
                        font_size: inj.font_size,
                        text_region_from_node_bounds: matches!(
                            category,
                            IssueCategory::TextOverlap | IssueCategory::NullValue
                        ),
                    },
                    image: inj.image,
                    category,
                    bbox: inj.bbox,
                })
            }
            Err(InjectError::DegenerateDraw(why)) => last = why,
            Err(e) => return Err(e),
        }
    }
    Err(InjectError::DegenerateDraw(format!(
        "gave up after {} draws: {last}",
        config.max_resample.max(1)
    )))
}

/// Covers the upper or lower part of the component with a block in its
/// top-corner color.
pub fn inject_occlusion(
    scr: &Raster,
    target: &TargetComponent,
    draw: &InjectionDraw,
    config: &InjectConfig,
) -> Result<Injection, InjectError> {
    let b = target.bounds;
    let (w, h) = (b.width(), b.height());
    if draw.rand.abs() < config.min_occlusion_frac {
        return Err(InjectError::DegenerateDraw(format!("|rand| = {} too small", draw.rand.abs())));
    }
    let block_h = floor_px(h as f64 * draw.rand.abs());
    if block_h <= 0 || w <= 0 {
        return Err(InjectError::DegenerateDraw("empty occlusion block".into()));
    }
    let y = if draw.rand >= 0.0 {
        b.y1
    } else {
        floor_px(b.y2 as f64 + h as f64 * draw.rand)
    };
    let color = corner_avg_color(scr, &b, config.corner_window)?;
    let mut image = scr.clone();
    paste_block(&mut image, b.x1, y, w, block_h, color);
    Ok(Injection {
        image,
        bbox: b,
        icon_id: None,
        font_size: None,
    })
}

/// Draws a shifted copy of the component's text over itself.
///
/// The copy is clipped to the component, so pixels never change outside it.
pub fn inject_text_overlap(
    scr: &Raster,
    target: &TargetComponent,
    draw: &InjectionDraw,
    config: &InjectConfig,
) -> Result<Injection, InjectError> {
    let text = target
        .text
        .as_deref()
        .filter(|s| !s.trim().is_empty())
        .ok_or(InjectError::NoTarget(IssueCategory::TextOverlap))?;
    let region = target.bounds;
    let style = config.text_style(region.height(), FONT_COLORS[draw.font_color_choice % FONT_COLORS.len()]);
    let origin = (floor_px(region.x2 as f64 - draw.xrand), region.y1);

    let copy = measure_text(origin, text, &style, &scr.bounds())?
        .ok_or_else(|| InjectError::DegenerateDraw("copy renders off-canvas".into()))?;
    let overlap = get_overlap(&region, &copy)
        .ok_or_else(|| InjectError::DegenerateDraw(format!("copy at x={} misses the text", origin.0)))?;
    if (overlap.area() as f64) < config.min_overlap_frac * copy.area() as f64 {
        return Err(InjectError::DegenerateDraw(format!(
            "overlap {} below {} of copy area {}",
            overlap.area(),
            config.min_overlap_frac,
            copy.area()
        )));
    }
    let mut image = scr.clone();
    let drawn = draw_text_clipped(&mut image, origin, text, &style, &region)?;
    if drawn.bounds.is_none() {
        return Err(InjectError::DegenerateDraw("no glyph pixels inside the text region".into()));
    }
    Ok(Injection {
        image,
        bbox: overlap,
        icon_id: None,
        font_size: Some(style.font_size_px()),
    })
}

/// Replaces the image with its mean color and a broken-image icon.
pub fn inject_missing_image(
    scr: &Raster,
    target: &TargetComponent,
    draw: &InjectionDraw,
    icons: &[IconAsset],
    config: &InjectConfig,
) -> Result<Injection, InjectError> {
    if icons.is_empty() {
        return Err(InjectError::NoIcons);
    }
    let b = target.bounds;
    let (w, h) = (b.width(), b.height());
    let bg = region_mean_color(scr, &b)?;
    let mut image = scr.clone();
    paste_block(&mut image, b.x1, b.y1, w, h, bg);

    let icon = &icons[draw.icon_choice % icons.len()];
    let max_side = floor_px(config.icon_max_frac * w.min(h) as f64).max(1) as u32;
    let scaled = fit_within(&icon.image, max_side);
    let cx = floor_px(b.x1 as f64 + 0.5 * w as f64);
    let cy = floor_px(b.y1 as f64 + 0.5 * h as f64);
    let (ox, oy) = match config.icon_anchor {
        IconAnchor::Center => (cx - i64::from(scaled.width()) / 2, cy - i64::from(scaled.height()) / 2),
        IconAnchor::TopLeft => (cx, cy),
    };
    overlay_rgba(&mut image, &scaled, ox, oy, &b);
    Ok(Injection {
        image,
        bbox: b,
        icon_id: Some(icon.id.clone()),
        font_size: None,
    })
}

/// Blanks the text region and writes `null` at its top-left corner.
pub fn inject_null_value(
    scr: &Raster,
    target: &TargetComponent,
    _draw: &InjectionDraw,
    config: &InjectConfig,
) -> Result<Injection, InjectError> {
    let b = target.bounds;
    let fs = config.raw_font_size(b.height());
    if fs < i64::from(MIN_FONT_PX) {
        return Err(InjectError::DegenerateDraw(format!("font size {fs} below minimum")));
    }
    let bg = region_mean_color(scr, &b)?;
    let mut image = scr.clone();
    paste_block(&mut image, b.x1, b.y1, b.width(), b.height(), bg);
    let ink = if bg.luma() < 128.0 { Color::WHITE } else { Color::BLACK };
    let style = TextStyle::new(fs as u32, ink);
    let drawn = draw_text_clipped(&mut image, (b.x1, b.y1), "null", &style, &b)?;
    let bbox = drawn
        .bounds
        .ok_or_else(|| InjectError::DegenerateDraw("null text not rendered".into()))?;
    Ok(Injection {
        image,
        bbox,
        icon_id: None,
        font_size: Some(style.font_size_px()),
    })
}

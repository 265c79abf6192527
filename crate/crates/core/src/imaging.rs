//! Minimal raster toolkit used by the injector and the dedup descriptors.
//!
//! Coordinates handed in as floats are floor-rounded with [`floor_px`]; no
//! operation here ever writes outside its destination raster.

use std::path::Path;

use font8x8::UnicodeFonts;
use image::{imageops, ImageFormat, Rgb, RgbImage, RgbaImage};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{get_overlap, Bounds};

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("raster dimensions must be positive, got {0}x{1}")]
    InvalidSize(u32, u32),
    #[error("region {0} has zero area")]
    ZeroArea(Bounds),
    #[error("region {region} lies outside a {width}x{height} raster")]
    OutOfRaster {
        region: Bounds,
        width: u32,
        height: u32,
    },
    #[error("cannot draw empty text")]
    EmptyText,
    #[error("downsample size must be at least 2, got {0}")]
    DownsampleSize(usize),
    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T, E = ImagingError> = std::result::Result<T, E>;

/// Floor rounding used for every fractional pixel coordinate.
pub fn floor_px(v: f64) -> i64 {
    v.floor() as i64
}

/// 8-bit RGB color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Color {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Color {
    pub const BLACK: Color = Color::new(0, 0, 0);
    pub const GRAY: Color = Color::new(128, 128, 128);
    pub const WHITE: Color = Color::new(255, 255, 255);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    /// ITU-R BT.601 luma in `[0, 255]`.
    pub fn luma(&self) -> f64 {
        0.299 * f64::from(self.r) + 0.587 * f64::from(self.g) + 0.114 * f64::from(self.b)
    }

    fn rgb(self) -> Rgb<u8> {
        Rgb([self.r, self.g, self.b])
    }
}

impl From<Rgb<u8>> for Color {
    fn from(p: Rgb<u8>) -> Self {
        Color::new(p[0], p[1], p[2])
    }
}

pub const MIN_FONT_PX: u32 = 8;
pub const MAX_FONT_PX: u32 = 72;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextStyle {
    font_size_px: u32,
    pub color: Color,
}

impl TextStyle {
    /// Font size is clamped into `[8, 72]`.
    pub fn new(font_size_px: u32, color: Color) -> Self {
        Self {
            font_size_px: font_size_px.clamp(MIN_FONT_PX, MAX_FONT_PX),
            color,
        }
    }

    pub fn font_size_px(&self) -> u32 {
        self.font_size_px
    }

    /// Horizontal advance of one character cell.
    pub fn advance(&self) -> u32 {
        ((self.font_size_px * 5 + 4) / 8).max(8)
    }
}

/// Owned RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    img: RgbImage,
}

impl Raster {
    pub fn new(width: u32, height: u32, fill: Color) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(ImagingError::InvalidSize(width, height));
        }
        Ok(Self {
            img: RgbImage::from_pixel(width, height, fill.rgb()),
        })
    }

    pub fn from_rgb(img: RgbImage) -> Result<Self> {
        if img.width() == 0 || img.height() == 0 {
            return Err(ImagingError::InvalidSize(img.width(), img.height()));
        }
        Ok(Self { img })
    }

    /// Loads a PNG or JPEG file, dropping any alpha channel.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let img = image::open(path)?.to_rgb8();
        Self::from_rgb(img)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::from_rgb(image::load_from_memory(bytes)?.to_rgb8())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        self.img.save_with_format(path, ImageFormat::Png)?;
        Ok(())
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut out = std::io::Cursor::new(Vec::new());
        self.img.write_to(&mut out, ImageFormat::Png)?;
        Ok(out.into_inner())
    }

    pub fn width(&self) -> u32 {
        self.img.width()
    }

    pub fn height(&self) -> u32 {
        self.img.height()
    }

    pub fn dims(&self) -> (u32, u32) {
        self.img.dimensions()
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::new(0, 0, i64::from(self.width()), i64::from(self.height()))
    }

    pub fn pixel(&self, x: u32, y: u32) -> Color {
        (*self.img.get_pixel(x, y)).into()
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, c: Color) {
        self.img.put_pixel(x, y, c.rgb());
    }

    pub fn as_image(&self) -> &RgbImage {
        &self.img
    }

    pub fn into_image(self) -> RgbImage {
        self.img
    }

    fn check_region(&self, region: &Bounds) -> Result<()> {
        if region.is_empty() {
            return Err(ImagingError::ZeroArea(*region));
        }
        if !region.within_image(self.width(), self.height()) {
            return Err(ImagingError::OutOfRaster {
                region: *region,
                width: self.width(),
                height: self.height(),
            });
        }
        Ok(())
    }
}

/// Overwrites the part of the block `(x, y, w, h)` that falls on the canvas.
/// Returns the painted region, or `None` when nothing was painted.
pub fn paste_block(dst: &mut Raster, x: i64, y: i64, w: i64, h: i64, color: Color) -> Option<Bounds> {
    let block = Bounds::from_xywh(x, y, w.max(0), h.max(0));
    if block.is_empty() {
        log::warn!("paste_block: zero-area block at ({x},{y}) ignored");
        return None;
    }
    let region = get_overlap(&block, &dst.bounds())?;
    fill_region(dst, &region, color);
    Some(region)
}

fn fill_region(dst: &mut Raster, region: &Bounds, color: Color) {
    let px = color.rgb();
    for yy in region.y1..region.y2 {
        for xx in region.x1..region.x2 {
            dst.img.put_pixel(xx as u32, yy as u32, px);
        }
    }
}

/// Outcome of rendering a string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextRender {
    /// Tight box around the glyph pixels actually written.
    pub bounds: Option<Bounds>,
    /// Characters drawn with the replacement glyph.
    pub missing_glyphs: usize,
}

const REPLACEMENT_GLYPH: [u8; 8] = [0x7E, 0x42, 0x42, 0x42, 0x42, 0x42, 0x7E, 0x00];

fn glyph(c: char) -> Option<[u8; 8]> {
    font8x8::BASIC_FONTS
        .get(c)
        .or_else(|| font8x8::LATIN_FONTS.get(c))
}

/// Calls `f` for every foreground pixel of `text` laid out with its top-left
/// corner at `origin`. Pixels are reported in layout coordinates, unclipped.
fn for_each_glyph_pixel(origin: (i64, i64), text: &str, style: &TextStyle, mut f: impl FnMut(i64, i64)) -> usize {
    let cell_h = i64::from(style.font_size_px);
    let cell_w = i64::from(style.advance());
    let mut missing = 0;
    for (i, c) in text.chars().enumerate() {
        let rows = glyph(c).unwrap_or_else(|| {
            missing += 1;
            REPLACEMENT_GLYPH
        });
        let cx = origin.0 + i as i64 * cell_w;
        for py in 0..cell_h {
            let row = rows[(py * 8 / cell_h) as usize];
            if row == 0 {
                continue;
            }
            for px in 0..cell_w {
                // bit 0 is the leftmost column
                if row >> (px * 8 / cell_w) & 1 == 1 {
                    f(cx + px, origin.1 + py);
                }
            }
        }
    }
    missing
}

/// Tight box of the glyph pixels `text` would cover, clipped to `clip`.
pub fn measure_text(origin: (i64, i64), text: &str, style: &TextStyle, clip: &Bounds) -> Result<Option<Bounds>> {
    if text.is_empty() {
        return Err(ImagingError::EmptyText);
    }
    let mut acc: Option<Bounds> = None;
    for_each_glyph_pixel(origin, text, style, |x, y| {
        if clip.contains_point(x, y) {
            grow(&mut acc, x, y);
        }
    });
    Ok(acc)
}

fn grow(acc: &mut Option<Bounds>, x: i64, y: i64) {
    let px = Bounds::new(x, y, x + 1, y + 1);
    *acc = Some(match acc {
        Some(b) => b.union(&px),
        None => px,
    });
}

/// Renders `text` with its top-left corner at `origin` using the bundled
/// 8x8 bitmap face scaled to the font size.
pub fn draw_text(dst: &mut Raster, origin: (i64, i64), text: &str, style: &TextStyle) -> Result<TextRender> {
    let canvas = dst.bounds();
    draw_text_clipped(dst, origin, text, style, &canvas)
}

/// Like [`draw_text`] but only writes pixels inside `clip`.
pub fn draw_text_clipped(
    dst: &mut Raster,
    origin: (i64, i64),
    text: &str,
    style: &TextStyle,
    clip: &Bounds,
) -> Result<TextRender> {
    if text.is_empty() {
        return Err(ImagingError::EmptyText);
    }
    let Some(clip) = get_overlap(clip, &dst.bounds()) else {
        return Ok(TextRender {
            bounds: None,
            missing_glyphs: 0,
        });
    };
    let px = style.color.rgb();
    let mut acc = None;
    let missing = for_each_glyph_pixel(origin, text, style, |x, y| {
        if clip.contains_point(x, y) {
            dst.img.put_pixel(x as u32, y as u32, px);
            grow(&mut acc, x, y);
        }
    });
    if missing > 0 {
        log::debug!("draw_text: {missing} glyph(s) replaced in {text:?}");
    }
    Ok(TextRender {
        bounds: acc,
        missing_glyphs: missing,
    })
}

/// Composites an RGBA image with its top-left at `(x, y)`, writing only
/// inside `clip` and the canvas.
pub fn overlay_rgba(dst: &mut Raster, src: &RgbaImage, x: i64, y: i64, clip: &Bounds) {
    let placed = Bounds::from_xywh(x, y, i64::from(src.width()), i64::from(src.height()));
    let Some(region) = get_overlap(&placed, clip).and_then(|r| get_overlap(&r, &dst.bounds())) else {
        return;
    };
    for yy in region.y1..region.y2 {
        for xx in region.x1..region.x2 {
            let s = src.get_pixel((xx - x) as u32, (yy - y) as u32);
            let a = u32::from(s[3]);
            if a == 0 {
                continue;
            }
            let d = dst.img.get_pixel_mut(xx as u32, yy as u32);
            for c in 0..3 {
                let v = (u32::from(s[c]) * a + u32::from(d[c]) * (255 - a) + 127) / 255;
                d[c] = v as u8;
            }
        }
    }
}

/// Scales `src` down so that neither side exceeds `max_side`, keeping aspect.
/// Images already small enough are returned unchanged.
pub fn fit_within(src: &RgbaImage, max_side: u32) -> RgbaImage {
    let longest = src.width().max(src.height());
    if longest <= max_side {
        return src.clone();
    }
    let max_side = max_side.max(1);
    let w = ((u64::from(src.width()) * u64::from(max_side)) / u64::from(longest)).max(1) as u32;
    let h = ((u64::from(src.height()) * u64::from(max_side)) / u64::from(longest)).max(1) as u32;
    imageops::resize(src, w, h, imageops::FilterType::Triangle)
}

/// Floor mean of the top-left and top-right corner samples of `bounds`.
/// `window` is the side of the square sampled at each corner (1 = single pixel).
pub fn corner_avg_color(src: &Raster, bounds: &Bounds, window: u32) -> Result<Color> {
    src.check_region(bounds)?;
    let k = i64::from(window.max(1));
    let kx = k.min(bounds.width());
    let ky = k.min(bounds.height());
    let left = Bounds::from_xywh(bounds.x1, bounds.y1, kx, ky);
    let right = Bounds::from_xywh(bounds.x2 - kx, bounds.y1, kx, ky);
    let (mut sum, mut n) = ([0u64; 3], 0u64);
    for region in [left, right] {
        accumulate(src, &region, &mut sum, &mut n);
    }
    Ok(mean_color(sum, n))
}

/// Floor mean color over every pixel of `bounds`.
pub fn region_mean_color(src: &Raster, bounds: &Bounds) -> Result<Color> {
    src.check_region(bounds)?;
    let (mut sum, mut n) = ([0u64; 3], 0u64);
    accumulate(src, bounds, &mut sum, &mut n);
    Ok(mean_color(sum, n))
}

fn accumulate(src: &Raster, region: &Bounds, sum: &mut [u64; 3], n: &mut u64) {
    for yy in region.y1..region.y2 {
        for xx in region.x1..region.x2 {
            let p = src.img.get_pixel(xx as u32, yy as u32);
            for c in 0..3 {
                sum[c] += u64::from(p[c]);
            }
            *n += 1;
        }
    }
}

fn mean_color(sum: [u64; 3], n: u64) -> Color {
    Color::new((sum[0] / n) as u8, (sum[1] / n) as u8, (sum[2] / n) as u8)
}

/// Coverage weights of source pixels for each of `n` equal output bins.
fn bin_weights(len: u32, n: usize) -> Vec<Vec<(usize, f64)>> {
    let step = f64::from(len) / n as f64;
    (0..n)
        .map(|i| {
            let lo = i as f64 * step;
            let hi = lo + step;
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(len as usize);
            (first..last)
                .filter_map(|p| {
                    let w = (hi.min(p as f64 + 1.0) - lo.max(p as f64)).max(0.0);
                    (w > 0.0).then_some((p, w))
                })
                .collect()
        })
        .collect()
}

/// Area-averaged BT.601 luma on an `n x n` grid, row-major, L2-normalized.
/// An all-black raster yields the zero vector.
pub fn downsample_gray(src: &Raster, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(ImagingError::DownsampleSize(n));
    }
    let (w, h) = src.dims();
    let wx = bin_weights(w, n);
    let wy = bin_weights(h, n);
    let luma: Vec<f64> = src.img.pixels().map(|p| Color::from(*p).luma()).collect();

    let mut rows = vec![0.0; n * w as usize];
    for (i, weights) in wy.iter().enumerate() {
        let acc = &mut rows[i * w as usize..(i + 1) * w as usize];
        for &(y, wgt) in weights {
            let line = &luma[y * w as usize..(y + 1) * w as usize];
            for (a, l) in acc.iter_mut().zip(line) {
                *a += wgt * l;
            }
        }
    }
    let cell = f64::from(w) / n as f64 * f64::from(h) / n as f64;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for (j, weights) in wx.iter().enumerate() {
            let s: f64 = weights.iter().map(|&(x, wgt)| wgt * rows[i * w as usize + x]).sum();
            out[i * n + j] = s / cell;
        }
    }
    normalize(&mut out);
    Ok(out)
}

pub(crate) fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Pixels where the two rasters differ. Both must have the same size.
pub fn diff_pixels(a: &Raster, b: &Raster) -> Vec<(u32, u32)> {
    assert_eq!(a.dims(), b.dims(), "diff_pixels needs equal-size rasters");
    a.img
        .enumerate_pixels()
        .zip(b.img.pixels())
        .filter(|((_, _, pa), pb)| pa != pb)
        .map(|((x, y, _), _)| (x, y))
        .collect()
}

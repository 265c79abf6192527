//! Broken-image placeholder icons used for missing-image injection.
//!
//! Ten icons ship with the crate. They are drawn procedurally so that the
//! set is available without any asset directory; `assets/icons/` holds the
//! same ten as PNG files (regenerate with `cargo run --example make_icons`).
//! A user-supplied directory of PNGs can replace them.

use std::path::Path;

use font8x8::UnicodeFonts;
use image::{Rgba, RgbaImage};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IconError {
    #[error("icon directory {0} contains no PNG files")]
    Empty(String),
    #[error("reading icon directory: {0}")]
    Io(#[from] std::io::Error),
    #[error("decoding icon {path}: {source}")]
    Decode {
        path: String,
        source: image::ImageError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IconAsset {
    pub id: String,
    pub image: RgbaImage,
}

pub const ICON_SIZE: u32 = 64;

const INK: Rgba<u8> = Rgba([96, 100, 108, 255]);
const PALE: Rgba<u8> = Rgba([208, 212, 218, 255]);
const RED: Rgba<u8> = Rgba([210, 48, 48, 255]);
const WHITE: Rgba<u8> = Rgba([255, 255, 255, 255]);
const CLEAR: Rgba<u8> = Rgba([0, 0, 0, 0]);

/// Loads every `*.png` in `dir`, sorted by file name; ids are file stems.
pub fn load_icons(dir: impl AsRef<Path>) -> Result<Vec<IconAsset>, IconError> {
    let dir = dir.as_ref();
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(IconError::Empty(dir.display().to_string()));
    }
    paths
        .into_iter()
        .map(|p| {
            let image = image::open(&p)
                .map_err(|source| IconError::Decode {
                    path: p.display().to_string(),
                    source,
                })?
                .to_rgba8();
            let id = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            Ok(IconAsset { id, image })
        })
        .collect()
}

/// The ten bundled icons, in stable order.
pub fn builtin_icons() -> Vec<IconAsset> {
    let makers: [(&str, fn(&mut Canvas)); 10] = [
        ("broken_frame", broken_frame),
        ("image_cross", image_cross),
        ("image_slash", image_slash),
        ("alert_circle", alert_circle),
        ("question_tile", question_tile),
        ("torn_photo", torn_photo),
        ("cloud_off", cloud_off),
        ("placeholder_gray", placeholder_gray),
        ("file_broken", file_broken),
        ("dashed_landscape", dashed_landscape),
    ];
    makers
        .iter()
        .enumerate()
        .map(|(i, (name, draw))| {
            let mut c = Canvas(RgbaImage::from_pixel(ICON_SIZE, ICON_SIZE, CLEAR));
            draw(&mut c);
            IconAsset {
                id: format!("{i:02}_{name}"),
                image: c.0,
            }
        })
        .collect()
}

struct Canvas(RgbaImage);

impl Canvas {
    fn put(&mut self, x: i32, y: i32, c: Rgba<u8>) {
        if x >= 0 && y >= 0 && (x as u32) < self.0.width() && (y as u32) < self.0.height() {
            self.0.put_pixel(x as u32, y as u32, c);
        }
    }

    fn fill(&mut self, x1: i32, y1: i32, x2: i32, y2: i32, c: Rgba<u8>) {
        for y in y1..y2 {
            for x in x1..x2 {
                self.put(x, y, c);
            }
        }
    }

    fn frame(&mut self, x1: i32, y1: i32, x2: i32, y2: i32, t: i32, c: Rgba<u8>) {
        self.fill(x1, y1, x2, y1 + t, c);
        self.fill(x1, y2 - t, x2, y2, c);
        self.fill(x1, y1, x1 + t, y2, c);
        self.fill(x2 - t, y1, x2, y2, c);
    }

    fn line(&mut self, x0: i32, y0: i32, x1: i32, y1: i32, t: i32, c: Rgba<u8>) {
        let steps = (x1 - x0).abs().max((y1 - y0).abs()).max(1);
        for s in 0..=steps {
            let x = x0 + (x1 - x0) * s / steps;
            let y = y0 + (y1 - y0) * s / steps;
            self.fill(x - t / 2, y - t / 2, x - t / 2 + t, y - t / 2 + t, c);
        }
    }

    fn disc(&mut self, cx: i32, cy: i32, r: i32, c: Rgba<u8>) {
        for y in cy - r..=cy + r {
            for x in cx - r..=cx + r {
                if (x - cx).pow(2) + (y - cy).pow(2) <= r * r {
                    self.put(x, y, c);
                }
            }
        }
    }

    fn ring(&mut self, cx: i32, cy: i32, r: i32, t: i32, c: Rgba<u8>) {
        for y in cy - r..=cy + r {
            for x in cx - r..=cx + r {
                let d = (x - cx).pow(2) + (y - cy).pow(2);
                if d <= r * r && d >= (r - t).pow(2) {
                    self.put(x, y, c);
                }
            }
        }
    }

    /// Filled triangle via half-plane tests.
    fn triangle(&mut self, p: [(i32, i32); 3], c: Rgba<u8>) {
        let edge = |a: (i32, i32), b: (i32, i32), x: i32, y: i32| (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0);
        let (minx, maxx) = (p.iter().map(|q| q.0).min().unwrap(), p.iter().map(|q| q.0).max().unwrap());
        let (miny, maxy) = (p.iter().map(|q| q.1).min().unwrap(), p.iter().map(|q| q.1).max().unwrap());
        for y in miny..=maxy {
            for x in minx..=maxx {
                let e = [edge(p[0], p[1], x, y), edge(p[1], p[2], x, y), edge(p[2], p[0], x, y)];
                if e.iter().all(|v| *v >= 0) || e.iter().all(|v| *v <= 0) {
                    self.put(x, y, c);
                }
            }
        }
    }

    fn glyph(&mut self, ch: char, x: i32, y: i32, scale: i32, c: Rgba<u8>) {
        let rows = font8x8::BASIC_FONTS.get(ch).unwrap_or([0; 8]);
        for (ry, row) in rows.iter().enumerate() {
            for rx in 0..8 {
                if row >> rx & 1 == 1 {
                    let (px, py) = (x + rx * scale, y + ry as i32 * scale);
                    self.fill(px, py, px + scale, py + scale, c);
                }
            }
        }
    }

    fn landscape(&mut self, c: Rgba<u8>) {
        self.triangle([(12, 48), (28, 26), (42, 48)], c);
        self.triangle([(30, 48), (40, 34), (52, 48)], c);
        self.disc(44, 20, 5, c);
    }
}

fn broken_frame(c: &mut Canvas) {
    c.frame(6, 10, 58, 54, 3, INK);
    c.landscape(INK);
    for (a, b) in [((34, 10), (28, 24)), ((28, 24), (38, 36)), ((38, 36), (30, 54))] {
        c.line(a.0, a.1, b.0, b.1, 3, WHITE);
    }
}

fn image_cross(c: &mut Canvas) {
    c.frame(6, 10, 58, 54, 3, INK);
    c.landscape(PALE);
    c.line(16, 18, 48, 46, 5, RED);
    c.line(48, 18, 16, 46, 5, RED);
}

fn image_slash(c: &mut Canvas) {
    c.frame(6, 10, 58, 54, 3, INK);
    c.landscape(INK);
    c.line(6, 6, 58, 58, 4, WHITE);
    c.line(8, 4, 60, 56, 3, INK);
}

fn alert_circle(c: &mut Canvas) {
    c.ring(32, 32, 26, 4, INK);
    c.fill(29, 16, 35, 38, INK);
    c.fill(29, 43, 35, 49, INK);
}

fn question_tile(c: &mut Canvas) {
    c.fill(6, 6, 58, 58, PALE);
    c.frame(6, 6, 58, 58, 2, INK);
    c.glyph('?', 16, 14, 4, INK);
}

fn torn_photo(c: &mut Canvas) {
    c.fill(6, 10, 58, 54, PALE);
    c.landscape(INK);
    c.triangle([(58, 28), (58, 54), (30, 54)], CLEAR);
    for i in 0..6 {
        let x = 30 + i * 5;
        c.line(x, 54 - i * 5, x + 5, 49 - i * 5, 2, INK);
    }
}

fn cloud_off(c: &mut Canvas) {
    c.disc(22, 36, 11, INK);
    c.disc(36, 28, 14, INK);
    c.disc(46, 38, 9, INK);
    c.fill(22, 38, 46, 47, INK);
    c.line(8, 8, 56, 56, 4, WHITE);
    c.line(10, 6, 58, 54, 3, INK);
}

fn placeholder_gray(c: &mut Canvas) {
    c.fill(4, 4, 60, 60, INK);
    c.landscape(WHITE);
}

fn file_broken(c: &mut Canvas) {
    c.fill(14, 6, 40, 58, PALE);
    c.fill(14, 20, 50, 58, PALE);
    c.triangle([(40, 6), (50, 20), (40, 20)], INK);
    c.frame(14, 6, 50, 58, 2, INK);
    let zig = [(14, 34), (22, 28), (30, 36), (38, 28), (50, 34)];
    for w in zig.windows(2) {
        c.line(w[0].0, w[0].1, w[1].0, w[1].1, 3, WHITE);
    }
}

fn dashed_landscape(c: &mut Canvas) {
    for i in (6..58).step_by(8) {
        c.fill(i, 8, i + 4, 11, INK);
        c.fill(i, 53, i + 4, 56, INK);
    }
    for i in (8..56).step_by(8) {
        c.fill(6, i, 9, i + 4, INK);
        c.fill(55, i, 58, i + 4, INK);
    }
    c.landscape(INK);
}

//! Synthetic Rico-like screens for demos and tests.
//!
//! Each seed yields a rendered screenshot plus a matching view-hierarchy
//! document: an app bar, a list of rows with thumbnails, titles and
//! subtitles, and optionally a text field and a button.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::geometry::Bounds;
use crate::imaging::{draw_text_clipped, paste_block, Color, Raster, TextStyle};

const WORDS: &[&str] = &[
    "Settings", "Profile", "Inbox", "Weather", "Music", "Photos", "Orders", "Travel", "Recipes", "News", "Wallet",
    "Friends", "Calendar", "Notes", "Maps", "Library", "Account", "Offers", "Events", "Fitness",
];

const TEXT_CLASSES: &[&str] = &[
    "android.widget.TextView",
    "androidx.appcompat.widget.AppCompatTextView",
    "com.google.android.material.textview.MaterialTextView",
];

const IMAGE_CLASSES: &[&str] = &[
    "android.widget.ImageView",
    "androidx.appcompat.widget.AppCompatImageView",
    "android.widget.ImageButton",
];

/// A rendered screen and its hierarchy JSON.
#[derive(Debug, Clone)]
pub struct MockScreen {
    pub image: Raster,
    pub hierarchy: String,
}

struct Painter {
    img: Raster,
    rng: ChaCha8Rng,
}

impl Painter {
    fn block(&mut self, b: Bounds, c: Color) {
        paste_block(&mut self.img, b.x1, b.y1, b.width(), b.height(), c);
    }

    fn text(&mut self, b: Bounds, s: &str, c: Color) {
        let fs = (b.height() * 3 / 4).max(8) as u32;
        let _ = draw_text_clipped(&mut self.img, (b.x1, b.y1), s, &TextStyle::new(fs, c), &b);
    }

    fn color(&mut self, lo: u8, hi: u8) -> Color {
        Color::new(
            self.rng.gen_range(lo..=hi),
            self.rng.gen_range(lo..=hi),
            self.rng.gen_range(lo..=hi),
        )
    }

    fn phrase(&mut self, words: usize) -> String {
        (0..words)
            .map(|_| WORDS[self.rng.gen_range(0..WORDS.len())])
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Thumbnail with a few stripes and a disc-ish square so images differ.
    fn picture(&mut self, b: Bounds) {
        let base = self.color(40, 220);
        self.block(b, base);
        for _ in 0..3 {
            let h = self.rng.gen_range(2..=(b.height() / 4).max(3));
            let y = self.rng.gen_range(b.y1..(b.y2 - h).max(b.y1 + 1));
            let c = self.color(0, 255);
            self.block(Bounds::new(b.x1, y, b.x2, y + h), c);
        }
        let s = b.width().min(b.height()) / 3;
        let c = self.color(0, 255);
        self.block(Bounds::from_xywh(b.x1 + b.width() / 2 - s / 2, b.y1 + b.height() / 3, s, s), c);
    }
}

fn node(class: &str, b: Bounds, text: Option<&str>, children: Vec<Value>) -> Value {
    let mut v = json!({
        "class": class,
        "bounds": [b.x1, b.y1, b.x2, b.y2],
        "visibility": "visible",
        "visible-to-user": true,
        "children": children,
    });
    if let Some(t) = text {
        v["text"] = json!(t);
    }
    v
}

type Palette3 = (Color, Color, Color);

fn list_rows(p: &mut Painter, content: &mut Vec<Value>, mut y: i64, (w, h): (i64, i64), (bg, ink, sub_ink): Palette3) -> i64 {
    let rows = p.rng.gen_range(3..=6);
    let mut list = Vec::new();
    let list_top = y;
    for _ in 0..rows {
        let row_h = p.rng.gen_range(h / 12..=h / 7);
        if y + row_h > h * 4 / 5 {
            break;
        }
        let row = Bounds::new(0, y, w, y + row_h);
        let pad = row_h / 8;
        let thumb_side = row_h - 2 * pad;
        let thumb_left = p.rng.gen_bool(0.7);
        let thumb = if thumb_left {
            Bounds::from_xywh(w / 24, y + pad, thumb_side, thumb_side)
        } else {
            Bounds::from_xywh(w - w / 24 - thumb_side, y + pad, thumb_side, thumb_side)
        };
        p.picture(thumb);
        let (tx1, tx2) = if thumb_left {
            (thumb.x2 + w / 24, w - w / 24)
        } else {
            (w / 24, thumb.x1 - w / 24)
        };
        let title_b = Bounds::new(tx1, y + pad, tx2, y + pad + row_h * 3 / 10);
        let sub_b = Bounds::new(tx1, title_b.y2 + pad / 2, tx2, title_b.y2 + pad / 2 + row_h / 4);
        let n_title = p.rng.gen_range(1..=2);
        let title = p.phrase(n_title);
        let n_sub = p.rng.gen_range(2..=3);
        let sub = p.phrase(n_sub);
        p.text(title_b, &title, ink);
        p.text(sub_b, &sub, sub_ink);
        let tc = TEXT_CLASSES[p.rng.gen_range(0..TEXT_CLASSES.len())];
        let ic = IMAGE_CLASSES[p.rng.gen_range(0..IMAGE_CLASSES.len())];
        let divider = Color::new(bg.r.saturating_sub(20), bg.g.saturating_sub(20), bg.b.saturating_sub(20));
        p.block(Bounds::new(w / 24, row.y2 - 1, w - w / 24, row.y2), divider);
        list.push(node(
            "android.widget.LinearLayout",
            row,
            None,
            vec![
                node(ic, thumb, None, vec![]),
                node(tc, title_b, Some(&title), vec![]),
                node("android.widget.TextView", sub_b, Some(&sub), vec![]),
            ],
        ));
        y += row_h;
    }
    content.push(node(
        "androidx.recyclerview.widget.RecyclerView",
        Bounds::new(0, list_top, w, y),
        None,
        list,
    ));
    y
}

/// Two or three columns of picture cards with a caption under each.
fn card_grid(p: &mut Painter, content: &mut Vec<Value>, top: i64, (w, h): (i64, i64), (ink, _): (Color, Color)) -> i64 {
    let cols = p.rng.gen_range(2..=3);
    let gap = w / 30;
    let card_w = (w - gap * (cols + 1)) / cols;
    let pic_h = card_w * p.rng.gen_range(6..=12) / 10;
    let cap_h = (h / 28).max(12);
    let card_h = pic_h + cap_h + gap / 2;
    let card_bg = p.color(200, 255);
    let mut cards = Vec::new();
    let mut y = top;
    while y + card_h <= h * 4 / 5 {
        for c in 0..cols {
            let x = gap + c * (card_w + gap);
            let card = Bounds::new(x, y, x + card_w, y + card_h);
            p.block(card, card_bg);
            let pic = Bounds::new(x, y, x + card_w, y + pic_h);
            p.picture(pic);
            let cap = Bounds::new(x + 4, y + pic_h + gap / 4, x + card_w - 4, y + pic_h + gap / 4 + cap_h);
            let text = p.phrase(1);
            p.text(cap, &text, ink);
            let ic = IMAGE_CLASSES[p.rng.gen_range(0..IMAGE_CLASSES.len())];
            let tc = TEXT_CLASSES[p.rng.gen_range(0..TEXT_CLASSES.len())];
            cards.push(node(
                "androidx.cardview.widget.CardView",
                card,
                None,
                vec![node(ic, pic, None, vec![]), node(tc, cap, Some(&text), vec![])],
            ));
        }
        y += card_h + gap;
    }
    content.push(node("androidx.recyclerview.widget.RecyclerView", Bounds::new(0, top, w, y), None, cards));
    y
}

/// A large header picture followed by a headline and paragraphs.
fn article(p: &mut Painter, content: &mut Vec<Value>, top: i64, (w, h): (i64, i64), (ink, sub_ink): (Color, Color)) -> i64 {
    let margin = w / 20;
    let hero_h = h * p.rng.gen_range(20..=35) / 100;
    let hero = Bounds::new(0, top, w, top + hero_h);
    p.picture(hero);
    let mut kids = vec![node(IMAGE_CLASSES[0], hero, None, vec![])];
    let head_h = (h / 22).max(14);
    let head = Bounds::new(margin, hero.y2 + margin / 2, w - margin, hero.y2 + margin / 2 + head_h);
    let n = p.rng.gen_range(2..=3);
    let title = p.phrase(n);
    p.text(head, &title, ink);
    kids.push(node(TEXT_CLASSES[p.rng.gen_range(0..TEXT_CLASSES.len())], head, Some(&title), vec![]));
    let line_h = (h / 36).max(10);
    let mut y = head.y2 + margin / 2;
    let lines = p.rng.gen_range(3..=8);
    for _ in 0..lines {
        if y + line_h > h * 4 / 5 {
            break;
        }
        let right = w - margin - p.rng.gen_range(0..w / 4);
        let b = Bounds::new(margin, y, right, y + line_h);
        let n = p.rng.gen_range(2..=4);
        let text = p.phrase(n);
        p.text(b, &text, sub_ink);
        kids.push(node("android.widget.TextView", b, Some(&text), vec![]));
        y += line_h + line_h / 3;
    }
    content.push(node("android.widget.ScrollView", Bounds::new(0, top, w, y), None, vec![node("android.widget.LinearLayout", Bounds::new(0, top, w, y), None, kids)]));
    y
}

/// Generates one screen of `width x height` pixels.
pub fn mock_screen(seed: u64, width: u32, height: u32) -> MockScreen {
    let mut p = Painter {
        img: Raster::new(width, height, Color::WHITE).expect("positive size"),
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let (w, h) = (i64::from(width), i64::from(height));
    let dark = p.rng.gen_bool(0.2);
    let bg = if dark { p.color(18, 60) } else { p.color(200, 255) };
    let ink = if dark { Color::new(235, 235, 235) } else { Color::new(33, 33, 33) };
    let sub_ink = if dark { Color::new(170, 170, 170) } else { Color::new(110, 110, 110) };
    p.block(Bounds::new(0, 0, w, h), bg);

    let mut content = Vec::new();

    let bar_h = h * p.rng.gen_range(5..=10) / 80;
    let bar = Bounds::new(0, 0, w, bar_h);
    let bar_color = p.color(30, 200);
    p.block(bar, bar_color);
    let title_b = Bounds::new(w / 20, bar_h / 4, w * 2 / 3, bar_h * 3 / 4);
    let title = p.phrase(1);
    p.text(title_b, &title, Color::WHITE);
    let bar_children = vec![node("android.widget.TextView", title_b, Some(&title), vec![])];
    content.push(node("androidx.appcompat.widget.Toolbar", bar, None, bar_children));

    let mut y = bar_h + h / 40;
    match p.rng.gen_range(0..3) {
        0 => y = list_rows(&mut p, &mut content, y, (w, h), (bg, ink, sub_ink)),
        1 => y = card_grid(&mut p, &mut content, y, (w, h), (ink, sub_ink)),
        _ => y = article(&mut p, &mut content, y, (w, h), (ink, sub_ink)),
    }
    let nav_h = if p.rng.gen_bool(0.5) { h * p.rng.gen_range(5..=9) / 80 } else { 0 };
    let floor = h - nav_h;
    let field_h = h / 16;
    if p.rng.gen_bool(0.6) && y + 3 * field_h < floor {
        let field = Bounds::new(w / 12, y + field_h / 2, w * 11 / 12, y + field_h * 3 / 2);
        let field_bg = if dark { Color::new(60, 60, 60) } else { Color::new(240, 240, 240) };
        p.block(field, field_bg);
        let hint = p.phrase(1);
        p.text(Bounds::new(field.x1 + 8, field.y1 + field_h / 6, field.x2, field.y2 - field_h / 6), &hint, sub_ink);
        content.push(node("android.widget.EditText", field, Some(&hint), vec![]));
        y = field.y2;
    }
    if y + 2 * field_h < floor {
        let btn = Bounds::new(w / 4, y + field_h / 2, w * 3 / 4, y + field_h * 3 / 2);
        let btn_color = p.color(20, 180);
        p.block(btn, btn_color);
        let label = p.phrase(1).to_uppercase();
        p.text(Bounds::new(btn.x1 + 12, btn.y1 + field_h / 6, btn.x2, btn.y2 - field_h / 6), &label, Color::WHITE);
        content.push(node("com.google.android.material.button.MaterialButton", btn, Some(&label), vec![]));
    }

    if nav_h > 0 {
        let nav = Bounds::new(0, h - nav_h, w, h);
        let nav_color = p.color(0, 255);
        p.block(nav, nav_color);
        let tabs = p.rng.gen_range(3..=5);
        let mut items = Vec::new();
        for t in 0..tabs {
            let side = nav_h / 2;
            let cx = w * (2 * t + 1) / (2 * tabs);
            let icon = Bounds::from_xywh(cx - side / 2, nav.y1 + nav_h / 4, side, side);
            let c = p.color(0, 255);
            p.block(icon, c);
            items.push(node("android.widget.ImageView", icon, None, vec![]));
        }
        content.push(node("com.google.android.material.bottomnavigation.BottomNavigationView", nav, None, items));
    }

    let root = node(
        "com.android.internal.policy.PhoneWindow$DecorView",
        Bounds::new(0, 0, w, h),
        None,
        vec![node("android.widget.FrameLayout", Bounds::new(0, 0, w, h), None, content)],
    );
    let doc = json!({
        "activity_name": format!("com.example.mock{seed}/.MainActivity"),
        "activity": { "root": root },
        "is_keyboard_deployed": false,
    });
    MockScreen {
        image: p.img,
        hierarchy: serde_json::to_string_pretty(&doc).expect("json"),
    }
}

/// Writes `n` screens as `screen_NNNN.png` + `screen_NNNN.json` into `dir`.
pub fn write_mock_corpus(dir: impl AsRef<Path>, n: usize, seed: u64, width: u32, height: u32) -> std::io::Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    for i in 0..n {
        let s = mock_screen(seed.wrapping_mul(1_000_003).wrapping_add(i as u64), width, height);
        let stem = format!("screen_{i:04}");
        s.image
            .save_png(dir.join(format!("{stem}.png")))
            .map_err(std::io::Error::other)?;
        std::fs::write(dir.join(format!("{stem}.json")), s.hierarchy)?;
    }
    Ok(())
}

//! Injects each issue category into one screenshot and saves the results with
//! the label box outlined.
//!
//! ```text
//! cargo run --example inject_issues -- [OUT_DIR] [SEED]
//! ```

use displaybug::geometry::Bounds;
use displaybug::hierarchy::parse_hierarchy;
use displaybug::icons::builtin_icons;
use displaybug::imaging::{diff_pixels, paste_block, Color};
use displaybug::inject::{inject, InjectConfig, IssueCategory};
use displaybug::mockui::mock_screen;

fn outline(img: &mut displaybug::imaging::Raster, b: Bounds) {
    let red = Color::new(230, 20, 20);
    paste_block(img, b.x1, b.y1, b.width(), 1, red);
    paste_block(img, b.x1, b.y2 - 1, b.width(), 1, red);
    paste_block(img, b.x1, b.y1, 1, b.height(), red);
    paste_block(img, b.x2 - 1, b.y1, 1, b.height(), red);
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args
        .next()
        .unwrap_or_else(|| std::env::temp_dir().join("displaybug_injected").display().to_string());
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(11);
    std::fs::create_dir_all(&out)?;

    let screen = mock_screen(seed, 360, 640);
    let tree = parse_hierarchy(&screen.hierarchy, screen.image.dims())?;
    screen.image.save_png(format!("{out}/clean.png"))?;
    let icons = builtin_icons();
    let config = InjectConfig::default();

    for cat in IssueCategory::ALL {
        let sample = inject(&screen.image, &tree, cat, seed, &icons, &config)?;
        let changed = diff_pixels(&screen.image, &sample.image).len();
        let p = &sample.provenance;
        println!(
            "{cat:<20} bbox {:<22} target {:?} {} ({} px changed, {} draw(s))",
            sample.bbox.to_string(),
            p.target_kind,
            p.target_bounds,
            changed,
            p.attempts
        );
        let mut marked = sample.image.clone();
        outline(&mut marked, sample.bbox);
        sample.image.save_png(format!("{out}/{}.png", cat.name()))?;
        marked.save_png(format!("{out}/{}_boxed.png", cat.name()))?;
    }
    println!("images in {out}");
    Ok(())
}

//! Near-duplicate filtering over a set of screenshots that contains exact
//! copies and lightly edited copies.
//!
//! ```text
//! cargo run --release --example dedup_screens
//! ```

use displaybug::dedup::{cosine_sim, filter_duplicates, Descriptor, LayoutHistogram, DEFAULT_THRESHOLD};
use displaybug::imaging::{paste_block, Color};
use displaybug::mockui::mock_screen;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut items = Vec::new();
    for i in 0..30u64 {
        items.push((format!("screen_{i:02}"), mock_screen(100 + i, 270, 480).image));
    }
    // five exact copies and five with a small badge painted on
    for i in 0..5 {
        items.push((format!("copy_of_{i:02}"), items[i].1.clone()));
        let mut edited = items[i + 10].1.clone();
        paste_block(&mut edited, 230, 10, 24, 24, Color::new(220, 30, 30));
        items.push((format!("badge_on_{:02}", i + 10), edited));
    }

    let d = LayoutHistogram::default();
    let sim = cosine_sim(&d.describe(&items[10].1), &d.describe(&items[31].1))?;
    println!("similarity of screen_10 and its badged copy: {sim:.4}");

    let report = filter_duplicates(&items, DEFAULT_THRESHOLD, 42, &d)?;
    println!("kept {} of {}", report.kept.len(), items.len());
    for r in &report.removed {
        println!("  removed {:<12} ~ {:<12} sim {:.4}", r.id, r.blocked_by, r.similarity);
    }
    Ok(())
}

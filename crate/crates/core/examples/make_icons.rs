//! Writes the bundled broken-image icons as PNGs, e.g. to seed an `--icons`
//! directory you can then edit or extend.
//!
//! ```text
//! cargo run --example make_icons -- assets/icons
//! ```

use displaybug::icons::builtin_icons;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "assets/icons".into());
    std::fs::create_dir_all(&dir)?;
    for icon in builtin_icons() {
        let path = std::path::Path::new(&dir).join(format!("{}.png", icon.id));
        icon.image.save(&path)?;
        println!("{}", path.display());
    }
    Ok(())
}

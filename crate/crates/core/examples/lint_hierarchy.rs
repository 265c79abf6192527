//! Static checks on view hierarchies: overlapping components and null text.
//!
//! ```text
//! cargo run --example lint_hierarchy -- [hierarchy.json ...]
//! ```

use displaybug::hierarchy::parse_hierarchy;
use displaybug::lint::{classify, FindingRecord, LintConfig};

const SAMPLE: &str = r#"{
  "activity": { "root": {
    "class": "android.widget.FrameLayout", "bounds": [0, 0, 400, 300], "visibility": "visible",
    "children": [
      { "class": "androidx.appcompat.widget.Toolbar", "bounds": [0, 0, 400, 50],
        "children": [
          { "class": "android.widget.TextView", "bounds": [10, 10, 200, 40], "text": "Title" },
          { "class": "android.widget.ImageButton", "bounds": [180, 10, 220, 40] } ] },
      { "class": "android.widget.TextView", "bounds": [10, 60, 210, 90], "text": "Price" },
      { "class": "android.widget.TextView", "bounds": [150, 70, 390, 100], "text": "Free shipping" },
      { "class": "android.widget.ImageView", "bounds": [10, 120, 110, 220] },
      { "class": "android.widget.Button", "bounds": [90, 200, 250, 240], "text": "Buy" },
      { "class": "android.widget.TextView", "bounds": [10, 250, 200, 280], "text": "null" },
      { "class": "android.widget.TextView", "bounds": [210, 250, 390, 280], "text": null }
    ] } }
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let paths: Vec<String> = std::env::args().skip(1).collect();
    let docs: Vec<(String, String)> = if paths.is_empty() {
        vec![("sample".into(), SAMPLE.into())]
    } else {
        paths
            .iter()
            .map(|p| Ok((p.clone(), std::fs::read_to_string(p)?)))
            .collect::<std::io::Result<_>>()?
    };
    for (name, json) in docs {
        let tree = parse_hierarchy(&json, (1440, 2560))?;
        for (label, cfg) in [("default", LintConfig::default()), ("strict", LintConfig::strict())] {
            let c = classify(&tree, &cfg);
            println!("{name} [{label}]: {:?}, {} finding(s)", c.label, c.findings.len());
            for f in &c.findings {
                println!("  {}", serde_json::to_string(&FindingRecord::new(&name, &tree, f))?);
            }
        }
    }
    Ok(())
}

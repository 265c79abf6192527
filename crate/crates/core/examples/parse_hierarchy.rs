//! Parses a view hierarchy and lists the components an injector could target.
//!
//! ```text
//! cargo run --example parse_hierarchy -- screen.json [WIDTH HEIGHT]
//! ```
//!
//! Without arguments a synthetic screen is used.

use displaybug::hierarchy::{collect_targets, parse_hierarchy, ComponentKind, NodeText, TargetConfig};
use displaybug::mockui::mock_screen;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (json, dims) = match args.as_slice() {
        [] => {
            let s = mock_screen(3, 360, 640);
            (s.hierarchy, s.image.dims())
        }
        [path, w, h, ..] => (std::fs::read_to_string(path)?, (w.parse()?, h.parse()?)),
        [path, ..] => (std::fs::read_to_string(path)?, (1440, 2560)),
    };
    let tree = parse_hierarchy(&json, dims)?;
    println!("{} nodes ({} skipped) on a {}x{} canvas", tree.len(), tree.skipped(), dims.0, dims.1);

    for (_, node) in tree.nodes() {
        let short = node.class_name.rsplit('.').next().unwrap_or(&node.class_name);
        let text = match &node.text {
            NodeText::Value(t) => format!(" {t:?}"),
            NodeText::Null => " <null>".into(),
            NodeText::Absent => String::new(),
        };
        let hidden = if node.visible { "" } else { " (hidden)" };
        println!("{:indent$}{short} {}{text}{hidden}", "", node.bounds, indent = 2 * node.depth);
    }

    let all = ComponentKind::ALL.into_iter().collect();
    println!("\ntargets:");
    for t in collect_targets(&tree, &all, &TargetConfig::default()) {
        println!("  {:<9} {:<22} at {}", format!("{:?}", t.kind), t.bounds.to_string(), tree.path(t.node));
    }
    Ok(())
}

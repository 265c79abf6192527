//! Builds a small labeled dataset from a synthetic corpus.
//!
//! ```text
//! cargo run --release --example build_dataset -- [OUT_DIR] [SCREENS] [COUNT]
//! ```

use std::time::Instant;

use displaybug::mockui::write_mock_corpus;
use displaybug::pipeline::{audit_manifest, generate_dataset, GenerateConfig, PipelineError};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args
        .next()
        .unwrap_or_else(|| std::env::temp_dir().join("displaybug_dataset").display().to_string());
    let screens: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(60);
    let count: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(12);

    let out = std::path::PathBuf::from(out);
    let corpus = out.with_extension("corpus");
    write_mock_corpus(&corpus, screens, 7, 360, 640)?;

    let t = Instant::now();
    let config = GenerateConfig::new(&corpus, &out, count, 7);
    let manifest = match generate_dataset(&config) {
        Ok(m) => m,
        Err(PipelineError::Shortfall { missing, manifest, .. }) => {
            eprintln!("short of the requested count: {missing:?}");
            *manifest
        }
        Err(e) => return Err(e.into()),
    };
    println!("generated in {:.2?}", t.elapsed());
    for (cat, s) in &manifest.stats {
        println!(
            "{cat:<22} kept {:>4}  generated {:>4}  duplicates {:>3}  failed {:>3}",
            s.kept, s.generated, s.duplicates_removed, s.failed_attempts
        );
    }
    let audit = audit_manifest(&manifest, Some(&out));
    for (cat, a) in &audit.per_category {
        println!("{cat:<22} splits {:?}", a.splits);
    }
    if audit.is_clean() {
        println!("manifest audit: ok ({} entries) -> {}", audit.entries, out.display());
    } else {
        for p in &audit.problems {
            println!("audit: {p}");
        }
    }
    Ok(())
}

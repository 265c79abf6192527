//! Command-line front end.
//!
//! Every flag can also come from a config file (`--config FILE`, TOML, or
//! JSON when the extension is `.json`) holding one table per subcommand with
//! the flag names as keys. Flags given on the command line win.
//!
//! ```toml
//! [generate]
//! corpus = "rico/"
//! out = "dataset/"
//! count = 1000
//! categories = "component_occlusion,null_value"
//! seed = 7
//!
//! [evaluate]
//! iou = 0.5
//! ```
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use crate::annotations::{read_predictions, CocoDataset};
use crate::dedup::{filter_duplicates, LayoutHistogram, DEFAULT_THRESHOLD};
use crate::hierarchy::{parse_hierarchy, ViewTree};
use crate::imaging::Raster;
use crate::inject::IssueCategory;
use crate::lint::{lint, FindingRecord, LintConfig};
use crate::metrics::{evaluate, MatchParams};
use crate::pipeline::{
    audit_manifest, generate_dataset, split_dataset, split_seed, write_annotations, DatasetManifest, GenerateConfig,
    PipelineError, SplitRatios,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "displaybug", version, about = "Synthesize and evaluate UI display-issue datasets")]
pub struct Cli {
    /// TOML or JSON file with per-subcommand defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inject issues into a corpus and write a paired, split dataset.
    Generate(GenerateArgs),
    /// Find near-duplicate screenshots in a directory.
    Dedup(DedupArgs),
    /// Reassign train/val/test splits of a generated dataset.
    Split(SplitArgs),
    /// Statically check view hierarchies for overlapping or null text.
    Lint(LintArgs),
    /// Score detector output against COCO ground truth.
    Evaluate(EvaluateArgs),
    /// Summarize and audit a dataset manifest.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct GenerateArgs {
    /// Directory of screenshot + hierarchy pairs sharing a file stem.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Buggy samples per category.
    #[arg(long)]
    pub count: Option<usize>,
    /// Comma-separated category names or ids (default: all four).
    #[arg(long)]
    pub categories: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory of broken-image icon PNGs (default: bundled set).
    #[arg(long)]
    pub icons: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub ratios: Option<String>,
    /// Hierarchy coordinate space as WxH when it differs from the screenshots.
    #[arg(long)]
    pub hierarchy_size: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DedupArgs {
    /// Directory of PNG/JPEG images.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SplitArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub ratios: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct LintArgs {
    /// A hierarchy JSON file or a directory of them.
    #[arg(long)]
    pub hierarchy: Option<PathBuf>,
    /// Disable the leaf/ancestor/toolbar noise filters.
    #[arg(long)]
    #[serde(default)]
    pub strict: bool,
    /// Write JSON lines here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EvaluateArgs {
    /// COCO dataset JSON with ground truth.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// COCO results JSON.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    #[arg(long)]
    pub iou: Option<f64>,
    #[arg(long)]
    pub conf: Option<f64>,
    /// Write the full JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ReportArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    generate: GenerateArgs,
    #[serde(default)]
    dedup: DedupArgs,
    #[serde(default)]
    split: SplitArgs,
    #[serde(default)]
    lint: LintArgs,
    #[serde(default)]
    evaluate: EvaluateArgs,
    #[serde(default)]
    report: ReportArgs,
}

fn load_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

macro_rules! merge {
    ($cli:expr, $file:expr; $($field:ident),*) => {
        $( if $cli.$field.is_none() { $cli.$field = $file.$field.take(); } )*
    };
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required --{flag}")))
}

fn parse_categories(s: &str) -> Result<Vec<IssueCategory>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<u32>()
                .ok()
                .and_then(IssueCategory::from_coco_id)
                .or_else(|| p.parse().ok())
                .ok_or_else(|| CliError::Usage(format!("unknown category {p:?}")))
        })
        .collect()
}

fn parse_size(s: &str) -> Result<(u32, u32), CliError> {
    s.split_once(['x', 'X'])
        .and_then(|(w, h)| Some((w.trim().parse().ok()?, h.trim().parse().ok()?)))
        .filter(|&(w, h)| w > 0 && h > 0)
        .ok_or_else(|| CliError::Usage(format!("bad size {s:?}, expected WxH")))
}

fn parse_ratios(s: Option<String>) -> Result<SplitRatios, CliError> {
    s.map_or(Ok(SplitRatios::default()), |r| r.parse().map_err(|e: PipelineError| CliError::Usage(e.to_string())))
}

fn check_threshold(name: &str, v: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be within [0, 1], got {v}")))
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| data(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let mut file = match &cli.config {
        Some(p) => load_config(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Generate(mut a) => {
            merge!(a, file.generate; corpus, out, count, categories, seed, icons, threshold, ratios, hierarchy_size);
            cmd_generate(a)
        }
        Command::Dedup(mut a) => {
            merge!(a, file.dedup; input, threshold, seed, out);
            cmd_dedup(a)
        }
        Command::Split(mut a) => {
            merge!(a, file.split; manifest, ratios, seed);
            cmd_split(a)
        }
        Command::Lint(mut a) => {
            merge!(a, file.lint; hierarchy, out);
            a.strict |= file.lint.strict;
            cmd_lint(a)
        }
        Command::Evaluate(mut a) => {
            merge!(a, file.evaluate; gt, pred, iou, conf, out);
            cmd_evaluate(a)
        }
        Command::Report(mut a) => {
            merge!(a, file.report; manifest);
            cmd_report(a)
        }
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<(), CliError> {
    let mut cfg = GenerateConfig::new(
        required(a.corpus, "corpus")?,
        required(a.out, "out")?,
        required(a.count, "count")?,
        a.seed.unwrap_or(0),
    );
    if let Some(c) = a.categories {
        cfg.categories = parse_categories(&c)?;
        if cfg.categories.is_empty() {
            return Err(CliError::Usage("--categories is empty".into()));
        }
    }
    cfg.icons = a.icons;
    cfg.dedup_threshold = check_threshold("threshold", a.threshold.unwrap_or(DEFAULT_THRESHOLD))?;
    cfg.ratios = parse_ratios(a.ratios)?;
    cfg.hierarchy_dims = a.hierarchy_size.as_deref().map(parse_size).transpose()?;
    let manifest = generate_dataset(&cfg).map_err(data)?;
    for (cat, s) in &manifest.stats {
        println!(
            "{cat:<20} kept {:>6}  generated {:>6}  duplicates {:>5}",
            s.kept, s.generated, s.duplicates_removed
        );
    }
    println!("wrote {}", cfg.out.join("manifest.json").display());
    Ok(())
}

fn cmd_dedup(a: DedupArgs) -> Result<(), CliError> {
    let dir = required(a.input, "input")?;
    let threshold = check_threshold("threshold", a.threshold.unwrap_or(DEFAULT_THRESHOLD))?;
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| data(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .is_some_and(|e| ["png", "jpg", "jpeg"].contains(&e.to_string_lossy().to_ascii_lowercase().as_str()))
        })
        .collect();
    paths.sort();
    let items = paths
        .iter()
        .map(|p| {
            let id = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
            Raster::load(p).map(|r| (id, r)).map_err(|e| data(format!("{}: {e}", p.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let report = filter_duplicates(&items, threshold, a.seed.unwrap_or(0), &LayoutHistogram::default()).map_err(data)?;
    eprintln!("kept {} of {}, removed {}", report.kept.len(), items.len(), report.removed.len());
    let text = serde_json::to_string_pretty(&report).map_err(data)? + "\n";
    write_or_print(a.out.as_deref(), &text)
}

fn cmd_split(a: SplitArgs) -> Result<(), CliError> {
    let path = required(a.manifest, "manifest")?;
    let ratios = parse_ratios(a.ratios)?;
    let manifest = DatasetManifest::read(&path).map_err(data)?;
    let seed = a.seed.map_or(manifest.split_seed, split_seed);
    let manifest = split_dataset(manifest, ratios, seed).map_err(data)?;
    let root = path.parent().unwrap_or(Path::new("."));
    write_annotations(&manifest, root).map_err(data)?;
    manifest.write(&path).map_err(data)?;
    print_report(&manifest, root);
    Ok(())
}

/// Parses a hierarchy, taking the canvas size from a same-stem screenshot
/// when one exists and from the root bounds otherwise.
pub fn load_hierarchy(path: &Path) -> Result<ViewTree, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let wrap = |e| data(format!("{}: {e}", path.display()));
    let image_dims = ["png", "jpg", "jpeg"]
        .iter()
        .find_map(|ext| image::image_dimensions(path.with_extension(ext)).ok());
    match image_dims {
        Some(dims) => parse_hierarchy(&text, dims).map_err(wrap),
        None => {
            let loose = parse_hierarchy(&text, (u32::MAX, u32::MAX)).map_err(wrap)?;
            let b = loose.node(loose.root()).bounds;
            let dims = (b.x2.clamp(1, i64::from(u32::MAX)) as u32, b.y2.clamp(1, i64::from(u32::MAX)) as u32);
            parse_hierarchy(&text, dims).map_err(wrap)
        }
    }
}

fn cmd_lint(a: LintArgs) -> Result<(), CliError> {
    let target = required(a.hierarchy, "hierarchy")?;
    let files: Vec<PathBuf> = if target.is_dir() {
        let mut v: Vec<_> = std::fs::read_dir(&target)
            .map_err(|e| data(format!("{}: {e}", target.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        v.sort();
        v
    } else {
        vec![target]
    };
    let cfg = if a.strict { LintConfig::strict() } else { LintConfig::default() };
    let mut out = String::new();
    let (mut buggy, mut failed) = (0usize, 0usize);
    for f in &files {
        let id = f.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let tree = match load_hierarchy(f) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("warning: {e}");
                failed += 1;
                continue;
            }
        };
        let findings = lint(&tree, &cfg);
        buggy += usize::from(!findings.is_empty());
        for finding in &findings {
            out += &serde_json::to_string(&FindingRecord::new(&id, &tree, finding)).map_err(data)?;
            out.push('\n');
        }
    }
    write_or_print(a.out.as_deref(), &out)?;
    eprintln!("{} hierarchies, {buggy} flagged, {failed} unreadable", files.len());
    if failed > 0 && failed == files.len() {
        return Err(CliError::Data("no hierarchy could be parsed".into()));
    }
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let params = MatchParams {
        iou_threshold: check_threshold("iou", a.iou.unwrap_or(0.5))?,
        conf_threshold: check_threshold("conf", a.conf.unwrap_or(0.5))?,
    };
    let (gt_path, pred_path) = (required(a.gt, "gt")?, required(a.pred, "pred")?);
    let gt = CocoDataset::read(gt_path).map_err(data)?;
    let preds = read_predictions(pred_path).map_err(data)?;
    let report = evaluate(&gt.truth(), &preds, &params);
    print!("{}", report.to_table());
    if let Some(out) = a.out {
        let text = serde_json::to_string_pretty(&report).map_err(data)? + "\n";
        write_or_print(Some(&out), &text)?;
    }
    Ok(())
}

fn print_report(manifest: &DatasetManifest, root: &Path) -> bool {
    let audit = audit_manifest(manifest, Some(root));
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{:<20} {:>7} {:>7} {:>7} {:>7} {:>7}", "category", "pairs", "train", "val", "test", "dups");
    let cats: BTreeSet<IssueCategory> = audit.per_category.keys().chain(manifest.stats.keys()).copied().collect();
    for cat in cats {
        let a = audit.per_category.get(&cat).cloned().unwrap_or_default();
        let split = |s| a.splits.get(&s).copied().unwrap_or(0);
        let dups = manifest.stats.get(&cat).map_or(0, |s| s.duplicates_removed);
        let _ = writeln!(
            stdout,
            "{cat:<20} {:>7} {:>7} {:>7} {:>7} {:>7}",
            a.buggy,
            split(crate::pipeline::Split::Train),
            split(crate::pipeline::Split::Val),
            split(crate::pipeline::Split::Test),
            dups
        );
    }
    for p in &audit.problems {
        let _ = writeln!(stdout, "problem: {p}");
    }
    audit.is_clean()
}

fn cmd_report(a: ReportArgs) -> Result<(), CliError> {
    let path = required(a.manifest, "manifest")?;
    let manifest = DatasetManifest::read(&path).map_err(data)?;
    if print_report(&manifest, path.parent().unwrap_or(Path::new("."))) {
        Ok(())
    } else {
        Err(CliError::Data("manifest audit failed".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categories_by_name_or_id() {
        assert_eq!(
            parse_categories("1, null_value").unwrap(),
            vec![IssueCategory::ComponentOcclusion, IssueCategory::NullValue]
        );
        assert!(parse_categories("7").is_err());
        assert!(parse_categories("blurry").is_err());
    }

    #[test]
    fn sizes() {
        assert_eq!(parse_size("1440x2560").unwrap(), (1440, 2560));
        assert!(parse_size("0x5").is_err());
        assert!(parse_size("12").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut file: FileConfig = toml::from_str("[evaluate]\niou = 0.7\nconf = 0.3\n").unwrap();
        let mut a = EvaluateArgs {
            iou: Some(0.5),
            ..EvaluateArgs::default()
        };
        merge!(a, file.evaluate; gt, pred, iou, conf, out);
        assert_eq!(a.iou, Some(0.5));
        assert_eq!(a.conf, Some(0.3));
    }

    #[test]
    fn unknown_config_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("[generate]\ncuont = 3\n").is_err());
        assert!(toml::from_str::<FileConfig>("[bogus]\n").is_err());
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run(["displaybug", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["displaybug", "evaluate", "--pred", "x.json"]), EXIT_USAGE);
        assert_eq!(run(["displaybug", "split", "--manifest", "m.json", "--ratios", "8:1"]), EXIT_USAGE);
    }
}

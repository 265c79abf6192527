//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use displaybug::annotations::{CocoDataset, VocAnnotation, VocObject};
use displaybug::dedup::{filter_duplicates, Descriptor, LayoutHistogram};
use displaybug::geometry::{BoxF, Bounds};
use displaybug::hierarchy::parse_hierarchy;
use displaybug::icons::builtin_icons;
use displaybug::imaging::Raster;
use displaybug::inject::{inject, InjectConfig, IssueCategory};
use displaybug::lint::{classify, LintConfig};
use displaybug::metrics::{classification_metrics, iou, match_boxes, ClassScores, Label, MatchParams, Prediction};
use displaybug::mockui::{mock_screen, write_mock_corpus};
use displaybug::pipeline::{
    audit_manifest, generate_dataset, split_dataset, DatasetManifest, GenerateConfig, ManifestEntry, Split,
    SplitRatios,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn determinism(scratch: &Path) -> Outcome {
    let corpus = scratch.join("corpus");
    write_mock_corpus(&corpus, 50, 2024, 360, 640).map_err(|e| e.to_string())?;
    let mut times = Vec::new();
    let mut outs = Vec::new();
    for run in 0..2 {
        let out = scratch.join(format!("run{run}"));
        let t = Instant::now();
        let manifest = generate_dataset(&GenerateConfig::new(&corpus, &out, 10, 7)).map_err(|e| e.to_string())?;
        times.push(t.elapsed());
        let audit = audit_manifest(&manifest, Some(&out));
        ensure(audit.is_clean(), || format!("audit: {:?}", audit.problems))?;
        for (cat, a) in &audit.per_category {
            ensure(a.buggy == 10 && a.clean == 10, || format!("{cat}: {}:{}", a.buggy, a.clean))?;
        }
        ensure(audit.per_category.len() == 4, || "missing categories".into())?;
        outs.push(out);
    }
    let files = common::walk(&outs[0]);
    ensure(files == common::walk(&outs[1]), || "file lists differ".into())?;
    let pngs = files.iter().filter(|f| f.extension().is_some_and(|e| e == "png")).count();
    let xmls = files.iter().filter(|f| f.extension().is_some_and(|e| e == "xml")).count();
    ensure(pngs == 80 && xmls == 40, || format!("{pngs} png, {xmls} xml"))?;
    for f in &files {
        let a = std::fs::read(outs[0].join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(outs[1].join(f)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{} differs", f.display()))?;
    }
    let slowest = times.iter().max().copied().unwrap_or_default();
    ensure(slowest < Duration::from_secs(120), || format!("run took {slowest:.1?}"))?;
    Ok(format!(
        "{} files byte-identical across runs ({pngs} png, {xmls} xml); slowest run {slowest:.2?}",
        files.len()
    ))
}

fn injection_sweep() -> Outcome {
    const PER_CATEGORY: usize = 250;
    let icons = builtin_icons();
    let config = InjectConfig::default();
    let sizes = [(360u32, 640u32), (540, 960), (720, 1280)];
    let mut report = Vec::new();
    let mut violations = Vec::new();
    for cat in IssueCategory::ALL {
        let outcomes: Vec<Result<Vec<String>, String>> = (0..PER_CATEGORY as u64)
            .into_par_iter()
            .map(|i| {
                let (w, h) = sizes[i as usize % sizes.len()];
                let screen_seed = 10_000 + i;
                let screen = mock_screen(screen_seed, w, h);
                let tree = parse_hierarchy(&screen.hierarchy, (w, h)).map_err(|e| e.to_string())?;
                let seed = i.wrapping_mul(0x9E37_79B9) ^ u64::from(cat.coco_id());
                let sample =
                    inject(&screen.image, &tree, cat, seed, &icons, &config).map_err(|e| format!("screen {screen_seed}: {e}"))?;
                Ok(sample_violations(&screen.image, &sample.image, sample.bbox, sample.provenance.target_bounds, cat)
                    .into_iter()
                    .map(|v| format!("{cat} screen {screen_seed}: {v}"))
                    .collect())
            })
            .collect();
        let mut ok = 0;
        for o in outcomes {
            match o {
                Ok(v) if v.is_empty() => ok += 1,
                Ok(v) => violations.extend(v),
                Err(e) => violations.push(format!("{cat} generation failed: {e}")),
            }
        }
        report.push(format!("{}={ok}", cat.name()));
    }
    ensure(violations.is_empty(), || {
        format!("{} violation(s), first: {}", violations.len(), violations[..violations.len().min(3)].join("; "))
    })?;
    Ok(format!("{} samples, all invariants hold ({})", 4 * PER_CATEGORY, report.join(", ")))
}

fn sample_violations(before: &Raster, after: &Raster, bbox: Bounds, target: Bounds, cat: IssueCategory) -> Vec<String> {
    let mut v = Vec::new();
    let (w, h) = before.dims();
    if after.dims() != (w, h) {
        v.push("image size changed".to_string());
        return v;
    }
    if !(bbox.x1 >= 0 && bbox.y1 >= 0 && bbox.x2 <= i64::from(w) && bbox.y2 <= i64::from(h)) {
        v.push(format!("bbox {bbox} outside {w}x{h}"));
    }
    if (bbox.x2 - bbox.x1) * (bbox.y2 - bbox.y1) <= 0 {
        v.push(format!("bbox {bbox} has no area"));
    }
    if matches!(cat, IssueCategory::ComponentOcclusion | IssueCategory::MissingImage) && bbox != target {
        v.push(format!("bbox {bbox} != component {target}"));
    }
    let inside = |b: &Bounds, x: i64, y: i64| x >= b.x1 && x < b.x2 && y >= b.y1 && y < b.y2;
    let (a, b) = (before.as_image().as_raw(), after.as_image().as_raw());
    let mut stray = 0usize;
    for (i, (pa, pb)) in a.chunks_exact(3).zip(b.chunks_exact(3)).enumerate() {
        if pa != pb {
            let (x, y) = ((i as u32 % w) as i64, (i as u32 / w) as i64);
            if !inside(&bbox, x, y) && !inside(&target, x, y) {
                stray += 1;
            }
        }
    }
    if stray > 0 {
        v.push(format!("{stray} changed pixel(s) outside target and bbox"));
    }
    v
}

/// Intersection and union areas by splitting the plane at every edge
/// coordinate and summing covered cells.
fn cell_areas(a: &BoxF, b: &BoxF) -> (f64, f64) {
    let mut xs = [a.x1, a.x2, b.x1, b.x2];
    let mut ys = [a.y1, a.y2, b.y1, b.y2];
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let covers = |r: &BoxF, x: f64, y: f64| x > r.x1 && x < r.x2 && y > r.y1 && y < r.y2;
    let (mut inter, mut union) = (0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            let (cw, ch) = (xs[i + 1] - xs[i], ys[j + 1] - ys[j]);
            if cw <= 0.0 || ch <= 0.0 {
                continue;
            }
            let (cx, cy) = ((xs[i] + xs[i + 1]) / 2.0, (ys[j] + ys[j + 1]) / 2.0);
            let (ia, ib) = (covers(a, cx, cy), covers(b, cx, cy));
            if ia && ib {
                inter += cw * ch;
            }
            if ia || ib {
                union += cw * ch;
            }
        }
    }
    (inter, union)
}

fn grid_iou(a: &BoxF, b: &BoxF, step: f64) -> f64 {
    let x0 = a.x1.min(b.x1);
    let y0 = a.y1.min(b.y1);
    let nx = ((a.x2.max(b.x2) - x0) / step).ceil() as usize;
    let ny = ((a.y2.max(b.y2) - y0) / step).ceil() as usize;
    let inside = |r: &BoxF, x: f64, y: f64| x >= r.x1 && x < r.x2 && y >= r.y1 && y < r.y2;
    let (mut both, mut any) = (0u64, 0u64);
    for j in 0..ny {
        let y = y0 + (j as f64 + 0.5) * step;
        for i in 0..nx {
            let x = x0 + (i as f64 + 0.5) * step;
            let (ia, ib) = (inside(a, x, y), inside(b, x, y));
            both += u64::from(ia && ib);
            any += u64::from(ia || ib);
        }
    }
    if any == 0 {
        0.0
    } else {
        both as f64 / any as f64
    }
}

fn iou_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let rect = |rng: &mut ChaCha8Rng| {
        let (x, y) = (rng.gen_range(0.0..12.0), rng.gen_range(0.0..12.0));
        BoxF::from_xywh(x, y, rng.gen_range(2.0..10.0), rng.gen_range(2.0..10.0))
    };
    let pairs: Vec<(BoxF, BoxF)> = (0..500)
        .map(|k| {
            let a = rect(&mut rng);
            let b = match k % 5 {
                // nested, shifted copy, or independent
                0 => BoxF::from_xywh(a.x1 + 0.5, a.y1 + 0.5, (a.width() - 1.0).max(0.5), (a.height() - 1.0).max(0.5)),
                1 => BoxF::from_xywh(a.x1 + rng.gen_range(-3.0..3.0), a.y1, a.width(), a.height()),
                _ => rect(&mut rng),
            };
            (a, b)
        })
        .collect();
    let (grid_max, analytic_max) = pairs
        .par_iter()
        .map(|(a, b)| {
            let got = iou(a, b);
            let (inter, union) = cell_areas(a, b);
            let analytic = if union > 0.0 { inter / union } else { 0.0 };
            ((got - grid_iou(a, b, 0.05)).abs(), (got - analytic).abs())
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
    ensure(grid_max <= 2e-2, || format!("grid max diff {grid_max:.3e}"))?;
    ensure(analytic_max <= 1e-12, || format!("analytic max diff {analytic_max:.3e}"))?;
    Ok(format!("500 pairs: max |diff| vs 0.05-px grid {grid_max:.2e}, vs cell decomposition {analytic_max:.2e}"))
}

fn pred(category: IssueCategory, b: BoxF, confidence: f64) -> Prediction {
    Prediction {
        image_id: 1,
        category,
        bbox: b,
        confidence,
    }
}

/// Straightforward greedy matcher used as a cross-check.
fn reference_counts(preds: &[Prediction], gts: &[(IssueCategory, BoxF)], p: &MatchParams) -> BTreeMap<IssueCategory, (u64, u64, u64)> {
    let mut out: BTreeMap<IssueCategory, (u64, u64, u64)> = BTreeMap::new();
    let mut order: Vec<usize> = (0..preds.len()).filter(|&i| preds[i].confidence > p.conf_threshold).collect();
    order.sort_by(|&i, &j| preds[j].confidence.total_cmp(&preds[i].confidence).then(i.cmp(&j)));
    let mut taken = vec![false; gts.len()];
    for i in order {
        let pr = &preds[i];
        let mut best: Option<(usize, f64)> = None;
        for (g, (c, gb)) in gts.iter().enumerate() {
            if *c != pr.category || taken[g] {
                continue;
            }
            let v = iou(&pr.bbox, gb);
            if v >= p.iou_threshold && best.is_none_or(|(_, bv)| v > bv) {
                best = Some((g, v));
            }
        }
        let e = out.entry(pr.category).or_default();
        match best {
            Some((g, _)) => {
                taken[g] = true;
                e.0 += 1;
            }
            None => e.1 += 1,
        }
    }
    for (g, (c, _)) in gts.iter().enumerate() {
        if !taken[g] {
            out.entry(*c).or_default().2 += 1;
        }
    }
    out
}

fn matching_fixtures() -> Outcome {
    use IssueCategory::*;
    let params = MatchParams::default();
    let gt = BoxF::from_xywh(0.0, 0.0, 10.0, 10.0);
    let totals = |c: &displaybug::metrics::CategoryCounts| {
        c.values().fold((0, 0, 0), |acc, b| (acc.0 + b.tp, acc.1 + b.fp, acc.2 + b.fn_))
    };

    let single = [pred(NullValue, BoxF::from_xywh(0.0, 0.0, 10.0, 6.0), 0.9)];
    ensure((iou(&single[0].bbox, &gt) - 0.6).abs() < 1e-12, || "fixture IoU is not 0.6".into())?;
    let c = match_boxes(&single, &[(NullValue, gt)], &params);
    ensure(totals(&c) == (1, 0, 0), || format!("single: {:?}", totals(&c)))?;

    let redundant = [
        pred(NullValue, BoxF::from_xywh(0.0, 0.0, 10.0, 9.0), 0.9),
        pred(NullValue, BoxF::from_xywh(1.0, 0.0, 10.0, 10.0), 0.8),
    ];
    let c = match_boxes(&redundant, &[(NullValue, gt)], &params);
    ensure(totals(&c) == (1, 1, 0), || format!("redundant: {:?}", totals(&c)))?;

    let at_cut = [pred(NullValue, gt, 0.5)];
    let c = match_boxes(&at_cut, &[(NullValue, gt)], &params);
    ensure(totals(&c) == (0, 0, 1), || format!("conf 0.5: {:?}", totals(&c)))?;

    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let rbox = |rng: &mut ChaCha8Rng| BoxF::from_xywh(rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0), rng.gen_range(3.0..12.0), rng.gen_range(3.0..12.0));
    for case in 0..20 {
        let gts: Vec<(IssueCategory, BoxF)> = (0..rng.gen_range(0..5))
            .map(|_| (IssueCategory::ALL[rng.gen_range(0..4)], rbox(&mut rng)))
            .collect();
        let mut preds: Vec<Prediction> = Vec::new();
        for _ in 0..rng.gen_range(0..7) {
            let (cat, b) = if !gts.is_empty() && rng.gen_bool(0.7) {
                let (c, g) = gts[rng.gen_range(0..gts.len())];
                let j = rng.gen_range(-2.0..2.0);
                (c, BoxF::from_xywh(g.x1 + j, g.y1 - j / 2.0, g.width(), g.height()))
            } else {
                (IssueCategory::ALL[rng.gen_range(0..4)], rbox(&mut rng))
            };
            // coarse confidences make ties and exact-cut values likely
            preds.push(pred(cat, b, f64::from(rng.gen_range(0..=10u8)) / 10.0));
        }
        let got = match_boxes(&preds, &gts, &params);
        let expect = reference_counts(&preds, &gts, &params);
        for cat in IssueCategory::ALL {
            let b = got.get(&cat).copied().unwrap_or_default();
            let n_gt = gts.iter().filter(|(c, _)| *c == cat).count() as u64;
            let n_surv = preds.iter().filter(|p| p.category == cat && p.confidence > 0.5).count() as u64;
            ensure(b.tp + b.fn_ == n_gt, || format!("case {case} {cat}: TP+FN {} != |GT| {n_gt}", b.tp + b.fn_))?;
            ensure(b.tp + b.fp == n_surv, || format!("case {case} {cat}: TP+FP {} != survivors {n_surv}", b.tp + b.fp))?;
            let r = expect.get(&cat).copied().unwrap_or_default();
            ensure((b.tp, b.fp, b.fn_) == r, || format!("case {case} {cat}: {:?} vs reference {r:?}", (b.tp, b.fp, b.fn_)))?;
        }
    }
    Ok("3 fixtures exact (redundant case FP=1), 20 random cases satisfy both identities".into())
}

fn metrics_identities() -> Outcome {
    let s = ClassScores::from_counts(837, 993, 1000);
    let mut actual = vec![Label::Buggy; 1000];
    actual.extend(vec![Label::Clean; 400]);
    let mut predicted = vec![Label::Buggy; 837];
    predicted.extend(vec![Label::Clean; 163]);
    predicted.extend(vec![Label::Buggy; 156]);
    predicted.extend(vec![Label::Clean; 244]);
    let (from_labels, confusion) = classification_metrics(&predicted, &actual).map_err(|e| e.to_string())?;
    ensure((confusion.tp, confusion.fp, confusion.fn_) == (837, 156, 163), || format!("{confusion:?}"))?;
    for (name, v) in [("counts", s), ("labels", from_labels)] {
        let (p, r) = (format!("{:.3}", v.precision), format!("{:.3}", v.recall));
        ensure(p == "0.843" && r == "0.837", || format!("{name}: precision {p}, recall {r}"))?;
    }
    Ok(format!("precision {:.3}, recall {:.3}, f1 {:.3}", s.precision, s.recall, s.f1))
}

fn naive_cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn dedup_postcondition() -> Outcome {
    let originals: Vec<(String, Raster)> = (0..160u64)
        .into_par_iter()
        .map(|i| (format!("orig_{i:03}"), mock_screen(50_000 + i, 270, 480).image))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut picks: Vec<usize> = (0..160).collect();
    for i in 0..40 {
        let j = rng.gen_range(i..160);
        picks.swap(i, j);
    }
    let mut items = originals.clone();
    let mut group: HashMap<String, usize> = HashMap::new();
    for &k in &picks[..40] {
        items.push((format!("dup_of_{k:03}"), originals[k].1.clone()));
        group.insert(format!("dup_of_{k:03}"), k);
        group.insert(format!("orig_{k:03}"), k);
    }
    let d = LayoutHistogram::default();
    let report = filter_duplicates(&items, 0.8, 9, &d).map_err(|e| e.to_string())?;
    let again = filter_duplicates(&items, 0.8, 9, &d).map_err(|e| e.to_string())?;
    ensure(report == again, || "reports differ under the same seed".into())?;

    let by_id: HashMap<&str, &Raster> = items.iter().map(|(id, r)| (id.as_str(), r)).collect();
    let kept_vecs: Vec<Vec<f64>> = report.kept.iter().map(|id| d.describe(by_id[id.as_str()]).values().to_vec()).collect();
    let mut worst = f64::MIN;
    for i in 0..kept_vecs.len() {
        for j in 0..i {
            worst = worst.max(naive_cos(&kept_vecs[i], &kept_vecs[j]));
        }
    }
    ensure(worst <= 0.8, || format!("kept pair with similarity {worst:.4}"))?;
    let mut survivors: HashMap<usize, usize> = HashMap::new();
    for id in &report.kept {
        if let Some(&g) = group.get(id) {
            *survivors.entry(g).or_default() += 1;
        }
    }
    ensure(survivors.values().all(|&n| n <= 1), || "an exact duplicate pair survived together".into())?;
    ensure(report.removed.len() >= 40, || format!("only {} removed", report.removed.len()))?;
    Ok(format!(
        "200 in, {} kept, {} removed; no exact pair kept together; max kept similarity {worst:.4}",
        report.kept.len(),
        report.removed.len()
    ))
}

fn split_exactness() -> Outcome {
    let mut entries = Vec::with_capacity(80_000);
    for cat in IssueCategory::ALL {
        for k in 0..10_000 {
            let id = format!("{}_{k:05}", cat.name());
            let clean = format!("{id}_clean");
            let buggy = ManifestEntry {
                sample_id: id.clone(),
                image_path: format!("images/{id}.png"),
                annotation_path: Some(format!("annotations/{id}.xml")),
                category: Some(cat),
                label: Label::Buggy,
                split: Split::Train,
                pair_id: clean.clone(),
                source_id: format!("src_{k}"),
                seed: k,
                width: 1440,
                height: 2560,
                bbox: Some(Bounds::new(10, 10, 100, 60)),
                provenance: None,
            };
            entries.push(ManifestEntry {
                sample_id: clean,
                image_path: format!("images/{id}_clean.png"),
                annotation_path: None,
                category: None,
                label: Label::Clean,
                pair_id: id,
                bbox: None,
                ..buggy.clone()
            });
            entries.push(buggy);
        }
    }
    let manifest = DatasetManifest {
        master_seed: 1,
        dedup_threshold: 0.8,
        ratios: SplitRatios::default(),
        split_seed: 0,
        stats: BTreeMap::new(),
        entries,
    };
    let m = split_dataset(manifest, SplitRatios::default(), 77).map_err(|e| e.to_string())?;
    let audit = audit_manifest(&m, None);
    ensure(audit.is_clean(), || format!("audit: {:?}", &audit.problems[..audit.problems.len().min(3)]))?;
    let splits: HashMap<&str, Split> = m.entries.iter().map(|e| (e.sample_id.as_str(), e.split)).collect();
    let mut tally: BTreeMap<(IssueCategory, Split), usize> = BTreeMap::new();
    for e in m.entries.iter().filter(|e| e.label == Label::Buggy) {
        ensure(splits[e.pair_id.as_str()] == e.split, || format!("{} separated from its pair", e.sample_id))?;
        *tally.entry((e.category.unwrap(), e.split)).or_default() += 1;
    }
    for cat in IssueCategory::ALL {
        let got = (tally[&(cat, Split::Train)], tally[&(cat, Split::Val)], tally[&(cat, Split::Test)]);
        ensure(got == (8000, 1000, 1000), || format!("{cat}: {got:?}"))?;
    }
    Ok("4 x 10000 pairs -> 8000/1000/1000 per category, every pair co-located".into())
}

fn lint_fixtures() -> Outcome {
    let dir = common::fixture("lint");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    let (mut tp, mut fp, mut fn_, mut tn) = (0u32, 0u32, 0u32, 0u32);
    let mut wrong = Vec::new();
    for f in &files {
        let name = f.file_stem().unwrap().to_string_lossy().into_owned();
        let expected_buggy = name.starts_with("buggy_");
        let tree = parse_hierarchy(&std::fs::read_to_string(f).map_err(|e| e.to_string())?, (1440, 2560))
            .map_err(|e| format!("{name}: {e}"))?;
        let buggy = classify(&tree, &LintConfig::default()).label == Label::Buggy;
        match (buggy, expected_buggy) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
        if buggy != expected_buggy {
            wrong.push(name);
        }
    }
    ensure(files.len() == 20 && tp + fn_ == 10, || format!("{} fixtures, {} buggy", files.len(), tp + fn_))?;
    let precision = f64::from(tp) / f64::from(tp + fp).max(1.0);
    let recall = f64::from(tp) / f64::from(tp + fn_).max(1.0);
    ensure(precision == 1.0 && recall == 1.0, || format!("P {precision:.2} R {recall:.2}; wrong: {wrong:?}"))?;
    Ok(format!("20 hierarchies: TP {tp} FP {fp} FN {fn_} TN {tn}; precision {precision:.2}, recall {recall:.2}"))
}

fn annotation_round_trip(scratch: &Path) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut coco = CocoDataset::new();
    let mut expected = Vec::new();
    for i in 0..200 {
        let (w, h) = (rng.gen_range(50..3000u32), rng.gen_range(50..3000u32));
        let x1 = rng.gen_range(0..i64::from(w) - 1);
        let y1 = rng.gen_range(0..i64::from(h) - 1);
        let b = Bounds::new(x1, y1, rng.gen_range(x1 + 1..=i64::from(w)), rng.gen_range(y1 + 1..=i64::from(h)));
        let cat = IssueCategory::ALL[i % 4];
        let voc = VocAnnotation {
            folder: "images".into(),
            filename: format!("s{i}.png"),
            width: w,
            height: h,
            objects: vec![VocObject {
                name: cat.name().into(),
                bndbox: b,
            }],
        };
        let back = VocAnnotation::from_xml(&voc.to_xml()).map_err(|e| e.to_string())?;
        ensure(back == voc, || format!("VOC round trip changed {b}"))?;
        coco.push_image(&format!("s{i}.png"), (w, h), &[(cat, b)]);
        expected.push((cat, b));
    }
    let path = scratch.join("round_trip_coco.json");
    coco.write(&path).map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    common::check_coco(&text)?;
    let back = CocoDataset::read(&path).map_err(|e| e.to_string())?;
    let got: Vec<(IssueCategory, Bounds)> = back
        .annotations
        .iter()
        .map(|a| (IssueCategory::from_coco_id(a.category_id).unwrap(), a.bounds()))
        .collect();
    ensure(got == expected, || "COCO round trip changed bounds".into())?;

    // a known conversion
    let b = Bounds::new(100, 200, 300, 260);
    let xml = VocAnnotation {
        folder: String::new(),
        filename: "x.png".into(),
        width: 400,
        height: 400,
        objects: vec![VocObject {
            name: "null_value".into(),
            bndbox: b,
        }],
    }
    .to_xml();
    for tag in ["<xmin>100</xmin>", "<ymin>200</ymin>", "<xmax>300</xmax>", "<ymax>260</ymax>"] {
        ensure(xml.contains(tag), || format!("VOC missing {tag}"))?;
    }
    let mut one = CocoDataset::new();
    one.push_image("x.png", (400, 400), &[(IssueCategory::NullValue, b)]);
    let v: serde_json::Value = serde_json::to_value(&one).map_err(|e| e.to_string())?;
    ensure(v["annotations"][0]["bbox"] == serde_json::json!([100, 200, 200, 60]), || {
        format!("COCO bbox {}", v["annotations"][0]["bbox"])
    })?;

    // files produced by the generator, if the determinism run left them behind
    let mut generated = 0;
    let run = scratch.join("run0");
    if run.is_dir() {
        for f in ["coco.json", "coco_train.json", "coco_val.json", "coco_test.json"] {
            let text = std::fs::read_to_string(run.join(f)).map_err(|e| format!("{f}: {e}"))?;
            common::check_coco(&text).map_err(|e| format!("{f}: {e}"))?;
            generated += 1;
        }
    }
    Ok(format!(
        "200 VOC + 200 COCO boxes identical after parsing; independent COCO check passed on {} file(s)",
        1 + generated
    ))
}

fn main() {
    let scratch = tempfile::tempdir().expect("tempdir");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("determinism", Box::new(|| determinism(scratch.path()))),
        ("injection_invariant_sweep", Box::new(injection_sweep)),
        ("iou_oracle", Box::new(iou_oracle)),
        ("matching_fixtures", Box::new(matching_fixtures)),
        ("metrics_identities", Box::new(metrics_identities)),
        ("dedup_postcondition", Box::new(dedup_postcondition)),
        ("split_exactness", Box::new(split_exactness)),
        ("static_lint_fixtures", Box::new(lint_fixtures)),
        ("annotation_round_trip", Box::new(|| annotation_round_trip(scratch.path()))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>().map(String::as_str).or(p.downcast_ref::<&str>().copied()))));
        match outcome {
            Ok(detail) => println!("PASS {name:<27} {detail} [{:.1?}]", t.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name:<27} {detail} [{:.1?}]", t.elapsed());
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

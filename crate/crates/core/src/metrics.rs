//! Detection and localization metrics.
//!
//! Screenshot-level detection is scored with precision, recall and F1 over
//! buggy/clean labels. Localization uses single-threshold box precision (AP)
//! and recall (AR): predictions with confidence strictly above the cut are
//! matched greedily, highest confidence first, to same-category ground truth
//! at IoU >= the threshold. Extra predictions landing on an already matched
//! box are false positives.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::BoxF;
use crate::inject::IssueCategory;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("label lists are empty")]
    Empty,
    #[error("label lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Buggy,
    Clean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub image_id: u64,
    pub category: IssueCategory,
    pub bbox: BoxF,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchParams {
    pub iou_threshold: f64,
    pub conf_threshold: f64,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            conf_threshold: 0.5,
        }
    }
}

/// Intersection over union with continuous areas; 0 for disjoint or
/// degenerate boxes.
pub fn iou(a: &BoxF, b: &BoxF) -> f64 {
    let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl std::ops::AddAssign for BoxCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

/// Box counts for every category (all four always present).
pub type CategoryCounts = BTreeMap<IssueCategory, BoxCounts>;

fn empty_counts() -> CategoryCounts {
    IssueCategory::ALL.into_iter().map(|c| (c, BoxCounts::default())).collect()
}

/// Matches one image's predictions against its ground truth.
pub fn match_boxes(preds: &[Prediction], gts: &[(IssueCategory, BoxF)], params: &MatchParams) -> CategoryCounts {
    let mut survivors: Vec<&Prediction> = preds.iter().filter(|p| p.confidence > params.conf_threshold).collect();
    // stable: ties keep input order
    survivors.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));

    let mut matched = vec![false; gts.len()];
    let mut counts = empty_counts();
    for p in survivors {
        let best = gts
            .iter()
            .enumerate()
            .filter(|(i, (c, _))| !matched[*i] && *c == p.category)
            .map(|(i, (_, g))| (i, iou(&p.bbox, g)))
            .fold(None, |best: Option<(usize, f64)>, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            });
        let entry = counts.get_mut(&p.category).expect("all categories present");
        match best {
            Some((i, v)) if v >= params.iou_threshold => {
                matched[i] = true;
                entry.tp += 1;
            }
            _ => entry.fp += 1,
        }
    }
    for (i, (c, _)) in gts.iter().enumerate() {
        if !matched[i] {
            counts.get_mut(c).expect("all categories present").fn_ += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationScores {
    pub ap: Option<f64>,
    pub ar: Option<f64>,
    #[serde(flatten)]
    pub counts: BoxCounts,
}

pub fn ap_ar(c: &BoxCounts) -> LocalizationScores {
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    LocalizationScores {
        ap: ratio(c.tp, c.tp + c.fp),
        ar: ratio(c.tp, c.tp + c.fn_),
        counts: *c,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub per_category: BTreeMap<IssueCategory, LocalizationScores>,
    /// Unweighted mean over categories with a defined value.
    pub mean_ap: Option<f64>,
    pub mean_ar: Option<f64>,
    /// Categories left out of the means because the ratio was undefined.
    pub excluded_from_ap: Vec<IssueCategory>,
    pub excluded_from_ar: Vec<IssueCategory>,
}

/// Per-category AP/AR and their means.
pub fn localization_ap_ar(counts: &CategoryCounts) -> LocalizationReport {
    let per_category: BTreeMap<_, _> = counts.iter().map(|(c, k)| (*c, ap_ar(k))).collect();
    let mean = |f: fn(&LocalizationScores) -> Option<f64>| {
        let vals: Vec<f64> = per_category.values().filter_map(f).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let excluded = |f: fn(&LocalizationScores) -> Option<f64>| {
        per_category.iter().filter(|(_, s)| f(s).is_none()).map(|(c, _)| *c).collect()
    };
    LocalizationReport {
        mean_ap: mean(|s| s.ap),
        mean_ar: mean(|s| s.ar),
        excluded_from_ap: excluded(|s| s.ap),
        excluded_from_ar: excluded(|s| s.ar),
        per_category,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn add(&mut self, predicted: Label, actual: Label) {
        match (predicted, actual) {
            (Label::Buggy, Label::Buggy) => self.tp += 1,
            (Label::Buggy, Label::Clean) => self.fp += 1,
            (Label::Clean, Label::Buggy) => self.fn_ += 1,
            (Label::Clean, Label::Clean) => self.tn += 1,
        }
    }

    pub fn scores(&self) -> ClassScores {
        ClassScores::from_counts(self.tp, self.tp + self.fp, self.tp + self.fn_)
    }
}

/// Precision, recall and F1. Ratios with a zero denominator are 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassScores {
    /// From true positives, predicted positives and actual positives.
    pub fn from_counts(tp: u64, predicted_positive: u64, actual_positive: u64) -> Self {
        let ratio = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        Self::from_pr(ratio(tp, predicted_positive), ratio(tp, actual_positive))
    }

    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self { precision, recall, f1 }
    }
}

pub fn classification_metrics(predicted: &[Label], actual: &[Label]) -> Result<(ClassScores, Confusion), MetricsError> {
    if predicted.len() != actual.len() {
        return Err(MetricsError::LengthMismatch(predicted.len(), actual.len()));
    }
    if predicted.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut c = Confusion::default();
    for (p, a) in predicted.iter().zip(actual) {
        c.add(*p, *a);
    }
    Ok((c.scores(), c))
}

/// Buggy iff at least one prediction clears the confidence cut.
pub fn screenshot_label(preds: &[Prediction], conf_threshold: f64) -> Label {
    if preds.iter().any(|p| p.confidence > conf_threshold) {
        Label::Buggy
    } else {
        Label::Clean
    }
}

/// Ground truth for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTruth {
    pub image_id: u64,
    pub boxes: Vec<(IssueCategory, BoxF)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// Any-category screenshot labels.
    pub overall: ClassScores,
    pub overall_counts: Confusion,
    pub per_category: BTreeMap<IssueCategory, (ClassScores, Confusion)>,
    /// Unweighted mean of the per-category scores.
    pub average: ClassScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub params: MatchParams,
    pub images: usize,
    pub predictions: usize,
    pub predictions_above_cut: usize,
    /// Predictions whose image id is not in the ground truth; ignored.
    pub predictions_unknown_image: usize,
    pub classification: ClassificationReport,
    pub localization: LocalizationReport,
}

/// Scores predictions against per-image ground truth.
pub fn evaluate(truth: &[ImageTruth], preds: &[Prediction], params: &MatchParams) -> EvalReport {
    let mut by_image: HashMap<u64, Vec<Prediction>> = HashMap::new();
    for p in preds {
        by_image.entry(p.image_id).or_default().push(*p);
    }
    let known: std::collections::HashSet<u64> = truth.iter().map(|t| t.image_id).collect();
    let unknown = preds.iter().filter(|p| !known.contains(&p.image_id)).count();
    if unknown > 0 {
        log::warn!("{unknown} prediction(s) refer to images missing from the ground truth");
    }

    let mut box_counts = empty_counts();
    let mut overall = Confusion::default();
    let mut per_cat: BTreeMap<IssueCategory, Confusion> =
        IssueCategory::ALL.into_iter().map(|c| (c, Confusion::default())).collect();
    let empty = Vec::new();
    for t in truth {
        let ps = by_image.get(&t.image_id).unwrap_or(&empty);
        for (c, k) in match_boxes(ps, &t.boxes, params) {
            *box_counts.get_mut(&c).expect("all categories present") += k;
        }
        let actual = if t.boxes.is_empty() { Label::Clean } else { Label::Buggy };
        overall.add(screenshot_label(ps, params.conf_threshold), actual);
        for (c, conf) in per_cat.iter_mut() {
            let has_truth = t.boxes.iter().any(|(gc, _)| gc == c);
            let has_pred = ps.iter().any(|p| p.category == *c && p.confidence > params.conf_threshold);
            conf.add(
                if has_pred { Label::Buggy } else { Label::Clean },
                if has_truth { Label::Buggy } else { Label::Clean },
            );
        }
    }

    let per_category: BTreeMap<_, _> = per_cat.into_iter().map(|(c, k)| (c, (k.scores(), k))).collect();
    let n = per_category.len() as f64;
    let average = ClassScores {
        precision: per_category.values().map(|(s, _)| s.precision).sum::<f64>() / n,
        recall: per_category.values().map(|(s, _)| s.recall).sum::<f64>() / n,
        f1: per_category.values().map(|(s, _)| s.f1).sum::<f64>() / n,
    };
    EvalReport {
        params: *params,
        images: truth.len(),
        predictions: preds.len(),
        predictions_above_cut: preds.iter().filter(|p| p.confidence > params.conf_threshold).count(),
        predictions_unknown_image: unknown,
        classification: ClassificationReport {
            overall: overall.scores(),
            overall_counts: overall,
            per_category,
            average,
        },
        localization: localization_ap_ar(&box_counts),
    }
}

impl EvalReport {
    /// Plain-text summary table.
    pub fn to_table(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "  n/a".to_string(), |x| format!("{x:.3}"));
        let mut s = String::new();
        let _ = writeln!(
            s,
            "images: {}  predictions: {} ({} above conf {})  iou >= {}",
            self.images, self.predictions, self.predictions_above_cut, self.params.conf_threshold, self.params.iou_threshold
        );
        let _ = writeln!(
            s,
            "{:<22} {:>9} {:>9} {:>9} {:>7} {:>7} {:>6} {:>6} {:>6}",
            "category", "precision", "recall", "f1", "AP", "AR", "TP", "FP", "FN"
        );
        for (c, (cs, _)) in &self.classification.per_category {
            let l = &self.localization.per_category[c];
            let _ = writeln!(
                s,
                "{:<22} {:>9.3} {:>9.3} {:>9.3} {:>7} {:>7} {:>6} {:>6} {:>6}",
                c.name(),
                cs.precision,
                cs.recall,
                cs.f1,
                opt(l.ap),
                opt(l.ar),
                l.counts.tp,
                l.counts.fp,
                l.counts.fn_
            );
        }
        let a = &self.classification.average;
        let _ = writeln!(
            s,
            "{:<22} {:>9.3} {:>9.3} {:>9.3} {:>7} {:>7}",
            "average",
            a.precision,
            a.recall,
            a.f1,
            opt(self.localization.mean_ap),
            opt(self.localization.mean_ar)
        );
        let o = &self.classification.overall;
        let _ = writeln!(
            s,
            "{:<22} {:>9.3} {:>9.3} {:>9.3}",
            "screenshot (any)", o.precision, o.recall, o.f1
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CO: IssueCategory = IssueCategory::ComponentOcclusion;
    const MI: IssueCategory = IssueCategory::MissingImage;

    fn pred(cat: IssueCategory, b: BoxF, conf: f64) -> Prediction {
        Prediction {
            image_id: 1,
            category: cat,
            bbox: b,
            confidence: conf,
        }
    }

    fn bx(x1: f64, y1: f64, x2: f64, y2: f64) -> BoxF {
        BoxF { x1, y1, x2, y2 }
    }

    #[test]
    fn iou_examples() {
        let a = bx(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert!((iou(&a, &bx(5.0, 0.0, 15.0, 10.0)) - 50.0 / 150.0).abs() < 1e-15);
        assert_eq!(iou(&a, &bx(20.0, 0.0, 30.0, 10.0)), 0.0);
        let z = bx(3.0, 3.0, 3.0, 3.0);
        assert_eq!(iou(&z, &z), 0.0);
    }

    #[test]
    fn single_match() {
        let gt = bx(0.0, 0.0, 10.0, 10.0);
        // IoU 0.6: 6x10 overlap over 10x10 + 0
        let p = pred(CO, bx(0.0, 0.0, 6.0, 10.0), 0.9);
        assert!((iou(&p.bbox, &gt) - 0.6).abs() < 1e-12);
        let c = match_boxes(&[p], &[(CO, gt)], &MatchParams::default());
        assert_eq!(c[&CO], BoxCounts { tp: 1, fp: 0, fn_: 0 });
    }

    #[test]
    fn redundant_box_is_false_positive() {
        let gt = bx(0.0, 0.0, 10.0, 10.0);
        let preds = [pred(CO, bx(0.0, 0.0, 10.0, 9.0), 0.8), pred(CO, bx(1.0, 0.0, 10.0, 10.0), 0.9)];
        let c = match_boxes(&preds, &[(CO, gt)], &MatchParams::default());
        assert_eq!(c[&CO], BoxCounts { tp: 1, fp: 1, fn_: 0 });
    }

    #[test]
    fn confidence_cut_is_strict() {
        let gt = bx(0.0, 0.0, 10.0, 10.0);
        let c = match_boxes(&[pred(CO, gt, 0.5)], &[(CO, gt)], &MatchParams::default());
        assert_eq!(c[&CO], BoxCounts { tp: 0, fp: 0, fn_: 1 });
    }

    #[test]
    fn category_pools_are_separate() {
        let gt = bx(0.0, 0.0, 10.0, 10.0);
        let c = match_boxes(&[pred(MI, gt, 0.9)], &[(CO, gt)], &MatchParams::default());
        assert_eq!(c[&MI], BoxCounts { tp: 0, fp: 1, fn_: 0 });
        assert_eq!(c[&CO], BoxCounts { tp: 0, fp: 0, fn_: 1 });
    }

    #[test]
    fn ap_ar_values() {
        let s = ap_ar(&BoxCounts { tp: 8, fp: 2, fn_: 2 });
        assert_eq!((s.ap, s.ar), (Some(0.8), Some(0.8)));
        let z = ap_ar(&BoxCounts { tp: 0, fp: 0, fn_: 5 });
        assert_eq!((z.ap, z.ar), (None, Some(0.0)));
    }

    #[test]
    fn table_rows_by_hand() {
        let mut counts = empty_counts();
        counts.insert(CO, BoxCounts { tp: 503, fp: 497, fn_: 453 });
        counts.insert(IssueCategory::TextOverlap, BoxCounts { tp: 600, fp: 400, fn_: 400 });
        counts.insert(MI, BoxCounts { tp: 700, fp: 300, fn_: 300 });
        counts.insert(IssueCategory::NullValue, BoxCounts { tp: 0, fp: 0, fn_: 10 });
        let r = localization_ap_ar(&counts);
        assert_eq!(r.per_category[&CO].ap, Some(503.0 / 1000.0));
        assert_eq!(r.per_category[&CO].ar, Some(503.0 / 956.0));
        assert_eq!(r.excluded_from_ap, vec![IssueCategory::NullValue]);
        assert!(r.excluded_from_ar.is_empty());
        let mean_ap = (0.503 + 0.6 + 0.7) / 3.0;
        assert!((r.mean_ap.unwrap() - mean_ap).abs() < 1e-12);
        let mean_ar = (503.0 / 956.0 + 0.6 + 0.7 + 0.0) / 4.0;
        assert!((r.mean_ar.unwrap() - mean_ar).abs() < 1e-12);
    }

    #[test]
    fn classification_scores() {
        let s = ClassScores::from_counts(837, 993, 1000);
        assert_eq!(format!("{:.3}", s.precision), "0.843");
        assert_eq!(format!("{:.3}", s.recall), "0.837");
        let h = ClassScores::from_pr(0.84, 0.84);
        assert!((h.f1 - 0.84).abs() < 1e-12);
        assert_eq!(classification_metrics(&[], &[]), Err(MetricsError::Empty));
        assert_eq!(
            classification_metrics(&[Label::Buggy], &[]),
            Err(MetricsError::LengthMismatch(1, 0))
        );
        let (s, c) = classification_metrics(
            &[Label::Buggy, Label::Buggy, Label::Clean, Label::Clean],
            &[Label::Buggy, Label::Clean, Label::Buggy, Label::Clean],
        )
        .unwrap();
        assert_eq!(c, Confusion { tp: 1, fp: 1, fn_: 1, tn: 1 });
        assert_eq!(s.precision, 0.5);
    }

    #[test]
    fn screenshot_labels() {
        let b = bx(0.0, 0.0, 1.0, 1.0);
        assert_eq!(screenshot_label(&[], 0.5), Label::Clean);
        assert_eq!(screenshot_label(&[pred(CO, b, 0.5)], 0.5), Label::Clean);
        assert_eq!(screenshot_label(&[pred(CO, b, 0.51)], 0.5), Label::Buggy);
    }

    #[test]
    fn evaluate_end_to_end() {
        let truth = vec![
            ImageTruth {
                image_id: 1,
                boxes: vec![(MI, bx(0.0, 0.0, 10.0, 10.0))],
            },
            ImageTruth {
                image_id: 2,
                boxes: vec![],
            },
        ];
        let preds = vec![
            pred(MI, bx(0.0, 0.0, 10.0, 10.0), 0.9),
            Prediction {
                image_id: 2,
                ..pred(CO, bx(0.0, 0.0, 5.0, 5.0), 0.7)
            },
            Prediction {
                image_id: 99,
                ..pred(CO, bx(0.0, 0.0, 5.0, 5.0), 0.7)
            },
        ];
        let r = evaluate(&truth, &preds, &MatchParams::default());
        assert_eq!(r.predictions_unknown_image, 1);
        assert_eq!(r.classification.overall_counts, Confusion { tp: 1, fp: 1, fn_: 0, tn: 0 });
        assert_eq!(r.localization.per_category[&MI].ap, Some(1.0));
        assert_eq!(r.localization.per_category[&CO].ap, Some(0.0));
        assert!(r.to_table().contains("missing_image"));
    }

    fn arb_box() -> impl Strategy<Value = BoxF> {
        (0.0f64..100.0, 0.0f64..100.0, 0.1f64..50.0, 0.1f64..50.0).prop_map(|(x, y, w, h)| BoxF::from_xywh(x, y, w, h))
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded(a in arb_box(), b in arb_box()) {
            let v = iou(&a, &b);
            prop_assert_eq!(v, iou(&b, &a));
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn f1_bounded_by_min(p in 0.0f64..=1.0, r in 0.0f64..=1.0) {
            let s = ClassScores::from_pr(p, r);
            prop_assert!(s.f1 <= 2.0 * p.min(r) + 1e-12);
            prop_assert!((0.0..=1.0).contains(&s.f1));
        }

        #[test]
        fn monotone_confidence_map_keeps_counts(
            items in proptest::collection::vec((arb_box(), 0.0f64..1.0), 0..8),
            gts in proptest::collection::vec(arb_box(), 0..5),
        ) {
            let preds: Vec<_> = items.iter().map(|(b, c)| pred(CO, *b, *c)).collect();
            let gts: Vec<_> = gts.into_iter().map(|g| (CO, g)).collect();
            // sqrt preserves order but moves the 0.5 cut; map through 0.5 instead
            let warped: Vec<_> = preds.iter().map(|p| Prediction {
                confidence: if p.confidence > 0.5 { 0.5 + (p.confidence - 0.5).sqrt() * 0.5f64.sqrt() } else { p.confidence * p.confidence * 2.0 },
                ..*p
            }).collect();
            let params = MatchParams::default();
            prop_assert_eq!(match_boxes(&preds, &gts, &params), match_boxes(&warped, &gts, &params));
        }
    }
}

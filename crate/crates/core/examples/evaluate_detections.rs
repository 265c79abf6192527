//! Scores a handful of detector outputs against COCO ground truth, then does
//! the same through the COCO results file format.
//!
//! ```text
//! cargo run --example evaluate_detections
//! ```

use displaybug::annotations::{parse_predictions, CocoDataset, CocoResult};
use displaybug::geometry::{BoxF, Bounds};
use displaybug::inject::IssueCategory::*;
use displaybug::metrics::{evaluate, ClassScores, MatchParams, Prediction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut gt = CocoDataset::new();
    gt.push_image("a.png", (360, 640), &[(MissingImage, Bounds::new(20, 100, 120, 200))]);
    gt.push_image("b.png", (360, 640), &[(NullValue, Bounds::new(30, 300, 90, 320))]);
    gt.push_image("c.png", (360, 640), &[(TextOverlap, Bounds::new(40, 50, 200, 70))]);
    gt.push_image("d.png", (360, 640), &[]);

    let p = |image_id, category, x1, y1, x2, y2, confidence| Prediction {
        image_id,
        category,
        bbox: BoxF { x1, y1, x2, y2 },
        confidence,
    };
    let preds = vec![
        p(1, MissingImage, 22.0, 104.0, 118.0, 203.0, 0.97),
        p(1, MissingImage, 25.0, 98.0, 121.0, 199.0, 0.81), // redundant
        p(2, NullValue, 31.0, 301.0, 88.0, 321.0, 0.74),
        p(3, TextOverlap, 150.0, 50.0, 300.0, 70.0, 0.66), // poor overlap
        p(4, ComponentOcclusion, 0.0, 0.0, 50.0, 50.0, 0.42), // below the cut
    ];

    let report = evaluate(&gt.truth(), &preds, &MatchParams::default());
    print!("{}", report.to_table());

    // the same predictions, round-tripped through a results file
    let json = serde_json::to_string(&preds.iter().map(CocoResult::from_prediction).collect::<Vec<_>>())?;
    let again = evaluate(&gt.truth(), &parse_predictions(&json)?, &MatchParams::default());
    assert_eq!(again.localization, report.localization);

    let scores = ClassScores::from_counts(837, 993, 1000);
    println!("\n837 of 993 flagged, 1000 buggy: precision {:.3} recall {:.3}", scores.precision, scores.recall);
    Ok(())
}

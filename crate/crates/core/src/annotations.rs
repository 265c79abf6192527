//! Annotation formats: Pascal VOC XML per image, COCO dataset JSON, and
//! COCO results JSON for detector outputs.
//!
//! Boxes map directly: a [`Bounds`] `(x1, y1, x2, y2)` is written as VOC
//! `xmin/ymin/xmax/ymax` and as COCO `[x1, y1, x2 - x1, y2 - y1]`.

use std::collections::HashSet;
use std::path::Path;

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::geometry::{BoxF, Bounds};
use crate::inject::IssueCategory;
use crate::metrics::{ImageTruth, Prediction};

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid VOC XML: {0}")]
    Xml(String),
    #[error("schema error: {0}")]
    Schema(String),
}

fn read_file(path: &Path) -> Result<String, AnnotationError> {
    std::fs::read_to_string(path).map_err(|source| AnnotationError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), AnnotationError> {
    std::fs::write(path, contents).map_err(|source| AnnotationError::Io {
        path: path.display().to_string(),
        source,
    })
}

// ---------------------------------------------------------------- VOC

#[derive(Debug, Clone, PartialEq)]
pub struct VocObject {
    pub name: String,
    pub bndbox: Bounds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VocAnnotation {
    pub folder: String,
    pub filename: String,
    pub width: u32,
    pub height: u32,
    pub objects: Vec<VocObject>,
}

impl VocAnnotation {
    pub fn to_xml(&self) -> String {
        use quick_xml::escape::escape;
        let mut s = String::from("<annotation>\n");
        s += &format!("  <folder>{}</folder>\n", escape(self.folder.as_str()));
        s += &format!("  <filename>{}</filename>\n", escape(self.filename.as_str()));
        s += &format!(
            "  <size>\n    <width>{}</width>\n    <height>{}</height>\n    <depth>3</depth>\n  </size>\n",
            self.width, self.height
        );
        s += "  <segmented>0</segmented>\n";
        for o in &self.objects {
            s += "  <object>\n";
            s += &format!("    <name>{}</name>\n", escape(o.name.as_str()));
            s += "    <pose>Unspecified</pose>\n    <truncated>0</truncated>\n    <difficult>0</difficult>\n";
            s += &format!(
                "    <bndbox>\n      <xmin>{}</xmin>\n      <ymin>{}</ymin>\n      <xmax>{}</xmax>\n      <ymax>{}</ymax>\n    </bndbox>\n",
                o.bndbox.x1, o.bndbox.y1, o.bndbox.x2, o.bndbox.y2
            );
            s += "  </object>\n";
        }
        s += "</annotation>\n";
        s
    }

    pub fn from_xml(xml: &str) -> Result<Self, AnnotationError> {
        let mut reader = Reader::from_str(xml);
        reader.config_mut().trim_text(true);
        let mut path: Vec<String> = Vec::new();
        let mut ann = VocAnnotation {
            folder: String::new(),
            filename: String::new(),
            width: 0,
            height: 0,
            objects: Vec::new(),
        };
        let mut name = String::new();
        let mut coords: [Option<i64>; 4] = [None; 4];
        let xml_err = |e: &dyn std::fmt::Display| AnnotationError::Xml(e.to_string());
        loop {
            match reader.read_event().map_err(|e| xml_err(&e))? {
                Event::Start(e) => {
                    let tag = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                    if tag == "object" {
                        name.clear();
                        coords = [None; 4];
                    }
                    path.push(tag);
                }
                Event::End(_) => {
                    if path.pop().as_deref() == Some("object") {
                        let [Some(x1), Some(y1), Some(x2), Some(y2)] = coords else {
                            return Err(AnnotationError::Xml("object without complete bndbox".into()));
                        };
                        ann.objects.push(VocObject {
                            name: name.clone(),
                            bndbox: Bounds::new(x1, y1, x2, y2),
                        });
                    }
                }
                Event::Text(t) => {
                    let text = t.unescape().map_err(|e| xml_err(&e))?.into_owned();
                    let int = |s: &str| -> Result<i64, AnnotationError> {
                        let v: f64 = s.trim().parse().map_err(|_| AnnotationError::Xml(format!("not a number: {s:?}")))?;
                        Ok(v.floor() as i64)
                    };
                    let p: Vec<&str> = path.iter().map(String::as_str).collect();
                    match p.as_slice() {
                        ["annotation", "folder"] => ann.folder = text,
                        ["annotation", "filename"] => ann.filename = text,
                        ["annotation", "size", "width"] => ann.width = int(&text)?.max(0) as u32,
                        ["annotation", "size", "height"] => ann.height = int(&text)?.max(0) as u32,
                        ["annotation", "object", "name"] => name = text,
                        ["annotation", "object", "bndbox", field] => {
                            let slot = match *field {
                                "xmin" => 0,
                                "ymin" => 1,
                                "xmax" => 2,
                                "ymax" => 3,
                                _ => continue,
                            };
                            coords[slot] = Some(int(&text)?);
                        }
                        _ => {}
                    }
                }
                Event::Eof => break,
                _ => {}
            }
        }
        if !path.is_empty() {
            return Err(AnnotationError::Xml("unclosed elements".into()));
        }
        Ok(ann)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, AnnotationError> {
        Self::from_xml(&read_file(path.as_ref())?)
    }
}

// ---------------------------------------------------------------- COCO

fn ser_coords<S: Serializer>(v: &[f64; 4], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(4))?;
    for x in v {
        if x.fract() == 0.0 && x.abs() < 9.0e15 {
            seq.serialize_element(&(*x as i64))?;
        } else {
            seq.serialize_element(x)?;
        }
    }
    seq.end()
}

fn ser_number<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        s.serialize_i64(*v as i64)
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoAnnotation {
    pub id: u64,
    pub image_id: u64,
    pub category_id: u32,
    /// `[x, y, w, h]`
    #[serde(serialize_with = "ser_coords")]
    pub bbox: [f64; 4],
    #[serde(serialize_with = "ser_number")]
    pub area: f64,
    #[serde(default)]
    pub iscrowd: u8,
}

impl CocoAnnotation {
    pub fn bounds(&self) -> Bounds {
        let [x, y, w, h] = self.bbox;
        Bounds::new(x.floor() as i64, y.floor() as i64, (x + w).floor() as i64, (y + h).floor() as i64)
    }

    pub fn box_f(&self) -> BoxF {
        let [x, y, w, h] = self.bbox;
        BoxF::from_xywh(x, y, w, h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoCategory {
    pub id: u32,
    pub name: String,
    #[serde(default)]
    pub supercategory: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CocoDataset {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub info: Option<serde_json::Value>,
    pub images: Vec<CocoImage>,
    pub annotations: Vec<CocoAnnotation>,
    pub categories: Vec<CocoCategory>,
}

/// The four issue categories with their fixed ids.
pub fn coco_categories() -> Vec<CocoCategory> {
    IssueCategory::ALL
        .iter()
        .map(|c| CocoCategory {
            id: c.coco_id(),
            name: c.name().to_string(),
            supercategory: "ui_display_issue".to_string(),
        })
        .collect()
}

pub fn coco_bbox(b: &Bounds) -> [f64; 4] {
    [b.x1 as f64, b.y1 as f64, b.width() as f64, b.height() as f64]
}

impl CocoDataset {
    pub fn new() -> Self {
        Self {
            info: None,
            images: Vec::new(),
            annotations: Vec::new(),
            categories: coco_categories(),
        }
    }

    /// Adds an image with its boxes; returns the image id.
    pub fn push_image(&mut self, file_name: &str, dims: (u32, u32), boxes: &[(IssueCategory, Bounds)]) -> u64 {
        let id = self.images.len() as u64 + 1;
        self.images.push(CocoImage {
            id,
            file_name: file_name.to_string(),
            width: dims.0,
            height: dims.1,
        });
        for (c, b) in boxes {
            self.annotations.push(CocoAnnotation {
                id: self.annotations.len() as u64 + 1,
                image_id: id,
                category_id: c.coco_id(),
                bbox: coco_bbox(b),
                area: b.area() as f64,
                iscrowd: 0,
            });
        }
        id
    }

    pub fn from_json(text: &str) -> Result<Self, AnnotationError> {
        let ds: CocoDataset = serde_json::from_str(text)?;
        ds.validate()?;
        Ok(ds)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, AnnotationError> {
        Self::from_json(&read_file(path.as_ref())?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), AnnotationError> {
        write_file(path.as_ref(), serde_json::to_string_pretty(self)? + "\n")
    }

    /// Unique ids, known category and image references, non-negative boxes.
    pub fn validate(&self) -> Result<(), AnnotationError> {
        let schema = |m: String| Err(AnnotationError::Schema(m));
        let mut image_ids = HashSet::new();
        for im in &self.images {
            if !image_ids.insert(im.id) {
                return schema(format!("duplicate image id {}", im.id));
            }
        }
        let cat_ids: HashSet<u32> = self.categories.iter().map(|c| c.id).collect();
        let mut ann_ids = HashSet::new();
        for a in &self.annotations {
            if !ann_ids.insert(a.id) {
                return schema(format!("duplicate annotation id {}", a.id));
            }
            if !image_ids.contains(&a.image_id) {
                return schema(format!("annotation {} refers to unknown image {}", a.id, a.image_id));
            }
            if !cat_ids.contains(&a.category_id) || IssueCategory::from_coco_id(a.category_id).is_none() {
                return schema(format!("annotation {} has unknown category {}", a.id, a.category_id));
            }
            if a.bbox.iter().any(|v| !v.is_finite()) || a.bbox[2] < 0.0 || a.bbox[3] < 0.0 {
                return schema(format!("annotation {} has invalid bbox {:?}", a.id, a.bbox));
            }
        }
        Ok(())
    }

    /// Per-image ground truth for evaluation; images without boxes are clean.
    pub fn truth(&self) -> Vec<ImageTruth> {
        let mut out: Vec<ImageTruth> = self
            .images
            .iter()
            .map(|im| ImageTruth {
                image_id: im.id,
                boxes: Vec::new(),
            })
            .collect();
        let index: std::collections::HashMap<u64, usize> =
            self.images.iter().enumerate().map(|(i, im)| (im.id, i)).collect();
        for a in &self.annotations {
            if let (Some(&i), Some(c)) = (index.get(&a.image_id), IssueCategory::from_coco_id(a.category_id)) {
                out[i].boxes.push((c, a.box_f()));
            }
        }
        out
    }
}

// ---------------------------------------------------------------- results

/// One detector output in COCO results format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoResult {
    pub image_id: u64,
    pub category_id: u32,
    pub bbox: [f64; 4],
    pub score: f64,
}

impl CocoResult {
    pub fn from_prediction(p: &Prediction) -> Self {
        Self {
            image_id: p.image_id,
            category_id: p.category.coco_id(),
            bbox: p.bbox.to_xywh(),
            score: p.confidence,
        }
    }

    pub fn to_prediction(&self) -> Result<Prediction, AnnotationError> {
        let bad = |m: String| AnnotationError::Schema(format!("image {}: {m}", self.image_id));
        let category = IssueCategory::from_coco_id(self.category_id)
            .ok_or_else(|| bad(format!("unknown category_id {}", self.category_id)))?;
        if !(0.0..=1.0).contains(&self.score) {
            return Err(bad(format!("score {} outside [0, 1]", self.score)));
        }
        let [x, y, w, h] = self.bbox;
        if self.bbox.iter().any(|v| !v.is_finite()) || w < 0.0 || h < 0.0 {
            return Err(bad(format!("invalid bbox {:?}", self.bbox)));
        }
        Ok(Prediction {
            image_id: self.image_id,
            category,
            bbox: BoxF::from_xywh(x, y, w, h),
            confidence: self.score,
        })
    }
}

pub fn parse_predictions(text: &str) -> Result<Vec<Prediction>, AnnotationError> {
    let raw: Vec<CocoResult> = serde_json::from_str(text)?;
    raw.iter().map(CocoResult::to_prediction).collect()
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>, AnnotationError> {
    parse_predictions(&read_file(path.as_ref())?)
}

pub fn write_predictions(path: impl AsRef<Path>, preds: &[Prediction]) -> Result<(), AnnotationError> {
    let raw: Vec<CocoResult> = preds.iter().map(CocoResult::from_prediction).collect();
    write_file(path.as_ref(), serde_json::to_string_pretty(&raw)? + "\n")
}

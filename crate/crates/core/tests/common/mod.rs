#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde_json::Value;

pub const CATEGORY_NAMES: [(u64, &str); 4] = [
    (1, "component_occlusion"),
    (2, "text_overlap"),
    (3, "missing_image"),
    (4, "null_value"),
];

/// Schema check for a COCO detection dataset written from scratch against
/// the public format description, using only untyped JSON.
pub fn check_coco(text: &str) -> Result<(), String> {
    let doc: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let obj = doc.as_object().ok_or("top level is not an object")?;
    let arr = |k: &str| obj.get(k).and_then(Value::as_array).ok_or(format!("missing array {k}"));
    let uint = |v: &Value, k: &str| v.get(k).and_then(Value::as_u64).ok_or(format!("{k} not a non-negative integer in {v}"));

    let mut cats = BTreeMap::new();
    for c in arr("categories")? {
        let id = uint(c, "id")?;
        let name = c.get("name").and_then(Value::as_str).ok_or("category without name")?;
        if cats.insert(id, name.to_string()).is_some() {
            return Err(format!("duplicate category id {id}"));
        }
    }
    let expected: BTreeMap<u64, String> = CATEGORY_NAMES.iter().map(|(i, n)| (*i, n.to_string())).collect();
    if cats != expected {
        return Err(format!("categories {cats:?}"));
    }

    let mut images = BTreeMap::new();
    for im in arr("images")? {
        let id = uint(im, "id")?;
        let w = uint(im, "width")?;
        let h = uint(im, "height")?;
        im.get("file_name").and_then(Value::as_str).ok_or("image without file_name")?;
        if w == 0 || h == 0 {
            return Err(format!("image {id} has zero size"));
        }
        if images.insert(id, (w as f64, h as f64)).is_some() {
            return Err(format!("duplicate image id {id}"));
        }
    }

    let mut ann_ids = HashSet::new();
    for a in arr("annotations")? {
        let id = uint(a, "id")?;
        if !ann_ids.insert(id) {
            return Err(format!("duplicate annotation id {id}"));
        }
        let img = uint(a, "image_id")?;
        let &(w, h) = images.get(&img).ok_or(format!("annotation {id} -> unknown image {img}"))?;
        let cat = uint(a, "category_id")?;
        if !cats.contains_key(&cat) {
            return Err(format!("annotation {id} -> unknown category {cat}"));
        }
        let b: Vec<f64> = a
            .get("bbox")
            .and_then(Value::as_array)
            .ok_or("bbox missing")?
            .iter()
            .map(|x| x.as_f64().ok_or("bbox entry not a number"))
            .collect::<Result<_, _>>()?;
        if b.len() != 4 || b[2] <= 0.0 || b[3] <= 0.0 || b[0] < 0.0 || b[1] < 0.0 || b[0] + b[2] > w || b[1] + b[3] > h {
            return Err(format!("annotation {id} bbox {b:?} invalid for {w}x{h}"));
        }
        let area = a.get("area").and_then(Value::as_f64).ok_or("area missing")?;
        if (area - b[2] * b[3]).abs() > 1e-9 {
            return Err(format!("annotation {id} area {area} != w*h"));
        }
        match a.get("iscrowd").and_then(Value::as_u64) {
            Some(0 | 1) => {}
            other => return Err(format!("annotation {id} iscrowd {other:?}")),
        }
    }
    Ok(())
}

/// All regular files under `root`, relative and sorted.
pub fn walk(root: &Path) -> Vec<PathBuf> {
    fn rec(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                rec(root, &p, out);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    let mut out = Vec::new();
    rec(root, root, &mut out);
    out.sort();
    out
}

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

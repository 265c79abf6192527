//! Rico-style view hierarchy parsing.
//!
//! A hierarchy document is either a bare node object, an object with a
//! `root` node, or a full Rico capture with `activity.root`. Nodes carry
//! `class`, `bounds` (`[x1, y1, x2, y2]`), `text`, `visibility` and/or
//! `visible-to-user`, and `children`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::geometry::Bounds;

#[derive(Debug, Error)]
pub enum HierarchyError {
    #[error("malformed hierarchy JSON at byte {offset}: {message}")]
    Json { offset: usize, message: String },
    #[error("hierarchy has no root node with bounds")]
    NoRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

/// The `text` field of a node: absent, JSON `null`, or a string.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NodeText {
    #[default]
    Absent,
    Null,
    Value(String),
}

impl NodeText {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            NodeText::Value(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewNode {
    pub class_name: String,
    /// Clamped to the screenshot.
    pub bounds: Bounds,
    pub text: NodeText,
    /// The node's own visibility flag.
    pub visible: bool,
    /// False when the node or any ancestor is invisible.
    pub displayed: bool,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub depth: usize,
    /// Index of this node among its parent's kept children.
    pub child_index: usize,
}

/// Parsed hierarchy. Nodes are stored in document (pre-)order.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewTree {
    nodes: Vec<ViewNode>,
    image_dims: (u32, u32),
    skipped: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Coordinate space the hierarchy was captured in. When set, bounds are
    /// rescaled to the screenshot size before clamping (Rico captures at
    /// 1440x2560 while its screenshots are 1080x1920).
    pub source_dims: Option<(u32, u32)>,
}

pub fn parse_hierarchy(json_text: &str, image_dims: (u32, u32)) -> Result<ViewTree, HierarchyError> {
    parse_hierarchy_with(json_text, image_dims, &ParseOptions::default())
}

pub fn parse_hierarchy_with(
    json_text: &str,
    image_dims: (u32, u32),
    opts: &ParseOptions,
) -> Result<ViewTree, HierarchyError> {
    let doc: Value = serde_json::from_str(json_text).map_err(|e| HierarchyError::Json {
        offset: byte_offset(json_text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let root = find_root(&doc).ok_or(HierarchyError::NoRoot)?;
    let mut builder = Builder {
        nodes: Vec::new(),
        skipped: 0,
        image_dims,
        scale: opts.source_dims.map(|(sw, sh)| {
            (
                f64::from(image_dims.0) / f64::from(sw.max(1)),
                f64::from(image_dims.1) / f64::from(sh.max(1)),
            )
        }),
    };
    builder.visit(root, None, true, 0, 0);
    if builder.nodes.is_empty() {
        return Err(HierarchyError::NoRoot);
    }
    if builder.skipped > 0 {
        log::warn!("hierarchy: skipped {} node(s) without usable bounds", builder.skipped);
    }
    Ok(ViewTree {
        nodes: builder.nodes,
        image_dims,
        skipped: builder.skipped,
    })
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

fn find_root(doc: &Value) -> Option<&Value> {
    let obj = doc.as_object()?;
    if let Some(root) = obj.get("activity").and_then(|a| a.get("root")) {
        return Some(root);
    }
    if let Some(root) = obj.get("root") {
        return Some(root);
    }
    Some(doc)
}

struct Builder {
    nodes: Vec<ViewNode>,
    skipped: usize,
    image_dims: (u32, u32),
    scale: Option<(f64, f64)>,
}

impl Builder {
    fn visit(&mut self, v: &Value, parent: Option<NodeId>, parent_displayed: bool, depth: usize, child_index: usize) {
        let Some(obj) = v.as_object() else {
            return;
        };
        let Some(raw) = obj.get("bounds").and_then(|b| self.read_bounds(b)) else {
            // the subtree goes with the node
            self.skipped += 1 + count_descendants(v);
            return;
        };
        let visible = read_visibility(obj);
        let id = NodeId(self.nodes.len());
        let displayed = parent_displayed && visible;
        self.nodes.push(ViewNode {
            class_name: obj.get("class").and_then(Value::as_str).unwrap_or_default().to_string(),
            bounds: raw.clamp_to(self.image_dims.0, self.image_dims.1),
            text: match obj.get("text") {
                None => NodeText::Absent,
                Some(Value::Null) => NodeText::Null,
                Some(Value::String(s)) => NodeText::Value(s.clone()),
                Some(other) => NodeText::Value(other.to_string()),
            },
            visible,
            displayed,
            parent,
            children: Vec::new(),
            depth,
            child_index,
        });
        if let Some(p) = parent {
            self.nodes[p.0].children.push(id);
        }
        if let Some(children) = obj.get("children").and_then(Value::as_array) {
            let mut kept = 0;
            for child in children {
                let before = self.nodes.len();
                self.visit(child, Some(id), displayed, depth + 1, kept);
                if self.nodes.len() > before {
                    kept += 1;
                }
            }
        }
    }

    fn read_bounds(&self, v: &Value) -> Option<Bounds> {
        let arr = v.as_array()?;
        if arr.len() != 4 {
            return None;
        }
        let mut c = [0f64; 4];
        for (slot, x) in c.iter_mut().zip(arr) {
            *slot = x.as_f64()?;
        }
        if let Some((sx, sy)) = self.scale {
            c = [c[0] * sx, c[1] * sy, c[2] * sx, c[3] * sy];
        }
        Some(Bounds::new(
            c[0].floor() as i64,
            c[1].floor() as i64,
            c[2].floor() as i64,
            c[3].floor() as i64,
        ))
    }
}

fn count_descendants(v: &Value) -> usize {
    v.get("children")
        .and_then(Value::as_array)
        .map(|cs| cs.iter().filter(|c| c.is_object()).map(|c| 1 + count_descendants(c)).sum())
        .unwrap_or(0)
}

fn read_visibility(obj: &serde_json::Map<String, Value>) -> bool {
    let by_flag = match obj.get("visibility") {
        Some(Value::String(s)) => s == "visible",
        _ => true,
    };
    let to_user = match obj.get("visible-to-user") {
        Some(Value::Bool(b)) => *b,
        _ => true,
    };
    by_flag && to_user
}

impl ViewTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of nodes dropped because they lacked bounds (including their subtrees).
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn image_dims(&self) -> (u32, u32) {
        self.image_dims
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &ViewNode {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &ViewNode)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i), n))
    }

    pub fn is_ancestor(&self, ancestor: NodeId, of: NodeId) -> bool {
        let mut cur = self.nodes[of.0].parent;
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.nodes[p.0].parent;
        }
        false
    }

    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.nodes[id.0].parent, |p| self.nodes[p.0].parent)
    }

    /// Child-index path from the root, e.g. `0/2/1`.
    pub fn path(&self, id: NodeId) -> String {
        let mut idx: Vec<usize> = std::iter::once(id)
            .chain(self.ancestors(id))
            .map(|n| self.nodes[n.0].child_index)
            .collect();
        idx.reverse();
        idx.iter().map(usize::to_string).collect::<Vec<_>>().join("/")
    }
}

/// Component kinds eligible for injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComponentKind {
    TextView,
    ImageView,
    Button,
    EditText,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 4] = [
        ComponentKind::TextView,
        ComponentKind::ImageView,
        ComponentKind::Button,
        ComponentKind::EditText,
    ];
}

/// Maps class names to component kinds. Rules are tried in order against the
/// final dotted segment of the class name; the first case-sensitive substring
/// hit wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMatcher {
    pub rules: Vec<(String, ComponentKind)>,
}

impl Default for ClassMatcher {
    fn default() -> Self {
        use ComponentKind::*;
        let rules = [
            ("AutoCompleteTextView", EditText),
            ("EditText", EditText),
            ("ImageButton", ImageView),
            ("FloatingActionButton", ImageView),
            ("ImageView", ImageView),
            ("Button", Button),
            ("TextView", TextView),
        ];
        Self {
            rules: rules.iter().map(|(s, k)| (s.to_string(), *k)).collect(),
        }
    }
}

impl ClassMatcher {
    pub fn kind_of(&self, class_name: &str) -> Option<ComponentKind> {
        let last = class_name.rsplit('.').next().unwrap_or(class_name);
        self.rules
            .iter()
            .find(|(pat, _)| last.contains(pat.as_str()))
            .map(|(_, k)| *k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TargetConfig {
    pub min_w: i64,
    pub min_h: i64,
    pub matcher: ClassMatcher,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self {
            min_w: 20,
            min_h: 12,
            matcher: ClassMatcher::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetComponent {
    pub node: NodeId,
    pub kind: ComponentKind,
    pub bounds: Bounds,
    pub text: Option<String>,
}

/// Displayed nodes of the requested kinds that meet the minimum size, in
/// document order.
pub fn collect_targets(tree: &ViewTree, kinds: &BTreeSet<ComponentKind>, config: &TargetConfig) -> Vec<TargetComponent> {
    let (w, h) = tree.image_dims();
    tree.nodes()
        .filter(|(_, n)| n.displayed)
        .filter_map(|(id, n)| {
            let kind = config.matcher.kind_of(&n.class_name)?;
            if !kinds.contains(&kind) {
                return None;
            }
            let bounds = n.bounds.clamp_to(w, h);
            if bounds.width() < config.min_w || bounds.height() < config.min_h {
                return None;
            }
            Some(TargetComponent {
                node: id,
                kind,
                bounds,
                text: n.text.as_str().map(str::to_string),
            })
        })
        .collect()
}

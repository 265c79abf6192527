//! Hierarchy-only display-issue detector.
//!
//! Flags intersecting components (occlusion), intersecting text views (text
//! overlap) and text views whose text is null. Ancestor/descendant pairs and
//! pairs under floating containers (toolbars, spinners, dialogs) are noise in
//! real hierarchies; both filters can be switched off with
//! [`LintConfig::strict`].

use serde::{Deserialize, Serialize};

use crate::geometry::{get_overlap, Bounds};
use crate::hierarchy::{ClassMatcher, ComponentKind, NodeId, NodeText, ViewTree};
use crate::metrics::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LintRule {
    Occlusion,
    TextOverlap,
    NullText,
}

/// How a null text was spelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullKind {
    /// `"text": null`
    JsonNull,
    /// `"text": "null"` in any letter case
    Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LintFinding {
    pub rule: LintRule,
    pub null_kind: Option<NullKind>,
    /// One node for null text, two (in document order) for pairwise rules.
    pub nodes: Vec<NodeId>,
    pub region: Bounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LintConfig {
    pub matcher: ClassMatcher,
    /// Only consider components without children for pairwise rules.
    pub leaves_only: bool,
    pub exclude_ancestors: bool,
    /// Class-name substrings; a pair is dropped when either node or one of
    /// its ancestors matches.
    pub suppress: Vec<String>,
    pub flag_json_null: bool,
    pub flag_literal_null: bool,
}

impl Default for LintConfig {
    fn default() -> Self {
        Self {
            matcher: ClassMatcher::default(),
            leaves_only: true,
            exclude_ancestors: true,
            suppress: vec!["Toolbar".into(), "Spinner".into(), "Dialog".into()],
            flag_json_null: true,
            flag_literal_null: true,
        }
    }
}

impl LintConfig {
    /// Every intersecting pair counts; no noise filtering.
    pub fn strict() -> Self {
        Self {
            leaves_only: false,
            exclude_ancestors: false,
            suppress: Vec::new(),
            ..Self::default()
        }
    }
}

pub fn lint(tree: &ViewTree, config: &LintConfig) -> Vec<LintFinding> {
    let candidates: Vec<(NodeId, ComponentKind)> = tree
        .nodes()
        .filter(|(_, n)| n.displayed && !n.bounds.is_empty())
        .filter_map(|(id, n)| config.matcher.kind_of(&n.class_name).map(|k| (id, k)))
        .collect();

    let suppressed = |id: NodeId| {
        std::iter::once(id)
            .chain(tree.ancestors(id))
            .any(|a| config.suppress.iter().any(|s| tree.node(a).class_name.contains(s.as_str())))
    };

    let mut findings = Vec::new();
    let pairwise: Vec<_> = candidates
        .iter()
        .filter(|(id, _)| !config.leaves_only || tree.node(*id).children.is_empty())
        .collect();
    for (i, &&(a, ka)) in pairwise.iter().enumerate() {
        for &&(b, kb) in &pairwise[i + 1..] {
            let Some(region) = get_overlap(&tree.node(a).bounds, &tree.node(b).bounds) else {
                continue;
            };
            if config.exclude_ancestors && (tree.is_ancestor(a, b) || tree.is_ancestor(b, a)) {
                continue;
            }
            if suppressed(a) || suppressed(b) {
                continue;
            }
            let rule = if ka == ComponentKind::TextView && kb == ComponentKind::TextView {
                LintRule::TextOverlap
            } else {
                LintRule::Occlusion
            };
            findings.push(LintFinding {
                rule,
                null_kind: None,
                nodes: vec![a, b],
                region,
            });
        }
    }

    for &(id, kind) in &candidates {
        if kind != ComponentKind::TextView {
            continue;
        }
        let null_kind = match &tree.node(id).text {
            NodeText::Null if config.flag_json_null => Some(NullKind::JsonNull),
            NodeText::Value(s) if config.flag_literal_null && s.trim().eq_ignore_ascii_case("null") => {
                Some(NullKind::Literal)
            }
            _ => None,
        };
        if let Some(k) = null_kind {
            findings.push(LintFinding {
                rule: LintRule::NullText,
                null_kind: Some(k),
                nodes: vec![id],
                region: tree.node(id).bounds,
            });
        }
    }
    findings
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: Label,
    pub findings: Vec<LintFinding>,
}

/// Buggy iff at least one finding.
pub fn classify(tree: &ViewTree, config: &LintConfig) -> Classification {
    let findings = lint(tree, config);
    Classification {
        label: if findings.is_empty() { Label::Clean } else { Label::Buggy },
        findings,
    }
}

/// One JSON line of lint output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingRecord {
    pub image_id: String,
    pub rule: LintRule,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sub_code: Option<NullKind>,
    pub region: Bounds,
    pub node_paths: Vec<String>,
}

impl FindingRecord {
    pub fn new(image_id: &str, tree: &ViewTree, f: &LintFinding) -> Self {
        Self {
            image_id: image_id.to_string(),
            rule: f.rule,
            sub_code: f.null_kind,
            region: f.region,
            node_paths: f.nodes.iter().map(|n| tree.path(*n)).collect(),
        }
    }
}

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Feature;

/// The bundled layout: letters in four groups plus a control group.
pub const DEFAULT_LAYOUT: &str = include_str!("../../assets/layout.json");

#[derive(Debug, thiserror::Error)]
pub enum LayoutError {
    #[error("layout is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

/// What a selected key does to the composer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyAction {
    #[serde(rename = "append")]
    AppendChar(char),
    Backspace,
    Space,
    Speak,
    #[serde(rename = "toggle")]
    ToggleFeature(Feature),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScanNode {
    Leaf { label: String, action: KeyAction },
    Group { label: String, children: Vec<ScanNode> },
}

impl ScanNode {
    pub fn label(&self) -> &str {
        match self {
            ScanNode::Leaf { label, .. } | ScanNode::Group { label, .. } => label,
        }
    }

    pub fn children(&self) -> &[ScanNode] {
        match self {
            ScanNode::Group { children, .. } => children,
            ScanNode::Leaf { .. } => &[],
        }
    }

    pub fn is_group(&self) -> bool {
        matches!(self, ScanNode::Group { .. })
    }

    /// Follows `path` (child indices from this node) and returns the node there.
    pub fn descend(&self, path: &[usize]) -> Option<&ScanNode> {
        path.iter().try_fold(self, |node, &i| node.children().get(i))
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            ScanNode::Leaf { .. } => 1,
            ScanNode::Group { children, .. } => children.iter().map(ScanNode::leaf_count).sum(),
        }
    }

    /// Child-index paths of every leaf, in depth-first order.
    pub fn leaf_paths(&self) -> Vec<Vec<usize>> {
        fn walk(node: &ScanNode, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            match node {
                ScanNode::Leaf { .. } => out.push(prefix.clone()),
                ScanNode::Group { children, .. } => {
                    for (i, c) in children.iter().enumerate() {
                        prefix.push(i);
                        walk(c, prefix, out);
                        prefix.pop();
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn to_json(&self) -> Value {
        match self {
            ScanNode::Leaf { label, action } => serde_json::json!({
                "label": label,
                "action": serde_json::to_value(action).expect("action serializes"),
            }),
            ScanNode::Group { label, children } => serde_json::json!({
                "label": label,
                "children": children.iter().map(ScanNode::to_json).collect::<Vec<_>>(),
            }),
        }
    }
}

/// Parses and validates a layout document. The root must be a group.
///
/// Groups are `{"label": .., "children": [..]}` with at least one child,
/// leaves are `{"label": .., "action": ..}` where the action is one of
/// `{"append": "a"}`, `"space"`, `"backspace"`, `"speak"` or
/// `{"toggle": "<feature>"}`.
pub fn load_layout(document: &str) -> Result<ScanNode, LayoutError> {
    let value: Value = serde_json::from_str(document)?;
    let root = parse_node(&value, "root")?;
    if !root.is_group() {
        return Err(LayoutError::Invalid {
            path: "root".into(),
            reason: "the root must be a group".into(),
        });
    }
    Ok(root)
}

fn parse_node(value: &Value, path: &str) -> Result<ScanNode, LayoutError> {
    let invalid = |reason: String| LayoutError::Invalid {
        path: path.to_string(),
        reason,
    };
    let obj = value
        .as_object()
        .ok_or_else(|| invalid("expected an object".into()))?;
    if let Some(key) = obj
        .keys()
        .find(|k| !matches!(k.as_str(), "label" | "children" | "action"))
    {
        return Err(invalid(format!("unexpected field `{key}`")));
    }
    let label = obj
        .get("label")
        .and_then(Value::as_str)
        .ok_or_else(|| invalid("missing string field `label`".into()))?
        .to_string();

    match (obj.get("children"), obj.get("action")) {
        (Some(_), Some(_)) => Err(invalid("a node cannot have both `children` and `action`".into())),
        (None, None) => Err(invalid("a node needs either `children` or `action`".into())),
        (Some(children), None) => {
            let list = children
                .as_array()
                .ok_or_else(|| invalid("`children` must be an array".into()))?;
            if list.is_empty() {
                return Err(invalid("group has no children".into()));
            }
            let children = list
                .iter()
                .enumerate()
                .map(|(i, c)| parse_node(c, &format!("{path}/{i}")))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ScanNode::Group { label, children })
        }
        (None, Some(action)) => {
            if let Some(s) = action.get("append").and_then(Value::as_str) {
                if s.chars().count() != 1 {
                    return Err(invalid(format!("`append` needs exactly one character, got {s:?}")));
                }
            }
            let action: KeyAction = serde_json::from_value(action.clone())
                .map_err(|e| invalid(format!("unknown action {action}: {e}")))?;
            Ok(ScanNode::Leaf { label, action })
        }
    }
}

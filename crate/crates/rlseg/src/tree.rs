//! Nested segmentation result: page, columns, text blocks, paragraphs,
//! lines, words, characters, all in page pixel coordinates.

use serde::{Deserialize, Serialize};

use crate::geom::Rect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Page,
    Column,
    Block,
    Paragraph,
    Line,
    Word,
    Character,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentNode {
    pub kind: NodeKind,
    pub rect: Rect,
    pub children: Vec<SegmentNode>,
}

impl SegmentNode {
    pub fn new(kind: NodeKind, rect: Rect) -> Self {
        SegmentNode {
            kind,
            rect,
            children: Vec::new(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        if self.children.is_empty() {
            1
        } else {
            self.children.iter().map(SegmentNode::leaf_count).sum()
        }
    }
}

/// The whole segmentation result; serializes as its root node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SegmentTree {
    pub root: SegmentNode,
}

impl SegmentTree {
    pub fn new(root: SegmentNode) -> Self {
        SegmentTree { root }
    }

    /// All rects of one kind, in document order.
    pub fn collect(&self, kind: NodeKind) -> Vec<Rect> {
        let mut out = Vec::new();
        fn walk(node: &SegmentNode, kind: NodeKind, out: &mut Vec<Rect>) {
            if node.kind == kind {
                out.push(node.rect);
            }
            for child in &node.children {
                walk(child, kind, out);
            }
        }
        walk(&self.root, kind, &mut out);
        out
    }

    pub fn lines(&self) -> Vec<Rect> {
        self.collect(NodeKind::Line)
    }

    pub fn node_count(&self) -> usize {
        fn walk(node: &SegmentNode) -> usize {
            1 + node.children.iter().map(walk).sum::<usize>()
        }
        walk(&self.root)
    }

    /// Checks the structural invariants: children lie inside their parent
    /// and siblings are ordered (columns in emission order are exempt from
    /// coordinate ordering, rows top-down, words/chars left-right).
    pub fn check_nesting(&self) -> Result<(), String> {
        fn walk(node: &SegmentNode) -> Result<(), String> {
            let mut prev: Option<&SegmentNode> = None;
            for child in &node.children {
                if !node.rect.contains(&child.rect) {
                    return Err(format!(
                        "{:?} {:?} escapes parent {:?} {:?}",
                        child.kind, child.rect, node.kind, node.rect
                    ));
                }
                if let Some(p) = prev {
                    let ordered = match child.kind {
                        NodeKind::Block | NodeKind::Paragraph | NodeKind::Line => {
                            p.rect.bottom < child.rect.top
                        }
                        NodeKind::Word | NodeKind::Character => p.rect.right < child.rect.left,
                        _ => true,
                    };
                    if !ordered {
                        return Err(format!("{:?} siblings out of order", child.kind));
                    }
                }
                prev = Some(child);
                walk(child)?;
            }
            Ok(())
        }
        walk(&self.root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serializes_nested_kind_rect_children() {
        let mut root = SegmentNode::new(NodeKind::Page, Rect::new(0, 9, 0, 9));
        root.children
            .push(SegmentNode::new(NodeKind::Column, Rect::new(0, 9, 0, 4)));
        let tree = SegmentTree::new(root);
        let json = serde_json::to_value(&tree).unwrap();
        assert_eq!(json["kind"], "page");
        assert_eq!(json["rect"]["bottom"], 9);
        assert_eq!(json["children"][0]["kind"], "column");
        let back: SegmentTree = serde_json::from_value(json).unwrap();
        assert_eq!(back, tree);
    }

    #[test]
    fn nesting_check_spots_escapes() {
        let mut root = SegmentNode::new(NodeKind::Page, Rect::new(0, 9, 0, 9));
        root.children
            .push(SegmentNode::new(NodeKind::Column, Rect::new(0, 12, 0, 4)));
        assert!(SegmentTree::new(root).check_nesting().is_err());
    }
}

//! Regression tree structures shared by both growth strategies.

use serde::{Deserialize, Serialize};

/// One node of a leaf-wise tree. Rows with `value <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split { feature: usize, threshold: f64, gain: f64, left: usize, right: usize },
    Leaf { weight: f64 },
}

/// Binary tree grown best-first; nodes live in an arena with the root at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafWiseTree {
    pub nodes: Vec<Node>,
}

impl LeafWiseTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { weight } => return *weight,
                Node::Split { feature, threshold, left, right, .. } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// One level of an oblivious tree: every node at this depth shares the
/// same feature and threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSplit {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Perfect binary tree where level `l` contributes bit `l` of the leaf
/// index: bit set when `value > threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricTree {
    pub levels: Vec<LevelSplit>,
    pub leaf_weights: Vec<f64>,
}

impl SymmetricTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut idx = 0usize;
        for (level, split) in self.levels.iter().enumerate() {
            if row[split.feature] > split.threshold {
                idx |= 1 << level;
            }
        }
        self.leaf_weights[idx]
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn n_splits(&self) -> usize {
        self.levels.len()
    }
}

/// A fitted tree in either growth style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RegressionTree {
    LeafWise(LeafWiseTree),
    Symmetric(SymmetricTree),
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            RegressionTree::LeafWise(t) => t.predict_row(row),
            RegressionTree::Symmetric(t) => t.predict_row(row),
        }
    }

    pub fn n_splits(&self) -> usize {
        match self {
            RegressionTree::LeafWise(t) => t.n_splits(),
            RegressionTree::Symmetric(t) => t.n_splits(),
        }
    }

    /// Adds each split's gain to `totals[feature]`.
    pub fn accumulate_gain(&self, totals: &mut [f64]) {
        match self {
            RegressionTree::LeafWise(t) => {
                for node in &t.nodes {
                    if let Node::Split { feature, gain, .. } = node {
                        totals[*feature] += *gain;
                    }
                }
            }
            RegressionTree::Symmetric(t) => {
                for level in &t.levels {
                    totals[level.feature] += level.gain;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leafwise_routing() {
        let tree = LeafWiseTree {
            nodes: vec![
                Node::Split { feature: 0, threshold: 1.0, gain: 1.0, left: 1, right: 2 },
                Node::Leaf { weight: -1.0 },
                Node::Leaf { weight: 2.0 },
            ],
        };
        assert_eq!(tree.predict_row(&[0.5]), -1.0);
        assert_eq!(tree.predict_row(&[1.0]), -1.0); // boundary goes left
        assert_eq!(tree.predict_row(&[1.5]), 2.0);
        assert_eq!(tree.n_leaves(), 2);
        assert_eq!(tree.depth(), 1);
    }

    #[test]
    fn symmetric_leaf_indexing() {
        let tree = SymmetricTree {
            levels: vec![
                LevelSplit { feature: 0, threshold: 0.0, gain: 1.0 },
                LevelSplit { feature: 1, threshold: 0.0, gain: 1.0 },
            ],
            leaf_weights: vec![10.0, 11.0, 12.0, 13.0],
        };
        assert_eq!(tree.predict_row(&[-1.0, -1.0]), 10.0);
        assert_eq!(tree.predict_row(&[1.0, -1.0]), 11.0);
        assert_eq!(tree.predict_row(&[-1.0, 1.0]), 12.0);
        assert_eq!(tree.predict_row(&[1.0, 1.0]), 13.0);
    }
}

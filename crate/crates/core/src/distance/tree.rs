use serde::{Deserialize, Serialize};

use super::NUM_FEATURES;

/// One node of a regression tree, stored in pre-order.
///
/// A split sends rows with `x[feature] < threshold` to the node that follows it
/// and the rest to `right`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: u8,
        threshold: f64,
        right: u32,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn leaf(value: f64) -> Self {
        Self {
            nodes: vec![Node::Leaf { value }],
        }
    }

    /// Builds a tree from pre-order nodes, checking that child links are well formed.
    pub fn from_preorder(nodes: Vec<Node>) -> Option<Self> {
        fn walk(nodes: &[Node], i: usize) -> Option<usize> {
            match *nodes.get(i)? {
                Node::Leaf { value } => value.is_finite().then_some(i + 1),
                Node::Split {
                    feature,
                    threshold,
                    right,
                } => {
                    if feature as usize >= NUM_FEATURES || !threshold.is_finite() {
                        return None;
                    }
                    let after_left = walk(nodes, i + 1)?;
                    if after_left != right as usize {
                        return None;
                    }
                    walk(nodes, after_left)
                }
            }
        }
        (walk(&nodes, 0)? == nodes.len()).then_some(Self { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict(&self, x: &[f64; NUM_FEATURES]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    right,
                } => {
                    i = if x[feature as usize] < threshold {
                        i + 1
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> (usize, usize) {
            match nodes[i] {
                Node::Leaf { .. } => (0, i + 1),
                Node::Split { right, .. } => {
                    let (dl, _) = walk(nodes, i + 1);
                    let (dr, end) = walk(nodes, right as usize);
                    (1 + dl.max(dr), end)
                }
            }
        }
        walk(&self.nodes, 0).0
    }
}

/// Exact greedy least-squares tree builder.
pub(crate) struct TreeBuilder<'a> {
    pub features: &'a [[f64; NUM_FEATURES]],
    pub residuals: &'a [f64],
    pub max_depth: usize,
}

impl TreeBuilder<'_> {
    /// Grows a tree on `rows`. `level_features(depth)` yields the candidate
    /// features for every node at that depth.
    pub fn build(&self, rows: &mut [usize], level_features: &[Vec<usize>]) -> RegressionTree {
        let mut nodes = Vec::new();
        self.grow(rows, 0, level_features, &mut nodes);
        RegressionTree { nodes }
    }

    fn grow(&self, rows: &mut [usize], depth: usize, levels: &[Vec<usize>], nodes: &mut Vec<Node>) {
        let mean = rows.iter().map(|&r| self.residuals[r]).sum::<f64>() / rows.len() as f64;
        if depth >= self.max_depth || rows.len() < 2 {
            nodes.push(Node::Leaf { value: mean });
            return;
        }
        let Some((feature, threshold)) = self.best_split(rows, &levels[depth]) else {
            nodes.push(Node::Leaf { value: mean });
            return;
        };
        let split_at = partition(rows, |&r| self.features[r][feature] < threshold);
        let me = nodes.len();
        nodes.push(Node::Split {
            feature: feature as u8,
            threshold,
            right: 0,
        });
        let (left, right) = rows.split_at_mut(split_at);
        self.grow(left, depth + 1, levels, nodes);
        let right_index = nodes.len() as u32;
        if let Node::Split { right: r, .. } = &mut nodes[me] {
            *r = right_index;
        }
        self.grow(right, depth + 1, levels, nodes);
    }

    fn best_split(&self, rows: &[usize], candidates: &[usize]) -> Option<(usize, f64)> {
        let n = rows.len() as f64;
        let total: f64 = rows.iter().map(|&r| self.residuals[r]).sum();
        let parent = total * total / n;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order: Vec<usize> = rows.to_vec();
        for &f in candidates {
            order.sort_by(|&a, &b| self.features[a][f].total_cmp(&self.features[b][f]));
            let mut left_sum = 0.0;
            for k in 0..order.len() - 1 {
                left_sum += self.residuals[order[k]];
                let lo = self.features[order[k]][f];
                let hi = self.features[order[k + 1]][f];
                if lo == hi {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = n - nl;
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / nl + right_sum * right_sum / nr - parent;
                let better = match best {
                    None => true,
                    Some((g, _, _)) => gain > g,
                };
                if better {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold <= lo {
                        threshold = hi;
                    }
                    best = Some((gain, f, threshold));
                }
            }
        }
        let scale = rows
            .iter()
            .map(|&r| self.residuals[r] * self.residuals[r])
            .sum::<f64>();
        match best {
            Some((gain, f, t)) if gain > 1e-12 * scale.max(f64::MIN_POSITIVE) => Some((f, t)),
            _ => None,
        }
    }
}

/// Stable in-place partition; returns the number of rows satisfying `pred`.
fn partition(rows: &mut [usize], pred: impl Fn(&usize) -> bool) -> usize {
    let (yes, no): (Vec<usize>, Vec<usize>) = rows.iter().partition(|r| pred(r));
    let k = yes.len();
    rows[..k].copy_from_slice(&yes);
    rows[k..].copy_from_slice(&no);
    k
}

//! Greedy binary decision trees shared by the forest and the booster.
//!
//! Each node keeps, for every feature, its sample ids sorted by that
//! feature's value; splitting partitions those lists stably so no node
//! ever re-sorts. Candidate splits are midpoints between consecutive
//! distinct values; ties in the split score resolve to the lowest feature
//! index and then the lowest threshold.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Single-leaf tree.
    pub fn constant(value: f64) -> Self {
        Tree { nodes: alloc::vec![Node::Leaf { value }] }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

/// What a tree is fitted to, indexed by original row.
#[derive(Clone, Copy)]
pub(crate) enum Target<'a> {
    /// Gini impurity on binary labels.
    Class(&'a [bool]),
    /// Squared error on real targets.
    Value(&'a [f64]),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features drawn per node; `None` considers all of them.
    pub max_features: Option<usize>,
}

struct Pending {
    /// Per feature, sample ids sorted by that feature.
    sorted: Vec<Vec<u32>>,
    depth: usize,
    slot: usize,
}

struct BestSplit {
    score: f64,
    feature: usize,
    threshold: f64,
    left_count: usize,
}

/// Grows a tree on `x[rows[i]]` for sample ids `i`. `rows` may repeat
/// (bootstrap). `leaf_value` receives the original row indices of a leaf.
pub(crate) fn grow<R: Rng>(
    x: &[Vec<f64>],
    rows: &[usize],
    target: Target<'_>,
    params: GrowParams,
    mut rng: Option<&mut R>,
    leaf_value: &dyn Fn(&[usize]) -> f64,
) -> Tree {
    let d = x.first().map_or(0, |r| r.len());
    let m = rows.len();
    let sorted: Vec<Vec<u32>> = (0..d)
        .map(|f| {
            let mut ids: Vec<u32> = (0..m as u32).collect();
            ids.sort_by(|&a, &b| {
                x[rows[a as usize]][f].total_cmp(&x[rows[b as usize]][f]).then(a.cmp(&b))
            });
            ids
        })
        .collect();

    let mut nodes = alloc::vec![Node::Leaf { value: 0.0 }];
    let mut stack = alloc::vec![Pending { sorted, depth: 0, slot: 0 }];
    let mut goes_left = alloc::vec![false; m];
    let min_leaf = params.min_leaf.max(1);

    while let Some(node) = stack.pop() {
        let ids: &[u32] = node.sorted.first().map_or(&[], |v| v.as_slice());
        let n = ids.len();
        let originals = || ids.iter().map(|&i| rows[i as usize]).collect::<Vec<_>>();

        let stop = d == 0
            || n < 2 * min_leaf
            || params.max_depth.is_some_and(|md| node.depth >= md)
            || is_pure(ids, rows, target);
        let best = if stop {
            None
        } else {
            let candidates: Vec<usize> = match (params.max_features, rng.as_deref_mut()) {
                (Some(k), Some(r)) if k < d => {
                    let mut c = rand::seq::index::sample(r, d, k.max(1)).into_vec();
                    c.sort_unstable();
                    c
                }
                _ => (0..d).collect(),
            };
            let mut best: Option<BestSplit> = None;
            for f in candidates {
                if let Some(s) = scan_feature(x, rows, &node.sorted[f], f, target, min_leaf) {
                    if best.as_ref().is_none_or(|b| s.score < b.score) {
                        best = Some(s);
                    }
                }
            }
            best
        };

        let Some(best) = best else {
            nodes[node.slot] = Node::Leaf { value: leaf_value(&originals()) };
            continue;
        };

        for (pos, &id) in node.sorted[best.feature].iter().enumerate() {
            goes_left[id as usize] = pos < best.left_count;
        }
        let mut left_sorted = Vec::with_capacity(d);
        let mut right_sorted = Vec::with_capacity(d);
        for list in &node.sorted {
            let (l, r): (Vec<u32>, Vec<u32>) = list.iter().partition(|&&id| goes_left[id as usize]);
            left_sorted.push(l);
            right_sorted.push(r);
        }
        let left = nodes.len();
        let right = left + 1;
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[node.slot] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        stack.push(Pending { sorted: right_sorted, depth: node.depth + 1, slot: right });
        stack.push(Pending { sorted: left_sorted, depth: node.depth + 1, slot: left });
    }
    Tree { nodes }
}

fn is_pure(ids: &[u32], rows: &[usize], target: Target<'_>) -> bool {
    let Some(&first) = ids.first() else { return true };
    match target {
        Target::Class(y) => {
            let c = y[rows[first as usize]];
            ids.iter().all(|&i| y[rows[i as usize]] == c)
        }
        Target::Value(t) => {
            let v = t[rows[first as usize]];
            ids.iter().all(|&i| t[rows[i as usize]] == v)
        }
    }
}

fn gini_weighted(n: f64, pos: f64) -> f64 {
    // n · (1 − p² − q²) = 2·pos·neg / n
    if n == 0.0 {
        0.0
    } else {
        2.0 * pos * (n - pos) / n
    }
}

fn scan_feature(
    x: &[Vec<f64>],
    rows: &[usize],
    sorted: &[u32],
    feature: usize,
    target: Target<'_>,
    min_leaf: usize,
) -> Option<BestSplit> {
    let n = sorted.len();
    let value = |pos: usize| x[rows[sorted[pos] as usize]][feature];
    if value(0) == value(n - 1) {
        return None;
    }
    let mut best: Option<BestSplit> = None;
    let mut consider = |score: f64, i: usize| {
        if best.as_ref().is_none_or(|b| score < b.score) {
            let (lo, hi) = (value(i), value(i + 1));
            let mut threshold = lo + (hi - lo) / 2.0;
            if !(threshold < hi) {
                threshold = lo;
            }
            best = Some(BestSplit { score, feature, threshold, left_count: i + 1 });
        }
    };

    match target {
        Target::Class(y) => {
            let total_pos = sorted.iter().filter(|&&id| y[rows[id as usize]]).count() as f64;
            let mut left_pos = 0.0;
            for i in 0..n - 1 {
                if y[rows[sorted[i] as usize]] {
                    left_pos += 1.0;
                }
                let nl = i + 1;
                if nl < min_leaf || n - nl < min_leaf || value(i) >= value(i + 1) {
                    continue;
                }
                let (nlf, nrf) = (nl as f64, (n - nl) as f64);
                let score = gini_weighted(nlf, left_pos) + gini_weighted(nrf, total_pos - left_pos);
                consider(score, i);
            }
        }
        Target::Value(t) => {
            let (mut tot, mut tot_sq) = (0.0, 0.0);
            for &id in sorted {
                let v = t[rows[id as usize]];
                tot += v;
                tot_sq += v * v;
            }
            let (mut ls, mut lsq) = (0.0, 0.0);
            for i in 0..n - 1 {
                let v = t[rows[sorted[i] as usize]];
                ls += v;
                lsq += v * v;
                let nl = i + 1;
                if nl < min_leaf || n - nl < min_leaf || value(i) >= value(i + 1) {
                    continue;
                }
                let (nlf, nrf) = (nl as f64, (n - nl) as f64);
                let rs = tot - ls;
                let rsq = tot_sq - lsq;
                let score = (lsq - ls * ls / nlf) + (rsq - rs * rs / nrf);
                consider(score, i);
            }
        }
    }
    best
}

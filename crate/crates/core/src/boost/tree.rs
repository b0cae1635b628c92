use serde::{Deserialize, Serialize};

use super::split::{BinnedColumn, FeatureBest, ScanCtx, SplitParams, MISSING};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        default: Direction,
        left: usize,
        right: usize,
        gain: f64,
    },
    Leaf {
        weight: f64,
    },
}

/// A regression tree over margins; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Leaf weight reached by a row; `value(f)` returns feature `f` or `None`.
    pub fn predict(&self, value: impl Fn(usize) -> Option<f64>) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { weight } => return *weight,
                Node::Split {
                    feature,
                    threshold,
                    default,
                    left,
                    right,
                    ..
                } => {
                    let go_left = match value(*feature) {
                        Some(v) => v < *threshold,
                        None => *default == Direction::Left,
                    };
                    i = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { weight } => Some(*weight),
            _ => None,
        })
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Scratch state for growing trees over one training set. For each sampled
/// feature it keeps the sample's present rows in value order; each node owns
/// a contiguous range of every such buffer, and splits partition the ranges
/// stably so the order survives. Buffers are reused from tree to tree.
pub(crate) struct Grower<'a> {
    columns: &'a [BinnedColumn],
    params: SplitParams,
    missing_routing: bool,
    max_depth: usize,
    learning_rate: f64,
    /// Node rows, partitioned in place.
    rows: Vec<u32>,
    /// Per feature: present sample rows with their bins, in value order.
    sorted: Vec<Vec<(u32, u32)>>,
    goes_left: Vec<bool>,
    scratch_rows: Vec<u32>,
    scratch_pairs: Vec<(u32, u32)>,
}

/// Per-tree inputs.
struct TreeCtx<'a> {
    scan: ScanCtx<'a>,
    features: &'a [usize],
}

impl<'a> Grower<'a> {
    pub fn new(
        columns: &'a [BinnedColumn],
        params: SplitParams,
        missing_routing: bool,
        max_depth: usize,
        learning_rate: f64,
        n_rows: usize,
    ) -> Self {
        Grower {
            columns,
            params,
            missing_routing,
            max_depth,
            learning_rate,
            rows: Vec::with_capacity(n_rows),
            sorted: vec![Vec::new(); columns.len()],
            goes_left: vec![false; n_rows],
            scratch_rows: Vec::with_capacity(n_rows),
            scratch_pairs: Vec::with_capacity(n_rows),
        }
    }

    /// Grows one tree on the rows in `sample` (ascending; `in_sample` marks
    /// the same rows) using only `features` (ascending). Returns the tree
    /// and the gain of each split, keyed by feature index.
    pub fn grow(
        &mut self,
        gh: &[(f64, f64)],
        features: &[usize],
        sample: &[u32],
        in_sample: &[bool],
    ) -> (Tree, Vec<(usize, f64)>) {
        let full = sample.len() == in_sample.len();
        for &f in features {
            let src = &self.columns[f].sorted;
            let dst = &mut self.sorted[f];
            if full {
                dst.clear();
                dst.extend_from_slice(src);
            } else {
                // sized once per fit; the tail past `k` is stale and cut off
                if dst.len() < src.len() {
                    dst.resize(src.len(), (0, 0));
                }
                let mut k = 0;
                for &pair in src {
                    dst[k] = pair;
                    k += usize::from(in_sample[pair.0 as usize]);
                }
                dst.truncate(k);
            }
        }
        self.rows.clear();
        self.rows.extend_from_slice(sample);

        let ctx = TreeCtx {
            scan: ScanCtx {
                gh,
                params: self.params,
                missing_routing: self.missing_routing,
            },
            features,
        };
        let segments: Vec<(usize, usize)> = features.iter().map(|&f| (0, self.sorted[f].len())).collect();
        let mut nodes = Vec::new();
        let mut gains = Vec::new();
        self.grow_node(&ctx, &mut nodes, &mut gains, (0, sample.len()), &segments, 0);
        (Tree { nodes }, gains)
    }

    fn leaf(&self, nodes: &mut Vec<Node>, g: f64, h: f64) -> usize {
        let weight = -g / (h + self.params.reg_lambda) * self.learning_rate;
        nodes.push(Node::Leaf { weight });
        nodes.len() - 1
    }

    fn grow_node(
        &mut self,
        ctx: &TreeCtx<'_>,
        nodes: &mut Vec<Node>,
        gains: &mut Vec<(usize, f64)>,
        range: (usize, usize),
        segments: &[(usize, usize)],
        depth: usize,
    ) -> usize {
        let (start, end) = range;
        let (mut g, mut h) = (0.0, 0.0);
        for &r in &self.rows[start..end] {
            let (gr, hr) = ctx.scan.gh[r as usize];
            g += gr;
            h += hr;
        }
        let count = end - start;
        if depth >= self.max_depth || count < 2 || h <= 0.0 {
            return self.leaf(nodes, g, h);
        }

        // ties keep the earlier feature
        let mut best: Option<(usize, FeatureBest)> = None;
        for (slot, &f) in ctx.features.iter().enumerate() {
            let (s, e) = segments[slot];
            if let Some(fb) = ctx.scan.scan(&self.sorted[f][s..e], g, h, count) {
                if best.map_or(true, |(_, b)| fb.gain > b.gain) {
                    best = Some((slot, fb));
                }
            }
        }
        let Some((slot, fb)) = best else {
            return self.leaf(nodes, g, h);
        };
        let feature = ctx.features[slot];
        let bins = &self.columns[feature].bins;
        let default_left = fb.direction == Direction::Left;
        for &r in &self.rows[start..end] {
            let b = bins[r as usize];
            self.goes_left[r as usize] = if b == MISSING { default_left } else { b <= fb.bin };
        }

        let mid = stable_partition(&mut self.rows[start..end], |r| self.goes_left[r as usize], &mut self.scratch_rows) + start;
        // children at the depth limit become leaves and need no feature order
        let (left_segments, right_segments) = if depth + 1 < self.max_depth {
            let mut left = Vec::with_capacity(segments.len());
            let mut right = Vec::with_capacity(segments.len());
            for (slot, &(s, e)) in segments.iter().enumerate() {
                let buf = &mut self.sorted[ctx.features[slot]][s..e];
                let goes_left = &self.goes_left;
                let m = stable_partition(buf, |p: (u32, u32)| goes_left[p.0 as usize], &mut self.scratch_pairs) + s;
                left.push((s, m));
                right.push((m, e));
            }
            (left, right)
        } else {
            (Vec::new(), Vec::new())
        };

        let me = nodes.len();
        nodes.push(Node::Leaf { weight: 0.0 });
        gains.push((feature, fb.gain));
        let left = self.grow_node(ctx, nodes, gains, (start, mid), &left_segments, depth + 1);
        let right = self.grow_node(ctx, nodes, gains, (mid, end), &right_segments, depth + 1);
        nodes[me] = Node::Split {
            feature,
            threshold: self.columns[feature].threshold(fb.bin),
            default: fb.direction,
            left,
            right,
            gain: fb.gain,
        };
        me
    }
}

/// Moves items with `goes_left(item)` to the front, preserving relative
/// order on both sides. Returns the number of left items.
fn stable_partition<T: Copy>(items: &mut [T], goes_left: impl Fn(T) -> bool, scratch: &mut Vec<T>) -> usize {
    scratch.clear();
    let mut w = 0;
    for i in 0..items.len() {
        let x = items[i];
        if goes_left(x) {
            items[w] = x;
            w += 1;
        } else {
            scratch.push(x);
        }
    }
    items[w..].copy_from_slice(scratch);
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_is_stable() {
        let mut items = vec![5, 1, 4, 2, 3, 0];
        let flags = [true, false, true, false, true, false];
        let mut scratch = Vec::new();
        let m = stable_partition(&mut items, |r: u32| flags[r as usize], &mut scratch);
        assert_eq!(m, 3);
        assert_eq!(items, [4, 2, 0, 5, 1, 3]);
    }

    #[test]
    fn missing_follows_default() {
        let tree = Tree {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    threshold: 1.0,
                    default: Direction::Right,
                    left: 1,
                    right: 2,
                    gain: 1.0,
                },
                Node::Leaf { weight: -1.0 },
                Node::Leaf { weight: 1.0 },
            ],
        };
        assert_eq!(tree.predict(|_| Some(0.5)), -1.0);
        assert_eq!(tree.predict(|_| Some(1.0)), 1.0);
        assert_eq!(tree.predict(|_| None), 1.0);
        assert_eq!(tree.depth(), 1);
    }
}

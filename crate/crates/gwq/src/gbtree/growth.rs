//! Tree growers: best-first leaf-wise growth and level-symmetric growth,
//! both searching histogram bins with the regularized squared-loss gain.

use super::histogram::BinnedMatrix;
use super::tree::{LeafWiseTree, LevelSplit, Node, SymmetricTree};
use super::{split_gain, weight_or_zero};

/// Everything a grower needs for one tree: binned features, per-row
/// gradients (hessians are all 1 under squared loss) and regularizers.
pub(crate) struct GrowContext<'a> {
    pub binned: &'a BinnedMatrix,
    pub grads: &'a [f64],
    pub lambda: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy)]
struct BestSplit {
    feature: usize,
    bin: usize,
    threshold: f64,
    gain: f64,
}

#[derive(Default, Clone, Copy)]
struct BinStats {
    g: f64,
    h: f64,
    count: usize,
}

/// Best split of a single row set, scanning features in ascending order and
/// bins left to right so equal gains resolve to the lowest feature index and
/// then the lowest threshold.
fn best_split(ctx: &GrowContext, rows: &[u32], features: &[usize]) -> Option<BestSplit> {
    let mut best: Option<BestSplit> = None;
    for &feature in features {
        let edges = &ctx.binned.edges[feature];
        if edges.is_empty() {
            continue;
        }
        let mut hist = vec![BinStats::default(); edges.len() + 1];
        let bins = &ctx.binned.bins[feature];
        let mut total = BinStats::default();
        for &r in rows {
            let slot = &mut hist[bins[r as usize] as usize];
            let g = ctx.grads[r as usize];
            slot.g += g;
            slot.h += 1.0;
            slot.count += 1;
            total.g += g;
            total.h += 1.0;
            total.count += 1;
        }
        let mut left = BinStats::default();
        for (bin, stats) in hist[..hist.len() - 1].iter().enumerate() {
            left.g += stats.g;
            left.h += stats.h;
            left.count += stats.count;
            if left.count == 0 {
                continue;
            }
            if left.count == total.count {
                break;
            }
            let gain = split_gain(
                left.g,
                left.h,
                total.g - left.g,
                total.h - left.h,
                ctx.lambda,
                ctx.gamma,
            );
            if best.map_or(true, |b| gain > b.gain) {
                best = Some(BestSplit { feature, bin, threshold: edges[bin], gain });
            }
        }
    }
    best
}

struct BuildLeaf {
    node_slot: usize,
    rows: Vec<u32>,
    depth: usize,
    g_sum: f64,
    h_sum: f64,
    best: Option<BestSplit>,
}

fn leaf_sums(ctx: &GrowContext, rows: &[u32]) -> (f64, f64) {
    let g = rows.iter().map(|&r| ctx.grads[r as usize]).sum();
    (g, rows.len() as f64)
}

/// Grows a tree by repeatedly splitting the leaf with the globally best
/// strictly positive gain, until `num_leaves` or `max_depth` binds.
pub(crate) fn grow_leafwise(
    ctx: &GrowContext,
    rows: Vec<u32>,
    features: &[usize],
    max_depth: usize,
    num_leaves: usize,
) -> LeafWiseTree {
    let mut nodes = vec![Node::Leaf { weight: 0.0 }];
    let (g, h) = leaf_sums(ctx, &rows);
    let best = if max_depth > 0 { best_split(ctx, &rows, features) } else { None };
    let mut leaves = vec![BuildLeaf { node_slot: 0, rows, depth: 0, g_sum: g, h_sum: h, best }];

    while leaves.len() < num_leaves {
        // Strict comparison: the earliest leaf in the list wins ties.
        let mut chosen: Option<(usize, f64)> = None;
        for (i, leaf) in leaves.iter().enumerate() {
            if let Some(best) = leaf.best {
                if best.gain > 0.0 && chosen.map_or(true, |(_, g)| best.gain > g) {
                    chosen = Some((i, best.gain));
                }
            }
        }
        let Some((leaf_idx, _)) = chosen else { break };
        let split = leaves[leaf_idx].best.expect("chosen leaf has a split");

        let parent = &leaves[leaf_idx];
        let bins = &ctx.binned.bins[split.feature];
        let (mut left_rows, mut right_rows) = (Vec::new(), Vec::new());
        for &r in &parent.rows {
            if (bins[r as usize] as usize) <= split.bin {
                left_rows.push(r);
            } else {
                right_rows.push(r);
            }
        }
        let child_depth = parent.depth + 1;
        let parent_slot = parent.node_slot;

        let left_slot = nodes.len();
        let right_slot = nodes.len() + 1;
        nodes.push(Node::Leaf { weight: 0.0 });
        nodes.push(Node::Leaf { weight: 0.0 });
        nodes[parent_slot] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            gain: split.gain,
            left: left_slot,
            right: right_slot,
        };

        let make_leaf = |slot: usize, rows: Vec<u32>| {
            let (g, h) = leaf_sums(ctx, &rows);
            let best =
                if child_depth < max_depth { best_split(ctx, &rows, features) } else { None };
            BuildLeaf { node_slot: slot, rows, depth: child_depth, g_sum: g, h_sum: h, best }
        };
        let left = make_leaf(left_slot, left_rows);
        let right = make_leaf(right_slot, right_rows);
        leaves[leaf_idx] = left;
        leaves.push(right);
    }

    for leaf in &leaves {
        nodes[leaf.node_slot] =
            Node::Leaf { weight: weight_or_zero(leaf.g_sum, leaf.h_sum, ctx.lambda) };
    }
    LeafWiseTree { nodes }
}

/// Grows an oblivious tree: at each level, the single (feature, threshold)
/// with the largest strictly positive summed gain across all current leaves
/// splits every one of them.
pub(crate) fn grow_symmetric(
    ctx: &GrowContext,
    rows: Vec<u32>,
    features: &[usize],
    max_depth: usize,
) -> SymmetricTree {
    let mut leaves: Vec<Vec<u32>> = vec![rows];
    let mut levels: Vec<LevelSplit> = Vec::new();

    for _depth in 0..max_depth {
        let mut best: Option<(usize, usize, f64, f64)> = None; // feature, bin, threshold, gain
        for &feature in features {
            let edges = &ctx.binned.edges[feature];
            if edges.is_empty() {
                continue;
            }
            let n_bins = edges.len() + 1;
            let bins = &ctx.binned.bins[feature];

            let mut hists = vec![vec![BinStats::default(); n_bins]; leaves.len()];
            let mut totals = vec![BinStats::default(); leaves.len()];
            for (leaf_idx, leaf_rows) in leaves.iter().enumerate() {
                for &r in leaf_rows {
                    let slot = &mut hists[leaf_idx][bins[r as usize] as usize];
                    let g = ctx.grads[r as usize];
                    slot.g += g;
                    slot.h += 1.0;
                    slot.count += 1;
                    totals[leaf_idx].g += g;
                    totals[leaf_idx].h += 1.0;
                    totals[leaf_idx].count += 1;
                }
            }

            let mut lefts = vec![BinStats::default(); leaves.len()];
            for bin in 0..n_bins - 1 {
                let mut total_gain = 0.0;
                for leaf_idx in 0..leaves.len() {
                    let stats = hists[leaf_idx][bin];
                    let left = &mut lefts[leaf_idx];
                    left.g += stats.g;
                    left.h += stats.h;
                    left.count += stats.count;
                    let t = totals[leaf_idx];
                    total_gain += split_gain(
                        left.g,
                        left.h,
                        t.g - left.g,
                        t.h - left.h,
                        ctx.lambda,
                        ctx.gamma,
                    );
                }
                if best.map_or(true, |(_, _, _, g)| total_gain > g) {
                    best = Some((feature, bin, edges[bin], total_gain));
                }
            }
        }

        let Some((feature, bin, threshold, gain)) = best else { break };
        if gain <= 0.0 {
            break;
        }

        let bins = &ctx.binned.bins[feature];
        let old_len = leaves.len();
        let mut next = vec![Vec::new(); old_len * 2];
        for (leaf_idx, leaf_rows) in leaves.iter().enumerate() {
            for &r in leaf_rows {
                if (bins[r as usize] as usize) <= bin {
                    next[leaf_idx].push(r);
                } else {
                    next[leaf_idx + old_len].push(r);
                }
            }
        }
        leaves = next;
        levels.push(LevelSplit { feature, threshold, gain });
    }

    let leaf_weights = leaves
        .iter()
        .map(|leaf_rows| {
            let (g, h) = leaf_sums(ctx, leaf_rows);
            weight_or_zero(g, h, ctx.lambda)
        })
        .collect();
    SymmetricTree { levels, leaf_weights }
}

//! Geometric nested dissection of structured node grids.

/// One node of the dissection tree: the grid nodes eliminated together
/// (a separator plane or a leaf block) and its child subtrees.
#[derive(Debug, Clone, PartialEq)]
pub struct DissectionNode {
    pub nodes: Vec<usize>,
    pub children: Vec<usize>,
}

/// Recursively bisects the node box of a structured grid through its longest
/// axis. Returns the tree in post-order (children before parents, left child
/// before right), so the root is the last entry.
///
/// `node_dims` counts nodes per axis (z = 1 for planar grids). Node indices
/// are x fastest, matching [`crate::mesh::Grid`].
pub fn grid_nested_dissection(node_dims: [usize; 3], leaf_size: usize) -> Vec<DissectionNode> {
    let mut tree = Vec::new();
    if node_dims.iter().product::<usize>() > 0 {
        dissect(node_dims, [0, 0, 0], node_dims, leaf_size.max(1), &mut tree);
    }
    tree
}

fn dissect(dims: [usize; 3], lo: [usize; 3], hi: [usize; 3], leaf: usize, tree: &mut Vec<DissectionNode>) -> usize {
    let ext = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
    let count: usize = ext.iter().product();
    let axis = (0..3).max_by_key(|&d| (ext[d], 2 - d)).unwrap();
    if count <= leaf || ext[axis] < 3 {
        let nodes = box_nodes(dims, lo, hi);
        tree.push(DissectionNode { nodes, children: Vec::new() });
        return tree.len() - 1;
    }
    let mid = lo[axis] + ext[axis] / 2;
    let mut left_hi = hi;
    left_hi[axis] = mid;
    let mut right_lo = lo;
    right_lo[axis] = mid + 1;
    let mut sep_lo = lo;
    sep_lo[axis] = mid;
    let mut sep_hi = hi;
    sep_hi[axis] = mid + 1;
    let left = dissect(dims, lo, left_hi, leaf, tree);
    let right = dissect(dims, right_lo, hi, leaf, tree);
    tree.push(DissectionNode { nodes: box_nodes(dims, sep_lo, sep_hi), children: vec![left, right] });
    tree.len() - 1
}

fn box_nodes(dims: [usize; 3], lo: [usize; 3], hi: [usize; 3]) -> Vec<usize> {
    let mut out = Vec::with_capacity((hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]));
    for k in lo[2]..hi[2] {
        for j in lo[1]..hi[1] {
            for i in lo[0]..hi[0] {
                out.push(i + dims[0] * (j + dims[1] * k));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_node_appears_once() {
        for dims in [[17, 9, 1], [5, 6, 7], [1, 1, 1], [40, 3, 1]] {
            let tree = grid_nested_dissection(dims, 8);
            let mut seen = vec![0; dims.iter().product()];
            for t in &tree {
                for &n in &t.nodes {
                    seen[n] += 1;
                }
            }
            assert!(seen.iter().all(|&c| c == 1), "{dims:?}");
            // post-order: children precede parents
            for (i, t) in tree.iter().enumerate() {
                assert!(t.children.iter().all(|&c| c < i));
            }
        }
    }

    #[test]
    fn separator_splits_longest_axis() {
        let tree = grid_nested_dissection([9, 3, 1], 4);
        let root = tree.last().unwrap();
        assert_eq!(root.nodes, vec![4, 13, 22]);
    }
}

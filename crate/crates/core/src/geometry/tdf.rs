//! Structure-level TDF on the background grid, built from local component
//! supports.

use super::component::Component;
use super::regularize::RegularizationParams;
use crate::mesh::Grid;

/// Inclusive node-index ranges possibly reached by a component's `-epsilon`
/// level set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportBox {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
    empty: bool,
}

impl SupportBox {
    pub fn empty() -> Self {
        Self { lo: [0; 3], hi: [0; 3], empty: true }
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    /// Number of nodes along each axis.
    pub fn extent(&self) -> [usize; 3] {
        if self.empty {
            return [0; 3];
        }
        [self.hi[0] - self.lo[0] + 1, self.hi[1] - self.lo[1] + 1, self.hi[2] - self.lo[2] + 1]
    }

    pub fn num_nodes(&self) -> usize {
        self.extent().iter().product()
    }

    pub fn contains(&self, ijk: [usize; 3]) -> bool {
        !self.empty && (0..3).all(|d| ijk[d] >= self.lo[d] && ijk[d] <= self.hi[d])
    }

    /// Calls `f(node_index, node_coords)` for every node in the box, x fastest.
    pub fn for_each_node(&self, grid: &Grid, mut f: impl FnMut(usize, [f64; 3])) {
        if self.empty {
            return;
        }
        for k in self.lo[2]..=self.hi[2] {
            for j in self.lo[1]..=self.hi[1] {
                let row = grid.node_index(0, j, k);
                for i in self.lo[0]..=self.hi[0] {
                    f(row + i, grid.ijk_coords(i, j, k));
                }
            }
        }
    }
}

/// Node-index box enclosing every point where `tdf >= -epsilon`, clipped to
/// the grid.
pub fn support_box<C: Component>(comp: &C, grid: &Grid, epsilon: f64, p_exp: i32) -> SupportBox {
    let (center, half) = comp.bounding_box(epsilon, p_exp);
    let dims = grid.node_dims();
    let h = grid.spacing();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for d in 0..grid.dim() {
        let a = ((center[d] - half[d]) / h[d]).ceil();
        let b = ((center[d] + half[d]) / h[d]).floor();
        let top = (dims[d] - 1) as f64;
        if !(a.is_finite() && b.is_finite()) || b < 0.0 || a > top || a > b {
            return SupportBox::empty();
        }
        lo[d] = a.max(0.0) as usize;
        hi[d] = b.min(top) as usize;
    }
    SupportBox { lo, hi, empty: false }
}

/// Per-node overrides applied after aggregation (non-design regions).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeOverride {
    Free,
    Solid,
    Void,
}

/// Structure-level TDF values on background nodes plus the K-S weights of
/// every contributing component at nodes inside the transition band.
#[derive(Debug, Clone)]
pub struct TdfField {
    /// Aggregated value per node; `-inf` where no support box reaches.
    values: Vec<f64>,
    /// Band nodes in increasing index order.
    band_nodes: Vec<usize>,
    /// CSR offsets into `contributors`, one more than `band_nodes`.
    band_offsets: Vec<usize>,
    /// `(component id, K-S weight)` in component order.
    contributors: Vec<(u32, f64)>,
    epsilon: f64,
    covered: usize,
    design_hash: u64,
}

/// Hash of the exact bit patterns of every component parameter, used to
/// detect analysis results that belong to a different design.
pub fn design_fingerprint<C: Component>(components: &[C]) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    components.len().hash(&mut h);
    for c in components {
        for v in c.params() {
            v.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

impl TdfField {
    /// Aggregates `components` on the nodes of `grid`. `overrides`, when
    /// given, holds one entry per node.
    pub fn build<C: Component>(
        components: &[C],
        grid: &Grid,
        reg: &RegularizationParams,
        overrides: Option<&[NodeOverride]>,
    ) -> Self {
        let n = grid.num_nodes();
        let (eps, l, p) = (reg.epsilon, reg.ks_l, reg.p_exp);
        let boxes: Vec<SupportBox> = components.iter().map(|c| support_box(c, grid, eps, p)).collect();

        let mut max = vec![f64::NEG_INFINITY; n];
        for (c, b) in components.iter().zip(&boxes) {
            b.for_each_node(grid, |node, x| {
                let v = c.tdf(&x, p);
                if v > max[node] {
                    max[node] = v;
                }
            });
        }
        let mut sum = vec![0.0; n];
        for (c, b) in components.iter().zip(&boxes) {
            b.for_each_node(grid, |node, x| {
                sum[node] += (l * (c.tdf(&x, p) - max[node])).exp();
            });
        }
        let mut values = max.clone();
        let mut covered = 0;
        for (v, s) in values.iter_mut().zip(&sum) {
            if *s > 0.0 {
                *v += s.ln() / l;
                covered += 1;
            }
        }

        let mut in_band = vec![false; n];
        for (node, v) in values.iter_mut().enumerate() {
            let ov = overrides.map_or(NodeOverride::Free, |o| o[node]);
            match ov {
                NodeOverride::Free => in_band[node] = v.abs() <= eps,
                NodeOverride::Solid => *v = v.max(eps),
                NodeOverride::Void => *v = v.min(-eps),
            }
        }

        // Gather band contributions component by component, then order them
        // by node with a stable counting sort so each node keeps component order.
        let mut counts = vec![0usize; n + 1];
        let mut raw: Vec<(usize, u32, f64)> = Vec::new();
        for (id, (c, b)) in components.iter().zip(&boxes).enumerate() {
            b.for_each_node(grid, |node, x| {
                if in_band[node] {
                    let w = (l * (c.tdf(&x, p) - max[node])).exp() / sum[node];
                    raw.push((node, id as u32, w));
                    counts[node + 1] += 1;
                }
            });
        }
        let band_nodes: Vec<usize> = (0..n).filter(|&i| in_band[i]).collect();
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut contributors = vec![(0u32, 0.0); raw.len()];
        let mut cursor = counts.clone();
        for (node, id, w) in raw {
            contributors[cursor[node]] = (id, w);
            cursor[node] += 1;
        }
        let mut band_offsets = Vec::with_capacity(band_nodes.len() + 1);
        band_offsets.push(0);
        for &node in &band_nodes {
            band_offsets.push(counts[node + 1]);
        }
        // Band nodes always have at least one contributor (the band excludes -inf),
        // so offsets are contiguous across band nodes.
        debug_assert!(band_nodes.iter().all(|&node| counts[node + 1] > counts[node]));

        let design_hash = design_fingerprint(components);
        Self { values, band_nodes, band_offsets, contributors, epsilon: eps, covered, design_hash }
    }

    /// Fingerprint of the components the field was built from.
    pub fn design_hash(&self) -> u64 {
        self.design_hash
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn num_nodes(&self) -> usize {
        self.values.len()
    }

    /// Nodes reached by at least one support box.
    pub fn covered_nodes(&self) -> usize {
        self.covered
    }

    /// Nodes with `tdf > epsilon`, where the regularized Heaviside equals 1.
    pub fn is_deep_interior(&self, node: usize) -> bool {
        self.values[node] > self.epsilon
    }

    pub fn band_nodes(&self) -> &[usize] {
        &self.band_nodes
    }

    /// `(component id, weight)` pairs of the `b`-th band node.
    pub fn band_contributors(&self, b: usize) -> &[(u32, f64)] {
        &self.contributors[self.band_offsets[b]..self.band_offsets[b + 1]]
    }

    /// Regularized Heaviside at every node.
    pub fn heaviside(&self, reg: &RegularizationParams) -> Vec<f64> {
        self.values.iter().map(|&v| reg.heaviside(v)).collect()
    }
}

/// Evaluates a 2D component TDF at a point in the plane.
pub fn eval_tdf_2d(comp: &super::Component2D, point: [f64; 2], p_exp: i32) -> f64 {
    comp.tdf(&[point[0], point[1], 0.0], p_exp)
}

pub fn eval_tdf_3d(comp: &super::Component3D, point: [f64; 3], p_exp: i32) -> f64 {
    comp.tdf(&point, p_exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ks_aggregate, Component2D};

    fn reg(grid: &Grid) -> RegularizationParams {
        RegularizationParams::for_grid(grid)
    }

    #[test]
    fn empty_design_is_void() {
        let g = Grid::new_2d(8, 4, 2.0, 1.0).unwrap();
        let f = TdfField::build::<Component2D>(&[], &g, &reg(&g), None);
        assert!(f.values().iter().all(|v| *v == f64::NEG_INFINITY));
        assert!(f.band_nodes().is_empty());
    }

    #[test]
    fn outside_component_has_empty_box() {
        let g = Grid::new_2d(8, 4, 2.0, 1.0).unwrap();
        let c = Component2D::new(10.0, 10.0, 0.5, 0.1, 0.1, 0.3).unwrap();
        assert!(support_box(&c, &g, 0.5, 6).is_empty());
    }

    #[test]
    fn quarter_turn_swaps_box() {
        let g = Grid::new_2d(64, 64, 4.0, 4.0).unwrap();
        let c0 = Component2D::new(2.0, 2.0, 1.0, 0.2, 0.2, 0.0).unwrap();
        let c1 = Component2D::new(2.0, 2.0, 1.0, 0.2, 0.2, std::f64::consts::FRAC_PI_2).unwrap();
        let e0 = support_box(&c0, &g, 0.1, 6).extent();
        let e1 = support_box(&c1, &g, 0.1, 6).extent();
        assert_eq!([e0[0], e0[1]], [e1[1], e1[0]]);
    }

    #[test]
    fn single_component_is_exact() {
        let g = Grid::new_2d(32, 16, 2.0, 1.0).unwrap();
        let c = Component2D::new(1.0, 0.5, 0.6, 0.1, 0.2, 0.3).unwrap();
        let r = reg(&g);
        let f = TdfField::build(std::slice::from_ref(&c), &g, &r, None);
        let b = support_box(&c, &g, r.epsilon, r.p_exp);
        b.for_each_node(&g, |n, x| assert_eq!(f.value(n), c.tdf(&x, 6)));
        for (bi, _) in f.band_nodes().iter().enumerate() {
            assert_eq!(f.band_contributors(bi), &[(0, 1.0)]);
        }
    }

    #[test]
    fn solid_override_removes_band() {
        let g = Grid::new_2d(16, 8, 2.0, 1.0).unwrap();
        let c = Component2D::new(1.0, 0.5, 0.6, 0.1, 0.2, 0.3).unwrap();
        let r = reg(&g);
        let ov = vec![NodeOverride::Solid; g.num_nodes()];
        let f = TdfField::build(&[c], &g, &r, Some(&ov));
        assert!(f.band_nodes().is_empty());
        assert!(f.values().iter().all(|&v| v >= r.epsilon));
    }

    #[test]
    fn weights_match_direct_aggregate() {
        let g = Grid::new_2d(32, 16, 2.0, 1.0).unwrap();
        let comps = [
            Component2D::new(1.0, 0.5, 0.6, 0.1, 0.2, 0.3).unwrap(),
            Component2D::new(1.1, 0.45, 0.5, 0.15, 0.1, -0.6).unwrap(),
        ];
        let r = reg(&g);
        let f = TdfField::build(&comps, &g, &r, None);
        assert!(!f.band_nodes().is_empty());
        for (bi, &n) in f.band_nodes().iter().enumerate() {
            let x = g.node_coords(n);
            let contrib = f.band_contributors(bi);
            if contrib.len() == 2 {
                let (v, w) = ks_aggregate(&[comps[0].tdf(&x, 6), comps[1].tdf(&x, 6)], r.ks_l);
                assert!((v - f.value(n)).abs() < 1e-14);
                assert!((w[0] - contrib[0].1).abs() < 1e-12 && (w[1] - contrib[1].1).abs() < 1e-12);
            }
        }
    }
}

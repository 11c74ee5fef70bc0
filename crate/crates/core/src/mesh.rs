//! Structured background grids, hyper-element meshes and design-domain
//! sub-regions.
//!
//! Node and cell numbering is lexicographic with x fastest, then y, then z:
//! node `(i, j, k)` has index `i + (nx + 1) * (j + (ny + 1) * k)`. Output files
//! rely on this ordering being stable.

use crate::error::{Error, Result};
use crate::geometry::Component;

/// Local corner offsets of a cell, counter-clockwise in the xy-plane, bottom
/// face first in 3D. The first four entries are the 2D quad corners.
pub const CORNER_OFFSETS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Uniform structured grid of square/cubic-ish cells on `[0, lx] x [0, ly] (x [0, lz])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    cells: [usize; 3],
    lengths: [f64; 3],
    spacing: [f64; 3],
}

/// The fine grid used for geometry description and numerical integration.
pub type BackgroundGrid = Grid;

impl Grid {
    pub fn new_2d(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Self::new(2, [nx, ny, 1], [lx, ly, 1.0])
    }

    pub fn new_3d(nx: usize, ny: usize, nz: usize, lx: f64, ly: f64, lz: f64) -> Result<Self> {
        Self::new(3, [nx, ny, nz], [lx, ly, lz])
    }

    /// Builds a 2D or 3D grid; for `dim == 2` the third entries are ignored.
    pub fn new(dim: usize, cells: [usize; 3], lengths: [f64; 3]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        let mut cells = cells;
        let mut lengths = lengths;
        if dim == 2 {
            cells[2] = 1;
            lengths[2] = 1.0;
        }
        for d in 0..dim {
            if cells[d] == 0 {
                return Err(Error::InvalidGrid(format!("cell count along axis {d} is zero")));
            }
            if !(lengths[d] > 0.0 && lengths[d].is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "domain length along axis {d} must be positive, got {}",
                    lengths[d]
                )));
            }
        }
        let mut spacing = [1.0; 3];
        for d in 0..dim {
            spacing[d] = lengths[d] / cells[d] as f64;
        }
        Ok(Self { dim, cells, lengths, spacing })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per direction; the z entry is 1 for 2D grids.
    pub fn cells(&self) -> [usize; 3] {
        self.cells
    }

    /// Nodes per direction; the z entry is 1 for 2D grids.
    pub fn node_dims(&self) -> [usize; 3] {
        let z = if self.dim == 3 { self.cells[2] + 1 } else { 1 };
        [self.cells[0] + 1, self.cells[1] + 1, z]
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing[..self.dim].iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Area (2D) or volume (3D) of one cell, `A_g`.
    pub fn cell_measure(&self) -> f64 {
        self.spacing[..self.dim].iter().product()
    }

    pub fn domain_measure(&self) -> f64 {
        self.lengths[..self.dim].iter().product()
    }

    pub fn num_nodes(&self) -> usize {
        self.node_dims().iter().product()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn corners_per_cell(&self) -> usize {
        1 << self.dim
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        let [nx, ny, _] = self.node_dims();
        i + nx * (j + ny * k)
    }

    #[inline]
    pub fn node_ijk(&self, n: usize) -> [usize; 3] {
        let [nx, ny, _] = self.node_dims();
        [n % nx, (n / nx) % ny, n / (nx * ny)]
    }

    #[inline]
    pub fn node_coords(&self, n: usize) -> [f64; 3] {
        let [i, j, k] = self.node_ijk(n);
        self.ijk_coords(i, j, k)
    }

    #[inline]
    pub fn ijk_coords(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let z = if self.dim == 3 { k as f64 * self.spacing[2] } else { 0.0 };
        [i as f64 * self.spacing[0], j as f64 * self.spacing[1], z]
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.cells[0] * (j + self.cells[1] * k)
    }

    #[inline]
    pub fn cell_ijk(&self, c: usize) -> [usize; 3] {
        let [nx, ny, _] = self.cells;
        [c % nx, (c / nx) % ny, c / (nx * ny)]
    }

    pub fn cell_center(&self, c: usize) -> [f64; 3] {
        let ijk = self.cell_ijk(c);
        let mut x = [0.0; 3];
        for d in 0..self.dim {
            x[d] = (ijk[d] as f64 + 0.5) * self.spacing[d];
        }
        x
    }

    /// Global node indices of the corners of cell `(i, j, k)` in
    /// [`CORNER_OFFSETS`] order. Only the first `corners_per_cell()` entries
    /// are meaningful.
    #[inline]
    pub fn cell_corners(&self, i: usize, j: usize, k: usize) -> [usize; 8] {
        let mut out = [0; 8];
        for (e, off) in CORNER_OFFSETS.iter().take(self.corners_per_cell()).enumerate() {
            out[e] = self.node_index(i + off[0], j + off[1], k + off[2]);
        }
        out
    }

    /// Number of cells sharing node `n` (1, 2, 4 or 8).
    pub fn cells_at_node(&self, n: usize) -> usize {
        let ijk = self.node_ijk(n);
        let mut count = 1;
        for d in 0..self.dim {
            let interior = ijk[d] > 0 && ijk[d] < self.cells[d];
            if interior {
                count *= 2;
            }
        }
        count
    }

    /// Node indices whose coordinates fall inside the closed box `[lo, hi]`
    /// (tolerance relative to the grid spacing).
    pub fn nodes_in_box(&self, lo: [f64; 3], hi: [f64; 3]) -> Vec<usize> {
        let dims = self.node_dims();
        let mut ranges = [(0usize, 0usize); 3];
        for d in 0..3 {
            if d >= self.dim {
                ranges[d] = (0, 0);
                continue;
            }
            let tol = 1e-9 * self.spacing[d];
            let a = ((lo[d] - tol) / self.spacing[d]).ceil().max(0.0);
            let b = ((hi[d] + tol) / self.spacing[d]).floor();
            if b < 0.0 || a > (dims[d] - 1) as f64 || a > b {
                return Vec::new();
            }
            ranges[d] = (a as usize, (b as usize).min(dims[d] - 1));
        }
        let mut out = Vec::new();
        for k in ranges[2].0..=ranges[2].1 {
            for j in ranges[1].0..=ranges[1].1 {
                for i in ranges[0].0..=ranges[0].1 {
                    out.push(self.node_index(i, j, k));
                }
            }
        }
        out
    }

    /// The node closest to `x`, if it lies within `tol` (absolute) of it.
    pub fn node_at(&self, x: [f64; 3], tol: f64) -> Option<usize> {
        let dims = self.node_dims();
        let mut ijk = [0usize; 3];
        for d in 0..self.dim {
            let r = (x[d] / self.spacing[d]).round();
            if r < 0.0 || r > (dims[d] - 1) as f64 {
                return None;
            }
            ijk[d] = r as usize;
        }
        let n = self.node_index(ijk[0], ijk[1], ijk[2]);
        let y = self.node_coords(n);
        let dist2: f64 = (0..self.dim).map(|d| (x[d] - y[d]).powi(2)).sum();
        (dist2.sqrt() <= tol).then_some(n)
    }
}

/// Coarse displacement mesh; each hyper-element owns `ratio^dim` background cells.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperMesh {
    coarse: Grid,
    background: Grid,
    ratio: usize,
}

impl HyperMesh {
    pub fn new(background: &Grid, ratio: usize) -> Result<Self> {
        if ratio == 0 {
            return Err(Error::InvalidGrid("hyper-element ratio must be at least 1".into()));
        }
        let mut coarse_cells = [1; 3];
        for d in 0..background.dim() {
            let n = background.cells()[d];
            if n % ratio != 0 {
                return Err(Error::NonDivisibleRatio { axis: ['x', 'y', 'z'][d], cells: n, ratio });
            }
            coarse_cells[d] = n / ratio;
        }
        let coarse = Grid::new(background.dim(), coarse_cells, background.lengths())?;
        Ok(Self { coarse, background: background.clone(), ratio })
    }

    pub fn coarse(&self) -> &Grid {
        &self.coarse
    }

    pub fn background(&self) -> &Grid {
        &self.background
    }

    /// Background cells per hyper-element edge, `n_be`.
    pub fn ratio(&self) -> usize {
        self.ratio
    }

    pub fn dim(&self) -> usize {
        self.coarse.dim()
    }

    /// Integration points (background cells) per hyper-element, `ng`.
    pub fn points_per_element(&self) -> usize {
        self.ratio.pow(self.dim() as u32)
    }

    pub fn num_elements(&self) -> usize {
        self.coarse.num_cells()
    }

    pub fn num_dofs(&self) -> usize {
        self.coarse.num_nodes() * self.dim()
    }

    /// Natural coordinates in `[-1, 1]^dim` of the background-cell centers
    /// inside one hyper-element, in local lexicographic order (x fastest).
    pub fn local_points(&self) -> Vec<[f64; 3]> {
        let r = self.ratio;
        let nz = if self.dim() == 3 { r } else { 1 };
        let coord = |a: usize| -1.0 + (2 * a + 1) as f64 / r as f64;
        let mut pts = Vec::with_capacity(self.points_per_element());
        for c in 0..nz {
            for b in 0..r {
                for a in 0..r {
                    let z = if self.dim() == 3 { coord(c) } else { 0.0 };
                    pts.push([coord(a), coord(b), z]);
                }
            }
        }
        pts
    }

    /// Background cell indices owned by hyper-element `e`, in the same local
    /// order as [`Self::local_points`].
    pub fn owned_cells(&self, e: usize) -> Vec<usize> {
        let [ci, cj, ck] = self.coarse.cell_ijk(e);
        let r = self.ratio;
        let nz = if self.dim() == 3 { r } else { 1 };
        let mut out = Vec::with_capacity(self.points_per_element());
        for c in 0..nz {
            for b in 0..r {
                for a in 0..r {
                    let k = if self.dim() == 3 { ck * r + c } else { 0 };
                    out.push(self.background.cell_index(ci * r + a, cj * r + b, k));
                }
            }
        }
        out
    }

    /// Physical integration points `x0_{i,j}` (background-cell centers) of hyper-element `e`.
    pub fn integration_points(&self, e: usize) -> Vec<[f64; 3]> {
        self.owned_cells(e).into_iter().map(|c| self.background.cell_center(c)).collect()
    }
}

/// Non-overlapping tiling of the design domain into sub-regions that confine
/// component centers.
#[derive(Debug, Clone, PartialEq)]
pub struct SubregionGrid {
    dim: usize,
    counts: [usize; 3],
    lengths: [f64; 3],
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl SubregionGrid {
    pub fn new(dim: usize, counts: [usize; 3], lengths: [f64; 3]) -> Result<Self> {
        for d in 0..dim {
            if counts[d] == 0 {
                return Err(Error::InvalidGrid(format!("sub-region count along axis {d} is zero")));
            }
        }
        let mut counts = counts;
        if dim == 2 {
            counts[2] = 1;
        }
        Ok(Self { dim, counts, lengths })
    }

    pub fn for_grid(grid: &Grid, counts: [usize; 3]) -> Result<Self> {
        Self::new(grid.dim(), counts, grid.lengths())
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn len(&self) -> usize {
        self.counts[..self.dim].iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn region_box(&self, index: [usize; 3]) -> Aabb {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for d in 0..self.dim {
            let w = self.lengths[d] / self.counts[d] as f64;
            lo[d] = index[d] as f64 * w;
            hi[d] = if index[d] + 1 == self.counts[d] { self.lengths[d] } else { (index[d] + 1) as f64 * w };
        }
        Aabb { lo, hi }
    }

    /// Sub-region containing `x` using half-open boxes `[lo, hi)`, except the
    /// last box in each direction which is closed.
    pub fn locate(&self, x: [f64; 3]) -> Result<[usize; 3]> {
        let mut idx = [0usize; 3];
        for d in 0..self.dim {
            let l = self.lengths[d];
            if !(x[d] >= 0.0 && x[d] <= l) {
                return Err(Error::CenterOutsideDomain { center: x });
            }
            let w = l / self.counts[d] as f64;
            let i = (x[d] / w).floor() as usize;
            idx[d] = i.min(self.counts[d] - 1);
        }
        Ok(idx)
    }

    pub fn boxes(&self) -> Vec<Aabb> {
        let mut out = Vec::with_capacity(self.len());
        for k in 0..self.counts[2] {
            for j in 0..self.counts[1] {
                for i in 0..self.counts[0] {
                    out.push(self.region_box([i, j, k]));
                }
            }
        }
        out
    }
}

/// Per-parameter box bounds for one component (center entries are replaced
/// by the enclosing sub-region).
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ParameterBounds {
    /// Size floors of `1e-3 * min domain edge`, size ceilings from
    /// `size_upper` (one entry per size parameter), angles over the
    /// component's admissible range and centers over the whole domain.
    pub fn for_domain<C: Component>(lengths: [f64; 3], dim: usize, size_upper: &[f64]) -> Result<Self> {
        if size_upper.len() != C::SIZE_PARAMS.len() {
            return Err(Error::Dimension(format!(
                "{} size ceilings for {} size parameters",
                size_upper.len(),
                C::SIZE_PARAMS.len()
            )));
        }
        let min_edge = lengths[..dim].iter().copied().fold(f64::INFINITY, f64::min);
        let floor = 1e-3 * min_edge;
        let mut lower = vec![0.0; C::NUM_PARAMS];
        let mut upper = vec![0.0; C::NUM_PARAMS];
        for (d, &p) in C::CENTER_PARAMS.iter().enumerate() {
            upper[p] = lengths[d];
        }
        for (&p, &u) in C::SIZE_PARAMS.iter().zip(size_upper) {
            if !(u > floor) {
                return Err(Error::Dimension(format!("size ceiling {u} must exceed the floor {floor}")));
            }
            lower[p] = floor;
            upper[p] = u;
        }
        for &p in C::ANGLE_PARAMS {
            lower[p] = C::ANGLE_RANGE.0;
            upper[p] = C::ANGLE_RANGE.1;
        }
        Ok(Self { lower, upper })
    }
}

/// Flat design-vector bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Confines each component center to the sub-region containing its initial
/// position; every other parameter takes the bounds in `global`.
pub fn partition_bounds<C: Component>(
    subregions: &SubregionGrid,
    components: &[C],
    global: &ParameterBounds,
) -> Result<DesignBounds> {
    let np = C::NUM_PARAMS;
    let mut lower = Vec::with_capacity(components.len() * np);
    let mut upper = Vec::with_capacity(components.len() * np);
    for c in components {
        let center = c.center();
        let region = subregions.region_box(subregions.locate(center)?);
        let mut lo = global.lower.clone();
        let mut hi = global.upper.clone();
        for (d, &p) in C::CENTER_PARAMS.iter().enumerate() {
            lo[p] = region.lo[d];
            hi[p] = region.hi[d];
        }
        lower.extend(lo);
        upper.extend(hi);
    }
    Ok(DesignBounds { lower, upper })
}

//! Grayscale rasters of the material field.

use std::io::Write;

use crate::error::{Error, Result};
use crate::mesh::Grid;

/// Gray level of one node: `round(255 * (h - alpha_min) / (1 - alpha_min))`,
/// clamped to `0..=255`.
pub fn gray_level(h: f64, alpha_min: f64) -> u8 {
    let v = 255.0 * (h - alpha_min) / (1.0 - alpha_min);
    v.round().clamp(0.0, 255.0) as u8
}

/// Binary PGM (P5) image of nodal Heaviside values on a 2D grid, one pixel
/// per node. The first image row is the top of the domain (largest y).
pub fn write_pgm<W: Write>(mut out: W, nodal_h: &[f64], grid: &Grid, alpha_min: f64) -> Result<()> {
    if grid.dim() != 2 {
        return Err(Error::Dimension("rasters need a 2D grid".into()));
    }
    if nodal_h.len() != grid.num_nodes() {
        return Err(Error::Dimension(format!("{} values for {} nodes", nodal_h.len(), grid.num_nodes())));
    }
    let [nx, ny, _] = grid.node_dims();
    write!(out, "P5\n{nx} {ny}\n255\n")?;
    let mut row = vec![0u8; nx];
    for j in (0..ny).rev() {
        for (i, px) in row.iter_mut().enumerate() {
            *px = gray_level(nodal_h[grid.node_index(i, j, 0)], alpha_min);
        }
        out.write_all(&row)?;
    }
    Ok(())
}

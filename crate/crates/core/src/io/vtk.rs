//! Legacy ASCII VTK export of nodal fields.

use std::io::Write;

use crate::error::{Error, Result};
use crate::mesh::Grid;

/// Writes `values` (one per grid node) as `STRUCTURED_POINTS` point data
/// named `name`. 2D grids are written with a single z layer.
pub fn write_vtk<W: Write>(mut out: W, grid: &Grid, name: &str, values: &[f64]) -> Result<()> {
    if values.len() != grid.num_nodes() {
        return Err(Error::Dimension(format!("{} values for {} nodes", values.len(), grid.num_nodes())));
    }
    let [nx, ny, nz] = grid.node_dims();
    let h = grid.spacing();
    let hz = if grid.dim() == 3 { h[2] } else { 1.0 };
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{name}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET STRUCTURED_POINTS")?;
    writeln!(out, "DIMENSIONS {nx} {ny} {nz}")?;
    writeln!(out, "ORIGIN 0 0 0")?;
    writeln!(out, "SPACING {} {} {}", h[0], h[1], hz)?;
    writeln!(out, "POINT_DATA {}", values.len())?;
    writeln!(out, "SCALARS {name} double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for row in values.chunks(nx) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_layout() {
        let g = Grid::new_3d(1, 1, 1, 1.0, 2.0, 3.0).unwrap();
        let v: Vec<f64> = (0..8).map(|i| i as f64 * 0.5).collect();
        let mut buf = Vec::new();
        write_vtk(&mut buf, &g, "density", &v).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[4], "DIMENSIONS 2 2 2");
        assert_eq!(lines[6], "SPACING 1 2 3");
        assert_eq!(lines[7], "POINT_DATA 8");
        assert_eq!(lines[10], "0 0.5");
        assert_eq!(lines.len(), 14);
    }
}

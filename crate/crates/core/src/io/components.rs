//! Plain-text component snapshots.
//!
//! ```text
//! # dim 2
//! id x0 y0 a t1 t2 theta
//! 0 0.375 0.333 0.65 0.0221 0.0221 0.7297
//! ```
//!
//! Values use shortest round-trip float formatting, so parsing a file
//! reproduces the design exactly.

use std::io::{BufRead, Write};

use crate::driver::Design;
use crate::error::{Error, Result};

pub fn write_components<W: Write>(mut out: W, design: &Design) -> Result<()> {
    writeln!(out, "# dim {}", design.dim())?;
    writeln!(out, "id {}", design.param_names().join(" "))?;
    let np = design.params_per_component();
    for (id, p) in design.to_vector().chunks(np).enumerate() {
        let vals: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{id} {}", vals.join(" "))?;
    }
    Ok(())
}

pub fn read_components<R: BufRead>(input: R) -> Result<Design> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| Error::Parse("empty component file".into()))??;
    let dim: usize = first
        .strip_prefix("# dim ")
        .and_then(|d| d.trim().parse().ok())
        .ok_or_else(|| Error::Parse(format!("line 1: expected `# dim N`, found `{first}`")))?;
    let header = lines.next().ok_or_else(|| Error::Parse("missing column header".into()))??;
    let np = header.split_whitespace().count().saturating_sub(1);
    let mut x = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 3;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != np + 1 {
            return Err(Error::Parse(format!("line {lineno}: expected {} fields, found {}", np + 1, fields.len())));
        }
        for f in &fields[1..] {
            x.push(f.parse::<f64>().map_err(|_| Error::Parse(format!("line {lineno}: bad number `{f}`")))?);
        }
    }
    let design = Design::from_vector(dim, &x)?;
    if !design.is_empty() && design.params_per_component() != np {
        return Err(Error::Parse(format!("{np} columns do not match a {dim}D component")));
    }
    Ok(design)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Component2D, Component3D};

    #[test]
    fn exact_round_trip() {
        let d = Design::Planar(vec![
            Component2D::new(0.1 + 0.2, 1.0 / 3.0, 0.7, 1e-3, 0.123456789012345, -2.5).unwrap(),
            Component2D::new(5.0, 2.0, 1.0, 0.1, 0.2, 0.3).unwrap(),
        ]);
        let mut buf = Vec::new();
        write_components(&mut buf, &d).unwrap();
        assert_eq!(read_components(&buf[..]).unwrap(), d);

        let d3 = Design::Solid(vec![Component3D::new([1.0, 2.0, 3.0], [0.5, 0.1, 0.2], 0.1, -0.2, 0.3).unwrap()]);
        let mut buf = Vec::new();
        write_components(&mut buf, &d3).unwrap();
        assert_eq!(read_components(&buf[..]).unwrap(), d3);
    }

    #[test]
    fn rejects_wrong_width() {
        let text = "# dim 2\nid x0 y0 a t1 t2 theta\n0 1 2 3\n";
        assert!(read_components(text.as_bytes()).is_err());
    }
}

//! Fast self-checks of the numerical building blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fea::{hyper_element_stiffness, LoadCase, LocalStiffness, MaterialSpec, PointLoad, SolverSettings, Support};
use crate::geometry::{ks_aggregate, rotation_matrix, Component, Component2D, RegularizationParams};
use crate::mesh::{Aabb, Grid, HyperMesh};

use super::analysis::Analysis;
use super::problem::cantilever;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

/// Runs every check with random inputs drawn from `seed`.
pub fn invariant_checks(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        ks_bounds(&mut rng),
        heaviside_shape(),
        rotation_orthonormal(&mut rng)?,
        element_symmetry(&mut rng)?,
        gradient_agreement(&mut rng)?,
    ])
}

fn ks_bounds(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let l = 100.0;
    let mut worst = 0.0f64;
    let mut ok = true;
    for _ in 0..2000 {
        let n = rng.random_range(1..20);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let gap = ks_aggregate(&v, l).0 - max;
        ok &= gap >= 0.0 && gap <= (n as f64).ln() / l + 1e-15;
        worst = worst.max(gap);
    }
    outcome("ks-bounds", ok, format!("largest overestimate {worst:.3e}"))
}

fn heaviside_shape() -> CheckOutcome {
    let reg = RegularizationParams { epsilon: 0.1, alpha_min: 1e-3, ks_l: 100.0, p_exp: 6 };
    let mut err = (reg.heaviside(-0.1) - 1e-3).abs() + (reg.heaviside(0.1) - 1.0).abs();
    err += (reg.heaviside(0.0) - (1.0 + 1e-3) / 2.0).abs();
    let h = 1e-6;
    for x in [-0.07, -0.02, 0.0, 0.05, 0.09] {
        let fd = (reg.heaviside(x + h) - reg.heaviside(x - h)) / (2.0 * h);
        err = err.max((fd - reg.heaviside_deriv(x)).abs());
    }
    outcome("heaviside", err <= 1e-8, format!("max deviation {err:.3e}"))
}

fn rotation_orthonormal(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let half = std::f64::consts::FRAC_PI_2;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let r = rotation_matrix(rng.random_range(-half..half), rng.random_range(-half..half), rng.random_range(-half..half))?;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                worst = worst.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    Ok(outcome("rotation", worst <= 1e-12, format!("max |R^T R - I| {worst:.3e}")))
}

fn element_symmetry(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for (grid, ratio) in [(Grid::new_2d(8, 8, 1.0, 1.0)?, 4), (Grid::new_3d(4, 4, 4, 1.0, 1.0, 1.0)?, 2)] {
        let mesh = HyperMesh::new(&grid, ratio)?;
        let local = LocalStiffness::new(&mesh, &MaterialSpec::default());
        let moduli: Vec<f64> = (0..grid.num_cells()).map(|_| rng.random_range(1e-3..1.0)).collect();
        let k = hyper_element_stiffness(&mesh, &local, &moduli, 0);
        let n = local.dofs();
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((k[i * n + j] - k[j * n + i]).abs());
            }
        }
    }
    Ok(outcome("element-symmetry", worst <= 1e-12, format!("max asymmetry {worst:.3e}")))
}

fn gradient_agreement(rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    // Every component crosses a central pillar so that none floats in
    // the void. A short block clamped at the bottom and pushed down at the top keeps
    // displacements small, which keeps the rounding noise of the
    // difference quotients well below the tolerance.
    let mut problem = cantilever([32, 16], 2, [1, 1]);
    problem.lengths = [4.0, 2.0, 1.0];
    problem.load = LoadCase {
        point_loads: vec![PointLoad { point: [2.0, 2.0, 0.0], direction: 1, magnitude: -1.0 }],
        supports: vec![Support {
            region: Aabb { lo: [0.0, 0.0, 0.0], hi: [4.0, 0.0, 0.0] },
            components: vec![0, 1],
        }],
        ..LoadCase::default()
    };
    let grid = problem.grid()?;
    let reg = RegularizationParams::for_grid(&grid);
    let mut analysis = Analysis::new(&problem, reg, MaterialSpec::default(), SolverSettings::default())?;
    let mut comps = vec![Component2D::new(
        rng.random_range(1.9..2.1),
        rng.random_range(0.9..1.1),
        rng.random_range(1.2..1.4),
        rng.random_range(0.4..0.6),
        rng.random_range(0.4..0.6),
        rng.random_range(1.5..1.64),
    )?];
    for _ in 0..3 {
        comps.push(Component2D::new(
            rng.random_range(1.5..2.5),
            rng.random_range(0.6..1.4),
            rng.random_range(0.8..1.4),
            rng.random_range(0.2..0.4),
            rng.random_range(0.2..0.4),
            rng.random_range(-1.5..1.5),
        )?);
    }
    let eval = analysis.evaluate(&comps, true)?;
    let (dc, dv) = (eval.d_compliance.unwrap_or_default(), eval.d_volume.unwrap_or_default());
    let step = 1e-6;
    let np = Component2D::NUM_PARAMS;
    let mut fd = [vec![0.0; dc.len()], vec![0.0; dv.len()]];
    for idx in 0..comps.len() * np {
        let (id, k) = (idx / np, idx % np);
        for sign in [1.0, -1.0] {
            let mut p = comps[id].params();
            p[k] += sign * step;
            let mut trial = comps.clone();
            trial[id] = Component2D::from_params(&p)?;
            let e = analysis.evaluate(&trial, false)?;
            fd[0][idx] += sign * e.compliance / (2.0 * step);
            fd[1][idx] += sign * e.volume.raw / (2.0 * step);
        }
    }
    // entries far below the largest one sit at the rounding floor of the
    // difference quotient and are compared absolutely
    let (mut worst, mut passed, mut compared) = (0.0f64, true, 0);
    for (fd, g) in [(&fd[0], &dc), (&fd[1], &dv)] {
        let floor = 1e-8 * fd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (f, g) in fd.iter().zip(g.iter()) {
            if f.abs() >= 1e-10 {
                let rel = (g - f).abs() / f.abs();
                worst = worst.max(rel);
                passed &= rel <= 1e-4 || (g - f).abs() <= floor;
                compared += 1;
            }
        }
    }
    Ok(outcome("gradient-fd", passed, format!("max relative deviation {worst:.3e} over {compared} entries")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in invariant_checks(1).unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}

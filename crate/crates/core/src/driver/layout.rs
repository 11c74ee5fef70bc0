//! Initial component layouts made of crossed pairs on a uniform cell grid.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Component, Component2D, Component3D};

/// Crossed-pair layout recipe.
///
/// The domain is split into `cells` equal layout cells (z ignored in 2D).
/// Every cell receives `per_cell` components centred on the cell centre,
/// arranged as `per_cell / 2` crossed pairs at angles `+-theta_j` with
/// `theta_j = (j + 1) * pi / (2 * (per_cell / 2 + 1))`. An odd count adds one
/// horizontal component.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutRecipe {
    pub cells: [usize; 3],
    pub per_cell: usize,
    /// Half-length as a fraction of half the layout-cell diagonal.
    pub length_fraction: f64,
    /// Half-thickness; `None` sizes it so the summed component volume equals
    /// the target volume (overlaps ignored).
    pub thickness: Option<f64>,
}

impl LayoutRecipe {
    pub fn num_components(&self, dim: usize) -> usize {
        self.cells[..dim].iter().product::<usize>() * self.per_cell
    }
}

/// Area (2D) of `|x|^p + |y|^p <= 1` divided by 4, and the analogous volume
/// fraction of the unit cube in 3D.
pub fn superellipse_fill(dim: usize, p_exp: i32) -> f64 {
    let p = p_exp as f64;
    let g1 = libm::tgamma(1.0 + 1.0 / p);
    g1.powi(dim as i32) / libm::tgamma(1.0 + dim as f64 / p)
}

/// A set of components of either dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Design {
    Planar(Vec<Component2D>),
    Solid(Vec<Component3D>),
}

impl Design {
    pub fn dim(&self) -> usize {
        match self {
            Design::Planar(_) => 2,
            Design::Solid(_) => 3,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Design::Planar(c) => c.len(),
            Design::Solid(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn params_per_component(&self) -> usize {
        match self {
            Design::Planar(_) => Component2D::NUM_PARAMS,
            Design::Solid(_) => Component3D::NUM_PARAMS,
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            Design::Planar(_) => Component2D::PARAM_NAMES,
            Design::Solid(_) => Component3D::PARAM_NAMES,
        }
    }

    /// Flat component-major design vector.
    pub fn to_vector(&self) -> Vec<f64> {
        match self {
            Design::Planar(c) => flatten(c),
            Design::Solid(c) => flatten(c),
        }
    }

    pub fn from_vector(dim: usize, x: &[f64]) -> Result<Self> {
        match dim {
            2 => Ok(Design::Planar(unflatten(x)?)),
            3 => Ok(Design::Solid(unflatten(x)?)),
            _ => Err(Error::Dimension(format!("unsupported dimension {dim}"))),
        }
    }
}

pub fn flatten<C: Component>(components: &[C]) -> Vec<f64> {
    components.iter().flat_map(|c| c.params()).collect()
}

pub fn unflatten<C: Component>(x: &[f64]) -> Result<Vec<C>> {
    if x.len() % C::NUM_PARAMS != 0 {
        return Err(Error::Dimension(format!("{} values is not a multiple of {}", x.len(), C::NUM_PARAMS)));
    }
    x.chunks(C::NUM_PARAMS).map(C::from_params).collect()
}

/// Randomly shifts every component centre by up to `amount / 2` of a
/// layout cell along each axis and every angle by up to `amount * pi / 4`.
/// The perturbation is a pure function of `seed`.
pub fn jitter_design(design: &Design, recipe: &LayoutRecipe, lengths: [f64; 3], amount: f64, seed: u64) -> Result<Design> {
    use rand::{Rng, SeedableRng};
    if amount == 0.0 {
        return Ok(design.clone());
    }
    let dim = design.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let names = design.param_names();
    let np = names.len();
    let mut x = design.to_vector();
    for comp in x.chunks_mut(np) {
        for (v, name) in comp.iter_mut().zip(names) {
            let u: f64 = rng.random_range(-0.5..0.5);
            match *name {
                "x0" | "y0" | "z0" => {
                    let axis = (name.as_bytes()[0] - b'x') as usize;
                    *v += amount * u * lengths[axis] / recipe.cells[axis] as f64;
                }
                "theta" | "alpha" | "beta" => *v += amount * u * PI / 2.0,
                _ => {}
            }
        }
    }
    Design::from_vector(dim, &x)
}

/// Component types that can be placed by [`initial_layout`].
pub trait LayoutComponent: Component {
    fn into_design(components: Vec<Self>) -> Design;

    /// A component of half-length `half_length` and uniform half-thickness
    /// `thickness` centred at `center`, inclined by `angle` in the xy-plane.
    fn crossed(center: [f64; 3], half_length: f64, thickness: f64, angle: f64) -> Result<Self>;

    /// Half-thickness giving total volume `volume` for `count` components.
    fn thickness_for(volume: f64, count: usize, half_length: f64, p_exp: i32) -> f64;
}

impl LayoutComponent for Component2D {
    fn into_design(components: Vec<Self>) -> Design {
        Design::Planar(components)
    }

    fn crossed(center: [f64; 3], half_length: f64, thickness: f64, angle: f64) -> Result<Self> {
        Component2D::new(center[0], center[1], half_length, thickness, thickness, angle)
    }

    fn thickness_for(volume: f64, count: usize, half_length: f64, p_exp: i32) -> f64 {
        volume / (count as f64 * 4.0 * half_length * superellipse_fill(2, p_exp))
    }
}

impl LayoutComponent for Component3D {
    fn into_design(components: Vec<Self>) -> Design {
        Design::Solid(components)
    }

    fn crossed(center: [f64; 3], half_length: f64, thickness: f64, angle: f64) -> Result<Self> {
        Component3D::new(center, [half_length, thickness, thickness], 0.0, 0.0, angle)
    }

    fn thickness_for(volume: f64, count: usize, half_length: f64, p_exp: i32) -> f64 {
        (volume / (count as f64 * 8.0 * half_length * superellipse_fill(3, p_exp))).sqrt()
    }
}

/// Generates the crossed-pair layout on a domain `[0, lengths]` whose
/// summed component volume is `target_volume` unless the recipe fixes the
/// thickness.
pub fn initial_layout<C: LayoutComponent>(
    lengths: [f64; 3],
    recipe: &LayoutRecipe,
    target_volume: f64,
    p_exp: i32,
) -> Result<Vec<C>> {
    let dim = C::DIM;
    if recipe.per_cell == 0 {
        return Err(Error::InvalidComponent("layout needs at least one component per cell".into()));
    }
    if recipe.cells[..dim].iter().any(|&c| c == 0) {
        return Err(Error::InvalidGrid("layout cell count is zero".into()));
    }
    if !(recipe.length_fraction > 0.0) {
        return Err(Error::InvalidComponent(format!("length fraction must be positive, got {}", recipe.length_fraction)));
    }
    let mut size = [0.0; 3];
    for d in 0..dim {
        size[d] = lengths[d] / recipe.cells[d] as f64;
    }
    let diag = size[..2].iter().map(|s| s * s).sum::<f64>().sqrt();
    let half_length = recipe.length_fraction * diag / 2.0;
    let count = recipe.num_components(dim);
    let thickness = match recipe.thickness {
        Some(t) => t,
        None => C::thickness_for(target_volume, count, half_length, p_exp),
    };
    if !(thickness > 0.0 && thickness.is_finite()) {
        return Err(Error::InvalidComponent(format!("layout thickness must be positive, got {thickness}")));
    }

    let pairs = recipe.per_cell / 2;
    let mut angles = Vec::with_capacity(recipe.per_cell);
    for j in 0..pairs {
        let t = (j + 1) as f64 * PI / (2.0 * (pairs + 1) as f64);
        angles.push(t);
        angles.push(-t);
    }
    if recipe.per_cell % 2 == 1 {
        angles.push(0.0);
    }

    let nz = if dim == 3 { recipe.cells[2] } else { 1 };
    let mut out = Vec::with_capacity(count);
    for k in 0..nz {
        for j in 0..recipe.cells[1] {
            for i in 0..recipe.cells[0] {
                let mut center = [(i as f64 + 0.5) * size[0], (j as f64 + 0.5) * size[1], 0.0];
                if dim == 3 {
                    center[2] = (k as f64 + 0.5) * size[2];
                }
                for &angle in &angles {
                    out.push(C::crossed(center, half_length, thickness, angle)?);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recipe(cells: [usize; 3], per_cell: usize) -> LayoutRecipe {
        LayoutRecipe { cells, per_cell, length_fraction: 1.0, thickness: None }
    }

    #[test]
    fn jitter_is_seeded() {
        let recipe = LayoutRecipe { cells: [4, 2, 1], per_cell: 2, length_fraction: 1.0, thickness: None };
        let d = Design::Planar(initial_layout::<Component2D>([4.0, 2.0, 1.0], &recipe, 3.2, 6).unwrap());
        let a = jitter_design(&d, &recipe, [4.0, 2.0, 1.0], 0.2, 5).unwrap();
        assert_eq!(a, jitter_design(&d, &recipe, [4.0, 2.0, 1.0], 0.2, 5).unwrap());
        assert_ne!(a, jitter_design(&d, &recipe, [4.0, 2.0, 1.0], 0.2, 6).unwrap());
        assert_eq!(d, jitter_design(&d, &recipe, [4.0, 2.0, 1.0], 0.0, 5).unwrap());
        for (p, q) in a.to_vector().chunks(6).zip(d.to_vector().chunks(6)) {
            assert!((p[0] - q[0]).abs() <= 0.1 + 1e-12 && (p[1] - q[1]).abs() <= 0.1 + 1e-12);
            assert_eq!(p[2..5], q[2..5]);
        }
    }

    #[test]
    fn cantilever_layout_count() {
        let comps: Vec<Component2D> = initial_layout([12.0, 6.0, 1.0], &recipe([16, 9, 1], 4), 28.8, 6).unwrap();
        assert_eq!(comps.len(), 576);
        assert!(comps.iter().all(|c| c.x0 > 0.0 && c.x0 < 12.0 && c.y0 > 0.0 && c.y0 < 6.0));
    }

    #[test]
    fn single_cross() {
        let comps: Vec<Component2D> = initial_layout([2.0, 2.0, 1.0], &recipe([1, 1, 1], 2), 0.4, 6).unwrap();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].theta, -comps[1].theta);
        assert!((comps[0].theta - PI / 4.0).abs() < 1e-15);
        assert_eq!((comps[0].x0, comps[0].y0), (1.0, 1.0));
    }

    #[test]
    fn thickness_matches_target_volume() {
        let comps: Vec<Component2D> = initial_layout([4.0, 2.0, 1.0], &recipe([2, 1, 1], 2), 0.8, 6).unwrap();
        let c = &comps[0];
        let each = 4.0 * c.a * c.t1 * superellipse_fill(2, 6);
        assert!((each * 4.0 - 0.8).abs() < 1e-12);
        // p = 2 is the ellipse: pi/4 of the bounding rectangle.
        assert!((superellipse_fill(2, 2) - PI / 4.0).abs() < 1e-12);
        assert!((superellipse_fill(3, 2) - PI / 6.0).abs() < 1e-12);
    }

    #[test]
    fn box_layout_count() {
        let comps: Vec<Component3D> = initial_layout([6.0, 5.0, 6.0], &recipe([6, 5, 6], 4), 3.6, 6).unwrap();
        assert_eq!(comps.len(), 720);
        assert!(comps.iter().all(|c| c.alpha == 0.0 && c.beta == 0.0));
    }

    #[test]
    fn rejects_empty_pattern() {
        assert!(initial_layout::<Component2D>([1.0, 1.0, 1.0], &recipe([1, 1, 1], 0), 0.1, 6).is_err());
    }
}

//! Analytic volume-fraction fields used by tests, benchmarks and the CLI.

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::scalar_grid::{CuboidPartition, GridError, NodeLabeling, VolumeFractionField};

/// Sub-samples per axis in cells cut by the interface.
pub const DEFAULT_SAMPLES: usize = 8;

/// Volume fraction of `inside` per cell. `dist` is a signed distance bound
/// (negative inside); cells whose center lies farther than half a diagonal
/// from the interface are classified without sampling.
pub fn fraction_field(
    part: &CuboidPartition,
    samples: usize,
    dist: impl Fn(Vector3<f64>) -> f64 + Sync,
) -> Result<VolumeFractionField, GridError> {
    let h = part.spacing;
    let half_diag = 0.5 * h.norm();
    let values = (0..part.cell_count())
        .into_par_iter()
        .map(|id| {
            let c = part.cell_coords(id);
            let lo = part.vertex_position(c);
            let center = lo + 0.5 * h;
            let d = dist(center);
            if d <= -half_diag {
                return 1.0;
            }
            if d >= half_diag {
                return 0.0;
            }
            let k = samples.max(1);
            let mut inside = 0usize;
            for i in 0..k {
                for j in 0..k {
                    for l in 0..k {
                        let t = Vector3::new((i as f64 + 0.5) / k as f64, (j as f64 + 0.5) / k as f64, (l as f64 + 0.5) / k as f64);
                        if dist(lo + h.component_mul(&t)) < 0.0 {
                            inside += 1;
                        }
                    }
                }
            }
            inside as f64 / (k * k * k) as f64
        })
        .collect();
    VolumeFractionField::new(part.dims, values)
}

/// Ball of radius `r` at `center`.
pub fn sphere(part: &CuboidPartition, center: Vector3<f64>, r: f64) -> Result<VolumeFractionField, GridError> {
    fraction_field(part, DEFAULT_SAMPLES, |x| (x - center).norm() - r)
}

/// Standard sphere: radius `0.3` of the unit box, centered, on `n^3` cells.
pub fn unit_sphere(n: usize) -> Result<(CuboidPartition, VolumeFractionField), GridError> {
    let part = CuboidPartition::unit_box(n)?;
    let field = sphere(&part, Vector3::repeat(0.5), 0.3)?;
    Ok((part, field))
}

/// Two disjoint balls of radius `0.2` in the unit box.
pub fn two_spheres(n: usize) -> Result<(CuboidPartition, VolumeFractionField), GridError> {
    let part = CuboidPartition::unit_box(n)?;
    let a = Vector3::new(0.27, 0.5, 0.5);
    let b = Vector3::new(0.73, 0.5, 0.5);
    let field = fraction_field(&part, DEFAULT_SAMPLES, |x| ((x - a).norm() - 0.2).min((x - b).norm() - 0.2))?;
    Ok((part, field))
}

/// Slab `lo <= z <= hi` of the unit box.
pub fn slab(n: usize, lo: f64, hi: f64) -> Result<(CuboidPartition, VolumeFractionField), GridError> {
    let part = CuboidPartition::unit_box(n)?;
    let field = fraction_field(&part, DEFAULT_SAMPLES, |x| (lo - x[2]).max(x[2] - hi))?;
    Ok((part, field))
}

/// Infinite cylinder of radius `r` along z through the box center.
pub fn cylinder(n: usize, r: f64) -> Result<(CuboidPartition, VolumeFractionField), GridError> {
    let part = CuboidPartition::unit_box(n)?;
    let field = fraction_field(&part, DEFAULT_SAMPLES, |x| ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt() - r)?;
    Ok((part, field))
}

/// Two cubes of `k^3` full cells that touch along one lattice edge, inside
/// an empty `n^3` grid: cells `[a, a+k)^3` and `[a+k, a+2k) x [a+k, a+2k) x [a, a+k)`.
/// Vertex averaging gives the ends of the shared edge a label of `1/8`, so at
/// any level the two surfaces meet in isolated points at most; see
/// [`edge_touching_cube_labels`] for a shared segment.
pub fn edge_touching_cubes(n: usize, k: usize) -> Result<(CuboidPartition, VolumeFractionField), GridError> {
    let part = CuboidPartition::unit([n, n, n])?;
    let a = (n - 2 * k) / 2;
    let in_a = |c: [usize; 3]| (0..3).all(|i| (a..a + k).contains(&c[i]));
    let in_b = |c: [usize; 3]| {
        (a + k..a + 2 * k).contains(&c[0]) && (a + k..a + 2 * k).contains(&c[1]) && (a..a + k).contains(&c[2])
    };
    let field = VolumeFractionField::from_fn(part.dims, |c| if in_a(c) || in_b(c) { 1.0 } else { 0.0 })?;
    Ok((part, field))
}

/// Iso level at which [`edge_touching_cube_labels`] puts the cube edges on
/// the interface.
pub const CUBE_ISO: f64 = 0.25;

/// Vertex labels for the cubes of [`edge_touching_cubes`] set directly:
/// `1` inside a cube, `0.5` on a face, [`CUBE_ISO`] on an edge or corner and
/// `0` outside. The shared lattice edge is then an iso-line of both cubes.
pub fn edge_touching_cube_labels(n: usize, k: usize) -> Result<(CuboidPartition, NodeLabeling), GridError> {
    let part = CuboidPartition::unit([n, n, n])?;
    let a = n.saturating_sub(2 * k) / 2;
    let boxes = [[a, a, a], [a + k, a + k, a]];
    let labels = NodeLabeling::from_fn(&part, |v| {
        boxes
            .iter()
            .filter(|lo| (0..3).all(|i| (lo[i]..=lo[i] + k).contains(&v[i])))
            .map(|lo| match (0..3).filter(|&i| v[i] == lo[i] || v[i] == lo[i] + k).count() {
                0 => 1.0,
                1 => 0.5,
                _ => CUBE_ISO,
            })
            .fold(0.0, f64::max)
    })?;
    Ok((part, labels))
}
